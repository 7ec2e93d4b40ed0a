"""Solve the five-node example network and print the lightpaths and routing trees."""
from stg2.instance_io import fig2_instance, write_solution
from stg2.parallel import solve_parallel
from stg2.verifier import verify

NAMES = "ABCDE"


def main():
    inst = fig2_instance()
    sol = solve_parallel(inst)
    for l, lp in sorted(sol.lightpaths.items()):
        print(f"lightpath {l}: wavelength {lp.wavelength}, nodes {'-'.join(NAMES[v] for v in lp.nodes)}")
    print(write_solution(sol), end="")
    for line in verify(inst, sol).lines():
        print(line)


if __name__ == "__main__":
    main()
