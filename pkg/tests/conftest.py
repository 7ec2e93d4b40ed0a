import pytest

from stg2.instance_io import GeneratorConfig, fig2_instance, generate_instance

A, B, C, D, E = range(5)
# link ids of the example network
AC, CE, AD, CD, DE, AB, BC, BE = range(8)


def small_instance(seed, nodes=10, links=18, demands=25, wavelengths=8, volumes=(10, 25, 40),
                   weights=(4, 2, 1), reach=1500):
    cfg = GeneratorConfig(seed=seed, nodes=nodes, links=links, demands=demands, wavelengths=wavelengths,
                          volumes=volumes, volume_weights=weights, reach=reach)
    return generate_instance(cfg)


@pytest.fixture
def fig2():
    return fig2_instance()
