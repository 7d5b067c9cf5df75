import numpy as np
import pytest

from mopuc import catalog, moments, szego


@pytest.fixture(scope="session")
def bessel_weight():
    return catalog.modified_bessel(1.0)


@pytest.fixture(scope="session")
def bessel_table(bessel_weight):
    return moments.compute_moments(bessel_weight, 24)


@pytest.fixture(scope="session")
def bessel_families(bessel_table):
    return szego.solve_all(bessel_table, 12)


@pytest.fixture(scope="session")
def bessel_lattice(bessel_table, bessel_families):
    return szego.verblunsky_lattice(bessel_table, 12, bessel_families)


@pytest.fixture(scope="session")
def nilpotent_weight():
    return catalog.nilpotent_exponential()


@pytest.fixture(scope="session")
def nilpotent_table(nilpotent_weight):
    return moments.compute_moments(nilpotent_weight, 18)


@pytest.fixture(scope="session")
def nilpotent_families(nilpotent_table):
    return szego.solve_all(nilpotent_table, 9)


@pytest.fixture(scope="session")
def nilpotent_lattice(nilpotent_table, nilpotent_families):
    return szego.verblunsky_lattice(nilpotent_table, 9, nilpotent_families)


@pytest.fixture(scope="session")
def fuchsian_weight():
    return catalog.fuchsian_example()


@pytest.fixture(scope="session")
def fuchsian_table(fuchsian_weight):
    return moments.compute_moments(fuchsian_weight, 20)


@pytest.fixture(scope="session")
def fuchsian_families(fuchsian_table):
    return szego.solve_all(fuchsian_table, 9)


@pytest.fixture(scope="session")
def fuchsian_lattice(fuchsian_table, fuchsian_families):
    return szego.verblunsky_lattice(fuchsian_table, 9, fuchsian_families)


@pytest.fixture(scope="session")
def kmat_weight():
    return catalog.matrix_bessel(np.array([[1.0, 0.3], [0.3, 1.0]]))


@pytest.fixture(scope="session")
def kmat_table(kmat_weight):
    return moments.compute_moments(kmat_weight, 26)


@pytest.fixture(scope="session")
def kmat_lattice(kmat_table):
    return szego.verblunsky_lattice(kmat_table, 10)
