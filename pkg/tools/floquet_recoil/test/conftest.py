import numpy as np
import pytest

from tools.floquet_recoil.core_model import Constants, ElectronState, FieldConfig, derive_params
from tools.floquet_recoil.numerics import QuadratureRule

E0_V_PER_M = 1.0e10
WAVELENGTH_M = 1.0e-6


@pytest.fixture(scope="session")
def constants():
    return Constants.gaussian()


@pytest.fixture(scope="session")
def field(constants):
    return FieldConfig.from_si(E0_V_PER_M, wavelength_m=WAVELENGTH_M, constants=constants)


@pytest.fixture(scope="session")
def counter_field(constants):
    return FieldConfig.from_si(
        E0_V_PER_M, wavelength_m=WAVELENGTH_M, polarization="counterclockwise", constants=constants
    )


@pytest.fixture(scope="session")
def wave_field(constants):
    return FieldConfig.from_si(E0_V_PER_M, wavelength_m=WAVELENGTH_M, mode="plane_wave", constants=constants)


@pytest.fixture(scope="session")
def params(field, constants):
    return derive_params(field, constants)


@pytest.fixture(scope="session")
def rule():
    return QuadratureRule.gauss_legendre(64)


@pytest.fixture
def drifting(constants):
    def make(beta, direction=(1.0, 0.0, 0.0)):
        unit = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
        return ElectronState(tuple(beta * constants.c * unit), constants)

    return make


@pytest.fixture
def field_file(tmp_path):
    def write(text):
        path = tmp_path / "field.yml"
        path.write_text(text)
        return str(path)

    return write
