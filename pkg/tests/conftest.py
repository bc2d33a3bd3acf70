import numpy as np
import pytest

from cavityfront.model import (
    asymmetric_mode_set,
    coupling_matrix,
    default_atoms,
)

OMEGA1 = 6 * np.pi


@pytest.fixture(scope="session")
def small_system():
    """8 retained modes (indices 2..9) around a carrier at 6*pi.

    Small enough for the dense oracle, big enough to exercise every code
    path; the standard gamma/detuning/position values throughout.
    """
    modes = asymmetric_mode_set(2, 8)
    atoms = default_atoms(omega1=OMEGA1)
    coup = coupling_matrix(atoms, modes)
    return atoms, modes, coup
