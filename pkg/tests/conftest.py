import numpy as np
import pytest

from strandcc import _kernels
from strandcc.flux import VectorPotentialField
from strandcc.scenario import Scenario, case_study
from strandcc.winding import MachineGeometry, SlotLayout, WindingDescription, WindingMap


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    monkeypatch.setenv(_kernels.ENV_VAR, request.param)
    return request.param


def grid_positions(rng, n, pitch=1e-3, jitter=1e-4, columns=None):
    columns = columns or max(1, int(np.ceil(np.sqrt(n))))
    idx = np.arange(n)
    pos = np.column_stack([(idx % columns) * pitch, (idx // columns) * pitch])
    return pos + rng.uniform(-jitter, jitter, size=pos.shape)


def random_winding(rng, nsh=4, n_slots=3, turns=2, l_active=0.05, l_EW=0.05,
                   r_strd=3e-4, sigma=5.8e7):
    """Winding with every strand present ``turns`` times in every slot."""
    n_c = nsh * turns
    layouts, maps = [], []
    for sid in range(n_slots):
        layouts.append(SlotLayout(sid, grid_positions(rng, n_c), r_strd))
        owner = rng.permutation(np.tile(np.arange(nsh), turns))
        m = np.zeros((n_c, nsh), dtype=np.int8)
        m[np.arange(n_c), owner] = 1 if sid % 2 == 0 else -1
        maps.append(WindingMap(sid, m))
    geometry = MachineGeometry(l_active, l_EW, N_slots=2 * n_slots, p=2, N_c=n_c)
    return WindingDescription(geometry, tuple(layouts), tuple(maps), nsh, sigma)


def random_field(rng, desc, harmonics, scale=1e-2):
    shape = (len(harmonics), len(desc.maps), desc.geometry.N_c)
    vals = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return VectorPotentialField(tuple(harmonics), desc.slot_ids, vals)


def uniform_field(desc, harmonics, value=1e-2 + 0j):
    shape = (len(harmonics), len(desc.maps), desc.geometry.N_c)
    return VectorPotentialField(tuple(harmonics), desc.slot_ids, np.full(shape, value))


def make_scenario(desc, field, supply, omega=2 * np.pi * 50, n_harmonics=None, regime="full",
                  no_load=False):
    n_h = n_harmonics or max([*supply, *field.harmonics, 1])
    return Scenario(desc, field, dict(supply), omega, n_h, regime, no_load)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def case_full():
    return case_study(regime="full")


@pytest.fixture(scope="session")
def case_diagonal():
    return case_study(regime="diagonal")


ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; printed again in the terminal summary."""

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
