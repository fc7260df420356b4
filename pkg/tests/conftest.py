import itertools
import math

import numpy as np
import pytest
from scipy.stats import unitary_group

TABLE_ROWS = [
    # (phi, theta, alpha) -> (omega, gamma, delta), p_succ
    ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 1.000),
    ((math.pi / 8, math.pi / 2, 0.0), (math.pi / 8, math.pi / 2, -math.pi / 2), 0.210),
    ((math.pi / 4, 0.0, math.pi / 2), (0.0, math.pi / 8, math.pi / 8), 0.133),
    ((math.pi / 2, math.pi / 2, math.pi / 2), (math.pi / 2, 0.0, 0.0), 0.090),
    ((3 * math.pi / 4, math.pi / 2, 0.0), (3 * math.pi / 4, math.pi / 2, -math.pi / 2), 0.088),
    ((math.pi, 0.0, math.pi / 2), (0.0, math.pi / 2, math.pi / 2), 0.111),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unitary(rng, n=2):
    return unitary_group.rvs(n, random_state=rng)


def random_contraction(rng, n=4):
    """Random matrix with singular values drawn from [0, 1]."""
    u, v = unitary_group.rvs(n, random_state=rng), unitary_group.rvs(n, random_state=rng)
    return u @ np.diag(rng.uniform(0, 1, n)) @ v


def permanent_bruteforce(a):
    n = a.shape[0]
    return sum(math.prod(a[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def two_photon_fock(t, in_modes):
    """Output amplitudes of a†_{m1} a†_{m2}|0> under a†_j -> sum_i t_ij a†_i.

    Returns {(i, j): amplitude} over sorted output mode pairs, amplitudes
    normalised to the Fock basis (a doubly occupied mode carries sqrt 2).
    """
    m1, m2 = in_modes
    coeff = {}
    for i1 in range(t.shape[0]):
        for i2 in range(t.shape[0]):
            key = tuple(sorted((i1, i2)))
            coeff[key] = coeff.get(key, 0) + t[i1, m1] * t[i2, m2]
    return {k: (v * math.sqrt(2) if k[0] == k[1] else v) for k, v in coeff.items()}


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion.

    Usage: ``criterion("name", ok, "detail")``; the test also asserts ``ok``.
    """
    def record(name, ok, detail=""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
