"""Two-photon post-selected gate model.

Modes 0, 1 carry the control qubit (|0>, |1>) and modes 2, 3 the signal
qubit. A linear-optical network with extra vacuum modes acts on these four
modes as a contraction ``t`` (largest singular value at most one). With one
photon per qubit, the amplitude for ``|k l> -> |k' l'>`` is the permanent of
the 2x2 submatrix of ``t`` on rows ``{k', 2 + l'}`` and columns
``{k, 2 + l}``; every other outcome is rejected by coincidence detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import qmat
from ..errors import ShapeError, ValidationError

CONTRACTION_TOL = 1e-9


@dataclass(frozen=True)
class ModeTransfer:
    matrix: np.ndarray

    def __post_init__(self):
        m = qmat.as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"mode transfer must be square, got {m.shape}")
        smax = float(np.linalg.norm(m, 2))
        if smax > 1.0 + CONTRACTION_TOL:
            raise ValidationError(f"mode transfer is not a contraction (largest singular value {smax})")
        object.__setattr__(self, "matrix", m)

    @property
    def modes(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CPhaseSpec:
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValidationError("phi must be finite")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    def target(self) -> np.ndarray:
        return np.diag([1.0, 1.0, 1.0, np.exp(1j * self.phi)])


def _as_transfer(t) -> np.ndarray:
    return t.matrix if isinstance(t, ModeTransfer) else qmat.as_matrix(t)


def postselected_map(t) -> np.ndarray:
    """Unnormalised logical map on ``|00>, |01>, |10>, |11>`` (control first)."""
    m = _as_transfer(t)
    if m.shape != (4, 4):
        raise ShapeError(f"postselected_map needs 4 modes, got shape {m.shape}")
    out = np.empty((4, 4), dtype=np.complex128)
    for ko in range(2):
        for lo in range(2):
            rows = [ko, 2 + lo]
            for ki in range(2):
                for li in range(2):
                    cols = [ki, 2 + li]
                    out[2 * ko + lo, 2 * ki + li] = qmat.permanent(m[np.ix_(rows, cols)])
    return out


def cphase_residual(t, spec: CPhaseSpec | float) -> tuple[float, float]:
    """Success probability and squared distance from the ideal c-phase map.

    The map is first rotated so that ``T[0, 0]`` is real and non-negative;
    the target is then ``T[0, 0] * diag(1, 1, 1, exp(i*phi))``.
    """
    if not isinstance(spec, CPhaseSpec):
        spec = CPhaseSpec(spec)
    T = postselected_map(t)
    t00 = T[0, 0]
    if abs(t00) > 0:
        T = T * (np.conj(t00) / abs(t00))
    target = abs(t00) * spec.target()
    return float(abs(t00) ** 2), float(np.sum(np.abs(T - target) ** 2))


def cascade_success(gate_probs: Sequence[float]) -> float:
    """Joint success probability of independent post-selected gates."""
    probs = [float(p) for p in gate_probs]
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability {p} outside [0, 1]")
    return math.prod(probs)
