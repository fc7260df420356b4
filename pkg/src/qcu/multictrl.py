"""n-controlled unitaries with a qudit target.

The target carrier gets ``n + 1`` levels. Controlled level swaps walk the
excitation ``|1>`` of the target up the ladder ``1 -> 2 -> ... -> n``, one
rung per control, so it reaches level ``n`` only if controls ``C1..C(n-1)``
are all set. A single controlled phase on level ``n`` (conditioned on ``Cn``)
then does the work of the full n-controlled phase, and the swaps are undone
in reverse. Wrapping the circuit in ``V`` and ``V^dagger`` on target levels
{0, 1} turns the phase into ``U = V^dagger diag(1, e^{i theta}) V``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import qmat
from .errors import SizeLimitError, ValidationError

MAX_DIMENSION = 4096

LEVEL_SWAP = "controlled-level-swap"
LEVEL_PHASE = "controlled-level-phase"
LOCAL_UNITARY = "local-unitary"
_KINDS = (LEVEL_SWAP, LEVEL_PHASE, LOCAL_UNITARY)


@dataclass(frozen=True)
class GateOp:
    kind: str
    control: Optional[int] = None
    levels: tuple[int, ...] = ()
    angle: float = 0.0
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if self.kind == LEVEL_SWAP and (len(self.levels) != 2 or self.levels[0] == self.levels[1]):
            raise ValidationError("level swap needs two distinct levels")
        if self.kind == LEVEL_PHASE and len(self.levels) != 1:
            raise ValidationError("level phase needs exactly one level")
        if self.kind == LOCAL_UNITARY:
            if self.matrix is None:
                raise ValidationError("local unitary needs a matrix")
            m = qmat.as_matrix(self.matrix)
            if m.shape != (2, 2) or not qmat.is_unitary(m, 1e-9):
                raise ValidationError("local unitary must be a 2x2 unitary")
            object.__setattr__(self, "matrix", m)
        elif self.control is None:
            raise ValidationError(f"{self.kind} needs a control index")

    def to_dict(self) -> dict:
        if self.kind == LEVEL_SWAP:
            params = {"a": self.levels[0], "b": self.levels[1]}
        elif self.kind == LEVEL_PHASE:
            params = {"level": self.levels[0], "angle": self.angle}
        else:
            params = {"matrix": qmat.matrix_to_dict(self.matrix)}
        return {"kind": self.kind, "control": self.control, "params": params}

    @classmethod
    def from_dict(cls, d: dict) -> "GateOp":
        kind, params, control = d.get("kind"), d.get("params", {}), d.get("control")
        if kind == LEVEL_SWAP:
            return cls(kind, control, (int(params["a"]), int(params["b"])))
        if kind == LEVEL_PHASE:
            return cls(kind, control, (int(params["level"]),), float(params["angle"]))
        if kind == LOCAL_UNITARY:
            return cls(kind, None, matrix=qmat.matrix_from_dict(params["matrix"]))
        raise ValidationError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class QuditCircuit:
    n_controls: int
    target_levels: int
    gates: tuple[GateOp, ...]

    def __post_init__(self):
        if self.n_controls < 1 or self.target_levels < 2:
            raise ValidationError("need at least one control and a target with >= 2 levels")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if g.control is not None and not 0 <= g.control < self.n_controls:
                raise ValidationError(f"control index {g.control} out of range")
            if any(not 0 <= lv < self.target_levels for lv in g.levels):
                raise ValidationError(f"gate levels {g.levels} exceed target_levels={self.target_levels}")

    @property
    def dimension(self) -> int:
        return 2**self.n_controls * self.target_levels

    def counts(self) -> dict:
        return {
            "swaps": sum(g.kind == LEVEL_SWAP for g in self.gates),
            "phases": sum(g.kind == LEVEL_PHASE for g in self.gates),
            "local": sum(g.kind == LOCAL_UNITARY for g in self.gates),
        }

    def to_dict(self) -> dict:
        return {
            "n_controls": self.n_controls,
            "target_levels": self.target_levels,
            "gates": [g.to_dict() for g in self.gates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuditCircuit":
        return cls(int(d["n_controls"]), int(d["target_levels"]),
                   tuple(GateOp.from_dict(g) for g in d["gates"]))


@dataclass(frozen=True)
class NcuCheck:
    deviation: float
    leakage: float


@dataclass(frozen=True)
class ResourceReport:
    n_controls: int
    two_qubit_gate_count: int
    cnot_equivalent_count: int
    cphase_count: int
    success_probability_ours: float
    success_probability_baseline: float

    @property
    def advantage(self) -> float:
        return self.success_probability_ours / self.success_probability_baseline

    def to_dict(self) -> dict:
        return {
            "n_controls": self.n_controls,
            "two_qubit_gate_count": self.two_qubit_gate_count,
            "cnot_equivalent_count": self.cnot_equivalent_count,
            "cphase_count": self.cphase_count,
            "success_probability_ours": self.success_probability_ours,
            "success_probability_baseline": self.success_probability_baseline,
        }


def build_ncu(n: int, theta: float, v=None) -> QuditCircuit:
    if n < 1:
        raise ValidationError("n must be >= 1")
    swaps = [GateOp(LEVEL_SWAP, control=i, levels=(i + 1, i + 2)) for i in range(n - 1)]
    phase = GateOp(LEVEL_PHASE, control=n - 1, levels=(n,), angle=float(theta))
    gates = swaps + [phase] + swaps[::-1]
    if v is not None:
        v = qmat.as_matrix(v)
        gates = [GateOp(LOCAL_UNITARY, matrix=v)] + gates + [GateOp(LOCAL_UNITARY, matrix=v.conj().T)]
    return QuditCircuit(n_controls=n, target_levels=n + 1, gates=tuple(gates))


def _target_operator(g: GateOp, d: int) -> np.ndarray:
    op = np.eye(d, dtype=np.complex128)
    if g.kind == LEVEL_SWAP:
        a, b = g.levels
        op[[a, b]] = op[[b, a]]
    elif g.kind == LEVEL_PHASE:
        op[g.levels[0], g.levels[0]] = np.exp(1j * g.angle)
    else:
        op[:2, :2] = g.matrix
    return op


def _embed(g: GateOp, n: int, d: int) -> np.ndarray:
    op = _target_operator(g, d)
    if g.control is None:
        return np.kron(np.eye(2**n), op)
    # control C_(i+1) is bit (n-1-i) of the control register index
    bit = n - 1 - g.control
    mask = ((np.arange(2**n) >> bit) & 1).astype(float)
    return np.eye(2**n * d, dtype=np.complex128) + np.kron(np.diag(mask), op - np.eye(d))


def simulate_circuit(c: QuditCircuit) -> np.ndarray:
    """Full unitary of ``c`` (controls most significant, C1 first, target last)."""
    if c.dimension > MAX_DIMENSION:
        raise SizeLimitError(f"dimension {c.dimension} exceeds {MAX_DIMENSION}")
    out = np.eye(c.dimension, dtype=np.complex128)
    for g in c.gates:
        out = _embed(g, c.n_controls, c.target_levels) @ out
    return out


def qubit_subspace(n: int, d: int) -> np.ndarray:
    """Indices of basis states whose target sits in level 0 or 1."""
    return np.array([ctrl * d + lv for ctrl in range(2**n) for lv in (0, 1)])


def ideal_ncu(n: int, theta: float, v=None) -> np.ndarray:
    """n-controlled ``U = V^dagger diag(1, e^{i theta}) V`` on n+1 qubits."""
    u = np.diag([1.0, np.exp(1j * theta)]).astype(np.complex128)
    if v is not None:
        v = qmat.as_matrix(v)
        u = v.conj().T @ u @ v
    out = np.eye(2 ** (n + 1), dtype=np.complex128)
    out[-2:, -2:] = u
    return out


def verify_ncu(c: QuditCircuit, n: int, theta: float, v=None) -> NcuCheck:
    """Compare a circuit against the ideal n-controlled U.

    ``deviation`` is the max-norm error of the qubit-subspace block;
    ``leakage`` is the largest amplitude carried out of that subspace.
    """
    if c.n_controls != n:
        raise ValidationError(f"circuit has {c.n_controls} controls, expected {n}")
    full = simulate_circuit(c)
    idx = qubit_subspace(n, c.target_levels)
    block = full[np.ix_(idx, idx)]
    outside = np.setdiff1d(np.arange(c.dimension), idx)
    leakage = qmat.max_abs(full[np.ix_(outside, idx)]) if outside.size else 0.0
    return NcuCheck(deviation=qmat.max_abs(block - ideal_ncu(n, theta, v)), leakage=leakage)


def resource_report(n: int, phi: float, p_cnot: float, p_cphase: float) -> ResourceReport:
    """Gate counts and success probabilities, ours against the all-CNOT ladder.

    ``phi`` is informational: ``p_cphase`` is the success probability of the
    c-phase gate at that angle.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    for name, p in (("p_cnot", p_cnot), ("p_cphase", p_cphase)):
        if not 0.0 < p <= 1.0:
            raise ValidationError(f"{name} must lie in (0, 1], got {p}")
    cnots = 2 * (n - 1)
    return ResourceReport(
        n_controls=n,
        two_qubit_gate_count=cnots + 1,
        cnot_equivalent_count=cnots,
        cphase_count=1,
        success_probability_ours=p_cnot**cnots * p_cphase,
        success_probability_baseline=p_cnot ** (2 * n),
    )
