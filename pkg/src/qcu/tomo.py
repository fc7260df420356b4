"""Single-qubit process tomography on Choi matrices.

Choi matrices use the unnormalised convention
``C = (I (x) u) |Phi><Phi| (I (x) u)^dagger`` with ``|Phi> = |00> + |11>``
(trace 2). Preparing ``|in>`` and projecting onto ``|m>`` has probability
``Tr[C (conj(|in><in|) (x) |m><m|)]``. With all six Pauli eigenstates on both
sides the 36 operators sum to ``9 * I``, so the total probability depends
only on the trace and the estimate can be fitted as a normalised state.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import qmat
from .errors import InsufficientDataError, ValidationError
from .synth import CUParams, compose_w, cu_to_zyz

STATE_LABELS = ("H", "V", "D", "A", "R", "L")
_S = 1.0 / math.sqrt(2.0)
STATES = {
    "H": np.array([1.0, 0.0], dtype=np.complex128),
    "V": np.array([0.0, 1.0], dtype=np.complex128),
    "D": np.array([_S, _S], dtype=np.complex128),
    "A": np.array([_S, -_S], dtype=np.complex128),
    "R": np.array([_S, 1j * _S], dtype=np.complex128),
    "L": np.array([_S, -1j * _S], dtype=np.complex128),
}
CONFIGURATIONS = tuple((i, m) for i in STATE_LABELS for m in STATE_LABELS)

ML_TOL = 1e-10
ML_MAX_ITER = 2000
CHOI_TRACE = 2.0


def _projector(v):
    return np.outer(v, v.conj())


# E[k] for configuration k, in CONFIGURATIONS order
_EFFECTS = np.array([np.kron(_projector(STATES[i]).conj(), _projector(STATES[m]))
                     for i, m in CONFIGURATIONS])


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = qmat.as_matrix(self.matrix)
        if m.shape != (4, 4):
            raise ValidationError(f"single-qubit Choi matrix must be 4x4, got {m.shape}")
        if qmat.max_abs(m - m.conj().T) > 1e-10:
            raise ValidationError("Choi matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValidationError("Choi matrix is not positive semidefinite")
        if np.trace(m).real <= 0:
            raise ValidationError("Choi matrix must have positive trace")
        object.__setattr__(self, "matrix", m)

    def normalized(self) -> np.ndarray:
        return self.matrix / np.trace(self.matrix).real

    def to_dict(self) -> dict:
        return qmat.matrix_to_dict(self.matrix)


@dataclass(frozen=True)
class Noise:
    """Imperfection model for simulated counts.

    ``depolarizing`` mixes the channel with the fully depolarising one at
    ``strength``; ``sample`` draws Poisson counts instead of exact means.
    """

    depolarizing: float = 0.0
    sample: bool = False

    def __post_init__(self):
        if not 0.0 <= self.depolarizing <= 1.0:
            raise ValidationError("depolarizing strength must lie in [0, 1]")

    @classmethod
    def parse(cls, text: str | None) -> "Noise":
        """Parse ``none``, ``poisson``, ``depolarizing=0.1`` or ``depolarizing=0.1,poisson``."""
        if text is None or text.strip().lower() in ("", "none"):
            return cls()
        strength, sample = 0.0, False
        for part in text.lower().split(","):
            part = part.strip()
            if part == "poisson":
                sample = True
                continue
            m = re.fullmatch(r"depolarizing[=:]([0-9.eE+-]+)", part)
            if not m:
                raise ValidationError(f"unrecognised noise term {part!r}")
            strength = float(m.group(1))
        return cls(depolarizing=strength, sample=sample)

    def describe(self) -> str:
        terms = []
        if self.depolarizing:
            terms.append(f"depolarizing={self.depolarizing:g}")
        if self.sample:
            terms.append("poisson")
        return ",".join(terms) or "none"


@dataclass(frozen=True)
class Tomogram:
    configurations: tuple[tuple[str, str], ...]
    counts: np.ndarray
    shots_per_config: int
    seed: Optional[int] = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        if counts.shape != (len(self.configurations),):
            raise ValidationError("one count per configuration is required")
        if np.any(counts < 0):
            raise ValidationError("counts must be non-negative")
        object.__setattr__(self, "configurations", tuple(tuple(c) for c in self.configurations))
        object.__setattr__(self, "counts", counts)

    def count(self, prep: str, meas: str) -> float:
        return float(self.counts[self.configurations.index((prep, meas))])

    def to_dict(self) -> dict:
        return {
            "configurations": [list(c) for c in self.configurations],
            "counts": [float(c) for c in self.counts],
            "shots_per_config": self.shots_per_config,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tomogram":
        return cls(tuple(tuple(c) for c in d["configurations"]), np.array(d["counts"], dtype=float),
                   int(d["shots_per_config"]), d.get("seed"))


@dataclass(frozen=True)
class ProcessScores:
    fidelity: float
    purity: float


def choi_of_unitary(u) -> ChoiMatrix:
    u = qmat.as_matrix(u)
    if u.shape != (2, 2) or not qmat.is_unitary(u, 1e-9):
        raise ValidationError("choi_of_unitary needs a 2x2 unitary")
    phi = np.array([1.0, 0.0, 0.0, 1.0], dtype=np.complex128)
    vec = np.kron(np.eye(2), u) @ phi
    return ChoiMatrix(np.outer(vec, vec.conj()))


def depolarized_choi(u, strength: float) -> ChoiMatrix:
    """Choi matrix of ``rho -> (1-s) u rho u^dagger + s I/2``."""
    c = choi_of_unitary(u).matrix
    return ChoiMatrix((1.0 - strength) * c + strength * np.eye(4) / 2.0)


def expected_probabilities(choi) -> np.ndarray:
    """Per-configuration detection probabilities for a trace-2 Choi matrix."""
    c = choi.matrix if isinstance(choi, ChoiMatrix) else qmat.as_matrix(choi)
    return np.einsum("kij,ji->k", _EFFECTS, c).real


def simulate_tomography(u, shots: int, noise: Noise | str | None = None,
                        seed: int = 0) -> Tomogram:
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    if not isinstance(noise, Noise):
        noise = Noise.parse(noise)
    choi = depolarized_choi(u, noise.depolarizing) if noise.depolarizing else choi_of_unitary(u)
    probs = np.clip(expected_probabilities(choi), 0.0, 1.0)
    probs[probs < 1e-14] = 0.0  # round-off, not signal
    if noise.sample:
        counts = np.random.default_rng(seed).poisson(shots * probs).astype(float)
    else:
        counts = shots * probs
    return Tomogram(CONFIGURATIONS, counts, shots, seed)


def _log_likelihood(freqs, rho):
    q = np.einsum("kij,ji->k", _EFFECTS, rho).real / 9.0
    mask = freqs > 0
    return float(np.sum(freqs[mask] * np.log(np.maximum(q[mask], 1e-300))))


def _initial_estimate(freqs, floor=1e-6):
    """Linear-inversion estimate, projected to a full-rank density matrix."""
    # Tr(rho E) = sum_ij E_ji rho_ij
    basis = _EFFECTS.transpose(0, 2, 1).reshape(len(_EFFECTS), 16) / 9.0
    sol, *_ = np.linalg.lstsq(basis, freqs.astype(np.complex128), rcond=None)
    rho = sol.reshape(4, 4)
    w, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(4, dtype=np.complex128) / 4.0
    rho = (vecs * w) @ vecs.conj().T / w.sum()
    return (1.0 - floor) * rho + floor * np.eye(4) / 4.0


def reconstruct_ml(t: Tomogram, *, max_iter: int = ML_MAX_ITER, tol: float = ML_TOL,
                   history: list | None = None) -> ChoiMatrix:
    """Maximum-likelihood Choi estimate by the ``R rho R`` fixed-point iteration.

    A step that would lower the likelihood is retried with the diluted
    operator ``(I + eps R) / (1 + eps)``, halving ``eps`` until it does not,
    so the log-likelihood never decreases. Pass ``history`` to collect it.
    """
    if set(t.configurations) != set(CONFIGURATIONS):
        raise ValidationError("all 36 preparation/measurement pairs are required")
    order = [t.configurations.index(c) for c in CONFIGURATIONS]
    counts = t.counts[order]
    total = counts.sum()
    if total <= 0:
        raise InsufficientDataError("all tomogram counts are zero")
    freqs = counts / total

    rho = _initial_estimate(freqs)
    ll = _log_likelihood(freqs, rho)
    if history is not None:
        history.append(ll)
    eye = np.eye(4)
    for _ in range(max_iter):
        q = np.einsum("kij,ji->k", _EFFECTS, rho).real / 9.0
        weights = np.where(freqs > 0, freqs / np.maximum(q, 1e-300), 0.0)
        r = np.einsum("k,kij->ij", weights, _EFFECTS) / 9.0
        step, eps = r, None
        while True:
            new = step @ rho @ step
            new = (new + new.conj().T) / 2.0
            new /= np.trace(new).real
            new_ll = _log_likelihood(freqs, new) if np.all(np.isfinite(new)) else -np.inf
            if new_ll >= ll or (eps is not None and eps < 1e-12):
                break
            eps = 1.0 if eps is None else eps / 2.0
            step = (eye + eps * r) / (1.0 + eps)
        change = qmat.max_abs(new - rho)
        if new_ll < ll:
            # dilution bottomed out: keep the current estimate
            break
        rho, ll = new, new_ll
        if history is not None:
            history.append(ll)
        if change < tol:
            break
    # clear tiny negative eigenvalues left by round-off
    w, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    rho = (vecs * np.clip(w, 0.0, None)) @ vecs.conj().T
    rho /= np.trace(rho).real
    return ChoiMatrix(CHOI_TRACE * rho)


def process_fidelity(estimate: ChoiMatrix, ideal: ChoiMatrix) -> float:
    """Overlap ``<phi| C_est |phi> / Tr C_est`` with the pure ideal ``|phi>``."""
    w, vecs = np.linalg.eigh(ideal.matrix)
    if np.sum(w > 1e-9 * w.max()) != 1:
        raise ValidationError("ideal Choi matrix must be rank one")
    top = vecs[:, -1]
    return float(np.vdot(top, estimate.normalized() @ top).real)


def purity(c: ChoiMatrix) -> float:
    """``Tr(C^2) / Tr(C)^2``: 1 for unitary processes, 1/4 when fully mixed."""
    tr = np.trace(c.matrix).real
    if tr <= 0:
        raise ValidationError("Choi matrix has zero trace")
    return float(np.trace(c.matrix @ c.matrix).real / tr**2)


def score(estimate: ChoiMatrix, ideal_unitary) -> ProcessScores:
    return ProcessScores(process_fidelity(estimate, choi_of_unitary(ideal_unitary)), purity(estimate))


# --- synthetic fidelity/purity report ----------------------------------------

TABLE_COLUMNS = ("phi", "theta", "alpha", "omega", "gamma", "delta",
                 "F_off", "P_off", "F_on", "P_on", "p_succ")


@dataclass(frozen=True)
class TableRow:
    phi: float
    theta: float
    alpha: float
    omega: float
    gamma: float
    delta: float
    F_off: float
    P_off: float
    F_on: float
    P_on: float
    p_succ: float
    choi_off: ChoiMatrix = field(repr=False)
    choi_on: ChoiMatrix = field(repr=False)

    def values(self) -> list[float]:
        return [getattr(self, c) for c in TABLE_COLUMNS]


@dataclass
class TableReport:
    rows: list[TableRow]
    shots: int
    noise: Noise
    seed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for row in self.rows:
            writer.writerow([f"{v:.9g}" for v in row.values()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "noise": self.noise.describe(),
            "seed": self.seed,
            "rows": [
                {**{c: getattr(r, c) for c in TABLE_COLUMNS},
                 "choi_off": r.choi_off.to_dict(), "choi_on": r.choi_on.to_dict()}
                for r in self.rows
            ],
        }


def _channel_seed(seed: int, row: int, branch: int) -> int:
    return int(np.random.SeedSequence([seed, row, branch]).generate_state(1)[0])


def table_report(rows: Sequence[CUParams], shots: int, noise: Noise | str | None = None,
                 seed: int = 0, p_succ: Sequence[float] | None = None,
                 optimizer_opts=None) -> TableReport:
    """Simulated tomography of both control branches for each parameter row.

    ``p_succ`` may be supplied (one value per row); otherwise each row's
    c-phase success probability is optimised with ``optimizer_opts``.
    """
    if not isinstance(noise, Noise):
        noise = Noise.parse(noise)
    rows = list(rows)
    if p_succ is None:
        from .optics import optimize_cphase

        p_succ = [optimize_cphase(r.phi, optimizer_opts).p_succ for r in rows]
    elif len(p_succ) != len(rows):
        raise ValidationError("p_succ needs one entry per row")

    out = []
    eye = np.eye(2, dtype=np.complex128)
    for i, (params, p) in enumerate(zip(rows, p_succ)):
        z = cu_to_zyz(params)
        w = compose_w(params)
        chans = []
        for branch, u in enumerate((eye, w)):
            tomogram = simulate_tomography(u, shots, noise, _channel_seed(seed, i, branch))
            est = reconstruct_ml(tomogram)
            chans.append((est, score(est, u)))
        (c_off, s_off), (c_on, s_on) = chans
        out.append(TableRow(
            phi=params.phi, theta=params.theta, alpha=params.alpha,
            omega=z.omega, gamma=z.gamma, delta=z.delta,
            F_off=s_off.fidelity, P_off=s_off.purity, F_on=s_on.fidelity, P_on=s_on.purity,
            p_succ=float(p), choi_off=c_off, choi_on=c_on))
    return TableReport(rows=out, shots=shots, noise=noise, seed=seed)
