"""Numerical search for the best post-selected c-phase gate.

The transfer matrix is ``Q1 diag(s) Q2`` with ``Q1``, ``Q2`` unitary (four
input phases followed by six Givens rotations each) and ``s = (1, s1, s2,
s3)`` in ``[0, 1]``. Pinning the top singular value costs nothing, since
any ordering of ``s`` can be absorbed into the unitaries, and it stops the
search from shrinking ``t`` toward the trivially feasible ``t = 0``.

Each restart runs three stages:

1. least-squares on the *relative* violation ``T / T00 - target`` from a
   random start, to land on a feasible point with ``T00 != 0``;
2. L-BFGS-B on ``-p + penalty * residual``, escalating the penalty by 10x
   while the residual stays above threshold;
3. another least-squares pass to push the residual to round-off.

Gradients come from JAX. Every restart draws from its own generator seeded
by ``(seed, restart_index)``, so results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import jax
import jax.numpy as jnp
import numpy as np
from scipy.optimize import least_squares, minimize

from .. import qmat
from ..errors import NoFeasiblePointError, NumericalError, ValidationError
from .model import ModeTransfer, cphase_residual

jax.config.update("jax_enable_x64", True)

FEASIBILITY_TOL = 1e-8
N_PARAMS = 35
_GIVENS_PAIRS = ((0, 1), (2, 3), (1, 2), (0, 1), (2, 3), (1, 2))
_PENALTY_STAGES = 3
_STAGE_ACCEPT = 1e-7
_SEED_NFEV = 20
_POLISH_NFEV = 50

_LOWER = np.r_[np.full(32, -np.inf), np.zeros(3)]
_UPPER = np.r_[np.full(32, np.inf), np.ones(3)]
_BOUNDS = [(None, None)] * 32 + [(0.0, 1.0)] * 3
_ROW_A = np.array([0, 0, 1, 1])
_ROW_B = np.array([2, 3, 2, 3])


@dataclass(frozen=True)
class OptimizerOptions:
    restarts: int = 64
    seed: int = 0
    max_iter: int = 300
    penalty: float = 1e3

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not self.penalty > 0:
            raise ValidationError("penalty must be positive")


@dataclass(frozen=True)
class SuccessReport:
    phi: float
    p_succ: float
    residual: float
    transfer: ModeTransfer = field(repr=False)
    restarts_used: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "p_succ": self.p_succ,
            "residual": self.residual,
            "transfer": qmat.matrix_to_dict(self.transfer.matrix),
            "restarts_used": self.restarts_used,
            "seed": self.seed,
        }


# --- differentiable model ---------------------------------------------------


def _unitary(x):
    u = jnp.diag(jnp.exp(1j * x[:4]))
    for k, (i, j) in enumerate(_GIVENS_PAIRS):
        a, b = x[4 + 2 * k], x[5 + 2 * k]
        c, s = jnp.cos(a) + 0j, jnp.sin(a) + 0j
        g = (jnp.eye(4, dtype=jnp.complex128)
             .at[i, i].set(c).at[j, j].set(c)
             .at[i, j].set(-jnp.exp(1j * b) * s)
             .at[j, i].set(jnp.exp(-1j * b) * s))
        u = g @ u
    return u


def _transfer(x):
    s = jnp.concatenate([jnp.ones(1), x[32:35]]).astype(jnp.complex128)
    return _unitary(x[:16]) @ jnp.diag(s) @ _unitary(x[16:32])


def _logical(t):
    a = t[np.ix_(_ROW_A, _ROW_A)]
    b = t[np.ix_(_ROW_B, _ROW_B)]
    c = t[np.ix_(_ROW_A, _ROW_B)]
    d = t[np.ix_(_ROW_B, _ROW_A)]
    return a * b + c * d


def _target(phi):
    return jnp.diag(jnp.stack([1.0 + 0j, 1.0 + 0j, 1.0 + 0j, jnp.exp(1j * phi)]))


def _penalised(x, phi, mu):
    T = _logical(_transfer(x))
    r = T - T[0, 0] * _target(phi)
    return -jnp.abs(T[0, 0]) ** 2 + mu * jnp.sum(jnp.abs(r) ** 2)


def _relative(x, phi):
    T = _logical(_transfer(x))
    r = (T / T[0, 0] - _target(phi)).ravel()[1:]
    return jnp.concatenate([r.real, r.imag])


def _absolute(x, phi):
    T = _logical(_transfer(x))
    return jnp.sum(jnp.abs(T - T[0, 0] * _target(phi)) ** 2)


_penalised_vg = jax.jit(jax.value_and_grad(_penalised))
_relative_fn = jax.jit(_relative)
_relative_jac = jax.jit(jax.jacfwd(_relative))
_absolute_fn = jax.jit(_absolute)
_transfer_fn = jax.jit(_transfer)


def transfer_from_params(x) -> np.ndarray:
    """Mode transfer matrix for a 35-entry parameter vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (N_PARAMS,):
        raise ValidationError(f"expected {N_PARAMS} parameters, got shape {x.shape}")
    return np.asarray(_transfer_fn(np.clip(x, _LOWER, _UPPER)))


def _feasibility_pass(x, phi, max_nfev, tight):
    kw = dict(xtol=1e-15, ftol=1e-15, gtol=1e-15) if tight else {}
    try:
        res = least_squares(
            lambda v: np.asarray(_relative_fn(v, phi)), np.clip(x, _LOWER, _UPPER),
            jac=lambda v: np.asarray(_relative_jac(v, phi)),
            bounds=(_LOWER, _UPPER), max_nfev=max_nfev, **kw)
    except ValueError:
        # T00 == 0 somewhere along the way: the relative form is undefined
        return x
    return res.x if np.all(np.isfinite(res.x)) else x


def _penalty_pass(x, phi, opts):
    mu = opts.penalty
    for _ in range(_PENALTY_STAGES):
        res = minimize(
            lambda v: tuple(np.asarray(a, dtype=float) for a in _penalised_vg(v, phi, mu)),
            x, jac=True, method="L-BFGS-B", bounds=_BOUNDS,
            options=dict(maxiter=opts.max_iter, ftol=1e-11, gtol=1e-9))
        x = res.x
        if float(_absolute_fn(x, phi)) < _STAGE_ACCEPT:
            break
        mu *= 10.0
    return x


def _single_restart(phi, rng, opts):
    x = np.concatenate([rng.uniform(0.0, 2.0 * math.pi, 32), rng.uniform(0.0, 1.0, 3)])
    x = _feasibility_pass(x, phi, _SEED_NFEV, tight=False)
    x = _penalty_pass(x, phi, opts)
    x = _feasibility_pass(x, phi, _POLISH_NFEV, tight=True)
    t = transfer_from_params(x)
    # re-scale guards against round-off pushing the norm a hair above one
    t = t / max(1.0, float(np.linalg.norm(t, 2)))
    p, residual = cphase_residual(t, phi)
    return t, p, residual


def optimize_cphase(phi: float, opts: OptimizerOptions | None = None) -> SuccessReport:
    """Best feasible success probability of a tunable c-phase gate at ``phi``.

    Restarts are evaluated in index order; the winner is the feasible restart
    with the largest ``p`` (ties go to the lowest index).

    :raises NoFeasiblePointError: if no restart reaches residual < 1e-8
    """
    opts = opts or OptimizerOptions()
    if not math.isfinite(phi):
        raise ValidationError("phi must be finite")
    phi = float(phi) % (2.0 * math.pi)
    best = None
    best_residual = math.inf
    for r in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, r])
        t, p, residual = _single_restart(phi, rng, opts)
        best_residual = min(best_residual, residual)
        if residual < FEASIBILITY_TOL and (best is None or p > best[1]):
            best = (t, p, residual)
    if best is None:
        raise NoFeasiblePointError(
            f"no restart reached residual < {FEASIBILITY_TOL} at phi={phi}", best_residual)
    t, p, residual = best
    return SuccessReport(phi=phi, p_succ=p, residual=residual, transfer=ModeTransfer(t),
                         restarts_used=opts.restarts, seed=opts.seed)


# --- curves -----------------------------------------------------------------


def midpoint_grid(n: int) -> list[float]:
    """``n`` evenly spaced angles in (0, 2*pi) at cell midpoints."""
    if n < 1:
        raise ValidationError("grid size must be >= 1")
    return [2.0 * math.pi * (k + 0.5) / n for k in range(n)]


@dataclass
class SuccessCurve:
    phis: list[float]
    reports: list[SuccessReport | None]
    failures: dict[int, NumericalError]

    @property
    def succeeded(self) -> list[SuccessReport]:
        return [r for r in self.reports if r is not None]

    @property
    def minimum(self) -> float:
        return min(r.p_succ for r in self.succeeded)

    @property
    def mean(self) -> float:
        ok = self.succeeded
        return sum(r.p_succ for r in ok) / len(ok)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["phi", "p_succ", "residual"])
        for i, phi in enumerate(self.phis):
            rep = self.reports[i]
            if rep is None:
                err = self.failures[i]
                resid = getattr(err, "best_residual", math.nan)
                writer.writerow([f"{phi:.9g}", "nan", f"{resid:.9g}"])
            else:
                writer.writerow([f"{phi:.9g}", f"{rep.p_succ:.9g}", f"{rep.residual:.9g}"])
        return buf.getvalue()


def success_curve(phi_grid: Sequence[float], opts: OptimizerOptions | None = None) -> SuccessCurve:
    phis = [float(p) for p in phi_grid]
    if not phis:
        raise ValidationError("phi grid is empty")
    reports: list[SuccessReport | None] = []
    failures: dict[int, NumericalError] = {}
    for i, phi in enumerate(phis):
        try:
            reports.append(optimize_cphase(phi, opts))
        except NumericalError as exc:
            reports.append(None)
            failures[i] = exc
    return SuccessCurve(phis=phis, reports=reports, failures=failures)
