"""Controlled-unitary synthesis from one tunable controlled-phase gate.

The signal qubit sees ``Z(a) Y(t)`` before the c-phase gate and
``Y(-t) Z(-a)`` after it. With the control in ``|0>`` the rotations cancel;
with the control in ``|1>`` the signal receives

    W = Z(-alpha) Y(-theta) Z(phi) Y(theta) Z(alpha)

(times a phase ``exp(i*phi/2)`` that lives on the control line). This module
maps between ``(alpha, theta, phi)`` and the usual ZYZ angles and assembles
the resulting two-qubit gate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import qmat
from .errors import UnsupportedPhaseError, ValidationError

TWO_PI = 2.0 * math.pi

# Below this modulus an SU(2) entry is treated as zero and its phase is
# replaced by a fixed convention.
_DEGENERATE = 1e-12


def wrap_pi(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - math.pi


def wrap_2pi(x: float) -> float:
    """Map an angle into [0, 2*pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    return 0.0 if y >= TWO_PI else y


def _wrap_pi_counting(x: float) -> tuple[float, int]:
    """Wrap into (-pi, pi] and report how many 2*pi shifts that took."""
    w = wrap_pi(x)
    return w, round((x - w) / TWO_PI)


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValidationError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class CUParams:
    """Parameters ``alpha``, ``theta`` (signal rotations) and ``phi`` (c-phase shift).

    Angles are normalised on construction. The physical gate is 2*pi periodic
    in ``phi``; ``compose_w`` alone is not (it flips sign), which only moves a
    phase between the signal and the control line.
    """

    alpha: float
    theta: float
    phi: float

    def __post_init__(self):
        _check_finite(alpha=self.alpha, theta=self.theta, phi=self.phi)
        object.__setattr__(self, "alpha", wrap_pi(float(self.alpha)))
        object.__setattr__(self, "theta", wrap_pi(float(self.theta)))
        object.__setattr__(self, "phi", wrap_2pi(float(self.phi)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CUParams":
        return cls(alpha=d["alpha"], theta=d["theta"], phi=d["phi"])


@dataclass(frozen=True)
class ZYZParams:
    """``exp(i*global_phase) Z(gamma) Y(omega) Z(delta)``.

    ``gamma``/``delta`` are wrapped into (-pi, pi]. Each single 2*pi shift
    flips the sign of the product, so it is compensated by adding pi to
    ``global_phase``; the represented matrix never changes.
    """

    gamma: float
    omega: float
    delta: float
    global_phase: float = 0.0

    def __post_init__(self):
        _check_finite(gamma=self.gamma, omega=self.omega, delta=self.delta,
                      global_phase=self.global_phase)
        omega = float(self.omega)
        if not -1e-12 <= omega <= math.pi + 1e-12:
            raise ValidationError(f"omega must lie in [0, pi], got {omega}")
        gamma, kg = _wrap_pi_counting(float(self.gamma))
        delta, kd = _wrap_pi_counting(float(self.delta))
        phase = float(self.global_phase) + math.pi * ((kg + kd) % 2)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "omega", min(max(omega, 0.0), math.pi))
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "global_phase", wrap_pi(phase))

    def matrix(self) -> np.ndarray:
        return np.exp(1j * self.global_phase) * (
            rot_z(self.gamma) @ rot_y(self.omega) @ rot_z(self.delta))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ZYZParams":
        return cls(gamma=d["gamma"], omega=d["omega"], delta=d["delta"],
                   global_phase=d.get("global_phase", 0.0))


@dataclass(frozen=True)
class AuxAmplitudes:
    chi: complex
    xi: complex


@dataclass(frozen=True)
class AxisAngle:
    """Rotation by ``angle`` about the Bloch axis of ``psi``.

    Convention: ``psi`` picks up ``exp(-i*angle/2)`` and its orthogonal
    complement ``exp(+i*angle/2)``, so ``psi = |0>`` reproduces ``rot_z``.
    """

    psi: np.ndarray
    angle: float

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.complex128).reshape(2)
        if abs(np.vdot(psi, psi).real - 1.0) > 1e-12:
            raise ValidationError("axis state psi must be normalised")
        object.__setattr__(self, "psi", psi)

    @property
    def psi_perp(self) -> np.ndarray:
        return np.array([-np.conj(self.psi[1]), np.conj(self.psi[0])])

    def matrix(self) -> np.ndarray:
        p, q = self.psi, self.psi_perp
        half = self.angle / 2.0
        return (np.exp(-1j * half) * np.outer(p, p.conj())
                + np.exp(1j * half) * np.outer(q, q.conj()))


@dataclass(frozen=True)
class ControlledUPlan:
    cu: CUParams
    control_phase: float
    target_unitary: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "cu": self.cu.to_dict(),
            "control_phase": self.control_phase,
            "target_unitary": qmat.matrix_to_dict(self.target_unitary),
        }


# --- elementary rotations ---------------------------------------------------


def rot_z(alpha: float) -> np.ndarray:
    _check_finite(alpha=alpha)
    return np.diag([np.exp(-0.5j * alpha), np.exp(0.5j * alpha)])


def rot_y(theta: float) -> np.ndarray:
    _check_finite(theta=theta)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, s], [-s, c]], dtype=np.complex128)


def cphase(phi: float) -> np.ndarray:
    """Two-qubit ``diag(1, 1, 1, exp(i*phi))``; control is the first factor."""
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)])


def compose_w(p: CUParams) -> np.ndarray:
    return (rot_z(-p.alpha) @ rot_y(-p.theta) @ rot_z(p.phi)
            @ rot_y(p.theta) @ rot_z(p.alpha))


def aux_amplitudes(p: CUParams) -> AuxAmplitudes:
    """Closed-form entries of ``compose_w(p) = [[chi, xi], [-xi*, chi*]]``."""
    c2 = math.cos(p.theta / 2.0) ** 2
    s2 = math.sin(p.theta / 2.0) ** 2
    chi = np.exp(-0.5j * p.phi) * c2 + np.exp(0.5j * p.phi) * s2
    xi = np.exp(1j * (p.alpha - math.pi / 2.0)) * math.sin(p.theta) * math.sin(p.phi / 2.0)
    return AuxAmplitudes(chi=complex(chi), xi=complex(xi))


def _su2_angles(a: complex, b: complex) -> tuple[float, float, float]:
    """ZYZ angles of the SU(2) matrix ``[[a, b], [-b*, a*]]``.

    Returns unwrapped ``(gamma, omega, delta)``. When ``b`` vanishes only
    ``gamma + delta`` is fixed and it is split evenly; when ``a`` vanishes
    ``arg(a)`` is taken as 0.
    """
    omega = 2.0 * math.atan2(abs(b), abs(a))
    arg_a = float(np.angle(a)) if abs(a) > _DEGENERATE else 0.0
    if abs(b) <= _DEGENERATE:
        return -arg_a, omega, -arg_a
    arg_b = float(np.angle(b))
    return -arg_a - arg_b, omega, -arg_a + arg_b


def cu_to_zyz(p: CUParams) -> ZYZParams:
    """Map scheme parameters to ZYZ angles with ``compose_w(p) == Z Y Z``.

    ``omega`` follows from ``|chi|`` and ``|xi|``; ``delta + gamma`` from the
    phase of ``chi`` and ``delta - gamma`` from the phase of ``xi``, which is
    ``alpha - pi/2`` whenever ``sin(theta) > 0``. If wrapping the angles flips
    the sign of the product, ``global_phase`` is pi (still determinant one).
    """
    aux = aux_amplitudes(p)
    gamma, omega, delta = _su2_angles(aux.chi, aux.xi)
    return ZYZParams(gamma=gamma, omega=omega, delta=delta, global_phase=0.0)


def zyz_to_cu(z: ZYZParams) -> CUParams:
    """Inverse map; requires a determinant-one target (phase 0 or pi)."""
    if abs(math.sin(z.global_phase)) > 1e-12:
        raise UnsupportedPhaseError(
            f"global_phase {z.global_phase} is not realisable by W; route it to the control line")
    gamma = z.gamma + (TWO_PI if math.cos(z.global_phase) < 0 else 0.0)
    half_sum = (gamma + z.delta) / 2.0
    cos_w, sin_w = math.cos(z.omega / 2.0), math.sin(z.omega / 2.0)

    # cos(phi/2) = cos(half_sum) cos(omega/2) and
    # sin(phi/2) cos(theta) = sin(half_sum) cos(omega/2),
    # sin(phi/2) sin(theta) = sin(omega/2); atan2 keeps both well conditioned
    re_chi = math.cos(half_sum) * cos_w
    im_part = math.sin(half_sum) * cos_w
    denom = math.hypot(im_part, sin_w)
    phi = 2.0 * math.atan2(denom, re_chi)
    theta = math.atan2(sin_w, im_part) if denom > 1e-12 else 0.0
    if sin_w > 1e-12:
        alpha = (z.delta - gamma + math.pi) / 2.0
    else:
        # W is diagonal and alpha drops out; use the symmetric split gamma = delta
        alpha = math.pi / 2.0
    return CUParams(alpha=alpha, theta=theta, phi=phi)


def zyz_decompose(u) -> ZYZParams:
    """``u = exp(i*global_phase) Z(gamma) Y(omega) Z(delta)``.

    The phase is half the determinant's argument, with that argument taken in
    [-pi, pi).
    """
    u = qmat.as_matrix(u)
    if u.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 unitary, got shape {u.shape}")
    if not qmat.is_unitary(u, 1e-9):
        raise ValidationError("matrix is not unitary within 1e-9")
    arg_det = float(np.angle(np.linalg.det(u)))
    if arg_det >= math.pi - 1e-15:
        arg_det -= TWO_PI
    beta = arg_det / 2.0
    v = np.exp(-1j * beta) * u
    gamma, omega, delta = _su2_angles(v[0, 0], v[0, 1])
    return ZYZParams(gamma=gamma, omega=omega, delta=delta, global_phase=beta)


def axis_angle(p: CUParams) -> AxisAngle:
    h = p.theta / 2.0
    psi = np.array([np.exp(0.5j * p.alpha) * math.cos(h), np.exp(-0.5j * p.alpha) * math.sin(h)])
    return AxisAngle(psi=psi, angle=p.phi)


def cu_from_axis_angle(target: AxisAngle) -> CUParams:
    """Solve ``axis_angle(p) == target`` (up to the phase of ``psi``)."""
    p0, p1 = target.psi
    theta = 2.0 * math.atan2(abs(p1), abs(p0))
    alpha = float(np.angle(p0) - np.angle(p1)) if abs(p0) > 0 and abs(p1) > 0 else 0.0
    return CUParams(alpha=alpha, theta=theta, phi=target.angle)


def synthesize_controlled_u(u) -> ControlledUPlan:
    """Plan a controlled-``u`` with one c-phase gate.

    The determinant-one part of ``u`` sets the c-phase and signal rotations;
    the remaining phase, together with the ``exp(i*phi/2)`` the c-phase gate
    itself leaves on the control-|1> branch, goes into a Z rotation on the
    control line. Of the two determinant-one parts ``+v`` and ``-v`` the one
    needing the smaller control rotation is used (first on ties).
    """
    u = qmat.as_matrix(u)
    z = zyz_decompose(u)
    best = None
    # +v and -v are both determinant one; keep the one needing less control rotation
    for sign_phase in (0.0, math.pi):
        cu = zyz_to_cu(ZYZParams(z.gamma, z.omega, z.delta, sign_phase))
        w = compose_w(cu)
        # u = exp(i*c) * w exactly; read c off the trace overlap
        c = float(np.angle(np.trace(w.conj().T @ u)))
        control_phase = wrap_pi(c - cu.phi / 2.0)
        if best is None or abs(control_phase) < abs(best[1]) - 1e-12:
            best = (cu, control_phase)
    return ControlledUPlan(cu=best[0], control_phase=best[1], target_unitary=u)


def assemble_plan(plan: ControlledUPlan) -> np.ndarray:
    p = plan.cu
    eye = np.eye(2)
    pre = np.kron(eye, rot_y(p.theta) @ rot_z(p.alpha))
    post = np.kron(eye, rot_z(-p.alpha) @ rot_y(-p.theta))
    return np.kron(rot_z(plan.control_phase), eye) @ post @ cphase(p.phi) @ pre


def controlled(u) -> np.ndarray:
    """``diag-block(I, u)`` with the control as the first factor."""
    u = qmat.as_matrix(u)
    d = u.shape[0]
    out = np.eye(2 * d, dtype=np.complex128)
    out[d:, d:] = u
    return out
