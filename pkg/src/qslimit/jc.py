"""Damped Jaynes-Cummings qubit in a Lorentzian vacuum reservoir.

The excited-state amplitude ``q(t)`` solves
``q'' + lambda q' + (lambda gamma0 / 2) q = 0`` with ``q(0) = 1``,
``q'(0) = 0``. Everything else (state, generator, speed limits, backflow)
is expressed through ``q`` and ``q'``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

from .core import (
    BoundKind,
    HermitianTraceless,
    Method,
    PureQubit,
    QslResult,
    QubitDensity,
    Trajectory,
    speed_limit_ratio,
)
from .exceptions import DegenerateDynamicsError, InvariantViolation, SingularityError
from .numerics import DEFAULT_TOL, Breakpoints, integrate_abs_relative, refine_root

__all__ = [
    "JcParams",
    "q_amplitude",
    "q_dot",
    "q_deficit",
    "jc_decay_rate",
    "jc_state",
    "jc_derivative",
    "jc_kinks",
    "ml_qsl_jc",
    "ni_qsl_jc",
    "blp_nonmarkovianity",
    "auto_horizon",
    "xu_qsl_jc",
    "jc_trajectory",
]

_CRITICAL_BAND = 1e-9
_ENVELOPE_CUTOFF = 1e-10

Horizon = Union[float, str]


@dataclass(frozen=True)
class JcParams:
    """Lorentzian reservoir: spectral width ``lam`` and coupling ``gamma0``."""

    lam: float
    gamma0: float

    def __post_init__(self):
        problems = []
        if not self.lam > 0.0:
            problems.append(f"lambda must be positive, got {self.lam!r}")
        if not self.gamma0 > 0.0:
            problems.append(f"gamma0 must be positive, got {self.gamma0!r}")
        if problems:
            raise InvariantViolation("; ".join(problems))

    @property
    def dsq(self) -> float:
        return self.lam * self.lam - 2.0 * self.lam * self.gamma0

    @property
    def is_critical(self) -> bool:
        return abs(self.dsq) < _CRITICAL_BAND * self.lam * self.lam

    @property
    def regime(self) -> str:
        if self.is_critical:
            return "critical"
        return "Markovian" if self.dsq > 0.0 else "non-Markovian"

    @property
    def d(self) -> float:
        """``|d| = sqrt(|lambda^2 - 2 lambda gamma0|)``."""
        return math.sqrt(abs(self.dsq))


def q_amplitude(t: float, p: JcParams) -> float:
    lam = p.lam
    if p.is_critical:
        return math.exp(-0.5 * lam * t) * (1.0 + 0.5 * lam * t)
    d = p.d
    if p.dsq > 0.0:
        # e^{-lam t/2} cosh, sinh written as two decaying exponentials
        slow = math.exp(0.5 * (d - lam) * t)
        fast = math.exp(-0.5 * (d + lam) * t)
        return 0.5 * (slow + fast) + 0.5 * (lam / d) * (slow - fast)
    x = 0.5 * d * t
    return math.exp(-0.5 * lam * t) * (math.cos(x) + (lam / d) * math.sin(x))


def _phi(z):
    # e^z - 1 - z
    if abs(z) < 0.5:
        term, total, k = z * z / 2.0, 0.0, 2
        while abs(term) > 1e-17 * abs(total) or total == 0.0:
            total += term
            k += 1
            term *= z / k
            if term == 0.0:
                break
        return total
    return (cmath.exp(z) if isinstance(z, complex) else math.exp(z)) - 1.0 - z


def _expm1(z):
    return cmath.exp(z) - 1.0 if isinstance(z, complex) else math.expm1(z)


def _series(x, start):
    # sum_{k>=1} x^k / (2k + start)!  for |x| < 1
    term = x / math.factorial(2 + start)
    total, k = 0.0, 1
    while term != 0.0 and abs(term) > 1e-17 * abs(total):
        total += term
        k += 1
        term *= x / ((2 * k + start - 1) * (2 * k + start))
    return total


def q_deficit(t: float, p: JcParams) -> float:
    """``1 - q(t)`` without cancellation when ``q`` is close to 1."""
    lam, dsq = p.lam, p.dsq
    if abs(dsq) < 0.25 * lam * lam:
        # q = e^{-u} (cosh v + u sinh(v)/v), u = lam t/2, v^2 = dsq t^2/4
        u, v2 = 0.5 * lam * t, 0.25 * dsq * t * t
        g = -u * math.expm1(-u) - _phi(-u) if u < 0.5 else 1.0 - math.exp(-u) * (1.0 + u)
        if abs(v2) < 1.0:
            c, sh = _series(v2, 0), _series(v2, 1)
        elif v2 > 0.0:
            v = math.sqrt(v2)
            c, sh = math.cosh(v) - 1.0, math.sinh(v) / v - 1.0
        else:
            w = math.sqrt(-v2)
            c, sh = math.cos(w) - 1.0, math.sin(w) / w - 1.0
        return g - math.exp(-u) * (c + u * sh)
    # roots r+, r- of r^2 + lam r + lam gamma0/2 give
    # 1 - q = [r+ expm1(r- t) - r- expm1(r+ t)] / (r- - r+); for small |r t|
    # the linear parts cancel exactly and only e^z - 1 - z is kept
    if dsq > 0.0:
        lo = -0.5 * (lam + math.sqrt(dsq))
        hi = 0.5 * lam * p.gamma0 / lo
    else:
        hi = complex(-0.5 * lam, 0.5 * math.sqrt(-dsq))
        lo = hi.conjugate()
    if abs(lo * t) < 0.5:
        val = (hi * _phi(lo * t) - lo * _phi(hi * t)) / (lo - hi)
    else:
        val = (hi * _expm1(lo * t) - lo * _expm1(hi * t)) / (lo - hi)
    return val.real if isinstance(val, complex) else val


def q_dot(t: float, p: JcParams) -> float:
    lam, g0 = p.lam, p.gamma0
    if p.is_critical:
        return -0.5 * g0 * lam * t * math.exp(-0.5 * lam * t)
    d = p.d
    if p.dsq > 0.0:
        slow = math.exp(0.5 * (d - lam) * t)
        fast = math.exp(-0.5 * (d + lam) * t)
        return -(g0 * lam / d) * 0.5 * (slow - fast)
    return -(g0 * lam / d) * math.exp(-0.5 * lam * t) * math.sin(0.5 * d * t)


def jc_decay_rate(t: float, p: JcParams) -> float:
    """Time-local decay rate ``-2 q'/q`` of the master equation."""
    q = q_amplitude(t, p)
    if abs(q) <= 1e-12:
        raise SingularityError(f"q(t) vanishes at t={t!r}; decay rate diverges")
    return -2.0 * q_dot(t, p) / q


def jc_state(t: float, psi0: PureQubit, p: JcParams) -> QubitDensity:
    q = q_amplitude(t, p)
    return QubitDensity(psi0.excited_amp**2 * q * q, psi0.coherence_weight * q)


def jc_derivative(t: float, psi0: PureQubit, p: JcParams) -> HermitianTraceless:
    q, qd = q_amplitude(t, p), q_dot(t, p)
    return HermitianTraceless(2.0 * psi0.excited_amp**2 * q * qd, psi0.coherence_weight * qd)


def _qdot_zeros(p: JcParams, horizon: float) -> list[float]:
    if p.regime != "non-Markovian":
        return []
    period = 2.0 * math.pi / p.d
    return [k * period for k in range(1, int(horizon / period) + 1)]


def _q_zeros(p: JcParams, horizon: float) -> list[float]:
    if p.regime != "non-Markovian":
        return []
    d = p.d
    shift = math.atan(d / p.lam)
    out = []
    k = 1
    while True:
        z = (2.0 / d) * (k * math.pi - shift)
        if z > horizon:
            return out
        out.append(z)
        k += 1


def _level_crossings(p: JcParams, level: float, horizon: float) -> list[float]:
    """Times in ``(0, horizon)`` where ``q`` crosses ``level``."""
    if p.regime != "non-Markovian" or not -1.0 < level < 1.0:
        return []
    edges = [0.0, *_qdot_zeros(p, horizon), horizon]
    xtol = 1e-15 * max(1.0, horizon)
    out = []
    for lo, hi in zip(edges, edges[1:]):
        if hi <= lo:
            continue
        flo = q_amplitude(lo, p) - level
        fhi = q_amplitude(hi, p) - level
        if flo != 0.0 and fhi != 0.0 and (flo > 0.0) != (fhi > 0.0):
            out.append(refine_root(lambda x: q_amplitude(x, p) - level, lo, hi, xtol))
    return out


def jc_kinks(horizon: float, p: JcParams, alpha: float | None = None) -> Breakpoints:
    """Zeros of ``q'`` and ``q`` on ``(0, horizon)``.

    With ``alpha`` given, also the times where the NI integrand factor
    ``(1 - alpha^2) - (1 - 2 alpha^2) q`` changes sign.
    """
    pts = _qdot_zeros(p, horizon) + _q_zeros(p, horizon)
    if alpha is not None:
        a2 = alpha * alpha
        if 2.0 * a2 - 1.0 > 0.0:
            pts += _level_crossings(p, (1.0 - a2) / (1.0 - 2.0 * a2), horizon)
    return Breakpoints.within(pts, 0.0, horizon)


def _check_time(t):
    if not t > 0.0:
        raise ValueError(f"evolution time must be positive, got {t!r}")


def ml_qsl_jc(t: float, psi0: PureQubit, p: JcParams, tol: float = DEFAULT_TOL) -> QslResult:
    """Closed-form ML bound for a superposition initial state.

    For ``alpha = 0`` the state never moves and the bound is 0 by convention.
    """
    _check_time(t)
    a = psi0.excited_amp
    a2 = a * a
    if a == 0.0:
        return QslResult(0.0, BoundKind.ML, Method.CLOSED_FORM, t, degenerate=True)
    q, r = q_amplitude(t, p), q_deficit(t, p)
    num = abs(a) * r * (r + 2.0 * a2 * q)

    def speed(x):
        qx = q_amplitude(x, p)
        return math.sqrt(1.0 - (1.0 - 4.0 * qx * qx) * a2) * q_dot(x, p)

    den = integrate_abs_relative(speed, 0.0, t, jc_kinks(t, p), tol)
    return speed_limit_ratio(num, den, t, BoundKind.ML, Method.CLOSED_FORM)


def ni_qsl_jc(t: float, psi0: PureQubit, p: JcParams, tol: float = DEFAULT_TOL) -> QslResult:
    """Closed-form NI bound.

    The integrand is ``2[(1 - a^2) - (1 - 2a^2) q] q'``, i.e. the expectation
    ``<psi0|rho'|psi0>`` with the common ``a^2`` divided out.
    """
    _check_time(t)
    a = psi0.excited_amp
    a2 = a * a
    if a == 0.0:
        return QslResult(0.0, BoundKind.NI, Method.CLOSED_FORM, t, degenerate=True)
    q, r = q_amplitude(t, p), q_deficit(t, p)
    num = r * (r + 2.0 * a2 * q)

    # (1 - a^2) - (1 - 2a^2) q regrouped so nothing cancels near q = 1
    def speed(x):
        return 2.0 * ((1.0 - a2) * q_deficit(x, p) + a2 * q_amplitude(x, p)) * q_dot(x, p)

    den = integrate_abs_relative(speed, 0.0, t, jc_kinks(t, p, a), tol)
    return speed_limit_ratio(num, den, t, BoundKind.NI, Method.CLOSED_FORM)


def auto_horizon(p: JcParams) -> float:
    """Smallest time with envelope ``exp(-lam t / 2)`` below 1e-10.

    Just above the critical coupling the first revival comes later than
    that, so the horizon is stretched to the first zero of ``q'`` to keep
    the first backflow interval (and hence a nonzero measure).
    """
    T = 2.0 * math.log(1.0 / _ENVELOPE_CUTOFF) / p.lam
    if p.regime == "non-Markovian":
        T = max(T, 2.0 * math.pi / p.d)
    return T


def blp_nonmarkovianity(p: JcParams, horizon: Horizon = "auto") -> float:
    """Trace-distance backflow for the optimal pair ``|1>``, ``|0>``.

    The pair's trace distance is ``q(t)^2``; the measure is the total
    increase of ``q^2`` over the intervals where it grows. ``q^2`` is
    monotone between consecutive zeros of ``q`` and ``q'``, so evaluating it
    at those points is exact.
    """
    T = auto_horizon(p) if horizon == "auto" else float(horizon)
    if not T > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    if p.regime != "non-Markovian":
        return 0.0
    stationary = Breakpoints.within(_qdot_zeros(p, T) + _q_zeros(p, T), 0.0, T)
    values = [q_amplitude(x, p) ** 2 for x in (0.0, *stationary.points, T)]
    return math.fsum(max(0.0, hi - lo) for lo, hi in zip(values, values[1:]))


def xu_qsl_jc(t: float, p: JcParams, infinite_horizon: bool = False) -> QslResult:
    """Bound combining backflow and excited population, for ``|1>`` only.

    ``t / (2 N / (1 - q(t)^2) + 1)`` with ``N`` accumulated over ``[0, t]``;
    ``infinite_horizon`` switches to the full backflow.
    """
    _check_time(t)
    q = q_amplitude(t, p)
    loss = 1.0 - q * q
    if loss <= 0.0:
        raise DegenerateDynamicsError(f"|q(t)| = 1 at t={t!r}: no evolution")
    n = blp_nonmarkovianity(p, "auto" if infinite_horizon else t)
    return QslResult(t / (2.0 * n / loss + 1.0), BoundKind.XU, Method.CLOSED_FORM, t)


def jc_trajectory(psi0: PureQubit, p: JcParams) -> Trajectory:
    return Trajectory(
        state_at=lambda x: jc_state(x, psi0, p),
        derivative_at=lambda x: jc_derivative(x, psi0, p),
        kinks_hint=lambda horizon: jc_kinks(horizon, p, psi0.excited_amp).points,
    )
