"""Pure dephasing of a qubit by an Ohmic-family bath at zero temperature.

The spectral density is ``J(w) = eta w^s exp(-w)`` (cutoff frequency 1).
Populations are frozen and the coherence decays as ``exp(-gamma(t))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

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
from .exceptions import InvariantViolation
from .numerics import DEFAULT_TOL, Breakpoints, binary_entropy, gamma_real, integrate_abs_relative

__all__ = [
    "DephasingParams",
    "EULER_GAMMA",
    "dephasing_gamma",
    "dephasing_rate",
    "rate_sign",
    "rate_zeros",
    "dephasing_regime",
    "dephasing_state",
    "dephasing_derivative",
    "ml_qsl_dephasing",
    "ni_qsl_dephasing",
    "channel_capacity",
    "capacity_nonmarkovianity",
    "dephasing_trajectory",
]

EULER_GAMMA = 0.57721566490153286061
_OHMIC_BAND = 1e-4
_SIGN_EPS = 1e-12


@dataclass(frozen=True)
class DephasingParams:
    """Ohmicity ``s`` and dimensionless coupling ``eta``."""

    s: float
    eta: float

    def __post_init__(self):
        problems = []
        if not self.s > 0.0:
            problems.append(f"s must be positive, got {self.s!r}")
        if not self.eta > 0.0:
            problems.append(f"eta must be positive, got {self.eta!r}")
        if problems:
            raise InvariantViolation("; ".join(problems))

    @cached_property
    def gamma_s(self) -> float:
        return gamma_real(self.s)

    @cached_property
    def gamma_s_minus_1(self) -> float:
        """``Gamma(s - 1)``; only meaningful away from ``s = 1``."""
        return gamma_real(self.s - 1.0)


def dephasing_gamma(t: float, p: DephasingParams) -> float:
    """Decoherence exponent ``gamma(t)``.

    ``eta Gamma(s-1) [1 - cos((s-1) atan t) (1+t^2)^{-(s-1)/2}]``, with a
    logarithmic limit at ``s = 1`` and its first-order expansion for
    ``|s - 1| < 1e-4``.
    """
    eps = p.s - 1.0
    a = math.atan(t)
    L = math.log1p(t * t)
    if eps == 0.0:
        return 0.5 * p.eta * L
    if abs(eps) < _OHMIC_BAND:
        return p.eta * (
            0.5 * L + eps * (0.5 * a * a - 0.125 * L * L - 0.5 * EULER_GAMMA * L)
        )
    # 1 - e^{-eps L/2} cos(eps a), free of cancellation for small eps
    bracket = -math.expm1(-0.5 * eps * L) * math.cos(eps * a) + 2.0 * math.sin(
        0.5 * eps * a
    ) ** 2
    return p.eta * p.gamma_s_minus_1 * bracket


def dephasing_rate(t: float, p: DephasingParams) -> float:
    """``gamma'(t) = eta Gamma(s) (1+t^2)^{-s/2} sin(s atan t)``."""
    s = p.s
    return (
        p.eta
        * p.gamma_s
        * math.exp(-0.5 * s * math.log1p(t * t))
        * math.sin(s * math.atan(t))
    )


def rate_sign(s: float, t: float) -> int:
    """Sign of ``gamma'(t)``: +1, -1, or 0 within 1e-12 of a zero."""
    v = math.sin(s * math.atan(t))
    if abs(v) < _SIGN_EPS:
        return 0
    return 1 if v > 0.0 else -1


def rate_zeros(s: float, horizon: float) -> Breakpoints:
    """Zeros ``tan(k pi / s)`` of the dephasing rate inside ``(0, horizon)``."""
    pts = []
    k = 1
    while k * math.pi / s < 0.5 * math.pi:
        z = math.tan(k * math.pi / s)
        if z >= horizon:
            break
        pts.append(z)
        k += 1
    return Breakpoints.within(pts, 0.0, horizon)


def dephasing_regime(t: float, p: DephasingParams) -> str:
    """``non-Markovian`` if the rate goes negative somewhere in ``(0, t]``."""
    first = math.pi / p.s
    if first < 0.5 * math.pi and math.tan(first) < t:
        return "non-Markovian"
    return "Markovian"


def dephasing_state(t: float, psi0: PureQubit, p: DephasingParams) -> QubitDensity:
    decay = math.exp(-dephasing_gamma(t, p))
    return QubitDensity(psi0.excited_amp**2, psi0.coherence_weight * decay)


def dephasing_derivative(
    t: float, psi0: PureQubit, p: DephasingParams
) -> HermitianTraceless:
    decay = math.exp(-dephasing_gamma(t, p))
    return HermitianTraceless(
        0.0, -dephasing_rate(t, p) * decay * psi0.coherence_weight
    )


def _coherence_speed(x, p):
    return math.exp(-dephasing_gamma(x, p)) * dephasing_rate(x, p)


def ni_qsl_dephasing(t: float, p: DephasingParams, tol: float = DEFAULT_TOL) -> QslResult:
    """NI bound ``(1 - e^{-gamma(t)}) t / int |e^{-gamma} gamma'|``.

    Independent of the initial state.
    """
    if not t > 0.0:
        raise ValueError(f"evolution time must be positive, got {t!r}")
    num = -math.expm1(-dephasing_gamma(t, p))
    den = integrate_abs_relative(lambda x: _coherence_speed(x, p), 0.0, t, rate_zeros(p.s, t), tol)
    return speed_limit_ratio(num, den, t, BoundKind.NI, Method.CLOSED_FORM)


def ml_qsl_dephasing(
    t: float, psi0: PureQubit, p: DephasingParams, tol: float = DEFAULT_TOL
) -> QslResult:
    """ML bound, equal to ``2|b| sqrt(1 - b^2)`` times the NI bound.

    Eigenstates of ``sigma_z`` (``b`` in {0, +-1}) never move; their bound is 0.
    """
    b = abs(psi0.excited_amp)
    factor = 2.0 * b * psi0.ground_amp
    if factor == 0.0:
        if not t > 0.0:
            raise ValueError(f"evolution time must be positive, got {t!r}")
        return QslResult(0.0, BoundKind.ML, Method.CLOSED_FORM, t, degenerate=True)
    ni = ni_qsl_dephasing(t, p, tol)
    return QslResult(factor * ni.bound, BoundKind.ML, Method.CLOSED_FORM, t, ni.degenerate)


_SERIES_CUTOFF = 0.5


def channel_capacity(t: float, p: DephasingParams) -> float:
    """Quantum capacity ``1 - H2((1 + x) / 2)`` with ``x = e^{-gamma(t)}``.

    For small ``x`` the subtraction cancels completely, so the equivalent
    series ``sum_k x^{2k} / (2k (2k-1) ln 2)`` is summed instead.
    """
    x = math.exp(-dephasing_gamma(t, p))
    if x >= _SERIES_CUTOFF:
        return 1.0 - binary_entropy(0.5 * (1.0 + x))
    x2 = x * x
    terms = []
    power = x2
    k = 1
    while power > 1e-17 * x2:
        terms.append(power / ((2 * k) * (2 * k - 1)))
        power *= x2
        k += 1
    return math.fsum(terms) / math.log(2.0)


def capacity_nonmarkovianity(p: DephasingParams, horizon: float) -> float:
    """Total increase of the channel capacity on ``[0, horizon]``.

    The capacity grows exactly where the rate is negative; the rate only
    changes sign at ``tan(k pi / s)``, so each growing stretch contributes
    the capacity difference across its end points.
    """
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    edges = [0.0, *rate_zeros(p.s, horizon).points, horizon]
    gains = []
    for lo, hi in zip(edges, edges[1:]):
        if rate_sign(p.s, 0.5 * (lo + hi)) < 0:
            gains.append(channel_capacity(hi, p) - channel_capacity(lo, p))
    return math.fsum(gains)


def dephasing_trajectory(psi0: PureQubit, p: DephasingParams) -> Trajectory:
    return Trajectory(
        state_at=lambda x: dephasing_state(x, psi0, p),
        derivative_at=lambda x: dephasing_derivative(x, psi0, p),
        kinks_hint=lambda horizon: rate_zeros(p.s, horizon).points,
    )
