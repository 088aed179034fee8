"""Model-agnostic quantum speed limit machinery for a single qubit.

States and generators are stored in the ``{|1>, |0>}`` basis with the excited
level first. A density matrix is fixed by its excited population and the
``|1><0|`` coherence; the generator output ``L_t(rho_t)`` is Hermitian and
traceless and is fixed by its ``|1><1|`` entry and its ``|1><0|`` entry.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .exceptions import DegenerateDynamicsError, InvariantViolation
from .numerics import DEFAULT_TOL, Breakpoints, find_sign_changes, integrate_abs_relative

__all__ = [
    "BoundKind",
    "Method",
    "PureQubit",
    "QubitDensity",
    "HermitianTraceless",
    "Trajectory",
    "QslResult",
    "bures_angle",
    "op_norm",
    "state_expectation",
    "ml_qsl_generic",
    "ni_qsl_generic",
    "speed_limit_ratio",
]

_FIDELITY_CLAMP = 1e-12
_EPS = 2.0**-52
_POSITIVITY_SLACK = 1e-12
_DEGENERATE = 1e-14
_ACCEL_MARGIN = 1e-9


class BoundKind(str, enum.Enum):
    ML = "ML"
    NI = "NI"
    XU = "XU"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    GENERIC = "generic"


@dataclass(frozen=True)
class PureQubit:
    """``a e^{i theta}|1> + sqrt(1 - a^2)|0>`` with real ``a`` in [-1, 1]."""

    excited_amp: float
    phase: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.excited_amp <= 1.0:
            raise InvariantViolation(
                f"excited amplitude must lie in [-1, 1], got {self.excited_amp!r}"
            )

    @property
    def ground_amp(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.excited_amp**2))

    @property
    def coherence_weight(self) -> complex:
        """``a sqrt(1 - a^2) e^{i theta}``, the |1><0| entry of the projector."""
        return self.excited_amp * self.ground_amp * cmath.exp(1j * self.phase)

    def density(self) -> "QubitDensity":
        return QubitDensity(self.excited_amp**2, self.coherence_weight)


@dataclass(frozen=True)
class QubitDensity:
    excited_pop: float
    coherence: complex = 0j

    def __post_init__(self):
        p = self.excited_pop
        if not -_POSITIVITY_SLACK <= p <= 1.0 + _POSITIVITY_SLACK:
            raise InvariantViolation(f"excited population {p!r} outside [0, 1]")
        if abs(self.coherence) ** 2 > p * (1.0 - p) + _POSITIVITY_SLACK:
            raise InvariantViolation("density matrix is not positive semidefinite")

    @property
    def ground_pop(self) -> float:
        return 1.0 - self.excited_pop


@dataclass(frozen=True)
class HermitianTraceless:
    """``[[diag, offdiag], [conj(offdiag), -diag]]``."""

    diag: float
    offdiag: complex = 0j

    def __mul__(self, c: float) -> "HermitianTraceless":
        return HermitianTraceless(self.diag * c, self.offdiag * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Trajectory:
    """A state path ``rho_t`` together with its time derivative.

    ``kinks_hint`` lists analytic times where the speed-limit integrands may
    touch zero; when it is ``None`` the generic engines search for them.
    """

    state_at: Callable[[float], QubitDensity]
    derivative_at: Callable[[float], HermitianTraceless]
    kinks_hint: Callable[[float], Iterable[float]] | None = None

    def kinks(self, horizon: float) -> Breakpoints | None:
        if self.kinks_hint is None:
            return None
        return Breakpoints.within(self.kinks_hint(horizon), 0.0, horizon)


@dataclass(frozen=True)
class QslResult:
    bound: float
    kind: BoundKind
    method: Method
    actual_time: float
    degenerate: bool = False
    accelerated: bool = field(init=False)

    def __post_init__(self):
        t = self.actual_time
        if not (0.0 <= self.bound <= t * (1.0 + 1e-8) + _ACCEL_MARGIN):
            raise InvariantViolation(
                f"{self.kind.value} bound {self.bound!r} outside [0, t={t!r}]"
            )
        accelerated = not self.degenerate and self.bound < t - _ACCEL_MARGIN
        object.__setattr__(self, "accelerated", accelerated)


def _fidelity(psi0: PureQubit, rho: QubitDensity) -> float:
    a2 = psi0.excited_amp**2
    cross = 2.0 * (psi0.coherence_weight.conjugate() * rho.coherence).real
    fid = a2 * rho.excited_pop + (1.0 - a2) * rho.ground_pop + cross
    if fid > 1.0 + _FIDELITY_CLAMP or fid < -_FIDELITY_CLAMP:
        raise InvariantViolation(f"fidelity {fid!r} outside [0, 1]")
    return min(1.0, max(0.0, fid))


def bures_angle(psi0: PureQubit, rho: QubitDensity) -> float:
    """Bures angle ``arccos sqrt(<psi0|rho|psi0>)`` in ``[0, pi/2]``."""
    return math.acos(math.sqrt(_fidelity(psi0, rho)))


def _sin2_bures(psi0: PureQubit, rho: QubitDensity) -> float:
    # sin^2 L = 1 - F = Tr[rho0 (rho0 - rho)]; the difference form keeps
    # relative accuracy when rho has barely moved away from rho0
    a2 = psi0.excited_amp**2
    w = psi0.coherence_weight
    dp = a2 - rho.excited_pop
    dc = w - rho.coherence
    val = (2.0 * a2 - 1.0) * dp + 2.0 * (w.conjugate() * dc).real
    if val > 1.0 + _FIDELITY_CLAMP or val < -_FIDELITY_CLAMP:
        raise InvariantViolation(f"sin^2 of the Bures angle {val!r} outside [0, 1]")
    return min(1.0, max(0.0, val))


def _sin2_rounding(psi0: PureQubit, rho: QubitDensity) -> float:
    # the two terms of the difference form cancel for small populations;
    # what survives is bounded by the rounding of the stored entries
    a2 = psi0.excited_amp**2
    w = abs(psi0.coherence_weight)
    scale = abs(2.0 * a2 - 1.0) * (a2 + rho.excited_pop) + 2.0 * w * (w + abs(rho.coherence))
    return 8.0 * _EPS * scale


def _generic_ratio(psi0, rho, den, t, kind):
    sin2 = _sin2_bures(psi0, rho)
    # both bounds are <= t exactly; an excess inside the rounding is noise
    if den < sin2 <= den + _sin2_rounding(psi0, rho):
        sin2 = den
    return speed_limit_ratio(sin2, den, t, kind, Method.GENERIC)


def op_norm(m: HermitianTraceless) -> float:
    """Largest singular value of a 2x2 Hermitian traceless matrix."""
    return math.hypot(m.diag, abs(m.offdiag))


def state_expectation(psi0: PureQubit, m: HermitianTraceless) -> float:
    """``<psi0|M|psi0>``; signed, callers take the absolute value."""
    a2 = psi0.excited_amp**2
    return (2.0 * a2 - 1.0) * m.diag + 2.0 * (
        psi0.coherence_weight.conjugate() * m.offdiag
    ).real


def speed_limit_ratio(
    sin2: float, denominator: float, t: float, kind: BoundKind, method: Method
) -> QslResult:
    """Assemble ``t * sin2 / denominator`` with the 0/0 -> 0 convention."""
    if sin2 < _DEGENERATE and denominator < _DEGENERATE:
        return QslResult(0.0, kind, method, t, degenerate=True)
    if denominator < _DEGENERATE:
        raise DegenerateDynamicsError(
            f"{kind.value} denominator {denominator!r} vanishes while "
            f"sin^2 of the Bures angle is {sin2!r}"
        )
    return QslResult(t * sin2 / denominator, kind, method, t)


def _discover_kinks(components, t):
    found: set[float] = set()
    for comp in components:
        found.update(find_sign_changes(comp, 0.0, t).points)
    return Breakpoints.within(found, 0.0, t)


def ml_qsl_generic(
    psi0: PureQubit, traj: Trajectory, t: float, tol: float = DEFAULT_TOL
) -> QslResult:
    """Margolus-Levitin type bound from the operator norm of ``L_t(rho_t)``.

    ``t sin^2 L(rho_0, rho_t) / int_0^t ||L(rho_tau)||_op dtau``.
    """
    if not t > 0.0:
        raise ValueError(f"evolution time must be positive, got {t!r}")
    kinks = traj.kinks(t)
    if kinks is None:
        # op_norm only touches zero where every entry vanishes
        kinks = _discover_kinks(
            (
                lambda x: traj.derivative_at(x).diag,
                lambda x: traj.derivative_at(x).offdiag.real,
                lambda x: traj.derivative_at(x).offdiag.imag,
            ),
            t,
        )
    den = integrate_abs_relative(lambda x: op_norm(traj.derivative_at(x)), 0.0, t, kinks, tol)
    return _generic_ratio(psi0, traj.state_at(t), den, t, BoundKind.ML)


def ni_qsl_generic(
    psi0: PureQubit, traj: Trajectory, t: float, tol: float = DEFAULT_TOL
) -> QslResult:
    """Bound from ``|<psi0|L(rho_tau)|psi0>|``, skipping the trace inequality."""
    if not t > 0.0:
        raise ValueError(f"evolution time must be positive, got {t!r}")

    def speed(x):
        return state_expectation(psi0, traj.derivative_at(x))

    kinks = traj.kinks(t)
    if kinks is None:
        kinks = _discover_kinks((speed,), t)
    den = integrate_abs_relative(speed, 0.0, t, kinks, tol)
    return _generic_ratio(psi0, traj.state_at(t), den, t, BoundKind.NI)
