"""Special functions, kink-aware quadrature and sign-change bracketing.

Everything here is a pure function of its arguments. The quadrature routine
is written for integrands of the form ``|f(t)|`` where ``f`` is smooth except
at a known (or discoverable) finite set of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .exceptions import ConvergenceError, DomainError, PoleError

__all__ = [
    "Breakpoints",
    "gamma_real",
    "binary_entropy",
    "integrate_abs",
    "integrate_abs_relative",
    "find_sign_changes",
    "refine_root",
    "DEFAULT_TOL",
    "DEFAULT_SCAN_COUNT",
    "DEFAULT_MAX_DEPTH",
]

DEFAULT_TOL = 1e-10
DEFAULT_SCAN_COUNT = 4096
DEFAULT_MAX_DEPTH = 60

_MERGE_EPS = 1e-12
_POLE_EPS = 1e-9

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Breakpoints:
    """Sorted, strictly increasing interior points of an interval.

    Use :meth:`within` to build an instance from arbitrary candidate points;
    it drops points outside ``(a, b)`` and merges near-duplicates.
    """

    points: tuple[float, ...] = ()

    def __post_init__(self):
        pts = self.points
        for left, right in zip(pts, pts[1:]):
            if not right > left:
                raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def within(cls, points: Iterable[float], a: float, b: float) -> "Breakpoints":
        scale = max(1.0, abs(a), abs(b))
        eps = _MERGE_EPS * scale
        kept: list[float] = []
        for p in sorted(float(p) for p in points):
            if not (a + eps < p < b - eps):
                continue
            if kept and p - kept[-1] <= eps:
                continue
            kept.append(p)
        return cls(tuple(kept))

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def gamma_real(x: float) -> float:
    """Euler Gamma function for real arguments.

    Arguments below 1 are shifted upward with ``Gamma(x) = Gamma(x + 1) / x``;
    the Lanczos sum covers ``x >= 1``.

    Raises:
        PoleError: if ``x`` lies within 1e-9 of a non-positive integer.
    """
    x = float(x)
    nearest = round(x)
    if nearest <= 0 and abs(x - nearest) < _POLE_EPS:
        raise PoleError(f"Gamma has a pole at x={x!r}")
    divisor = 1.0
    while x < 1.0:
        divisor *= x
        x += 1.0
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    value = _SQRT_2PI * math.exp((z + 0.5) * math.log(t) - t) * acc
    return value / divisor


def _plogp(p: float) -> float:
    return 0.0 if p == 0.0 else -p * math.log2(p)


def binary_entropy(p: float) -> float:
    """Binary Shannon entropy in bits, with ``0 log 0 = 0``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    return _plogp(p) + _plogp(1.0 - p)


def _adaptive_simpson(f, a, b, eps, max_depth):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # (a, b, fa, fm, fb, whole, eps, depth)
    stack = [(a, b, fa, fm, fb, whole, eps, 0)]
    parts = []
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        # a few forced levels guard against symmetric false convergence
        if depth >= 3 and abs(delta) <= 15.0 * eps:
            parts.append(left + right + delta / 15.0)
            continue
        if depth >= max_depth:
            raise ConvergenceError(
                f"adaptive quadrature exceeded {max_depth} levels near t={m!r}"
            )
        stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
    return math.fsum(parts)


def integrate_abs(
    f: Callable[[float], float],
    a: float,
    b: float,
    kinks: Iterable[float] | Breakpoints = (),
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> float:
    """Integrate ``|f|`` over ``[a, b]`` piecewise between kinks.

    Each kink-delimited subinterval is handled by adaptive Simpson quadrature
    with a Richardson-corrected estimate. The error budget
    ``tol * max(1, |result|)`` is shared among subintervals in proportion to
    their length, using a coarse pre-estimate for ``|result|``.

    Args:
        f: Signed integrand; its absolute value is integrated.
        a, b: Integration limits, ``a <= b``.
        kinks: Points where ``|f|`` may fail to be smooth. Points outside
            ``(a, b)`` are ignored.
        tol: Relative tolerance (absolute below unit magnitude).
        max_depth: Bisection depth limit per subinterval.

    Raises:
        ConvergenceError: if any subinterval needs more than ``max_depth``
            levels of refinement.
    """
    if b < a:
        raise DomainError(f"integration limits out of order: a={a!r} > b={b!r}")
    if b == a:
        return 0.0
    if not isinstance(kinks, Breakpoints):
        kinks = Breakpoints.within(kinks, a, b)
    edges = [a, *kinks.points, b]

    def g(x):
        return abs(f(x))

    coarse = 0.0
    for lo, hi in zip(edges, edges[1:]):
        coarse += (hi - lo) / 6.0 * (g(lo) + 4.0 * g(0.5 * (lo + hi)) + g(hi))
    budget = tol * max(1.0, abs(coarse))
    width = b - a
    pieces = [
        _adaptive_simpson(g, lo, hi, budget * (hi - lo) / width, max_depth)
        for lo, hi in zip(edges, edges[1:])
    ]
    return math.fsum(pieces)


def integrate_abs_relative(
    f: Callable[[float], float],
    a: float,
    b: float,
    kinks: Iterable[float] | Breakpoints = (),
    tol: float = DEFAULT_TOL,
    negligible: float = 1e-17,
) -> float:
    """``integrate_abs`` with ``tol`` relative at every magnitude.

    The integrand is divided by a sampled estimate of the integral's scale
    before integration. If that scale is below ``negligible`` a rough
    trapezoid value is returned instead; such integrals only matter through
    a comparison with a threshold far above ``negligible``.
    """
    if b < a:
        raise DomainError(f"integration limits out of order: a={a!r} > b={b!r}")
    if b == a:
        return 0.0
    width = b - a
    samples = [abs(f(a + width * k / 64)) for k in range(65)]
    scale = max(samples) * width
    if scale < negligible:
        return math.fsum(samples) * width / 64
    if scale >= 1.0:
        return integrate_abs(f, a, b, kinks, tol)
    return scale * integrate_abs(lambda x: f(x) / scale, a, b, kinks, tol)


def refine_root(
    f: Callable[[float], float], lo: float, hi: float, xtol: float
) -> float:
    """Bisect a bracketed sign change of ``f`` down to width ``xtol``."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise DomainError("refine_root needs a bracketed sign change")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_sign_changes(
    f: Callable[[float], float],
    a: float,
    b: float,
    scan_count: int = DEFAULT_SCAN_COUNT,
) -> Breakpoints:
    """Locate interior sign changes of ``f`` on ``[a, b]``.

    ``f`` is sampled on a uniform grid of ``scan_count + 1`` points; every
    bracketed change is refined by bisection to a width below
    ``1e-12 * (b - a)``. Changes narrower than the grid spacing can be missed.
    Exact zeros on interior grid points are reported as roots.
    """
    if scan_count < 2:
        raise DomainError("scan_count must be at least 2")
    if b <= a:
        return Breakpoints()
    xtol = 1e-12 * (b - a)
    step = (b - a) / scan_count
    xs = [a + i * step for i in range(scan_count)] + [b]
    vals = [f(x) for x in xs]
    roots: list[float] = []
    for i in range(scan_count):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            if 0 < i:
                roots.append(xs[i])
            continue
        if v1 != 0.0 and (v0 > 0.0) != (v1 > 0.0):
            roots.append(refine_root(f, xs[i], xs[i + 1], xtol))
    return Breakpoints.within(roots, a, b)

