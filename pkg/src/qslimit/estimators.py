"""scikit-learn compatible wrappers around the closed-form speed limits.

Each transformer maps a row of physical coordinates to one column per
requested bound, so the models slot into ``Pipeline``/``ColumnTransformer``
workflows and parameter searches via ``get_params``/``set_params``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import PureQubit, ml_qsl_generic, ni_qsl_generic
from .dephasing import (
    DephasingParams,
    dephasing_trajectory,
    ml_qsl_dephasing,
    ni_qsl_dephasing,
)
from .jc import JcParams, jc_trajectory, ml_qsl_jc, ni_qsl_jc, xu_qsl_jc
from .numerics import DEFAULT_TOL

__all__ = ["JcSpeedLimit", "DephasingSpeedLimit"]


class _SpeedLimitBase(TransformerMixin, BaseEstimator):
    _features: tuple = ()
    _allowed_bounds: tuple = ("ml", "ni")

    def _check_params(self):
        bounds = tuple(self.bounds)
        if not bounds:
            raise ValueError("bounds must name at least one bound")
        bad = [b for b in bounds if b not in self._allowed_bounds]
        if bad:
            raise ValueError(f"unsupported bounds {bad}; choose from {self._allowed_bounds}")
        if self.method not in ("closed", "generic"):
            raise ValueError(f"method must be 'closed' or 'generic', got {self.method!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        return bounds

    def _check_X(self, X, reset):
        X = check_array(X, dtype=np.float64)
        n = len(self._features)
        if X.shape[1] != n:
            raise ValueError(
                f"expected {n} columns {self._features}, got {X.shape[1]}"
            )
        if reset:
            self.n_features_in_ = n
        return X

    def fit(self, X, y=None):
        """Validate parameters and the column layout of ``X``; nothing is learned."""
        self._check_params()
        self._check_X(X, reset=True)
        return self

    def transform(self, X):
        """Return an ``(n_samples, len(bounds))`` array of bound values."""
        check_is_fitted(self, "n_features_in_")
        bounds = self._check_params()
        X = self._check_X(X, reset=False)
        out = np.empty((X.shape[0], len(bounds)))
        for i, row in enumerate(X):
            for j, b in enumerate(bounds):
                out[i, j] = self._bound(b, *row)
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "n_features_in_")
        return np.asarray([str(b) for b in self.bounds], dtype=object)


class JcSpeedLimit(_SpeedLimitBase):
    """Speed limits of the damped Jaynes-Cummings qubit.

    Input columns are ``(gamma0, alpha, time)``; ``lam`` is the reservoir
    width. ``"xu"`` ignores ``alpha`` (it is defined for ``|1>`` only).

    Parameters
    ----------
    lam : float, default=15.0
    bounds : tuple of {"ml", "ni", "xu"}, default=("ml", "ni")
    method : {"closed", "generic"}, default="closed"
    theta : float, default=0.0
        Relative phase of the initial state; the bounds do not depend on it.
    tol : float, default=1e-10
    """

    _features = ("gamma0", "alpha", "time")
    _allowed_bounds = ("ml", "ni", "xu")

    def __init__(self, lam=15.0, bounds=("ml", "ni"), method="closed", theta=0.0, tol=DEFAULT_TOL):
        self.lam = lam
        self.bounds = bounds
        self.method = method
        self.theta = theta
        self.tol = tol

    def _bound(self, kind, gamma0, alpha, t):
        p = JcParams(self.lam, gamma0)
        if kind == "xu":
            return xu_qsl_jc(t, p).bound
        psi0 = PureQubit(alpha, self.theta)
        if self.method == "closed":
            fn = ml_qsl_jc if kind == "ml" else ni_qsl_jc
            return fn(t, psi0, p, self.tol).bound
        fn = ml_qsl_generic if kind == "ml" else ni_qsl_generic
        return fn(psi0, jc_trajectory(psi0, p), t, self.tol).bound


class DephasingSpeedLimit(_SpeedLimitBase):
    """Speed limits of the Ohmic-family dephasing qubit.

    Input columns are ``(s, eta, beta, time)``.
    """

    _features = ("s", "eta", "beta", "time")

    def __init__(self, bounds=("ml", "ni"), method="closed", theta=0.0, tol=DEFAULT_TOL):
        self.bounds = bounds
        self.method = method
        self.theta = theta
        self.tol = tol

    def _bound(self, kind, s, eta, beta, t):
        p = DephasingParams(s, eta)
        psi0 = PureQubit(beta, self.theta)
        if self.method == "closed":
            if kind == "ml":
                return ml_qsl_dephasing(t, psi0, p, self.tol).bound
            return ni_qsl_dephasing(t, p, self.tol).bound
        fn = ml_qsl_generic if kind == "ml" else ni_qsl_generic
        return fn(psi0, dephasing_trajectory(psi0, p), t, self.tol).bound
