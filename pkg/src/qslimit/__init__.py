"""Quantum speed limits and non-Markovianity for open single-qubit dynamics."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BoundKind,
    HermitianTraceless,
    Method,
    PureQubit,
    QslResult,
    QubitDensity,
    Trajectory,
    bures_angle,
    ml_qsl_generic,
    ni_qsl_generic,
    op_norm,
    state_expectation,
)
from .dephasing import (  # noqa: E402
    DephasingParams,
    capacity_nonmarkovianity,
    channel_capacity,
    dephasing_gamma,
    dephasing_rate,
    dephasing_trajectory,
    ml_qsl_dephasing,
    ni_qsl_dephasing,
    rate_sign,
)
from .jc import (  # noqa: E402
    JcParams,
    blp_nonmarkovianity,
    jc_trajectory,
    ml_qsl_jc,
    ni_qsl_jc,
    q_amplitude,
    q_dot,
    xu_qsl_jc,
)
from .estimators import DephasingSpeedLimit, JcSpeedLimit  # noqa: E402
