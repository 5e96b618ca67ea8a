"""Target-network maintenance shared by both agent families."""

import numpy as np

from ..diffcore import MlpParams, kernels
from ..diffcore.errors import ContractError, DimensionError


def target_sync(live: MlpParams, target: MlpParams, tau: float) -> MlpParams:
    """Polyak update ``target <- (1 - tau) * target + tau * live`` in place.

    ``tau == 1`` is an exact copy.
    """
    if not live.same_architecture(target):
        raise DimensionError(f"target sync between {live!r} and {target!r}")
    if not 0.0 < tau <= 1.0:
        raise ContractError(f"tau must lie in (0, 1], got {tau}")
    if tau == 1.0:
        np.copyto(target.theta, live.theta)
    else:
        kernels.polyak(target.theta, live.theta, float(tau))
    return target
