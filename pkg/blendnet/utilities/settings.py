"""Default settings for the network solvers.

The gas defaults can be overridden by a JSON file named in the environment
variable `BLENDNET_GAS_FILE`, which has the same keys as the `gas` section of
a network file. A network file's own `gas` section overrides both.
"""

import json
import logging
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

logger = logging.getLogger(__name__)

GAS_FILE_ENV = "BLENDNET_GAS_FILE"

DEFAULT_TEMPERATURE = 283.15  # K
SPECIFIC_GAS_CONSTANT_H2 = 4124.2  # J/(kg K)
SPECIFIC_GAS_CONSTANT_NG = 518.26  # J/(kg K)

gas_options = {
    "sigma2_h2": SPECIFIC_GAS_CONSTANT_H2 * DEFAULT_TEMPERATURE,
    "sigma2_ng": SPECIFIC_GAS_CONSTANT_NG * DEFAULT_TEMPERATURE,
    "diameter": 1.0,
    "friction": 0.01,
}


def load_gas_options(path=None):
    """Return the gas defaults merged with the overrides file, if any.

    Parameters
    ----------
    path : str or Path, optional
        Overrides file. Defaults to the file named by `BLENDNET_GAS_FILE`.

    Returns
    -------
    dict
        Keys sigma2_h2, sigma2_ng, diameter and friction.
    """
    options = dict(gas_options)
    path = path or os.environ.get(GAS_FILE_ENV)
    if not path:
        return options
    with open(Path(path), "r", encoding="utf-8") as gas_file:
        overrides = json.load(gas_file)
    unknown = set(overrides) - set(options)
    if unknown:
        logger.warning(
            "ignoring unknown keys %s in gas file %s", sorted(unknown), path
        )
    options.update({k: float(v) for k, v in overrides.items() if k in options})
    logger.info("gas defaults overridden from %s", path)
    return options


# ------------------------------ Solver options -------------------------------


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration limits of the solvers.

    Attributes
    ----------
    tol_p : float
        Bisection stops once |g(lambda)| is below this value.
    max_iter_bisect : int
        Iteration limit of the bisection on g.
    lm_tol : float
        Levenberg-Marquardt stops once the max-norm residual is below this.
    lm_step_tol : float
        Levenberg-Marquardt stops once the step norm is below this.
    lm_max_iter : int
        Iteration limit of Levenberg-Marquardt.
    nu0 : float
        Initial Levenberg-Marquardt damping.
    fd_step : float
        Relative forward-difference step for the Jacobian.
    residual_tol : float
        Largest residual accepted for a reported solution.
    """

    tol_p: float = 1e-10
    max_iter_bisect: int = 200
    lm_tol: float = 1e-9
    lm_step_tol: float = 1e-12
    lm_max_iter: int = 500
    nu0: float = 1e-3
    fd_step: float = 1e-7
    residual_tol: float = 1e-8

    def updated(self, **overrides):
        """Return a copy with the given non-None fields replaced."""
        names = {f.name for f in fields(self)}
        changes = {
            k: v for k, v in overrides.items() if k in names and v is not None
        }
        return replace(self, **changes)


DEFAULT_OPTIONS = SolverOptions()
