"""Pointwise thermodynamics of hydrogen/natural gas mixtures in pipes.

The gases and their mixture are treated as ideal, so the pressure is the
density times a composition-weighted squared sound speed. All pipe formulas
work on squared pressures; the square root is taken only for output.

The functions accept scalars or NumPy arrays. Quantities are in whatever
consistent units the network file uses.
"""

from dataclasses import dataclass

import numpy as np

from blendnet.network_core.errors import DomainError
from blendnet.utilities.settings import (
    SPECIFIC_GAS_CONSTANT_H2,
    SPECIFIC_GAS_CONSTANT_NG,
    gas_options,
)

# ------------------------------ Gas constants --------------------------------


@dataclass(frozen=True)
class GasConstants:
    """Squared sound speeds of the two pure gases.

    Attributes
    ----------
    sigma2_h2 : float
        Squared sound speed in hydrogen, R_S,H2 * T.
    sigma2_ng : float
        Squared sound speed in natural gas, R_S,NG * T.
    """

    sigma2_h2: float = gas_options["sigma2_h2"]
    sigma2_ng: float = gas_options["sigma2_ng"]

    def __post_init__(self):
        if not self.sigma2_h2 > self.sigma2_ng > 0:
            raise DomainError(
                "gas constants need sigma2_h2 > sigma2_ng > 0, got "
                f"{self.sigma2_h2} and {self.sigma2_ng}"
            )

    @classmethod
    def from_temperature(
        cls, temperature, r_h2=SPECIFIC_GAS_CONSTANT_H2, r_ng=SPECIFIC_GAS_CONSTANT_NG
    ):
        """Build the constants from a temperature and specific gas constants."""
        return cls(r_h2 * temperature, r_ng * temperature)

    @property
    def sigma2_max(self):
        return max(self.sigma2_h2, self.sigma2_ng)


@dataclass(frozen=True)
class PipeState:
    """Inlet pressure, mixture flow and composition of a single pipe."""

    p0: float
    q: float
    eta: float

    def __post_init__(self):
        check_composition(self.eta)
        if not self.p0 > 0:
            raise DomainError(f"inlet pressure must be positive, got {self.p0}")


# ------------------------------ Domain checks --------------------------------


def check_composition(eta):
    """Raise DomainError unless every composition lies in [0, 1]."""
    eta = np.asarray(eta, dtype=float)
    if np.any(~((eta >= 0.0) & (eta <= 1.0))):
        raise DomainError(f"composition must lie in [0, 1], got {eta}")


def _check_positive(name, value):
    if np.any(~(np.asarray(value, dtype=float) > 0.0)):
        raise DomainError(f"{name} must be positive, got {value}")


# ------------------------------ Mixture formulas -----------------------------


def sigma(eta_v, gas, check=True):
    """Squared sound speed of a mixture with hydrogen fraction eta_v.

    Parameters
    ----------
    eta_v : float or ndarray
        Hydrogen mass fraction.
    gas : GasConstants
    check : bool, optional
        Skip the [0, 1] domain check when False (unconstrained iterates).

    Returns
    -------
    float or ndarray
        eta_v * sigma2_h2 + (1 - eta_v) * sigma2_ng
    """
    if check:
        check_composition(eta_v)
    eta_v = np.asarray(eta_v, dtype=float)
    result = eta_v * gas.sigma2_h2 + (1.0 - eta_v) * gas.sigma2_ng
    return result if result.ndim else float(result)


def sigma_tilde(eta_foot, eta_head, q, L, D, friction, gas, check=True):
    """Signed pressure-loss coefficient of a pipe.

    The coefficient takes the composition of the upstream node: the foot for
    q >= 0 and the head for q < 0. The q = 0 value is the foot branch; it is
    always multiplied by q|q| = 0.

    Returns
    -------
    float or ndarray
        -(friction / D) * L * sigma(upstream composition), always negative.
    """
    if check:
        _check_positive("pipe length", L)
        _check_positive("pipe diameter", D)
        _check_positive("friction factor", friction)
    q = np.asarray(q, dtype=float)
    upstream = np.where(q >= 0.0, eta_foot, eta_head)
    result = -(friction / D) * L * sigma(upstream, gas, check=check)
    return result if np.ndim(result) else float(result)


def pressure_drop_squared(eta_foot, eta_head, q, L, D, friction, gas, check=True):
    """Return p_head**2 - p_foot**2 for a pipe carrying flow q."""
    q = np.asarray(q, dtype=float)
    coefficient = sigma_tilde(eta_foot, eta_head, q, L, D, friction, gas, check)
    result = coefficient * q * np.abs(q)
    return result if np.ndim(result) else float(result)


def critical_length(p0, eta, q, D, friction, gas):
    """Pipe length at which the outlet pressure reaches zero.

    Parameters
    ----------
    p0 : float
        Pressure at the pipe inlet (the foot for q > 0).
    eta : float
        Composition carried by the pipe.
    q : float
        Flow; the pressure only falls toward the head for q > 0.

    Returns
    -------
    float
        p0**2 / ((friction / D) * sigma(eta) * q * |q|), or inf for q <= 0.
    """
    _check_positive("inlet pressure", p0)
    _check_positive("pipe diameter", D)
    _check_positive("friction factor", friction)
    check_composition(eta)
    if q <= 0.0:
        return float("inf")
    return float(p0**2 / ((friction / D) * sigma(eta, gas) * q * abs(q)))


def recover_densities(p, eta, gas):
    """Split the mixture density given by the ideal-gas law into its parts.

    Returns
    -------
    rho_ng : float
        Natural gas density, (1 - eta) * p / sigma(eta).
    rho_h2 : float
        Hydrogen density, eta * p / sigma(eta).
    """
    _check_positive("pressure", p)
    check_composition(eta)
    rho = p / sigma(eta, gas)
    return (1.0 - eta) * rho, eta * rho


def mixture_pressure(rho_ng, rho_h2, gas):
    """Pressure of a mixture from the partial densities (ideal-gas law)."""
    return rho_h2 * gas.sigma2_h2 + rho_ng * gas.sigma2_ng


def pressure_profile(state, L, D, friction, gas, x):
    """Pressure along a pipe of length L at positions x.

    Parameters
    ----------
    state : PipeState
        Inlet pressure, flow and composition.
    x : float or ndarray
        Positions in [0, L] measured from the foot.

    Returns
    -------
    float or ndarray
        sqrt(p0**2 - (friction / D) * sigma(eta) * q|q| * x); NaN where the
        pipe is longer than its critical length.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > L)):
        raise DomainError(f"positions must lie in [0, {L}]")
    p2 = state.p0**2 - (friction / D) * sigma(state.eta, gas) * (
        state.q * abs(state.q) * x
    )
    with np.errstate(invalid="ignore"):
        result = np.where(p2 >= 0.0, np.sqrt(np.maximum(p2, 0.0)), np.nan)
    return result if result.ndim else float(result)
