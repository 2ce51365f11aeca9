"""
Closed-form predictions for the comb-shaped spontaneous Raman source.

Two layers: scalar kernels taking the effective depth ``abar_L`` and the
finesse directly (used by the optimizer and in tests), and wrappers taking
:class:`~afc_raman.comb.CombParams` and :class:`ProtocolParams`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .comb import CombParams, check_regime, effective_depth, finesse, rephasing_factor

THETA0_SQ_WARN = 0.1
THETA0_SQ_MAX = 0.3


class ProtocolError(ValueError):
    """Pulse timing or area inconsistent with the protocol."""


class PerturbativeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    """Write/read sequence.

    Parameters
    ----------
    theta0_sq : float
        Squared write-pulse area at the crystal entrance.
    t_d : float
        Stokes detection time after the write pulse (s).
    tau : float
        Delay between detection and read pulse (s).
    read_area : float
        Read pulse area; only a perfect pi pulse is modelled.
    branching_ratio : float
        Fraction of excited atoms decaying on the e-s transition.
    """

    theta0_sq: float
    t_d: float = 0.0
    tau: float = 0.0
    read_area: float = math.pi
    branching_ratio: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.theta0_sq <= THETA0_SQ_MAX):
            raise ValueError(
                f"theta0_sq must lie in [0, {THETA0_SQ_MAX}] (perturbative write), "
                f"got {self.theta0_sq!r}")
        if self.theta0_sq > THETA0_SQ_WARN:
            warnings.warn(
                f"theta0_sq = {self.theta0_sq:g} > {THETA0_SQ_WARN}: first-order "
                "expansion error exceeds ~5%", PerturbativeWarning, stacklevel=3)
        if self.t_d < 0 or self.tau < 0:
            raise ValueError("t_d and tau must be non-negative")
        if not math.isclose(self.read_area, math.pi, rel_tol=1e-9):
            raise ValueError("only a pi read pulse is modelled (read_area must equal pi)")
        if not (0.0 < self.branching_ratio <= 1.0):
            raise ValueError("branching_ratio must lie in (0, 1]")

    def check_timing(self, c: CombParams) -> None:
        """Raise :class:`ProtocolError` unless t_d < 2 pi / delta0."""
        if self.t_d >= c.echo_time:
            raise ProtocolError(
                f"detection time t_d = {self.t_d:.6g} s must precede the comb "
                f"revival 2*pi/delta0 = {c.echo_time:.6g} s")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EfficiencyReport:
    p_stokes: float
    eta_readout: float
    noise_per_mode: float
    snr_lower_bound: float | None
    echo_time: float
    mode_capacity: int
    photons_per_write_attempt: float

    def to_dict(self) -> dict:
        return asdict(self)


# scalar kernels -----------------------------------------------------------

def stokes_probability(abar_L, theta0_sq):
    return theta0_sq * -np.expm1(-abar_L)


def backward_raman(abar_L, finesse_value=np.inf):
    return -np.expm1(-abar_L) * rephasing_factor(finesse_value)


def forward_raman(abar_L, finesse_value=np.inf):
    x = np.asarray(abar_L, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        # x^2 e^-x / (1 - e^-x) = x^2 / (e^x - 1)
        core = np.where(x > 0, x ** 2 / np.expm1(np.where(x > 0, x, 1.0)), 0.0)
    out = core * rephasing_factor(finesse_value)
    return out if np.ndim(out) else float(out)


def backward_memory(abar_L, finesse_value=np.inf):
    return np.expm1(-abar_L) ** 2 * rephasing_factor(finesse_value)


def forward_memory(abar_L, finesse_value=np.inf):
    return abar_L ** 2 * np.exp(-abar_L) * rephasing_factor(finesse_value)


def noise_level(abar_L, theta0_sq):
    return 0.5 * theta0_sq * -np.expm1(-2.0 * abar_L)


# comb-level operations ----------------------------------------------------

def stokes_photons_per_mode(c: CombParams, p: ProtocolParams) -> float:
    """Heralding probability per temporal mode, theta0^2 (1 - exp(-abar L))."""
    return float(p.branching_ratio * stokes_probability(effective_depth(c), p.theta0_sq))


def stokes_photons_unexpanded(c: CombParams, p: ProtocolParams) -> float:
    """Stokes photons per mode without the first-order expansion.

    ``exp(theta0^2 (1 - exp(-abar L))) - 1``; reduces to
    :func:`stokes_photons_per_mode` for small write areas.
    """
    return float(p.branching_ratio
                 * math.expm1(p.theta0_sq * -math.expm1(-effective_depth(c))))


def photons_per_write_attempt(c: CombParams, p: ProtocolParams) -> float:
    """Stokes photons over a full comb period, sqrt(2 pi) Gamma/delta0 per mode."""
    return math.sqrt(2.0 * math.pi) * c.big_gamma / c.delta0 * stokes_photons_per_mode(c, p)


def saturated_gain_photons(c: CombParams) -> float:
    """Photons per mode with the whole ensemble inverted, exp(abar L) - 1."""
    return math.expm1(effective_depth(c))


def readout_efficiency_backward(c: CombParams) -> float:
    check_regime(c)
    return float(backward_raman(effective_depth(c), finesse(c)))


def readout_efficiency_forward(c: CombParams) -> float:
    check_regime(c)
    return float(forward_raman(effective_depth(c), finesse(c)))


def afc_memory_efficiency(c: CombParams, direction="backward") -> float:
    """Efficiency of an AFC memory of the same comb (absorb, then re-emit)."""
    check_regime(c)
    if direction == "backward":
        return float(backward_memory(effective_depth(c), finesse(c)))
    if direction == "forward":
        return float(forward_memory(effective_depth(c), finesse(c)))
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def noise_per_mode(c: CombParams, p: ProtocolParams) -> float:
    """Worst-case spontaneous noise in the anti-Stokes mode."""
    return float(p.branching_ratio * noise_level(effective_depth(c), p.theta0_sq))


def snr_bound(c: CombParams, p: ProtocolParams) -> float:
    """Finite-depth lower bound on the signal-to-noise ratio.

    Built as readout efficiency over noise per mode.

    Raises
    ------
    ValueError
        If ``theta0_sq`` is zero (no noise, no signal).
    """
    if p.theta0_sq == 0:
        raise ValueError("signal-to-noise bound undefined for theta0_sq = 0")
    return readout_efficiency_backward(c) / noise_per_mode(c, p)


def snr_asymptotic(p) -> float:
    """Large-depth, high-finesse limit 2 / theta0^2.

    ``p`` is a :class:`ProtocolParams` or a bare squared write area.
    """
    theta0_sq = float(getattr(p, "theta0_sq", p))
    if theta0_sq <= 0:
        raise ValueError("signal-to-noise bound undefined for theta0_sq = 0")
    return 2.0 / theta0_sq


def mode_capacity(c: CombParams, span=None) -> int:
    """Number of temporal modes, floor(span / delta0).

    ``span`` is the usable bandwidth in Hz; it defaults to ``2 * big_gamma``.
    """
    check_regime(c)
    span = 2.0 * c.big_gamma if span is None else span
    return int(math.floor(span / c.delta0 + 1e-9))


def full_report(c: CombParams, p: ProtocolParams) -> EfficiencyReport:
    return EfficiencyReport(
        p_stokes=stokes_photons_per_mode(c, p),
        eta_readout=readout_efficiency_backward(c),
        noise_per_mode=noise_per_mode(c, p),
        snr_lower_bound=snr_bound(c, p) if p.theta0_sq > 0 else None,
        echo_time=c.echo_time,
        mode_capacity=mode_capacity(c),
        photons_per_write_attempt=photons_per_write_attempt(c, p),
    )
