"""
Atomic frequency comb: spectral distribution and its Fourier transform.

The comb is a train of Gaussian teeth (FWHM ``gamma_fwhm``, spacing
``delta0``) under a Gaussian envelope of standard deviation ``big_gamma``.
Parameters are given in Hz; every computation uses angular frequencies, so
detunings passed to :func:`density` are in rad/s and times passed to
:func:`fourier` are in seconds.

``alpha_L`` is the optical depth of the central tooth at its peak. Teeth away
from the centre are weaker by the envelope factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi
FWHM_TO_SIGMA = 1.0 / math.sqrt(8.0 * math.log(2.0))
# sqrt(pi / (4 ln 2)): comb-averaged absorption of one Gaussian tooth per unit finesse
TOOTH_AREA_FACTOR = math.sqrt(math.pi / (4.0 * math.log(2.0)))

DEFAULT_ENVELOPE_RATIO = 10.0  # big_gamma / delta0
DEFAULT_TOOTH_RATIO = 2.0  # delta0 / gamma_fwhm
DEFAULT_TRUNCATION = 6.0


class RegimeWarning(UserWarning):
    """Comb parameters outside the well-resolved regime.

    The closed-form results degrade gracefully there, so this is a warning
    rather than an error. The offending ratios are kept as attributes.
    """

    def __init__(self, message: str, envelope_ratio: float, tooth_ratio: float):
        super().__init__(message)
        self.envelope_ratio = envelope_ratio
        self.tooth_ratio = tooth_ratio


@dataclass(frozen=True)
class CombParams:
    """Comb geometry.

    Parameters
    ----------
    gamma_fwhm : float
        FWHM of a single tooth (Hz).
    delta0 : float
        Tooth spacing (Hz).
    big_gamma : float
        Standard deviation of the Gaussian envelope (Hz).
    alpha_L : float
        Peak optical depth of the central tooth.
    """

    gamma_fwhm: float
    delta0: float
    big_gamma: float
    alpha_L: float
    # angular versions, filled once in __post_init__
    gamma_rad: float = field(init=False, repr=False, compare=False)
    delta0_rad: float = field(init=False, repr=False, compare=False)
    big_gamma_rad: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("gamma_fwhm", "delta0", "big_gamma"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (np.isfinite(self.alpha_L) and self.alpha_L >= 0):
            raise ValueError(f"alpha_L must be non-negative, got {self.alpha_L!r}")
        object.__setattr__(self, "gamma_rad", TWO_PI * self.gamma_fwhm)
        object.__setattr__(self, "delta0_rad", TWO_PI * self.delta0)
        object.__setattr__(self, "big_gamma_rad", TWO_PI * self.big_gamma)

    @classmethod
    def from_finesse(cls, finesse, gamma_fwhm, big_gamma, alpha_L):
        return cls(gamma_fwhm=gamma_fwhm, delta0=finesse * gamma_fwhm,
                   big_gamma=big_gamma, alpha_L=alpha_L)

    @property
    def tooth_sigma_rad(self) -> float:
        """Tooth standard deviation in rad/s."""
        return self.gamma_rad * FWHM_TO_SIGMA

    @property
    def echo_time(self) -> float:
        """First rephasing time 2*pi/delta0 in seconds."""
        return TWO_PI / self.delta0_rad

    @property
    def mode_duration(self) -> float:
        """Temporal mode duration sqrt(2 pi)/Gamma in seconds."""
        return math.sqrt(TWO_PI) / self.big_gamma_rad

    def is_well_resolved(self, envelope_ratio=DEFAULT_ENVELOPE_RATIO,
                         tooth_ratio=DEFAULT_TOOTH_RATIO) -> bool:
        return (self.big_gamma >= envelope_ratio * self.delta0
                and self.delta0 >= tooth_ratio * self.gamma_fwhm)

    @property
    def well_resolved(self) -> bool:
        return self.is_well_resolved()

    def to_dict(self) -> dict:
        return {"gamma_fwhm": self.gamma_fwhm, "delta0": self.delta0,
                "big_gamma": self.big_gamma, "alpha_L": self.alpha_L}


def check_regime(c: CombParams, envelope_ratio=DEFAULT_ENVELOPE_RATIO,
                 tooth_ratio=DEFAULT_TOOTH_RATIO, stacklevel=3) -> bool:
    """Warn with :class:`RegimeWarning` unless the comb is well resolved."""
    if c.is_well_resolved(envelope_ratio, tooth_ratio):
        return True
    env = c.big_gamma / c.delta0
    tooth = c.delta0 / c.gamma_fwhm
    warnings.warn(
        RegimeWarning(
            f"comb not well resolved: big_gamma/delta0 = {env:.3g} "
            f"(want >= {envelope_ratio:g}), delta0/gamma = {tooth:.3g} "
            f"(want >= {tooth_ratio:g})", env, tooth),
        stacklevel=stacklevel)
    return False


def finesse(c: CombParams) -> float:
    return c.delta0 / c.gamma_fwhm


def effective_depth(c: CombParams) -> float:
    """Comb-averaged optical depth sqrt(pi/(4 ln 2)) * alpha_L / F."""
    return TOOTH_AREA_FACTOR * c.alpha_L / finesse(c)


def rephasing_factor(finesse_value):
    """Dephasing penalty exp(-pi^2 / (2 ln2 F^2)) at the first revival.

    ``finesse_value`` may be ``np.inf`` (ideal teeth).
    """
    f = np.asarray(finesse_value, dtype=float)
    out = np.exp(-math.pi ** 2 / (2.0 * math.log(2.0) * f ** 2))
    return out if out.ndim else float(out)


def tooth_range(c: CombParams, truncation=DEFAULT_TRUNCATION) -> int:
    """Largest tooth index kept: ceil(K * Gamma / delta0)."""
    return int(math.ceil(truncation * c.big_gamma / c.delta0))


def density(c: CombParams, delta, truncation=DEFAULT_TRUNCATION):
    """Spectral distribution Theta(delta), normalized over angular detuning.

    Parameters
    ----------
    c : CombParams
    delta : float or ndarray
        Detuning in rad/s.
    truncation : float
        Teeth with ``|j| > ceil(truncation * Gamma / delta0)`` are dropped.

    Returns
    -------
    float or ndarray
        Density in 1/(rad/s).
    """
    d = np.asarray(delta, dtype=float)
    sig = c.tooth_sigma_rad
    big = c.big_gamma_rad
    d0 = c.delta0_rad
    jmax = tooth_range(c, truncation)
    # only teeth within a few tooth widths of delta matter; the rest are < e^-50
    n_near = int(math.ceil(10.0 * sig / d0)) + 1
    nearest = np.rint(-d / d0)
    teeth = np.zeros_like(d)
    for k in range(-n_near, n_near + 1):
        j = nearest + k
        term = np.exp(-((d + j * d0) ** 2) / (2.0 * sig ** 2))
        teeth += np.where(np.abs(j) <= jmax, term, 0.0)
    norm = d0 / (TWO_PI * sig * big)
    out = norm * np.exp(-d ** 2 / (2.0 * big ** 2)) * teeth
    return out if out.ndim else float(out)


def _fourier_closed(c: CombParams, t):
    # Poisson-summed form: Gaussians of width 1/Gamma at t_m = 2 pi m / delta0,
    # weighted by the tooth envelope exp(-sigma^2 t_m^2 / 2).
    t = np.asarray(t, dtype=float)
    sig = c.tooth_sigma_rad
    big = c.big_gamma_rad
    period = TWO_PI / c.delta0_rad
    reach = int(math.ceil(40.0 / (big * period))) + 1
    centre = np.rint(t / period)
    out = np.zeros_like(t)
    for k in range(-reach, reach + 1):
        tm = (centre + k) * period
        out += np.exp(-0.5 * (sig * tm) ** 2 - 0.5 * (big * (t - tm)) ** 2)
    return out.astype(complex)


def _panels(c: CombParams, truncation):
    """Integration panels: one comb period each, covering +-truncation*Gamma."""
    d0 = c.delta0_rad
    half_span = truncation * c.big_gamma_rad
    jmax = int(math.ceil(half_span / d0))
    edges = (np.arange(-jmax, jmax + 2) - 0.5) * d0
    return edges


def _fourier_adaptive(c: CombParams, t, truncation, epsabs):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    edges = _panels(c, truncation)

    def integrand(d):
        rho = density(c, d, truncation)
        return np.concatenate([rho * np.cos(d * t), -rho * np.sin(d * t)])

    total = np.zeros(2 * t.size)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad_vec(integrand, lo, hi, epsabs=epsabs / len(edges),
                                    epsrel=0.0)
        total += val
    return total[: t.size] + 1j * total[t.size:]


def _fourier_grid(c: CombParams, t, truncation, samples_per_fwhm):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    half_span = truncation * c.big_gamma_rad
    h = c.gamma_rad / samples_per_fwhm
    n = 2 * int(math.ceil(half_span / h)) + 1
    d = np.linspace(-half_span, half_span, n)
    rho = density(c, d, truncation)
    w = integrate.simpson(rho[None, :] * np.exp(-1j * np.outer(t, d)), x=d, axis=1)
    return w


def fourier(c: CombParams, t, method="closed", truncation=DEFAULT_TRUNCATION,
            epsabs=1e-8, samples_per_fwhm=40):
    """Fourier transform of the comb, integral of Theta(d) exp(-i d t) dd.

    Parameters
    ----------
    c : CombParams
    t : float or ndarray
        Time in seconds.
    method : {"closed", "adaptive", "grid"}
        ``closed`` uses the time-domain sum of Gaussians; ``adaptive`` does
        adaptive quadrature per comb period to absolute tolerance ``epsabs``;
        ``grid`` is a fixed Simpson grid with ``samples_per_fwhm`` points per
        tooth FWHM.
    """
    scalar = np.ndim(t) == 0
    if method == "closed":
        out = _fourier_closed(c, t)
    elif method == "adaptive":
        out = _fourier_adaptive(c, t, truncation, epsabs)
    elif method == "grid":
        if samples_per_fwhm < 40:
            raise ValueError("grid quadrature needs >= 40 samples per tooth FWHM")
        out = _fourier_grid(c, t, truncation, samples_per_fwhm)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = np.asarray(out)
    return complex(out.reshape(-1)[0]) if scalar else out


def normalization(c: CombParams, truncation=DEFAULT_TRUNCATION, epsabs=1e-10) -> float:
    """Integral of Theta over +-truncation*Gamma by adaptive quadrature."""
    edges = _panels(c, truncation)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda d: density(c, d, truncation), lo, hi,
                                epsabs=epsabs / len(edges), epsrel=1e-12)
        total += val
    return total
