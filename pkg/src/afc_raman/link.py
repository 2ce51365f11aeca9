"""
Elementary repeater link: two crystals, one beamsplitter station in between.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, fields
from importlib import resources

from . import analytic
from .analytic import ProtocolParams
from .comb import CombParams


class LinkError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialPreset:
    """Comb and fibre numbers for one material.

    ``big_gamma_span`` is the full usable comb bandwidth (Hz); the Gaussian
    envelope of the comb gets half of it as standard deviation.
    """

    name: str
    gamma_fwhm: float
    big_gamma_span: float
    alpha_L: float
    wavelength_nm: float
    attenuation_db_per_km: float
    finesse: float = 5.0

    def __post_init__(self):
        for f in fields(self):
            if f.name != "name" and not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")

    def comb(self, finesse: float | None = None) -> CombParams:
        f = self.finesse if finesse is None else finesse
        return CombParams(gamma_fwhm=self.gamma_fwhm, delta0=f * self.gamma_fwhm,
                          big_gamma=0.5 * self.big_gamma_span, alpha_L=self.alpha_L)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> MaterialPreset:
        return cls(**d)


def load_presets(path=None) -> dict[str, MaterialPreset]:
    """Read a JSON array of presets; the bundled file by default."""
    if path is None:
        text = resources.files("afc_raman").joinpath("data/presets.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return {d["name"]: MaterialPreset.from_dict(d) for d in json.loads(text)}


def dump_presets(presets) -> str:
    return json.dumps([p.to_dict() for p in presets], indent=2, sort_keys=True)


def get_preset(name: str) -> MaterialPreset:
    presets = load_presets()
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(presets)}")
    return presets[name]


@dataclass(frozen=True)
class LinkParams:
    distance_km: float
    attenuation_db_per_km: float
    eta_c: float
    eta_d: float
    rate_hz: float
    p: float
    half_distance: bool = True

    def __post_init__(self):
        if self.distance_km < 0 or self.attenuation_db_per_km < 0:
            raise ValueError("distance and attenuation must be non-negative")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        for name in ("eta_c", "eta_d"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    @property
    def eta_t(self) -> float:
        return transmission(self.distance_km, self.attenuation_db_per_km, self.half_distance)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LinkReport:
    eta_t: float
    T_entangle_s: float
    fidelity: float

    def to_dict(self) -> dict:
        return asdict(self)


def transmission(distance_km, attenuation_db_per_km, half_distance=True):
    """Fibre transmission to the central station.

    Each photon crosses half the station separation when ``half_distance``
    is true, the full separation otherwise.
    """
    length = 0.5 * distance_km if half_distance else distance_km
    return 10.0 ** (-attenuation_db_per_km * length / 10.0)


def entangle_time(lp: LinkParams) -> float:
    """Mean heralding time 1 / (2 r p eta_c eta_t eta_d)."""
    rate = 2.0 * lp.rate_hz * lp.p * lp.eta_c * lp.eta_t * lp.eta_d
    if rate == 0:
        raise LinkError("heralding rate is zero: every factor must be positive")
    return 1.0 / rate


def fidelity(lp: LinkParams) -> float:
    """Entanglement fidelity 1 - 3 p (1 - eta_c eta_t eta_d)."""
    if lp.p > 0.2:
        warnings.warn(f"p = {lp.p:g} is large; the fidelity model assumes small p",
                      stacklevel=2)
    value = 1.0 - 3.0 * lp.p * (1.0 - lp.eta_c * lp.eta_t * lp.eta_d)
    if not 0.0 <= value <= 1.0:
        raise LinkError(f"fidelity {value:.6g} outside [0, 1]; p too large for this model")
    return value


def link_report(lp: LinkParams) -> LinkReport:
    return LinkReport(eta_t=lp.eta_t, T_entangle_s=entangle_time(lp), fidelity=fidelity(lp))


def feasibility_report(preset: MaterialPreset, lp: LinkParams, pp: ProtocolParams, *,
                       finesse: float | None = None, heralds: float = 1e4,
                       p_from_comb: bool = False) -> dict:
    """Comb efficiencies plus link numbers for one material.

    With ``p_from_comb`` the link uses the per-mode Stokes probability of the
    comb instead of ``lp.p``. ``heralds`` is the number of heralding events
    assumed for a tomography run.
    """
    c = preset.comb(finesse)
    comb_report = analytic.full_report(c, pp)
    if p_from_comb:
        lp = LinkParams(**{**lp.to_dict(), "p": comb_report.p_stokes})
    lr = link_report(lp)
    return {
        "preset": preset.to_dict(),
        "comb": c.to_dict(),
        "protocol": pp.to_dict(),
        "link_params": lp.to_dict(),
        "efficiency": comb_report.to_dict(),
        "link": lr.to_dict(),
        "tomography": {"heralds": heralds, "time_s": heralds * lr.T_entangle_s},
        "flags": ["fibre lengths must be actively phase stabilized (not modelled)"],
        "finesse": c.delta0 / c.gamma_fwhm,
        "multimode_capacity": comb_report.mode_capacity,
        "readout_efficiency_forward": analytic.readout_efficiency_forward(c),
        "memory_efficiency_backward": analytic.afc_memory_efficiency(c, "backward"),
        "snr_asymptotic": analytic.snr_asymptotic(pp) if pp.theta0_sq > 0 else None,
        "stokes_unexpanded": analytic.stokes_photons_unexpanded(c, pp),
        "mode_duration_s": c.mode_duration,
        "echo_time_s": c.echo_time,
        "p_from_comb": p_from_comb,
    }


def feasibility_link() -> LinkParams:
    """Link numbers of the Pr:YSO feasibility scenario."""
    return LinkParams(distance_km=1.0, attenuation_db_per_km=9.0, eta_c=0.5, eta_d=0.7,
                      rate_hz=1e3, p=0.05)

