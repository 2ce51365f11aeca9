"""
Discretized field/atom oracle for the write, Stokes emission and readout.

The ensemble is a grid of cells (position slice, detuning class). Retardation
is neglected, so the field equations become first order in z with time
entering only through the free phase exp(-i delta t) of each class. Mean-field
closures: the e-s inversion during Stokes emission is the write-pulse excited
population, and the g-e inversion during readout is -1.

The atom-field coupling never appears explicitly. Photon numbers per temporal
mode of duration sqrt(2 pi)/Gamma are expressed through the comb-averaged
depth ``abar_L``, which the grid derives from the central-tooth depth and the
sampled density at zero detuning.

Nothing here calls :mod:`afc_raman.analytic`; the tests compare the two.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal

from .analytic import ProtocolError, ProtocolParams
from .comb import TWO_PI, CombParams, check_regime, density

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class OverlapWarning(UserWarning):
    """Two revivals closer than two mode durations."""


@dataclass(frozen=True)
class GridSpec:
    """Resolution of the ensemble discretization.

    ``classes_per_fwhm`` sets the detuning spacing to gamma / classes_per_fwhm;
    the detuning span is +-``envelope_sigmas`` envelope widths. ``method`` is
    ``"quadrature"`` (uniform deterministic grid) or ``"monte_carlo"``
    (``n_samples`` detunings drawn from the comb density with ``seed``).
    """

    n_z: int = 48
    classes_per_fwhm: float = 8.0
    envelope_sigmas: float = 6.0
    steps_per_inv_gamma: float = 20.0
    method: str = "quadrature"
    n_samples: int = 50_000
    seed: int = 0
    force: bool = False
    max_classes: int = 4_000_000

    def __post_init__(self):
        if self.n_z < 1 or self.classes_per_fwhm <= 0 or self.envelope_sigmas <= 0:
            raise ValueError("grid resolution must be positive")
        if self.steps_per_inv_gamma < 20 and not self.force:
            raise ValueError("time step must be <= (1/Gamma)/20")
        if self.method not in ("quadrature", "monte_carlo"):
            raise ValueError(f"unknown grid method {self.method!r}")

    def refined(self, factor: int = 2) -> GridSpec:
        """Spec with z and detuning spacings divided by ``factor``."""
        return replace(self, n_z=self.n_z * factor,
                       classes_per_fwhm=self.classes_per_fwhm * factor,
                       n_samples=self.n_samples * factor)


@dataclass(frozen=True, eq=False)
class EnsembleGrid:
    comb: CombParams
    spec: GridSpec
    z_nodes: np.ndarray  # normalized positions in [0, 1]
    z_weights: np.ndarray  # sum to 1
    detunings: np.ndarray  # rad/s
    weights: np.ndarray  # sum to 1
    raw_weight_sum: float
    spacing: float | None  # detuning spacing for uniform grids
    abar_L: float

    @property
    def n_z(self) -> int:
        return self.z_nodes.size

    @property
    def n_freq(self) -> int:
        return self.detunings.size

    @property
    def classes_per_fwhm(self) -> float:
        return math.inf if self.spacing is None else self.comb.gamma_rad / self.spacing

    @property
    def mode_duration(self) -> float:
        return self.comb.mode_duration

    @property
    def time_step(self) -> float:
        period = self.comb.echo_time
        per_period = math.ceil(period * self.spec.steps_per_inv_gamma * self.comb.big_gamma_rad)
        return period / per_period

    def elapsed_times(self, periods: float = 2.0) -> np.ndarray:
        """Uniform times [0, periods * 2 pi/delta0] with the revival on the grid."""
        dt = self.time_step
        n = int(round(periods * self.comb.echo_time / dt))
        return np.arange(n + 1) * dt


def _depth_from_density(c: CombParams) -> float:
    # abar = alpha / (sqrt(2 pi) Gamma Theta(0)), alpha being the central-tooth depth
    return c.alpha_L / (math.sqrt(TWO_PI) * c.big_gamma_rad * density(c, 0.0))


def _sample_detunings(c: CombParams, n: int, seed: int) -> np.ndarray:
    # Theta is a mixture of Gaussians: envelope x tooth j gives a Gaussian with
    # mean -j d0 G^2/(G^2+s^2), variance G^2 s^2/(G^2+s^2) and weight
    # exp(-j^2 d0^2 / (2 (G^2+s^2))).
    rng = np.random.default_rng(seed)
    big, sig, d0 = c.big_gamma_rad, c.tooth_sigma_rad, c.delta0_rad
    jmax = int(math.ceil(8.0 * big / d0))
    j = np.arange(-jmax, jmax + 1)
    total = big ** 2 + sig ** 2
    logw = -(j * d0) ** 2 / (2.0 * total)
    prob = np.exp(logw - logw.max())
    prob /= prob.sum()
    teeth = rng.choice(j, size=n, p=prob)
    mean = -teeth * d0 * big ** 2 / total
    std = big * sig / math.sqrt(total)
    return np.sort(mean + std * rng.standard_normal(n))


def build_grid(c: CombParams, resolution: GridSpec | None = None) -> EnsembleGrid:
    """Deterministic quadrature grid over position and detuning.

    Raises
    ------
    ValueError
        If fewer than 8 detuning classes per tooth FWHM are requested and
        ``resolution.force`` is false, or the grid would exceed
        ``max_classes``.
    """
    spec = resolution or GridSpec()
    check_regime(c)
    x, w = np.polynomial.legendre.leggauss(spec.n_z)
    z_nodes = 0.5 * (x + 1.0)
    z_weights = 0.5 * w
    if spec.method == "monte_carlo":
        detunings = _sample_detunings(c, spec.n_samples, spec.seed)
        weights = np.full(detunings.size, 1.0 / detunings.size)
        raw_sum = 1.0
        spacing = None
    else:
        if spec.classes_per_fwhm < 8 and not spec.force:
            raise ValueError(
                f"{spec.classes_per_fwhm:g} detuning classes per FWHM under-resolves "
                "the teeth (need >= 8); set force=True to override")
        spacing = c.gamma_rad / spec.classes_per_fwhm
        half = int(math.ceil(spec.envelope_sigmas * c.big_gamma_rad / spacing))
        if 2 * half + 1 > spec.max_classes:
            raise ValueError(f"grid needs {2 * half + 1} detuning classes "
                             f"(max_classes={spec.max_classes})")
        detunings = np.arange(-half, half + 1) * spacing
        raw = density(c, detunings) * spacing
        raw_sum = float(raw.sum())
        weights = raw / raw_sum
    return EnsembleGrid(comb=c, spec=spec, z_nodes=z_nodes, z_weights=z_weights,
                        detunings=detunings, weights=weights, raw_weight_sum=raw_sum,
                        spacing=spacing, abar_L=_depth_from_density(c))


@dataclass(frozen=True, eq=False)
class EnsembleState:
    """Per-cell atomic amplitudes.

    Arrays have shape ``(n_z, 1)`` when they do not depend on detuning and
    ``(n_z, n_freq)`` otherwise; they broadcast over the grid cells.

    ``kind`` is ``"write"`` (pure state after the write pulse), ``"heralded"``
    (single spin wave left by a Stokes detection) or ``"noise"`` (mixed state
    with ``excited_population`` after the read pulse).
    """

    kind: str
    theta0_sq: float
    abar_L: float
    amplitude_g: np.ndarray
    amplitude_e: np.ndarray
    excitation_profile: np.ndarray  # Beer-law shape of the write excitation
    coherence: np.ndarray | None = None
    excited_population: np.ndarray | None = None
    detection_time: float | None = None

    @property
    def norm(self) -> np.ndarray:
        return np.abs(self.amplitude_g) ** 2 + np.abs(self.amplitude_e) ** 2


def _write_amplitudes(u, theta0_sq, abar_L):
    decay = np.exp(-abar_L * u)
    g = 1.0 - 0.5 * theta0_sq * decay
    e = math.sqrt(theta0_sq) * np.sqrt(decay)
    n = np.sqrt(g ** 2 + e ** 2)
    return g / n, e / n


def _excited_population(u, theta0_sq, abar_L):
    return np.abs(_write_amplitudes(u, theta0_sq, abar_L)[1]) ** 2


def _segment_integral(f, lo, hi):
    """Gauss-Legendre integral of ``f`` over [lo, hi], vectorized over bounds."""
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return (half * f(mid + half * _GL_X) * _GL_W).sum(axis=-1)


def write_step(g: EnsembleGrid, p: ProtocolParams) -> EnsembleState:
    """Ensemble right after a resonant write pulse of area theta0.

    The pulse is attenuated by Beer's law, so the excited amplitude in slice
    z is theta0 exp(-abar z / 2) before normalization. The write wave vector is
    absorbed into the phase-matching convention and carries no phase here.
    """
    u = g.z_nodes[:, None]
    amp_g, amp_e = _write_amplitudes(u, p.theta0_sq, g.abar_L)
    profile = np.exp(-0.5 * g.abar_L * u)
    return EnsembleState(kind="write", theta0_sq=p.theta0_sq, abar_L=g.abar_L,
                         amplitude_g=amp_g.astype(complex),
                         amplitude_e=amp_e.astype(complex),
                         excitation_profile=profile,
                         coherence=(np.conj(amp_g) * amp_e).astype(complex))


def excited_fraction(s: EnsembleState, g: EnsembleGrid) -> float:
    """Fraction of atoms in e, averaged over the grid."""
    pop = np.abs(s.amplitude_e) ** 2 * np.ones((1, g.n_freq))
    return float(g.z_weights @ pop @ g.weights)


@dataclass(frozen=True, eq=False)
class FieldTrace:
    """Time-resolved photon flux at the output face.

    ``mode_count`` is the conventional number of photons per temporal mode:
    flux at the peak (or at a given time) times the mode duration. The literal
    integral of the flux over a rectangular window of that duration is
    ``mode_integrated_counts``; for a flat flux both agree.
    """

    times: np.ndarray
    flux: np.ndarray
    direction: str
    mode_duration: float
    time_step: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.flux))

    @property
    def peak_time(self) -> float:
        return float(self.times[self.peak_index])

    @property
    def peak_flux(self) -> float:
        return float(self.flux[self.peak_index])

    def mode_count(self, time: float | None = None) -> float:
        if time is None:
            return self.peak_flux * self.mode_duration
        return float(np.interp(time, self.times, self.flux)) * self.mode_duration

    def window_integral(self, centre: float | None = None) -> float:
        centre = self.peak_time if centre is None else centre
        lo = max(centre - 0.5 * self.mode_duration, self.times[0])
        hi = min(centre + 0.5 * self.mode_duration, self.times[-1])
        if hi <= lo:
            return 0.0
        inside = (self.times > lo) & (self.times < hi)
        t = np.concatenate([[lo], self.times[inside], [hi]])
        f = np.interp(t, self.times, self.flux)
        return float(np.trapezoid(f, t))

    @property
    def mode_integrated_counts(self) -> float:
        return self.window_integral()

    def peak_in(self, lo: float, hi: float) -> int:
        """Index of the largest flux with ``lo <= t <= hi``."""
        idx = np.flatnonzero((self.times >= lo) & (self.times <= hi))
        if idx.size == 0:
            raise ValueError(f"no samples in [{lo:.6g}, {hi:.6g}] s")
        return int(idx[np.argmax(self.flux[idx])])

    def echo(self) -> tuple[float, float]:
        """Time and photons per mode of the first rephased echo.

        Searches ``tau + [T/2, 3T/2]`` with T = 2 pi/delta0, which excludes
        the prompt emission present when the read follows a detection at
        t_d = 0. Needs ``tau`` and ``echo_time`` in ``meta``.
        """
        tau, period = self.meta["tau"], self.meta["echo_time"]
        i = self.peak_in(tau + 0.5 * period, tau + 1.5 * period)
        return float(self.times[i]), float(self.flux[i]) * self.mode_duration

    @property
    def total_counts(self) -> float:
        return float(np.trapezoid(self.flux, self.times)) if self.times.size > 1 else 0.0

    def to_csv(self, fh=None) -> str:
        """Write columns t_seconds, flux, direction; returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t_seconds", "flux", "direction"])
        for t, f in zip(self.times, self.flux):
            writer.writerow([repr(float(t)), repr(float(f)), self.direction])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def to_dict(self) -> dict:
        return {"direction": self.direction,
                "mode_duration": self.mode_duration,
                "time_step": self.time_step,
                "t_seconds": [float(t) for t in self.times],
                "flux": [float(f) for f in self.flux],
                "peak_time": self.peak_time,
                "mode_count": self.mode_count(),
                "mode_integrated_counts": self.mode_integrated_counts}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _flux_from_count(g: EnsembleGrid, count):
    return np.asarray(count, dtype=float) / g.mode_duration


def stokes_flux(s: EnsembleState, g: EnsembleGrid, t) -> FieldTrace:
    """Forward Stokes flux at z = L after the write pulse.

    Each cell emits independently (only same-atom terms survive the
    expectation value), and its amplitude is amplified on the way out by
    exp((abar/2) * integral of the e-s inversion from z to L).
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    u = g.z_nodes
    inversion = lambda x: _excited_population(x, s.theta0_sq, s.abar_L)  # noqa: E731
    gain = np.exp(0.5 * s.abar_L * _segment_integral(inversion, u, np.ones_like(u)))
    cell = np.abs(gain[:, None] * s.amplitude_e) ** 2  # (n_z, 1)
    # |exp(-i delta t)|^2 = 1: the incoherent sum has no time dependence
    spatial = float(g.z_weights @ cell[:, 0]) * float(g.weights.sum())
    count = np.full(times.shape, s.abar_L * spatial)
    return FieldTrace(times=times, flux=_flux_from_count(g, count),
                      direction="forward_stokes", mode_duration=g.mode_duration,
                      meta={"mode_count": float(count.mean())})


def herald(s: EnsembleState, g: EnsembleGrid, p: ProtocolParams,
           phase_mismatch: float = 0.0, detection_time: float | None = None) -> EnsembleState:
    """Spin wave left in s by a Stokes detection at ``detection_time``.

    ``phase_mismatch`` is the residual wave-vector sum times L (radians); each
    slice picks up exp(i * phase_mismatch * z/L).
    """
    t_d = p.t_d if detection_time is None else detection_time
    u = g.z_nodes[:, None]
    coh = (s.excitation_profile
           * np.exp(-1j * g.detunings[None, :] * t_d)
           * np.exp(1j * phase_mismatch * u))
    return replace(s, kind="heralded", coherence=coh, detection_time=t_d)


def _propagation(g: EnsembleGrid, direction: str) -> np.ndarray:
    # field amplitude transfer from each slice to the exit face through ground
    # state atoms (inversion -1): exp(-(abar/2) * path length)
    u = g.z_nodes
    absorb = lambda x: np.ones_like(x)  # noqa: E731  (-sigma_z,g)
    if direction == "backward":
        path = _segment_integral(absorb, np.zeros_like(u), u)
    elif direction == "forward":
        path = _segment_integral(absorb, u, np.ones_like(u))
    else:
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return np.exp(-0.5 * g.abar_L * path)


def _spectral_sum(g: EnsembleGrid, amp: np.ndarray, elapsed: np.ndarray) -> np.ndarray:
    """sum_k w_k amp_k exp(-i delta_k t) for every t in ``elapsed``."""
    x = g.weights * amp
    n = elapsed.size
    steps = np.diff(elapsed)
    uniform = n > 64 and g.spacing is not None and np.allclose(steps, steps[0], rtol=1e-9)
    if uniform:
        # chirp-z: detunings d_min + k h, times t0 + m dt
        h, dt, t0 = g.spacing, steps[0], elapsed[0]
        k = np.arange(g.n_freq)
        y = x * np.exp(-1j * k * h * t0)
        out = signal.czt(y, m=n, w=np.exp(-1j * h * dt), a=1.0)
        return np.exp(-1j * g.detunings[0] * elapsed) * out
    out = np.empty(n, dtype=complex)
    chunk = max(1, 2_000_000 // max(g.n_freq, 1))
    for i in range(0, n, chunk):
        out[i:i + chunk] = np.exp(-1j * np.outer(elapsed[i:i + chunk], g.detunings)) @ x
    return out


def _spin_wave_count(s: EnsembleState, g: EnsembleGrid, direction: str,
                     elapsed: np.ndarray, coherent: bool) -> np.ndarray:
    """Anti-Stokes photons per mode from one heralded spin wave.

    ``elapsed`` is time since the read pulse. The spin wave is normalized to a
    single excitation numerically.
    """
    coh = s.coherence
    prop = _propagation(g, direction)[:, None]
    cell_w = g.z_weights[:, None] * g.weights[None, :]
    norm = float((cell_w * np.abs(coh) ** 2).sum())
    if coherent:
        v = (g.z_weights[:, None] * prop * coh).sum(axis=0)
        amp = _spectral_sum(g, v, elapsed)
        return s.abar_L * np.abs(amp) ** 2 / norm
    # every cell radiates on its own: add intensities instead of amplitudes
    inc = float((np.abs(cell_w * prop * coh) ** 2).sum())
    return np.full(elapsed.shape, s.abar_L * inc / norm)


def _readout(s, g, p, direction, coherent, phase_mismatch, periods=2.0):
    p.check_timing(g.comb)
    if s.kind == "write":
        s = herald(s, g, p, phase_mismatch)
    elif s.kind != "heralded":
        raise ValueError(f"cannot read out a {s.kind!r} state")
    since_write = g.elapsed_times(periods)  # t - tau
    after = since_write >= s.detection_time
    count = np.zeros_like(since_write)
    count[after] = _spin_wave_count(s, g, direction, since_write[after] - s.detection_time,
                                    coherent)
    return FieldTrace(times=p.tau + since_write, flux=_flux_from_count(g, count),
                      direction=f"{direction}_anti_stokes",
                      mode_duration=g.mode_duration, time_step=g.time_step,
                      meta={"tau": p.tau, "t_d": s.detection_time,
                            "echo_time": g.comb.echo_time})


def heralded_readout(s: EnsembleState, g: EnsembleGrid, p: ProtocolParams, *,
                     coherent: bool = True, phase_mismatch: float = 0.0) -> FieldTrace:
    """Backward anti-Stokes flux after the read pulse at t_d + tau.

    Times in the returned trace are absolute (write pulse at 0) and span
    t - tau in [0, 2 * 2 pi/delta0]; flux before the read pulse is zero.
    ``coherent=False`` adds cell intensities instead of amplitudes.

    Raises
    ------
    ProtocolError
        If t_d >= 2 pi / delta0.
    """
    return _readout(s, g, p, "backward", coherent, phase_mismatch)


def forward_readout(s: EnsembleState, g: EnsembleGrid, p: ProtocolParams, *,
                    coherent: bool = True, phase_mismatch: float = 0.0) -> FieldTrace:
    """As :func:`heralded_readout` for emission in the forward direction."""
    return _readout(s, g, p, "forward", coherent, phase_mismatch)


def noise_state(g: EnsembleGrid, p: ProtocolParams) -> EnsembleState:
    """Mixed state after the read pulse when every write excitation went to s."""
    u = g.z_nodes[:, None]
    amp_g, amp_e = _write_amplitudes(u, p.theta0_sq, g.abar_L)
    pop = p.branching_ratio * p.theta0_sq * np.exp(-g.abar_L * u)
    return EnsembleState(kind="noise", theta0_sq=p.theta0_sq, abar_L=g.abar_L,
                         amplitude_g=amp_g.astype(complex), amplitude_e=amp_e.astype(complex),
                         excitation_profile=np.exp(-0.5 * g.abar_L * u),
                         excited_population=pop)


def noise_flux(g: EnsembleGrid, p: ProtocolParams, times=None) -> FieldTrace:
    """Backward spontaneous noise from the excited atoms left by the write.

    The emitters are uncorrelated, so intensities add. ``times`` are absolute;
    by default the readout window is used.
    """
    s = noise_state(g, p)
    since_write = g.elapsed_times() if times is None else np.atleast_1d(times) - p.tau
    prop = _propagation(g, "backward")[:, None]
    cell = s.excited_population * np.abs(prop) ** 2  # (n_z, 1)
    spatial = float(g.z_weights @ cell[:, 0]) * float(g.weights.sum())
    count = np.full(since_write.shape, s.abar_L * spatial)
    return FieldTrace(times=p.tau + since_write, flux=_flux_from_count(g, count),
                      direction="backward_noise", mode_duration=g.mode_duration,
                      time_step=g.time_step)


@dataclass(frozen=True, eq=False)
class RephasingResult:
    revival_times: list
    predicted_times: list
    trace: FieldTrace
    time_step: float

    @property
    def max_deviation(self) -> float:
        if len(self.revival_times) != len(self.predicted_times):
            return math.inf
        return max(abs(a - b) for a, b in zip(self.revival_times, self.predicted_times))

    @property
    def matches(self) -> bool:
        return self.max_deviation <= self.time_step


def multimode_rephasing(detection_times, tau: float, g: EnsembleGrid,
                        p: ProtocolParams) -> RephasingResult:
    """Read several independent spin waves with one read pulse.

    The read pulse comes ``tau`` after the first detection. Spin waves are
    independent excitations, so their fluxes add. Peaks are located in the
    first-revival window and returned in ascending time order.
    """
    t_det = sorted(float(t) for t in detection_times)
    if not t_det:
        raise ValueError("need at least one detection time")
    period = g.comb.echo_time
    for t in t_det:
        if not 0.0 <= t < period:
            raise ProtocolError(f"detection at {t:.6g} s is not before the revival "
                                f"2*pi/delta0 = {period:.6g} s")
    spread = np.diff(t_det)
    if np.any(spread < 2.0 / g.comb.big_gamma_rad):
        warnings.warn("revivals closer than two mode durations overlap",
                      OverlapWarning, stacklevel=2)
    t_first = t_det[0]
    read_time = t_first + tau
    since_write = g.elapsed_times()
    after = since_write >= t_first
    elapsed = since_write[after] - t_first
    s = write_step(g, p)
    count = np.zeros_like(since_write)
    for t in t_det:
        wave = herald(s, g, p, detection_time=t)
        count[after] += _spin_wave_count(wave, g, "backward", elapsed, coherent=True)
    trace = FieldTrace(times=tau + since_write, flux=_flux_from_count(g, count),
                       direction="backward_anti_stokes", mode_duration=g.mode_duration,
                       time_step=g.time_step, meta={"read_time": read_time})

    # first revivals end at tau + T, second ones start at tau + 2T - (t_last - t_first)
    cutoff = tau + period + 0.5 * (period - (t_det[-1] - t_first))
    window = (trace.times > read_time) & (trace.times < cutoff)
    idx = np.flatnonzero(window)
    peaks, _ = signal.find_peaks(trace.flux[idx], height=0.02 * trace.flux[idx].max())
    found = sorted(float(trace.times[idx[k]]) for k in peaks)

    predicted = sorted(tau + period - (t - t_first) for t in t_det)
    merged = []
    for t in predicted:
        if not merged or t - merged[-1] > 0.5 * g.time_step:
            merged.append(t)
    return RephasingResult(revival_times=found, predicted_times=merged, trace=trace,
                           time_step=g.time_step)
