"""Finite-slit detection scans, histograms, fidelity and fringe analysis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import (
    CoincidenceIntensityGrid,
    _arm_image,
    arm_to_detector,
    detector_axis,
)
from .errors import DimensionMismatch, DomainError, GridMismatch, ValidationError, WindowError, WindowTooNarrow
from .optics import ApertureSpec, ChannelGeometry
from .source import (
    BiphotonAmplitude,
    MixedSlitState,
    QuditState,
    default_q_axes,
    ideal_qudit_state,
    slit_basis,
    _axis,
)

COINCIDENCE = "coincidence"
SINGLES = "singles"
OVERLAP = "overlap"
OVERLAP_SQUARED = "overlap_squared"
DETECTOR_SLIT_WIDTH = 0.1e-3


@dataclass
class DetectorSpec:
    """Detector behind a slit of ``slit_width``; ``positions`` is a scan
    array or a single fixed position."""

    slit_width: float
    positions: np.ndarray

    def __post_init__(self):
        if not self.slit_width > 0:
            raise ValidationError("slit_width must be positive")
        self.positions = np.atleast_1d(np.asarray(self.positions, dtype=float))
        if self.positions.size > 1 and np.any(np.diff(self.positions) <= 0):
            raise ValidationError("scan positions must be strictly increasing")

    @classmethod
    def fixed(cls, position: float, slit_width: float = DETECTOR_SLIT_WIDTH) -> "DetectorSpec":
        return cls(slit_width, [position])

    @classmethod
    def scan(cls, start: float, stop: float, step: float, slit_width: float = DETECTOR_SLIT_WIDTH) -> "DetectorSpec":
        n = int(round((stop - start) / step)) + 1
        return cls(slit_width, start + step * np.arange(n))

    @property
    def position(self) -> float:
        return float(self.positions[0])


@dataclass
class ScanResult:
    positions: np.ndarray
    rate: np.ndarray
    kind: str = COINCIDENCE
    fixed_arm_position: Optional[float] = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.rate = np.asarray(self.rate, dtype=float)
        if self.positions.shape != self.rate.shape:
            raise ValidationError("positions and rate must have equal length")
        if np.any(self.rate < 0):
            raise ValidationError("rates must be non-negative")

    @property
    def step(self) -> float:
        return float(self.positions[1] - self.positions[0])


def window_weights(x: np.ndarray, centers, width: float) -> np.ndarray:
    """Overlap of each sample cell with ``[c - width/2, c + width/2]``.

    Rows follow ``centers``. Multiplying by a density sampled on ``x``
    integrates it over the detector slit.
    """
    step = x[1] - x[0]
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    lo_edge, hi_edge = x[0] - step / 2, x[-1] + step / 2
    tol = 1e-9 * step
    if np.any(centers - width / 2 < lo_edge - tol) or np.any(centers + width / 2 > hi_edge + tol):
        raise WindowError(
            f"detector window of width {width:.3g} m leaves the grid [{lo_edge:.4g}, {hi_edge:.4g}] m"
        )
    lo = np.maximum(x[None, :] - step / 2, centers[:, None] - width / 2)
    hi = np.minimum(x[None, :] + step / 2, centers[:, None] + width / 2)
    return np.clip(hi - lo, 0, None)


def _intensity(amp):
    return np.asarray(amp.intensity)


def coincidence_scan(amp, fixed: DetectorSpec, scan: DetectorSpec, scan_arm: int = 2) -> ScanResult:
    """Coincidence rate with one detector fixed and the other scanning.

    ``amp`` is a :class:`~qudit_sim.channel.CoincidenceAmplitudeGrid` or a
    :class:`~qudit_sim.channel.CoincidenceIntensityGrid`.
    """
    if scan_arm not in (1, 2):
        raise ValueError("scan_arm must be 1 or 2")
    inten = _intensity(amp)
    s_ax, f_ax = (1, 0) if scan_arm == 2 else (0, 1)
    wf = window_weights(amp.axis(f_ax), [fixed.position], fixed.slit_width)[0]
    ws = window_weights(amp.axis(s_ax), scan.positions, scan.slit_width)
    cond = (wf @ inten) if f_ax == 0 else (inten @ wf)
    return ScanResult(scan.positions.copy(), ws @ cond, COINCIDENCE, fixed.position)


def singles_scan(amp, scan: DetectorSpec, arm: int) -> ScanResult:
    """Single-detector rate: marginal over the other arm's whole window."""
    if arm not in (1, 2):
        raise ValueError("arm must be 1 or 2")
    inten = _intensity(amp)
    other = 1 if arm == 1 else 0
    marginal = inten.sum(axis=other) * amp.x_step[other]
    ws = window_weights(amp.axis(arm - 1), scan.positions, scan.slit_width)
    return ScanResult(scan.positions.copy(), ws @ marginal, SINGLES)


def probability_histogram(state: QuditState) -> np.ndarray:
    p = np.abs(state.amplitudes) ** 2
    return p / p.sum()


def fidelity(a: QuditState, b: QuditState, convention: str = OVERLAP, renormalize: bool = True) -> float:
    """``|<a|b>|`` (``overlap``) or its square (``overlap_squared``).

    With ``renormalize`` both states are scaled to unit norm first.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    ca, cb = a.amplitudes, b.amplitudes
    if renormalize:
        ca = ca / np.linalg.norm(ca)
        cb = cb / np.linalg.norm(cb)
    ov = float(abs(np.vdot(ca, cb)))
    if convention == OVERLAP:
        return ov
    if convention == OVERLAP_SQUARED:
        return ov * ov
    raise ValueError(f"unknown convention {convention!r}")


def measured_ququart_state(geom: Optional[ChannelGeometry] = None, spacing: float = 0.17e-3) -> QuditState:
    """Experimentally reconstructed ququart amplitudes, not renormalized.

    The ``|l| = 3/2`` pair carries the relative phase ``exp(i k d^2 / z_A)``.
    """
    if geom is None:
        geom = ChannelGeometry.two_f(826e-9, 0.2, 0.15)
    ph = np.exp(1j * geom.k * spacing ** 2 / geom.z_A)
    c = np.zeros((4, 4), dtype=complex)
    # rows: l1 = -3/2 .. 3/2, columns: l2
    c[1, 2] = 0.49   # |-1/2, +1/2>
    c[2, 1] = 0.50   # |+1/2, -1/2>
    c[0, 3] = 0.47 * ph   # |-3/2, +3/2>
    c[3, 0] = 0.49 * ph   # |+3/2, -3/2>
    return QuditState(c)


NAMED_STATES = {"measured_ququart": measured_ququart_state}


def named_state(name: str, **kwargs) -> QuditState:
    try:
        return NAMED_STATES[name](**kwargs)
    except KeyError:
        raise KeyError(f"unknown named state {name!r}; known: {sorted(NAMED_STATES)}") from None


# ---------------------------------------------------------------------------
# Fringe analysis
# ---------------------------------------------------------------------------


def fringe_period(scan: ScanResult, oversample: int = 16) -> float:
    """Period of the dominant fringe frequency.

    The low-frequency lobe produced by the envelope is skipped: the search
    starts at the first local minimum of the spectrum after DC.
    """
    r = scan.rate - scan.rate.mean()
    n = r.size
    m = oversample * n
    spec = np.abs(np.fft.rfft(r * np.hanning(n), m))
    nu = np.fft.rfftfreq(m, scan.step)
    i = 1
    while i < spec.size - 1 and spec[i + 1] <= spec[i]:
        i += 1
    if i >= spec.size - 2:
        raise WindowTooNarrow("no fringe frequency found beyond the envelope lobe")
    j = i + int(np.argmax(spec[i:]))
    if 0 < j < spec.size - 1:
        y0, y1, y2 = spec[j - 1], spec[j], spec[j + 1]
        den = y0 - 2 * y1 + y2
        j = j + (0.5 * (y0 - y2) / den if den != 0 else 0.0)
    return float(1 / (j * (nu[1] - nu[0])))


def visibility(scan: ScanResult, window=None, period: Optional[float] = None) -> float:
    """Fringe visibility ``(max - min) / (max + min)`` inside a window.

    By default the window spans +-1.5 fringe periods around the global
    maximum, with the period estimated by :func:`fringe_period`.
    """
    x, r = scan.positions, scan.rate
    if window is None:
        if period is None:
            period = fringe_period(scan)
        c = x[int(np.argmax(r))]
        window = (c - 1.5 * period, c + 1.5 * period)
    lo, hi = window
    sel = (x >= lo) & (x <= hi)
    if period is not None and (min(hi, x[-1]) - max(lo, x[0])) < period:
        raise WindowTooNarrow("visibility window holds less than one fringe period")
    if sel.sum() < 3:
        raise WindowTooNarrow("visibility window holds fewer than 3 samples")
    rmax, rmin = r[sel].max(), r[sel].min()
    if rmax + rmin == 0:
        return 0.0
    return float((rmax - rmin) / (rmax + rmin))


def fringe_contrast(scan: ScanResult, period: float) -> float:
    """Hann-weighted Fourier amplitude at ``1/period`` relative to DC.

    Twice the ratio is reported so that ``1 + v cos(2 pi x / period)``
    gives ``v``. A smooth envelope with no component at that frequency
    gives ~0; multi-slit fringes can exceed 1.
    """
    w = np.hanning(scan.rate.size)
    dc = np.sum(scan.rate * w)
    if dc == 0:
        return 0.0
    comp = np.sum(scan.rate * w * np.exp(-2j * np.pi * scan.positions / period))
    return float(2 * abs(comp) / dc)


def conditional_shift(scan_a: ScanResult, scan_b: ScanResult) -> float:
    """Displacement of ``scan_b`` relative to ``scan_a`` (cross-correlation peak).

    The raw rates are correlated; the peak is refined by a parabola through
    the three highest correlation samples.
    """
    if scan_a.positions.shape != scan_b.positions.shape or not np.allclose(
        scan_a.positions, scan_b.positions, rtol=0, atol=1e-9 * abs(scan_a.step)
    ):
        raise GridMismatch("scans must share the same positions")
    a, b = scan_a.rate, scan_b.rate
    corr = np.correlate(b, a, mode="full")
    m = int(np.argmax(corr))
    frac = 0.0
    if 0 < m < corr.size - 1:
        y0, y1, y2 = corr[m - 1], corr[m], corr[m + 1]
        den = y0 - 2 * y1 + y2
        if den != 0:
            frac = 0.5 * (y0 - y2) / den
    return float((m - (a.size - 1) + frac) * scan_a.step)


# ---------------------------------------------------------------------------
# Classical control
# ---------------------------------------------------------------------------


def single_photon_modes(slits: ApertureSpec, geom: ChannelGeometry, arm: int, dz: float, q_axis=None, det_x=None):
    """Detector-plane amplitudes of each aperture slit mode sent through one arm.

    Returns ``(x, modes)`` with ``modes[i]`` belonging to label
    ``slits.labels[i]``.
    """
    if q_axis is None:
        q_axis = default_q_axes(slits)
    q = _axis(q_axis)
    phi = slit_basis(slits, q)
    img = _arm_image(phi, q_axis[1], geom.focal[arm - 1], geom.k, axis=1)
    return arm_to_detector(img, q_axis[1], dz, geom.k, det_x)


def classical_intensity_grid(
    rho: MixedSlitState,
    slits: ApertureSpec,
    geom: ChannelGeometry,
    dz1: float,
    dz2: float,
    q_axes=None,
    det_x1=None,
    det_x2=None,
) -> CoincidenceIntensityGrid:
    """Joint detection density of a slit-diagonal mixture.

    ``sum p[l, l'] |psi_l(x1)|^2 |psi_l'(x2)|^2`` with each mode carried
    through the same channel and defocus as the entangled amplitude.
    """
    if rho.dim != slits.slit_count:
        raise DimensionMismatch("mixture dimension does not match the slit count")
    if q_axes is None:
        q_axes = (default_q_axes(slits),) * 2
    x1, m1 = single_photon_modes(slits, geom, 1, dz1, q_axes[0], det_x1)
    x2, m2 = single_photon_modes(slits, geom, 2, dz2, q_axes[1], det_x2)
    inten = np.abs(m1.T) ** 2 @ rho.weights @ np.abs(m2) ** 2
    inten = inten / (inten.sum() * (x1[1] - x1[0]) * (x2[1] - x2[0]))
    return CoincidenceIntensityGrid(inten, (x1[0], x2[0]), (x1[1] - x1[0], x2[1] - x2[0]), (dz1, dz2))


def classical_prediction(
    rho: MixedSlitState,
    slits: ApertureSpec,
    geom: ChannelGeometry,
    dz1: float,
    dz2: float,
    fixed: DetectorSpec,
    scan: DetectorSpec,
    scan_arm: int = 2,
    q_axes=None,
) -> ScanResult:
    """Coincidence scan predicted by the slit-diagonal mixture ``rho``."""
    grid = classical_intensity_grid(rho, slits, geom, dz1, dz2, q_axes)
    return coincidence_scan(grid, fixed, scan, scan_arm)


def slit_image_centers(slits: ApertureSpec) -> np.ndarray:
    """Image-plane position of each aperture slit (magnification -1)."""
    return -slits.centers


def histogram_from_scan_masses(amp, slits: ApertureSpec) -> np.ndarray:
    """Basis-state probabilities from the coincidence mass in slit-image boxes.

    Rows and columns follow the image-plane position labels, like
    :func:`qudit_sim.channel.image_state`.
    """
    masses = []
    for i in (0, 1):
        masses.append(window_weights(amp.axis(i), slits.centers, slits.spacing))
    m = masses[0] @ _intensity(amp) @ masses[1].T
    return m / m.sum()


def ideal_histogram(geom: ChannelGeometry, slits: ApertureSpec) -> np.ndarray:
    return probability_histogram(ideal_qudit_state(geom, slits))
