"""End-to-end runs: source, channel, detection, driven by an ExperimentConfig.

Each ``run_*`` function returns plain data (dicts of scalars and arrays,
plus :class:`~qudit_sim.detection.ScanResult` objects); writing files is
left to the command-line layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    channel_transform,
    channel_transform_direct,
    detector_axis,
    image_state,
    propagate_to_detectors,
)
from .config import MM, UM, ExperimentConfig
from .detection import (
    OVERLAP,
    OVERLAP_SQUARED,
    DetectorSpec,
    ScanResult,
    classical_intensity_grid,
    coincidence_scan,
    conditional_shift,
    fidelity,
    fringe_contrast,
    fringe_period,
    probability_histogram,
    singles_scan,
    slit_image_centers,
    visibility,
)
from .optics import ApertureSpec, PumpProfile, dual_step
from .source import (
    analytic_biphoton,
    analytic_multislit_F,
    analytic_multislit_terms,
    classical_correlated_state,
    default_q_axes,
    ideal_qudit_state,
    mirror_state,
    numeric_biphoton_F,
    project_to_slit_basis,
)


def q_axes_for(cfg: ExperimentConfig) -> tuple:
    """Centered q axes ``(start, step, n)`` (same for both arms)."""
    slits = cfg.aperture()
    n = cfg.grid.n
    half = cfg.grid.window_mm * MM
    if half == 0:
        half = 4 * max(slits.slit_count * slits.spacing / 2, 2 * slits.half_width)
    dq = dual_step(n, 2 * half / n)
    return ((-(n // 2) * dq, dq, n),) * 2


def source_amplitude(cfg: ExperimentConfig):
    geom, slits = cfg.geometry(), cfg.aperture()
    axes = q_axes_for(cfg)
    if cfg.source.model == "numeric":
        return numeric_biphoton_F(slits, slits, cfg.pump_profile(), geom, axes, rtol=cfg.source.rtol)
    return analytic_biphoton(geom, slits, axes)


@dataclass
class Pipeline:
    """Aperture amplitude and its image, computed once per config."""

    cfg: ExperimentConfig

    def __post_init__(self):
        self.geom = self.cfg.geometry()
        self.slits = self.cfg.aperture()
        self.F = source_amplitude(self.cfg)
        self.I = channel_transform(self.F, self.geom)

    def detector_x(self):
        d = self.cfg.detector
        return detector_axis(d.half_window_mm * MM, d.step_um * UM)

    def detectors(self, dz1, dz2):
        x = self.detector_x()
        return propagate_to_detectors(self.I, dz1, dz2, self.geom, det_x1=x, det_x2=x)

    def classical_grid(self, dz1, dz2):
        x = self.detector_x()
        rho = classical_correlated_state(self.slits.slit_count)
        return classical_intensity_grid(rho, self.slits, self.geom, dz1, dz2, q_axes_for(self.cfg), x, x)


def _anti_diagonal(m: np.ndarray) -> np.ndarray:
    return np.fliplr(m).diagonal().copy()


def _off_anti_diagonal_max(m: np.ndarray) -> float:
    mask = np.fliplr(np.eye(m.shape[0], dtype=bool))
    off = m[~mask]
    return float(off.max()) if off.size else 0.0


def run_state(cfg: ExperimentConfig, pipe: Pipeline = None) -> dict:
    """Aperture and image slit-basis states with their fidelities."""
    pipe = pipe or Pipeline(cfg)
    ideal = ideal_qudit_state(pipe.geom, pipe.slits)
    mirrored = mirror_state(ideal, "both")
    ap = project_to_slit_basis(pipe.F, pipe.slits)
    im = image_state(pipe.I, pipe.slits)
    hist = probability_histogram(im)
    return {
        "labels": ideal.labels.tolist(),
        "aperture_state": ap.amplitudes,
        "aperture_leakage": ap.leakage,
        "image_state": im.amplitudes,
        "image_leakage": im.leakage,
        "ideal_state": ideal.amplitudes,
        "histogram": hist,
        "anti_diagonal_probabilities": _anti_diagonal(hist),
        "max_off_anti_diagonal": _off_anti_diagonal_max(hist),
        "aperture_fidelity_overlap": fidelity(ap, ideal, OVERLAP),
        "aperture_fidelity_overlap_squared": fidelity(ap, ideal, OVERLAP_SQUARED),
        "mirror_fidelity_overlap": fidelity(im, mirrored, OVERLAP),
        "mirror_fidelity_overlap_squared": fidelity(im, mirrored, OVERLAP_SQUARED),
    }


def _scan_spec(start_mm, stop_mm, step_mm, width_mm) -> DetectorSpec:
    return DetectorSpec.scan(start_mm * MM, stop_mm * MM, step_mm * MM, width_mm * MM)


def run_scan_image(cfg: ExperimentConfig, pipe: Pipeline = None) -> dict:
    """Image-plane protocol: arm-1 detector behind each slit image, arm 2 scanning."""
    pipe = pipe or Pipeline(cfg)
    amp = pipe.detectors(0.0, 0.0)
    s = cfg.scan_image
    scan = _scan_spec(s.start_mm, s.stop_mm, s.step_mm, cfg.detector.width2_mm)
    centers = slit_image_centers(pipe.slits)
    scans, peaks = {}, {}
    for label, c in zip(pipe.slits.labels, centers):
        fixed = DetectorSpec.fixed(c, cfg.detector.width1_mm * MM)
        r = coincidence_scan(amp, fixed, scan, scan_arm=2)
        scans[float(label)] = r
        peaks[float(label)] = float(r.positions[np.argmax(r.rate)])
    singles = {
        arm: singles_scan(amp, _scan_spec(s.start_mm, s.stop_mm, s.step_mm, getattr(cfg.detector, f"width{arm}_mm")), arm)
        for arm in (1, 2)
    }
    return {"coincidences": scans, "singles": singles, "peak_positions": peaks, "fixed_positions": centers}


def run_scan_fringes(cfg: ExperimentConfig, pipe: Pipeline = None) -> dict:
    """Defocused protocol: arm-2 detector fixed, arm 1 scanning, entangled and classical."""
    pipe = pipe or Pipeline(cfg)
    fr = cfg.fringes
    dz1, dz2 = fr.dz1_mm * MM, fr.dz2_mm * MM
    amp = pipe.detectors(dz1, dz2)
    cls = pipe.classical_grid(dz1, dz2)
    scan = _scan_spec(fr.start_mm, fr.stop_mm, fr.step_mm, cfg.detector.width1_mm)
    expected = pipe.geom.wavelength * dz1 / pipe.slits.spacing if pipe.slits.slit_count > 1 else float("nan")
    out = {"entangled": {}, "classical": {}, "expected_period": expected, "captured": amp.captured}
    for x2 in fr.fixed_x2_mm:
        fixed = DetectorSpec.fixed(x2 * MM, cfg.detector.width2_mm * MM)
        for name, grid in (("entangled", amp), ("classical", cls)):
            r = coincidence_scan(grid, fixed, scan, scan_arm=1)
            out[name][x2] = {"scan": r, **fringe_metrics(r, expected)}
    for name in ("entangled", "classical"):
        keys = list(out[name])
        shifts = [conditional_shift(out[name][keys[0]]["scan"], out[name][k]["scan"]) for k in keys[1:]]
        out[f"{name}_shifts"] = shifts
    return out


def fringe_metrics(r: ScanResult, expected_period: float) -> dict:
    m = {"contrast_at_expected_period": fringe_contrast(r, expected_period) if np.isfinite(expected_period) else 0.0}
    try:
        p = fringe_period(r)
        m["period"] = p
        m["visibility"] = visibility(r, period=p)
    except Exception:  # no resolvable fringe: smooth envelope
        m["period"] = float("nan")
        m["visibility"] = float("nan")
    return m


# ---------------------------------------------------------------------------
# Oracle comparisons
# ---------------------------------------------------------------------------


def align_max_rel_dev(test: np.ndarray, ref: np.ndarray) -> float:
    """Max ``|test*s - ref| / max|ref|`` after aligning ``test`` to ``ref``
    by the complex ratio at the largest ``|ref|`` sample."""
    i = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    s = ref[i] / test[i]
    return float(np.abs(test * s - ref).max() / np.abs(ref).max())


def oracle_source(geom, slits: ApertureSpec, n: int = 64, pump: PumpProfile = None, rtol: float = 2e-3) -> float:
    """Numeric aperture integral vs the closed form on an ``n x n`` grid of +-10 pi / a."""
    pump = pump or PumpProfile.point_like()
    qmax = 10 * np.pi / slits.half_width
    step = 2 * qmax / (n - 1)
    axes = ((-qmax, step, n),) * 2
    num = numeric_biphoton_F(slits, slits, pump, geom, axes, rtol=rtol)
    q = -qmax + step * np.arange(n)
    ref = analytic_multislit_F(geom, slits, q[:, None], q[None, :])
    return align_max_rel_dev(num.grid, ref)


def oracle_channel(geom, slits: ApertureSpec, n_grid: int = 1024, n_out: int = 32, stride: int = 8) -> float:
    """Spectral channel vs direct kernel quadrature on an ``n_out x n_out`` subgrid."""
    F = analytic_biphoton(geom, slits, (default_q_axes(slits, n_grid),) * 2)
    I = channel_transform(F, geom)
    q = F.axis(0)
    c = n_grid // 2
    idx = c + stride * (np.arange(n_out) - n_out // 2)
    q_out = q[idx]
    q_limit = min(-q[0], q[-1])
    direct = channel_transform_direct(analytic_multislit_terms(geom, slits), geom, q_out, q_out, q_limit)
    spectral = I.grid[np.ix_(idx, idx)]
    return align_max_rel_dev(spectral, direct)


def run_oracle_check(cfg: ExperimentConfig) -> dict:
    geom, slits = cfg.geometry(), cfg.aperture()
    out = {"source_max_rel_dev": {}, "source_grid": cfg.oracle.n}
    for D in sorted({2, 3, 4, slits.slit_count}):
        s = ApertureSpec.multi_slit(D, slits.spacing, slits.half_width)
        out["source_max_rel_dev"][D] = oracle_source(geom, s, cfg.oracle.n, cfg.pump_profile(), cfg.source.rtol)
    out["channel_max_rel_dev"] = oracle_channel(geom, slits, n_out=cfg.oracle.direct_n)
    out["channel_grid"] = cfg.oracle.direct_n
    return out
