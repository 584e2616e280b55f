"""Two-photon amplitude behind the apertures and its slit-basis projection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError, GridTooNarrow, SamplingError, ValidationError
from .optics import (
    MULTI_SLIT,
    ApertureSpec,
    ChannelGeometry,
    PumpProfile,
    cell_averaged_transmission,
    centered_axis,
    dual_step,
    pump_profile_eval,
    sinc,
    slit_labels,
)

APERTURE = "aperture"
IMAGE = "image"
CUSTOM = "custom"

DEFAULT_GRID_N = 1024
MAX_LEAKAGE = 0.05


@dataclass
class BiphotonAmplitude:
    """Joint wavevector amplitude ``F(q1, q2)`` (or ``I`` at the image plane).

    ``grid[i, j]`` is the value at ``q1 = q_start[0] + i*q_step[0]`` and
    ``q2 = q_start[1] + j*q_step[1]``. ``normalization`` records the factor
    applied by :meth:`normalize`. Image-plane amplitudes also carry the
    wavenumber and focal lengths of the channel that produced them.
    """

    grid: np.ndarray
    q_start: tuple
    q_step: tuple
    plane_tag: str = APERTURE
    normalization: float = 1.0
    k: Optional[float] = None
    focal: Optional[tuple] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=complex)
        if self.grid.ndim != 2 or min(self.grid.shape) < 2:
            raise ValidationError("grid must be 2D with at least 2 samples per axis")
        if min(self.q_step) <= 0:
            raise ValidationError("q steps must be positive")
        self.q_start = tuple(float(s) for s in self.q_start)
        self.q_step = tuple(float(s) for s in self.q_step)

    @property
    def shape(self):
        return self.grid.shape

    def axis(self, i: int) -> np.ndarray:
        return self.q_start[i] + self.q_step[i] * np.arange(self.grid.shape[i])

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.grid) ** 2) * self.q_step[0] * self.q_step[1])

    def normalize(self) -> "BiphotonAmplitude":
        n2 = self.norm2()
        if n2 == 0:
            return replace(self, grid=self.grid.copy(), normalization=0.0)
        s = 1 / np.sqrt(n2)
        return replace(self, grid=self.grid * s, normalization=self.normalization * s)


def default_q_axes(slits: ApertureSpec, n: int = DEFAULT_GRID_N) -> tuple:
    """Centered wavevector axes ``(start, step, n)`` for one arm.

    The dual position window spans ``+-4 * max(D d / 2, 2 a)``.
    """
    if slits.kind == MULTI_SLIT:
        half = 4 * max(slits.slit_count * slits.spacing / 2, 2 * slits.half_width)
    else:
        lo, hi = slits.support()
        half = 4 * max(abs(lo), abs(hi))
    dq = dual_step(n, 2 * half / n)
    return (-(n // 2) * dq, dq, n)


def _axis(spec) -> np.ndarray:
    start, step, n = spec
    return start + step * np.arange(int(n))


@dataclass
class QuditState:
    """Pure two-qudit state in the slit basis.

    ``amplitudes[i, j]`` multiplies ``|l_i>_1 |l_j>_2`` with labels
    ``slit_labels(D)`` in ascending order. ``leakage`` is the weight the
    projection lost outside the D x D subspace.
    """

    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        a = self.amplitudes
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("amplitudes must be a square D x D matrix")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def labels(self) -> np.ndarray:
        return slit_labels(self.dim)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def normalized(self) -> "QuditState":
        return QuditState(self.amplitudes / self.norm(), self.leakage)

    def index(self, label: float) -> int:
        return int(round(label + (self.dim - 1) / 2))

    def amplitude(self, l1: float, l2: float) -> complex:
        return complex(self.amplitudes[self.index(l1), self.index(l2)])


@dataclass
class MixedSlitState:
    """Mixture diagonal in the product slit basis; ``weights[i, j]`` is the
    probability of ``|l_i><l_i| (x) |l_j><l_j|``."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValidationError("weights must be a square matrix")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-12):
            raise ValidationError("weights must be non-negative and sum to 1")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def labels(self) -> np.ndarray:
        return slit_labels(self.dim)


def _require_multi_slit(slits: ApertureSpec):
    if slits.kind != MULTI_SLIT:
        raise DomainError("operation requires a multi_slit aperture")


def _pair_phases(geom: ChannelGeometry, slits: ApertureSpec) -> np.ndarray:
    l = slits.labels
    return np.exp(1j * geom.k * slits.spacing ** 2 * l ** 2 / (2 * geom.z_A))


def analytic_multislit_F(geom: ChannelGeometry, slits: ApertureSpec, q1, q2):
    """Closed-form amplitude for identical multi-slits and a point-like pump.

    ``sum_l exp(i k d^2 l^2 / 2 z_A) exp(-i q1 l d) sinc(q1 a) exp(i q2 l d) sinc(q2 a)``.
    Broadcasts over ``q1`` and ``q2``.
    """
    _require_multi_slit(slits)
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    d, a = slits.spacing, slits.half_width
    total = 0j
    for l, ph in zip(slits.labels, _pair_phases(geom, slits)):
        total = total + ph * np.exp(-1j * q1 * l * d) * np.exp(1j * q2 * l * d)
    return total * sinc(q1 * a) * sinc(q2 * a)


def slit_basis(slits: ApertureSpec, q) -> np.ndarray:
    """Rows ``sqrt(a/pi) exp(-i q l d) sinc(q a)`` for each slit label."""
    _require_multi_slit(slits)
    q = np.asarray(q, dtype=float)
    a, d = slits.half_width, slits.spacing
    env = np.sqrt(a / np.pi) * sinc(q * a)
    return np.exp(-1j * np.outer(slits.labels * d, q)) * env


def analytic_multislit_terms(geom: ChannelGeometry, slits: ApertureSpec) -> list:
    """The analytic amplitude as separable terms ``(coef, u1, u2)``.

    ``u1`` and ``u2`` are callables of one wavevector array; summing
    ``coef * u1(q1) * u2(q2)`` reproduces :func:`analytic_multislit_F`.
    """
    _require_multi_slit(slits)
    d, a = slits.spacing, slits.half_width
    terms = []
    for l, ph in zip(slits.labels, _pair_phases(geom, slits)):
        terms.append((
            ph,
            lambda q, l=l: np.exp(-1j * q * l * d) * sinc(q * a),
            lambda q, l=l: np.exp(1j * q * l * d) * sinc(q * a),
        ))
    return terms


def analytic_biphoton(geom: ChannelGeometry, slits: ApertureSpec, q_axes=None) -> BiphotonAmplitude:
    """Normalized analytic amplitude sampled on ``q_axes`` (one spec per arm)."""
    if q_axes is None:
        q_axes = (default_q_axes(slits),) * 2
    q1, q2 = _axis(q_axes[0]), _axis(q_axes[1])
    grid = np.zeros((q1.size, q2.size), dtype=complex)
    for coef, u1, u2 in analytic_multislit_terms(geom, slits):
        grid += coef * np.outer(u1(q1), u2(q2))
    amp = BiphotonAmplitude(grid, (q_axes[0][0], q_axes[1][0]), (q_axes[0][1], q_axes[1][1]), APERTURE)
    return amp.normalize()


def _reference_spacing(*apertures) -> Optional[float]:
    """Slit spacing that sets the point-like pump surrogate (slit width for D = 1)."""
    vals = [a.spacing if a.spacing > 0 else 2 * a.half_width for a in apertures if a.kind == MULTI_SLIT]
    return min(vals) if vals else None


def _quadrature_axis(spec: ApertureSpec, step: float) -> np.ndarray:
    lo, hi = spec.support()
    # grid anchored at 0 so symmetric apertures are sampled symmetrically
    i0 = int(np.floor(lo / step)) - 1
    i1 = int(np.ceil(hi / step)) + 1
    return step * np.arange(i0, i1 + 1)


def _biphoton_quadrature(a1, a2, pump, geom, q1, q2, step, spacing):
    x1 = _quadrature_axis(a1, step)
    x2 = _quadrature_axis(a2, step)
    t1 = cell_averaged_transmission(a1, x1, step)
    t2 = cell_averaged_transmission(a2, x2, step)
    m1, m2 = t1 != 0, t2 != 0
    if not m1.any() or not m2.any():
        return np.zeros((q1.size, q2.size), dtype=complex)
    x1, t1, x2, t2 = x1[m1], t1[m1], x2[m2], t2[m2]
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    integrand = (
        np.exp(1j * geom.k * (X2 - X1) ** 2 / (8 * geom.z_A))
        * pump_profile_eval(pump, 0.5 * (X1 + X2), spacing)
        * np.outer(t1, t2)
    )
    e1 = np.exp(-1j * np.outer(q1, x1)) * step
    e2 = np.exp(-1j * np.outer(x2, q2)) * step
    return e1 @ integrand @ e2


def numeric_biphoton_F(
    a1: ApertureSpec,
    a2: ApertureSpec,
    pump: PumpProfile,
    geom: ChannelGeometry,
    q_axes=None,
    *,
    rtol: float = 2e-3,
    x_step: Optional[float] = None,
    max_refinements: int = 4,
) -> BiphotonAmplitude:
    """Amplitude behind two arbitrary apertures by direct quadrature.

    Integrates ``exp(i k (x2-x1)^2 / 8 z_A) exp(-i (q1 x1 + q2 x2))
    A1(x1) A2(x2) W((x1+x2)/2)`` with the composite rule on a uniform
    position grid, halving the step until two successive results differ by
    less than ``rtol`` (max deviation over max magnitude).

    Raises
    ------
    SamplingError
        If the chirp is unresolved at the starting step or the refinement
        does not converge.
    """
    spacing = _reference_spacing(a1, a2)
    w = pump.waist(spacing)
    if q_axes is None:
        ref = a1 if a1.kind == MULTI_SLIT else a2
        q_axes = (default_q_axes(ref),) * 2
    q1, q2 = _axis(q_axes[0]), _axis(q_axes[1])

    lo = min(a1.support()[0], a2.support()[0])
    hi = max(a1.support()[1], a2.support()[1])
    span = 2 * max(abs(lo), abs(hi))
    chirp_limit = 4 * np.pi * geom.z_A / (geom.k * span)  # phase step <= pi
    features = [a.half_width / 8 for a in (a1, a2) if a.kind == MULTI_SLIT]
    if x_step is None:
        x_step = min([w / 4, span / 64, chirp_limit] + features)
    elif x_step > chirp_limit:
        raise SamplingError(f"x step {x_step:.3g} m does not resolve the source chirp (<= {chirp_limit:.3g} m)")

    prev = _biphoton_quadrature(a1, a2, pump, geom, q1, q2, x_step, spacing)
    for _ in range(max_refinements):
        x_step /= 2
        cur = _biphoton_quadrature(a1, a2, pump, geom, q1, q2, x_step, spacing)
        scale = np.abs(cur).max()
        if scale == 0 or np.abs(cur - prev).max() <= rtol * scale:
            break
        prev = cur
    else:
        raise SamplingError(f"quadrature did not converge to rtol={rtol} after {max_refinements} refinements")

    amp = BiphotonAmplitude(cur, (q_axes[0][0], q_axes[1][0]), (q_axes[0][1], q_axes[1][1]), APERTURE)
    return amp.normalize()


def ideal_qudit_state(geom: ChannelGeometry, slits: ApertureSpec) -> QuditState:
    """``(1/sqrt D) sum_l exp(i k d^2 l^2 / 2 z_A) |l>_1 |-l>_2``."""
    _require_multi_slit(slits)
    D = slits.slit_count
    c = np.zeros((D, D), dtype=complex)
    ph = _pair_phases(geom, slits)
    for i in range(D):
        c[i, D - 1 - i] = ph[i] / np.sqrt(D)
    return QuditState(c)


def classical_correlated_state(D: int) -> MixedSlitState:
    if D < 1:
        raise DomainError("D must be >= 1")
    return MixedSlitState(np.fliplr(np.eye(D)) / D)


def mirror_state(state: QuditState, mirror: str = "both") -> QuditState:
    """Relabel ``l -> -l`` in one or both arms."""
    c = state.amplitudes
    if mirror in ("arm1", "both"):
        c = c[::-1, :]
    if mirror in ("arm2", "both"):
        c = c[:, ::-1]
    if mirror not in ("none", "arm1", "arm2", "both"):
        raise ValueError(f"unknown mirror option {mirror!r}")
    return QuditState(c.copy(), state.leakage)


def _finish_projection(c: np.ndarray, mirror: str, max_leakage: float) -> QuditState:
    leakage = float(min(1.0, max(0.0, 1.0 - np.sum(np.abs(c) ** 2))))
    if leakage > max_leakage:
        raise GridTooNarrow(
            f"projection leaked {leakage:.3f} of the weight outside the slit subspace "
            f"(allowed {max_leakage})", leakage
        )
    state = mirror_state(QuditState(c), mirror)
    return QuditState(state.amplitudes / state.norm(), leakage)


def project_to_slit_basis(
    F: BiphotonAmplitude,
    slits: ApertureSpec,
    mirror: str = "none",
    *,
    max_leakage: float = MAX_LEAKAGE,
) -> QuditState:
    """Slit-basis coefficients ``<l|_1 <l'|_2 F``, normalized.

    The basis states are treated as orthonormal; the weight missing from
    the D x D block is reported as ``leakage`` and must not exceed
    ``max_leakage``.
    """
    _require_multi_slit(slits)
    need = 10 * np.pi / slits.half_width
    for i in (0, 1):
        q = F.axis(i)
        if min(-q[0], q[-1]) < need * (1 - 1e-9):
            raise GridTooNarrow(f"q axis {i + 1} covers less than +-10 pi / a")
        if dual_step(q.size, F.q_step[i]) * q.size < slits.slit_count * slits.spacing + 2 * slits.half_width:
            raise GridTooNarrow(f"q step on axis {i + 1} is too coarse: the dual window misses slits")
    Fn = F.normalize()
    b1 = slit_basis(slits, F.axis(0))
    b2 = slit_basis(slits, F.axis(1))
    c = b1.conj() @ Fn.grid @ b2.conj().T * (F.q_step[0] * F.q_step[1])
    return _finish_projection(c, mirror, max_leakage)
