"""Lens channels from the apertures to the image planes and beyond.

Each arm is a free-space gap of ``2f``, a thin lens ``f`` and a second gap
of ``2f``. In the wavevector picture the arm acts as

    I(q) = sqrt(i f / (2 pi k)) \\int F(q') exp(-i f (q + q')^2 / (2 k)) dq'

which in the position picture is the inverted image carrying the separable
phase ``exp(i k x^2 / (2 f))``. :func:`channel_transform` uses the position
picture (FFT); :func:`channel_transform_direct` integrates the wavevector
form directly and serves as a slow cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SamplingError, ValidationError
from .optics import (
    ApertureSpec,
    ChannelGeometry,
    _power_radius,
    cell_averaged_transmission,
    dual_step,
    fresnel_matrix,
    is_centered,
    position_to_wavevector,
    wavevector_to_position,
)
from .source import APERTURE, IMAGE, BiphotonAmplitude, QuditState, _finish_projection, _require_multi_slit, MAX_LEAKAGE

DETECTOR_HALF_WINDOW = 6e-3
DETECTOR_STEP = 10e-6


@dataclass
class CoincidenceAmplitudeGrid:
    """Joint position amplitude at the two detector planes.

    ``dz`` holds each arm's distance past its image plane. ``captured`` is
    the fraction of the propagated norm that fell inside the window before
    the grid was renormalized.
    """

    grid: np.ndarray
    x_start: tuple
    x_step: tuple
    dz: tuple = (0.0, 0.0)
    captured: float = 1.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=complex)
        if self.grid.ndim != 2:
            raise ValidationError("grid must be 2D")

    def axis(self, i: int) -> np.ndarray:
        return self.x_start[i] + self.x_step[i] * np.arange(self.grid.shape[i])

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.grid) ** 2

    def norm2(self) -> float:
        return float(self.intensity.sum() * self.x_step[0] * self.x_step[1])


@dataclass
class CoincidenceIntensityGrid:
    """Joint detection probability density without an amplitude (mixtures)."""

    intensity: np.ndarray
    x_start: tuple
    x_step: tuple
    dz: tuple = (0.0, 0.0)

    def axis(self, i: int) -> np.ndarray:
        return self.x_start[i] + self.x_step[i] * np.arange(self.intensity.shape[i])


def _flip(a, axis):
    # x -> -x on a centered FFT axis (index j -> -j mod n)
    return np.roll(np.flip(a, axis=axis), 1, axis=axis)


def _check_arm_sampling(psi_marginal, x, dx, f, k):
    """Image chirp and output bandwidth must fit the grid."""
    x_max = max(-x[0], x[-1])
    if k * x_max * dx / abs(f) > np.pi:
        raise SamplingError(
            f"lens chirp exp(i k x^2 / 2f) is aliased at the window edge (f = {f} m); refine the q window"
        )
    reach = _power_radius(np.sqrt(psi_marginal), x) * k / abs(f)
    if reach > np.pi / dx:
        raise SamplingError("image-plane chirp pushes the amplitude beyond the q window")


def _arm_image(phi, q_step, f, k, axis):
    """Apply one arm's channel to wavevector samples along ``axis``."""
    n = phi.shape[axis]
    dx = dual_step(n, q_step)
    x = (np.arange(n) - n // 2) * dx
    psi = wavevector_to_position(phi, q_step, axis=axis)
    other = tuple(i for i in range(psi.ndim) if i != axis)
    marg = np.sum(np.abs(psi) ** 2, axis=other) if other else np.abs(psi) ** 2
    _check_arm_sampling(marg, x, dx, f, k)
    shape = [1] * psi.ndim
    shape[axis] = n
    psi = _flip(psi, axis) * np.exp(1j * k * x ** 2 / (2 * f)).reshape(shape)
    return position_to_wavevector(psi, dx, axis=axis)


def _require_centered(F: BiphotonAmplitude):
    for i in (0, 1):
        if not is_centered(F.q_start[i], F.q_step[i], F.grid.shape[i]):
            raise ValidationError("channel operations need centered FFT wavevector axes")


def channel_transform(F: BiphotonAmplitude, geom: ChannelGeometry) -> BiphotonAmplitude:
    """Aperture-plane amplitude to image-plane amplitude for both arms."""
    if F.plane_tag != APERTURE:
        raise DomainError(f"channel_transform expects an aperture-plane amplitude, got {F.plane_tag!r}")
    _require_centered(F)
    g = F.grid
    for i, f in enumerate(geom.focal):
        g = _arm_image(g, F.q_step[i], f, geom.k, axis=i)
    out = BiphotonAmplitude(g, F.q_start, F.q_step, IMAGE, F.normalization, geom.k, geom.focal)
    return out.normalize()


def arm_kernel_direct(u, f: float, k: float, q_out, q_limit: float, n_quad: Optional[int] = None):
    """One-arm wavevector kernel applied to the callable ``u`` by quadrature.

    Integrates over ``|q'| <= q_limit`` with the composite trapezoid rule,
    choosing the step so that the kernel phase advances at most ``pi/4``
    per sample.
    """
    q_out = np.asarray(q_out, dtype=float)
    slope = abs(f) * (np.abs(q_out).max() + q_limit) / k
    if n_quad is None:
        n_quad = int(np.ceil(2 * q_limit * slope / (np.pi / 4))) + 1
    step = 2 * q_limit / (n_quad - 1)
    if slope * step > np.pi:
        raise SamplingError("direct kernel quadrature under-resolves the Fresnel chirp in q")
    pref = np.sqrt(1j * f / (2 * np.pi * k))
    out = np.zeros(q_out.size, dtype=complex)
    chunk = max(1, 2_000_000 // max(q_out.size, 1))
    for s in range(0, n_quad, chunk):
        qp = -q_limit + step * np.arange(s, min(n_quad, s + chunk))
        w = np.full(qp.size, step)
        if s == 0:
            w[0] *= 0.5
        if s + chunk >= n_quad:
            w[-1] *= 0.5
        kern = np.exp(-1j * f * (q_out[:, None] + qp[None, :]) ** 2 / (2 * k))
        out += kern @ (u(qp) * w)
    return pref * out


def channel_transform_direct(terms, geom: ChannelGeometry, q1_out, q2_out, q_limit, n_quad=None) -> np.ndarray:
    """Image-plane amplitude on a small output grid by direct quadrature.

    ``terms`` is a list of separable pieces ``(coef, u1, u2)`` (see
    :func:`qudit_sim.source.analytic_multislit_terms`). ``q_limit`` is the
    half-width of the integration band, either a scalar or one per arm.
    Returns the unnormalized ``(len(q1_out), len(q2_out))`` array.
    """
    lim = np.broadcast_to(np.asarray(q_limit, dtype=float), (2,))
    f1, f2 = geom.focal
    out = np.zeros((np.size(q1_out), np.size(q2_out)), dtype=complex)
    for coef, u1, u2 in terms:
        v1 = arm_kernel_direct(u1, f1, geom.k, q1_out, lim[0], n_quad)
        v2 = arm_kernel_direct(u2, f2, geom.k, q2_out, lim[1], n_quad)
        out += coef * np.outer(v1, v2)
    return out


def detector_axis(half_window: float = DETECTOR_HALF_WINDOW, step: float = DETECTOR_STEP) -> np.ndarray:
    m = int(round(half_window / step))
    return step * np.arange(-m, m + 1)


def _position_axis(F: BiphotonAmplitude, i: int) -> np.ndarray:
    n = F.grid.shape[i]
    return (np.arange(n) - n // 2) * dual_step(n, F.q_step[i])


def arm_to_detector(phi, q_step: float, dz: float, k: float, det_x=None):
    """Image-plane wavevector samples of one arm to position amplitude at ``dz``.

    Returns ``(x, amplitude)``. With ``dz == 0`` the native position grid is
    used; otherwise the Fresnel integral is evaluated on ``det_x``.
    """
    n = phi.shape[-1]
    dx = dual_step(n, q_step)
    x = (np.arange(n) - n // 2) * dx
    psi = wavevector_to_position(phi, q_step, axis=-1)
    if dz == 0:
        return x, psi
    det_x = detector_axis() if det_x is None else np.asarray(det_x)
    m = fresnel_matrix(x, det_x, dz, k, dx)
    return det_x, psi @ m.T


def propagate_to_detectors(
    I: BiphotonAmplitude,
    dz1: float,
    dz2: float,
    geom: ChannelGeometry,
    *,
    det_x1=None,
    det_x2=None,
) -> CoincidenceAmplitudeGrid:
    """Joint position amplitude ``dz_i`` past each image plane.

    ``dz = 0`` keeps the native position grid dual to the q axis; for
    ``dz > 0`` the Fresnel integral from the image plane is evaluated on the
    detector axis (default +-6 mm in 10 um steps).
    """
    if I.plane_tag != IMAGE:
        raise DomainError("propagate_to_detectors expects an image-plane amplitude")
    if dz1 < 0 or dz2 < 0:
        raise DomainError("defocus distances must be non-negative")
    _require_centered(I)
    g = I.grid
    axes = []
    for i, (dz, det) in enumerate(((dz1, det_x1), (dz2, det_x2))):
        n = g.shape[i]
        dx = dual_step(n, I.q_step[i])
        x = (np.arange(n) - n // 2) * dx
        g = wavevector_to_position(g, I.q_step[i], axis=i)
        if dz > 0:
            det = detector_axis() if det is None else np.asarray(det)
            m = fresnel_matrix(x, det, dz, geom.k, dx)
            g = m @ g if i == 0 else g @ m.T
            x = det
        axes.append(x)
    steps = tuple(float(a[1] - a[0]) for a in axes)
    captured = float(np.sum(np.abs(g) ** 2) * steps[0] * steps[1])
    if captured == 0:
        raise SamplingError("no amplitude reached the detector window")
    g = g / np.sqrt(captured)
    return CoincidenceAmplitudeGrid(g, (axes[0][0], axes[1][0]), steps, (dz1, dz2), min(captured, 1.0))


def image_plane_basis(slits: ApertureSpec, x, f: Optional[float], k: Optional[float]) -> np.ndarray:
    """Top-hat slit modes at the image plane, rows ordered by label.

    Row ``m`` is centred at ``x = l_m d`` (physical position in the
    inverted image). With a focal length the modes carry the channel's
    separable phase ``exp(i k x^2 / 2f)``, i.e. they are the images of the
    aperture slit states.
    """
    dx = x[1] - x[0]
    rows = []
    for c in slits.centers:
        single = ApertureSpec.multi_slit(1, 0.0, slits.half_width)
        rows.append(cell_averaged_transmission(single, x - c, dx) / np.sqrt(2 * slits.half_width))
    basis = np.array(rows)
    if f is not None:
        basis = basis * np.exp(1j * k * x ** 2 / (2 * f))
    return basis


def image_state(
    I: BiphotonAmplitude,
    slits: ApertureSpec,
    *,
    mode_matched: bool = True,
    max_leakage: float = MAX_LEAKAGE,
) -> QuditState:
    """Slit-basis state read out at the image planes.

    Labels refer to physical image positions ``l d``; by the 2f-2f
    inversion the aperture pair ``|l>|-l>`` shows up as ``|-l>|l>``.
    With ``mode_matched=False`` the plain top-hats are used and the lens
    curvature shows up as leakage.
    """
    if I.plane_tag != IMAGE:
        raise DomainError(f"image_state expects an image-plane amplitude, got {I.plane_tag!r}")
    _require_multi_slit(slits)
    _require_centered(I)
    In = I.normalize()
    psi = wavevector_to_position(wavevector_to_position(In.grid, I.q_step[0], axis=0), I.q_step[1], axis=1)
    x1, x2 = _position_axis(I, 0), _position_axis(I, 1)
    f1, f2 = (I.focal if (mode_matched and I.focal is not None) else (None, None))
    b1 = image_plane_basis(slits, x1, f1, I.k)
    b2 = image_plane_basis(slits, x2, f2, I.k)
    c = b1.conj() @ psi @ b2.conj().T * ((x1[1] - x1[0]) * (x2[1] - x2[0]))
    return _finish_projection(c, "none", max_leakage)
