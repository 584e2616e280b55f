"""Sampled 1D fields, apertures, pump profiles and paraxial kernels.

Conventions used throughout the package:

* lengths are in meters, wavevectors in rad/m;
* a position amplitude ``psi(x)`` and its wavevector amplitude ``phi(q)``
  are related by the unitary transform
  ``phi(q) = (2 pi)^-1/2 \\int psi(x) exp(-i q x) dx``;
* free-space evolution multiplies ``phi`` by ``exp(-i q^2 dz / (2 k))``,
  which is the same as convolving ``psi`` with
  ``sqrt(k / (2 pi i dz)) exp(i k (x - x')^2 / (2 dz))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, GridMismatch, SamplingError, ValidationError

POSITION = "position"
WAVEVECTOR = "wavevector"

# Fraction of power allowed outside the bandwidth/support estimates used by
# the spectral sampling check.
_POWER_TAIL = 1e-10


def sinc(u):
    """Unnormalized sinc, ``sin(u)/u`` with ``sinc(0) = 1``."""
    return np.sinc(np.asarray(u) / np.pi)


def centered_axis(n: int, step: float) -> np.ndarray:
    """FFT-ordered centered axis: ``(j - n//2) * step`` for ``j < n``."""
    return (np.arange(n) - n // 2) * step


def dual_step(n: int, step: float) -> float:
    """Step of the conjugate axis of an ``n``-point grid with spacing ``step``."""
    return 2 * np.pi / (n * step)


def is_centered(start: float, step: float, n: int) -> bool:
    return abs(start + (n // 2) * step) <= 1e-9 * step


def _fft_c(a, axis=-1):
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis)


def _ifft_c(a, axis=-1):
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis)


def position_to_wavevector(samples, x_step, axis=-1):
    """Unitary transform of samples on a centered position axis.

    The result lives on the centered wavevector axis with step
    ``dual_step(n, x_step)``. ``sum |.|^2 * step`` is preserved exactly.
    """
    return (x_step / np.sqrt(2 * np.pi)) * _fft_c(samples, axis=axis)


def wavevector_to_position(samples, q_step, axis=-1):
    """Inverse of :func:`position_to_wavevector`."""
    n = np.shape(samples)[axis]
    return (n * q_step / np.sqrt(2 * np.pi)) * _ifft_c(samples, axis=axis)


@dataclass
class SampledField1D:
    """Complex amplitude on a uniform 1D grid.

    ``domain`` is either ``"position"`` (start/step in m) or
    ``"wavevector"`` (start/step in rad/m).
    """

    samples: np.ndarray
    start: float
    step: float
    domain: str = POSITION

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValidationError("samples must be a non-empty 1D array")
        if not self.step > 0:
            raise ValidationError(f"step must be positive, got {self.step}")
        if self.domain not in (POSITION, WAVEVECTOR):
            raise ValidationError(f"unknown domain {self.domain!r}")
        if not np.isfinite(self.norm2()):
            raise ValidationError("field norm is not finite")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def coords(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.n)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.step)

    def normalized(self) -> "SampledField1D":
        return SampledField1D(self.samples / np.sqrt(self.norm2()), self.start, self.step, self.domain)

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    @classmethod
    def centered(cls, samples, step, domain=POSITION) -> "SampledField1D":
        samples = np.asarray(samples)
        return cls(samples, -(samples.size // 2) * step, step, domain)

    @classmethod
    def from_function(cls, func, n, step, domain=POSITION) -> "SampledField1D":
        x = centered_axis(n, step)
        return cls(func(x), x[0], step, domain)


def to_wavevector(f: SampledField1D) -> SampledField1D:
    if f.domain != POSITION:
        raise GridMismatch("field is already in the wavevector domain")
    if not is_centered(f.start, f.step, f.n):
        raise GridMismatch("transform requires a centered grid")
    dq = dual_step(f.n, f.step)
    return SampledField1D(position_to_wavevector(f.samples, f.step), -(f.n // 2) * dq, dq, WAVEVECTOR)


def to_position(f: SampledField1D) -> SampledField1D:
    if f.domain != WAVEVECTOR:
        raise GridMismatch("field is already in the position domain")
    if not is_centered(f.start, f.step, f.n):
        raise GridMismatch("transform requires a centered grid")
    dx = dual_step(f.n, f.step)
    return SampledField1D(wavevector_to_position(f.samples, f.step), -(f.n // 2) * dx, dx, POSITION)


# ---------------------------------------------------------------------------
# Apertures and pump
# ---------------------------------------------------------------------------

MULTI_SLIT = "multi_slit"
TABULATED = "tabulated"


def slit_labels(count: int) -> np.ndarray:
    """Labels ``-(D-1)/2, ..., (D-1)/2``: half-integers for even D."""
    return np.arange(count) - (count - 1) / 2


@dataclass(frozen=True)
class ApertureSpec:
    """Transmission mask of one arm.

    Use :meth:`multi_slit` or :meth:`tabulated` rather than the raw
    constructor.
    """

    kind: str
    slit_count: int = 1
    spacing: float = 0.0
    half_width: float = 0.0
    table_x: Optional[tuple] = None
    table_t: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == MULTI_SLIT:
            if self.slit_count < 1:
                raise ValidationError("slit_count must be >= 1")
            if not self.half_width > 0:
                raise ValidationError("half_width must be positive")
            if self.slit_count > 1 and not self.spacing > 2 * self.half_width:
                raise ValidationError(
                    f"slits overlap: spacing {self.spacing} <= 2*half_width {2 * self.half_width}"
                )
        elif self.kind == TABULATED:
            x = np.asarray(self.table_x, dtype=float)
            t = np.asarray(self.table_t, dtype=complex)
            if x.ndim != 1 or x.shape != t.shape or x.size < 2:
                raise ValidationError("tabulated aperture needs matching 1D x and t arrays")
            if np.any(np.diff(x) <= 0):
                raise ValidationError("tabulated x must be strictly increasing")
            if np.any(np.abs(t) > 1 + 1e-12):
                raise ValidationError("|transmission| must not exceed 1")
        else:
            raise ValidationError(f"unknown aperture kind {self.kind!r}")

    @classmethod
    def multi_slit(cls, count: int, spacing: float, half_width: float) -> "ApertureSpec":
        return cls(MULTI_SLIT, int(count), float(spacing), float(half_width))

    @classmethod
    def tabulated(cls, x: Sequence[float], t: Sequence[complex]) -> "ApertureSpec":
        return cls(TABULATED, table_x=tuple(np.asarray(x, float)), table_t=tuple(np.asarray(t, complex)))

    @property
    def labels(self) -> np.ndarray:
        return slit_labels(self.slit_count)

    @property
    def centers(self) -> np.ndarray:
        return self.labels * self.spacing

    def support(self) -> tuple:
        """Closed interval outside of which the transmission vanishes."""
        if self.kind == MULTI_SLIT:
            edge = self.centers[-1] + self.half_width
            return (-edge, edge)
        return (self.table_x[0], self.table_x[-1])


def aperture_transmission(spec: ApertureSpec, x):
    """Transmission ``A(x)``; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    if spec.kind == MULTI_SLIT:
        inside = np.zeros(x.shape, dtype=bool)
        for c in spec.centers:
            inside |= np.abs(x - c) <= spec.half_width
        out = inside.astype(complex)
    else:
        tx = np.asarray(spec.table_x)
        tt = np.asarray(spec.table_t)
        out = np.interp(x, tx, tt.real, left=0.0, right=0.0) + 1j * np.interp(
            x, tx, tt.imag, left=0.0, right=0.0
        )
    return out[()] if out.ndim == 0 else out


def cell_averaged_transmission(spec: ApertureSpec, x, step: float) -> np.ndarray:
    """Mean of ``A`` over ``[x - step/2, x + step/2]``.

    Used as quadrature weights so that hard slit edges converge at second
    order. Tabulated apertures are continuous and fall back to point values.
    """
    x = np.asarray(x, dtype=float)
    if spec.kind != MULTI_SLIT:
        return np.asarray(aperture_transmission(spec, x), dtype=complex)
    lo, hi = x - step / 2, x + step / 2
    cover = np.zeros(x.shape)
    for c in spec.centers:
        cover += np.clip(np.minimum(hi, c + spec.half_width) - np.maximum(lo, c - spec.half_width), 0, None)
    return (cover / step).astype(complex)


POINT_LIKE = "point_like"
GAUSSIAN = "gaussian"
POINT_LIKE_FRACTION = 1 / 50


@dataclass(frozen=True)
class PumpProfile:
    """Transverse pump amplitude ``W(xi)`` at the aperture plane.

    A point-like pump is modelled by a narrow Gaussian whose waist is
    ``w_eps`` if given, otherwise ``spacing / 50`` for the slit spacing in
    use.
    """

    kind: str = POINT_LIKE
    w0: Optional[float] = None
    w_eps: Optional[float] = None

    def __post_init__(self):
        if self.kind == GAUSSIAN:
            if self.w0 is None or not self.w0 > 0:
                raise ValidationError("gaussian pump needs w0 > 0")
        elif self.kind == POINT_LIKE:
            if self.w_eps is not None and not self.w_eps > 0:
                raise ValidationError("w_eps must be positive")
        else:
            raise ValidationError(f"unknown pump kind {self.kind!r}")

    @classmethod
    def gaussian(cls, w0: float) -> "PumpProfile":
        return cls(GAUSSIAN, w0=float(w0))

    @classmethod
    def point_like(cls, w_eps: Optional[float] = None) -> "PumpProfile":
        return cls(POINT_LIKE, w_eps=w_eps)

    def waist(self, spacing: Optional[float] = None) -> float:
        if self.kind == GAUSSIAN:
            return self.w0
        if self.w_eps is not None:
            return self.w_eps
        if spacing is None or not spacing > 0:
            raise DomainError("point-like pump needs w_eps or a slit spacing to set its surrogate waist")
        return spacing * POINT_LIKE_FRACTION


def pump_profile_eval(pump: PumpProfile, xi, spacing: Optional[float] = None):
    """``W(xi) = exp(-xi^2 / w^2)``, peak 1 at the origin."""
    w = pump.waist(spacing)
    return np.exp(-(np.asarray(xi, dtype=float) / w) ** 2)


# ---------------------------------------------------------------------------
# Channel geometry
# ---------------------------------------------------------------------------

IMAGING_RTOL = 1e-12


@dataclass(frozen=True)
class ArmGeometry:
    z_L: float
    f: float
    z_I: float


@dataclass(frozen=True)
class ChannelGeometry:
    """Wavenumber, aperture distance and the two lens arms.

    Every arm must satisfy the 2f-2f imaging condition
    ``z_I - z_L = z_L - z_A = 2 f``.
    """

    k: float
    z_A: float
    arms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError("k must be positive")
        if not self.z_A > 0:
            raise ValidationError("z_A must be positive")
        if len(self.arms) != 2:
            raise ValidationError("exactly two arms are required")
        for i, arm in enumerate(self.arms, start=1):
            if min(arm.z_L, arm.f, arm.z_I) <= 0:
                raise ValidationError(f"arm {i}: distances must be positive")
            r = imaging_residual(self.z_A, arm)
            if r > IMAGING_RTOL * max(arm.z_I, 2 * arm.f):
                raise ValidationError(
                    f"arm {i}: imaging condition z_I - z_L = z_L - z_A = 2f violated "
                    f"(residual {r:.6g} m)"
                )

    @classmethod
    def two_f(cls, wavelength: float, z_A: float, f1: float, f2: Optional[float] = None) -> "ChannelGeometry":
        f2 = f1 if f2 is None else f2
        arms = tuple(ArmGeometry(z_A + 2 * f, f, z_A + 4 * f) for f in (f1, f2))
        return cls(2 * np.pi / wavelength, z_A, arms)

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.k

    @property
    def focal(self) -> tuple:
        return tuple(arm.f for arm in self.arms)


def imaging_residual(z_A: float, arm: ArmGeometry) -> float:
    """Largest deviation from ``z_I - z_L = z_L - z_A = 2 f``, in meters."""
    return max(abs(arm.z_L - z_A - 2 * arm.f), abs(arm.z_I - arm.z_L - 2 * arm.f))


# ---------------------------------------------------------------------------
# Propagation kernels
# ---------------------------------------------------------------------------


def _power_radius(values, coords, center=0.0):
    """Smallest radius about ``center`` holding all but ``_POWER_TAIL`` of the power."""
    p = np.abs(values) ** 2
    total = p.sum()
    if total == 0:
        return 0.0
    r = np.abs(coords - center)
    order = np.argsort(r, kind="stable")
    cum = np.cumsum(p[order])
    idx = np.searchsorted(cum, (1 - _POWER_TAIL) * total)
    return float(r[order][min(idx, r.size - 1)])


def fresnel_matrix(x_in, x_out, dz: float, k: float, in_step: float) -> np.ndarray:
    """Direct Fresnel quadrature as a ``(len(x_out), len(x_in))`` matrix.

    Raises :class:`SamplingError` unless
    ``in_step <= lambda * dz / (2 * span)`` where ``span`` is the largest
    input/output separation.
    """
    if not dz > 0:
        raise DomainError("direct Fresnel quadrature needs dz > 0")
    x_in = np.asarray(x_in, dtype=float)
    x_out = np.asarray(x_out, dtype=float)
    span = max(abs(x_out.max() - x_in.min()), abs(x_in.max() - x_out.min()))
    limit = (2 * np.pi / k) * dz / (2 * span)
    if in_step > limit:
        raise SamplingError(
            f"input step {in_step:.3g} m does not resolve the Fresnel chirp (needs <= {limit:.3g} m)"
        )
    pref = np.sqrt(k / (2j * np.pi * dz)) * in_step
    return pref * np.exp(1j * k * (x_out[:, None] - x_in[None, :]) ** 2 / (2 * dz))


def fresnel_propagate(
    fld: SampledField1D,
    dz: float,
    k: float,
    *,
    method: str = "spectral",
    pad_factor: float = 2.0,
    out_grid: Optional[tuple] = None,
) -> SampledField1D:
    """Paraxial free-space propagation by ``dz``.

    Parameters
    ----------
    fld : SampledField1D
        Position-domain input.
    dz : float
        Propagation distance in meters; ``dz == 0`` returns the input.
    k : float
        Wavenumber in rad/m.
    method : {"spectral", "direct"}
        ``spectral`` multiplies the padded spectrum by
        ``exp(-i q^2 dz / (2k))``; ``direct`` evaluates the Fresnel integral
        by quadrature and accepts any output grid.
    pad_factor : float
        Padded length over input length for the spectral method (>= 1).
    out_grid : tuple, optional
        ``(start, step, count)``. Defaults to the input grid. For the spectral
        method the grid must lie on the padded lattice.

    Raises
    ------
    SamplingError
        When the chirp is under-resolved (direct) or the field would wrap
        around the padded window (spectral).
    """
    if fld.domain != POSITION:
        raise GridMismatch("fresnel_propagate expects a position-domain field")
    if dz == 0:
        return SampledField1D(fld.samples.copy(), fld.start, fld.step, fld.domain)
    if out_grid is None:
        out_grid = (fld.start, fld.step, fld.n)
    o_start, o_step, o_count = out_grid

    if method == "direct":
        x_out = o_start + o_step * np.arange(int(o_count))
        m = fresnel_matrix(fld.coords, x_out, dz, k, fld.step)
        return SampledField1D(m @ fld.samples, o_start, o_step, POSITION)
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    if pad_factor < 1:
        raise ValueError("pad_factor must be >= 1")

    n_pad = max(fld.n, int(np.ceil(pad_factor * fld.n)))
    n_pad += n_pad % 2
    offset = (n_pad - fld.n) // 2
    pad_start = fld.start - offset * fld.step
    buf = np.zeros(n_pad, dtype=complex)
    buf[offset:offset + fld.n] = fld.samples

    q = 2 * np.pi * np.fft.fftfreq(n_pad, fld.step)
    spec = np.fft.fft(buf)
    x_pad = pad_start + fld.step * np.arange(n_pad)
    center = 0.5 * (x_pad[0] + x_pad[-1])
    reach = _power_radius(buf, x_pad, center) + abs(dz) * _power_radius(spec, q) / k
    if reach > 0.5 * n_pad * fld.step:
        raise SamplingError(
            f"field reaches {reach:.3g} m from the window center but the padded half-window is "
            f"{0.5 * n_pad * fld.step:.3g} m; increase pad_factor or coarsen the step"
        )
    out = np.fft.ifft(spec * np.exp(-1j * q ** 2 * dz / (2 * k)))

    if not np.isclose(o_step, fld.step, rtol=1e-9, atol=0):
        raise GridMismatch("spectral output grid must keep the input step")
    i0 = (o_start - pad_start) / fld.step
    if abs(i0 - round(i0)) > 1e-6 or round(i0) < 0 or round(i0) + o_count > n_pad:
        raise GridMismatch("spectral output grid is not a sub-grid of the padded lattice")
    i0 = int(round(i0))
    return SampledField1D(out[i0:i0 + int(o_count)], o_start, fld.step, POSITION)


def lens_phase(fld: SampledField1D, f: float, k: float) -> SampledField1D:
    """Thin-lens factor ``exp(-i k x^2 / (2 f))``."""
    if f == 0:
        raise DomainError("focal length must be non-zero")
    x = fld.coords
    return SampledField1D(fld.samples * np.exp(-1j * k * x ** 2 / (2 * f)), fld.start, fld.step, fld.domain)


def inner_product(a: SampledField1D, b: SampledField1D) -> complex:
    """``sum conj(a) * b * step``."""
    if a.domain != b.domain or a.n != b.n or not np.isclose(a.step, b.step, rtol=1e-12) \
            or not np.isclose(a.start, b.start, rtol=0, atol=1e-9 * a.step):
        raise GridMismatch("inner_product needs identical grids and domains")
    return complex(np.vdot(a.samples, b.samples) * a.step)
