"""Independent reference computations used by the tests.

Nothing here calls into qudit_sim: the formulas are re-derived directly
(closed forms, plain loops, Fresnel integrals from scipy).
"""

import cmath
import math

import numpy as np
from scipy.special import fresnel

LAMBDA = 826e-9
K = 2 * math.pi / LAMBDA
Z_A = 0.2
F_LENS = 0.15
D_SPACING = 0.17e-3
A_HALF = 0.045e-3


def labels(D):
    return [l - (D - 1) / 2 for l in range(D)]


def sinc(u):
    return 1.0 if u == 0 else math.sin(u) / u


def multislit_F(q1, q2, D=4, d=D_SPACING, a=A_HALF, k=K, z_A=Z_A):
    """Closed-form multi-slit amplitude, evaluated term by term."""
    total = 0j
    for l in labels(D):
        total += (
            cmath.exp(1j * k * d * d * l * l / (2 * z_A))
            * cmath.exp(-1j * q1 * l * d) * sinc(q1 * a)
            * cmath.exp(1j * q2 * l * d) * sinc(q2 * a)
        )
    return total


def ideal_coefficients(D=4, d=D_SPACING, k=K, z_A=Z_A):
    c = np.zeros((D, D), dtype=complex)
    for i, l in enumerate(labels(D)):
        c[i, D - 1 - i] = cmath.exp(1j * k * d * d * l * l / (2 * z_A)) / math.sqrt(D)
    return c


def gaussian_beam(x, z, w0, k=K):
    """1D Gaussian ``exp(-x^2/w0^2)`` after paraxial propagation by ``z``."""
    z_r = k * w0 ** 2 / 2
    qf = 1 + 1j * z / z_r
    return np.exp(-x ** 2 / (w0 ** 2 * qf)) / np.sqrt(qf)


def gaussian_width(z, w0, k=K):
    z_r = k * w0 ** 2 / 2
    return w0 * math.sqrt(1 + (z / z_r) ** 2)


def gaussian_curvature_radius(z, w0, k=K):
    z_r = k * w0 ** 2 / 2
    return z * (1 + (z_r / z) ** 2)


def gaussian_gouy(z, w0, k=K):
    """1D Gouy phase (half of the 2D value)."""
    return 0.5 * math.atan(z / (k * w0 ** 2 / 2))


def slit_fresnel(x, z, a, k=K):
    """Exact Fresnel diffraction of a unit top-hat on ``|x'| <= a``."""
    s = np.sqrt(k / (np.pi * z))
    u1, u2 = s * (-a - x), s * (a - x)
    S1, C1 = fresnel(u1)
    S2, C2 = fresnel(u2)
    return np.sqrt(1 / (2j)) * ((C2 - C1) + 1j * (S2 - S1))


def measured_amplitudes():
    """Experimental ququart coefficients (moduli) on the anti-diagonal."""
    return {(-0.5, 0.5): 0.49, (0.5, -0.5): 0.50, (-1.5, 1.5): 0.47, (1.5, -1.5): 0.49}


def gaussian_through_arm(q, sigma, f, k=K):
    """Arm kernel ``sqrt(i f / 2 pi k) * int exp(-sigma^2 q'^2) exp(-i f (q+q')^2 / 2k) dq'``.

    Completing the square with ``alpha = sigma^2`` and ``beta = f / 2k`` gives
    ``sqrt(pi / (alpha + i beta)) * exp(-i alpha beta q^2 / (alpha + i beta))``.
    """
    alpha, beta = sigma ** 2, f / (2 * k)
    pref = np.sqrt(1j * f / (2 * np.pi * k))
    return pref * np.sqrt(np.pi / (alpha + 1j * beta)) * np.exp(-1j * alpha * beta * q ** 2 / (alpha + 1j * beta))
