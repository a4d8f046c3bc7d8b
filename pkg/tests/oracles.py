"""Independent reference computations used to freeze expected values.

Nothing here imports the code paths under test beyond plain data containers.
"""

import math

import numpy as np
from scipy.integrate import quad


def gaussian(x, x0, sigma):
    return (1.0 / (math.sqrt(2 * math.pi) * sigma)) ** 0.5 * math.exp(-((x - x0) ** 2) / (4 * sigma**2))


def pointer_moments_quadrature(x0, sigma, h=1e-5):
    """<x>, <pi>, <x pi> of the Gaussian pointer by quadrature, using a
    numerical derivative for pi = -i d/dx."""

    def dphi(x):
        return (gaussian(x + h, x0, sigma) - gaussian(x - h, x0, sigma)) / (2 * h)

    lo, hi = x0 - 40 * sigma, x0 + 40 * sigma
    pts = [x0 - sigma, x0, x0 + sigma]
    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-13, points=pts)
    norm = quad(lambda x: gaussian(x, x0, sigma) ** 2, lo, hi, **opts)[0]
    xmean = quad(lambda x: x * gaussian(x, x0, sigma) ** 2, lo, hi, **opts)[0]
    # <pi> = -i int phi phi'
    pmean = -1j * quad(lambda x: gaussian(x, x0, sigma) * dphi(x), lo, hi, **opts)[0]
    xp = -1j * quad(lambda x: x * gaussian(x, x0, sigma) * dphi(x), lo, hi, **opts)[0]
    return norm, xmean, pmean, xp


def postselected_pointer_mean_grid(initial, observable, final, x0, sigma, kappa, n=200001):
    """Post-selected pointer mean by brute force on a position grid.

    Builds the joint wavefunction Psi(x) = sum_i |a_i><a_i|I> phi(x - kappa a_i)
    from a plain eigendecomposition, projects on `final`, integrates.
    """
    vals, vecs = np.linalg.eigh(observable)
    half = 12 * sigma + kappa * np.abs(vals).max()
    x = np.linspace(x0 - half, x0 + half, n)
    phi = lambda shift: (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - x0 - shift) ** 2) / (4 * sigma**2))
    chi = np.zeros_like(x, dtype=complex)
    for a, v in zip(vals, vecs.T):
        chi += np.vdot(final, v) * np.vdot(v, initial) * phi(kappa * a)
    w = np.abs(chi) ** 2
    return np.trapezoid(x * w, x) / np.trapezoid(w, x)


def readout_state_grid(initial, observable, x0, sigma, kappa, n=200001):
    """x0^-1 <phi|x|Phi(t)> by quadrature on a grid."""
    vals, vecs = np.linalg.eigh(observable)
    half = 12 * sigma + kappa * np.abs(vals).max()
    x = np.linspace(x0 - half, x0 + half, n)
    phi = lambda shift: (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - x0 - shift) ** 2) / (4 * sigma**2))
    out = np.zeros(len(initial), dtype=complex)
    for a, v in zip(vals, vecs.T):
        out += np.trapezoid(phi(0) * x * phi(kappa * a), x) / x0 * v * np.vdot(v, initial)
    return out


def two_stage_born(initial, kraus, projectors):
    """Pr(n, m) as Pr(m) * Pr(n | post-measurement state after m)."""
    out = np.zeros((len(projectors), len(kraus)))
    for m, M in enumerate(kraus):
        post = M @ initial
        pm = np.vdot(post, post).real
        if pm == 0:
            continue
        post = post / np.sqrt(pm)
        for n, P in enumerate(projectors):
            out[n, m] = pm * np.vdot(post, P @ post).real
    return out


def normal_cdf(t):
    return 0.5 * (1 + math.erf(t / math.sqrt(2)))


def phase_gradient(f, x, h=1e-3):
    """d/dx arg f(x) by Richardson-extrapolated central differences of the phase."""

    def d(step):
        return np.angle(f(x + step) / f(x - step)) / (2 * step)

    return (4 * d(h / 2) - d(h)) / 3
