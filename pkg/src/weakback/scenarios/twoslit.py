"""Double-slit field, weak momentum values and the trajectories they define.

The transverse field is a superposition of two Gaussians freely propagated
in the paraxial approximation (``i d/dz psi = -(1/2k) d^2/dxi^2 psi``), so
every quantity has a closed form.  Lengths are in arbitrary units; the
defaults put the slit width at 1, slit separation at 4 and ``k s = 50``.

The real weak momentum ``Re <xi|P|psi> / <xi|psi> = Im(psi'/psi)`` equals
``k`` times the Bohm velocity ``d xi / dz``.  Streamlines of that field keep
the ordering of their starting points and transport ``|psi|^2``; that is all
they are.  They are not measured paths of individual photons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_simpson, simpson, solve_ivp
from scipy.signal import argrelextrema

from ..exceptions import NodePoint
from ..pointer import X_PI_EXPECTATION, GaussianPointer

NODE_AMPLITUDE = 1e-12


@dataclass(frozen=True)
class TwoSlitField:
    d: float = 4.0
    """slit separation"""
    s: float = 1.0
    """slit width (amplitude ~ exp(-u^2 / 2 s^2))"""
    k: float = 50.0
    """wavenumber"""
    z_planes: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if not (self.d >= 0 and self.s > 0 and self.k > 0):
            raise ValueError("need d >= 0, s > 0, k > 0")
        if any(z < 0 for z in self.z_planes):
            raise ValueError("propagation distances must be non-negative")

    @property
    def rayleigh(self) -> float:
        """``k s^2``: distance over which a single slit's beam doubles its area."""
        return self.k * self.s**2

    @property
    def norm(self) -> float:
        return 1.0 / np.sqrt(2.0 + 2.0 * np.exp(-self.d**2 / (4 * self.s**2)))

    def _q(self, z):
        return 1.0 + 1j * np.asarray(z, dtype=float) / self.rayleigh

    def _gauss(self, u, q):
        return (np.pi * self.s**2) ** -0.25 * q**-0.5 * np.exp(-(u**2) / (2 * self.s**2 * q))

    def psi(self, xi, z):
        xi = np.asarray(xi, dtype=float)
        q = self._q(z)
        return self.norm * (self._gauss(xi - self.d / 2, q) + self._gauss(xi + self.d / 2, q))

    def dpsi(self, xi, z):
        """Analytic transverse derivative of psi."""
        xi = np.asarray(xi, dtype=float)
        q = self._q(z)
        c = self.s**2 * q
        ua, ub = xi - self.d / 2, xi + self.d / 2
        return self.norm * (-ua / c * self._gauss(ua, q) - ub / c * self._gauss(ub, q))

    def intensity(self, xi, z):
        return np.abs(self.psi(xi, z)) ** 2

    def envelope_halfwidth(self, z) -> float:
        """Half-width containing essentially all of |psi|^2 at plane z."""
        return self.d / 2 + 8 * self.s * abs(self._q(z))

    def weak_momentum(self, xi, z):
        """``Re <P>_w = Im(psi'/psi)``; raises NodePoint where psi vanishes."""
        p = self.psi(xi, z)
        if np.any(np.abs(p) <= NODE_AMPLITUDE):
            raise NodePoint(f"|psi| <= {NODE_AMPLITUDE} at a requested point")
        return np.imag(self.dpsi(xi, z) / p)

    def velocity(self, xi, z):
        """Bohm velocity ``d xi / dz``."""
        return self.weak_momentum(xi, z) / self.k

    def cdf_grid(self, z, n: int = 40001):
        half = self.envelope_halfwidth(z)
        x = np.linspace(-half, half, n)
        cdf = cumulative_simpson(self.intensity(x, z), x=x, initial=0.0)
        return x, cdf / cdf[-1]


def twoslit_build(d: float = 4.0, s: float = 1.0, k: float = 50.0, z_planes=(0.0,),
                  n_quad: int = 40001, tol: float = 1e-8) -> TwoSlitField:
    """Build a field and verify it is normalized at each plane by quadrature."""
    f = TwoSlitField(d=d, s=s, k=k, z_planes=tuple(float(z) for z in z_planes))
    for z in f.z_planes:
        half = f.envelope_halfwidth(z)
        x = np.linspace(-half, half, n_quad)
        total = simpson(f.intensity(x, z), x=x)
        if abs(total - 1) > tol:
            raise ValueError(f"field norm {total!r} at z={z} outside tolerance")
    return f


def default_field(n_planes: int = 41, z_max_rayleigh: float = 4.0) -> TwoSlitField:
    zs = np.linspace(0.0, z_max_rayleigh * 50.0, n_planes)
    return twoslit_build(z_planes=zs)


# -- fringes ---------------------------------------------------------------


def fringe_positions(field: TwoSlitField, z: float, kind: str = "minima",
                     window: float | None = None, n: int = 200001) -> np.ndarray:
    """Local extrema of |psi|^2 at plane z, refined by parabolic interpolation."""
    half = window if window is not None else field.envelope_halfwidth(z)
    x = np.linspace(-half, half, n)
    y = field.intensity(x, z)
    cmp = np.less if kind == "minima" else np.greater
    idx = argrelextrema(y, cmp)[0]
    idx = idx[(idx > 0) & (idx < n - 1)]
    h = x[1] - x[0]
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    denom = y0 - 2 * y1 + y2
    return x[idx] + 0.5 * h * (y0 - y2) / denom


def fringe_spacing(field: TwoSlitField, z: float, kind: str = "minima") -> float:
    """Spacing of the fringes adjacent to the axis.

    For minima this is the distance between the first dark fringes on either
    side of the axis; for maxima, the distance from the central maximum to
    the mean of the first side maxima.
    """
    pos = fringe_positions(field, z, kind)
    if kind == "minima":
        left = pos[pos < 0].max()
        right = pos[pos > 0].min()
        return float(right - left)
    side = pos[np.abs(pos) > 1e-9 * field.s]
    return float(0.5 * (side[side > 0].min() - side[side < 0].max()))


def far_field_spacing(field: TwoSlitField, z: float) -> float:
    """Textbook two-slit fringe period ``2 pi z / (k d)``."""
    return 2 * np.pi * z / (field.k * field.d)


# -- trajectories ------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryBundle:
    start_points: np.ndarray
    planes: np.ndarray
    paths: np.ndarray
    """paths[i, j]: xi of trajectory i at plane j (NaN after a node hit)"""
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def non_crossing(self) -> bool:
        """Every plane preserves the ordering of the starting points."""
        order = np.argsort(self.start_points, kind="stable")
        ok = ~self.flagged[order]
        p = self.paths[order][ok]
        return bool(np.all(np.diff(p, axis=0) > 0)) if len(p) > 1 else True

    def endpoints(self) -> np.ndarray:
        return self.paths[~self.flagged, -1]


def sample_starts(field: TwoSlitField, n: int, rng: np.random.Generator | None = None,
                  z: float = 0.0) -> np.ndarray:
    """Start points distributed as |psi(., z)|^2.

    With ``rng`` the points are i.i.d. draws; without it, the deterministic
    midpoint quantiles ``(i + 1/2) / n``.
    """
    x, cdf = field.cdf_grid(z)
    u = rng.random(n) if rng is not None else (np.arange(n) + 0.5) / n
    keep = np.concatenate(([True], np.diff(cdf) > 0))
    return np.sort(np.interp(u, cdf[keep], x[keep]))


def reconstruct_trajectories(field: TwoSlitField, start_points, z_planes=None,
                             rtol: float = 1e-9, atol: float = 1e-10,
                             node_amplitude: float = 1e-8) -> TrajectoryBundle:
    """Integrate ``d xi / dz = Re<P>_w(xi, z) / k`` from each start point.

    All trajectories are advanced together by an adaptive Runge-Kutta
    integrator.  A trajectory whose amplitude falls below `node_amplitude`
    at some plane is flagged and its later positions set to NaN.
    """
    starts = np.asarray(start_points, dtype=float)
    planes = np.asarray(field.z_planes if z_planes is None else z_planes, dtype=float)
    if np.any(np.diff(planes) <= 0):
        raise ValueError("z planes must be strictly increasing")

    z0 = planes[0]
    if np.any(np.abs(field.psi(starts, z0)) <= node_amplitude):
        raise NodePoint("a start point sits on a node of the field")

    def rhs(z, xi):
        p = field.psi(xi, z)
        safe = np.where(np.abs(p) > NODE_AMPLITUDE, p, NODE_AMPLITUDE)
        return np.imag(field.dpsi(xi, z) / safe) / field.k

    if len(planes) == 1:
        paths = starts[:, None].copy()
    else:
        sol = solve_ivp(rhs, (z0, planes[-1]), starts, method="DOP853",
                        t_eval=planes, rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"trajectory integration failed: {sol.message}")
        paths = sol.y

    amp = np.abs(field.psi(paths, planes[None, :]))
    hit = amp <= node_amplitude
    flagged = hit.any(axis=1)
    if flagged.any():
        paths = paths.copy()
        first = np.argmax(hit, axis=1)
        for i in np.nonzero(flagged)[0]:
            paths[i, first[i]:] = np.nan
    return TrajectoryBundle(starts, planes, paths, flagged)


def ks_distance(samples, field: TwoSlitField, z: float) -> float:
    """Kolmogorov-Smirnov distance between samples and the |psi(., z)|^2 law."""
    x, cdf = field.cdf_grid(z)
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    F = np.interp(s, x, cdf)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


# -- pointer readout on a transverse grid -------------------------------------


@dataclass(frozen=True)
class TransverseGrid:
    xi: np.ndarray
    momentum: sparse.csr_matrix
    """Hermitian central-difference momentum ``-i D``."""

    @property
    def spacing(self) -> float:
        return float(self.xi[1] - self.xi[0])


def transverse_grid(half_width: float, n: int) -> TransverseGrid:
    xi = np.linspace(-half_width, half_width, n)
    h = xi[1] - xi[0]
    off = np.full(n - 1, 1.0 / (2 * h))
    D = sparse.diags([-off, off], [-1, 1], format="csr")
    return TransverseGrid(xi, (-1j * D).tocsr())


@dataclass(frozen=True)
class PointerCheckRow:
    xi: float
    flagged: bool
    """sample too close to a node; numeric fields are NaN"""
    grid_ratio: float
    """(x0/kappa)(|<xi|Phi_phi>|^2 - |<xi|I>|^2)/|<xi|I>|^2, first order"""
    grid_ratio_refined: float
    """same on a grid with doubled density"""
    analytic: float
    """Im(psi'/psi) from the closed form"""


def _grid_ratios(field, z, grid, pointer, kappa, idx):
    I = field.psi(grid.xi, z) * np.sqrt(grid.spacing)
    PI = grid.momentum @ I
    readout = I - 1j * kappa / pointer.x0 * X_PI_EXPECTATION * PI
    ov = I[idx]
    delta = readout[idx] - ov
    p0 = np.abs(ov) ** 2
    p1 = np.abs(readout[idx]) ** 2 - np.abs(delta) ** 2
    return pointer.x0 / kappa * (p1 - p0) / p0


def twoslit_pointer_check(field: TwoSlitField, pointer: GaussianPointer, kappa: float,
                          xi_samples, z: float, n_grid: int = 4001,
                          node_fraction: float = 1e-6) -> list[PointerCheckRow]:
    """Weak momentum readout followed by position post-selection, on a grid.

    Samples are snapped to the nearest grid point.  The refined grid has
    ``2 n_grid - 1`` points and contains the coarse points, so both
    evaluations use the same sample positions.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    half = field.envelope_halfwidth(z)
    coarse = transverse_grid(half, n_grid)
    fine = transverse_grid(half, 2 * n_grid - 1)
    xs = np.asarray(xi_samples, dtype=float)
    idx = np.clip(np.rint((xs + half) / coarse.spacing).astype(int), 0, n_grid - 1)
    snapped = coarse.xi[idx]

    peak = np.abs(field.psi(coarse.xi, z)).max()
    amp = np.abs(field.psi(snapped, z))
    bad = amp <= node_fraction * peak

    r_coarse = _grid_ratios(field, z, coarse, pointer, kappa, idx)
    r_fine = _grid_ratios(field, z, fine, pointer, kappa, 2 * idx)
    rows = []
    for i, x in enumerate(snapped):
        if bad[i]:
            rows.append(PointerCheckRow(float(x), True, np.nan, np.nan, np.nan))
        else:
            rows.append(PointerCheckRow(float(x), False, float(r_coarse[i]), float(r_fine[i]),
                                        float(field.weak_momentum(x, z))))
    return rows


def weak_readout_intensity(field: TwoSlitField, xi, z: float, kappa: float, x0: float):
    """``|<xi|Phi_phi>|^2`` after a weak momentum readout (all orders in kappa)."""
    p = field.psi(xi, z)
    Pp = -1j * field.dpsi(xi, z)
    return np.abs(p - 1j * kappa / x0 * X_PI_EXPECTATION * Pp) ** 2


def extrapolated_intensity(field: TwoSlitField, xi, z: float, kappas, x0: float):
    """Linear extrapolation to kappa = 0 from two couplings."""
    k1, k2 = kappas
    i1 = weak_readout_intensity(field, xi, z, k1, x0)
    i2 = weak_readout_intensity(field, xi, z, k2, x0)
    return (k2 * i1 - k1 * i2) / (k2 - k1)
