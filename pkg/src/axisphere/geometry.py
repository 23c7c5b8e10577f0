"""Stereographic chart, radial profiles, and explicit map constructions.

An n-axially symmetric sphere-valued map is determined by a single chart
profile f: in cylindrical coordinates (r, theta, z),

    u(r, theta, z) = Pi^{-1}( f(r, z) * (cos(n theta), sin(n theta)) ),

where Pi is the stereographic projection from the south pole.  Internally
profiles are stored as the image colatitude

    phi = 2 * arctan(f)  in [0, pi],

because f = +inf on points mapping to the south pole would make chart-value
grids singular, while phi stays bounded.  All energy formulas used elsewhere
are written in the phi variable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

__all__ = [
    "INFINITY",
    "POINT_AT_INFINITY",
    "SpherePoint",
    "RadialProfile",
    "ConeDipoleMap",
    "DegreeResult",
    "UnderResolvedQuadratureError",
    "is_at_infinity",
    "stereo_project",
    "stereo_inverse",
    "chart_to_colatitude",
    "colatitude_to_chart",
    "geometric_grid",
    "u0_profile",
    "u_eps_profile",
    "tilde_u0_value",
    "degree_from_flux",
]

#: Marker for an infinite chart value (image = south pole).  A value, not an error.
INFINITY: float = math.inf

#: Marker for the image of the south pole under stereographic projection.
POINT_AT_INFINITY: tuple[float, float] = (math.inf, math.inf)

_UNIT_NORM_TOL = 1e-12


class UnderResolvedQuadratureError(RuntimeError):
    """Raised when a degree quadrature is too far from an integer."""


def is_at_infinity(w: tuple[float, float]) -> bool:
    """True if the planar point is the point at infinity."""
    return not (math.isfinite(w[0]) and math.isfinite(w[1]))


@dataclass(frozen=True)
class SpherePoint:
    """A point on the unit sphere, validated to |p| = 1 within 1e-12."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        nrm2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(nrm2 - 1.0) > _UNIT_NORM_TOL:
            raise ValueError(f"point not on the unit sphere: |p|^2 = {nrm2!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def colatitude(self) -> float:
        """Angle from the north pole (0, 0, 1), in [0, pi]."""
        return math.acos(min(1.0, max(-1.0, self.z)))


def stereo_project(p: SpherePoint) -> tuple[float, float]:
    """Stereographic projection (x, y, z) -> (x, y)/(1 + z).

    The south pole maps to POINT_AT_INFINITY.
    """
    denom = 1.0 + p.z
    if denom == 0.0:
        return POINT_AT_INFINITY
    return (p.x / denom, p.y / denom)


def stereo_inverse(w: tuple[float, float]) -> SpherePoint:
    """Inverse stereographic projection; POINT_AT_INFINITY -> (0, 0, -1)."""
    if is_at_infinity(w):
        return SpherePoint(0.0, 0.0, -1.0)
    X, Y = float(w[0]), float(w[1])
    rho2 = X * X + Y * Y
    denom = 1.0 + rho2
    return SpherePoint(2.0 * X / denom, 2.0 * Y / denom, (1.0 - rho2) / denom)


def chart_to_colatitude(f: float) -> float:
    """Colatitude phi with tan(phi/2) = f.  Accepts f = inf (-> pi)."""
    if f < 0.0:
        raise ValueError(f"chart value must be nonnegative, got {f!r}")
    return 2.0 * math.atan(f)


def colatitude_to_chart(phi: float) -> float:
    """Chart value f = tan(phi/2); phi = pi maps exactly to inf."""
    if not 0.0 <= phi <= math.pi:
        raise ValueError(f"colatitude must lie in [0, pi], got {phi!r}")
    if phi == math.pi:
        return INFINITY
    return math.tan(0.5 * phi)


def geometric_grid(r_min: float = 1e-6, r_max: float = 1.0, nodes: int = 2048) -> np.ndarray:
    """Log-spaced radial grid; resolves power-law behaviour near the axis."""
    if not (0.0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    if nodes < 2:
        raise ValueError("need at least 2 nodes")
    return np.geomspace(r_min, r_max, nodes)


@dataclass(frozen=True)
class RadialProfile:
    """A sampled colatitude profile phi(r) of an n-axially symmetric map.

    Attributes
    ----------
    grid :
        Strictly increasing radii, at least 2 nodes, all positive (a leading
        node at r = 0 is allowed for fields reaching the axis).
    phi :
        Colatitude values in [0, pi] at each node.
    n :
        Winding number of the map, a positive integer.
    """

    grid: np.ndarray
    phi: np.ndarray
    n: int

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be 1-D with at least 2 nodes")
        if phi.shape != grid.shape:
            raise ValueError("phi and grid must have the same shape")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("grid must be strictly increasing")
        if grid[0] < 0.0:
            raise ValueError("radii must be nonnegative")
        if np.any(phi < -1e-12) or np.any(phi > math.pi + 1e-12):
            raise ValueError("phi values must lie in [0, pi]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "phi", np.clip(phi, 0.0, math.pi))
        if int(self.n) < 1:
            raise ValueError("winding number n must be >= 1")
        object.__setattr__(self, "n", int(self.n))

    def chart_values(self) -> np.ndarray:
        """Chart values f = tan(phi/2); pi maps to inf."""
        f = np.tan(0.5 * self.phi)
        f[self.phi == math.pi] = INFINITY
        return f

    def to_csv(self, path) -> None:
        """Write the profile as CSV with header ``r,phi`` (17 significant digits)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "phi"])
            for r, p in zip(self.grid, self.phi):
                writer.writerow([f"{r:.17g}", f"{p:.17g}"])

    @classmethod
    def from_csv(cls, path, n: int) -> "RadialProfile":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header] != ["r", "phi"]:
                raise ValueError(f"unexpected CSV header {header!r}")
            rows = [(float(a), float(b)) for a, b in reader]
        grid = np.array([a for a, _ in rows])
        phi = np.array([b for _, b in rows])
        return cls(grid=grid, phi=phi, n=n)


def u0_profile(alpha: float, n: int, grid: np.ndarray) -> RadialProfile:
    """Profile of the smooth map with chart value f(r) = alpha * r^n."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    grid = np.asarray(grid, dtype=float)
    phi = 2.0 * np.arctan(alpha * grid ** n)
    return RadialProfile(grid=grid, phi=phi, n=n)


def u_eps_profile(alpha: float, n: int, eps: float, grid: np.ndarray) -> RadialProfile:
    """Profile of the regularized map: conformal outside radius eps,
    anti-conformal inside.

    f(r) = alpha r^n for r >= eps and f(r) = alpha eps^{2n} r^{-n} for
    r <= eps; the two branches agree at r = eps.  The radius eps is inserted
    into the grid if absent, so each branch is sampled monotonically.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    grid = np.asarray(grid, dtype=float)
    if eps not in grid:
        grid = np.sort(np.append(grid, eps))
    f = np.where(grid >= eps, alpha * grid ** n, alpha * eps ** (2 * n) * grid ** (-n))
    return RadialProfile(grid=grid, phi=2.0 * np.arctan(f), n=n)


@dataclass(frozen=True)
class ConeDipoleMap:
    """The cone-modified map: equal to the smooth f = alpha r^n map outside
    the two axis cones |z| > 1, r < |z| - 1, and anti-conformal inside them.

    Inside the upper cone the chart value is alpha (z-1)^{2n} r^{-n}; the
    lower cone is the mirror image z -> -z.  The map is continuous on the
    closed ball of radius 2 except at the two singular points (0, 0, +-1),
    which carry degrees -+ n.
    """

    alpha: float
    n: int

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 0.25:
            raise ValueError("alpha must lie in (0, 1/4]")
        if int(self.n) < 1:
            raise ValueError("winding number n must be >= 1")
        object.__setattr__(self, "n", int(self.n))

    def chart_value(self, r: float, z: float) -> float:
        """Chart magnitude f(r, z); inf on the axis inside the cones."""
        if r < 0.0:
            raise ValueError("radius must be nonnegative")
        if r * r + z * z > 4.0 + 1e-12:
            raise ValueError("point outside the ball of radius 2")
        az = abs(z)
        if r == 0.0 and az == 1.0:
            raise ValueError("evaluation at a singular point (0, 0, +-1)")
        if az > 1.0 and r < az - 1.0:
            if r == 0.0:
                return INFINITY
            return self.alpha * (az - 1.0) ** (2 * self.n) * r ** (-self.n)
        return self.alpha * r ** self.n

    def colatitude(self, r: float, z: float) -> float:
        return chart_to_colatitude(self.chart_value(r, z))

    def value(self, r: float, theta: float, z: float) -> SpherePoint:
        f = self.chart_value(r, z)
        if math.isinf(f):
            return SpherePoint(0.0, 0.0, -1.0)
        return stereo_inverse((f * math.cos(self.n * theta), f * math.sin(self.n * theta)))


def tilde_u0_value(cone_map: ConeDipoleMap, r: float, theta: float, z: float) -> SpherePoint:
    """Evaluate the cone-modified map at cylindrical coordinates (r, theta, z)."""
    return cone_map.value(r, theta, z)


@dataclass(frozen=True)
class DegreeResult:
    """Degree of a map restricted to a sphere, with quadrature diagnostics."""

    degree: int
    residual: float
    raw: float


def degree_from_flux(
    colatitude_fn: Callable[[float, float], float],
    winding: int,
    center: tuple[float, float, float],
    radius: float,
    panels: int = 1024,
) -> DegreeResult:
    """Topological degree of an axially symmetric map on a sphere, via flux.

    The flux of the pullback field through the sphere, divided by 4*pi, equals
    the degree of the restriction.  For a map with image colatitude Phi and
    longitude (winding * theta), the surface integral collapses to the one
    dimensional colatitude integral

        deg = (winding / 2) * Int_0^pi sin(Phi(beta)) Phi'(beta) d(beta),

    where beta parametrizes the sphere around ``center`` from its north pole.
    The integral is evaluated by composite Simpson quadrature with ``panels``
    panels, Phi' by second-order finite differences.

    Parameters
    ----------
    colatitude_fn :
        Callable (r, z) -> image colatitude at the meridian point (r, 0, z).
    winding :
        Winding number of the map in the angular direction.
    center :
        Sphere center; must lie on the symmetry axis (x = y = 0).
    radius :
        Sphere radius; the map must be smooth on the sphere.
    panels :
        Number of Simpson panels (made even if odd).

    Raises
    ------
    UnderResolvedQuadratureError
        If the pre-rounding residual exceeds 0.1.
    """
    cx, cy, cz = center
    if abs(cx) > 1e-12 or abs(cy) > 1e-12:
        raise ValueError("center must lie on the symmetry axis for the 1-D reduction")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    panels = int(panels)
    if panels % 2:
        panels += 1
    beta = np.linspace(0.0, math.pi, panels + 1)
    phi = np.array(
        [colatitude_fn(radius * math.sin(b), cz + radius * math.cos(b)) for b in beta]
    )
    dphi = np.gradient(phi, beta, edge_order=2)
    raw = 0.5 * winding * float(simpson(np.sin(phi) * dphi, x=beta))
    degree = int(round(raw))
    residual = abs(raw - degree)
    if residual > 0.1:
        raise UnderResolvedQuadratureError(
            f"degree quadrature residual {residual:.3g} > 0.1; increase panels"
        )
    return DegreeResult(degree=degree, residual=residual, raw=raw)
