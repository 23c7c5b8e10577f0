"""Constrained profile optimization for the conformality-defect functional.

On an annulus [s, 1], the defect of a chart profile g is controlled by

    I(g) = Int_s^1 ( |g'(r)| - (n/r) g(r) )^2 r dr,

which vanishes exactly on the conformal branches g = c r^{+-n}.  Minimizing
I over the cone of profiles pinned to g(s) = b, g(s_tilde) = a, g(1) = alpha
and monotone on each side of s_tilde (decreasing, then increasing) has an
explicit piecewise solution: an arc of the two-parameter family
c_+ r^n + c_- r^{-n} descending from b, a flat plateau at the minimum value
a, and a symmetric arc rising to alpha.  The arc endpoints t0 and tau0 where
the arcs meet the plateau with zero slope have closed forms, and the plateau
alone forces

    I(g) >= n^2 a^2 log(tau0 / t0),

the logarithmic gap that grows without bound as alpha -> 0.

The numerical route discretizes I in log-radius (where the arc family is a
linear combination of e^{+-n x}) and runs an accelerated projected descent,
projecting each monotone segment by pool-adjacent-violators isotonic
regression with re-pinned endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression

__all__ = [
    "ClosedFormProfile",
    "ConeConstraint",
    "PiecewiseMinimizer",
    "MinimizeIResult",
    "GapBound",
    "eta_profile",
    "zeta_profile",
    "compute_t0",
    "compute_tau0",
    "g0_construct",
    "I_functional",
    "weighted_gap",
    "minimize_I_numerical",
    "gap_lower_bound",
]


@dataclass(frozen=True)
class ClosedFormProfile:
    """A profile c_plus r^n + c_minus r^{-n} on [r_lo, r_hi].

    The family solves the stationarity equation -(r g')' + (n^2/r) g = 0 of
    the defect functional, so every member has identically zero residual.
    """

    c_plus: float
    c_minus: float
    r_lo: float
    r_hi: float
    n: int

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.c_plus * r ** self.n + self.c_minus * r ** (-self.n)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        n = self.n
        return n * self.c_plus * r ** (n - 1) - n * self.c_minus * r ** (-n - 1)

    def second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        n = self.n
        return (n * (n - 1) * self.c_plus * r ** (n - 2)
                + n * (n + 1) * self.c_minus * r ** (-n - 2))

    def el_residual(self, r):
        """-(r g')' + (n^2/r) g, from the analytic derivatives (==0)."""
        r = np.asarray(r, dtype=float)
        return (-self.derivative(r) - r * self.second_derivative(r)
                + self.n ** 2 / r * self.value(r))

    def defect_integral(self, decreasing: bool) -> float:
        """Exact Int (|g'| - (n/r) g)^2 r dr over [r_lo, r_hi].

        On an arc with g' <= 0 the integrand reduces to (2 n c_plus r^{n-1})^2 r,
        on one with g' >= 0 to (2 n c_minus r^{-n-1})^2 r.
        """
        n = self.n
        if decreasing:
            return 2.0 * n * self.c_plus ** 2 * (self.r_hi ** (2 * n) - self.r_lo ** (2 * n))
        return 2.0 * n * self.c_minus ** 2 * (self.r_lo ** (-2 * n) - self.r_hi ** (-2 * n))


def eta_profile(t: float, s: float, a: float, b: float, n: int) -> ClosedFormProfile:
    """Descending arc with eta(s) = b and eta(t) = a."""
    if not 0.0 < s < t:
        raise ValueError(f"need 0 < s < t, got s={s}, t={t}")
    if a <= 0.0 or b <= 0.0:
        raise ValueError("endpoint values must be positive")
    den = t ** (2 * n) - s ** (2 * n)
    c_plus = (a * t ** n - b * s ** n) / den
    c_minus = s ** n * t ** n * (b * t ** n - a * s ** n) / den
    return ClosedFormProfile(c_plus=c_plus, c_minus=c_minus, r_lo=s, r_hi=t, n=n)


def zeta_profile(tau: float, a: float, alpha: float, n: int) -> ClosedFormProfile:
    """Ascending arc with zeta(tau) = a and zeta(1) = alpha."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"need 0 < tau < 1, got tau={tau}")
    if a <= 0.0 or alpha <= 0.0:
        raise ValueError("endpoint values must be positive")
    den = 1.0 - tau ** (2 * n)
    c_plus = (alpha - a * tau ** n) / den
    c_minus = tau ** n * (a - alpha * tau ** n) / den
    return ClosedFormProfile(c_plus=c_plus, c_minus=c_minus, r_lo=tau, r_hi=1.0, n=n)


def compute_t0(s: float, a: float, b: float, n: int) -> float:
    """Radius t0 > s at which the descending arc from (s, b) to (t0, a) has
    zero slope: t0^n = (b/a) (1 + sqrt(1 - a^2/b^2)) s^n.

    The discarded quadratic root lies at or below s.  Requires 0 < a <= b;
    a = 0 is rejected (t0 would be infinite).
    """
    if a <= 0.0:
        raise ValueError("a must be positive (a = 0 pushes t0 to infinity)")
    if a > b:
        raise ValueError(f"need a <= b, got a={a} > b={b}")
    ratio = a / b
    return s * ((b / a) * (1.0 + math.sqrt(max(0.0, 1.0 - ratio * ratio)))) ** (1.0 / n)


def compute_tau0(a: float, alpha: float, n: int) -> float:
    """Radius tau0 <= 1 at which the ascending arc to (1, alpha) leaves the
    plateau with zero slope: tau0^n = (alpha/a) (1 - sqrt(1 - a^2/alpha^2)).

    The minus root keeps tau0 <= 1, with equality if and only if a = alpha.
    """
    if a <= 0.0:
        raise ValueError("a must be positive")
    if a > alpha:
        raise ValueError(f"need a <= alpha, got a={a} > alpha={alpha}")
    beta = (a / alpha) ** 2
    # 1 - sqrt(1 - beta) evaluated cancellation-free
    root = beta / (1.0 + math.sqrt(max(0.0, 1.0 - beta)))
    return ((alpha / a) * root) ** (1.0 / n)


@dataclass(frozen=True)
class ConeConstraint:
    """The admissible cone: g(s) = b, g(s_tilde) = a, g(1) = alpha, with g
    decreasing on [s, s_tilde] and increasing on [s_tilde, 1].

    b is the fixed crossing level 1/2 (overridable only for sensitivity
    studies); the interior minimum a satisfies 0 < a <= alpha <= 1/4.
    s_tilde = 1 forces a = alpha (both pin g at r = 1).
    """

    s: float
    s_tilde: float
    a: float
    alpha: float
    b: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.s < self.s_tilde <= 1.0:
            raise ValueError(f"need 0 < s < s_tilde <= 1, got s={self.s}, s_tilde={self.s_tilde}")
        if not 0.0 < self.a <= self.alpha:
            raise ValueError(f"need 0 < a <= alpha, got a={self.a}, alpha={self.alpha}")
        if self.alpha > 0.25 + 1e-12:
            raise ValueError(f"alpha must not exceed 1/4, got {self.alpha}")
        if self.alpha >= self.b:
            raise ValueError(f"alpha={self.alpha} must stay below the crossing level b={self.b}")
        if self.s_tilde == 1.0 and abs(self.a - self.alpha) > 1e-12:
            raise ValueError("s_tilde = 1 pins g(1) twice; requires a = alpha")


@dataclass(frozen=True)
class PiecewiseMinimizer:
    """The explicit minimizer of I over a constraint cone.

    Pieces, in order: a descending arc on [s, arc_end], a plateau at the
    value a on [arc_end, plateau_end], and (unless it is empty) an ascending
    arc on [plateau_end, 1].  ``t0``/``tau0`` are the unconstrained zero-slope
    radii; the realized breakpoints clip them to the cone.
    """

    constraint: ConeConstraint
    n: int
    eta: ClosedFormProfile
    zeta: ClosedFormProfile | None
    arc_end: float
    plateau_end: float
    t0: float
    tau0: float

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, self.constraint.a, dtype=float)
        left = r <= self.arc_end
        out[left] = self.eta.value(r[left])
        if self.zeta is not None:
            right = r >= self.plateau_end
            out[right] = self.zeta.value(r[right])
        return out

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        left = r < self.arc_end
        out[left] = self.eta.derivative(r[left])
        if self.zeta is not None:
            right = r > self.plateau_end
            out[right] = self.zeta.derivative(r[right])
        return out

    def sample(self, grid: np.ndarray) -> np.ndarray:
        return self.value(np.asarray(grid, dtype=float))

    def plateau_length_log(self) -> float:
        return math.log(self.plateau_end / self.arc_end)

    def objective_closed_form(self) -> float:
        """I at the minimizer: exact arc integrals plus the plateau term
        n^2 a^2 log(plateau_end / arc_end)."""
        n, a = self.n, self.constraint.a
        total = self.eta.defect_integral(decreasing=True)
        if self.plateau_end > self.arc_end:
            total += n * n * a * a * math.log(self.plateau_end / self.arc_end)
        if self.zeta is not None:
            total += self.zeta.defect_integral(decreasing=False)
        return total


def g0_construct(c: ConeConstraint, n: int) -> PiecewiseMinimizer:
    """Build the explicit minimizer of I over the cone.

    The descending arc stops with zero slope at t0 when t0 < s_tilde and is
    otherwise the endpoint arc to s_tilde (the weak inequality t0 >= s_tilde
    takes the endpoint branch); symmetrically for the ascending arc at tau0,
    with tau0 = 1 (a = alpha) leaving the plateau running to the boundary.
    """
    s, st, a, alpha, b = c.s, c.s_tilde, c.a, c.alpha, c.b
    t0 = compute_t0(s, a, b, n)
    if st == 1.0:
        tau0 = 1.0
    else:
        tau0 = compute_tau0(a, alpha, n)

    if t0 >= st:
        eta = eta_profile(st, s, a, b, n)
        arc_end = st
    else:
        eta = eta_profile(t0, s, a, b, n)
        arc_end = t0

    zeta = None
    plateau_end = 1.0
    if st < 1.0:
        if tau0 <= st:
            zeta = zeta_profile(st, a, alpha, n)
            plateau_end = st
        elif tau0 < 1.0:
            zeta = zeta_profile(tau0, a, alpha, n)
            plateau_end = tau0
        # tau0 == 1 (a == alpha): plateau to the boundary, no arc

    return PiecewiseMinimizer(
        constraint=c, n=n, eta=eta, zeta=zeta,
        arc_end=arc_end, plateau_end=plateau_end, t0=t0, tau0=tau0,
    )


# ---------------------------------------------------------------------------
# Discretized functional (log-radius cells) and projected descent
# ---------------------------------------------------------------------------

def I_functional(r: np.ndarray, g: np.ndarray, n: int,
                 interval: tuple[float, float] | None = None) -> float:
    """Discrete I on a sampled profile: in x = log r the integrand becomes
    (|dg/dx| - n g)^2 dx, evaluated per cell with one-sided differences and
    midpoint values of g."""
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    if interval is not None:
        mask = (r >= interval[0] * (1 - 1e-12)) & (r <= interval[1] * (1 + 1e-12))
        r, g = r[mask], g[mask]
    dx = np.diff(np.log(r))
    gm = (g[:-1] + g[1:]) / 2.0
    return float(np.sum((np.abs(np.diff(g)) / dx - n * gm) ** 2 * dx))


def weighted_gap(r: np.ndarray, g: np.ndarray, n: int) -> float:
    """Conformality defect E - A of the map generated by the chart profile g:
    4 pi * Int (|g'| - (n/r) g)^2 / (1 + g^2)^2 r dr, on the same log-radius
    cells as :func:`I_functional`.

    Since (1 + g^2)^2 <= 4 for g <= 1, each cell dominates pi times the
    corresponding I cell, so weighted_gap >= pi * I_functional cell by cell.
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    dx = np.diff(np.log(r))
    gm = (g[:-1] + g[1:]) / 2.0
    cells = (np.abs(np.diff(g)) / dx - n * gm) ** 2 / (1.0 + gm * gm) ** 2 * dx
    return 4.0 * math.pi * float(np.sum(cells))


def _segment_objective_grad(dx: np.ndarray, g: np.ndarray, n: int, sign: float):
    """Objective and gradient of the fixed-sign quadratic
    sum ((sign * dg/dx) - n gbar)^2 dx on one monotone segment."""
    dg = np.diff(g)
    gm = (g[:-1] + g[1:]) / 2.0
    e = sign * dg / dx - n * gm
    obj = float(np.sum(e * e * dx))
    coef = 2.0 * e
    grad = np.zeros_like(g)
    grad[:-1] += coef * (-sign - n * dx / 2.0)
    grad[1:] += coef * (sign - n * dx / 2.0)
    return obj, grad


def _project_segment(g: np.ndarray, lo_val: float, hi_val: float, decreasing: bool) -> np.ndarray:
    """Euclidean projection onto {monotone segment, pinned endpoints}.

    Interior nodes are projected by pool-adjacent-violators and clipped into
    the pinned range (bounded isotonic regression equals the clipped
    unbounded one); the endpoints are re-pinned exactly.
    """
    out = g.copy()
    if g.size <= 2:
        out[0], out[-1] = lo_val, hi_val
        return out
    interior = isotonic_regression(g[1:-1], increasing=not decreasing).x
    lo, hi = (min(lo_val, hi_val), max(lo_val, hi_val))
    out[1:-1] = np.clip(interior, lo, hi)
    out[0], out[-1] = lo_val, hi_val
    return out


@dataclass(frozen=True)
class MinimizeIResult:
    r: np.ndarray
    g: np.ndarray
    objective: float
    converged: bool
    iterations: int
    residual: float


def _solve_segment_multigrid(
    r_lo: float,
    r_hi: float,
    lo_val: float,
    hi_val: float,
    n: int,
    n_nodes: int,
    max_iter: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, float, bool, int, float]:
    """Solve a segment through a coarse-to-fine grid pyramid.

    Each level warm-starts from the interpolated coarser solution, which
    keeps the accelerated-descent iteration counts flat in the grid size.
    """
    counts = [n_nodes]
    while counts[-1] > 33:
        counts.append(counts[-1] // 2 + 1)
    counts.reverse()
    g_prev = None
    x_prev = None
    total_it = 0
    for count in counts:
        r_nodes = np.geomspace(r_lo, r_hi, count)
        x_nodes = np.log(r_nodes)
        g_init = None if g_prev is None else np.interp(x_nodes, x_prev, g_prev)
        g, obj, conv, it, res = _solve_segment(
            r_nodes, lo_val, hi_val, n, decreasing=lo_val >= hi_val,
            max_iter=max_iter, tol=tol, g_init=g_init)
        total_it += it
        g_prev, x_prev = g, x_nodes
    return r_nodes, g, obj, conv, total_it, res


def _segment_objective(dx: np.ndarray, g: np.ndarray, n: int, sign: float) -> float:
    dg = np.diff(g)
    gm = (g[:-1] + g[1:]) / 2.0
    e = sign * dg / dx - n * gm
    return float(np.sum(e * e * dx))


def _solve_segment(
    r_nodes: np.ndarray,
    lo_val: float,
    hi_val: float,
    n: int,
    decreasing: bool,
    max_iter: int,
    tol: float,
    armijo: float = 1e-4,
    g_init: np.ndarray | None = None,
) -> tuple[np.ndarray, float, bool, int, float]:
    """Accelerated projected descent on one monotone segment.

    Backtracking line search with the given Armijo constant; Nesterov
    momentum with restart on objective increase keeps iteration counts
    practical on fine grids.  Stops when the relative objective decrease
    falls below ``tol`` (with a short patience window) or at ``max_iter``.
    """
    dx = np.diff(np.log(r_nodes))
    m = r_nodes.size
    x_log = np.log(r_nodes)
    if g_init is None:
        # feasible start: linear interpolation in log radius
        g = lo_val + (hi_val - lo_val) * (x_log - x_log[0]) / (x_log[-1] - x_log[0])
    else:
        g = g_init.copy()
    g = _project_segment(g, lo_val, hi_val, decreasing)
    sign = -1.0 if decreasing else 1.0

    obj, grad = _segment_objective_grad(dx, g, n, sign)
    if m <= 2:
        return g, obj, True, 0, 0.0

    # a segment this far below its natural scale (n * peak value)^2 * length
    # is numerically conformal; treat it as converged
    obj_floor = 1e-8 * (n * max(abs(lo_val), abs(hi_val))) ** 2 * (x_log[-1] - x_log[0])

    y = g.copy()
    theta = 1.0
    step = 1.0 / (4.0 / np.min(dx) ** 2 + n * n)  # ~1/L for the quadratic
    stalled = 0
    residual = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        obj_y, grad_y = _segment_objective_grad(dx, y, n, sign)
        t = step
        while True:
            cand = _project_segment(y - t * grad_y, lo_val, hi_val, decreasing)
            obj_c = _segment_objective(dx, cand, n, sign)
            d = cand - y
            if obj_c <= obj_y + armijo * float(grad_y @ d) or t < 1e-18:
                break
            t /= 2.0
        step = min(t * 1.3, 1e6)

        if obj_c <= obj:
            theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            momentum = (theta - 1.0) / theta_new
            y = cand + momentum * (cand - g)
            y = _project_segment(y, lo_val, hi_val, decreasing)
            theta = theta_new
            residual = (obj - obj_c) / max(obj_c, 1e-300)
            g, obj = cand, obj_c
        else:  # momentum overshoot: restart from the best point
            y = g.copy()
            theta = 1.0
            residual = math.inf
            continue

        if obj <= obj_floor:
            return g, obj, True, it, 0.0
        if residual < tol:
            stalled += 1
            if stalled >= 3:
                return g, obj, True, it, residual
        else:
            stalled = 0
    return g, obj, False, it, residual


def minimize_I_numerical(
    c: ConeConstraint,
    n: int,
    nodes: int = 256,
    max_iter: int = 100_000,
    tol: float = 1e-10,
) -> MinimizeIResult:
    """Minimize the discretized I over the discretized cone.

    The two monotone segments decouple (all three pin values are endpoints),
    so each is solved independently on its own log-spaced grid and the
    sampled profiles are joined at s_tilde.  The reported objective is the
    discrete I on the joined grid, comparable to the explicit minimizer
    sampled on the same nodes.
    """
    if nodes < 64:
        raise ValueError("need at least 64 nodes")
    s, st, a, alpha, b = c.s, c.s_tilde, c.a, c.alpha, c.b
    len1 = math.log(st / s)
    len2 = math.log(1.0 / st)
    if len2 == 0.0:
        n1, n2 = nodes + 1, 0
    else:
        n1 = max(9, int(round((nodes + 1) * len1 / (len1 + len2))))
        n1 = min(n1, nodes + 1 - 9)
        n2 = nodes + 1 - n1

    r1, g1, obj1, conv1, it1, res1 = _solve_segment_multigrid(
        s, st, b, a, n, n1, max_iter, tol)
    if n2 > 0:
        r2, g2, obj2, conv2, it2, res2 = _solve_segment_multigrid(
            st, 1.0, a, alpha, n, n2 + 1, max_iter, tol)
        r_all = np.concatenate([r1, r2[1:]])
        g_all = np.concatenate([g1, g2[1:]])
        return MinimizeIResult(
            r=r_all, g=g_all, objective=obj1 + obj2,
            converged=conv1 and conv2, iterations=max(it1, it2),
            residual=max(res1 if math.isfinite(res1) else 0.0,
                         res2 if math.isfinite(res2) else 0.0),
        )
    return MinimizeIResult(r=r1, g=g1, objective=obj1, converged=conv1,
                           iterations=it1, residual=res1 if math.isfinite(res1) else 0.0)


# ---------------------------------------------------------------------------
# The logarithmic lower bound and the full gap chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapBound:
    """Bound chain at one constraint cone.

    ``log_bound`` is pi n^2 a^2 log(tau0/t0) (0 and ``vacuous`` when
    t0 >= tau0); ``gap`` is the conformality defect E - A of the map
    generated by the explicit minimizer; ``rhs`` is the replacement-gain
    threshold 8 pi n a^2/(1+a^2).  ``ratio_bound`` bounds t0/tau0 by
    (4 b (s/a)^n alpha a^{n-2})^{1/n}.
    """

    t0: float
    tau0: float
    vacuous: bool
    log_bound: float
    I_closed: float
    gap: float
    rhs: float
    ratio: float
    ratio_bound: float

    @property
    def holds_fast(self) -> bool:
        """Sufficient condition: the log bound alone beats the threshold."""
        return self.log_bound > self.rhs

    @property
    def holds(self) -> bool:
        """The full inequality gap > rhs."""
        return self.gap > self.rhs


def gap_lower_bound(c: ConeConstraint, n: int, check_nodes: int = 16385) -> GapBound:
    """Evaluate the bound chain at one cone.

    Computes t0, tau0 and the plateau bound pi n^2 a^2 log(tau0/t0), samples
    the explicit minimizer on a fine grid, and verifies
    gap >= pi I >= log_bound before returning (a failure indicates an
    internal inconsistency and raises).
    """
    g0 = g0_construct(c, n)
    t0, tau0 = g0.t0, g0.tau0
    a, alpha, s, b = c.a, c.alpha, c.s, c.b
    vacuous = t0 >= tau0
    log_bound = 0.0 if vacuous else math.pi * n * n * a * a * math.log(tau0 / t0)

    grid = np.geomspace(s, 1.0, check_nodes)
    if c.s_tilde not in grid:
        grid = np.sort(np.append(grid, c.s_tilde))
    g_sampled = g0.sample(grid)
    I_disc = I_functional(grid, g_sampled, n)
    gap = weighted_gap(grid, g_sampled, n)
    rhs = 8.0 * math.pi * n * a * a / (1.0 + a * a)

    if gap < math.pi * I_disc - 1e-8 or math.pi * I_disc < log_bound - 1e-8:
        raise RuntimeError("bound chain violated; inconsistent discretization")

    ratio = t0 / tau0
    ratio_bound = (4.0 * b * (s / a) ** n * alpha * a ** (n - 2)) ** (1.0 / n)
    return GapBound(
        t0=t0, tau0=tau0, vacuous=vacuous, log_bound=log_bound,
        I_closed=g0.objective_closed_form(), gap=gap, rhs=rhs,
        ratio=ratio, ratio_bound=ratio_bound,
    )
