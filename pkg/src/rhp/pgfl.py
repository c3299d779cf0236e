"""Probability generating functionals: G[z] = E[prod_i z(t_i)].

The cluster p.g.fl. rooted at x, u(x) = G_c[z(x + .)|0], is the unique
fixed point of

    u(x) = z(x) * exp( int_0^inf (u(x+y) - 1) h(y) dy ),

solved here by fixed-point iteration from u = 1 (contraction factor alpha).
For test functions that equal 1 beyond a bound b the integrand vanishes
beyond b, so the solve lives on [0, b]; for constant z the fixed point is the
scalar pi = z0 * exp(alpha (pi - 1)).

Composition gives process-level functionals: the truncated renewal
expansion sums ordered-arrival integrals with the survival factor
(1 - F(T - s_n)), the stationary expansion accumulates

    1 + sum_k m * int_{t_1<...<t_k} prod_i (u(t_i) - 1) phi-chain dt,

and a Poisson centre collapses to the Hawkes-Oakes closed form
exp{ mu * int (u - 1) }.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cluster import simulate_cluster
from .distributions import ExcitationKernel, RenewalModel, kernel_mass
from .errors import ConvergenceError, InsufficientDataError, RhpError
from .renewal import RenewalTable, _conv_trapz, convolution_cdfs, renewal_table
from .simulate import simulate_rhp_cluster, simulate_rhp_stationary


class TestFunction:
    """Test function z with values in (0, 1], equal to 1 outside its support.

    kinds: "constant" (z = z0 everywhere, unbounded support), "step"
    (z = z0 on the half-open [a, b), 1 elsewhere, so z = 1 from the support
    bound onward), "tabulated" (linear interpolation on a grid, 1 beyond it).
    """

    def __init__(self, kind, z0=None, a=None, b=None, grid=None, values=None):
        self.kind = kind
        self.z0 = z0
        self.a = a
        self.b = b
        self.grid = None if grid is None else np.asarray(grid, dtype=float)
        self.values = None if values is None else np.asarray(values, dtype=float)

    @classmethod
    def constant(cls, z0: float) -> "TestFunction":
        _check_unit_interval(z0)
        return cls("constant", z0=float(z0))

    @classmethod
    def step(cls, z0: float, a: float, b: float) -> "TestFunction":
        _check_unit_interval(z0)
        if not (0 <= a < b):
            raise ValueError("step needs 0 <= a < b")
        return cls("step", z0=float(z0), a=float(a), b=float(b))

    @classmethod
    def tabulated(cls, grid, values) -> "TestFunction":
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise ValueError("grid must be strictly increasing and nonnegative")
        for v in values:
            _check_unit_interval(v)
        return cls("tabulated", grid=grid, values=values)

    @property
    def unbounded_support(self) -> bool:
        return self.kind == "constant"

    @property
    def support_bound(self):
        """b such that z = 1 beyond b, or None for constant z."""
        if self.kind == "constant":
            return None
        return self.b if self.kind == "step" else float(self.grid[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            out = np.full_like(x, self.z0)
        elif self.kind == "step":
            out = np.where((x >= self.a) & (x < self.b), self.z0, 1.0)
        else:
            out = np.interp(x, self.grid, self.values, left=1.0, right=1.0)
            out = np.where((x < self.grid[0]) | (x > self.grid[-1]), 1.0, out)
        return float(out) if out.ndim == 0 else out


def _check_unit_interval(v):
    if not (0.0 < v <= 1.0):
        raise ValueError(f"test-function values must lie in (0, 1], got {v}")


@dataclass
class PgflSolution:
    """u on a grid over [0, b]; u = tail_value beyond the grid (1 for bounded z)."""

    grid: np.ndarray
    u_values: np.ndarray
    tail_value: float
    residual: float
    iterations: int
    constant: bool = False
    residual_history: list = field(default_factory=list)

    def u_at(self, x):
        if self.constant:
            out = np.full_like(np.asarray(x, dtype=float), self.tail_value)
            return float(out) if out.ndim == 0 else out
        out = np.interp(x, self.grid, self.u_values, right=self.tail_value)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def value_at_zero(self) -> float:
        return float(self.u_values[0])


def solve_cluster_pgfl(
    kernel: ExcitationKernel,
    z: TestFunction,
    tol: float = 1e-10,
    grid_step: float | None = None,
    max_iter: int = 100_000,
) -> PgflSolution:
    """Fixed-point solve of the cluster p.g.fl. equation.

    Constant z reduces to the scalar fixed point; otherwise u is iterated on
    a uniform grid over [0, b] with trapezoid quadrature (the u = 1 tail
    contributes exactly zero, so truncation at b is closed-form, not an
    approximation).
    """
    alpha = kernel_mass(kernel)
    if z.unbounded_support:
        u = 1.0
        history = []
        for it in range(1, max_iter + 1):
            u_new = z.z0 * math.exp(alpha * (u - 1.0))
            history.append(abs(u_new - u))
            if abs(u_new - u) <= tol:
                return PgflSolution(
                    grid=np.array([0.0]),
                    u_values=np.array([u_new]),
                    tail_value=u_new,
                    residual=abs(u_new - u),
                    iterations=it,
                    constant=True,
                    residual_history=history,
                )
            u = u_new
        raise ConvergenceError(f"cluster p.g.fl. iteration did not reach {tol} in {max_iter}")

    b = z.support_bound
    if grid_step is None:
        grid_step = b / 1000.0
    n = max(2, int(round(b / grid_step)))
    step = b / n
    grid = step * np.arange(n + 1)
    hv = np.asarray(kernel(grid), dtype=float)
    zv = np.asarray(z(grid), dtype=float)
    hv_rev = hv[::-1].copy()
    u = np.ones(n + 1)
    history = []
    for it in range(1, max_iter + 1):
        a = u - 1.0
        integ = np.empty(n + 1)
        for j in range(n + 1):
            s = a[j:] @ hv[: n + 1 - j]
            integ[j] = step * (s - 0.5 * (a[j] * hv[0] + a[n] * hv_rev[j]))
        u_new = zv * np.exp(integ)
        delta = float(np.max(np.abs(u_new - u)))
        history.append(delta)
        u = u_new
        if delta <= tol:
            return PgflSolution(
                grid=grid,
                u_values=u,
                tail_value=1.0,
                residual=delta,
                iterations=it,
                residual_history=history,
            )
    raise ConvergenceError(f"cluster p.g.fl. iteration did not reach {tol} in {max_iter}")


@dataclass
class McEstimate:
    value: float
    se: float
    reps: int


def mc_pgfl_cluster(
    kernel: ExcitationKernel,
    z: TestFunction,
    rng,
    t0: float = 0.0,
    reps: int = 10_000,
) -> McEstimate:
    """Monte Carlo estimate of G_c[z|t0]: mean of prod z(x) over cluster points."""
    if reps < 100:
        raise InsufficientDataError("mc_pgfl_cluster needs reps >= 100")
    horizon = z.support_bound
    if horizon is not None:
        horizon = float(horizon)  # points beyond contribute z = 1 exactly
    vals = np.empty(reps)
    for r in range(reps):
        tree = simulate_cluster(kernel, t0, rng, horizon=horizon)
        vals[r] = float(np.prod(z(tree.times)))
    return McEstimate(
        value=float(np.mean(vals)),
        se=float(np.std(vals, ddof=1) / math.sqrt(reps)),
        reps=reps,
    )


def mc_pgfl_process(
    model: RenewalModel,
    kernel: ExcitationKernel,
    z: TestFunction,
    rng,
    reps: int = 10_000,
    method: str = "cluster",
    count_origin: bool = False,
) -> McEstimate:
    """Monte Carlo estimate of the whole-process G[z] over [0, support bound]."""
    if reps < 100:
        raise InsufficientDataError("mc_pgfl_process needs reps >= 100")
    if z.support_bound is None:
        raise ValueError("process-level MC needs a bounded-support test function")
    horizon = float(z.support_bound)
    vals = np.empty(reps)
    for r in range(reps):
        if method == "cluster":
            stream = simulate_rhp_cluster(model, kernel, horizon, rng, count_origin=count_origin)
        elif method == "stationary":
            stream = simulate_rhp_stationary(model, kernel, horizon, rng)
        else:
            raise ValueError(f"unknown method {method!r}")
        vals[r] = float(np.prod(z(stream.times))) if len(stream.times) else 1.0
    return McEstimate(
        value=float(np.mean(vals)),
        se=float(np.std(vals, ddof=1) / math.sqrt(reps)),
        reps=reps,
    )


@dataclass
class TruncatedPgflResult:
    value: float
    terms: list = field(default_factory=list)  # term n = contribution of exactly n arrivals
    tail_bound: float = 0.0  # P(more than n_max arrivals in (0, T])
    n_max: int = 0


def renewal_pgfl_truncated(
    model: RenewalModel,
    z: TestFunction,
    T: float,
    n_max: int = 4,
    count_origin: bool = False,
    step: float | None = None,
    tail_tol: float | None = None,
) -> TruncatedPgflResult:
    """Truncated renewal p.g.fl. over (0, T] by ordered-arrival quadrature.

    Term n integrates z(s_1)...z(s_n) f(s_1) f(s_2-s_1)...f(s_n-s_{n-1})
    times the survival factor (1 - F(T - s_n)) over 0 < s_1 < ... < s_n <= T
    (the n = 0 term is 1 - F(T)).  count_origin multiplies by z(0).
    The omitted tail is bounded by F^{*(n_max+1)}(T), reported and optionally
    enforced against tail_tol.
    """
    if not model.has_density or not model.is_proper:
        raise RhpError("truncated renewal p.g.fl. needs a proper interarrival density")
    if T <= 0:
        raise ValueError("T must be positive")
    if not (0 <= n_max <= 4):
        raise ValueError("n_max must be between 0 and 4 (use the MC estimator beyond)")
    if step is None:
        step = T / 4000.0
    n_steps = max(2, int(round(T / step)))
    step = T / n_steps
    grid = step * np.arange(n_steps + 1)
    fv = np.asarray(model.pdf(grid), dtype=float)
    zv = np.asarray(z(grid), dtype=float)
    sf_rev = np.exp(np.asarray(model.log_survival(T - grid), dtype=float))
    terms = [float(np.exp(model.log_survival(T)))]
    g = zv * fv
    for _ in range(1, n_max + 1):
        terms.append(float(np.trapezoid(g * sf_rev, dx=step)))
        g = zv * _conv_trapz(g, fv, step)
    tail_bound = float(convolution_cdfs(model, T, step, n_max + 1)[-1])
    if tail_tol is not None and tail_bound > tail_tol:
        raise RhpError(
            f"omitted-tail bound {tail_bound:.3g} exceeds requested accuracy "
            f"{tail_tol:.3g}: increase n_max or use the MC estimator"
        )
    value = float(np.sum(terms))
    if count_origin:
        value *= float(z(0.0))
    return TruncatedPgflResult(value=value, terms=terms, tail_bound=tail_bound, n_max=n_max)


@dataclass
class StationaryPgflResult:
    value: float
    terms: list = field(default_factory=list)
    residual: float = 0.0  # magnitude of the last included term
    converged: bool = True


def stationary_pgfl_expansion(
    model: RenewalModel,
    kernel: ExcitationKernel,
    z: TestFunction,
    k_max: int = 3,
    table: RenewalTable | None = None,
    grid_step: float | None = None,
    pgfl_tol: float = 1e-12,
    term_tol: float = 1e-3,
) -> StationaryPgflResult:
    """Factorial-moment expansion of the stationary p.g.fl.

    value = 1 + sum_{k<=k_max} m * int_{t_1<...<t_k} prod (u(t_i)-1)
            phi(t_2-t_1)...phi(t_k-t_{k-1}) dt,  u from solve_cluster_pgfl.

    The magnitude of the last term estimates the k-truncation residual;
    converged=False flags it when it exceeds term_tol (warning, not error).
    """
    if not (1 <= k_max <= 3):
        raise ValueError("k_max must be between 1 and 3")
    if z.unbounded_support and z.z0 == 1.0:
        # z = 1: every (u - 1) factor vanishes and the p.g.fl. is exactly 1
        return StationaryPgflResult(value=1.0, terms=[0.0] * k_max, residual=0.0, converged=True)
    if z.support_bound is None:
        raise ValueError("stationary expansion needs a bounded-support test function")
    mean = model.mean_interarrival
    if not math.isfinite(mean):
        raise RhpError("stationary expansion needs a finite mean interarrival")
    b = float(z.support_bound)
    if grid_step is None:
        grid_step = b / 2000.0
    sol = solve_cluster_pgfl(kernel, z, tol=pgfl_tol, grid_step=grid_step)
    grid = sol.grid
    step = float(grid[1] - grid[0])
    g = sol.u_values - 1.0
    if table is None:
        table = renewal_table(model, b, min(step, b / 1000.0))
    phi = np.asarray(table.density_at(grid), dtype=float)
    m = 1.0 / mean
    terms = []
    w = g.copy()
    terms.append(m * float(np.trapezoid(w, dx=step)))
    for _ in range(2, k_max + 1):
        w = g * _conv_trapz(w, phi, step)
        terms.append(m * float(np.trapezoid(w, dx=step)))
    residual = abs(terms[-1])
    return StationaryPgflResult(
        value=1.0 + float(np.sum(terms)),
        terms=terms,
        residual=residual,
        converged=residual <= term_tol,
    )


def hawkes_oakes_pgfl(
    rate: float,
    kernel: ExcitationKernel,
    z: TestFunction,
    grid_step: float | None = None,
    pgfl_tol: float = 1e-12,
) -> float:
    """Closed form for a Poisson(rate) centre: exp{rate * int_0^inf (u-1)}."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    if z.unbounded_support:
        # constant z0 < 1 accumulates infinite deficit: the value is 0
        return 1.0 if z.z0 == 1.0 else 0.0
    sol = solve_cluster_pgfl(kernel, z, tol=pgfl_tol, grid_step=grid_step)
    deficit = float(np.trapezoid(sol.u_values - 1.0, dx=float(sol.grid[1] - sol.grid[0])))
    return math.exp(rate * deficit)
