"""Interarrival laws and excitation kernels.

Immigrant arrivals form a renewal sequence whose interarrival time tau has
density f, distribution F and hazard mu(t) = f(t)/(1-F(t)).  Offspring are
displaced from their parent by a nonnegative kernel h whose total mass
alpha = int_0^inf h (the branching ratio) must stay below one for cluster
cascades to die out.

Model families: Exponential, Gamma, Weibull, Lognormal and Tabulated
(piecewise-linear density on a finite grid, zero beyond the last node).
A Tabulated law may carry total mass below one when constructed with
allow_defective=True; such a law has infinite mean (the missing mass never
arrives) and is refused by every operation that needs a proper density.

Kernel families: Exponential  h(t) = alpha*beta*exp(-beta*t)  and Tabulated.
Subcriticality (mass < 1) is enforced by kernel_mass() and at simulation
entry points rather than in constructors, so diagnostic code can hold and
report a violating kernel.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar

from .errors import (
    DegenerateKernelError,
    SubcriticalityError,
    SupportError,
)

# Survival probabilities below this are treated as "beyond support": the
# hazard f/(1-F) is numerically meaningless there.
SURVIVAL_FLOOR = 1e-12


class _PiecewiseLinear:
    """Nonnegative piecewise-linear function on a finite grid, zero outside.

    Shared backbone of the Tabulated model and Tabulated kernel: exact cell
    masses, exact running integral (piecewise quadratic), exact interval
    suprema (attained at nodes or interval endpoints), and inverse-CDF
    sampling by solving the per-cell quadratic.
    """

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length >= 2")
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise ValueError("grid and values must be finite")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if grid[0] < 0:
            raise ValueError("grid must start at or above zero")
        if np.any(values < 0):
            raise ValueError("values must be nonnegative")
        self.grid = grid
        self.values = values
        widths = np.diff(grid)
        self.cell_mass = 0.5 * (values[:-1] + values[1:]) * widths
        self.cum_mass = np.concatenate([[0.0], np.cumsum(self.cell_mass)])
        self.total_mass = float(self.cum_mass[-1])

    def __call__(self, x):
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def integral_to(self, x):
        """Exact int_0^x of the function (vectorized)."""
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, len(self.grid) - 2)
        x0 = self.grid[idx]
        d = np.clip(x - x0, 0.0, self.grid[idx + 1] - x0)
        f0 = self.values[idx]
        slope = (self.values[idx + 1] - f0) / (self.grid[idx + 1] - x0)
        partial = f0 * d + 0.5 * slope * d * d
        out = np.where(x <= self.grid[0], 0.0, self.cum_mass[idx] + partial)
        out = np.where(x >= self.grid[-1], self.total_mass, out)
        return out if out.ndim else float(out)

    def first_moment(self):
        """Exact int t * f(t) dt over the support (per-cell cubic terms)."""
        a, b = self.grid[:-1], self.grid[1:]
        fa, fb = self.values[:-1], self.values[1:]
        slope = (fb - fa) / (b - a)
        c0 = fa - slope * a  # f(t) = c0 + slope * t on [a, b]
        return float(np.sum(c0 * (b**2 - a**2) / 2.0 + slope * (b**3 - a**3) / 3.0))

    def sup_on(self, lo, hi):
        """Exact sup of the function over [lo, hi] (0 if disjoint from support)."""
        if hi < self.grid[0] or lo > self.grid[-1]:
            return 0.0
        cand = [float(self(lo)), float(self(hi))]
        inside = (self.grid > lo) & (self.grid < hi)
        if np.any(inside):
            cand.append(float(np.max(self.values[inside])))
        return max(cand)

    def inverse_mass(self, r):
        """Position where the running integral first reaches mass r (vectorized)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        idx = np.clip(np.searchsorted(self.cum_mass, r, side="right") - 1, 0, len(self.grid) - 2)
        rr = r - self.cum_mass[idx]
        f0 = self.values[idx]
        x0 = self.grid[idx]
        slope = (self.values[idx + 1] - f0) / (self.grid[idx + 1] - x0)
        # solve 0.5*slope*d^2 + f0*d = rr; rationalized root is stable as slope -> 0
        disc = np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * rr, 0.0))
        denom = f0 + disc
        d = np.where(denom > 0, 2.0 * rr / np.where(denom > 0, denom, 1.0), 0.0)
        return x0 + np.minimum(d, self.grid[idx + 1] - x0)

    def sample(self, rng, size=None):
        """Draw from the normalized density values/total_mass."""
        if self.total_mass <= 0:
            raise ValueError("cannot sample from a zero-mass function")
        u = rng.random(size) * self.total_mass
        out = self.inverse_mass(u)
        return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# interarrival models
# ---------------------------------------------------------------------------


class RenewalModel:
    """Interarrival law tau of the immigrant renewal sequence."""

    family = "abstract"
    has_density = True
    is_proper = True

    def pdf(self, t):
        raise NotImplementedError

    def cdf(self, t):
        raise NotImplementedError

    def log_survival(self, t):
        """log(1 - F(t)), computed to full tail accuracy where possible."""
        raise NotImplementedError

    def survival(self, t):
        return np.exp(self.log_survival(t))

    def hazard(self, t):
        """mu(t) = f(t)/(1-F(t)); errors where survival < SURVIVAL_FLOOR."""
        t = np.asarray(t, dtype=float)
        sf = self.survival(t)
        if np.any(sf < SURVIVAL_FLOOR):
            raise SupportError("hazard undefined beyond support")
        out = self.pdf(t) / sf
        return float(out) if out.ndim == 0 else out

    def hazard_sup(self, lo, hi):
        """Upper bound for sup of the hazard over elapsed times [lo, hi].

        Used as the thinning majorant; returns inf when no finite bound
        exists (e.g. decreasing hazard with lo = 0 for shape < 1 families).
        """
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    @property
    def mean_interarrival(self):
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"

    def __eq__(self, other):
        return type(self) is type(other) and _params_equal(self.params(), other.params())


def _params_equal(a, b):
    if a.keys() != b.keys():
        return False
    for k in a:
        va, vb = a[k], b[k]
        if isinstance(va, np.ndarray) or isinstance(vb, np.ndarray):
            if not np.array_equal(np.asarray(va), np.asarray(vb)):
                return False
        elif va != vb:
            return False
    return True


class Exponential(RenewalModel):
    """Exponential(rate): the memoryless case, constant hazard = rate."""

    family = "exponential"

    def __init__(self, rate: float):
        if not (rate > 0 and math.isfinite(rate)):
            raise ValueError("rate must be positive and finite")
        self.rate = float(rate)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0, 0.0, self.rate * np.exp(-self.rate * t))
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0, 0.0, -np.expm1(-self.rate * t))
        return float(out) if out.ndim == 0 else out

    def log_survival(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0, 0.0, -self.rate * t)
        return float(out) if out.ndim == 0 else out

    def hazard(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.rate)
        return float(out) if out.ndim == 0 else out

    def hazard_sup(self, lo, hi):
        return self.rate

    def sample(self, rng, size=None):
        # inverse CDF: -log(1-u)/rate with u ~ U[0,1)
        return -np.log1p(-rng.random(size)) / self.rate

    @property
    def mean_interarrival(self):
        return 1.0 / self.rate

    def params(self):
        return {"rate": self.rate}


class Gamma(RenewalModel):
    """Gamma(shape, rate); hazard is monotone toward the asymptote rate."""

    family = "gamma"

    def __init__(self, shape: float, rate: float):
        if not (shape > 0 and math.isfinite(shape)):
            raise ValueError("shape must be positive and finite")
        if not (rate > 0 and math.isfinite(rate)):
            raise ValueError("rate must be positive and finite")
        self.shape = float(shape)
        self.rate = float(rate)
        self._dist = stats.gamma(a=self.shape, scale=1.0 / self.rate)
        # integer shape n has hazard rate*(rt)^(n-1) / ((n-1)! sum_{k<n} (rt)^k/k!),
        # a polynomial ratio that never under/overflows and skips scipy's
        # per-call overhead on the thinning hot path
        self._int_shape = int(self.shape) if self.shape.is_integer() and self.shape <= 64 else None

    def pdf(self, t):
        return self._dist.pdf(t)

    def cdf(self, t):
        return self._dist.cdf(t)

    def log_survival(self, t):
        return self._dist.logsf(t)

    def hazard(self, t):
        t = np.asarray(t, dtype=float)
        if self._int_shape is not None:
            # hazard = rate / sum_{j=0}^{n-1} [(n-1)!/(n-1-j)!] rt^{-j}, which
            # is overflow-free and has the right limits at 0 and infinity
            n = self._int_shape
            rt = self.rate * t
            with np.errstate(divide="ignore"):
                acc = np.zeros_like(rt)
                power = np.ones_like(rt)
                coeff = 1.0
                for j in range(n):
                    acc = acc + coeff * power
                    coeff = coeff * (n - 1 - j)
                    power = power / rt
            out = self.rate / acc
            return float(out) if out.ndim == 0 else out
        logsf = self._dist.logsf(t)
        if np.any(logsf < math.log(SURVIVAL_FLOOR)):
            raise SupportError("hazard undefined beyond support")
        out = np.exp(self._dist.logpdf(t) - logsf)
        return float(out) if out.ndim == 0 else out

    def hazard_sup(self, lo, hi):
        if self.shape >= 1.0:
            # nondecreasing hazard bounded above by the asymptote = rate
            try:
                return min(float(self.hazard(hi)), self.rate)
            except SupportError:
                return self.rate
        # shape < 1: hazard decreases from +inf at 0+
        if lo <= 0.0:
            return math.inf
        return float(self.hazard(lo))

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size)

    @property
    def mean_interarrival(self):
        return self.shape / self.rate

    def params(self):
        return {"shape": self.shape, "rate": self.rate}


class Weibull(RenewalModel):
    """Weibull(shape, scale); closed-form hazard (shape/scale)*(t/scale)^(shape-1)."""

    family = "weibull"

    def __init__(self, shape: float, scale: float):
        if not (shape > 0 and math.isfinite(shape)):
            raise ValueError("shape must be positive and finite")
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError("scale must be positive and finite")
        self.shape = float(shape)
        self.scale = float(scale)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(t > 0, t / self.scale, np.nan)
            out = np.where(
                t > 0,
                (self.shape / self.scale) * x ** (self.shape - 1.0) * np.exp(-(x**self.shape)),
                0.0,
            )
        if self.shape == 1.0:
            out = np.where(t == 0, 1.0 / self.scale, out)
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0, 0.0, -np.expm1(-((np.maximum(t, 0.0) / self.scale) ** self.shape)))
        return float(out) if out.ndim == 0 else out

    def log_survival(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0, 0.0, -((np.maximum(t, 0.0) / self.scale) ** self.shape))
        return float(out) if out.ndim == 0 else out

    def hazard(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = (self.shape / self.scale) * (t / self.scale) ** (self.shape - 1.0)
        return float(out) if out.ndim == 0 else out

    def hazard_sup(self, lo, hi):
        if self.shape >= 1.0:
            return float(self.hazard(hi))
        if lo <= 0.0:
            return math.inf
        return float(self.hazard(lo))

    def sample(self, rng, size=None):
        return self.scale * (-np.log1p(-rng.random(size))) ** (1.0 / self.shape)

    @property
    def mean_interarrival(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def params(self):
        return {"shape": self.shape, "scale": self.scale}


class Lognormal(RenewalModel):
    """Lognormal(mu, sigma) of log-scale mu; unimodal hazard."""

    family = "lognormal"

    def __init__(self, mu: float, sigma: float):
        if not math.isfinite(mu):
            raise ValueError("mu must be finite")
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ValueError("sigma must be positive and finite")
        self.mu = float(mu)
        self.sigma = float(sigma)
        self._dist = stats.lognorm(s=self.sigma, scale=math.exp(self.mu))
        self._hazard_mode = None

    def pdf(self, t):
        return self._dist.pdf(t)

    def cdf(self, t):
        return self._dist.cdf(t)

    def log_survival(self, t):
        return self._dist.logsf(t)

    def hazard(self, t):
        t = np.asarray(t, dtype=float)
        logsf = self._dist.logsf(t)
        if np.any(logsf < math.log(SURVIVAL_FLOOR)):
            raise SupportError("hazard undefined beyond support")
        out = np.exp(self._dist.logpdf(t) - logsf)
        return float(out) if out.ndim == 0 else out

    def _mode(self):
        # the lognormal hazard rises from 0 to a single interior maximum
        if self._hazard_mode is None:
            scale = math.exp(self.mu)
            res = minimize_scalar(
                lambda t: -float(self.hazard(t)),
                bounds=(1e-9 * scale, 50.0 * scale),
                method="bounded",
                options={"xatol": 1e-10 * scale},
            )
            self._hazard_mode = float(res.x)
        return self._hazard_mode

    def hazard_sup(self, lo, hi):
        mode = self._mode()
        cand = [float(self.hazard(max(lo, 1e-300)))]
        if hi >= mode >= lo:
            cand.append(float(self.hazard(mode)))
        try:
            cand.append(float(self.hazard(hi)))
        except SupportError:
            cand.append(float(self.hazard(mode)))
        return max(cand)

    def sample(self, rng, size=None):
        return rng.lognormal(self.mu, self.sigma, size)

    @property
    def mean_interarrival(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}


class Tabulated(RenewalModel):
    """Piecewise-linear density on a finite grid, zero beyond the last node.

    A proper table must integrate to one within 1e-6.  With
    allow_defective=True, total mass q < 1 is accepted: the law then puts
    mass 1-q at infinity, so mean_interarrival is inf and sampling returns
    inf with probability 1-q.
    """

    family = "tabulated"

    def __init__(self, grid, density, allow_defective: bool = False):
        self._pl = _PiecewiseLinear(grid, density)
        mass = self._pl.total_mass
        if mass > 1.0 + 1e-6:
            raise ValueError(f"tabulated density mass {mass:.8g} exceeds one")
        if mass < 1.0 - 1e-6 and not allow_defective:
            raise ValueError(
                f"tabulated density mass {mass:.8g} is not one within 1e-6 "
                "(pass allow_defective=True for a sub-probability table)"
            )
        self.is_proper = mass >= 1.0 - 1e-6
        self.grid = self._pl.grid
        self.density = self._pl.values

    def pdf(self, t):
        return self._pl(t)

    def cdf(self, t):
        out = np.minimum(self._pl.integral_to(t), 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def log_survival(self, t):
        sf = np.maximum(1.0 - self._pl.integral_to(t), 0.0)
        with np.errstate(divide="ignore"):
            out = np.log(sf)
        return float(out) if np.ndim(out) == 0 else out

    def hazard_sup(self, lo, hi):
        sf_hi = 1.0 - float(self._pl.integral_to(hi))
        if sf_hi < SURVIVAL_FLOOR:
            raise SupportError("hazard undefined beyond support")
        return self._pl.sup_on(lo, hi) / sf_hi

    def sample(self, rng, size=None):
        if self.is_proper:
            return self._pl.sample(rng, size)
        # defective: the missing mass escapes to infinity (no further arrival)
        u = np.atleast_1d(rng.random(size))
        out = np.full(u.shape, np.inf)
        hit = u < self._pl.total_mass
        if np.any(hit):
            out[hit] = self._pl.inverse_mass(u[hit])
        return float(out[0]) if size is None else out

    @property
    def mean_interarrival(self):
        if not self.is_proper:
            return math.inf
        return self._pl.first_moment()

    def params(self):
        return {"grid": self.grid.tolist(), "density": self.density.tolist()}


# ---------------------------------------------------------------------------
# excitation kernels
# ---------------------------------------------------------------------------


class ExcitationKernel:
    """Nonnegative offspring displacement kernel h on [0, inf)."""

    family = "abstract"

    def __call__(self, x):
        raise NotImplementedError

    @property
    def mass(self) -> float:
        """Branching ratio alpha = int_0^inf h (not range-checked here)."""
        raise NotImplementedError

    def mass_until(self, x):
        """int_0^x h, exact."""
        raise NotImplementedError

    def sup_on(self, lo, hi) -> float:
        """Upper bound for sup of h over [lo, hi] (exact for both families)."""
        raise NotImplementedError

    def sample_displacements(self, rng, size=None):
        """Draw from the normalized density h/alpha."""
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"

    def __eq__(self, other):
        return type(self) is type(other) and _params_equal(self.params(), other.params())


class ExponentialKernel(ExcitationKernel):
    """h(t) = alpha * beta * exp(-beta t): mass alpha, nonincreasing."""

    family = "exponential"

    def __init__(self, alpha: float, beta: float):
        if not (alpha >= 0 and math.isfinite(alpha)):
            raise ValueError("alpha must be nonnegative and finite")
        if not (beta > 0 and math.isfinite(beta)):
            raise ValueError("beta must be positive and finite")
        self.alpha = float(alpha)
        self.beta = float(beta)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, 0.0, self.alpha * self.beta * np.exp(-self.beta * np.maximum(x, 0.0)))
        return float(out) if out.ndim == 0 else out

    @property
    def mass(self):
        return self.alpha

    def mass_until(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, 0.0, self.alpha * -np.expm1(-self.beta * np.maximum(x, 0.0)))
        return float(out) if out.ndim == 0 else out

    def sup_on(self, lo, hi):
        return float(self(max(lo, 0.0)))

    def sample_displacements(self, rng, size=None):
        if self.alpha == 0.0:
            raise DegenerateKernelError("degenerate kernel has no offspring")
        return -np.log1p(-rng.random(size)) / self.beta

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}


class TabulatedKernel(ExcitationKernel):
    """Piecewise-linear kernel on a finite grid, zero beyond the last node."""

    family = "tabulated"

    def __init__(self, grid, values):
        self._pl = _PiecewiseLinear(grid, values)
        self.grid = self._pl.grid
        self.values = self._pl.values

    def __call__(self, x):
        return self._pl(x)

    @property
    def mass(self):
        return self._pl.total_mass

    def mass_until(self, x):
        return self._pl.integral_to(x)

    def sup_on(self, lo, hi):
        return self._pl.sup_on(lo, hi)

    def sample_displacements(self, rng, size=None):
        if self._pl.total_mass == 0.0:
            raise DegenerateKernelError("degenerate kernel has no offspring")
        return self._pl.sample(rng, size)

    def params(self):
        return {"grid": self.grid.tolist(), "values": self.values.tolist()}


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def hazard_at(model: RenewalModel, t):
    """Hazard mu(t) of the interarrival law; errors beyond usable support."""
    return model.hazard(t)


def sample_interarrival(model: RenewalModel, rng, size=None):
    """Draw interarrival times (bitwise reproducible for a fixed generator state)."""
    return model.sample(rng, size)


def kernel_mass(kernel: ExcitationKernel) -> float:
    """Branching ratio alpha; subcriticality is a hard requirement here."""
    mass = float(kernel.mass)
    if mass >= 1.0:
        raise SubcriticalityError(f"branching ratio must be < 1 (got {mass:.6g})")
    return mass


def sample_offspring_displacement(kernel: ExcitationKernel, rng, size=None):
    """Draw displacements from h/alpha; zero-mass kernels cannot produce offspring."""
    return kernel.sample_displacements(rng, size)
