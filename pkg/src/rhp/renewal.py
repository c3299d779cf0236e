"""Renewal process of immigrant arrivals.

Epochs are the partial sums S_0 = 0, S_n = tau_1 + ... + tau_n.  The renewal
function Phi(t) = E[#\{i >= 0 : S_i <= t\}] counts the origin, so Phi(0) = 1,
and solves Phi = 1 + F * Phi; the renewal density phi solves phi = f + f * phi.
Both are tabulated on a uniform grid by a trapezoid-weighted Stieltjes
recursion against the exact increments of F (second order; the plain
left-endpoint rule carries an O(step) slope bias that cannot reach the
advertised tolerances at any feasible step).

A delayed renewal process replaces S_0 by a first arrival drawn from F_0
(the origin is then not an event).  The stationary delay f_0 = m (1 - F)
makes window counts shift-invariant from time zero on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Exponential, RenewalModel, Tabulated
from .errors import DefectiveModelError
from .events import Convention, EventStream

_GAP_CHUNK = 64


def _renewal_epochs(model: RenewalModel, horizon: float, rng, start: float) -> np.ndarray:
    """Epochs start, start + tau_1, ... clipped to [0, horizon]."""
    epochs = [start] if start <= horizon else []
    last = start
    while last <= horizon:
        gaps = np.atleast_1d(model.sample(rng, _GAP_CHUNK))
        with np.errstate(invalid="ignore"):
            batch = last + np.cumsum(gaps)
        inside = batch[batch <= horizon]
        epochs.extend(inside.tolist())
        if len(inside) < len(batch):
            break
        last = batch[-1]
    return np.asarray(epochs, dtype=float)


def simulate_renewal(
    model: RenewalModel,
    horizon: float,
    rng,
    count_origin: bool = True,
) -> EventStream:
    """Plain renewal stream on [0, horizon]; S_0 = 0 is emitted iff count_origin."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    epochs = _renewal_epochs(model, horizon, rng, start=0.0)
    if not count_origin:
        epochs = epochs[1:]
    return _immigrant_stream(epochs, horizon, Convention(count_origin=count_origin))


def simulate_delayed_renewal(
    model: RenewalModel,
    delay,
    horizon: float,
    rng,
) -> EventStream:
    """Delayed renewal stream: first arrival from F_0, then ordinary gaps.

    delay may be a RenewalModel (explicit F_0), the string "stationary"
    (equilibrium delay f_0 = m(1-F)), or a float c (degenerate delay at c).
    The origin is never an event here.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if isinstance(delay, str):
        if delay != "stationary":
            raise ValueError(f"unknown delay spec {delay!r}")
        first = stationary_delay(model).sample(rng)
        tag = "stationary"
    elif isinstance(delay, RenewalModel):
        first = delay.sample(rng)
        tag = "explicit"
    elif isinstance(delay, (int, float)):
        if delay < 0:
            raise ValueError("degenerate delay must be nonnegative")
        first = float(delay)
        tag = "degenerate"
    else:
        raise TypeError("delay must be a RenewalModel, 'stationary', or a float")
    first = float(first)
    if first > horizon or math.isinf(first):
        epochs = np.empty(0)
    else:
        epochs = _renewal_epochs(model, horizon, rng, start=first)
    return _immigrant_stream(epochs, horizon, Convention(count_origin=False, delay=tag))


def _immigrant_stream(epochs: np.ndarray, horizon: float, convention: Convention) -> EventStream:
    n = len(epochs)
    return EventStream(
        times=epochs,
        generations=np.zeros(n, dtype=np.int64),
        parents=np.full(n, -1, dtype=np.int64),
        cluster_ids=np.arange(n, dtype=np.int64),
        horizon=horizon,
        convention=convention,
    )


def stationary_delay(model: RenewalModel) -> RenewalModel:
    """Distribution of the equilibrium delay, density f_0 = m (1 - F).

    Exponential models are returned unchanged (memoryless: f_0 = f exactly);
    other families get a fine tabulated proxy of f_0, extended until the
    remaining mass is below 1e-10.
    """
    mean = model.mean_interarrival
    if not math.isfinite(mean):
        raise DefectiveModelError("stationary delay undefined: infinite mean interarrival")
    if isinstance(model, Exponential):
        return model
    cached = getattr(model, "_stationary_delay", None)
    if cached is not None:
        return cached
    m = 1.0 / mean
    span = 8.0 * mean
    for _ in range(60):
        grid = np.linspace(0.0, span, 8193)
        sf = np.clip(1.0 - np.asarray(model.cdf(grid), dtype=float), 0.0, None)
        density = m * sf
        covered = np.trapezoid(density, grid)
        if 1.0 - covered < 1e-9:
            break
        span *= 2.0
    proxy = Tabulated(grid, density, allow_defective=True)
    model._stationary_delay = proxy
    return proxy


@dataclass
class RenewalTable:
    """Tabulated renewal function and renewal density on a uniform grid."""

    grid: np.ndarray
    phi_fn: np.ndarray  # Phi(t): expected number of S_i <= t, Phi(0) = 1
    phi_density: np.ndarray  # phi(t) = sum_{n>=1} f^{*n}(t)
    step: float

    def phi_at(self, t):
        return np.interp(t, self.grid, self.phi_fn)

    def density_at(self, t):
        return np.interp(t, self.grid, self.phi_density, left=0.0, right=self.phi_density[-1])


def renewal_table(model: RenewalModel, horizon: float, step: float) -> RenewalTable:
    """Solve Phi = 1 + F*Phi and phi = f + f*phi on a uniform grid.

    Trapezoid-weighted Stieltjes recursion: each convolution cell averages the
    unknown at its two edges against the exact mass increment of F.  The
    scheme is second order in step (and exact for the density recursion in
    the Exponential case, where phi is constant).
    """
    if not model.has_density:
        raise DefectiveModelError("renewal table needs an interarrival density")
    if not model.is_proper:
        raise DefectiveModelError(
            "renewal table needs a proper interarrival law (tabulated mass < 1)"
        )
    if step <= 0 or horizon <= 0:
        raise ValueError("horizon and step must be positive")
    n_steps = max(1, int(round(horizon / step)))
    grid = step * np.arange(n_steps + 1)
    cdf = np.asarray(model.cdf(grid), dtype=float)
    pdf = np.asarray(model.pdf(grid), dtype=float)
    dF = np.diff(cdf)  # dF[i] = F((i+1)h) - F(ih), exact mass per cell
    dF_rev = dF[::-1].copy()
    J = n_steps
    phi_fn = np.empty(J + 1)
    phi_density = np.empty(J + 1)
    phi_fn[0] = 1.0
    phi_density[0] = pdf[0]
    denom = 1.0 - 0.5 * dF[0]
    for j in range(1, J + 1):
        # interior cells i=1..j-1: both edges of the unknown weight the same
        # exact mass increment dF[i]; dF[j-1..1] is the slice dF_rev[J-j:J-1]
        s_hi = phi_fn[1:j] @ dF_rev[J - j : J - 1]
        s_lo = phi_fn[0 : j - 1] @ dF_rev[J - j : J - 1]
        phi_fn[j] = (1.0 + 0.5 * (phi_fn[j - 1] * dF[0] + s_hi + s_lo)) / denom
        d_hi = phi_density[1:j] @ dF_rev[J - j : J - 1]
        d_lo = phi_density[0 : j - 1] @ dF_rev[J - j : J - 1]
        phi_density[j] = (pdf[j] + 0.5 * (phi_density[j - 1] * dF[0] + d_hi + d_lo)) / denom
    return RenewalTable(grid=grid, phi_fn=phi_fn, phi_density=phi_density, step=step)


def convolution_cdfs(model: RenewalModel, horizon: float, step: float, n_max: int) -> np.ndarray:
    """F^{*k}(horizon) for k = 1..n_max: P(S_k <= horizon), by grid convolution.

    F^{*(n+1)}(T) equals the chance of more than n renewals in (0, T]; used as
    the omitted-tail bound of the truncated renewal expansions.
    """
    if not model.is_proper:
        raise DefectiveModelError("convolution powers need a proper interarrival law")
    n_steps = max(2, int(round(horizon / step)))
    step = horizon / n_steps
    grid = step * np.arange(n_steps + 1)
    f = np.asarray(model.pdf(grid), dtype=float)
    out = []
    fk = f.copy()
    for k in range(1, n_max + 1):
        if k == 1:
            out.append(float(model.cdf(horizon)))
        else:
            fk = _conv_trapz(fk, f, step)
            out.append(float(np.trapezoid(fk, dx=step)))
    return np.asarray(out)


def _conv_trapz(a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    """Trapezoid discretization of (a * b)(t) = int_0^t a(s) b(t-s) ds."""
    n = len(a)
    full = np.convolve(a, b)[:n]
    full = full - 0.5 * (a[0] * b[:n] + a[:n] * b[0])
    return full * step
