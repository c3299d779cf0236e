"""Two routes to the same point process.

Cluster route: draw the immigrant renewal stream first, then grow every
immigrant's branching cascade (truncated exactly at the horizon) and merge.
Intensity route: Ogata thinning of

    lambda(t) = mu(t - T_last_immigrant(t-)) + sum_{t_i < t} h(t - t_i)

with a piecewise-constant majorant rebuilt at every accepted event and at
window expiry; accepted points are attributed immigrant/offspring by a
categorical draw proportional to the mu-part and each kernel summand, which
reproduces the cluster representation's parentage in law.

Conventions: with count_origin=True the origin S_0 = 0 is an event, seeds its
own cluster and excites; with False, time 0 is only the hazard reference.
Delayed (e.g. stationary) streams have no reference before their first
immigrant, and intensity evaluation there is refused.

The compensator int_0^t lambda is assembled from exact pieces: the hazard
part is -log S(elapsed) between consecutive immigrants and the kernel part
is the exact cumulative mass of h per past event.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import (
    ExcitationKernel,
    ExponentialKernel,
    RenewalModel,
    kernel_mass,
)
from .errors import RhpError, SupportError, UnboundedHazardError
from .events import Convention, EventStream, assemble_stream
from .renewal import simulate_delayed_renewal, simulate_renewal

MAX_RHP_NODES = 10_000_000


class MissingReferenceError(RhpError, ValueError):
    """Hazard evaluation needs a last-immigrant reference that the stream lacks."""


# ---------------------------------------------------------------------------
# cluster representation
# ---------------------------------------------------------------------------


def _grow_clusters(
    immigrant_times: np.ndarray,
    kernel: ExcitationKernel,
    horizon: float,
    rng,
    max_nodes: int = MAX_RHP_NODES,
):
    """Batched breadth-first cascade over all immigrants at once."""
    alpha = kernel_mass(kernel)
    n_imm = len(immigrant_times)
    times = [np.asarray(immigrant_times, dtype=float)]
    gens = [np.zeros(n_imm, dtype=np.int64)]
    parents = [np.full(n_imm, -1, dtype=np.int64)]
    clusters = [np.arange(n_imm, dtype=np.int64)]
    frontier_times = times[0]
    frontier_index = clusters[0].copy()
    frontier_cluster = clusters[0]
    n_nodes = n_imm
    generation = 0
    while len(frontier_times):
        counts = rng.poisson(alpha, len(frontier_times))
        total = int(counts.sum())
        if total == 0:
            break
        if n_nodes + total > max_nodes:
            raise RhpError(f"realization exceeded {max_nodes} nodes")
        generation += 1
        parent_pos = np.repeat(frontier_index, counts)
        child_cluster = np.repeat(frontier_cluster, counts)
        child_times = np.repeat(frontier_times, counts) + kernel.sample_displacements(rng, total)
        keep = child_times <= horizon
        child_times = child_times[keep]
        parent_pos = parent_pos[keep]
        child_cluster = child_cluster[keep]
        kept = len(child_times)
        if kept == 0:
            break
        times.append(child_times)
        gens.append(np.full(kept, generation, dtype=np.int64))
        parents.append(parent_pos)
        clusters.append(child_cluster)
        frontier_index = np.arange(n_nodes, n_nodes + kept, dtype=np.int64)
        frontier_times = child_times
        frontier_cluster = child_cluster
        n_nodes += kept
    return (
        np.concatenate(times),
        np.concatenate(gens),
        np.concatenate(parents),
        np.concatenate(clusters),
    )


def simulate_rhp_cluster(
    model: RenewalModel,
    kernel: ExcitationKernel,
    horizon: float,
    rng,
    count_origin: bool = True,
    replicate: int = 0,
) -> EventStream:
    """Cluster-representation sample path on [0, horizon].

    The immigrant epochs are drawn before any cascade randomness, so with a
    zero-mass kernel the event times coincide draw-for-draw with
    simulate_renewal under the same seed.
    """
    immigrants = simulate_renewal(model, horizon, rng, count_origin=count_origin)
    t, g, p, c = _grow_clusters(immigrants.times, kernel, horizon, rng)
    return assemble_stream(
        t, g, p, c, horizon, Convention(count_origin=count_origin), replicate
    )


def simulate_rhp_stationary(
    model: RenewalModel,
    kernel: ExcitationKernel,
    horizon: float,
    rng,
    replicate: int = 0,
) -> EventStream:
    """Stationary variant: immigrants from the equilibrium-delayed renewal process."""
    immigrants = simulate_delayed_renewal(model, "stationary", horizon, rng)
    t, g, p, c = _grow_clusters(immigrants.times, kernel, horizon, rng)
    return assemble_stream(
        t, g, p, c, horizon, Convention(count_origin=False, delay="stationary"), replicate
    )


# ---------------------------------------------------------------------------
# intensity representation (Ogata thinning)
# ---------------------------------------------------------------------------


def simulate_rhp_thinning(
    model: RenewalModel,
    kernel: ExcitationKernel,
    horizon: float,
    rng,
    count_origin: bool = True,
    window: float | None = None,
    hazard_envelope=None,
    replicate: int = 0,
) -> EventStream:
    """Ogata thinning with a piecewise-constant majorant.

    The majorant over a lookahead window (t, t+window] is the model's hazard
    envelope over the elapsed-time interval plus an exact bound on the kernel
    sum (the current sum itself for the nonincreasing Exponential kernel).
    hazard_envelope(lo, hi), if given, overrides the model's own interval sup
    (needed for families whose hazard is unbounded at 0+).
    """
    kernel_mass(kernel)
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if window is None:
        mean = model.mean_interarrival
        window = (mean / 10.0) if math.isfinite(mean) else horizon / 100.0
    if window <= 0:
        raise ValueError("window must be positive")
    envelope = hazard_envelope or model.hazard_sup

    fast = isinstance(kernel, ExponentialKernel)
    beta = kernel.beta if fast else None
    jump = kernel.alpha * kernel.beta if fast else None

    times: list[float] = []
    gens: list[int] = []
    parents: list[int] = []
    clusters: list[int] = []
    times_arr = np.empty(0)
    ksum = 0.0  # kernel sum at time ktime (fast path only)
    ktime = 0.0
    last_immigrant = 0.0  # hazard reference; time 0 acts as last immigrant
    n_clusters = 0

    def kernel_sum_at(s: float) -> float:
        if fast:
            return ksum * math.exp(-beta * (s - ktime))
        if not len(times_arr):
            return 0.0
        return float(np.sum(kernel(s - times_arr)))

    def kernel_sup_over(s: float) -> float:
        if fast:
            return kernel_sum_at(s)
        if not len(times_arr):
            return 0.0
        lags = s - times_arr
        return float(sum(kernel.sup_on(lo, lo + window) for lo in lags))

    def append_event(when: float, gen: int, parent: int, cluster: int):
        nonlocal times_arr, ksum, ktime
        times.append(when)
        gens.append(gen)
        parents.append(parent)
        clusters.append(cluster)
        times_arr = np.asarray(times)
        if fast:
            ksum = ksum * math.exp(-beta * (when - ktime)) + jump
            ktime = when

    if count_origin:
        append_event(0.0, 0, -1, 0)
        n_clusters = 1

    t = 0.0
    while t < horizon:
        elapsed = t - last_immigrant
        mu_sup = float(envelope(elapsed, elapsed + window))
        if math.isinf(mu_sup) or math.isnan(mu_sup):
            raise UnboundedHazardError("unbounded hazard: supply envelope")
        majorant = mu_sup + kernel_sup_over(t)
        window_end = min(t + window, horizon)
        if majorant <= 0.0:
            t = window_end
            continue
        while t < window_end:
            t = t + rng.exponential(1.0 / majorant)
            if t >= window_end:
                t = window_end
                break
            lam_mu = float(model.hazard(t - last_immigrant))
            lam = lam_mu + kernel_sum_at(t)
            # majorant validity: the proposal density must dominate lambda
            if lam > majorant * (1.0 + 1e-9):
                raise RhpError(
                    f"majorant {majorant:.6g} fell below the intensity {lam:.6g}"
                )
            if rng.random() * majorant <= lam:
                draw = rng.random() * lam
                if draw <= lam_mu or not len(times_arr):
                    append_event(t, 0, -1, n_clusters)
                    n_clusters += 1
                    last_immigrant = t
                else:
                    terms = np.asarray(kernel(t - times_arr), dtype=float)
                    cut = np.cumsum(terms) + lam_mu
                    k = min(int(np.searchsorted(cut, draw)), len(times_arr) - 1)
                    append_event(t, gens[k] + 1, k, clusters[k])
                break  # refresh the majorant after every accepted event
    return EventStream(
        times=np.asarray(times, dtype=float),
        generations=np.asarray(gens, dtype=np.int64),
        parents=np.asarray(parents, dtype=np.int64),
        cluster_ids=np.asarray(clusters, dtype=np.int64),
        horizon=horizon,
        convention=Convention(count_origin=count_origin),
        replicate=replicate,
    )


# ---------------------------------------------------------------------------
# intensity and compensator along a realized stream
# ---------------------------------------------------------------------------


def _reference_immigrant(stream: EventStream, t: float) -> float:
    """Time of the last immigrant strictly before t."""
    imm = stream.immigrant_times
    k = int(np.searchsorted(imm, t, side="left"))
    if k == 0:
        if stream.convention.delay is not None:
            raise MissingReferenceError(
                f"no reference immigrant before t = {t:.6g} in a delayed stream"
            )
        return 0.0  # plain stream: time 0 is the reference even when not an event
    return float(imm[k - 1])


def intensity_path(stream: EventStream, model: RenewalModel, kernel: ExcitationKernel, t):
    """Conditional intensity lambda(t) given the stream's history before t."""
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0) or np.any(ts > stream.horizon):
        raise ValueError("intensity is defined on [0, horizon] only")
    out = np.empty(len(ts))
    for i, ti in enumerate(ts):
        ref = _reference_immigrant(stream, ti)
        lam = float(model.hazard(ti - ref))
        past = stream.times[stream.times < ti]
        if len(past):
            lam += float(np.sum(kernel(ti - past)))
        out[i] = lam
    return float(out[0]) if scalar else out


def _hazard_compensator_pieces(stream: EventStream, model: RenewalModel, t: float) -> float:
    """int_0^t mu(s - last immigrant) ds via the exact -log-survival pieces."""
    if stream.convention.delay is not None:
        raise MissingReferenceError(
            "compensator undefined on a delayed stream (no hazard reference before "
            "its first immigrant)"
        )
    imm = stream.immigrant_times
    refs = imm[imm < t]
    if len(refs) == 0 or refs[0] > 0.0:
        refs = np.concatenate([[0.0], refs])
    seg_ends = np.append(refs[1:], t)
    return -float(np.sum(model.log_survival(seg_ends - refs)))


def compensator(stream: EventStream, model: RenewalModel, kernel: ExcitationKernel, t: float) -> float:
    """Lambda(t) = int_0^t lambda(s) ds, exact piecewise closed forms."""
    if t < 0 or t > stream.horizon:
        raise ValueError("compensator is defined on [0, horizon] only")
    if t == 0:
        return 0.0
    total = _hazard_compensator_pieces(stream, model, t)
    past = stream.times[stream.times < t]
    if len(past):
        total += float(np.sum(kernel.mass_until(t - past)))
    return total


def compensator_at_events(
    stream: EventStream, model: RenewalModel, kernel: ExcitationKernel
) -> np.ndarray:
    """Lambda evaluated at every event time of the stream (vectorized pieces).

    The hazard part accumulates -log S over completed immigrant gaps; the
    kernel part sums exact cumulative masses over all earlier events.
    """
    if stream.convention.delay is not None:
        raise MissingReferenceError(
            "compensator undefined on a delayed stream (no hazard reference before "
            "its first immigrant)"
        )
    ev = stream.times
    if not len(ev):
        return np.empty(0)
    imm = stream.immigrant_times
    refs = imm if (len(imm) and imm[0] == 0.0) else np.concatenate([[0.0], imm])
    # hazard part: prefix sums of -log S over closed gaps between references
    gap_logsf = -np.asarray(model.log_survival(np.diff(refs)), dtype=float)
    closed = np.concatenate([[0.0], np.cumsum(gap_logsf)])
    ref_idx = np.clip(np.searchsorted(refs, ev, side="right") - 1, 0, len(refs) - 1)
    hazard_part = closed[ref_idx] - np.asarray(
        model.log_survival(ev - refs[ref_idx]), dtype=float
    )
    kernel_part = np.empty(len(ev))
    for k in range(len(ev)):
        kernel_part[k] = float(np.sum(kernel.mass_until(ev[k] - ev[:k]))) if k else 0.0
    return hazard_part + kernel_part


def martingale_residuals(
    stream: EventStream, model: RenewalModel, kernel: ExcitationKernel, grid
) -> np.ndarray:
    """N((0, t]) - Lambda(t) on a time grid (zero-mean under the model).

    The origin event (count_origin) is deterministic rather than
    intensity-generated, so counts start strictly after 0 while its
    excitation still enters Lambda.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    out = np.empty(len(grid))
    for i, t in enumerate(grid):
        n = stream.count_in(0.0, t)
        out[i] = n - compensator(stream, model, kernel, float(t))
    return out
