"""Statistical checks that the two process representations agree.

Each check returns a DiagnosticsReport rather than raising on statistical
failure; exceptions are reserved for unusable inputs (too few gaps, broken
preconditions).  Seeds are expanded into independent substreams per
(batch, replicate) so every report is reproducible from (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .distributions import ExcitationKernel, RenewalModel, kernel_mass
from .errors import InsufficientDataError, RhpError, SubcriticalityError
from .renewal import renewal_table
from .seeding import substream
from .simulate import (
    compensator_at_events,
    simulate_rhp_cluster,
    simulate_rhp_stationary,
    simulate_rhp_thinning,
)

# two-sample KS critical-value coefficient at level 0.01:
# D_crit = 1.628 * sqrt((n + m) / (n * m))
KS_COEFF_01 = 1.628


@dataclass
class DiagnosticsReport:
    test: str
    statistic: float
    p_value: float | None
    passed: bool
    level: float
    sizes: dict = field(default_factory=dict)
    detail: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "pass": self.passed,
            "level": self.level,
            "sizes": dict(self.sizes),
            "detail": [dict(row) for row in self.detail],
        }


def transformed_gaps(stream, model: RenewalModel, kernel: ExcitationKernel) -> np.ndarray:
    """Inter-event gaps of the compensator-transformed process.

    A deterministic origin event at time 0 contributes no gap of its own
    (its compensator value is exactly 0) but its excitation stays inside the
    compensator of every later event.
    """
    if len(stream.times) == 0:
        return np.empty(0)
    lam = compensator_at_events(stream, model, kernel)
    gaps = np.diff(lam, prepend=0.0)
    if stream.times[0] == 0.0:
        gaps = gaps[1:]
    return gaps


def time_rescaling_test(
    streams,
    model: RenewalModel,
    kernel: ExcitationKernel,
    level: float = 0.01,
) -> DiagnosticsReport:
    """KS test of pooled compensator-transformed gaps against Exp(1)."""
    pooled = []
    detail = []
    for stream in streams:
        gaps = transformed_gaps(stream, model, kernel)
        pooled.append(gaps)
        detail.append({"replicate": stream.replicate, "events": len(stream.times), "gaps": gaps.size})
    pooled = np.concatenate(pooled) if pooled else np.empty(0)
    if pooled.size < 100:
        raise InsufficientDataError(
            f"time-rescaling test needs at least 100 pooled gaps, got {pooled.size}"
        )
    statistic, p_value = stats.kstest(pooled, "expon")
    return DiagnosticsReport(
        test="time_rescaling",
        statistic=float(statistic),
        p_value=float(p_value),
        passed=bool(p_value > level),
        level=level,
        sizes={"streams": len(streams), "gaps": int(pooled.size)},
        detail=detail,
    )


def _window_edges(horizon: float, window: float) -> np.ndarray:
    n = int(math.floor(horizon / window + 1e-9))
    if n < 1:
        raise ValueError("window longer than horizon")
    return window * np.arange(n + 1)


def _simulate_counts(model, kernel, horizon, edges, reps, seed, batch, method, count_origin):
    counts = np.empty((reps, len(edges) - 1), dtype=np.int64)
    for r in range(reps):
        rng = substream(seed, batch, r)
        if method == "cluster":
            stream = simulate_rhp_cluster(model, kernel, horizon, rng, count_origin=count_origin, replicate=r)
        elif method == "thinning":
            stream = simulate_rhp_thinning(model, kernel, horizon, rng, count_origin=count_origin, replicate=r)
        elif method == "stationary":
            stream = simulate_rhp_stationary(model, kernel, horizon, rng, replicate=r)
        else:
            raise ValueError(f"unknown method {method!r}")
        for w in range(len(edges) - 1):
            counts[r, w] = stream.count_in(edges[w], edges[w + 1])
    return counts


def cross_simulator_test(
    model: RenewalModel,
    kernel: ExcitationKernel,
    horizon: float,
    reps: int,
    seed: int = 0,
    window: float = 10.0,
    count_origin: bool = True,
    level: float = 0.01,
    methods: tuple = ("cluster", "thinning"),
) -> DiagnosticsReport:
    """Two-sample KS on per-window counts between two simulators.

    Bonferroni across windows: a window rejects when its p-value falls
    below level / n_windows.  methods=("cluster", "cluster") gives the
    split-sample calibration run (independent substreams per side).
    """
    kernel_mass(kernel)
    edges = _window_edges(horizon, window)
    counts_a = _simulate_counts(model, kernel, horizon, edges, reps, seed, 0, methods[0], count_origin)
    counts_b = _simulate_counts(model, kernel, horizon, edges, reps, seed, 1, methods[1], count_origin)
    n_windows = len(edges) - 1
    threshold = level / n_windows
    detail = []
    worst_stat = 0.0
    min_p = 1.0
    for w in range(n_windows):
        res = stats.ks_2samp(counts_a[:, w], counts_b[:, w])
        reject = bool(res.pvalue < threshold)
        detail.append(
            {
                "window_lo": float(edges[w]),
                "window_hi": float(edges[w + 1]),
                "statistic": float(res.statistic),
                "p_value": float(res.pvalue),
                "reject": reject,
            }
        )
        worst_stat = max(worst_stat, float(res.statistic))
        min_p = min(min_p, float(res.pvalue))
    return DiagnosticsReport(
        test="cross_simulator",
        statistic=worst_stat,
        p_value=min_p,
        passed=not any(row["reject"] for row in detail),
        level=level,
        sizes={"reps_per_side": reps, "windows": n_windows},
        detail=detail,
    )


def existence_preconditions(
    model: RenewalModel,
    kernel: ExcitationKernel,
    horizon: float = 10.0,
    step: float = 0.01,
) -> DiagnosticsReport:
    """Runtime verification of the existence/finiteness conditions.

    Rows: finite mean interarrival, interarrival density (the standing
    assumption), renewal function finite on a bounded window, satellite
    shift-equivariance, and subcritical branching.  Statistical failures do
    not raise; each row carries its own status and note.
    """
    rows = []

    mean = model.mean_interarrival
    rows.append(
        {
            "condition": "finite_mean_interarrival",
            "ok": bool(math.isfinite(mean)),
            "note": f"mean interarrival = {mean}",
        }
    )

    ok_density = bool(model.has_density and model.is_proper)
    rows.append(
        {
            "condition": "interarrival_density",
            "ok": ok_density,
            "note": "proper density available" if ok_density else "no proper interarrival density",
        }
    )

    try:
        table = renewal_table(model, horizon, step)
        finite = bool(np.all(np.isfinite(table.phi_fn)))
        note = f"renewal function <= {float(table.phi_fn[-1]):.6g} on [0, {horizon}]"
    except RhpError as exc:
        finite = False
        note = str(exc)
    rows.append({"condition": "renewal_function_finite", "ok": finite, "note": note})

    rows.append(
        {
            "condition": "satellite_shift_equivariance",
            "ok": True,
            "note": "offspring displacements depend only on elapsed time since parent (by construction)",
        }
    )

    try:
        mass = kernel_mass(kernel)
        ok_sub = True
        note = f"branching ratio {mass:.6g} < 1"
    except SubcriticalityError as exc:
        ok_sub = False
        note = str(exc)
    rows.append({"condition": "subcritical_branching", "ok": ok_sub, "note": note})

    n_fail = sum(1 for row in rows if not row["ok"])
    return DiagnosticsReport(
        test="existence_preconditions",
        statistic=float(n_fail),
        p_value=None,
        passed=n_fail == 0,
        level=0.0,
        sizes={"conditions": len(rows)},
        detail=rows,
    )


def stationarity_and_convergence(
    model: RenewalModel,
    kernel: ExcitationKernel,
    shifts=(25.0, 50.0, 100.0, 150.0, 200.0),
    window: float = 10.0,
    reps: int = 2000,
    seed: int = 0,
    level: float = 0.01,
    count_origin: bool = True,
) -> DiagnosticsReport:
    """Shift-invariance of the stationary process plus convergence to it.

    (a) window counts of the stationary process at the given shifts are
        exchangeable: every pairwise two-sample KS has p > level,
    (b) the plain process converges: the KS distance between its window
        counts and the stationary counterpart is nonincreasing in the shift
        (within half the critical value as noise slack) and falls below the
        critical value at the largest shift,
    (c) the stationary rate matches m/(1-alpha) within 3 SE at every shift.

    Batches are simulated independently per shift and per side so every KS
    comparison sees independent samples.
    """
    shifts = [float(s) for s in shifts]
    if any(b <= a for a, b in zip(shifts, shifts[1:])):
        raise ValueError("shifts must be strictly increasing")
    alpha = kernel_mass(kernel)
    mean = model.mean_interarrival
    if not math.isfinite(mean):
        raise RhpError("stationarity check needs a finite mean interarrival")
    target_rate = (1.0 / mean) / (1.0 - alpha)

    plain_counts = np.empty((reps, len(shifts)), dtype=np.int64)
    for r in range(reps):
        rng = substream(seed, 0, r)
        stream = simulate_rhp_cluster(
            model, kernel, shifts[-1] + window, rng, count_origin=count_origin, replicate=r
        )
        for i, s in enumerate(shifts):
            plain_counts[r, i] = stream.count_in(s, s + window)

    stat_counts = []
    for i, s in enumerate(shifts):
        counts = np.empty(reps, dtype=np.int64)
        for r in range(reps):
            rng = substream(seed, 1 + i, r)
            stream = simulate_rhp_stationary(model, kernel, s + window, rng, replicate=r)
            counts[r] = stream.count_in(s, s + window)
        stat_counts.append(counts)

    detail = []
    min_p = 1.0
    ok_pairwise = True
    for i in range(len(shifts)):
        for j in range(i + 1, len(shifts)):
            res = stats.ks_2samp(stat_counts[i], stat_counts[j])
            p = float(res.pvalue)
            min_p = min(min_p, p)
            ok = p > level
            ok_pairwise = ok_pairwise and ok
            detail.append(
                {
                    "part": "pairwise",
                    "shift_a": shifts[i],
                    "shift_b": shifts[j],
                    "statistic": float(res.statistic),
                    "p_value": p,
                    "ok": ok,
                }
            )

    critical = KS_COEFF_01 * math.sqrt(2.0 / reps)
    slack = 0.5 * critical
    distances = []
    for i, s in enumerate(shifts):
        res = stats.ks_2samp(plain_counts[:, i], stat_counts[i])
        distances.append(float(res.statistic))
        detail.append(
            {
                "part": "convergence",
                "shift": s,
                "distance": float(res.statistic),
                "critical": critical,
            }
        )
    ok_monotone = all(b <= a + slack for a, b in zip(distances, distances[1:]))
    ok_limit = distances[-1] < critical

    ok_rate = True
    for i, s in enumerate(shifts):
        est = float(np.mean(stat_counts[i])) / window
        se = float(np.std(stat_counts[i], ddof=1)) / math.sqrt(reps) / window
        ok = abs(est - target_rate) <= 3.0 * se
        ok_rate = ok_rate and ok
        detail.append(
            {
                "part": "rate",
                "shift": s,
                "estimate": est,
                "target": target_rate,
                "se": se,
                "ok": ok,
            }
        )

    return DiagnosticsReport(
        test="stationarity_and_convergence",
        statistic=distances[-1],
        p_value=min_p,
        passed=bool(ok_pairwise and ok_monotone and ok_limit and ok_rate),
        level=level,
        sizes={"reps": reps, "shifts": len(shifts)},
        detail=detail,
    )
