"""Event records and streams shared by the simulators.

An EventStream is one realization on [0, horizon]: strictly increasing times
with branching bookkeeping.  kind is derived from the generation (immigrant
iff generation == 0), parents are indices into the same stream (-1 for
immigrants), and cluster ids group each immigrant with its descendants.
The count identity  total = #immigrants + sum_n #generation-n offspring
holds exactly by construction and is re-checked on assembly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TieError

KIND_IMMIGRANT = "immigrant"
KIND_OFFSPRING = "offspring"


@dataclass(frozen=True)
class Convention:
    """How the origin is treated and how immigrants were started.

    count_origin: S_0 = 0 is an event (and seeds a cluster) when True;
        otherwise time 0 is only the hazard reference.
    delay: None for the plain process, "stationary" for the equilibrium
        delay, "explicit" / "degenerate" for user-supplied first-arrival laws.
    """

    count_origin: bool = True
    delay: str | None = None


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str
    generation: int
    parent: int | None
    cluster_id: int
    replicate: int


@dataclass
class EventStream:
    times: np.ndarray
    generations: np.ndarray
    parents: np.ndarray  # index into this stream, -1 for immigrants
    cluster_ids: np.ndarray
    horizon: float
    convention: Convention = field(default_factory=Convention)
    replicate: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.generations = np.asarray(self.generations, dtype=np.int64)
        self.parents = np.asarray(self.parents, dtype=np.int64)
        self.cluster_ids = np.asarray(self.cluster_ids, dtype=np.int64)
        n = len(self.times)
        if not (len(self.generations) == len(self.parents) == len(self.cluster_ids) == n):
            raise ValueError("event arrays must have equal length")
        if n:
            diffs = np.diff(self.times)
            if np.any(diffs == 0):
                raise TieError("tied event times in stream")
            if np.any(diffs < 0):
                raise ValueError("event times must be increasing")
            if self.times[0] < 0 or self.times[-1] > self.horizon:
                raise ValueError("event times must lie in [0, horizon]")
        off = self.generations > 0
        if np.any(self.parents[off] < 0) or np.any(self.parents[~off] != -1):
            raise ValueError("offspring need a parent index, immigrants need -1")
        if np.any(off):
            p = self.parents[off]
            if np.any(self.times[p] >= self.times[off]):
                raise ValueError("every offspring must come strictly after its parent")
            if np.any(self.generations[p] != self.generations[off] - 1):
                raise ValueError("generation must be parent's generation + 1")
            if np.any(self.cluster_ids[p] != self.cluster_ids[off]):
                raise ValueError("offspring must stay in the parent's cluster")

    def __len__(self):
        return len(self.times)

    @property
    def kinds(self):
        return np.where(self.generations == 0, KIND_IMMIGRANT, KIND_OFFSPRING)

    @property
    def immigrant_times(self):
        return self.times[self.generations == 0]

    @property
    def n_immigrants(self):
        return int(np.sum(self.generations == 0))

    def generation_counts(self):
        """Counts per generation as a dict {generation: count}."""
        gens, counts = np.unique(self.generations, return_counts=True)
        return {int(g): int(c) for g, c in zip(gens, counts)}

    def count_in(self, lo: float, hi: float) -> int:
        """Number of events in the window (lo, hi]."""
        return int(
            np.searchsorted(self.times, hi, side="right")
            - np.searchsorted(self.times, lo, side="right")
        )

    def records(self):
        for i in range(len(self.times)):
            gen = int(self.generations[i])
            yield EventRecord(
                time=float(self.times[i]),
                kind=KIND_IMMIGRANT if gen == 0 else KIND_OFFSPRING,
                generation=gen,
                parent=None if self.parents[i] < 0 else int(self.parents[i]),
                cluster_id=int(self.cluster_ids[i]),
                replicate=self.replicate,
            )

    def to_rows(self):
        """JSON/CSV-ready dicts in the documented column order."""
        return [
            {
                "t": r.time,
                "kind": r.kind,
                "gen": r.generation,
                "parent": r.parent,
                "cluster": r.cluster_id,
                "rep": r.replicate,
            }
            for r in self.records()
        ]


def assemble_stream(
    times,
    generations,
    parents,
    cluster_ids,
    horizon: float,
    convention: Convention,
    replicate: int = 0,
) -> EventStream:
    """Sort raw event arrays by time and remap parent indices accordingly."""
    times = np.asarray(times, dtype=float)
    generations = np.asarray(generations, dtype=np.int64)
    parents = np.asarray(parents, dtype=np.int64)
    cluster_ids = np.asarray(cluster_ids, dtype=np.int64)
    order = np.argsort(times, kind="stable")
    position = np.empty(len(order), dtype=np.int64)
    position[order] = np.arange(len(order))
    sorted_parents = parents[order]
    has_parent = sorted_parents >= 0
    sorted_parents[has_parent] = position[sorted_parents[has_parent]]
    return EventStream(
        times=times[order],
        generations=generations[order],
        parents=sorted_parents,
        cluster_ids=cluster_ids[order],
        horizon=horizon,
        convention=convention,
        replicate=replicate,
    )
