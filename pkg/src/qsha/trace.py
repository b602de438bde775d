"""Simulation traces.

A trace is stored column-wise (one float array for times, one flat array
for all variable values) so dense baseline runs with millions of steps
stay compact.  Entries are materialized on access.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

INTRA = "intra"
INTER = "inter"


@dataclass(frozen=True)
class TraceEntry:
    time: float
    location: str
    valuation: Mapping[str, float]
    kind: str = INTRA
    edge: int | None = None


class Trace:
    def __init__(self, variables: Sequence[str]):
        self.variables = tuple(variables)
        self.times = array("d")
        self.values = array("d")
        self.locations: list[str] = []
        self.kinds: list[str] = []
        self.edges: list[int | None] = []
        self.diagnostics: list[str] = []
        # steps that were taken but not recorded (sparse recording)
        self.unrecorded = 0

    def append(self, time: float, location: str, values: Sequence[float], kind: str = INTRA, edge: int | None = None):
        if len(values) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} values, got {len(values)}")
        self.times.append(time)
        self.values.extend(values)
        self.locations.append(location)
        self.kinds.append(kind)
        self.edges.append(edge)

    def append_entry(self, entry: TraceEntry):
        self.append(entry.time, entry.location, [entry.valuation[v] for v in self.variables], entry.kind, entry.edge)

    def __len__(self) -> int:
        return len(self.times)

    def row(self, i: int) -> tuple[float, ...]:
        n = len(self.variables)
        if i < 0:
            i += len(self)
        return tuple(self.values[i * n : (i + 1) * n])

    def __getitem__(self, i: int) -> TraceEntry:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        return TraceEntry(
            time=self.times[i],
            location=self.locations[i],
            valuation=dict(zip(self.variables, self.row(i))),
            kind=self.kinds[i],
            edge=self.edges[i],
        )

    def __iter__(self) -> Iterator[TraceEntry]:
        for i in range(len(self)):
            yield self[i]

    def column(self, var: str) -> list[float]:
        k = self.variables.index(var)
        return list(self.values[k :: len(self.variables)])


def count_steps(trace: Trace) -> int:
    """Loop iterations: entries after the initial one."""
    return max(len(trace) - 1, 0) + trace.unrecorded


def crossing_times(trace: Trace) -> list[float]:
    return [t for t, k in zip(trace.times, trace.kinds) if k == INTER]
