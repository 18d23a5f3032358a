"""Discretized latent-topology premises: path-connectedness of an occupancy
grid region and of its k-slices under orthogonal adjacency.

Verdicts are about the discretization, not the continuum region it samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .certificates import Certificate, inputs_digest
from .errors import InvalidInput

LOCAL_INJECTIVITY_NOTE = (
    "local injectivity of the mixing map is outside grid scope and must be "
    "asserted by the caller"
)

DISCRETIZATION_NOTE = (
    "grid verdicts approximate the continuum region by its occupancy mask"
)


@dataclass(frozen=True)
class GridRegion:
    """Occupied cells of a K-axis grid; coordinates are 0-based internally."""

    dims: tuple
    cells: frozenset

    def __post_init__(self):
        if not self.dims:
            raise InvalidInput("region needs at least one axis")
        if any(not isinstance(d, int) or d < 1 for d in self.dims):
            raise InvalidInput(f"axis lengths must be positive integers, got {self.dims}")
        for cell in self.cells:
            if len(cell) != len(self.dims):
                raise InvalidInput(f"cell {cell} has wrong arity for dims {self.dims}")
            if any(not 0 <= c < d for c, d in zip(cell, self.dims)):
                raise InvalidInput(f"cell {cell} outside grid {self.dims}")

    @property
    def K(self) -> int:
        return len(self.dims)

    @classmethod
    def from_occupied(cls, dims, occupied) -> "GridRegion":
        """Build from 1-based coordinate lists (the file format)."""
        cells = frozenset(tuple(int(c) - 1 for c in cell) for cell in occupied)
        return cls(dims=tuple(int(d) for d in dims), cells=cells)

    def occupied_1based(self) -> list:
        return sorted([c + 1 for c in cell] for cell in self.cells)


@dataclass(frozen=True)
class SliceSpec:
    """A k-slice: hold the axes in `fixed` constant, let the rest vary."""

    fixed: tuple  # ((axis, coord), ...) 0-based, sorted by axis
    free_axes: tuple

    def fixed_1based(self) -> dict:
        return {axis + 1: coord + 1 for axis, coord in self.fixed}


@dataclass(frozen=True)
class SliceVerdict:
    spec: SliceSpec
    connected: bool
    cell_count: int


@dataclass(frozen=True)
class SliceReport:
    k: int
    all_connected: bool
    verdicts: tuple

    def failing(self) -> list:
        return [v for v in self.verdicts if not v.connected]


def _component_count(cells: set) -> int:
    remaining = set(cells)
    count = 0
    while remaining:
        count += 1
        start = next(iter(remaining))
        stack = [start]
        remaining.discard(start)
        while stack:
            cur = stack.pop()
            for axis in range(len(cur)):
                for step in (-1, 1):
                    nxt = cur[:axis] + (cur[axis] + step,) + cur[axis + 1:]
                    if nxt in remaining:
                        remaining.discard(nxt)
                        stack.append(nxt)
    return count


def is_connected(region: GridRegion) -> bool:
    """One orthogonal flood-fill component covers every occupied cell."""
    if not region.cells:
        raise InvalidInput("empty region")
    return _component_count(set(region.cells)) == 1


def slices_connected(region: GridRegion, k: int) -> SliceReport:
    """Connectivity verdict for every nonempty k-slice of the region.

    A k-slice picks k axes to stay free and one coordinate for each of the
    other axes; its cells inherit orthogonal adjacency in the free axes.
    """
    if not region.cells:
        raise InvalidInput("empty region")
    K = region.K
    if not 1 <= k < K:
        raise InvalidInput(f"slice order {k} outside 1..{K - 1}")
    verdicts = []
    all_ok = True
    for free in combinations(range(K), k):
        fixed_axes = [a for a in range(K) if a not in free]
        seen: dict = {}
        for cell in region.cells:
            key = tuple(cell[a] for a in fixed_axes)
            seen.setdefault(key, set()).add(tuple(cell[a] for a in free))
        for key in sorted(seen):
            sub = seen[key]
            ok = _component_count(sub) == 1
            all_ok = all_ok and ok
            verdicts.append(
                SliceVerdict(
                    spec=SliceSpec(
                        fixed=tuple(sorted(zip(fixed_axes, key))),
                        free_axes=free,
                    ),
                    connected=ok,
                    cell_count=len(sub),
                )
            )
    return SliceReport(k=k, all_connected=all_ok, verdicts=tuple(verdicts))


def premise_report(region: GridRegion) -> Certificate:
    """Bundle the two grid-checkable premises of the local-to-global
    disentanglement result: the region is connected and every (K-1)-slice is
    connected.  The injectivity premise cannot be read off a grid."""
    if not region.cells:
        raise InvalidInput("empty region")
    digest = inputs_digest(
        list(region.dims), [list(c) for c in sorted(region.cells)]
    )
    connected = is_connected(region)
    witness: dict = {"isConnected": connected, "dims": list(region.dims)}
    notes = [LOCAL_INJECTIVITY_NOTE, DISCRETIZATION_NOTE]
    if region.K >= 2:
        rep = slices_connected(region, region.K - 1)
        witness["sliceOrder"] = rep.k
        witness["slicesAllConnected"] = rep.all_connected
        witness["sliceCount"] = len(rep.verdicts)
        witness["failingSlices"] = [
            {"fixed": v.spec.fixed_1based(), "cells": v.cell_count}
            for v in rep.failing()
        ]
        holds = connected and rep.all_connected
    else:
        witness["slicesAllConnected"] = None
        notes.append("single-axis region: slice premise is vacuous")
        holds = connected
    return Certificate(
        criterion="premises",
        holds=holds,
        witness=witness,
        notes=tuple(notes),
        inputs_digest=digest,
    )


def rectangle(dims) -> GridRegion:
    """Fully occupied box, the convex sanity case."""
    dims = tuple(int(d) for d in dims)
    cells = frozenset(product(*[range(d) for d in dims]))
    return GridRegion(dims=dims, cells=cells)
