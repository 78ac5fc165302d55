"""Certified stratification of cells.

Three quantities drive the coloring recursion:

* the argmax multiplicity ``M_x`` on an axis ``i`` (how many points of f(x)
  attain ``max pi_i(f(x))``),
* collision status (whether ``|f(x)| < n`` can happen on the cell),
* singleton projection status (whether ``|pi_i(f(x))| = 1``).

Every label is certified from interval enclosures; anything that cannot be
decided at the current cell size is ``AMBIGUOUS``.

The helpers at the bottom work on *groups*: a group is a tuple of branch
indices whose values are treated as one element (its enclosure is the hull of
the member boxes).  At the top level every branch is its own group; the
colorer merges groups on collision cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .geometry import Cell, DomainComplex
from .multimap import EnclosureCache, MultiMapSpec

__all__ = [
    "Certified", "AMBIGUOUS", "ALL_DISTINCT", "COLLIDES", "SINGLETON", "NON_SINGLETON",
    "StrataPartition", "argmax_multiplicity", "classify",
    "group_hulls", "top_split", "collision_status", "singleton_status",
]

ALL_DISTINCT = "AllDistinct"
COLLIDES = "Collides"
SINGLETON = "Singleton"
NON_SINGLETON = "NonSingleton"


class _Ambiguous:
    __slots__ = ()

    def __repr__(self):
        return "Ambiguous"

    def __reduce__(self):
        return "AMBIGUOUS"


AMBIGUOUS = _Ambiguous()


@dataclass(frozen=True)
class Certified:
    M: int
    gap: float = float("inf")  # separation between the top group and the rest
    top: tuple = ()  # indices (into the group list) of the top group

    def __eq__(self, other):
        if isinstance(other, Certified):
            return self.M == other.M
        return NotImplemented

    def __hash__(self):
        return hash(self.M)


@dataclass
class StrataPartition:
    axis: int
    multiplicity: dict = field(default_factory=dict)
    collision: dict = field(default_factory=dict)
    singleton: dict = field(default_factory=dict)  # cell id -> {axis: label}

    @property
    def ambiguous(self) -> list[int]:
        out = []
        for cid, lab in self.multiplicity.items():
            if (lab is AMBIGUOUS or self.collision[cid] == AMBIGUOUS
                    or self.singleton[cid][self.axis] == AMBIGUOUS):
                out.append(cid)
        return out

    def to_dict(self) -> dict:
        def fmt(lab):
            return f"Certified({lab.M})" if isinstance(lab, Certified) else repr(lab)
        return {
            "axis": self.axis,
            "cells": {
                str(cid): {
                    "multiplicity": fmt(self.multiplicity[cid]),
                    "collision": fmt(self.collision[cid]),
                    "singleton": {str(a): fmt(v) for a, v in self.singleton[cid].items()},
                }
                for cid in self.multiplicity
            },
            "ambiguous": self.ambiguous,
        }


# ---------------------------------------------------------------------------
# group-level certification

def group_hulls(bboxes: np.ndarray, groups) -> np.ndarray:
    """Hull box of each group, shape (len(groups), k, 2)."""
    out = np.empty((len(groups), bboxes.shape[1], 2))
    for g, members in enumerate(groups):
        sub = bboxes[list(members)]
        out[g, :, 0] = sub[:, :, 0].min(axis=0)
        out[g, :, 1] = sub[:, :, 1].max(axis=0)
    return out


def _coords_equal(m: MultiMapSpec, branches, axis: int, bboxes: np.ndarray) -> bool:
    """Certify that all listed branches have the same coordinate ``axis`` everywhere."""
    exprs = {m.branches[j][axis] for j in branches}
    if len(exprs) == 1:
        return True
    ivs = bboxes[list(branches), axis]
    return ivs[:, 1].max() - ivs[:, 0].min() <= m.tau_dedup


def _same_point(m: MultiMapSpec, a: int, b: int) -> bool:
    return m.branches[a] == m.branches[b]


def _disjoint(A: np.ndarray, B: np.ndarray) -> bool:
    return bool(((A[:, 1] < B[:, 0]) | (B[:, 1] < A[:, 0])).any())


def top_split(m: MultiMapSpec, bboxes: np.ndarray, groups, axis: int):
    """Certify the argmax group on ``axis`` for groups of branches on one cell.

    Returns ``Certified(M, gap, top)`` or ``AMBIGUOUS``.  ``top`` lists the
    group indices attaining the maximum; ``M`` counts distinct points.
    """
    if len(groups) == 1:
        return Certified(1, float("inf"), (0,))
    hulls = group_hulls(bboxes, groups)
    ivs = hulls[:, axis]
    max_lo = ivs[:, 0].max()
    top = [g for g in range(len(groups)) if ivs[g, 1] >= max_lo]
    rest = [g for g in range(len(groups)) if g not in top]
    if rest:
        gap = ivs[top, 0].min() - ivs[rest, 1].max()
        if not gap > 0.0:
            return AMBIGUOUS
    else:
        gap = float("inf")
    top_branches = [j for g in top for j in groups[g]]
    if not _coords_equal(m, top_branches, axis, bboxes):
        return AMBIGUOUS
    for g in top:
        members = groups[g]
        if len(members) > 1 and not all(_same_point(m, members[0], j) for j in members[1:]):
            return AMBIGUOUS
    # count distinct points: identical branches collapse, the rest must separate
    reps: list[int] = []
    for g in top:
        if any(_same_point(m, groups[g][0], groups[r][0]) for r in reps):
            continue
        if any(not _disjoint(hulls[g], hulls[r]) for r in reps):
            return AMBIGUOUS
        reps.append(g)
    return Certified(len(reps), float(gap), tuple(top))


def collision_status(m: MultiMapSpec, bboxes: np.ndarray, groups) -> str:
    """AllDistinct if the group values are pairwise separated on the whole cell,
    Collides if two groups provably share a point everywhere."""
    hulls = group_hulls(bboxes, groups)
    touching = [(a, b) for a, b in combinations(range(len(groups)), 2)
                if not _disjoint(hulls[a], hulls[b])]
    if not touching:
        return ALL_DISTINCT
    for a, b in touching:
        if any(_same_point(m, ja, jb) for ja in groups[a] for jb in groups[b]):
            return COLLIDES
    return AMBIGUOUS


def singleton_status(m: MultiMapSpec, bboxes: np.ndarray, groups, axis: int) -> str:
    branches = [j for g in groups for j in g]
    if _coords_equal(m, branches, axis, bboxes):
        return SINGLETON
    hulls = group_hulls(bboxes, groups)
    ivs = hulls[:, axis]
    if ivs[:, 0].max() > ivs[:, 1].min():
        return NON_SINGLETON
    return AMBIGUOUS


# ---------------------------------------------------------------------------
# branch-level API

def _branch_groups(m: MultiMapSpec):
    return tuple((j,) for j in range(m.n))


def argmax_multiplicity(m: MultiMapSpec, c: Cell, i: int, enclosures: EnclosureCache | None = None):
    """Certified(M) if |{y in f(x): pi_i(y) = max pi_i(f(x))}| = M on all of c."""
    if m.n == 1:
        return Certified(1, float("inf"), (0,))
    bboxes = (enclosures or EnclosureCache(m))(c)
    return top_split(m, bboxes, _branch_groups(m), i)


def _label_cell(m, enclosures, c, i):
    bboxes = enclosures(c)
    groups = _branch_groups(m)
    if m.n == 1:
        mult = Certified(1, float("inf"), (0,))
    else:
        mult = top_split(m, bboxes, groups, i)
    coll = ALL_DISTINCT if m.n == 1 else collision_status(m, bboxes, groups)
    sing = {a: singleton_status(m, bboxes, groups, a) for a in range(m.k)}
    return mult, coll, sing


def classify(m: MultiMapSpec, X: DomainComplex, i: int, max_depth: int = 12,
             enclosures: EnclosureCache | None = None) -> StrataPartition:
    """Label every cell of X, bisecting ambiguous cells up to ``max_depth``.

    Mutates X (refinement).  Cells still ambiguous at the depth limit are
    listed in ``partition.ambiguous``.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    enclosures = enclosures or EnclosureCache(m)
    part = StrataPartition(axis=i)
    queue = list(X.active_ids)
    while queue:
        next_queue = []
        for cid in queue:
            c = X[cid]
            mult, coll, sing = _label_cell(m, enclosures, c, i)
            ambiguous = mult is AMBIGUOUS or coll == AMBIGUOUS or sing[i] == AMBIGUOUS
            if ambiguous and X.depth[cid] < max_depth and max(c.widths) > 0.0:
                a, b = X.refine(cid)
                next_queue += [a.id, b.id]
                continue
            part.multiplicity[cid] = mult
            part.collision[cid] = coll
            part.singleton[cid] = sing
        queue = next_queue
    # report in the complex's active order
    order = {cid: n for n, cid in enumerate(X.active_ids)}
    for name in ("multiplicity", "collision", "singleton"):
        d = getattr(part, name)
        setattr(part, name, {cid: d[cid] for cid in sorted(d, key=order.__getitem__)})
    return part
