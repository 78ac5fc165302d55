"""Bright colorings of fixed-point-free maps into exp_n(R^k).

The construction follows the inductive proof: cells where values collide are
colored as a map with fewer values; elsewhere the values are split into the
points attaining the maximum of a coordinate and the rest, each part is
colored recursively and the two colorings are intersected.  Single-valued
maps are colored directly (slabs along the displacement direction, with a
greedy conflict-graph fallback).

Internally a derived map is a *cell map*: cell id -> tuple of groups, where a
group is a tuple of branch indices treated as one value whose enclosure is the
hull of its branch boxes.  Lookups fall back to the nearest ancestor, so a
cell map stays valid when its cells are bisected later.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Iterable

import numpy as np

from .geometry import DomainComplex, box_array, boxset_separation
from .multimap import EnclosureCache, FpfCertificate, MultiMapSpec
from .strata import (AMBIGUOUS, NON_SINGLETON, SINGLETON, Certified, group_hulls,
                     singleton_status, top_split)

__all__ = [
    "Coloring", "ColoringFailed", "StrataViolation", "InconclusiveStrata",
    "bound", "color_single_valued", "product_coloring", "split_argmax_coloring",
    "stratified_coloring", "color_multimap", "inflate_color", "greedy_conflict_coloring",
    "default_delta_out",
]

log = logging.getLogger(__name__)


class ColoringFailed(RuntimeError):
    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = list(cells)


class StrataViolation(RuntimeError):
    pass


class InconclusiveStrata(RuntimeError):
    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = list(cells)


@dataclass
class Coloring:
    """Ordered list of color classes (sets of cell ids) with their margins.

    Classes may overlap; together they must cover the target cells.
    """

    classes: list = field(default_factory=list)
    margins: list = field(default_factory=list)
    provenance: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    @property
    def cells(self) -> set:
        out = set()
        for c in self.classes:
            out |= c
        return out

    def add(self, cells: Iterable[int], margin: float, tag: str) -> None:
        cells = frozenset(cells)
        if cells:
            self.classes.append(cells)
            self.margins.append(float(margin))
            self.provenance.append(tag)

    def extend(self, other: "Coloring") -> "Coloring":
        self.classes += other.classes
        self.margins += other.margins
        self.provenance += other.provenance
        return self

    def lift(self, X: DomainComplex) -> "Coloring":
        """Same coloring expressed on the currently active cells of X."""
        return Coloring([frozenset(X.leaves(c)) for c in self.classes], list(self.margins),
                        list(self.provenance), dict(self.meta))

    def to_dict(self) -> dict:
        return {
            "classes": [
                {"cells": sorted(int(i) for i in c), "margin": m, "provenance": p}
                for c, m, p in zip(self.classes, self.margins, self.provenance)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Coloring":
        out = cls()
        for entry in d["classes"]:
            out.classes.append(frozenset(int(i) for i in entry["cells"]))
            out.margins.append(float(entry.get("margin", 0.0)))
            out.provenance.append(entry.get("provenance", ""))
        return out


# ---------------------------------------------------------------------------
# color-count ledger

@lru_cache(maxsize=None)
def bound(m: int, n: int) -> int:
    """Upper bound K(m, n) on the classes ``color_multimap`` is designed to use.

    ``K(m, 1) = m + 3`` (the single-valued base case).  For ``n >= 2``, with
    ``K1 = K(m, n-1)`` and one term per stage of the construction::

        K(m, n) = K1                                  collision cells, n-1 values
                + m * K1**2                           one argmax split per axis
                                                      (all other projections trivial)
                + sum_{j=2}^{m-1} C(m, j) * n * K1**2 index sets of size j, each
                                                      colored stratum by stratum
                + n * K1**2                           no trivial projection, colored
                                                      stratum by stratum

    A stratum-by-stratum coloring uses at most ``n - 1`` argmax splits of
    ``K1**2`` classes; ``n`` bounds the number of strata.  The last term
    is ``n * K1**2`` rather than ``K1**2`` because on that stage the argmax
    multiplicity need not be 1 when the number of values exceeds the dimension.
    """
    if m < 1 or n < 1:
        raise ValueError(f"bound needs m >= 1 and n >= 1, got ({m}, {n})")
    if n == 1:
        return m + 3
    k1 = bound(m, n - 1)
    sq = k1 * k1
    middle = sum(comb(m, j) for j in range(2, m))
    return k1 + m * sq + middle * n * sq + n * sq


def default_delta_out(cert: FpfCertificate | None) -> float:
    if cert is None:
        return 1e-6
    return max(1e-6, cert.margin / 4)


# ---------------------------------------------------------------------------
# shared machinery

class _Context:
    def __init__(self, m: MultiMapSpec, X: DomainComplex, delta_out: float,
                 max_depth: int = 12, seed: int = 0, enclosures: EnclosureCache | None = None,
                 allow_fallback: bool = True, tripwire_samples: int = 4):
        self.m = m
        self.X = X
        self.delta_out = float(delta_out)
        self.max_depth = max_depth
        self.enc = enclosures or EnclosureCache(m)
        self.rng = np.random.default_rng(seed)
        self.allow_fallback = allow_fallback
        self.tripwire_samples = tripwire_samples
        self.stats = {"refined": 0, "fallback_cells": 0, "residual_cells": 0}

    def order(self, ids) -> list[int]:
        pos = {cid: n for n, cid in enumerate(self.X.active_ids)}
        return sorted(self.X.leaves(ids), key=pos.__getitem__)

    def groups(self, cellmap: dict, cid: int):
        for a in self.X.ancestors(cid):
            if a in cellmap:
                return cellmap[a]
        raise KeyError(f"cell {cid} has no groups in this map")

    def hulls(self, cellmap: dict, cid: int) -> np.ndarray:
        return group_hulls(self.enc(self.X[cid]), self.groups(cellmap, cid))

    def cell_boxes(self, ids) -> np.ndarray:
        return box_array([self.X[i] for i in ids])

    def image_boxes(self, cellmap: dict, ids) -> np.ndarray:
        return np.concatenate([self.hulls(cellmap, i) for i in ids])

    def margin(self, cellmap: dict, ids) -> float:
        ids = list(ids)
        return boxset_separation(self.cell_boxes(ids), self.image_boxes(cellmap, ids))

    def refine(self, cid: int) -> list[int]:
        a, b = self.X.refine(cid)
        self.stats["refined"] += 1
        return [a.id, b.id]

    def can_refine(self, cid: int) -> bool:
        return self.X.depth[cid] < self.max_depth and max(self.X[cid].widths) > 0.0


def _full_map(m: MultiMapSpec, X: DomainComplex) -> dict:
    groups = tuple((j,) for j in range(m.n))
    return {cid: groups for cid in X.active_ids}


def _new_context(m, X, cert, delta_out, max_depth, seed, **kw) -> _Context:
    if delta_out is None:
        delta_out = default_delta_out(cert)
    return _Context(m, X, delta_out, max_depth, seed, **kw)


# ---------------------------------------------------------------------------
# single-valued base case

def _self_separate(ctx: _Context, cellmap: dict, region) -> list[int]:
    """Refine cells until each one is at least delta_out away from its image."""
    out = []
    pending = ctx.order(region)
    while pending:
        cid = pending.pop(0)
        sep = boxset_separation(ctx.cell_boxes([cid]), ctx.hulls(cellmap, cid))
        if sep >= ctx.delta_out:
            out.append(cid)
        elif ctx.can_refine(cid):
            pending[:0] = ctx.refine(cid)
        else:
            raise ColoringFailed(
                f"cell {cid} stays within {ctx.delta_out:g} of its own image at the depth limit",
                [cid])
    return out


class _ColorBin:
    __slots__ = ("ids", "cells", "images")

    def __init__(self, ids, cells, images):
        self.ids, self.cells, self.images = list(ids), cells, images

    def compatible(self, ids, cells, images, delta) -> bool:
        return (boxset_separation(cells, self.images) >= delta
                and boxset_separation(self.cells, images) >= delta)

    def absorb(self, ids, cells, images):
        self.ids += list(ids)
        self.cells = np.concatenate([self.cells, cells])
        self.images = np.concatenate([self.images, images])


def _first_fit(ctx: _Context, cellmap: dict, units: list[list[int]]) -> list[list[int]]:
    bins: list[_ColorBin] = []
    delta = ctx.delta_out
    for unit in units:
        cells = ctx.cell_boxes(unit)
        images = ctx.image_boxes(cellmap, unit)
        if len(unit) > 1 and boxset_separation(cells, images) < delta:
            parts = [[cid] for cid in unit]
        else:
            parts = [unit]
        for part in parts:
            if part is not unit:
                cells = ctx.cell_boxes(part)
                images = ctx.image_boxes(cellmap, part)
            for b in bins:
                if b.compatible(part, cells, images, delta):
                    b.absorb(part, cells, images)
                    break
            else:
                bins.append(_ColorBin(part, cells, images))
    return _merge_bins(ctx, bins)


def _merge_bins(ctx: _Context, bins: list[_ColorBin]) -> list[list[int]]:
    merged = True
    while merged and len(bins) > 1:
        merged = False
        order = sorted(range(len(bins)), key=lambda i: len(bins[i].ids))
        for i in order:
            for j in range(len(bins)):
                if i == j:
                    continue
                if bins[j].compatible(bins[i].ids, bins[i].cells, bins[i].images, ctx.delta_out):
                    bins[j].absorb(bins[i].ids, bins[i].cells, bins[i].images)
                    del bins[i]
                    merged = True
                    break
            if merged:
                break
    return [b.ids for b in bins]


def _slabs(ctx: _Context, cellmap: dict, ids: list[int]) -> list[list[int]]:
    """Cut the cells into slabs transverse to their displacement direction.

    Each cell is assigned the (axis, sign) along which its image is farthest
    from it; cells sharing a direction are swept along that axis and cut into
    slabs that stay clear of their own images.
    """
    sectors: dict[tuple, list] = {}
    for cid in ids:
        box = ctx.X[cid].array()
        img = ctx.hulls(cellmap, cid)[0]
        up = img[:, 0] - box[:, 1]
        down = box[:, 0] - img[:, 1]
        a_up, a_down = int(np.argmax(up)), int(np.argmax(down))
        key = (a_up, 1) if up[a_up] >= down[a_down] else (a_down, -1)
        sectors.setdefault(key, []).append((cid, box, img))
    slabs = []
    delta = ctx.delta_out
    for (axis, sign) in sorted(sectors):
        members = sectors[(axis, sign)]
        if sign > 0:
            members.sort(key=lambda t: (t[1][axis, 0], tuple(t[1][:, 0])))
        else:
            members.sort(key=lambda t: (-t[1][axis, 1], tuple(t[1][:, 0])))
        slab: list[int] = []
        front = reach = 0.0
        for cid, box, img in members:
            if sign > 0:
                f, r = box[axis, 1], img[axis, 0]
                ok = slab and max(front, f) <= min(reach, r) - delta
            else:
                f, r = -box[axis, 0], -img[axis, 1]
                ok = slab and max(front, f) <= min(reach, r) - delta
            if ok:
                slab.append(cid)
                front, reach = max(front, f), min(reach, r)
            else:
                if slab:
                    slabs.append(slab)
                slab, front, reach = [cid], f, r
        if slab:
            slabs.append(slab)
    return slabs


def _greedy_classes(ctx: _Context, cellmap: dict, ids: list[int]) -> list[list[int]]:
    """Descending-degree greedy coloring of the conflict graph on ``ids``."""
    cells = ctx.cell_boxes(ids)
    owners = []
    images = []
    for n, cid in enumerate(ids):
        h = ctx.hulls(cellmap, cid)
        images.append(h)
        owners += [n] * len(h)
    images = np.concatenate(images)
    owners = np.asarray(owners)
    N = len(ids)
    conflict = np.zeros((N, N), dtype=bool)
    for s in range(0, N, 128):
        blk = cells[s:s + 128]
        gap = np.maximum(np.maximum(images[None, :, :, 0] - blk[:, None, :, 1],
                                    blk[:, None, :, 0] - images[None, :, :, 1]), 0.0)
        close = np.sqrt((gap * gap).sum(-1)) < ctx.delta_out  # (blk, images)
        rows, cols = np.nonzero(close)
        conflict[s + rows, owners[cols]] = True
    if conflict.diagonal().any():
        raise ColoringFailed("self-conflicting cell in greedy coloring",
                             [ids[i] for i in np.nonzero(conflict.diagonal())[0]])
    conflict |= conflict.T
    degree = conflict.sum(axis=1)
    order = sorted(range(N), key=lambda i: (-degree[i], i))
    color = np.full(N, -1)
    for i in order:
        used = set(color[conflict[i]].tolist())
        c = 0
        while c in used:
            c += 1
        color[i] = c
    return [[ids[i] for i in range(N) if color[i] == c] for c in range(color.max() + 1)]


def _color_single(ctx: _Context, cellmap: dict, region, tag: str) -> Coloring:
    ids = _self_separate(ctx, cellmap, region)
    if not ids:
        return Coloring()
    classes = _first_fit(ctx, cellmap, _slabs(ctx, cellmap, ids))
    method = "slab"
    if len(classes) > ctx.m.k + 3:
        try:
            alt = _greedy_classes(ctx, cellmap, ids)
        except ColoringFailed:
            alt = None
        if alt is not None and len(alt) < len(classes):
            classes, method = alt, "greedy"
    out = Coloring()
    for cls in classes:
        out.add(cls, ctx.margin(cellmap, cls), f"{tag}single[{method}]")
    return out


# ---------------------------------------------------------------------------
# combinators

def product_coloring(Cg: Coloring, Ch: Coloring, X: DomainComplex | None = None,
                     tag: str | None = None) -> Coloring:
    """Nonempty pairwise intersections of the classes of Cg and Ch.

    Both colorings must cover the same cells (after lifting to X's current
    generation when X is given).
    """
    if X is not None:
        Cg, Ch = Cg.lift(X), Ch.lift(X)
    if Cg.cells != Ch.cells:
        raise ValueError("product_coloring needs colorings of the same cell set")
    out = Coloring()
    for G, mg, pg in zip(Cg.classes, Cg.margins, Cg.provenance):
        for H, mh, ph in zip(Ch.classes, Ch.margins, Ch.provenance):
            inter = G & H
            if inter:
                label = f"{pg} & {ph}" if tag is None else f"{tag}({pg} & {ph})"
                out.add(inter, min(mg, mh), label)
    return out


def _tripwire_split(ctx: _Context, cellmap, ids, axis, gmap):
    """Sample points and check that the value-defined split matches the certified one."""
    m = ctx.m
    if not ids or ctx.tripwire_samples <= 0:
        return
    picks = ctx.rng.choice(len(ids), size=min(len(ids), ctx.tripwire_samples), replace=False)
    for p in picks:
        cid = ids[int(p)]
        c = ctx.X[cid]
        lo, hi = np.array(c.lo), np.array(c.hi)
        x = lo + (hi - lo) * ctx.rng.random(m.k)
        groups = ctx.groups(cellmap, cid)
        vals = {j: m.branch_point(j, x) for g in groups for j in g}
        top = max(v[axis] for v in vals.values())
        certified = {j for g in gmap[cid] for j in g}
        for j, v in vals.items():
            attains = v[axis] >= top - m.tau_dedup
            if attains != (j in certified):
                raise StrataViolation(
                    f"argmax split on axis {axis} contradicted at x={tuple(x)} in cell {cid}")


def _split(ctx: _Context, cellmap: dict, region, axis: int, recurse, tag: str) -> Coloring:
    ids = ctx.order(region)
    if not ids:
        return Coloring()
    gmap, hmap = {}, {}
    for cid in ids:
        groups = ctx.groups(cellmap, cid)
        cert = top_split(ctx.m, ctx.enc(ctx.X[cid]), groups, axis)
        if cert is AMBIGUOUS:
            raise StrataViolation(f"cell {cid} has no certified argmax group on axis {axis}")
        if len(cert.top) >= len(groups):
            raise ValueError(f"cell {cid}: all values attain the maximum on axis {axis} "
                             "(argmax split needs M < |f(x)|)")
        gmap[cid] = tuple(groups[g] for g in cert.top)
        hmap[cid] = tuple(groups[g] for g in range(len(groups)) if g not in cert.top)
    _tripwire_split(ctx, cellmap, ids, axis, gmap)
    Cg = recurse(ctx, gmap, ids, f"{tag}g:")
    Ch = recurse(ctx, hmap, ids, f"{tag}h:")
    return product_coloring(Cg, Ch, ctx.X, tag=f"{tag}split[{axis}]")


def _stratified(ctx: _Context, cellmap: dict, region, axis: int, recurse, tag: str) -> Coloring:
    ids = ctx.order(region)
    strata: dict[int, list[int]] = {}
    n = 0
    for cid in ids:
        groups = ctx.groups(cellmap, cid)
        n = max(n, len(groups))
        cert = top_split(ctx.m, ctx.enc(ctx.X[cid]), groups, axis)
        if cert is AMBIGUOUS:
            raise StrataViolation(f"cell {cid} has no certified multiplicity on axis {axis}")
        strata.setdefault(cert.M, []).append(cid)
    out = Coloring()
    # step m colors the stratum with multiplicity n - m
    for step in range(1, n):
        M = n - step
        if M in strata:
            out.extend(_split(ctx, cellmap, strata.pop(M), axis, recurse, f"{tag}A{step}:"))
    if strata:
        raise StrataViolation(f"multiplicities {sorted(strata)} outside 1..{n - 1}")
    return out


# ---------------------------------------------------------------------------
# main recursion

def _merge_touching(hulls: np.ndarray, groups) -> tuple:
    parent = list(range(len(groups)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            A, B = hulls[a], hulls[b]
            if not ((A[:, 1] < B[:, 0]) | (B[:, 1] < A[:, 0])).any():
                parent[find(a)] = find(b)
    merged: dict[int, list] = {}
    for g in range(len(groups)):
        merged.setdefault(find(g), []).extend(groups[g])
    return tuple(tuple(sorted(v)) for v in sorted(merged.values(), key=min))


def _pairwise_disjoint(hulls: np.ndarray) -> bool:
    for a in range(len(hulls)):
        for b in range(a + 1, len(hulls)):
            A, B = hulls[a], hulls[b]
            if not ((A[:, 1] < B[:, 0]) | (B[:, 1] < A[:, 0])).any():
                return False
    return True


def _axis_labels(ctx: _Context, cellmap: dict, cid: int):
    groups = ctx.groups(cellmap, cid)
    bboxes = ctx.enc(ctx.X[cid])
    n = len(groups)
    sing, cert = {}, {}
    for a in range(ctx.m.k):
        sing[a] = singleton_status(ctx.m, bboxes, groups, a)
        c = top_split(ctx.m, bboxes, groups, a)
        cert[a] = c if isinstance(c, Certified) and c.M < n else AMBIGUOUS
    return sing, cert


def _usable_axes(sing, cert) -> list[int]:
    return [a for a in sing if sing[a] == NON_SINGLETON and cert[a] is not AMBIGUOUS]


def _color(ctx: _Context, cellmap: dict, region, tag: str = "") -> Coloring:
    ids = ctx.order(region)
    if not ids:
        return Coloring()
    n = max(len(ctx.groups(cellmap, cid)) for cid in ids)
    if n == 1:
        return _color_single(ctx, cellmap, ids, tag)

    # collision cells: fewer than n separated values
    L, E = {}, []
    for cid in ids:
        groups = ctx.groups(cellmap, cid)
        hulls = ctx.hulls(cellmap, cid)
        if len(groups) < n or not _pairwise_disjoint(hulls):
            L[cid] = _merge_touching(hulls, groups)
        else:
            E.append(cid)
    out = Coloring()
    if L:
        out.extend(_color(ctx, L, list(L), f"{tag}L:"))

    # refine E cells that offer no certified split axis
    labels = {}
    pending = list(E)
    E = []
    while pending:
        cid = pending.pop(0)
        sing, cert = _axis_labels(ctx, cellmap, cid)
        if not _usable_axes(sing, cert) and ctx.can_refine(cid):
            pending[:0] = ctx.refine(cid)
            continue
        labels[cid] = (sing, cert)
        E.append(cid)

    stages: dict[tuple, list[int]] = {}
    for cid in E:
        sing, _ = labels[cid]
        I = tuple(a for a in range(ctx.m.k) if sing[a] != SINGLETON)
        stages.setdefault(I, []).append(cid)
    fallback = []
    for I in sorted(stages, key=lambda t: (len(t), t)):
        cells = stages[I]
        if len(I) == 1:
            stage = f"E{I[0]}"
        elif len(I) == ctx.m.k:
            stage = "rest"
        else:
            stage = "E{" + ",".join(map(str, I)) + "}"
        axis = _pick_axis(I, cells, labels)
        primary = [c for c in cells if axis is not None and axis in _usable_axes(*labels[c])]
        if primary:
            out.extend(_stratified(ctx, cellmap, primary, axis, _color, f"{tag}{stage}:"))
        residual: dict[int, list[int]] = {}
        for c in cells:
            if c in primary:
                continue
            usable = _usable_axes(*labels[c])
            if usable:
                best = max(usable, key=lambda a: (labels[c][1][a].gap, -a))
                residual.setdefault(best, []).append(c)
            else:
                fallback.append(c)
        for a in sorted(residual):
            ctx.stats["residual_cells"] += len(residual[a])
            out.extend(_stratified(ctx, cellmap, residual[a], a, _color,
                                   f"{tag}{stage}:residual[{a}]:"))
    if fallback:
        if not ctx.allow_fallback:
            raise InconclusiveStrata("cells without a certified split axis", fallback)
        ctx.stats["fallback_cells"] += len(fallback)
        gmap = {c: ctx.groups(cellmap, c)[:1] for c in fallback}
        hmap = {c: ctx.groups(cellmap, c)[1:] for c in fallback}
        Cg = _color(ctx, gmap, fallback, f"{tag}fallback:g:")
        Ch = _color(ctx, hmap, fallback, f"{tag}fallback:h:")
        out.extend(product_coloring(Cg, Ch, ctx.X, tag=f"{tag}fallback"))
    return out


def _pick_axis(I, cells, labels):
    best, best_key = None, None
    for a in I:
        usable = [labels[c][1][a].gap for c in cells if a in _usable_axes(*labels[c])]
        if not usable:
            continue
        key = (len(usable), float(np.mean(np.minimum(usable, 1e300))), -a)
        if best_key is None or key > best_key:
            best, best_key = a, key
    return best


# ---------------------------------------------------------------------------
# public entry points

def _finish(ctx: _Context, coloring: Coloring, target) -> Coloring:
    out = coloring.lift(ctx.X)
    missing = ctx.X.leaves(target) - out.cells
    if missing:
        raise ColoringFailed("coloring does not cover the region", sorted(missing))
    out.meta.update(stats=dict(ctx.stats), delta_out=ctx.delta_out)
    return out


def color_single_valued(m: MultiMapSpec, X: DomainComplex, cert: FpfCertificate | None = None,
                        *, region=None, delta_out: float | None = None, max_depth: int = 12,
                        seed: int = 0) -> Coloring:
    """Bright coloring of a single-valued fixed-point-free map.

    Cells are grouped by the direction in which their image lies, cut into
    slabs that clear their own images, and the slabs are packed into as few
    classes as the separation checks allow.  The greedy conflict coloring is
    used instead when it needs fewer classes than the slab packing and the
    slab packing exceeds the ``k + 3`` target.
    """
    if m.n != 1:
        raise ValueError("color_single_valued needs a map with one branch")
    ctx = _new_context(m, X, cert, delta_out, max_depth, seed)
    target = X.active_ids if region is None else list(region)
    return _finish(ctx, _color_single(ctx, _full_map(m, X), target, ""), target)


def split_argmax_coloring(m: MultiMapSpec, X: DomainComplex, region, i: int,
                          recurse: Callable | None = None, cert: FpfCertificate | None = None,
                          *, delta_out: float | None = None, max_depth: int = 12,
                          seed: int = 0) -> Coloring:
    """Color a region of constant argmax multiplicity M < n on axis ``i``.

    f splits into g (points attaining max pi_i) and h (the rest); each is
    colored by ``recurse`` and the results are intersected.
    """
    ctx = _new_context(m, X, cert, delta_out, max_depth, seed)
    region = list(region)
    out = _split(ctx, _full_map(m, X), region, i, recurse or _color, "")
    return _finish(ctx, out, region)


def stratified_coloring(m: MultiMapSpec, X: DomainComplex, region, i: int,
                        recurse: Callable | None = None, cert: FpfCertificate | None = None,
                        *, delta_out: float | None = None, max_depth: int = 12,
                        seed: int = 0) -> Coloring:
    """Color a region whose cells carry certified multiplicities on axis ``i``.

    Strata ``M = n-1, n-2, ..., 1`` are colored one after the other by the
    argmax split.
    """
    ctx = _new_context(m, X, cert, delta_out, max_depth, seed)
    region = list(region)
    if not region:
        return Coloring()
    out = _stratified(ctx, _full_map(m, X), region, i, recurse or _color, "")
    return _finish(ctx, out, region)


def color_multimap(m: MultiMapSpec, X: DomainComplex, cert: FpfCertificate, *,
                   delta_out: float | None = None, max_depth: int = 12, seed: int = 0,
                   allow_fallback: bool = True) -> Coloring:
    """Bright coloring of a fixed-point-free map X -> exp_n(R^k).

    X may be refined in place.  The result carries ``meta['ledger']`` with
    the class count and ``bound(k, n)``.
    """
    if not isinstance(cert, FpfCertificate):
        raise ValueError("color_multimap needs a fixed-point-freeness certificate")
    ctx = _new_context(m, X, cert, delta_out, max_depth, seed, allow_fallback=allow_fallback)
    target = X.active_ids
    if m.n == 1:
        out = _color_single(ctx, _full_map(m, X), target, "")
    else:
        out = _color(ctx, _full_map(m, X), target, "")
    out = _finish(ctx, out, target)
    out.meta["ledger"] = {"classes": len(out), "bound": bound(m.k, m.n),
                          "within_bound": len(out) <= bound(m.k, m.n)}
    return out


def greedy_conflict_coloring(m: MultiMapSpec, X: DomainComplex, *, delta_out: float = 1e-6,
                             max_depth: int = 12, budget: int = 8) -> Coloring:
    """Baseline: greedy coloring of the cell conflict graph.

    Cell c conflicts with d when c comes within ``delta_out`` of an image box
    of d (symmetrized).  Self-conflicting cells are bisected and the graph
    rebuilt, at most ``budget`` times.
    """
    ctx = _Context(m, X, delta_out, max_depth)
    cellmap = _full_map(m, X)
    for _ in range(budget + 1):
        ids = X.active_ids
        try:
            classes = _greedy_classes(ctx, cellmap, ids)
            break
        except ColoringFailed as exc:
            bad = [c for c in exc.cells if ctx.can_refine(c)]
            if not bad:
                raise
            for c in bad:
                ctx.refine(c)
    else:
        raise ColoringFailed("greedy coloring still self-conflicting after refinement budget")
    out = Coloring()
    for cls in classes:
        out.add(cls, ctx.margin(cellmap, cls), "greedy")
    return out


def inflate_color(F, eps: float, m: MultiMapSpec, X: DomainComplex, *,
                  min_margin: float = 1e-6, backoff: int = 8):
    """Grow class F by the cells within ``eps`` of it while it stays bright.

    Tries eps, eps/2, eps/4, ... (``backoff`` halvings).  Returns
    ``(cells, report)``; cells is F unchanged when no enlargement verifies.
    """
    F = frozenset(X.leaves(F))
    ctx = _Context(m, X, min_margin)
    cellmap = _full_map(m, X)
    base = ctx.margin(cellmap, F)
    report = {"requested": eps, "accepted": None, "margin": base, "tried": []}
    if eps <= 0 or base <= 0:
        return F, report
    boxes = ctx.cell_boxes(sorted(F))
    e = eps
    for _ in range(backoff + 1):
        grown = F | frozenset(X.near(boxes, e))
        margin = ctx.margin(cellmap, grown)
        report["tried"].append({"eps": e, "margin": margin, "cells": len(grown)})
        if margin >= min_margin and margin > 0:
            report.update(accepted=e, margin=margin)
            return grown, report
        e /= 2
    return F, report
