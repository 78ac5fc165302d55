"""Independent checker for bright colorings.

Nothing produced by the colorer is trusted except the class membership
itself: enclosures are recomputed from the map specification and margins are
measured afresh.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import DomainComplex, GeometryError, box_array, boxset_separation
from .multimap import MultiMapSpec, enclose

__all__ = ["ClassStatus", "VerificationReport", "verify_coloring", "verify_disjoint_from_closure",
           "UnknownCellError"]

DEFAULT_MIN_MARGIN = 1e-6


class UnknownCellError(KeyError):
    pass


@dataclass
class ClassStatus:
    index: int
    cells: int
    margin: float
    ok: bool
    witness: dict | None = None


@dataclass
class VerificationReport:
    classes: list = field(default_factory=list)
    uncovered: list = field(default_factory=list)
    min_margin: float = DEFAULT_MIN_MARGIN

    @property
    def bright(self) -> bool:
        return (not self.uncovered and bool(self.classes)
                and all(c.ok and c.margin > 0 for c in self.classes))

    @property
    def margin(self) -> float:
        return min((c.margin for c in self.classes), default=0.0)

    def to_dict(self) -> dict:
        return {
            "verdict": "bright" if self.bright else "violations",
            "min_margin": self.min_margin,
            "achieved_margin": self.margin,
            "uncovered": list(self.uncovered),
            "classes": [
                {"index": c.index, "cells": c.cells, "margin": c.margin, "ok": c.ok,
                 "witness": c.witness}
                for c in self.classes
            ],
        }


def verify_disjoint_from_closure(F, images, margin: float) -> bool:
    """True iff the boxes of F are at least ``margin`` away from ``images``.

    At ``margin == 0`` touching sets pass; callers that need brightness must
    ask for a positive margin.
    """
    return boxset_separation(F, images) >= margin


def _check_class(m: MultiMapSpec, X: DomainComplex, index: int, ids: list[int],
                 min_margin: float, samples: int, seed: int) -> ClassStatus:
    cells = [X[i] for i in ids]
    boxes = box_array(cells)
    images = np.concatenate([enclose(m, c).boxes for c in cells])
    margin = boxset_separation(boxes, images)
    status = ClassStatus(index, len(ids), margin, margin >= min_margin and margin > 0)
    if not status.ok:
        # locate a cell pair realizing the violation
        owners = np.repeat(np.arange(len(cells)), m.n)
        for a, box in enumerate(boxes):
            d = np.array([boxset_separation(box, img) for img in images])
            hit = int(np.argmin(d))
            if d[hit] < min_margin or d[hit] == 0:
                status.witness = {"kind": "interval", "cell": int(ids[a]),
                                  "image_of": int(ids[owners[hit]]), "distance": float(d[hit])}
                break
        return status
    # sampling tripwire: images of sampled points must keep their distance
    rng = np.random.default_rng([seed, index])
    for _ in range(samples):
        c = cells[rng.integers(len(cells))]
        lo, hi = np.array(c.lo), np.array(c.hi)
        x = lo + (hi - lo) * rng.random(m.k)
        for j in range(m.n):
            y = np.asarray(m.branch_point(j, x))
            gap = np.maximum(np.maximum(boxes[:, :, 0] - y, y - boxes[:, :, 1]), 0.0)
            dist = float(np.sqrt((gap * gap).sum(-1)).min())
            if dist < margin * (1 - 1e-12):
                status.ok = False
                status.witness = {"kind": "sample", "point": x.tolist(), "branch": j,
                                  "image": y.tolist(), "distance": dist}
                return status
    return status


def verify_coloring(m: MultiMapSpec, X: DomainComplex, C, min_margin: float = DEFAULT_MIN_MARGIN,
                    *, samples: int = 100, seed: int = 0, threads: int = 1) -> VerificationReport:
    """Check that C covers X and that every class is bright.

    ``C`` is a Coloring or any iterable of cell-id collections.  Ids of
    retired cells are replaced by their active descendants.
    """
    classes = getattr(C, "classes", C)
    lifted = []
    pos = {cid: n for n, cid in enumerate(X.active_ids)}
    for cls in classes:
        try:
            leaves = X.leaves(cls)
        except GeometryError as exc:
            raise UnknownCellError(str(exc)) from None
        lifted.append(sorted(leaves, key=pos.__getitem__))
    report = VerificationReport(min_margin=min_margin)
    covered = set()
    for ids in lifted:
        covered.update(ids)
    report.uncovered = [cid for cid in X.active_ids if cid not in covered]

    jobs = [(i, ids) for i, ids in enumerate(lifted) if ids]
    for i, ids in enumerate(lifted):
        if not ids:
            report.classes.append(ClassStatus(i, 0, math.inf, True))

    def run(job):
        i, ids = job
        return _check_class(m, X, i, ids, min_margin, samples, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    report.classes += results
    report.classes.sort(key=lambda c: c.index)
    return report
