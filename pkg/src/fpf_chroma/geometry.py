"""Cell complexes over axis-aligned boxes and set-distance primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeometryError", "Cell", "DomainComplex", "FiniteSet",
    "build_complex", "refine_cell", "hausdorff_distance", "boxset_separation",
    "box_array", "TAU_DEDUP",
]

TAU_DEDUP = 1e-9

# relative slack applied to computed distances so that rounding in the
# subtraction / sqrt never overstates a separation
_SEP_SHRINK = 1.0 - 8 * np.finfo(float).eps


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Cell:
    id: int
    lo: tuple
    hi: tuple

    @property
    def k(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def center(self) -> tuple:
        return tuple(0.5 * (l + h) for l, h in zip(self.lo, self.hi))

    @property
    def bounds(self) -> list:
        return [(l, h) for l, h in zip(self.lo, self.hi)]

    def array(self) -> np.ndarray:
        return np.array([self.lo, self.hi], dtype=float).T

    def contains(self, p, tol: float = 0.0) -> bool:
        return all(l - tol <= x <= h + tol for x, l, h in zip(p, self.lo, self.hi))

    def widest_axis(self) -> int:
        w = self.widths
        return max(range(len(w)), key=lambda a: (w[a], -a))


class DomainComplex:
    """A finite union of closed boxes, refinable cell by cell.

    All cells ever created stay in the registry so that colorings built on a
    coarser generation can be lifted to the current one (see ``leaves``).
    Only *active* cells make up the current subdivision of X.
    """

    def __init__(self, k: int, cells: Iterable[Cell]):
        if k < 1:
            raise GeometryError("dimension must be >= 1")
        self.k = k
        self._cells: dict[int, Cell] = {}
        self._active: dict[int, None] = {}
        self.parent: dict[int, int] = {}
        self.children: dict[int, tuple[int, int]] = {}
        self.depth: dict[int, int] = {}
        self.refinements: list[tuple[int, int]] = []
        for c in cells:
            if c.k != k:
                raise GeometryError("cell dimension mismatch")
            if c.id in self._cells:
                raise GeometryError(f"duplicate cell id {c.id}")
            self._cells[c.id] = c
            self._active[c.id] = None
            self.depth[c.id] = 0
        if not self._cells:
            raise GeometryError("complex needs at least one cell")
        self._next_id = max(self._cells) + 1
        self._arrays = None

    def __len__(self):
        return len(self._active)

    def __contains__(self, cid) -> bool:
        return cid in self._cells

    def __getitem__(self, cid: int) -> Cell:
        return self._cells[cid]

    @property
    def active_ids(self) -> list[int]:
        return list(self._active)

    @property
    def cells(self) -> list[Cell]:
        return [self._cells[i] for i in self._active]

    def is_active(self, cid: int) -> bool:
        return cid in self._active

    def refine(self, cid: int, axis: int | None = None) -> tuple[Cell, Cell]:
        """Bisect an active cell; the parent is retired."""
        if cid not in self._active:
            raise GeometryError(f"cell {cid} is not active")
        cell = self._cells[cid]
        if axis is None:
            axis = cell.widest_axis()
        a, b = refine_cell(cell, axis, (self._next_id, self._next_id + 1))
        self._next_id += 2
        # keep the active order stable: children replace the parent in place
        items = list(self._active)
        pos = items.index(cid)
        items[pos:pos + 1] = [a.id, b.id]
        self._active = dict.fromkeys(items)
        for c in (a, b):
            self._cells[c.id] = c
            self.parent[c.id] = cid
            self.depth[c.id] = self.depth[cid] + 1
        self.children[cid] = (a.id, b.id)
        self.refinements.append((cid, axis))
        self._arrays = None
        return a, b

    def leaves(self, ids: Iterable[int]) -> set[int]:
        """Active descendants (or the cells themselves) of ``ids``."""
        out = set()
        stack = list(ids)
        while stack:
            cid = stack.pop()
            if cid in self._active:
                out.add(cid)
            elif cid in self.children:
                stack.extend(self.children[cid])
            elif cid not in self._cells:
                raise GeometryError(f"unknown cell id {cid}")
        return out

    def ancestors(self, cid: int):
        yield cid
        while cid in self.parent:
            cid = self.parent[cid]
            yield cid

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(ids, boxes) of the active cells; boxes has shape (N, k, 2)."""
        if self._arrays is None:
            ids = np.array(self.active_ids, dtype=int)
            boxes = box_array([self._cells[i] for i in self._active])
            self._arrays = (ids, boxes)
        return self._arrays

    def near(self, boxes, d: float) -> list[int]:
        """Active cells within distance ``d`` of any of ``boxes``."""
        ids, cells = self.arrays()
        dist = _pairwise_box_distance(cells, box_array(boxes)).min(axis=1)
        return [int(i) for i in ids[dist <= d]]

    def replay(self, refinements: Sequence[Sequence[int]]) -> None:
        for cid, axis in refinements:
            self.refine(int(cid), int(axis))


def build_complex(boxes: Sequence, h: float) -> DomainComplex:
    """Split each box into grid cells of side <= h.

    ``boxes`` is a list of boxes, each a list of ``(lo, hi)`` pairs.
    Ids are assigned in lexicographic order of (lower corner, upper corner).
    """
    if not boxes:
        raise GeometryError("empty domain specification")
    if not h > 0:
        raise GeometryError(f"grid resolution must be positive, got {h}")
    k = len(boxes[0])
    raw = []
    for box in boxes:
        if len(box) != k:
            raise GeometryError("boxes of different dimension")
        axes = []
        for lo, hi in box:
            lo, hi = float(lo), float(hi)
            if not lo <= hi:
                raise GeometryError(f"bad bounds [{lo}, {hi}]")
            m = max(1, math.ceil((hi - lo) / h - 1e-9))
            edges = [lo + (hi - lo) * j / m for j in range(m + 1)]
            edges[-1] = hi
            axes.append(list(zip(edges[:-1], edges[1:])))
        for combo in np.ndindex(*[len(a) for a in axes]):
            lo = tuple(axes[a][j][0] for a, j in enumerate(combo))
            hi = tuple(axes[a][j][1] for a, j in enumerate(combo))
            raw.append((lo, hi))
    raw.sort()
    return DomainComplex(k, [Cell(i, lo, hi) for i, (lo, hi) in enumerate(raw)])


def refine_cell(c: Cell, axis: int, ids: tuple[int, int] | None = None) -> tuple[Cell, Cell]:
    lo, hi = c.lo[axis], c.hi[axis]
    if not lo < hi:
        raise GeometryError(f"cell {c.id} is degenerate on axis {axis}")
    mid = 0.5 * (lo + hi)
    if ids is None:
        ids = (2 * c.id + 1, 2 * c.id + 2)
    a = Cell(ids[0], c.lo, c.hi[:axis] + (mid,) + c.hi[axis + 1:])
    b = Cell(ids[1], c.lo[:axis] + (mid,) + c.lo[axis + 1:], c.hi)
    return a, b


class FiniteSet:
    """Canonical element of exp_n(R^k): deduplicated, lexicographically sorted."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable[Sequence[float]], tau: float = TAU_DEDUP):
        pts = sorted(tuple(float(x) for x in p) for p in points)
        if not pts:
            raise GeometryError("FiniteSet must be nonempty")
        kept: list[tuple] = []
        for p in pts:
            if all(math.dist(p, q) > tau for q in kept):
                kept.append(p)
        self.points = tuple(kept)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        if isinstance(other, FiniteSet):
            return self.points == other.points
        return NotImplemented

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        if self.points and len(self.points[0]) == 1:
            return "{" + ", ".join(repr(p[0]) for p in self.points) + "}"
        return "{" + ", ".join(repr(p) for p in self.points) + "}"

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def distance_to(self, p) -> float:
        return min(math.dist(p, q) for q in self.points)


def hausdorff_distance(A: FiniteSet, B: FiniteSet) -> float:
    a, b = A.array(), B.array()
    if a.shape[1] != b.shape[1]:
        raise GeometryError("dimension mismatch")
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def box_array(boxes) -> np.ndarray:
    """Normalize boxes (Cells, (k, 2) arrays or lists of pairs) to (N, k, 2)."""
    if isinstance(boxes, np.ndarray):
        arr = boxes.astype(float, copy=False)
        return arr[None] if arr.ndim == 2 else arr
    out = []
    for b in boxes:
        if isinstance(b, Cell):
            out.append(b.array())
        else:
            out.append(np.asarray([tuple(iv) for iv in b], dtype=float))
    if not out:
        return np.zeros((0, 0, 2))
    return np.stack(out)


def _pairwise_box_distance(S: np.ndarray, T: np.ndarray) -> np.ndarray:
    gap = np.maximum(
        np.maximum(T[None, :, :, 0] - S[:, None, :, 1], S[:, None, :, 0] - T[None, :, :, 1]),
        0.0,
    )
    return np.sqrt((gap * gap).sum(axis=-1)) * _SEP_SHRINK


def boxset_separation(S, T, chunk: int = 256) -> float:
    """Lower bound on the distance between ∪S and ∪T (0 when they meet)."""
    S, T = box_array(S), box_array(T)
    if len(S) == 0 or len(T) == 0:
        raise GeometryError("boxset_separation needs nonempty box lists")
    if S.shape[1] != T.shape[1]:
        raise GeometryError("dimension mismatch")
    best = math.inf
    for i in range(0, len(S), chunk):
        d = _pairwise_box_distance(S[i:i + chunk], T).min()
        best = min(best, float(d))
        if best == 0.0:
            break
    return best
