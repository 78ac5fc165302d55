"""Multivalued maps f: X -> exp_n(R^k) given by n branch expressions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .exprdsl import BinOp, DomainError, Expr, Neg, Num, Var, eval_interval, eval_point, parse_expr
from .geometry import TAU_DEDUP, Cell, DomainComplex, FiniteSet, hausdorff_distance

__all__ = [
    "MultiMapSpec", "BranchEnclosure", "FpfCertificate", "CounterexampleReport",
    "Inconclusive", "evaluate", "enclose", "certify_fixed_point_free",
    "continuity_report", "EvaluationError", "EnclosureCache",
]

log = logging.getLogger(__name__)


class EvaluationError(DomainError):
    """Expression domain error tagged with the branch (and cell) it came from."""

    def __init__(self, message, branch, cell=None):
        where = f"branch {branch}" + (f", cell {cell}" if cell is not None else "")
        super().__init__(f"{where}: {message}")
        self.branch = branch
        self.cell = cell


@dataclass(frozen=True)
class MultiMapSpec:
    k: int
    branches: tuple  # n entries, each a tuple of k Exprs
    tau_dedup: float = TAU_DEDUP
    delta_goal: float = 0.0

    def __post_init__(self):
        if not self.branches:
            raise ValueError("a map needs at least one branch")
        for j, b in enumerate(self.branches):
            if len(b) != self.k:
                raise ValueError(f"branch {j} has {len(b)} components, expected {self.k}")

    @classmethod
    def from_strings(cls, k: int, branches: Sequence, **kw) -> "MultiMapSpec":
        """``branches`` is a list of n lists of k expression strings.

        A bare string is accepted for a one-dimensional branch.
        """
        parsed = []
        for b in branches:
            if isinstance(b, str):
                b = [b]
            parsed.append(tuple(parse_expr(s, k) for s in b))
        return cls(k, tuple(parsed), **kw)

    @property
    def n(self) -> int:
        return len(self.branches)

    def branch_point(self, j: int, p) -> tuple:
        try:
            return tuple(eval_point(e, p) for e in self.branches[j])
        except DomainError as exc:
            raise EvaluationError(str(exc), j) from exc

    def displacement_exprs(self) -> list[tuple[Expr, ...]]:
        """``branch_j - identity`` per coordinate, with the identity term cancelled
        when the branch is written as ``x_a + rest`` (see ``_displacement``)."""
        return [tuple(_displacement(e, a) for a, e in enumerate(b)) for b in self.branches]


def _terms(e: Expr, sign: int = 1, out=None) -> list:
    """Flatten a top-level chain of + and - into signed terms."""
    out = [] if out is None else out
    if isinstance(e, BinOp) and e.op in "+-":
        _terms(e.left, sign, out)
        _terms(e.right, sign if e.op == "+" else -sign, out)
    else:
        out.append((sign, e))
    return out


def _displacement(e: Expr, a: int) -> Expr:
    """Expression for e - x_a.

    If x_a occurs as a plain ``+x_a`` term of the top-level sum it is dropped
    (x_a + r - x_a = r holds exactly over the reals), which keeps interval
    enclosures of the displacement free of the x - x dependency blow-up.
    Otherwise the difference is formed literally.
    """
    terms = _terms(e)
    for t, (sign, term) in enumerate(terms):
        if sign == 1 and term == Var(a):
            rest = terms[:t] + terms[t + 1:]
            break
    else:
        return BinOp("-", e, Var(a))
    if not rest:
        return Num(0.0)
    sign, out = rest[0]
    out = out if sign == 1 else Neg(out)
    for sign, term in rest[1:]:
        out = BinOp("+" if sign == 1 else "-", out, term)
    return out


@dataclass
class BranchEnclosure:
    cell_id: int
    boxes: np.ndarray  # (n, k, 2)

    def box(self, j: int) -> np.ndarray:
        return self.boxes[j]


@dataclass
class FpfCertificate:
    margin: float
    depth: int
    witnesses: dict = field(default_factory=dict)  # cell id -> min displacement gap

    def to_dict(self):
        return {"status": "certified", "delta": self.margin, "depth": self.depth,
                "witnesses": {str(k): v for k, v in sorted(self.witnesses.items())}}


@dataclass
class CounterexampleReport:
    point: tuple
    branch: int
    residual: float
    cell_id: int | None = None

    def to_dict(self):
        return {"status": "counterexample", "point": list(self.point),
                "branch": self.branch, "residual": self.residual, "cell": self.cell_id}


@dataclass
class Inconclusive:
    suspect_cells: list
    depth: int

    def to_dict(self):
        return {"status": "inconclusive", "suspect_cells": list(self.suspect_cells),
                "depth": self.depth}


def evaluate(m: MultiMapSpec, p) -> FiniteSet:
    return FiniteSet((m.branch_point(j, p) for j in range(m.n)), m.tau_dedup)


def enclose(m: MultiMapSpec, c: Cell) -> BranchEnclosure:
    bounds = c.bounds
    out = np.empty((m.n, m.k, 2))
    for j, branch in enumerate(m.branches):
        for a, e in enumerate(branch):
            try:
                iv = eval_interval(e, bounds)
            except DomainError as exc:
                raise EvaluationError(str(exc), j, c.id) from exc
            out[j, a] = iv.lo, iv.hi
    return BranchEnclosure(c.id, out)


def _origin_gap(box) -> float:
    g = 0.0
    for lo, hi in box:
        d = lo if lo > 0 else (-hi if hi < 0 else 0.0)
        g += d * d
    return float(math.sqrt(g) * (1.0 - 8 * np.finfo(float).eps))


def _displacement_gap(disp, c: Cell, j: int) -> float:
    try:
        box = [tuple(eval_interval(e, c.bounds)) for e in disp[j]]
    except DomainError as exc:
        raise EvaluationError(str(exc), j, c.id) from exc
    return _origin_gap(box)


def _find_fixed_point(m: MultiMapSpec, c: Cell, j: int):
    """Look for x in c with |branch_j(x) - x| <= tau; returns (x, residual) or None."""
    def resid(x):
        return np.subtract(m.branch_point(j, x), x)

    candidates = [c.center, c.lo, c.hi]
    if c.k > 1:
        candidates += [tuple(c.lo[a] if (mask >> a) & 1 else c.hi[a] for a in range(c.k))
                       for mask in range(1, 2 ** c.k - 1)]
    for x in candidates:
        try:
            r = float(np.linalg.norm(resid(x)))
        except DomainError:
            continue
        if r <= m.tau_dedup:
            return tuple(float(v) for v in x), r
    lo = np.array(c.lo, dtype=float)
    hi = np.array(c.hi, dtype=float)
    free = hi > lo
    if not free.any():
        return None

    def sub_resid(z):
        x = lo.copy()
        x[free] = z
        return resid(x)

    try:
        sol = least_squares(sub_resid, 0.5 * (lo + hi)[free], bounds=(lo[free], hi[free]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
    except (DomainError, ValueError):
        return None
    x = lo.copy()
    x[free] = sol.x
    try:
        r = float(np.linalg.norm(resid(x)))
    except DomainError:
        return None
    if r <= m.tau_dedup:
        return tuple(float(v) for v in x), r
    return None


def certify_fixed_point_free(m: MultiMapSpec, X: DomainComplex, max_depth: int = 12,
                             refine: bool = True):
    """Certify x ∉ f(x) on X, find a fixed point, or give up.

    Cells whose displacement enclosure touches the origin are searched for a
    fixed point and otherwise bisected, up to ``max_depth`` levels below the
    initial grid.  Bisection mutates ``X`` in place (``refine=True``); pass a
    copy if that is not wanted.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    disp = m.displacement_exprs()
    witnesses: dict[int, float] = {}
    suspects: list[int] = []
    queue = list(X.active_ids)
    deepest = 0
    while queue:
        next_queue = []
        for cid in queue:
            c = X[cid]
            gaps = [_displacement_gap(disp, c, j) for j in range(m.n)]
            bad = [j for j, g in enumerate(gaps) if g <= 0.0]
            if not bad:
                # certified; refine further only to chase delta_goal
                if (min(gaps) < m.delta_goal and refine and X.depth[cid] < max_depth
                        and max(c.widths) > 0.0):
                    a, b = X.refine(cid)
                    deepest = max(deepest, X.depth[cid] + 1)
                    next_queue += [a.id, b.id]
                else:
                    witnesses[cid] = min(gaps)
                continue
            for j in bad:
                hit = _find_fixed_point(m, c, j)
                if hit is not None:
                    log.info("fixed point of branch %d at %s", j, hit[0])
                    return CounterexampleReport(hit[0], j, hit[1], cid)
            depth = X.depth[cid]
            if depth >= max_depth or not refine or max(c.widths) == 0.0:
                suspects.append(cid)
                continue
            a, b = X.refine(cid)
            deepest = max(deepest, depth + 1)
            next_queue += [a.id, b.id]
        queue = next_queue
    if suspects:
        return Inconclusive(sorted(suspects), deepest)
    witnesses = {cid: g for cid, g in witnesses.items() if X.is_active(cid)}
    return FpfCertificate(min(witnesses.values()), deepest, witnesses)


def continuity_report(m: MultiMapSpec, X: DomainComplex, samples: int = 1000, seed: int = 0) -> dict:
    """Empirical Lipschitz estimate of x -> f(x) in the Hausdorff metric.

    Advisory only; never used in a certificate.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = np.random.default_rng(seed)
    cells = X.cells
    best = 0.0
    worst_pair = None
    for _ in range(samples):
        c = cells[rng.integers(len(cells))]
        lo, hi = np.array(c.lo), np.array(c.hi)
        p = lo + (hi - lo) * rng.random(m.k)
        q = lo + (hi - lo) * rng.random(m.k)
        d = float(np.linalg.norm(p - q))
        if d == 0.0:
            continue
        ratio = hausdorff_distance(evaluate(m, p), evaluate(m, q)) / d
        if ratio > best:
            best, worst_pair = ratio, (tuple(p), tuple(q))
    return {"lipschitz_estimate": best, "samples": samples, "worst_pair": worst_pair}


class EnclosureCache:
    """Memoized branch enclosures, keyed by cell id (cells are immutable)."""

    def __init__(self, m: MultiMapSpec):
        self.m = m
        self._boxes: dict[int, np.ndarray] = {}

    def __call__(self, c: Cell) -> np.ndarray:
        boxes = self._boxes.get(c.id)
        if boxes is None:
            boxes = self._boxes[c.id] = enclose(self.m, c).boxes
        return boxes
