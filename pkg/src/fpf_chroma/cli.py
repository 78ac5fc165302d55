"""Command-line front end: ``fpf-chroma {certify,color,verify,bound,discrete,plot}``.

Exit codes:

    0  success (certified / bright / coloring written)
    1  counterexample (fixed point) or verification violations
    2  input error (bad config, bad expression, unreadable file)
    3  certification inconclusive at the depth limit
    4  coloring failed
    5  freshly built coloring did not pass verification

Configuration (JSON)::

    {
      "domain": {"boxes": [[[0, 12]]], "h": 0.1},
      "map": {"dimension": 1, "branches": [["x0 + 1"], ["x0 + 2"]]},
      "tolerances": {"tau_dedup": 1e-9, "min_margin": 1e-3, "max_depth": 12, "delta_goal": 0},
      "seed": 0,
      "output": {"certificate": "cert.json", "report": "report.json", "svg": "plot.svg"}
    }

``map.n`` is optional and, when given, must equal the number of branches.
Output paths may also be given on the command line, which wins.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .colorer import Coloring, ColoringFailed, InconclusiveStrata, StrataViolation, bound, color_multimap
from .discrete import (DOUBLING_CAP, FiniteMultiMap, LoopError, conflict_edges, discrete_color_multi,
                       discrete_color_single, doubling_min_colors)
from .exprdsl import ExprError, parse_expr
from .geometry import DomainComplex, GeometryError, build_complex
from .multimap import (CounterexampleReport, EvaluationError, FpfCertificate, Inconclusive,
                       MultiMapSpec, certify_fixed_point_free)
from .svg import render_svg
from .verifier import UnknownCellError, verify_coloring

log = logging.getLogger("fpf_chroma")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3
EXIT_COLORING = 4
EXIT_UNVERIFIED = 5

CERT_FORMAT = "fpf-chroma/coloring-certificate"
FPF_FORMAT = "fpf-chroma/fpf-certificate"

_DEFAULT_TOL = {"tau_dedup": 1e-9, "min_margin": 1e-6, "max_depth": 12, "delta_goal": 0.0}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field or line."""


@dataclass
class RunConfig:
    boxes: list
    h: float
    k: int
    branches: list  # n lists of k strings
    tau_dedup: float = 1e-9
    min_margin: float = 1e-6
    max_depth: int = 12
    delta_goal: float = 0.0
    seed: int = 0
    output: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.branches)

    def to_dict(self) -> dict:
        return {
            "domain": {"boxes": self.boxes, "h": self.h},
            "map": {"dimension": self.k, "n": self.n, "branches": self.branches},
            "tolerances": {"tau_dedup": self.tau_dedup, "min_margin": self.min_margin,
                           "max_depth": self.max_depth, "delta_goal": self.delta_goal},
            "seed": self.seed,
        }

    def map_spec(self) -> MultiMapSpec:
        parsed = []
        for j, branch in enumerate(self.branches):
            exprs = []
            for a, src in enumerate(branch):
                try:
                    exprs.append(parse_expr(src, self.k))
                except ExprError as exc:
                    raise ConfigError(f"map.branches[{j}][{a}]: {exc}: {src!r}") from None
            parsed.append(tuple(exprs))
        return MultiMapSpec(self.k, tuple(parsed), tau_dedup=self.tau_dedup,
                            delta_goal=self.delta_goal)

    def complex(self) -> DomainComplex:
        try:
            return build_complex(self.boxes, self.h)
        except GeometryError as exc:
            raise ConfigError(f"domain: {exc}") from None


def _number(d: dict, key: str, where: str, default=None, *, positive=False, integer=False):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
        raise ConfigError(f"{where}.{key}: expected {'an integer' if integer else 'a number'}, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {v!r}")
    return v


def _section(d: dict, key: str, required=True) -> dict:
    v = d.get(key)
    if v is None and not required:
        return {}
    if not isinstance(v, dict):
        raise ConfigError(f"{key}: expected an object")
    return v


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    dom = _section(data, "domain")
    boxes = dom.get("boxes")
    if not isinstance(boxes, list) or not boxes:
        raise ConfigError("domain.boxes: expected a non-empty list of boxes")
    mp = _section(data, "map")
    k = _number(mp, "dimension", "map", integer=True)
    if k < 1:
        raise ConfigError("map.dimension: must be >= 1")
    for b, box in enumerate(boxes):
        if not isinstance(box, list) or len(box) != k:
            raise ConfigError(f"domain.boxes[{b}]: expected {k} [lo, hi] pairs")
        for a, iv in enumerate(box):
            if (not isinstance(iv, list) or len(iv) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in iv)):
                raise ConfigError(f"domain.boxes[{b}][{a}]: expected [lo, hi]")
            if not iv[0] <= iv[1]:
                raise ConfigError(f"domain.boxes[{b}][{a}]: lo > hi")
    h = _number(dom, "h", "domain", positive=True)
    branches = mp.get("branches")
    if not isinstance(branches, list) or not branches:
        raise ConfigError("map.branches: expected a non-empty list")
    norm = []
    for j, b in enumerate(branches):
        if isinstance(b, str):
            b = [b]
        if not isinstance(b, list) or len(b) != k or not all(isinstance(s, str) for s in b):
            raise ConfigError(f"map.branches[{j}]: expected {k} expression strings")
        norm.append(list(b))
    if "n" in mp and _number(mp, "n", "map", integer=True) != len(norm):
        raise ConfigError(f"map.n: says {mp['n']} but {len(norm)} branches are given")
    tol = _section(data, "tolerances", required=False)
    cfg = RunConfig(
        boxes=boxes, h=float(h), k=k, branches=norm,
        tau_dedup=float(_number(tol, "tau_dedup", "tolerances", _DEFAULT_TOL["tau_dedup"], positive=True)),
        min_margin=float(_number(tol, "min_margin", "tolerances", _DEFAULT_TOL["min_margin"], positive=True)),
        max_depth=_number(tol, "max_depth", "tolerances", _DEFAULT_TOL["max_depth"], integer=True),
        delta_goal=float(_number(tol, "delta_goal", "tolerances", _DEFAULT_TOL["delta_goal"])),
        seed=_number(data, "seed", "config", 0, integer=True),
        output=_section(data, "output", required=False),
    )
    if cfg.max_depth < 0:
        raise ConfigError("tolerances.max_depth: must be >= 0")
    if cfg.delta_goal < 0:
        raise ConfigError("tolerances.delta_goal: must be >= 0")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data)


def _dump(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _out_path(args, cfg: RunConfig, key: str):
    return getattr(args, key, None) or cfg.output.get(key)


def _certify(cfg: RunConfig, m: MultiMapSpec, X: DomainComplex):
    result = certify_fixed_point_free(m, X, cfg.max_depth)
    if isinstance(result, FpfCertificate) and cfg.delta_goal > 0 and result.margin < cfg.delta_goal:
        log.warning("certified margin %.3g is below delta_goal %.3g", result.margin, cfg.delta_goal)
    return result


def _fpf_exit(result) -> int:
    if isinstance(result, CounterexampleReport):
        return EXIT_VIOLATION
    if isinstance(result, Inconclusive):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands

def cmd_certify(args) -> int:
    cfg = load_config(args.config)
    m = cfg.map_spec()
    X = cfg.complex()
    result = _certify(cfg, m, X)
    doc = {"format": FPF_FORMAT, "config": cfg.to_dict(), "result": result.to_dict(),
           "refinements": [list(r) for r in X.refinements]}
    _dump(doc, _out_path(args, cfg, "certificate"))
    if isinstance(result, FpfCertificate):
        print(f"certified fixed-point free: delta = {result.margin:.6g}", file=sys.stderr)
    elif isinstance(result, CounterexampleReport):
        print(f"fixed point of branch {result.branch} at {list(result.point)} "
              f"(residual {result.residual:.3g})", file=sys.stderr)
    else:
        print(f"inconclusive: {len(result.suspect_cells)} suspect cells", file=sys.stderr)
    return _fpf_exit(result)


def cmd_color(args) -> int:
    cfg = load_config(args.config)
    m = cfg.map_spec()
    X = cfg.complex()
    cert = _certify(cfg, m, X)
    if not isinstance(cert, FpfCertificate):
        _dump({"format": FPF_FORMAT, "config": cfg.to_dict(), "result": cert.to_dict(),
               "refinements": [list(r) for r in X.refinements]},
              _out_path(args, cfg, "certificate"))
        print(f"not colored: {cert.to_dict()['status']}", file=sys.stderr)
        return _fpf_exit(cert)
    try:
        coloring = color_multimap(m, X, cert, max_depth=cfg.max_depth, seed=cfg.seed)
    except (ColoringFailed, InconclusiveStrata, StrataViolation) as exc:
        print(f"coloring failed: {exc}", file=sys.stderr)
        return EXIT_COLORING
    report = verify_coloring(m, X, coloring, cfg.min_margin, seed=cfg.seed, threads=args.threads)
    doc = {
        "format": CERT_FORMAT,
        "config": cfg.to_dict(),
        "fpf": cert.to_dict(),
        "refinements": [list(r) for r in X.refinements],
        "cells": [[list(c.lo), list(c.hi)] for c in X.cells],
        "cell_ids": X.active_ids,
        **coloring.to_dict(),
        "ledger": coloring.meta["ledger"],
    }
    _dump(doc, _out_path(args, cfg, "certificate"))
    rpath = _out_path(args, cfg, "report")
    if rpath:
        _dump(report.to_dict(), rpath)
    svg = _out_path(args, cfg, "svg")
    if svg and m.k <= 2:
        Path(svg).write_text(render_svg(X, coloring.classes), encoding="utf-8")
    led = coloring.meta["ledger"]
    print(f"{led['classes']} classes (bound {led['bound']}), margin {report.margin:.6g}, "
          f"{'bright' if report.bright else 'NOT bright'}", file=sys.stderr)
    return EXIT_OK if report.bright else EXIT_UNVERIFIED


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _rebuild(doc: dict):
    """Config, map and refined complex recorded in a coloring certificate."""
    if doc.get("format") != CERT_FORMAT:
        raise ConfigError("not a coloring certificate (format field)")
    cfg = parse_config(doc.get("config"))
    m = cfg.map_spec()
    X = cfg.complex()
    try:
        X.replay(doc.get("refinements", []))
    except (GeometryError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"refinements: cannot replay ({exc})") from None
    try:
        coloring = Coloring.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"classes: {exc}") from None
    return cfg, m, X, coloring


def cmd_verify(args) -> int:
    cfg, m, X, coloring = _rebuild(_read_json(args.certificate))
    margin = args.min_margin if args.min_margin is not None else cfg.min_margin
    try:
        report = verify_coloring(m, X, coloring, margin, seed=cfg.seed, threads=args.threads)
    except UnknownCellError as exc:
        raise ConfigError(f"classes: {exc}") from None
    _dump(report.to_dict(), args.output)
    return EXIT_OK if report.bright else EXIT_VIOLATION


def cmd_plot(args) -> int:
    cfg, m, X, coloring = _rebuild(_read_json(args.certificate))
    if X.k > 2:
        raise ConfigError("plot: only k <= 2 is supported")
    text = render_svg(X, coloring.classes)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.m < 1 or args.n < 1:
        raise ConfigError("bound: m and n must be >= 1")
    print(bound(args.m, args.n))
    return EXIT_OK


def parse_image_lines(lines) -> dict:
    """Parse ``v: a b c`` lines into ``{v: [a, b, c]}`` (``#`` starts a comment)."""
    images: dict = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'v: a b c'")
        try:
            v = int(head)
            img = [int(t) for t in tail.split()]
        except ValueError:
            raise ConfigError(f"line {lineno}: vertices must be integers") from None
        if v in images:
            raise ConfigError(f"line {lineno}: vertex {v} listed twice")
        images[v] = img
    return images


def cmd_discrete(args) -> int:
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", encoding="utf-8")
    try:
        if args.mode == "doubling":
            if args.N is None:
                raise ConfigError("discrete: doubling mode needs --N")
            try:
                count = doubling_min_colors(args.N, cap=DOUBLING_CAP)
            except ValueError as exc:
                raise ConfigError(f"discrete: {exc}") from None
            out.write(f"# doubling N={args.N}: minimum colors {count}\n")
            return EXIT_OK
        if args.input is None:
            raise ConfigError("discrete: input file required")
        try:
            with open(args.input, encoding="utf-8") as fh:
                images = parse_image_lines(fh)
        except OSError as exc:
            raise ConfigError(f"{args.input}: {exc.strerror}") from None
        try:
            if args.mode == "single":
                bad = [v for v, img in images.items() if len(img) != 1]
                if bad:
                    raise ConfigError(f"vertex {bad[0]}: single mode needs exactly one image")
                colors = discrete_color_single({v: img[0] for v, img in images.items()})
                limit, label = 3, "3"
                pairs = sorted(colors.items())
            else:
                g = FiniteMultiMap.from_images(images)
                arr = discrete_color_multi(g)
                s, d = conflict_edges(g)
                assert (arr[s] != arr[d]).all()
                limit, label = 2 * g.k + 1, f"2k+1 = {2 * g.k + 1}"
                pairs = [(lab, int(c)) for lab, c in zip(g.labels, arr)]
        except LoopError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VIOLATION
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for v, c in pairs:
            out.write(f"{v} {c}\n")
        count = len({c for _, c in pairs})
        out.write(f"# colors: {count} <= {label}\n")
        return EXIT_OK if count <= limit else EXIT_VIOLATION
    finally:
        if out is not sys.stdout:
            out.close()


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpf-chroma", description="Bright colorings of fixed-point-free multivalued maps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=1, help="worker threads for verification (default 1)")
    # also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("certify", parents=[common], help="certify that the configured map has no fixed point")
    s.add_argument("config")
    s.add_argument("-o", "--certificate", help="output file (default: config output.certificate or stdout)")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("color", parents=[common], help="certify, color and verify")
    s.add_argument("config")
    s.add_argument("-o", "--certificate")
    s.add_argument("--report", help="verification report path")
    s.add_argument("--svg", help="SVG plot path (k <= 2)")
    s.set_defaults(func=cmd_color)

    s = sub.add_parser("verify", parents=[common], help="re-check a coloring certificate")
    s.add_argument("certificate")
    s.add_argument("-o", "--output")
    s.add_argument("--min-margin", type=float)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bound", parents=[common], help="color-count bound for maps R^m -> exp_n(R^m)")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("discrete", parents=[common], help="color a finite (multi)map given as 'v: a b c' lines")
    s.add_argument("input", nargs="?")
    s.add_argument("--mode", choices=("single", "multi", "doubling"), default="multi")
    s.add_argument("--N", type=int, help="doubling mode: restrict to {1..N}")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_discrete)

    s = sub.add_parser("plot", parents=[common], help="render a coloring certificate as SVG")
    s.add_argument("certificate")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    level = os.environ.get("FPF_CHROMA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EvaluationError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
