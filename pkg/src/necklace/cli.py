"""Command line interface: ``necklace <command> <system> [options]``.

The system argument is a built-in name (fig1a, fig1b, ex21, ex23L,
ex23R or ex23R(alpha)) or a path to a JSON system file.  Reports are JSON on
stdout with floats rounded to 12 significant digits.

Exit codes: 0 Verified (or success), 2 Refuted, 3 Unknown, 1 bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

from .addresses import (CountInterval, NodeRef, UnresolvedMembership, parse_node_ref,
                        parse_point_address, ramification_sequence, resolve)
from .classify import PolygonWitness, classify
from .geometry import NotContractive, SingularMap
from .library import builtin, load_system
from .render import RenderOptions, render_svg
from .system import (BudgetExceeded, NodeAmbiguityError, PointNotInAttractor, Status,
                     SystemSpecError, parse_word, validate_necklace)
from .topology import (ChainError, CutStatus, build_chain, cut_point_scan,
                       global_cut_point_search)

EXIT_OK, EXIT_INPUT, EXIT_REFUTED, EXIT_UNKNOWN = 0, 1, 2, 3
_EXIT = {Status.VERIFIED: EXIT_OK, Status.REFUTED: EXIT_REFUTED, Status.UNKNOWN: EXIT_UNKNOWN}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which here means Refuted
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def clean(obj):
    """JSON-ready copy: 12 significant digits, no negative zero, finite or string."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        v = float(f"{obj:.12g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, CountInterval):
        return {"lower": obj.lower, "upper": obj.upper}
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return clean(obj.item())
    return str(obj)


def emit(data) -> None:
    sys.stdout.write(json.dumps(clean(data), indent=2, ensure_ascii=False) + "\n")


def _system(args, compute_nodes: bool = True):
    ref = args.system
    if args.alpha is not None:
        if not ref.startswith("ex23R"):
            raise UsageError("--alpha only applies to ex23R")
        return builtin("ex23R", args.alpha)
    return load_system(ref, compute_nodes)


def _target(text: str):
    """A node reference ``w:k`` or a point address ``w*`` / ``p|w*``."""
    text = text.strip()
    if text.endswith("*"):
        return parse_point_address(text)
    return parse_node_ref(text)


def _words(values) -> list:
    out = []
    for v in values or ():
        for part in v.split(";"):
            if part.strip():
                out.append(parse_word(part))
    return out


def _write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".necklace-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# commands

def cmd_validate(args) -> int:
    # nodes are not needed, and a broken file should come out Refuted
    system = _system(args, compute_nodes=False)
    verdict = validate_necklace(system, depth=args.depth, tol=args.tol, jobs=args.jobs)
    emit({"system": system.name, **verdict.to_dict()})
    return _EXIT[verdict.status]


def cmd_classify(args) -> int:
    system = _system(args)
    witness = None
    if args.witness:
        with open(args.witness, encoding="utf-8") as fh:
            data = json.load(fh)
        verts = data["vertices"] if isinstance(data, dict) else data
        witness = PolygonWitness(tuple(tuple(v) for v in verts))
    report = classify(system, ramify_depth=args.ramify_depth, witness=witness, jobs=args.jobs,
                      osc_depth=args.depth)
    emit(report.to_dict())
    return _EXIT[report.status]


def cmd_nodes(args) -> int:
    system = _system(args)
    auto = system.automaton
    rows = []
    for k in range(1, system.n + 1):
        p = system.node(k)
        state = auto.node_states[k - 1]
        rows.append({"node": str(NodeRef((), k)), "point": [p.x, p.y],
                     "copies": [[d] for d in sorted(auto.transitions[state])],
                     "addresses_level2": [list(w) for w in
                                          resolve(system, NodeRef((), k)).addresses(2).words]})
    emit({"system": system.name, "n": system.n, "node_tolerance": system.node_tolerance,
          "nodes": rows})
    return EXIT_OK


def cmd_ramify(args) -> int:
    system = _system(args)
    target = _target(args.point_address or args.node)
    seq = ramification_sequence(system, target, args.depth)
    anchor = resolve(system, target)
    growth, degree = anchor.automaton.growth(anchor.state)
    p = anchor.point
    emit({"system": system.name, "target": str(target), "point": [p.x, p.y],
          "c": seq, "growth": growth, "degree": degree})
    return EXIT_OK


def cmd_cutscan(args) -> int:
    system = _system(args)
    caveat = ""
    if args.all:
        seeds = [_target(args.point_address)] if args.point_address else []
        report = global_cut_point_search(system, args.level, args.depth, seeds=seeds,
                                         jobs=args.jobs)
        verdicts, caveat = report.verdicts, report.caveat
    else:
        text = args.point_address or args.node
        if text is None:
            raise UsageError("give --node, --point-address or --all")
        verdicts = [cut_point_scan(system, _target(text), args.depth)]
    out = {"system": system.name, "depth": args.depth,
           "verdicts": [v.to_dict() for v in verdicts]}
    if caveat:
        out["caveat"] = caveat
    emit(out)
    statuses = {v.status for v in verdicts}
    if statuses <= {CutStatus.NO_CUT}:
        return EXIT_OK
    if statuses <= {CutStatus.NO_CUT, CutStatus.CERTIFIED}:
        return EXIT_REFUTED  # a cut point is certified
    return EXIT_UNKNOWN


def cmd_chain(args) -> int:
    system = _system(args)
    chain = build_chain(system, _target(args.from_), _target(args.to), args.level)
    emit({"system": system.name, "from": args.from_, "to": args.to, **chain.to_dict()})
    return EXIT_OK


def cmd_render(args) -> int:
    system = _system(args)
    opts = RenderOptions(depth=args.depth, width=args.width, height=args.height,
                         style=args.style, node_markers=args.nodes,
                         highlight=tuple(_words(args.highlight)))
    svg = render_svg(system, opts)
    if args.out in (None, "-"):
        sys.stdout.write(svg)
    else:
        _write_atomic(args.out, svg)
    return EXIT_OK


# --------------------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="necklace", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("system", help="built-in name or path to a JSON system file")
        p.add_argument("--alpha", type=float, default=None, help="parameter of ex23R")
        p.set_defaults(func=func)
        return p

    p = command("validate", cmd_validate, "check the necklace intersection pattern")
    p.add_argument("--depth", type=_positive, default=6)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--jobs", type=_positive, default=1)

    p = command("classify", cmd_classify, "good / stable / bounded ramification / Property I")
    p.add_argument("--depth", type=_positive, default=1, help="level of the OSC witness check")
    p.add_argument("--ramify-depth", type=_positive, default=8)
    p.add_argument("--witness", help="JSON file with polygon vertices for the OSC check")
    p.add_argument("--jobs", type=_positive, default=1)

    command("nodes", cmd_nodes, "main nodes with coordinates and addresses")

    p = command("ramify", cmd_ramify, "c_1..c_M for a node or point address")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--node", help="node reference such as '1,3:2' or ':1'")
    g.add_argument("--point-address", help="eventually periodic address such as '1,13*'")
    p.add_argument("--depth", type=_positive, default=8)

    p = command("cutscan", cmd_cutscan, "cut-point scan of U_1..U_M")
    p.add_argument("--node")
    p.add_argument("--point-address")
    p.add_argument("--all", action="store_true", help="scan every node image up to --level")
    p.add_argument("--level", type=_nonneg, default=1)
    p.add_argument("--depth", type=_positive, default=6)
    p.add_argument("--jobs", type=_positive, default=1)

    p = command("chain", cmd_chain, "k-level chain between two points")
    p.add_argument("--from", dest="from_", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--level", type=_positive, default=1)

    p = command("render", cmd_render, "SVG picture of the level-D copies")
    p.add_argument("--depth", type=_nonneg, default=5)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--highlight", action="append",
                   help="word to accent, e.g. '1,13'; repeat or separate with ';'")
    p.add_argument("--width", type=_positive, default=800)
    p.add_argument("--height", type=_positive, default=800)
    p.add_argument("--style", choices=("polygons", "points"), default="polygons")
    p.add_argument("--nodes", action="store_true", help="mark the main nodes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SystemSpecError, NotContractive, SingularMap, NodeAmbiguityError,
            PointNotInAttractor, UnresolvedMembership, BudgetExceeded, ChainError,
            UsageError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"necklace {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
