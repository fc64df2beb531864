"""Command line pipeline: solve, inspect, correct and trace frame fields.

Artifacts are written with fixed names under ``--out``: ``field.txt``
(coefficients plus projected rotations), ``graph.vtk`` (singularity graph
polylines), ``report.txt`` (line-oriented ``key: value`` text).  Identical
inputs produce byte-identical artifacts; timings go to stderr only.

Exit codes: 0 success, 2 correction strategy not applicable, 3 solver
failure, 64 usage error.
"""

import argparse
import os
import sys
import time

import numpy as np

from .correction import (
    apply_plan,
    extrude_feature_curves,
    extrude_singular_nodes,
    snap_until_clean,
)
from .errors import CGDiverged, HexFrameError, NonApplicable
from .meshio import read_field, read_medit, write_field, write_vtk_graph
from .singularities import detect_35, extract_graph
from .solver import FrameField, SolverConfig, build_boundary_conditions, compute_field
from .tracing import TracerConfig, trace

EXIT_OK = 0
EXIT_NOT_APPLICABLE = 2
EXIT_SOLVER_FAILURE = 3
EXIT_USAGE = 64

STRATEGIES = {
    "extrude-curve": "extrude-curve",
    "extrude-node": "extrude-node",
    "snap": "snap",
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hexframe",
        description="Octahedral frame fields and singularity graph correction.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(p):
        p.add_argument("--mesh", required=True, help="input MEDIT mesh")
        p.add_argument("--out", default=".", help="artifact directory")
        p.add_argument("--angle-threshold", type=float, default=30.0,
                       help="feature detection dihedral threshold (degrees)")
        p.add_argument("--lambda", dest="relaxation", type=float, default=0.95,
                       help="projection relaxation of the smoothing sweeps")
        p.add_argument("--sweeps", type=int, default=50,
                       help="maximum nonlinear smoothing sweeps")
        p.add_argument("--field", default=None,
                       help="reuse a previously written field.txt")
        p.add_argument("--seed-rng", type=int, default=0,
                       help="reserved; the pipeline is deterministic")
        p.add_argument("--verbose", action="store_true")
        return p

    common(sub.add_parser("solve", help="compute the frame field"))
    common(sub.add_parser("graph", help="extract the singularity graph"))
    common(sub.add_parser("detect35", help="flag 3-5 singular chains"))

    p = common(sub.add_parser("correct", help="apply a correction strategy"))
    p.add_argument("--strategy", required=True, choices=sorted(STRATEGIES))
    p.add_argument("--snap-radius", type=float, default=0.0,
                   help="tangency release radius (0: 3 mean edge lengths)")
    p.add_argument("--step", type=float, default=0.0,
                   help="streamline step size (0: half mean edge length)")

    p = common(sub.add_parser("trace", help="trace one streamline"))
    p.add_argument("--seed", required=True, help="seed point x,y,z")
    p.add_argument("--dir", required=True, dest="direction",
                   help="initial direction dx,dy,dz")
    p.add_argument("--step", type=float, default=0.0,
                   help="streamline step size (0: half mean edge length)")

    common(sub.add_parser("report", help="print the report of a previous run"))
    return parser


def _parse_triple(text, flag):
    parts = text.split(",")
    if len(parts) != 3:
        raise SystemExit2("%s expects x,y,z, got %r" % (flag, text))
    try:
        return np.array([float(x) for x in parts])
    except ValueError:
        raise SystemExit2("%s expects numbers, got %r" % (flag, text))


class SystemExit2(Exception):
    """Usage error carrying a message; mapped to exit code 64."""


def _write_report(path, pairs):
    with open(path, "w") as fh:
        for key, value in pairs:
            fh.write("%s: %s\n" % (key, value))


def _graph_counts(graph):
    by_valence = {}
    for chain in graph.chains:
        key = "%s-%s" % (chain.valence_start, chain.valence_end)
        by_valence[key] = by_valence.get(key, 0) + 1
    return by_valence


def _report_pairs(mesh, field, graph, extra=()):
    pairs = [
        ("vertices", len(mesh.vertices)),
        ("tets", len(mesh.tets)),
        ("feature_curves", len(mesh.feature_curves)),
        ("dirichlet_energy", "%.12g" % field.report.get("dirichlet_energy", 0.0)),
        ("smoothing_sweeps", field.report.get("smoothing_sweeps", 0)),
        ("smoothing_converged", field.report.get("smoothing_converged", "")),
        ("chains", len(graph.chains)),
        ("chains_35", len(detect_35(graph))),
        ("junctions", len(graph.junction_tets)),
        ("boundary_nodes", len(graph.boundary_nodes)),
        ("defects", len(graph.defects)),
    ]
    for key, count in sorted(_graph_counts(graph).items()):
        pairs.append(("chains_valence_%s" % key, count))
    pairs.extend(extra)
    return pairs


def _load_or_solve(args, log):
    mesh = read_medit(args.mesh, feature_angle=args.angle_threshold)
    ratio = mesh.edge_length_ratio()
    if ratio > 4.0:
        sys.stderr.write(
            "warning: edge length ratio %.2f > 4; singularity extraction "
            "assumes near-uniform meshes\n" % ratio)
    config = SolverConfig(smoothing_sweeps=args.sweeps,
                          projection_relaxation=args.relaxation)
    if args.field:
        field = read_field(args.field, mesh)
        field.bcs = build_boundary_conditions(mesh)
        field.config = config
        log("field: read from %s" % args.field)
    else:
        t0 = time.time()
        field = compute_field(mesh, config)
        log("solve: %.1fs" % (time.time() - t0))
    return mesh, field, config


def _emit(args, mesh, field, graph, extra=()):
    os.makedirs(args.out, exist_ok=True)
    write_field(field, os.path.join(args.out, "field.txt"))
    write_vtk_graph(graph, os.path.join(args.out, "graph.vtk"))
    _write_report(os.path.join(args.out, "report.txt"),
                  _report_pairs(mesh, field, graph, extra))


def _cmd_solve(args, log):
    mesh, field, _ = _load_or_solve(args, log)
    graph = extract_graph(field)
    _emit(args, mesh, field, graph)
    print("chains: %d  3-5: %d" % (len(graph.chains), len(detect_35(graph))))
    return EXIT_OK


def _cmd_graph(args, log):
    return _cmd_solve(args, log)


def _cmd_detect35(args, log):
    mesh, field, _ = _load_or_solve(args, log)
    graph = extract_graph(field)
    flagged = detect_35(graph)
    _emit(args, mesh, field, graph)
    for chain in flagged:
        print("chain %d: valences %s-%s, %d tets" % (
            chain.chain_id, chain.valence_start, chain.valence_end,
            len(chain.tets)))
    print("3-5 chains: %d" % len(flagged))
    return EXIT_OK


def _cmd_correct(args, log):
    mesh, field, config = _load_or_solve(args, log)
    graph = extract_graph(field)
    before = len(detect_35(graph))
    tracer = TracerConfig(step_size=args.step)
    radius = args.snap_radius if args.snap_radius > 0 else None
    try:
        if args.strategy == "extrude-curve":
            plan = extrude_feature_curves(mesh, field, tracer_config=tracer)
            corrected = apply_plan(mesh, field, plan, config)
        elif args.strategy == "extrude-node":
            plan = extrude_singular_nodes(mesh, field, graph,
                                          tracer_config=tracer)
            corrected = apply_plan(mesh, field, plan, config)
        else:
            plan, corrected = snap_until_clean(mesh, field, graph, config,
                                               snap_radius=radius)
    except NonApplicable as exc:
        os.makedirs(args.out, exist_ok=True)
        pairs = _report_pairs(mesh, field, graph, [
            ("strategy", args.strategy),
            ("applicable", False),
            ("chains_35_before", before),
        ])
        for i, failure in enumerate(exc.diagnostics.get("failures", [])):
            detail = ", ".join(
                "%s=%s" % (k, failure[k]) for k in sorted(failure))
            pairs.append(("failure_%d" % i, detail))
        _write_report(os.path.join(args.out, "report.txt"), pairs)
        print("not applicable: %s" % exc)
        return EXIT_NOT_APPLICABLE
    new_graph = plan.diagnostics["graph"]
    after = len(detect_35(new_graph))
    _emit(args, mesh, corrected, new_graph, [
        ("strategy", args.strategy),
        ("applicable", True),
        ("chains_35_before", before),
        ("chains_35_after", after),
    ])
    print("3-5 before: %d  after: %d" % (before, after))
    return EXIT_OK


def _cmd_trace(args, log):
    mesh, field, _ = _load_or_solve(args, log)
    seed = _parse_triple(args.seed, "--seed")
    direction = _parse_triple(args.direction, "--dir")
    streamline = trace(field, seed, direction, TracerConfig(step_size=args.step))
    os.makedirs(args.out, exist_ok=True)
    write_vtk_graph([streamline], os.path.join(args.out, "trace.vtk"))
    _write_report(os.path.join(args.out, "report.txt"), [
        ("termination", streamline.termination),
        ("points", len(streamline.points)),
        ("length", "%.12g" % streamline.length),
    ])
    print("%s after %.4g (%d points)" % (
        streamline.termination, streamline.length, len(streamline.points)))
    return EXIT_OK


def _cmd_report(args, log):
    path = os.path.join(args.out, "report.txt")
    if not os.path.exists(path):
        raise SystemExit2("no report.txt under %s" % args.out)
    with open(path) as fh:
        sys.stdout.write(fh.read())
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "graph": _cmd_graph,
    "detect35": _cmd_detect35,
    "correct": _cmd_correct,
    "trace": _cmd_trace,
    "report": _cmd_report,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0

    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    def log(message):
        if args.verbose:
            sys.stderr.write(message + "\n")

    try:
        return _COMMANDS[args.command](args, log)
    except SystemExit2 as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE
    except CGDiverged as exc:
        sys.stderr.write("solver failure: %s\n" % exc)
        return EXIT_SOLVER_FAILURE
    except HexFrameError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
