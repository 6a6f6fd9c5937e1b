"""Command-line front end.

Exit statuses for ``analyze``: 0 detectable, 1 not detectable,
2 input error, 3 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bundled
from .description import ENV_TOLERANCES, load, resolve_tolerances
from .digraph import has_spanning_tree, reaches, weak_components
from .errors import DetectError, InputError, NumericalError, PreconditionError
from .network import analyze, augment
from .synthesis import (
    SimulationDivergence,
    certify_stabilizable,
    closed_loop_matrix,
    default_step,
    settling_horizon,
    simulate_linear,
    spectral_abscissa,
)

EXIT_DETECTABLE = 0
EXIT_NOT_DETECTABLE = 1
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3

MAX_CSV_ROWS = 2000


def _fmt(x):
    return "-" if x is None else ("yes" if x is True else "no" if x is False else str(x))


def _report_text(rep, indent=""):
    d = rep.to_dict()
    lines = [
        f"{indent}state dimension n = {d['n']}, nodes N = {d['N']}, "
        f"{'shared H' if d['shared_h'] else 'per-node H_i'}",
        f"{indent}verdict: {'DETECTABLE' if d['detectable'] else 'NOT DETECTABLE'}",
        f"{indent}  PBH oracle on augmented pair ........ {_fmt(d['oracle_detectable'])}",
        f"{indent}  geometric test (Obar ∩ ΠC_i = 0) .... {_fmt(d['lemma1_holds'])}"
        f" (intersection dim {d['lemma1_intersection_dim']})",
        f"{indent}node pairs (C_i, A) detectable: {d['node_detectable']}",
        f"{indent}undetectable subspace dims: {d['node_undetectable_dims']}",
        f"{indent}necessary conditions{' (advisory)' if d['thm1']['advisory'] else ''}:"
        f" (i) {_fmt(d['thm1']['i'])}  (ii) {_fmt(d['thm1']['ii'])}  (iii) {_fmt(d['thm1']['iii'])}"
        f"  [rank O_H = {d['thm1']['rank_OH']}, max dim C_i = {d['thm1']['max_dim_C']}]",
        f"{indent}spanning tree: {_fmt(d['spanning_tree'])}; (H, A) observable: {_fmt(d['h_observable'])}",
        f"{indent}  spanning-tree sufficiency (i)∧(ii): {_fmt(d['thm2_verdict'])}",
        f"{indent}  observable-H corollary: {_fmt(d['corollary1_verdict'])}",
        f"{indent}  detectable-root corollary: {_fmt(d['corollary2_verdict'])}"
        f" (detectable roots {d['corollary2_roots']})",
    ]
    for r in d["per_reach"]:
        lines.append(
            f"{indent}reach {r['reach_id']}: vertices {r['vertices']} exclusive {r['exclusive']}"
            f" common {r['common']}; ∩C_i dim {r['cap_dim']}; (ii) per node {r['per_node_ii']}"
        )
    lines.append(f"{indent}per-reach sufficiency (H observable): {_fmt(d['theorem4_verdict'])}")
    lines.append(
        f"{indent}dim Obar = {d['big_unobservable_dim']}"
        f" (predicted {_fmt(d['lemma3_predicted_dim'])}); dim ker α+(Abar) = {d['antistable_dim']}"
    )
    if d["witness"] is not None:
        lines.append(f"{indent}witness: " + " ".join(f"{x:.6g}" for x in d["witness"]))
    for f in d["consistency"]:
        tag = "" if f["authoritative"] else " (informational)"
        lines.append(f"{indent}check {f['name']}: {'ok' if f['holds'] else 'FAILED'}{tag}")
    for k, sub in enumerate(rep.component_reports, 1):
        lines.append(f"{indent}component {k}: vertices {list(d['components'][k - 1])}")
        lines.append(_report_text(sub, indent + "  "))
    return "\n".join(lines)


def _tolerance_overrides(args):
    return {"rank_tol": args.rank_tol, "eps_stab": args.eps_stab, "margin": getattr(args, "margin", None)}


def cmd_analyze(args, out=sys.stdout):
    net, _, file_tol = load(args.input)
    tol = resolve_tolerances(file_tol, _tolerance_overrides(args))
    rep = analyze(net, tol)
    if args.format == "json":
        out.write(json.dumps(rep.to_dict(), indent=2) + "\n")
    else:
        out.write(_report_text(rep) + "\n")
    if not rep.consistent:
        return EXIT_INCONSISTENT
    return EXIT_DETECTABLE if rep.detectable else EXIT_NOT_DETECTABLE


def _reaches_dict(g):
    dec = reaches(g)
    return {
        "n_vertices": g.n_vertices,
        "spanning_tree": has_spanning_tree(g),
        "decoupled": dec.decoupled,
        "components": [
            {
                "vertices": list(comp),
                "reaches": [
                    {
                        "vertices": list(r.vertices),
                        "exclusive": list(r.exclusive),
                        "common": list(r.common),
                        "kernel_vector": [float(x) for x in b],
                    }
                    for r, b in zip(dec.reaches, dec.kernel_basis)
                    if r.vertices[0] in comp
                ],
            }
            for comp in weak_components(g)
        ],
    }


def cmd_reaches(args, out=sys.stdout):
    net, _, _ = load(args.input)
    d = _reaches_dict(net.graph)
    if args.format == "json":
        out.write(json.dumps(d, indent=2) + "\n")
        return 0
    out.write(f"vertices: {d['n_vertices']}; spanning tree: {_fmt(d['spanning_tree'])}\n")
    for k, comp in enumerate(d["components"], 1):
        if d["decoupled"]:
            out.write(f"component {k}: vertices {comp['vertices']}\n")
        for s, r in enumerate(comp["reaches"], 1):
            b = " ".join(f"{x:.6g}" for x in r["kernel_vector"])
            out.write(
                f"  reach {s}: {r['vertices']} exclusive {r['exclusive']} common {r['common']}\n"
                f"    kernel vector: {b}\n"
            )
    return 0


def cmd_simulate(args, out=sys.stdout):
    net, gains, file_tol = load(args.input)
    tol = resolve_tolerances(file_tol, _tolerance_overrides(args))
    if args.certify:
        try:
            cert = certify_stabilizable(augment(net), tol.margin, tol.rank_tol, tol.eps_stab)
        except PreconditionError as exc:
            out.write(f"cannot certify: {exc}\n")
            return EXIT_NOT_DETECTABLE
        M = cert.closed_loop
        source = "unstructured certificate gain"
    elif gains is not None:
        M = closed_loop_matrix(net, gains)
        source = "gains from input file"
    else:
        raise InputError("input has no gains; add them or pass --certify")
    abscissa = spectral_abscissa(M)
    if args.T is not None:
        T = args.T
    else:
        T = settling_horizon(M) if abscissa < 0 else 10.0
    dt = args.dt if args.dt is not None else default_step(M)
    if dt > T:
        dt = T
    steps = int(np.ceil(T / dt - 1e-9))
    every = args.every or max(1, -(-steps // MAX_CSV_ROWS))
    rng = np.random.default_rng(args.seed)
    e0 = rng.standard_normal(net.n * net.N)
    e0 /= np.linalg.norm(e0)
    out.write(f"closed loop from {source}; spectral abscissa {abscissa:.6g}\n")
    try:
        traj = simulate_linear(M, e0, T, dt, every, net.n, net.N)
    except SimulationDivergence as exc:
        out.write(f"divergence: {exc} (t = {exc.details['time']:.6g})\n")
        return EXIT_NOT_DETECTABLE
    if args.out:
        traj.to_csv(args.out)
        out.write(f"wrote {len(traj.times)} samples to {args.out}\n")
    out.write(f"T = {T:.6g}, dt = {dt:.6g}, steps = {steps}\n")
    out.write(f"final norm ratio ||e(T)||/||e(0)|| = {traj.norm_ratio:.6g}\n")
    if abscissa < 0:
        return 0
    out.write("divergence: closed loop is not Hurwitz (spectral abscissa >= 0)\n")
    return EXIT_NOT_DETECTABLE


def cmd_examples(args, out=sys.stdout):
    if args.name is None:
        for name in bundled.NAMES:
            out.write(name + "\n")
        return 0
    if args.name not in bundled.NAMES:
        raise InputError(f"unknown example {args.name!r}; choose from {', '.join(bundled.NAMES)}")
    out.write(json.dumps(bundled.get(args.name), indent=2) + "\n")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="distdetect",
        description="Detectability analysis for networks of consensus-coupled observers.",
        epilog="Tolerance environment overrides: " + ", ".join(ENV_TOLERANCES.values()),
    )
    sub = p.add_subparsers(dest="command", required=True)

    def tolerances(sp):
        sp.add_argument("--rank-tol", type=float, help="relative singular-value cut (default 1e-9)")
        sp.add_argument("--eps-stab", type=float, help="Re(λ) >= -eps counts as unstable (default 1e-9)")

    a = sub.add_parser("analyze", help="full detectability report")
    a.add_argument("input")
    a.add_argument("--format", choices=("text", "json"), default="text")
    tolerances(a)
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("reaches", help="reach decomposition of the communication graph")
    r.add_argument("input")
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.set_defaults(func=cmd_reaches)

    s = sub.add_parser("simulate", help="simulate the error dynamics")
    s.add_argument("input")
    s.add_argument("--T", type=float, help="horizon in seconds (default: long enough for a 1e-3 norm ratio, abscissa*T <= -10)")
    s.add_argument("--dt", type=float, help="RK4 step (default 1e-3/max(1, spectral radius))")
    s.add_argument("--out", help="CSV output path")
    s.add_argument("--certify", action="store_true", help="use the unstructured certificate gain")
    s.add_argument("--every", type=int, help="keep every k-th step in the CSV")
    s.add_argument("--seed", type=int, default=0, help="seed for the random unit initial error")
    s.add_argument("--margin", type=float, help="required stability margin for --certify")
    tolerances(s)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("examples", help="print a bundled system description")
    e.add_argument("name", nargs="?")
    e.set_defaults(func=cmd_examples)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        return args.func(args, out)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (NumericalError, DetectError) as exc:
        sys.stderr.write(f"internal failure: {exc}\n")
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
