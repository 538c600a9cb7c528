"""Batch front door: enumerate, classify, compute invariants, emit tables."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import branch_sim, classifier_403, fiber_builder, hyperelliptic_g3
from .diagram_core import CoverParams
from .invariants import (
    InvariantVector,
    alpha_indices,
    epsilon_index,
    horikawa_index,
    local_signature,
    rational_str,
)
from .sequence_engine import (
    Bounds,
    enumerate_sequences,
    sequence_from_json,
    sequence_to_obj,
)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CFL_THREADS", "1")))
    except ValueError:
        return 1


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _invariants_of(seq) -> tuple[InvariantVector, CoverParams]:
    params = CoverParams(n=seq.n, g=_genus_of(seq))
    config = branch_sim.realize_sequence(seq)
    v = InvariantVector(
        fiber_builder.alpha_zero(config),
        alpha_indices(seq, seq.n),
        epsilon_index(config, seq.n),
    )
    return v, params


def _genus_of(seq) -> int:
    r = seq.diagrams[0].t
    n = seq.n
    return ((n - 1) * r - 2 * n + 2) // 2


def cmd_enumerate(args) -> int:
    params = CoverParams(n=args.n, g=args.g)
    bounds = Bounds(max_depth=args.max_depth, max_chain=args.max_chain)
    seqs = enumerate_sequences(params, bounds, host_types=(args.type,))
    if args.format == "json":
        payload = [sequence_to_obj(s) for s in seqs]
        _write(args, json.dumps(payload, sort_keys=True, indent=1) + "\n")
    else:
        lines = [f"# {len(seqs)} sequences"]
        for s in seqs:
            lines.append(json.dumps(sequence_to_obj(s), sort_keys=True))
        _write(args, "\n".join(lines) + "\n")
    return 0


def cmd_classify_403(args) -> int:
    reps = classifier_403.census(max_chain=args.max_chain)
    rows = []
    mism = 0
    for cls in sorted(reps):
        a0, a1, eps, ind, sig = classifier_403.table_row(cls, reps[cls])
        if (a0, a1, eps, ind, sig) != classifier_403.expected_row(cls):
            mism += 1
        rows.append({
            "family": cls.family,
            "indices": ";".join(str(i) for i in cls.indices),
            "alpha0": a0, "alpha1": a1, "epsilon": eps,
            "ind": rational_str(ind), "sigma": rational_str(sig),
        })
    _write(args, _format_rows(rows, args.format))
    counts = classifier_403.census_counts(max_chain=args.max_chain)
    total = sum(counts[f] for f in ("0", "III", "IV", "V", "VI", "VII", "VIII"))
    sys.stderr.write(
        f"families: {counts}; {total} classes plus {counts['I'] + counts['II']} chain families\n")
    if mism:
        sys.stderr.write(f"{mism} rows disagree with the classification tables\n")
        return 1
    return 0


def cmd_classify_hyp3(args) -> int:
    rows = []
    mism = 0
    for cls, ind in hyperelliptic_g3.census_rows(max_index=args.max_index):
        seq = hyperelliptic_g3.build_representative(cls)
        config = branch_sim.realize_sequence(seq)
        alphas = alpha_indices(seq, 2)
        eps = epsilon_index(config, 2)
        a2 = alphas[1] if len(alphas) >= 2 else 0
        computed = hyperelliptic_g3.horikawa_from_configuration(seq)
        if computed != ind:
            mism += 1
        rows.append({
            "family": cls.family,
            "indices": ";".join("inf" if i == hyperelliptic_g3.INF else str(i)
                                 for i in cls.indices),
            "alpha2": a2, "epsilon": eps, "ind": rational_str(ind),
        })
    _write(args, _format_rows(rows, args.format))
    if mism:
        sys.stderr.write(f"{mism} rows disagree with the Horikawa index formula\n")
        return 1
    return 0


def cmd_invariants(args) -> int:
    with open(args.sequence, encoding="utf-8") as fh:
        seq = sequence_from_json(fh.read())
    v, params = _invariants_of(seq)
    ind = horikawa_index(params.n, params.r, v)
    sig = local_signature(params.n, params.r, v)
    fields = [str(v.alpha0), *(str(a) for a in v.alphas), str(v.epsilon),
              rational_str(ind), rational_str(sig)]
    _write(args, ",".join(fields) + "\n")
    return 0


def cmd_fiber(args) -> int:
    with open(args.sequence, encoding="utf-8") as fh:
        seq = sequence_from_json(fh.read())
    config = branch_sim.realize_sequence(seq)
    graph = fiber_builder.apply_covering(config)
    ok, kdim = fiber_builder.zariski_check(graph)
    if not ok or kdim != 1:
        sys.stderr.write("intersection form fails the Zariski property\n")
        return 1
    if args.format == "dot":
        _write(args, fiber_builder.to_dot(graph) + "\n")
    else:
        nodes = [{
            "self_intersection": nd.self_int, "multiplicity": nd.mult,
            "genus": nd.genus, "kind": nd.kind,
        } for nd in graph.nodes.values()]
        edges = [{"between": sorted(pair), "weight": w}
                 for pair, w in graph.edges.items()]
        payload = {
            "nodes": nodes, "edges": edges,
            "fiber_multiplicity": fiber_builder.fiber_multiplicity(graph),
        }
        _write(args, json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return 0


def cmd_check_multiple(args) -> int:
    bad = fiber_builder.easylem_check(args.n_max)
    lines = [f"residue check up to n={args.n_max}: {len(bad)} violations"]
    status = 0
    if bad:
        status = 1
        lines.extend(f"  n={n} a={a} b={b}" for n, a, b in bad)
    for n in (4, 5):
        hit = fiber_builder.sharp_search(n, max_blowups=args.depth)
        if hit is not None:
            lines.append(f"n={n}: isolating multiplicity chain found: {hit}")
            status = 1
        else:
            lines.append(f"n={n}: no reducible fiber isolates its non-multiples "
                         f"within {args.depth} blow-ups")
    for n in (2, 3):
        hit = fiber_builder.sharp_search(n, max_blowups=args.depth)
        lines.append(f"n={n}: witness chain {hit}")
    _write(args, "\n".join(lines) + "\n")
    return status


def cmd_tables(args) -> int:
    rows = []
    if args.which == "403":
        for cls in sorted(classifier_403.census(max_chain=3)):
            a0, a1, eps, ind, sig = classifier_403.expected_row(cls)
            rows.append({
                "family": cls.family,
                "indices": ";".join(str(i) for i in cls.indices),
                "alpha0": a0, "alpha1": a1, "epsilon": eps,
                "ind": rational_str(ind), "sigma": rational_str(sig),
            })
    else:
        for cls, ind in hyperelliptic_g3.census_rows(max_index=3):
            rows.append({
                "family": cls.family,
                "indices": ";".join("inf" if i == hyperelliptic_g3.INF else str(i)
                                     for i in cls.indices),
                "ind": rational_str(ind),
            })
    _write(args, _format_rows(rows, args.format))
    return 0


def _format_rows(rows: list[dict], fmt: str) -> str:
    if not rows:
        return ""
    if fmt == "json":
        return json.dumps(rows, sort_keys=True, indent=1) + "\n"
    if fmt == "md":
        header = list(rows[0])
        out = ["| " + " | ".join(header) + " |",
               "|" + "|".join("---" for _ in header) + "|"]
        for row in rows:
            out.append("| " + " | ".join(str(row[h]) for h in header) + " |")
        return "\n".join(out) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclicfib",
        description="Classify singular fibers of cyclic covering fibrations of ruled surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate admissible diagram sequences")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--type", type=int, choices=(0, 1), required=True)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--max-chain", type=int, default=2)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("classify-403", help="census of (4,0,3) fiber classes")
    p.add_argument("--max-chain", type=int, default=3)
    p.set_defaults(func=cmd_classify_403)

    p = sub.add_parser("classify-hyp3", help="census of genus-3 hyperelliptic classes")
    p.add_argument("--max-index", type=int, default=3)
    p.set_defaults(func=cmd_classify_hyp3)

    p = sub.add_parser("invariants", help="exact invariants of one sequence")
    p.add_argument("--sequence", required=True)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("fiber", help="dual graph of the covering fiber")
    p.add_argument("--sequence", required=True)
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("check-multiple", help="multiple fiber obstructions")
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--depth", type=int, default=12)
    p.set_defaults(func=cmd_check_multiple)

    p = sub.add_parser("tables", help="classification tables as fixtures")
    p.add_argument("--which", choices=("403", "hyp3"), required=True)
    p.set_defaults(func=cmd_tables)

    for p in sub.choices.values():
        p.add_argument("--format", choices=("csv", "json", "md", "dot"), default="csv")
        p.add_argument("--output", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    os.environ.setdefault("CFL_THREADS", "1")
    _threads()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
