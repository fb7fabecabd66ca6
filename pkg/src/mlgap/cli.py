"""Command line interface: ``mlgap {eval,hist,analyze,synth,losses,convert}``.

Exit codes: 0 success, 2 usage or parse error, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from . import analysis, formats, losses, metrics, synth
from .core import InvariantError, UsageError, histogram

EXIT_USAGE = 2
EXIT_INVARIANT = 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _same_file(a: str, b: str) -> bool:
    try:
        return os.path.samefile(a, b)
    except OSError:
        return os.path.abspath(a) == os.path.abspath(b)


def _check_unit(name: str, x: float):
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise InvariantError(f"{name} = {x} outside [0, 1]")


def cmd_eval(args) -> str:
    db = formats.load(args.database)
    queries = formats.load(args.queries)
    if len(queries) == 0:
        raise UsageError(f"{args.queries}: query set is empty")
    if queries.width != db.width:
        raise UsageError(f"width mismatch: {args.queries} has {queries.width}-bit codes, "
                         f"{args.database} has {db.width}")
    if args.radius is None:
        raise UsageError("--radius is required")
    mode = metrics.RelevanceMode(args.mode)
    names = args.policy or ["stable"]
    policies = list(dict.fromkeys(metrics.TiePolicy.parse(p, args.seed) for p in names))
    if args.self_match == "auto":
        exclude = _same_file(args.database, args.queries)
    else:
        exclude = args.self_match == "exclude"
    rows = metrics.evaluate(queries, db, radius=args.radius, K=args.topk, policies=policies,
                            mode=mode, exclude_self=exclude, workers=args.workers)
    per_query = []
    for q in rows:
        for name, v in [("lgap", q.lgap), ("ap_worst", q.ap_worst), ("ap_best", q.ap_best),
                        ("precision_at_k", q.precision_at_k),
                        ("precision_at_radius", q.precision_at_radius), *q.ap.items()]:
            _check_unit(f"query {q.index} {name}", v)
        for name, v in q.ap.items():
            if not q.ap_worst <= v <= q.ap_best:
                raise InvariantError(f"query {q.index}: AP({name}) = {v} outside its tie bounds")
        per_query.append({
            "index": q.index,
            "label": q.label,
            "ap": q.ap,
            "ap_worst": q.ap_worst,
            "ap_best": q.ap_best,
            "precision_at_k": q.precision_at_k,
            "precision_at_radius": q.precision_at_radius,
            "lgap": q.lgap,
        })
    occupied = db.n_distinct
    report = {
        "params": {
            "database": str(args.database),
            "queries": str(args.queries),
            "width": db.width,
            "radius": args.radius,
            "topk": args.topk,
            "policies": [str(p) for p in policies],
            "mode": mode.value,
            "seed": args.seed,
            "self_match": "exclude" if exclude else "include",
        },
        "n_database": len(db),
        "n_queries": len(queries),
        "map": {str(p): metrics.mean([q.ap[str(p)] for q in rows]) for p in policies},
        "map_worst": metrics.mean([q.ap_worst for q in rows]),
        "map_best": metrics.mean([q.ap_best for q in rows]),
        "mlgap": metrics.mean([q.lgap for q in rows]),
        "mean_precision_at_k": metrics.mean([q.precision_at_k for q in rows]),
        "mean_precision_at_radius": metrics.mean([q.precision_at_radius for q in rows]),
        "utilization": {
            "distinct_codes": occupied,
            "total_codes": 2**db.width,
            "global_utilization": occupied / 2**db.width,
        },
        "per_query": per_query,
    }
    return _dump(report)


def cmd_hist(args) -> str:
    db = formats.load(args.database)
    h = histogram((e.code for e in db), width=db.width)
    rows = h.items_sorted()
    util = h.distinct / 2**db.width
    if args.format == "json":
        return _dump({
            "width": db.width,
            "total": h.total,
            "rows": [{"code": c.to_string(), "count": n} for c, n in rows],
            "distinct_codes": h.distinct,
            "global_utilization": util,
        })
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["code", "count"])
    for c, n in rows:
        w.writerow([c.to_string(), n])
    buf.write(f"# distinct_codes={h.distinct} total={h.total} global_utilization={util!r}\n")
    return buf.getvalue()


def cmd_analyze(args) -> str:
    db = formats.load(args.database)
    geo = analysis.class_geometry(db)
    out = {"width": db.width, "n_entries": len(db), "n_classes": len(geo)}
    if len(geo) < 2:
        out["classes"] = [{"class_id": g.class_id, "diameter": g.diameter} for g in geo]
        out["warning"] = "single class: margins and separation are undefined"
        out["h_tilde_s"] = min((g.diameter for g in geo), default=None)
        out["separation_holds"] = None
    else:
        out["classes"] = [{"class_id": g.class_id, "diameter": g.diameter, "margin": g.margin}
                          for g in geo]
        sep = analysis.separation_check(db)
        out["h_tilde_s"] = sep.h_tilde_s
        out["separation_holds"] = sep.holds
    rep = analysis.proposition_check(db, args.budget, args.seed)
    out["proposition"] = {
        "status": rep.status,
        "reason": rep.reason,
        "bound": rep.bound,
        "orthodromes_checked": rep.orthodromes_checked,
        "exhaustive": rep.exhaustive,
        "max_orthodrome_utilization": rep.max_utilization,
        "violated": rep.violated,
    }
    u = analysis.utilization_report(db)
    out["utilization"] = {"distinct_codes": u.distinct_codes, "total_codes": u.total_codes,
                          "global_utilization": u.global_utilization}
    out["params"] = {"database": str(args.database), "budget": args.budget, "seed": args.seed}
    return _dump(out)


def cmd_synth(args) -> str:
    db, centers = synth.synthesize(args.k, args.classes, args.per_class, args.intra_radius, args.seed)
    formats.save(db, args.out, binary=not args.text)
    return _dump({
        "out": str(args.out),
        "width": args.k,
        "n_entries": len(db),
        "centers": [_bits(c, args.k) for c in centers],
        "distinct_codes": db.n_distinct,
        "global_utilization": db.n_distinct / 2**args.k,
        "params": {"k": args.k, "classes": args.classes, "per_class": args.per_class,
                   "intra_radius": args.intra_radius, "seed": args.seed},
    })


def _bits(value: int, k: int) -> str:
    return "".join("1" if (value >> i) & 1 else "0" for i in range(k))


def parse_pairs(text: str, path: str = "<pairs>") -> list[losses.RealCodePair]:
    """Pair records ``y[,Y] v1 ... | v2 ...``, one per line."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"line {lineno}"
        if line.count("|") != 1:
            raise formats.FormatError(path, where, "expected exactly one '|' separator")
        left, right = line.split("|")
        if not left.split():
            raise formats.FormatError(path, where, "missing similarity flags")
        head, *v1 = left.split()
        v2 = right.split()
        try:
            flags = [int(x) for x in head.split(",")]
            b1 = [float(x) for x in v1]
            b2 = [float(x) for x in v2]
        except ValueError as exc:
            raise formats.FormatError(path, where, str(exc)) from None
        if len(flags) not in (1, 2):
            raise formats.FormatError(path, where, f"bad flag field {head!r}")
        if len(b1) != len(b2) or not b1:
            raise formats.FormatError(path, where, f"vector lengths {len(b1)} and {len(b2)} differ or are empty")
        if pairs and len(b1) != pairs[0].k:
            raise formats.FormatError(path, where, f"vector length {len(b1)} != {pairs[0].k}")
        try:
            pairs.append(losses.RealCodePair(b1, b2, flags[0], flags[1] if len(flags) == 2 else None))
        except UsageError as exc:
            raise formats.FormatError(path, where, str(exc)) from None
    if not pairs:
        raise formats.FormatError(path, "line 1", "no pair records")
    return pairs


def cmd_losses(args) -> str:
    try:
        text = Path(args.pairs).read_text()
    except OSError as exc:
        raise formats.FormatError(args.pairs, "open", exc.strerror or str(exc)) from None
    pairs = parse_pairs(text, str(args.pairs))
    k = pairs[0].k
    has_Y = all(p.Y is not None for p in pairs)
    kind = losses.DatasetKind(args.dataset_kind or ("two-level" if has_Y else "single"))
    cfg = losses.default_config(k, kind, args.alpha)
    overrides = {n: getattr(args, n) for n in ("m", "r1", "r2", "r3", "r4") if getattr(args, n) is not None}
    if overrides:
        cfg = losses.LossConfig(**{**cfg.__dict__, **overrides})
    names = args.loss or (["dsh", "single", "two-level"] if kind is losses.DatasetKind.TWO_LEVEL
                          else ["dsh", "single"])
    result = {}
    for name in dict.fromkeys(names):
        fn = losses.LOSSES[name]
        vals = [fn(p, cfg) for p in pairs]
        result[name] = {"per_pair": vals, "total": math.fsum(vals)}
    return _dump({
        "k": k,
        "n_pairs": len(pairs),
        "dataset_kind": kind.value,
        "config": {n: v for n, v in cfg.__dict__.items() if v is not None},
        "losses": result,
        "params": {"pairs": str(args.pairs)},
    })


def cmd_convert(args) -> str:
    db = formats.load(args.src)
    binary = None if args.to == "auto" else args.to == "binary"
    formats.save(db, args.dst, binary=binary)
    return ""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlgap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="mAP under tie policies, mAP bounds, mLGAP, utilization")
    e.add_argument("database")
    e.add_argument("queries")
    e.add_argument("--radius", type=int, required=True, help="LGAP / P@r Hamming radius")
    e.add_argument("--topk", type=int, default=None, help="AP and P@K cut-off (default: full ranking)")
    e.add_argument("--policy", action="append", choices=metrics.TiePolicy.KINDS,
                   help="tie policy for AP; repeatable (default: stable)")
    e.add_argument("--mode", choices=["fine", "coarse"], default="fine")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--self-match", choices=["include", "exclude", "auto"], default="auto",
                   help="auto excludes query i from its own results when both paths name one file")
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_eval)

    h = sub.add_parser("hist", help="code usage histogram")
    h.add_argument("database")
    h.add_argument("--format", choices=["csv", "json"], default="csv")
    h.set_defaults(func=cmd_hist)

    a = sub.add_parser("analyze", help="class geometry and the 2/3 utilization check")
    a.add_argument("database")
    a.add_argument("--budget", type=int, default=10_000, help="sampled orthodromes when k > 4")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="write a seeded synthetic dataset")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--classes", type=int, required=True)
    s.add_argument("--per-class", type=int, required=True)
    s.add_argument("--intra-radius", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--text", action="store_true", help="write the text format instead of HMC1")
    s.set_defaults(func=cmd_synth)

    lo = sub.add_parser("losses", help="pairwise losses for a pair file")
    lo.add_argument("pairs")
    lo.add_argument("--alpha", type=float, required=True, help="regularizer weight")
    lo.add_argument("--dataset-kind", choices=["single", "two-level"], default=None)
    lo.add_argument("--loss", action="append", choices=sorted(losses.LOSSES))
    lo.add_argument("--margin", dest="m", type=float, default=None)
    for n in ("r1", "r2", "r3", "r4"):
        lo.add_argument(f"--{n}", type=float, default=None)
    lo.set_defaults(func=cmd_losses)

    c = sub.add_parser("convert", help="convert between text and HMC1 binary")
    c.add_argument("src")
    c.add_argument("dst")
    c.add_argument("--to", choices=["auto", "binary", "text"], default="auto")
    c.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except InvariantError as exc:
        print(f"mlgap: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except UsageError as exc:
        print(f"mlgap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        sys.stdout.write(out)
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


if __name__ == "__main__":
    sys.exit(main())
