"""Experiment runner.

Subcommands: gen-net, search, prune, validate, step-ablation,
random-search, report. Every command is deterministic given its flags;
stochastic commands require an explicit seed. Parameters may also be
supplied as a JSON document via --config (keys are the flag names with
underscores); explicit flags override config values.

Exit codes: 0 success, 2 usage error, 3 domain error (bad values, bad
files), 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from sparsalloc import __version__
from sparsalloc._csvio import read_csv, write_csv
from sparsalloc.abstractmodel import (
    AbstractErrorParams,
    ExpF,
    RatioF,
    SquareF,
    export_theorem4_csv,
    verify_theorem4,
)
from sparsalloc.allocator import (
    allocate_uniform,
    load_profile,
    nm_allocation,
    save_profile,
)
from sparsalloc.errors import DomainError, SparsallocError
from sparsalloc.linalg import DenseMatrix, lemma1_gap
from sparsalloc.netmodel import (
    Activation,
    CalibrationSet,
    generate_calibration,
    generate_net,
    load_net,
    net_digest,
    save_net,
)
from sparsalloc.pruner import (
    Magnitude,
    WandaStyle,
    prune_net,
    prune_net_nm,
    save_masks,
)
from sparsalloc.reconerr import (
    check_theorem1,
    check_theorem2_bound,
    export_trace_csv,
    trace_errors,
)
from sparsalloc.rng import SplitMix64
from sparsalloc.search import (
    ObjectiveKind,
    export_report_csv,
    export_report_json,
    grid_search_beta,
    random_search_profiles,
    step_ablation,
)

_METHODS = {"magnitude": Magnitude, "wanda": WandaStyle}
_OBJECTIVES = {
    "recon": ObjectiveKind.TOTAL_RECON_ERROR,
    "heldout": ObjectiveKind.HELD_OUT_LOSS,
}


def _parse_dims(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise DomainError(f"bad dims list {text!r}") from exc


def _parse_steps(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise DomainError(f"bad steps list {text!r}") from exc


def _require(parser: argparse.ArgumentParser, args, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            parser.error(f"--{name.replace('_', '-')} is required")


def _load_net_arg(path):
    return load_net(path)


def _calibration_for(net, args) -> CalibrationSet:
    return generate_calibration(net.in_dim, args.samples, args.calib_seed)


def config_from_args(args) -> dict:
    """The reproducible parameter record of a parsed command."""
    skip = {"func", "command", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


# ---------------------------------------------------------------- gen-net


def cmd_gen_net(parser, args) -> int:
    _require(parser, args, "layers", "seed", "out")
    if args.dims:
        dims = _parse_dims(args.dims)
    else:
        dims = [args.dim] * (args.layers + 1)
    net = generate_net(
        args.layers,
        dims,
        Activation(args.activation),
        args.seed,
        label=args.label or "",
    )
    save_net(net, args.out)
    digest = net_digest(net)
    print(f"wrote {args.out} ({net.L} layers, dims {dims}) sha256={digest}")
    return 0


# ----------------------------------------------------------------- search


def cmd_search(parser, args) -> int:
    _require(parser, args, "net", "avg_sparsity", "calib_seed")
    net = _load_net_arg(args.net)
    calib = _calibration_for(net, args)
    report = grid_search_beta(
        net,
        calib,
        args.avg_sparsity,
        step=args.step,
        method=_METHODS[args.method](),
        objective=_OBJECTIVES[args.objective],
    )
    if args.out_csv:
        export_report_csv(report, args.out_csv, seed=args.calib_seed)
    if args.out_json:
        export_report_json(report, args.out_json)
    if args.out_profile:
        save_profile(report.best_profile, args.out_profile)
    best_obj = min(o for _, o in report.candidates)
    print(
        f"evaluated {len(report.candidates)} candidates; "
        f"best beta={report.best_beta!r} objective={best_obj!r}"
    )
    return 0


# ------------------------------------------------------------------ prune


def cmd_prune(parser, args) -> int:
    _require(parser, args, "net", "profile", "calib_seed")
    net = _load_net_arg(args.net)
    profile = load_profile(args.profile)
    calib = _calibration_for(net, args)
    method = _METHODS[args.method]()
    if args.nm_m:
        ns = nm_allocation(profile, args.nm_m)
        masks, sparse = prune_net_nm(
            net, calib, ns, args.nm_m, score=method, dense_scoring=args.dense_scoring
        )
        print(f"mixed N:{args.nm_m} keep counts: {ns}")
    else:
        masks, sparse = prune_net(
            net,
            calib,
            profile,
            method,
            dense_scoring=args.dense_scoring,
            per_row=args.per_row,
        )
    if args.out_net:
        save_net(sparse, args.out_net)
    if args.out_masks:
        save_masks(masks, args.out_masks)
    trace = trace_errors(net, sparse, calib, profile=profile, method=method)
    if args.out_trace:
        export_trace_csv(trace, sparse, args.out_trace, seed=args.calib_seed)
    for i, mask in enumerate(masks):
        print(
            f"layer {i + 1}: requested {profile.rates[i]!r} "
            f"achieved {mask.sparsity!r} error {trace.per_layer[i]!r}"
        )
    print(f"total reconstruction error {trace.total!r}")
    print(f"sparse net sha256={net_digest(sparse)}")
    return 0


# --------------------------------------------------------------- validate


def _random_matrix(rng: SplitMix64, rows: int, cols: int) -> DenseMatrix:
    return DenseMatrix(rows, cols, rng.fill_uniform(rows * cols, -1.0, 1.0))


def _validate_lemma1(args, out_dir):
    rng = SplitMix64(args.seed)
    rows = []
    failures = 0
    for i in range(args.pairs):
        n = rng.randint(1, 8)
        m = rng.randint(n, 16)
        p = rng.randint(1, 8)
        a = _random_matrix(rng, m, n)
        b = _random_matrix(rng, n, p)
        lhs, rhs = lemma1_gap(a, b)
        ok = lhs >= rhs - 1e-9
        failures += 0 if ok else 1
        rows.append((i, m, n, p, lhs, rhs, int(ok), 1))
    # Rank-deficient A: duplicate one column. The bound uses the smallest
    # non-zero singular value, so it can fail when B overlaps the null
    # space; these cases are reported, never asserted.
    deficient_ok = 0
    for i in range(5):
        n = 4
        a = _random_matrix(rng, 6, n)
        for r in range(6):
            a.data[r * n + (n - 1)] = a.data[r * n]
        b = _random_matrix(rng, n, 3)
        lhs, rhs = lemma1_gap(a, b)
        ok = lhs >= rhs - 1e-9
        deficient_ok += 1 if ok else 0
        rows.append((args.pairs + i, 6, n, 3, lhs, rhs, int(ok), 0))
    if out_dir:
        write_csv(
            out_dir / "lemma1.csv",
            ("pair", "m", "n", "p", "lhs", "rhs", "satisfied", "full_column_rank"),
            rows,
            seed=args.seed,
            version=__version__,
        )
    passed = failures == 0
    detail = (
        f"{args.pairs - failures}/{args.pairs} full-column-rank pairs satisfied; "
        f"rank-deficient {deficient_ok}/5 satisfied (reported only)"
    )
    return "lemma1", passed, detail


def _validate_theorem1(args, out_dir):
    method = Magnitude() if (args.nested or args.t1_method == "magnitude") else WandaStyle()
    grid = [k * 0.05 for k in range(21)]
    rows = []
    worst = 1.0
    for i in range(args.t1_layers):
        rng = SplitMix64(args.seed + 1000 + i)
        bound = (3.0 / args.dim) ** 0.5
        w = DenseMatrix(args.dim, args.dim, rng.fill_uniform(args.dim * args.dim, -bound, bound))
        x = DenseMatrix(args.dim, args.samples, rng.fill_normal(args.dim * args.samples))
        rep = check_theorem1(w, x, grid, method)
        rows.append((i, rep.monotone_fraction))
        worst = min(worst, rep.monotone_fraction)
    if out_dir:
        write_csv(
            out_dir / "theorem1.csv",
            ("layer", "monotone_fraction"),
            rows,
            seed=args.seed,
            version=__version__,
        )
    threshold = 1.0 if isinstance(method, Magnitude) else 0.99
    passed = worst >= threshold
    kind = "nested magnitude" if isinstance(method, Magnitude) else "wanda"
    return "theorem1", passed, f"{kind}: min monotone fraction {worst} (need >= {threshold})"


def _validate_theorem2(args, out_dir):
    rows = []
    total = satisfied = 0
    for i in range(args.t2_nets):
        net = generate_net(
            args.layers, [args.dim] * (args.layers + 1), Activation.LINEAR, args.seed + 2000 + i
        )
        calib = generate_calibration(args.dim, args.samples, args.seed + 3000 + i)
        profile = allocate_uniform(args.sparsity, net.L)
        _, sparse = prune_net(net, calib, profile, WandaStyle())
        trace = trace_errors(net, sparse, calib, profile=profile)
        rep = check_theorem2_bound(trace, sparse)
        for chk in rep.checks:
            rows.append((i, chk.layer, chk.lhs, chk.rhs, int(chk.satisfied)))
            total += 1
            satisfied += 1 if chk.satisfied else 0
    if out_dir:
        write_csv(
            out_dir / "theorem2.csv",
            ("net", "layer", "lhs", "rhs", "satisfied"),
            rows,
            seed=args.seed,
            version=__version__,
        )
    frac = satisfied / total if total else 1.0
    return "theorem2", frac >= 0.95, f"bound satisfied {satisfied}/{total} ({frac:.4f}, need >= 0.95)"


def _validate_theorem4(args, out_dir):
    L = args.layers
    rates = [0.2 + 0.6 * j / (L - 1) for j in range(L)] if L > 1 else [0.5]
    all_hold = True
    table_written = False
    for c in (1.1, 1.5, 2.0, 4.0):
        for f in (SquareF(), RatioF(), ExpF()):
            rep = verify_theorem4(rates, AbstractErrorParams(c=c, f=f))
            all_hold = all_hold and rep.holds
            if out_dir and not table_written:
                export_theorem4_csv(rep, out_dir / "theorem4.csv", seed=args.seed)
                table_written = True
    n_perms = 1
    for k in range(2, L + 1):
        n_perms *= k
    return (
        "theorem4",
        all_hold,
        f"ascending strictly minimal over {n_perms} permutations "
        f"for 4 c values x 3 growth families",
    )


def cmd_validate(parser, args) -> int:
    _require(parser, args, "seed")
    out_dir = None
    if args.out_dir:
        from pathlib import Path

        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    selected = args.theorem
    checks = []
    if selected in ("all", "lemma1"):
        checks.append(_validate_lemma1(args, out_dir))
    if selected in ("all", "1"):
        checks.append(_validate_theorem1(args, out_dir))
    if selected in ("all", "2"):
        checks.append(_validate_theorem2(args, out_dir))
    if selected in ("all", "4"):
        checks.append(_validate_theorem4(args, out_dir))
    ok = True
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok = ok and passed
    return 0 if ok else 4


# ---------------------------------------------------------- step-ablation


def cmd_step_ablation(parser, args) -> int:
    _require(parser, args, "net", "avg_sparsity", "calib_seed")
    net = _load_net_arg(args.net)
    calib = _calibration_for(net, args)
    steps = _parse_steps(args.steps)
    results = step_ablation(
        net,
        calib,
        args.avg_sparsity,
        steps,
        method=_METHODS[args.method](),
        objective=_OBJECTIVES[args.objective],
    )
    rows = []
    for step, report in results:
        best_obj = min(o for _, o in report.candidates)
        rows.append((step, report.best_beta, best_obj, len(report.candidates)))
        print(
            f"step={step!r}: best beta={report.best_beta!r} "
            f"objective={best_obj!r} ({len(report.candidates)} evaluations)"
        )
    if args.out_csv:
        write_csv(
            args.out_csv,
            ("step", "best_beta", "best_objective", "evaluations"),
            rows,
            seed=args.calib_seed,
            version=__version__,
        )
    return 0


# ---------------------------------------------------------- random-search


def cmd_random_search(parser, args) -> int:
    _require(parser, args, "net", "avg_sparsity", "seed", "calib_seed")
    net = _load_net_arg(args.net)
    calib = _calibration_for(net, args)
    report = random_search_profiles(
        net,
        calib,
        args.avg_sparsity,
        args.iters,
        args.seed,
        method=_METHODS[args.method](),
        objective=_OBJECTIVES[args.objective],
    )
    if args.out_csv:
        export_report_csv(report, args.out_csv, seed=args.seed, key_name="iteration")
    if args.out_json:
        export_report_json(report, args.out_json)
    if args.out_profile:
        save_profile(report.best_profile, args.out_profile)
    best_obj = min(o for _, o in report.candidates)
    print(
        f"random search over {args.iters} profiles: best objective={best_obj!r} "
        f"(iteration {int(report.best_beta)})"
    )
    return 0


# ----------------------------------------------------------------- report


def _summarize_csv(path):
    header, rows, _meta = read_csv(path)
    if header[:2] == ["beta", "objective"]:
        pairs = [(float(r[0]), float(r[1])) for r in rows]
        uniform = next((o for b, o in pairs if b == 0.0), None)
        best_b, best_o = min(pairs, key=lambda bo: (bo[1], bo[0]))
        return {"kind": "search", "uniform": uniform, "best": best_o, "best_beta": best_b}
    if header[:2] == ["iteration", "objective"]:
        best = min(float(r[1]) for r in rows)
        return {"kind": "random", "uniform": None, "best": best, "best_beta": None}
    if header[:3] == ["layer_index", "rate", "error"]:
        total = sum(float(r[2]) for r in rows)
        return {"kind": "trace", "uniform": None, "best": total, "best_beta": None}
    if header[:2] == ["step", "best_beta"]:
        best = min(float(r[2]) for r in rows)
        return {"kind": "ablation", "uniform": None, "best": best, "best_beta": None}
    raise DomainError(f"unrecognized CSV layout in {path}")


def cmd_report(parser, args) -> int:
    if not args.inputs:
        parser.error("report needs at least one input CSV")
    summaries = []
    for path in args.inputs:
        summary = _summarize_csv(path)
        summary["name"] = path
        summaries.append(summary)
    wins = ties = losses = 0
    rows = []
    for s in summaries:
        verdict = ""
        if s["kind"] == "search" and s["uniform"] is not None:
            if s["best"] < s["uniform"]:
                wins += 1
                verdict = "win"
            elif s["best"] == s["uniform"]:
                ties += 1
                verdict = "tie"
            else:
                losses += 1
                verdict = "loss"
        rows.append(
            (s["name"], s["kind"], s["uniform"], s["best"], s["best_beta"], verdict)
        )
        print(
            f"{s['name']}: kind={s['kind']} uniform={s['uniform']!r} "
            f"best={s['best']!r} {verdict}"
        )
    searches = wins + ties + losses
    if searches:
        print(f"searched profile vs uniform: {wins} wins / {ties} ties / {losses} losses")
    if args.out_csv:
        write_csv(
            args.out_csv,
            ("name", "kind", "uniform_objective", "best_objective", "best_beta", "verdict"),
            rows,
            seed="-",
            version=__version__,
        )
    return 0


# ------------------------------------------------------------ parser setup


def _add_common_calib(sp):
    sp.add_argument("--calib-seed", type=int, default=None, help="seed for calibration data")
    sp.add_argument("--samples", type=int, default=128, help="calibration sample count d")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="sparsalloc",
        description="Layer-wise sparsity allocation experiments on synthetic layer chains.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict = {}

    def sub(name, func, **kw):
        sp = subs.add_parser(name, **kw)
        sp.add_argument("--config", default=None, help="JSON file with default parameters")
        sp.set_defaults(func=func)
        registry[name] = sp
        return sp

    sp = sub("gen-net", cmd_gen_net, help="generate a deterministic layer-chain net")
    sp.add_argument("--layers", "-L", type=int, default=None)
    sp.add_argument("--dim", type=int, default=64, help="square width used for all layers")
    sp.add_argument("--dims", default=None, help="comma list of L+1 widths, overrides --dim")
    sp.add_argument("--activation", choices=["linear", "relu"], default="linear")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--label", default=None)
    sp.add_argument("--out", "-o", default=None)

    sp = sub("search", cmd_search, help="grid-search the common difference beta")
    sp.add_argument("--net", default=None)
    sp.add_argument("--avg-sparsity", "-S", type=float, default=None)
    sp.add_argument("--step", type=float, default=0.002)
    sp.add_argument("--method", choices=sorted(_METHODS), default="wanda")
    sp.add_argument("--objective", choices=sorted(_OBJECTIVES), default="recon")
    _add_common_calib(sp)
    sp.add_argument("--out-csv", default=None)
    sp.add_argument("--out-json", default=None)
    sp.add_argument("--out-profile", default=None)

    sp = sub("prune", cmd_prune, help="prune a net with a stored profile")
    sp.add_argument("--net", default=None)
    sp.add_argument("--profile", default=None)
    sp.add_argument("--method", choices=sorted(_METHODS), default="wanda")
    sp.add_argument("--nm-m", type=int, default=None, help="mixed N:M group size")
    sp.add_argument("--dense-scoring", action="store_true")
    sp.add_argument("--per-row", action="store_true")
    _add_common_calib(sp)
    sp.add_argument("--out-net", default=None)
    sp.add_argument("--out-masks", default=None)
    sp.add_argument("--out-trace", default=None)

    sp = sub("validate", cmd_validate, help="run the theorem validation suite")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--theorem", choices=["all", "lemma1", "1", "2", "4"], default="all")
    sp.add_argument("--pairs", type=int, default=200, help="lemma1 sample pairs")
    sp.add_argument("--t1-layers", type=int, default=25)
    sp.add_argument("--t1-method", choices=sorted(_METHODS), default="magnitude")
    sp.add_argument("--nested", action="store_true", help="force nested magnitude masks in theorem 1")
    sp.add_argument("--t2-nets", type=int, default=10)
    sp.add_argument("--layers", type=int, default=8)
    sp.add_argument("--dim", type=int, default=32)
    sp.add_argument("--samples", type=int, default=64)
    sp.add_argument("--sparsity", type=float, default=0.5)
    sp.add_argument("--out-dir", default=None)

    sp = sub("step-ablation", cmd_step_ablation, help="compare grid step sizes")
    sp.add_argument("--net", default=None)
    sp.add_argument("--avg-sparsity", "-S", type=float, default=None)
    sp.add_argument("--steps", default="0.008,0.004,0.002,0.001,0.0005")
    sp.add_argument("--method", choices=sorted(_METHODS), default="wanda")
    sp.add_argument("--objective", choices=sorted(_OBJECTIVES), default="recon")
    _add_common_calib(sp)
    sp.add_argument("--out-csv", default=None)

    sp = sub("random-search", cmd_random_search, help="random-search whole profiles")
    sp.add_argument("--net", default=None)
    sp.add_argument("--avg-sparsity", "-S", type=float, default=None)
    sp.add_argument("--iters", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--method", choices=sorted(_METHODS), default="wanda")
    sp.add_argument("--objective", choices=sorted(_OBJECTIVES), default="recon")
    _add_common_calib(sp)
    sp.add_argument("--out-csv", default=None)
    sp.add_argument("--out-json", default=None)
    sp.add_argument("--out-profile", default=None)

    sp = sub("report", cmd_report, help="tabulate stored result CSVs")
    sp.add_argument("--inputs", nargs="*", default=None)
    sp.add_argument("--out-csv", default=None)

    return parser, registry


def _scan_config(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _scan_command(argv):
    for tok in argv:
        if not tok.startswith("-"):
            return tok
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    cfg_path = _scan_config(argv)
    if cfg_path:
        cmd = _scan_command(argv)
        try:
            with open(cfg_path, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {cfg_path}: {exc}", file=sys.stderr)
            return 3
        if cmd in registry:
            registry[cmd].set_defaults(**{str(k): v for k, v in cfg.items()})
    args = parser.parse_args(argv)
    sub = registry[args.command]
    try:
        return args.func(sub, args)
    except SparsallocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
