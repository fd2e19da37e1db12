"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .core import ContractError, RunConfig, parse_sizes
from .experiment import (
    ExperimentManifest,
    histogram_csv,
    load_manifest_config,
    run_experiment,
    summary_csv,
)
from .standard_war import run_standard_war

log = logging.getLogger("simplexwar")

WALK_COLUMNS = "n,m,reps,mean,std_error,median,max,lower_bound,upper_bound"
SWEEP_COLUMNS = "n,m,n_sq,n_sq_over_m_sq,avg,std_error,avg_over_n_sq"


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; keys are flag names with or without dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser, seed_required=True):
    p.add_argument("--seed", type=int, required=seed_required, help="64-bit master seed")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--round-cap", type=int, default=None)
    p.add_argument("--config", help="flat key = value file; flags override it")


def _outputs(p: argparse.ArgumentParser):
    p.add_argument("--manifest", help="write the experiment manifest JSON here")
    p.add_argument("--hist", help="write the round-count histogram CSV here")
    p.add_argument("--bin-width", type=int, default=50)
    p.add_argument("--output", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simplexwar", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("walk", help="simulate the sticky random walk")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sizes", help="comma-separated start, overrides the equal split")
    p.add_argument("--exact", action="store_true", help="also solve for the exact expectation")
    p.add_argument("--output", choices=("csv", "json"), default="csv")
    p.add_argument("--manifest")
    _common(p)
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("sweep", help="sticky-walk table over (n, m) pairs")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--m-list", type=_int_list, required=True)
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pwar", help="uniform-draw War with a winning rule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rule", default="uniform_active")
    p.add_argument("--rule-file")
    p.add_argument("--sizes")
    p.add_argument("--exact", action="store_true")
    _common(p)
    _outputs(p)
    p.set_defaults(func=cmd_pwar)

    p = sub.add_parser("fwar", help="top-card War with strength-weighted winners")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--strength", default="affine")
    p.add_argument("--deal", choices=("claim", "equal"), default="claim")
    _common(p)
    _outputs(p)
    p.set_defaults(func=cmd_fwar)

    p = sub.add_parser("war", help="standard 52-card War")
    p.add_argument("--players", type=int, required=True)
    _common(p)
    _outputs(p)
    p.set_defaults(func=cmd_war)

    p = sub.add_parser("replay", help="re-run a manifest and print its summary CSV")
    p.add_argument("manifest_path")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--check", action="store_true", help="exit 1 unless the summary matches")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--max-n", type=int, default=12)
    p.add_argument("--max-m", type=int, default=4)
    p.add_argument("--reps", type=int, default=10**4)
    p.add_argument("--rule-file", help="extra winning rule to validate")
    p.add_argument("--report", help="write a JSON report of every check here")
    p.add_argument("--config")
    p.set_defaults(func=cmd_verify)
    return parser


def _config(args, variant, n, m, **kw) -> RunConfig:
    try:
        return RunConfig(
            variant,
            n,
            m,
            seed=args.seed,
            replications=args.reps,
            round_cap=args.round_cap,
            threads=args.threads,
            **kw,
        )
    except ContractError as exc:
        raise UsageError(str(exc)) from exc


def _emit(args, manifest) -> None:
    if args.manifest:
        manifest.write(args.manifest)
    if getattr(args, "hist", None):
        Path(args.hist).write_text(histogram_csv(manifest.summary), encoding="utf-8")
    if args.output == "json":
        print(manifest.dumps())
    else:
        sys.stdout.write(summary_csv(manifest.summary))


def cmd_walk(args) -> int:
    sizes = parse_sizes(args.sizes) if args.sizes else "equal"
    cfg = _config(args, "sticky_walk", args.n, args.m, initial_sizes=sizes)
    try:
        man = run_experiment(cfg, exact=args.exact)
    except ContractError as exc:
        raise UsageError(str(exc)) from exc
    if args.manifest:
        man.write(args.manifest)
    if args.output == "json":
        print(man.dumps())
        return 0
    s = man.summary
    lo, hi = man.bounds
    cols = WALK_COLUMNS + (",exact" if args.exact else "")
    row = [cfg.n, cfg.m, cfg.replications, s.mean_rounds, s.std_error, s.median_rounds,
           s.max_rounds, lo, hi]
    if args.exact:
        row.append(man.exact)
    print(cols)
    print(",".join(str(v) for v in row))
    return 0


def cmd_sweep(args) -> int:
    from .sticky_walk import run_walk

    print(SWEEP_COLUMNS)
    for n in args.n_list:
        for m in args.m_list:
            if m < 2 or n % m or n // m < 2:
                log.warning("skipping n=%d, m=%d: need m | n and n/m >= 2", n, m)
                continue
            s = run_walk(_config(args, "sticky_walk", n, m))
            print(f"{n},{m},{n * n},{n * n / (m * m)},{s.mean_rounds},{s.std_error},"
                  f"{s.mean_rounds / (n * n)}")
    return 0


def cmd_pwar(args) -> int:
    from .pwar import builtin_rule, load_rule_file

    try:
        rule = load_rule_file(args.rule_file) if args.rule_file else builtin_rule(args.rule)
    except ContractError as exc:
        raise UsageError(str(exc)) from exc
    sizes = parse_sizes(args.sizes) if args.sizes else "equal"
    cfg = _config(args, "pwar", args.n, args.m, initial_sizes=sizes, rule_id=rule.id)
    _emit(args, run_experiment(cfg, exact=args.exact, rule=rule))
    return 0


def cmd_fwar(args) -> int:
    from .fwar import strength

    try:
        f = strength(args.strength)
    except ContractError as exc:
        raise UsageError(str(exc)) from exc
    cfg = _config(args, "fwar", args.n, args.m, f_id=f.id, deal=args.deal)
    man = run_experiment(cfg, f=f)
    _emit(args, man)
    extra = man.summary.extra
    if "q_sum" in extra and "q_sum_leading" in extra:
        log.info("mean total Q at termination %.6g (leading term %.6g, ratio %.4f)",
                 extra["q_sum"], extra["q_sum_leading"], extra["q_sum"] / extra["q_sum_leading"])
    return 0


def cmd_war(args) -> int:
    if not 2 <= args.players <= 52:
        raise UsageError(f"--players must be in 2..52, got {args.players}")
    cfg = _config(args, "standard_war", 52, args.players)
    t0 = time.perf_counter()
    summary = run_standard_war(cfg, bin_width=args.bin_width)
    _emit(args, ExperimentManifest(cfg, summary, wall_time=time.perf_counter() - t0))
    return 0


def cmd_replay(args) -> int:
    from .experiment import simulate

    data = json.loads(Path(args.manifest_path).read_text(encoding="utf-8"))
    cfg = load_manifest_config(args.manifest_path)
    if args.threads:
        cfg = cfg.with_threads(args.threads)
    rule = f = None
    if cfg.variant == "pwar" and cfg.rule_id:
        from .pwar import builtin_rule

        rule = builtin_rule(cfg.rule_id)
    if cfg.variant == "standard_war":
        summary = run_standard_war(cfg, bin_width=data["summary"].get("bin_width", 50))
    else:
        summary = simulate(cfg, rule, f)
    sys.stdout.write(summary_csv(summary))
    if args.check:
        recorded = data["summary"]
        same = all(recorded[k] == getattr(summary, k) or
                   (recorded[k] != recorded[k] and getattr(summary, k) != getattr(summary, k))
                   for k in summary.CSV_FIELDS)
        if not same:
            log.error("replayed summary differs from the manifest")
            return 1
    return 0


def cmd_verify(args) -> int:
    from . import verify
    from .pwar import load_rule_file

    extra = []
    if args.rule_file:
        try:
            extra.append(load_rule_file(args.rule_file))
        except ContractError as exc:
            raise UsageError(str(exc)) from exc
    results = verify.run_all(args.max_n, args.max_m, args.reps, extra)
    for r in results:
        print(r.line())
    report = {
        "passed": all(r.passed for r in results),
        "checks": [
            {"name": r.name, "passed": r.passed, "detail": r.detail, "failures": r.failures[:20]}
            for r in results
        ],
    }
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, default=repr) + "\n")
    if not report["passed"]:
        failed = [c for c in report["checks"] if not c["passed"]]
        print(json.dumps({"failed": failed}, default=repr))
        return 1
    return 0


def _apply_config_file(parser, argv):
    """Install the config file's values as subcommand defaults, then parse."""
    argv = list(sys.argv[1:] if argv is None else argv)
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return parser.parse_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((t for t in argv if t in choices), None)
    if command is None:
        return parser.parse_args(argv)
    sub = choices[command]
    values = read_config_file(path)
    dests = {a.dest: a for a in sub._actions}
    unknown = sorted(set(values) - set(dests))
    if unknown:
        raise UsageError(f"unknown keys in {path}: {', '.join(unknown)}")
    typed = {}
    for key, raw in values.items():
        action = dests[key]
        if action.const is True:
            typed[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            typed[key] = action.type(raw) if action.type else raw
        action.required = False
    sub.set_defaults(**typed)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError) as exc:
        print(f"simplexwar: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        return args.func(args)
    except (UsageError, ContractError) as exc:
        print(f"simplexwar: error: {exc}", file=sys.stderr)
        return 2
