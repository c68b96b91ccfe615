"""Command-line entry point: ``holoblock {analyze, bloch, verify, sweep}``.

Exit codes: 0 success, 1 failed verification check, 2 configuration error
(including a symbol that is not a self-map of the ball).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .criteria import CriterionParams, CriterionProfile, Verdict, analyze
from .sampling import WORKERS_ENV, resolve_workers
from .spaces import ParamError, SpaceParams
from .symbols import SelfMapSymbol, validate_self_map
from .verify import BUDGETS, SUITES, run_suite

REPORT_VERSION = 1
EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


class SelfMapRejected(Exception):
    def __init__(self, report):
        self.report = report
        arg = ", ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in report.argmax)
        super().__init__(f"phi is not a self-map of the ball: |phi| = {report.bound:.6g} >= 1 at w = ({arg})")


def sanitize(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [sanitize(obj.real), sanitize(obj.imag)]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(sanitize(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def identity_view(report: dict) -> dict:
    """The report without its ``runtime`` block (timing, workers, paths)."""
    return {k: v for k, v in report.items() if k != "runtime"}


def write_csv(path: Path, prof: CriterionProfile) -> None:
    n = prof.W.shape[1]
    header = [f"w{j + 1}_{part}" for j in range(n) for part in ("re", "im")]
    header += ["abs_phi", "Q", "D", "shell_index"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for w, a, q, d, j in zip(prof.W, prof.abs_phi, prof.Q, prof.D, prof.shell_index):
            row = [repr(float(x)) for c in w for x in (c.real, c.imag)]
            out.writerow(row + [repr(float(a)), repr(float(q)), repr(float(d)), int(j)])


def _versions() -> dict:
    return {"holoblock": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _base_report(command: str, seed: int) -> dict:
    return {"report_version": REPORT_VERSION, "command": command, "seed": seed, "versions": _versions()}


def _validated_phi(cfg: RunConfig) -> tuple[SelfMapSymbol, dict]:
    rep = validate_self_map(cfg.pair.phi, cfg.sampler.self_map_samples, cfg.sampler.seed)
    if not rep.accepted:
        raise SelfMapRejected(rep)
    return rep.symbol, rep.to_dict()


def _verdict_block(prof: CriterionProfile, verdict: Verdict) -> dict:
    return {"verdict": verdict.to_dict(), "profile": prof.summary()}


def _analysis(cfg: RunConfig, cp: CriterionParams, command: str, extra: dict) -> tuple[dict, CriterionProfile]:
    _, self_map = _validated_phi(cfg)
    pcfg = cfg.profile_config()
    prof, verdict = analyze(cfg.pair, cp, pcfg, cfg.policy)
    report = _base_report(command, cfg.sampler.seed)
    report.update(extra)
    report.update({
        "config": cfg.raw,
        "criterion_params": cp.to_dict(),
        "sampler": {"seed": pcfg.seed, "levels": pcfg.levels, "per_shell": pcfg.per_shell,
                    "self_map_samples": cfg.sampler.self_map_samples},
        "policy": cfg.policy.to_dict(),
        "self_map": self_map,
    })
    report.update(_verdict_block(prof, verdict))
    return report, prof


def _emit(report: dict, prof: CriterionProfile | None, out: Path, stem: str, formats, t0: float,
          workers: int) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    if prof is not None and "csv" in formats:
        paths["csv"] = str(out / f"{stem}.csv")
        write_csv(Path(paths["csv"]), prof)
    if "json" in formats:
        paths["json"] = str(out / f"{stem}.json")
    report["runtime"] = {"seconds": time.perf_counter() - t0, "workers": workers, "outputs": paths}
    if "json" in paths:
        Path(paths["json"]).write_text(dumps(report), encoding="utf-8")
    return paths


def _workers(args, cfg: RunConfig | None) -> int:
    if args.workers is not None:
        return resolve_workers(args.workers)
    if cfg is not None and cfg.workers is not None:
        return cfg.workers
    return resolve_workers(None)


def _with_workers(cfg: RunConfig, workers: int) -> RunConfig:
    return replace(cfg, workers=workers)


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, args.seed)
    if cfg.params is None:
        raise ConfigError("analyze needs a params block", "$.params")
    workers = _workers(args, cfg)
    cfg = _with_workers(cfg, workers)
    cp = CriterionParams.from_space(cfg.params)
    report, prof = _analysis(cfg, cp, "analyze", {"params": cfg.params.to_dict()})
    _emit(report, prof, Path(args.out), cfg.stem, cfg.formats, t0, workers)
    _print_verdict(report)
    return EXIT_OK


def cmd_bloch(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, args.seed)
    if cfg.bloch is None:
        raise ConfigError("bloch needs a bloch block with p_src and q_dst", "$.bloch")
    workers = _workers(args, cfg)
    cfg = _with_workers(cfg, workers)
    p_src, q_dst = cfg.bloch
    cp = CriterionParams.bloch(cfg.pair.n, p_src, q_dst)
    report, prof = _analysis(cfg, cp, "bloch", {"bloch": {"p_src": str(p_src), "q_dst": str(q_dst)}})
    _emit(report, prof, Path(args.out), cfg.stem, cfg.formats, t0, workers)
    _print_verdict(report)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    seed = 0 if args.seed is None else args.seed
    results = run_suite(args.suite, args.budget, seed)
    failed = [r for r in results if not r.passed]
    report = _base_report("verify", seed)
    report.update({
        "suite": args.suite,
        "budget": args.budget,
        "passed": not failed,
        "checks": [{k: v for k, v in r.to_dict().items() if k != "seconds"} for r in results],
        "failures": [{k: v for k, v in r.to_dict().items() if k != "seconds"} for r in failed],
    })
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"verify-{args.suite}.json"
    report["runtime"] = {"seconds": time.perf_counter() - t0, "outputs": {"json": str(path)},
                         "check_seconds": {f"{r.suite}/{r.name}": r.seconds for r in results}}
    path.write_text(dumps(report), encoding="utf-8")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.suite:<9} {r.name}")
    for r in failed:
        print(f"failing case {r.suite}/{r.name}: {json.dumps(sanitize(r.to_dict()))}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK


def sweep_points(grid: dict) -> list[tuple]:
    if not grid or any(not grid.get(k) for k in ("p", "q", "s", "alpha")):
        return []
    return list(itertools.product(grid["p"], grid["q"], grid["s"], grid["alpha"]))


def _transitions(rows: list[dict]) -> list[dict]:
    """Adjacent grid points (same p, q, s; consecutive alpha) whose verdicts or regimes differ."""
    out = []
    for a, b in zip(rows, rows[1:]):
        if (a["p"], a["q"], a["s"]) != (b["p"], b["q"], b["s"]):
            continue
        changed = [key for key in ("bounded", "compact", "regime") if a[key] != b[key]]
        if changed:
            out.append({"from": a["index"], "to": b["index"], "changed": changed,
                        "alpha": [a["alpha"], b["alpha"]]})
    return out


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, args.seed)
    if cfg.grid is None:
        raise ConfigError("sweep needs a grid block", "$.grid")
    workers = _workers(args, cfg)
    cfg = _with_workers(cfg, workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, skipped = [], []
    points = sweep_points(cfg.grid)
    if points:
        _validated_phi(cfg)
    for i, (p, q, s, alpha) in enumerate(points):
        point = {"p": str(p), "q": str(q), "s": str(s), "alpha": str(alpha)}
        try:
            sp = SpaceParams(cfg.pair.n, p, q, s, alpha)
        except ParamError as exc:
            print(f"warning: skipping grid point {point}: {exc}", file=sys.stderr)
            skipped.append({"index": i, **point, "reason": str(exc)})
            continue
        ti = time.perf_counter()
        cp = CriterionParams.from_space(sp)
        report, prof = _analysis(cfg, cp, "sweep", {"params": sp.to_dict(), "grid_index": i})
        paths = _emit(report, prof, out, f"{cfg.stem}-{i:03d}", cfg.formats, ti, workers)
        v = report["verdict"]
        rows.append({"index": i, **point, "k": str(sp.k), "regime": v["regime"], "bounded": v["bounded"],
                     "compact": v["compact"], "sup_Q": report["profile"]["sup_Q"],
                     "sup_D": report["profile"]["sup_D"], "report": paths.get("json")})
    by_regime = {reg: [r["index"] for r in rows if r["regime"] == reg] for reg in ("k<1", "k=1", "k>1")}
    summary = _base_report("sweep", cfg.sampler.seed)
    summary.update({"config": cfg.raw, "rows": [{k: v for k, v in r.items() if k != "report"} for r in rows],
                    "by_regime": by_regime, "transitions": _transitions(rows), "skipped": skipped})
    path = out / f"{cfg.stem}-summary.json"
    summary["runtime"] = {"seconds": time.perf_counter() - t0, "workers": workers,
                          "outputs": {"json": str(path), "reports": [r["report"] for r in rows]}}
    path.write_text(dumps(summary), encoding="utf-8")
    marks = {(t["to"]) for t in summary["transitions"]}
    print(f"{'idx':>4} {'p':>6} {'q':>6} {'s':>6} {'alpha':>8} {'k':>8} {'regime':>6} {'bounded':>12} {'compact':>14}")
    for r in rows:
        flag = " <- transition" if r["index"] in marks else ""
        print(f"{r['index']:>4} {r['p']:>6} {r['q']:>6} {r['s']:>6} {r['alpha']:>8} {r['k']:>8} "
              f"{r['regime']:>6} {r['bounded']:>12} {r['compact']:>14}{flag}")
    print(f"{len(rows)} grid points analysed, {len(skipped)} skipped")
    return EXIT_OK


def _print_verdict(report: dict) -> None:
    v, prof = report["verdict"], report["profile"]
    print(f"regime {v['regime']}: bounded={v['bounded']} compact={v['compact']} "
          f"sup_Q={prof['sup_Q']:.6g} sup_D={prof['sup_D']:.6g}")
    for key, path in report["runtime"]["outputs"].items():
        print(f"wrote {key}: {path}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides the config)")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default: config, then ${WORKERS_ENV}, then 1)")
    parser = argparse.ArgumentParser(
        prog="holoblock",
        description="Numerical boundedness and compactness criteria for weighted composition "
                    "operators from F(p,q,s) to Bloch-type spaces on the unit ball.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("analyze", "verdicts for F(p,q,s) -> beta^alpha"),
                           ("bloch", "verdicts for beta^p' -> beta^q'"),
                           ("sweep", "verdicts over a (p, q, s, alpha) grid")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--config", required=True, help="JSON run configuration")
    vp = sub.add_parser("verify", parents=[common], help="run verification suites")
    vp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    vp.add_argument("--budget", choices=tuple(BUDGETS), default="smoke")
    return parser


COMMANDS = {"analyze": cmd_analyze, "bloch": cmd_bloch, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be >= 0")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SelfMapRejected, ParamError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
