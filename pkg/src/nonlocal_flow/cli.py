"""Command-line interface.

    nonlocal-flow run <config.json> [--out DIR]     integrate + enabled checks
    nonlocal-flow predict <config.json>             limit prediction only
    nonlocal-flow check <config.json> [--out DIR]   full verification

Exit codes: 0 all enabled checks pass, 1 a check failed (or the data
fits no hypothesis class), 2 usage or schema error. The environment
variable NONLOCAL_FLOW_THREADS caps scenario parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import runner
from .analysis import predict_omega_limit
from .config import parse_config
from .errors import NoHypothesis, NonlocalFlowError, SchemaError
from .state import build_ensemble, validate_hypothesis


def _load_configs(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse_config(text)
    except SchemaError as exc:
        print(f"schema error at {exc.path}: {exc.message}", file=sys.stderr)
        return None


def _print_summary(results) -> bool:
    all_ok = True
    for res in results:
        if res.error is not None:
            print(f"[FAIL] {res.name}: {res.error}")
            all_ok = False
            continue
        status = "ok" if res.ok else "FAIL"
        print(f"[{status:>4}] {res.name}: termination={res.termination}")
        for chk in res.checks:
            mark = "pass" if chk.ok else "FAIL"
            print(f"       {chk.name}: {mark}")
        all_ok = all_ok and res.ok
    return all_ok


def _cmd_run(args, force_all_checks: bool) -> int:
    cfgs = _load_configs(args.config)
    if cfgs is None:
        return 2
    results = runner.run_config(cfgs, out_dir=args.out,
                                force_all_checks=force_all_checks)
    return 0 if _print_summary(results) else 1


def _cmd_predict(args) -> int:
    cfgs = _load_configs(args.config)
    if cfgs is None:
        return 2
    entries = []
    failed = False
    for cfg in cfgs:
        try:
            e0 = build_ensemble(cfg.initial_datum)
            hyp = validate_hypothesis(e0)
            prediction = predict_omega_limit(e0, hyp)
        except NoHypothesis as exc:
            entries.append({"name": cfg.name,
                            "error": f"NoHypothesis: {exc}"})
            failed = True
            continue
        except NonlocalFlowError as exc:
            entries.append({"name": cfg.name,
                            "error": f"{type(exc).__name__}: {exc}"})
            failed = True
            continue
        entries.append({
            "name": cfg.name,
            "hypothesis": hyp.tag,
            "interval": list(hyp.interval),
            "prediction": runner.prediction_dict(prediction),
        })
    print(json.dumps({"scenarios": entries}, indent=2))
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nonlocal-flow",
        description="Simulate the nonlocal bistable flow on atom ensembles "
                    "and verify its qualitative theory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate scenarios and run the "
                                       "checks enabled in the config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="out",
                       help="output directory (default: out)")

    p_predict = sub.add_parser("predict", help="predict limits from the "
                                               "initial data; no integration")
    p_predict.add_argument("config")

    p_check = sub.add_parser("check", help="full verification: every check "
                                           "not explicitly disabled")
    p_check.add_argument("config")
    p_check.add_argument("--out", default=None,
                         help="optional output directory")

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args, force_all_checks=False)
    if args.command == "predict":
        return _cmd_predict(args)
    return _cmd_run(args, force_all_checks=True)


if __name__ == "__main__":
    sys.exit(main())
