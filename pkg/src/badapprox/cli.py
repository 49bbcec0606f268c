"""``badapprox`` command line: params, build, verify, export-plot."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from .config import FAULTS, RunConfig, load_config
from .errors import BadApproxError, ConfigError
from . import pipeline


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    up = {}
    for key in ("depth", "seed", "samples", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            up[key] = v
    if getattr(args, "out", None):
        up["output_dir"] = args.out
    if getattr(args, "fault", None):
        up["fault"] = args.fault
    if os.environ.get("BADAPPROX_THREADS") and "workers" not in up:
        try:
            up["workers"] = max(1, int(os.environ["BADAPPROX_THREADS"]))
        except ValueError:
            raise ConfigError("BADAPPROX_THREADS must be an integer") from None
    return replace(cfg, **up)


def _progress(args):
    if args.quiet:
        return None
    return lambda msg: print(msg, file=sys.stderr, flush=True)


def cmd_params(args) -> int:
    cfg = _config(args)
    rep = pipeline.params_report(cfg)
    text = json.dumps(rep, indent=1, sort_keys=True)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "params.json"), "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_build(args) -> int:
    cfg = _config(args)
    run = pipeline.run_build(cfg, _progress(args))
    names = pipeline.write_artifacts(run, cfg.output_dir)
    masses = [str(m) for m in pipeline.layer_masses(run.tree)]
    print(f"wrote {', '.join(names)} to {cfg.output_dir}; layer masses {masses}")
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args)
    run = pipeline.run_build(cfg, _progress(args))
    checks = pipeline.verify(run, cfg.samples if args.samples else 200)
    for c in checks:
        print(c.line())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verify.json"), "w") as fh:
            json.dump([c.__dict__ for c in checks], fh, indent=1, sort_keys=True)
            fh.write("\n")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 6
    return 0


def cmd_export_plot(args) -> int:
    cfg = _config(args)
    src = cfg.output_dir
    missing = [n for n in ("tree.json", "holder.csv", "ledger.csv") if not os.path.exists(os.path.join(src, n))]
    if missing:
        raise ConfigError(f"missing artifacts in {src}: {', '.join(missing)} (run build first)")
    files = pipeline.plot_files(src)
    for name, text in files.items():
        with open(os.path.join(src, name), "w") as fh:
            fh.write(text)
    print(f"wrote {', '.join(sorted(files))} to {src}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="badapprox", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--quiet", action="store_true")
        return p

    common(sub.add_parser("params", help="print derived constants")).set_defaults(fn=cmd_params)
    for name, fn in (("build", cmd_build), ("verify", cmd_verify)):
        p = common(sub.add_parser(name))
        p.add_argument("--depth", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--workers", type=int)
        if name == "verify":
            p.add_argument("--fault", choices=FAULTS, help="inject a known defect")
        p.set_defaults(fn=fn)
    common(sub.add_parser("export-plot", help="plot tables from build artifacts")).set_defaults(fn=cmd_export_plot)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except BadApproxError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code if e.exit_code != 1 else 2


if __name__ == "__main__":
    sys.exit(main())
