"""Batch command-line front end.

Every subcommand writes a run manifest next to its outputs recording the
resolved configuration, master seed, tool version, timestamps, and
output digests.  Exit codes: 0 success, 2 configuration error, 3 cost
ceiling refusal, 4 low-confidence result under --strict.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelParams, domain_seed, stream_rng
from .code import CCSDS_SHORT_NAME, ccsds_short_code, LinearCode
from .detect import (DetectorConfig, absent_sampler, metrics,
                     present_sampler, threshold_from_pool, wilson_interval)
from .experiments import (BUILTIN_TS, ConfigError, SimConfig,
                          estimate_detector_probs, parse_sim_config,
                          run_campaign, write_campaign_csv)
from .framing import dts_of, idle_pattern
from .gf2 import BitWord, QcSpec, expand_qc
from .tsdesign import (CodewordList, CostCeilingError, SearchParams,
                       certify_min_distance, enumerate_low_weight,
                       guaranteed_search, local_search, ncs,
                       transform_for_lrt)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COST = 3
EXIT_LOW_CONFIDENCE = 4

ROC_COLUMNS = ("eb_n0_db,metric,threshold,p_fa,p_fa_ci,p_d,p_d_ci,"
               "trials_absent,trials_present,seed")
DETECT_COLUMNS = ("eb_n0_db,metric,window,threshold,p_fa,p_fa_ci,"
                  "p_md,p_md_ci,trials_absent,trials_present,seed")


def _resolve_ts(label_or_hex: str) -> tuple[str, BitWord]:
    """Returns (label, decoder-side word) for a builtin label or hex."""
    if label_or_hex in BUILTIN_TS:
        e = BUILTIN_TS[label_or_hex]
        return e.label, e.dts
    try:
        word = BitWord.from_hex(label_or_hex, 128)
    except ValueError as exc:
        raise ConfigError(f"not a tail-sequence label or hex: {label_or_hex!r}") from exc
    return label_or_hex, dts_of(word)


class _Manifest:
    def __init__(self, subcommand: str, config: dict, seed: int, out_dir: Path):
        self.data = {
            "subcommand": subcommand,
            "config": config,
            "master_seed": seed,
            "tool_version": __version__,
            "started": datetime.now(timezone.utc).isoformat(),
            "outputs": {},
        }
        self.out_dir = out_dir

    def add(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.data["outputs"][path.name] = digest

    def write(self, name: str) -> Path:
        self.data["finished"] = datetime.now(timezone.utc).isoformat()
        path = self.out_dir / f"{name}.manifest.json"
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        return path


def _load_code(args) -> LinearCode:
    if args.spec:
        spec = QcSpec.parse(Path(args.spec).read_text())
        h = expand_qc(spec)
        return LinearCode.from_parity_check(h, qc_block_size=spec.block_size)
    if args.builtin != CCSDS_SHORT_NAME:
        raise ConfigError(f"unknown builtin code {args.builtin!r}")
    return ccsds_short_code()


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_code(args, out_dir: Path, manifest: _Manifest) -> int:
    code = _load_code(args)
    if args.check:
        rank = code.h.rank
        ok_left = all(code.syndrome(code.forms.g_left.row_word(i)).value == 0
                      for i in range(code.k))
        ok_right = all(code.syndrome(code.forms.g_right.row_word(i)).value == 0
                       for i in range(code.k))
        print(f"n={code.n} k={code.k} rank={rank}")
        print(f"systematic forms: left={'OK' if ok_left else 'FAIL'} "
              f"right={'OK' if ok_right else 'FAIL'}")
        if not (ok_left and ok_right and rank == code.n - code.k):
            return 1
    if args.dump_h:
        path = out_dir / "h_matrix.txt"
        path.write_text("\n".join(
            "".join(str(b) for b in row) for row in code.h.a) + "\n")
        manifest.add(path)
        print(f"wrote {path}")
    if args.dump_g:
        g = code.forms.g_left if args.dump_g == "left" else code.forms.g_right
        path = out_dir / f"g_{args.dump_g}.txt"
        path.write_text("\n".join(
            "".join(str(b) for b in row) for row in g.a) + "\n")
        manifest.add(path)
        print(f"wrote {path}")
    if args.encode_left:
        print(code.encode_left(BitWord.from_hex(args.encode_left, code.k)).to_hex())
    if args.encode_right:
        print(code.encode_right(BitWord.from_hex(args.encode_right, code.k)).to_hex())
    return EXIT_OK


def cmd_enumerate(args, out_dir: Path, manifest: _Manifest) -> int:
    code = _load_code(args)
    lw = enumerate_low_weight(code, args.budget, op_ceiling=args.op_ceiling,
                              threads=args.threads)
    path = out_dir / f"codewords_b{args.budget}.txt"
    lw.save(path)
    manifest.add(path)
    for w, c in lw.counts().items():
        print(f"weight {w}: {c}")
    print(f"complete to weight {lw.completeness_bound}; wrote {path}")
    return EXIT_OK


def cmd_design_ts(args, out_dir: Path, manifest: _Manifest) -> int:
    code = _load_code(args)
    params = SearchParams(w_max=args.w_max, max_attempts=args.max_attempts,
                          T=args.iterations, S_max=args.s_max,
                          rng_seed=args.seed)
    if args.alg == "alg1":
        if not args.codeword_list:
            raise ConfigError("--alg alg1 requires --codeword-list")
        lw = CodewordList.load(args.codeword_list)
        word = guaranteed_search(code, lw, params)
        if word is None:
            print("search failed: attempt budget exhausted")
            return 1
        report = ncs(code, word, params, weight_limit=args.report_weight_limit,
                     threads=args.threads)
    else:
        result = local_search(code, params, threads=args.threads)
        word = result.word
        report = result.report
        print(f"stop reason: {result.stop_reason} after {result.iterations} flips")
    print(word.to_hex())
    print(report.render())
    path = out_dir / "ts_design.txt"
    path.write_text(word.to_hex() + "\n" + report.render() + "\n")
    manifest.add(path)
    return EXIT_OK


def cmd_certify_ts(args, out_dir: Path, manifest: _Manifest) -> int:
    code = _load_code(args)
    word = BitWord.from_hex(args.sequence, 128)
    ok = certify_min_distance(code, word, args.min_distance,
                              op_ceiling=args.op_ceiling,
                              threads=args.threads)
    print(f"certified {'true' if ok else 'false'}: "
          f"{'no' if ok else 'a'} codeword within distance {args.min_distance}")
    return EXIT_OK


def cmd_transform_ts(args, out_dir: Path, manifest: _Manifest) -> int:
    code = _load_code(args)
    word = BitWord.from_hex(args.sequence, 128)
    if args.target_half == "alt0":
        target = idle_pattern(code.k, 0)
    elif args.target_half == "alt1":
        target = idle_pattern(code.k, 1)
    else:
        target = BitWord.from_hex(args.target_half, code.k)
    print(transform_for_lrt(code, word, target).to_hex())
    return EXIT_OK


def _metric_pools(kind: str, dts: BitWord, params: ChannelParams, window: int,
                  trials_absent: int, trials_present: int, seed: int,
                  code: LinearCode):
    cfg = DetectorConfig.for_word(kind, dts, noise_variance=params.sigma2,
                                  detection_length=window)
    eb_tag = int(round(params.eb_n0_db * 1000))
    absent = np.empty(trials_absent)
    sampler = absent_sampler("codeword", params, window, code=code)
    done, idx = 0, 0
    base = domain_seed(seed, 101, eb_tag)
    while done < trials_absent:
        b = min(1 << 16, trials_absent - done)
        absent[done:done + b] = metrics(cfg, sampler(stream_rng(base, idx), b))
        done += b
        idx += 1
    present = np.empty(trials_present)
    sampler = present_sampler(dts, params, window)
    done, idx = 0, 0
    base = domain_seed(seed, 102, eb_tag)
    while done < trials_present:
        b = min(1 << 16, trials_present - done)
        present[done:done + b] = metrics(cfg, sampler(stream_rng(base, idx), b))
        done += b
        idx += 1
    return cfg, absent, present


def cmd_roc(args, out_dir: Path, manifest: _Manifest) -> int:
    code = ccsds_short_code()
    _, dts = _resolve_ts(args.ts)
    kinds = args.metrics.split(",")
    ebs = [float(x) for x in args.ebn0.split(",")]
    pfa_grid = [float(x) for x in args.pfa_grid.split(",")]
    rows = [ROC_COLUMNS]
    for eb in ebs:
        params = ChannelParams(eb)
        for kind in kinds:
            cfg, absent, present = _metric_pools(
                kind, dts, params, args.window, args.trials, args.trials,
                args.seed, code)
            for pfa in pfa_grid:
                cal = threshold_from_pool(kind, absent, pfa)
                if kind == "lrt":
                    det = int((present <= cal.threshold).sum())
                else:
                    det = int((present >= cal.threshold).sum())
                p_d = det / len(present)
                lo, hi = wilson_interval(det, len(present))
                flo, fhi = cal.pfa_ci
                rows.append(",".join(map(str, (
                    eb, kind, cal.threshold, cal.achieved_pfa,
                    (fhi - flo) / 2, p_d, (hi - lo) / 2,
                    len(absent), len(present), args.seed))))
    path = out_dir / "roc.csv"
    path.write_text("\n".join(rows) + "\n")
    manifest.add(path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_detect_eval(args, out_dir: Path, manifest: _Manifest) -> int:
    code = ccsds_short_code()
    _, dts = _resolve_ts(args.ts)
    kinds = args.metrics.split(",")
    ebs = [float(x) for x in args.ebn0.split(",")]
    rows = [DETECT_COLUMNS]
    low_confidence = False
    for eb in ebs:
        params = ChannelParams(eb)
        cfg = SimConfig(eb_n0_grid=(eb,), ts=args.ts, mode="lrt",
                        master_seed=args.seed, detector_trials=args.trials,
                        target_pfa=args.pfa, threads=args.threads)
        for kind in kinds:
            det = DetectorConfig.for_word(kind, dts,
                                          noise_variance=params.sigma2,
                                          detection_length=args.window)
            md, fa = estimate_detector_probs(det, dts, params, cfg, code)
            low_confidence |= md.low_confidence or fa.low_confidence
            rows.append(",".join(map(str, (
                eb, kind, args.window, "", fa.estimate,
                (fa.ci[1] - fa.ci[0]) / 2, md.estimate,
                (md.ci[1] - md.ci[0]) / 2, fa.trials, md.trials, args.seed))))
    path = out_dir / "detect_eval.csv"
    path.write_text("\n".join(rows) + "\n")
    manifest.add(path)
    print(f"wrote {path}")
    if args.strict and low_confidence:
        print("low-confidence estimates present", file=sys.stderr)
        return EXIT_LOW_CONFIDENCE
    return EXIT_OK


def cmd_simulate(args, out_dir: Path, manifest: _Manifest) -> int:
    import dataclasses

    if not args.config:
        raise ConfigError("missing config key 'config': simulate needs --config")
    cfg = parse_sim_config(Path(args.config).read_text())
    if args.seed_given:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.threads:
        cfg = dataclasses.replace(cfg, threads=args.threads)
    rows, records = run_campaign(cfg)
    path = out_dir / "campaign.csv"
    write_campaign_csv(rows, path)
    manifest.add(path)
    print(f"wrote {path}")
    low = any(r.low_confidence for r in records.values())
    if args.strict and low:
        print("low-confidence estimates present", file=sys.stderr)
        return EXIT_LOW_CONFIDENCE
    return EXIT_OK


# ----------------------------------------------------------------------
# wiring
# ----------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads (default: all cores)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--strict", action="store_true",
                   help="exit 4 on low-confidence results")
    p.add_argument("--config", default=None, help="config file path")


def _add_code_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", default=CCSDS_SHORT_NAME,
                   help=f"builtin code name (default {CCSDS_SHORT_NAME})")
    p.add_argument("--spec", default=None, help="QC grid spec file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cltukit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("code", help="inspect or dump the code")
    _add_common(p)
    _add_code_source(p)
    p.add_argument("--check", action="store_true")
    p.add_argument("--dump-h", action="store_true")
    p.add_argument("--dump-g", choices=("left", "right"))
    p.add_argument("--encode-left", metavar="HEX")
    p.add_argument("--encode-right", metavar="HEX")
    p.set_defaults(func=cmd_code)

    p = sub.add_parser("enumerate-codewords",
                       help="exhaustive low-weight codeword list")
    _add_common(p)
    _add_code_source(p)
    p.add_argument("--budget", type=int, required=True,
                   help="half-weight budget (list complete to 2*budget)")
    p.add_argument("--op-ceiling", type=float, default=1e10)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("design-ts", help="search for a tail sequence")
    _add_common(p)
    _add_code_source(p)
    p.add_argument("--alg", choices=("alg1", "alg2"), required=True,
                   help="alg1: guaranteed-distance sampling; alg2: local search")
    p.add_argument("--codeword-list", default=None)
    p.add_argument("--w-max", type=int, default=22)
    p.add_argument("--max-attempts", type=int, default=10 ** 6)
    p.add_argument("--iterations", type=int, default=512, help="flip cap")
    p.add_argument("--s-max", type=int, default=64)
    p.add_argument("--report-weight-limit", type=int, default=None,
                   help="truncate the final distance scan (alg1 report)")
    p.set_defaults(func=cmd_design_ts)

    p = sub.add_parser("certify-ts", help="certify a minimum distance")
    _add_common(p)
    _add_code_source(p)
    p.add_argument("sequence", help="128-bit decoder-side hex")
    p.add_argument("--min-distance", type=int, required=True)
    p.add_argument("--op-ceiling", type=float, default=1e10)
    p.set_defaults(func=cmd_certify_ts)

    p = sub.add_parser("transform-ts",
                       help="force the trailing half to a target pattern")
    _add_common(p)
    _add_code_source(p)
    p.add_argument("sequence", help="128-bit decoder-side hex")
    p.add_argument("--target-half", default="alt0",
                   help="alt0, alt1, or 64-bit hex")
    p.set_defaults(func=cmd_transform_ts)

    p = sub.add_parser("roc", help="detector ROC sweep")
    _add_common(p)
    p.add_argument("--ebn0", default="-2,0,2")
    p.add_argument("--metrics", default="hard,soft,lrt")
    p.add_argument("--ts", default="v19star")
    p.add_argument("--window", type=int, default=64)
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--pfa-grid", default="1e-3,3e-3,1e-2,3e-2,1e-1,3e-1")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("detect-eval", help="miss/false-alarm working point")
    _add_common(p)
    p.add_argument("--ebn0", default="-6,-4,-2")
    p.add_argument("--metrics", default="lrt")
    p.add_argument("--ts", default="v19star")
    p.add_argument("--window", type=int, default=128)
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--pfa", type=float, default=1e-5)
    p.set_defaults(func=cmd_detect_eval)

    p = sub.add_parser("simulate", help="full rejection-probability campaign")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.seed_given = "--seed" in (sys.argv[1:] if argv is None else list(argv))
    if args.threads == 0:
        args.threads = os.cpu_count() or 1

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {k: v for k, v in vars(args).items()
              if k not in ("func", "seed_given") and v is not None}
    config["command"] = args.command
    manifest = _Manifest(args.command, config, args.seed, out_dir)

    try:
        rc = args.func(args, out_dir, manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CostCeilingError as exc:
        print(f"cost ceiling: {exc}", file=sys.stderr)
        return EXIT_COST
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest_path = manifest.write(args.command)
    print(f"manifest: {manifest_path}")
    return rc


if __name__ == "__main__":
    sys.exit(main())
