"""Monte Carlo estimators and the rejection-probability composition.

Seven probabilities feed the transmission-unit rejection bounds:

* P_fa-S / P_md-S: start-marker false alarm and miss;
* P_fa-T / P_md-T: tail-detector false alarm (on noisy codewords) and
  miss (on the noisy tail);
* CER: decoder fails to reproduce a transmitted codeword;
* P_ds-T: decoder converges on a noisy decoder-side tail;
* P_ds-I: decoder converges on the noisy randomized idle block.

Each estimator stops at ``stop_errors`` observed events (or at the trial
budget, flagging the record as low-confidence) and reports a Wilson 95%
interval.  Trials use counter-based substreams, so results do not depend
on the worker count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .channel import ChannelParams, domain_seed, modulate, stream_rng
from .code import LinearCode, ccsds_short_code
from .decoder import MinSumDecoder
from .detect import (DetectorConfig, absent_sampler, calibrate_threshold,
                     metrics, present_sampler, wilson_interval)
from .framing import dts_of, idle_pattern
from .gf2 import BitWord
from .scrambler import keystream

__all__ = [
    "TsEntry",
    "BUILTIN_TS",
    "RejectionInputs",
    "SimConfig",
    "EstimateRecord",
    "estimate_cer",
    "estimate_p_ds",
    "estimate_detector_probs",
    "compose_rejection",
    "run_campaign",
    "campaign_csv_header",
    "parse_sim_config",
]


@dataclass(frozen=True)
class TsEntry:
    """A named tail sequence: the value included at encapsulation and the
    decoder-side word it produces."""

    label: str
    encapsulation: BitWord
    dts: BitWord


def _builtin_ts() -> dict[str, TsEntry]:
    ks = keystream(128)
    idle = idle_pattern(128, 0)

    def entry(label: str, encap_hex: str) -> TsEntry:
        enc = BitWord.from_hex(encap_hex)
        return TsEntry(label, enc, enc ^ ks)

    # The weight-12 guaranteed-distance tail is bound decoder-side (it is
    # designed in decoder coordinates); its encapsulation value is the
    # XOR with the keystream.
    v12_dts = BitWord.from_hex("40002103200000010020000004040009")
    return {
        "ccsds": entry("ccsds", "55555556AAAAAAAA5555555555555555"),
        "v12": TsEntry("v12", v12_dts ^ ks, v12_dts),
        "v18": entry("v18", "00C65E5A68E906F56C892FA1315E08C0"),
        "v19star": entry("v19star", "909CC808C0F62FD539DC7AF4640B5D95"),
        "idle": TsEntry("idle", idle, idle ^ ks),
    }


BUILTIN_TS: dict[str, TsEntry] = _builtin_ts()


@dataclass(frozen=True)
class RejectionInputs:
    p_fa_s: float
    p_md_s: float
    p_fa_t: float
    p_md_t: float
    cer: float
    p_ds_t: float
    p_ds_i: float
    n: int = 40

    def __post_init__(self):
        for name in ("p_fa_s", "p_md_s", "p_fa_t", "p_md_t",
                     "cer", "p_ds_t", "p_ds_i"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.n < 1:
            raise ValueError("n must be >= 1")


_MODES = ("decoder", "lrt", "nots")


def compose_rejection(inputs: RejectionInputs, mode: str) -> float:
    """Upper bound on the rejection probability for one unit.

    ``decoder``: termination by decoding failure alone;
    ``lrt``: a separate tail detector screens each window first, with
    detector and decoder failures taken as independent;
    ``nots``: no tail block, the decoder overruns into the idle pattern.
    All bounds assume the full complement of N codewords.
    """
    i = inputs
    if mode == "decoder":
        inner = 1.0 - (1.0 - i.cer) ** i.n + (1.0 - i.cer) ** i.n * i.p_ds_t
    elif mode == "lrt":
        good = ((1.0 - i.p_fa_t) * (1.0 - i.cer)) ** i.n
        inner = 1.0 - good + good * i.p_ds_t * i.p_md_t
    elif mode == "nots":
        inner = 1.0 - (1.0 - i.cer) ** i.n + (1.0 - i.cer) ** i.n * i.p_ds_i
    else:
        raise ValueError(f"mode must be one of {_MODES}")
    return i.p_fa_s + (1.0 - i.p_fa_s) * (i.p_md_s + (1.0 - i.p_md_s) * inner)


@dataclass(frozen=True)
class EstimateRecord:
    name: str
    estimate: float
    trials: int
    error_events: int
    ci: tuple[float, float]
    runtime: float
    seed: int
    low_confidence: bool = False

    @classmethod
    def from_counts(cls, name: str, events: int, trials: int, runtime: float,
                    seed: int, low_confidence: bool = False) -> "EstimateRecord":
        est = events / trials if trials else 0.0
        return cls(name, est, trials, events, wilson_interval(events, trials),
                   runtime, seed, low_confidence)


@dataclass(frozen=True)
class SimConfig:
    eb_n0_grid: tuple[float, ...] = (5.5, 6.0, 6.5)
    eta: float = 1e-5
    stop_errors: int = 100
    max_trials: int = 1_000_000
    master_seed: int = 0
    ts: str = "v18"                 # builtin label or 32-digit hex
    detector: str = "lrt"
    mode: str = "decoder"           # decoder | lrt | nots
    threads: int = 1
    detector_trials: int = 200_000
    target_pfa: float = 1e-5

    def __post_init__(self):
        if self.stop_errors < 1:
            raise ValueError("stop_errors must be >= 1")
        if not self.eb_n0_grid:
            raise ValueError("empty grid")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")

    def ts_entry(self) -> TsEntry:
        if self.ts in BUILTIN_TS:
            return BUILTIN_TS[self.ts]
        enc = BitWord.from_hex(self.ts, 128)
        return TsEntry(self.ts, enc, dts_of(enc))


_CONFIG_KEYS = {
    "eb_n0_db", "eta", "stop_errors", "max_trials", "master_seed",
    "ts", "detector", "mode", "threads", "detector_trials", "target_pfa",
}
_REQUIRED_KEYS = ("ts", "mode")


class ConfigError(ValueError):
    pass


def parse_sim_config(text: str) -> SimConfig:
    """Parse ``key = value`` lines into a SimConfig.

    Unknown keys and missing required keys raise ConfigError naming the
    key.  ``eb_n0_db`` takes a comma-separated grid.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = val
    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing config key {key!r}")

    kwargs: dict = {"ts": values["ts"], "mode": values["mode"]}
    if "eb_n0_db" in values:
        kwargs["eb_n0_grid"] = tuple(
            float(x) for x in values["eb_n0_db"].split(","))
    for key, conv in (("eta", float), ("stop_errors", int),
                      ("max_trials", int), ("master_seed", int),
                      ("threads", int), ("detector_trials", int),
                      ("target_pfa", float)):
        if key in values:
            kwargs[key] = conv(values[key])
    if "detector" in values:
        kwargs["detector"] = values["detector"]
    return SimConfig(**kwargs)


# ----------------------------------------------------------------------
# decoder-side estimators
# ----------------------------------------------------------------------

_BATCH = 8192

# stream-domain tags for domain_seed
_DOM_CER = 1
_DOM_PDS = 2
_DOM_DET_ABSENT = 3
_DOM_DET_PRESENT = 4


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack (trials, n) bit rows into big-endian (hi, lo) uint64 pairs,
    matching the decoder's hard-word packing."""
    b, n = bits.shape
    hi = np.zeros(b, dtype=np.uint64)
    lo = np.zeros(b, dtype=np.uint64)
    one = np.uint64(1)
    s63 = np.uint64(63)
    for j in range(n):
        hi = (hi << one) | (lo >> s63)
        lo = (lo << one) | bits[:, j].astype(np.uint64)
    return np.stack([hi, lo], axis=1)


def estimate_cer(code: LinearCode, params: ChannelParams, cfg: SimConfig,
                 decoder: Optional[MinSumDecoder] = None,
                 name: str = "cer") -> EstimateRecord:
    """Codeword error rate: random message, encode, AWGN, decode; an
    error is any outcome other than the transmitted codeword (failures
    and undetected wrong-codeword convergences both count)."""
    decoder = decoder or MinSumDecoder(code)
    base = domain_seed(cfg.master_seed, _DOM_CER,
                       int(round(params.eb_n0_db * 1000)))
    t_start = time.time()
    events = 0
    trials = 0
    stream = 0
    while events < cfg.stop_errors and trials < cfg.max_trials:
        b = min(_BATCH, cfg.max_trials - trials)
        rng = stream_rng(base, stream)
        stream += 1
        msgs = rng.integers(0, 2, size=(b, code.k), dtype=np.int8)
        bits = (msgs @ code.forms.g_left.a.astype(np.int32)) % 2
        sym = 1.0 - 2.0 * bits
        recv = sym + rng.standard_normal((b, code.n)) * params.sigma
        llrs = (2.0 / params.sigma2) * recv
        conv, _, words = decoder.decode_batch(llrs, threads=cfg.threads)
        packed = _pack_rows(bits)
        wrong = (words[:, 0] != packed[:, 0]) | (words[:, 1] != packed[:, 1])
        events += int((wrong | (conv == 0)).sum())
        trials += b
    return EstimateRecord.from_counts(
        name, events, trials, time.time() - t_start, cfg.master_seed,
        low_confidence=events < cfg.stop_errors)


def estimate_p_ds(code: LinearCode, dts: BitWord, params: ChannelParams,
                  cfg: SimConfig, decoder: Optional[MinSumDecoder] = None,
                  name: str = "p_ds") -> EstimateRecord:
    """Probability that the decoder converges on a noisy decoder-side
    tail window (any codeword counts as the event)."""
    if dts.length != code.n:
        raise ValueError("tail window length mismatch")
    decoder = decoder or MinSumDecoder(code)
    sym = modulate(dts)
    base = domain_seed(cfg.master_seed, _DOM_PDS,
                       int(round(params.eb_n0_db * 1000)), dts.value & 0xFFFF,
                       dts.value >> 112)
    t_start = time.time()
    events = 0
    trials = 0
    stream = 0
    while events < cfg.stop_errors and trials < cfg.max_trials:
        b = min(_BATCH, cfg.max_trials - trials)
        rng = stream_rng(base, stream)
        stream += 1
        recv = sym[None, :] + rng.standard_normal((b, code.n)) * params.sigma
        llrs = (2.0 / params.sigma2) * recv
        conv, _, _ = decoder.decode_batch(llrs, threads=cfg.threads)
        events += int(conv.sum())
        trials += b
    return EstimateRecord.from_counts(
        name, events, trials, time.time() - t_start, cfg.master_seed,
        low_confidence=events < cfg.stop_errors)


# ----------------------------------------------------------------------
# detector estimators
# ----------------------------------------------------------------------

def estimate_detector_probs(det: DetectorConfig, sequence: BitWord,
                            params: ChannelParams, cfg: SimConfig,
                            code: Optional[LinearCode] = None,
                            absent_model: str = "codeword"):
    """(P_md record, P_fa record) for one detector working point.

    The threshold is calibrated inline when the config carries none:
    absent-hypothesis trials (noisy random codewords for tail detection)
    set the threshold at ``cfg.target_pfa``, and present-hypothesis
    trials on the noisy sequence give the miss probability.
    """
    code = code or ccsds_short_code()
    length = det.detection_length
    eb_tag = int(round(params.eb_n0_db * 1000))
    t_start = time.time()
    if det.threshold is None:
        sampler = absent_sampler(absent_model, params, length, code=code,
                                 idle_pattern=idle_pattern(length))
        cal = calibrate_threshold(
            det, cfg.target_pfa, sampler, cfg.detector_trials,
            domain_seed(cfg.master_seed, _DOM_DET_ABSENT, eb_tag))
        det = replace(det, threshold=cal.threshold)
        fa_record = EstimateRecord(
            "p_fa", cal.achieved_pfa, cal.trials,
            int(round(cal.achieved_pfa * cal.trials)), cal.pfa_ci,
            time.time() - t_start, cfg.master_seed,
            low_confidence=cal.infeasible)
    else:
        fa_record = EstimateRecord("p_fa", 0.0, 0, 0, (0.0, 1.0), 0.0,
                                   cfg.master_seed, low_confidence=True)

    sampler = present_sampler(sequence, params, length)
    misses = 0
    done = 0
    base = domain_seed(cfg.master_seed, _DOM_DET_PRESENT, eb_tag)
    stream = 0
    t_md = time.time()
    while done < cfg.detector_trials:
        b = min(1 << 16, cfg.detector_trials - done)
        rng = stream_rng(base, stream)
        stream += 1
        m = metrics(det, sampler(rng, b))
        if det.kind == "lrt":
            misses += int((m > det.threshold).sum())
        else:
            misses += int((m < det.threshold).sum())
        done += b
    md_record = EstimateRecord.from_counts(
        "p_md", misses, done, time.time() - t_md, cfg.master_seed,
        low_confidence=misses < cfg.stop_errors)
    return md_record, fa_record


# ----------------------------------------------------------------------
# full campaign
# ----------------------------------------------------------------------

CAMPAIGN_COLUMNS = [
    "eb_n0_db", "mode", "ts_label", "p_fa_s", "p_md_s", "p_fa_t", "p_md_t",
    "cer", "p_ds_t", "p_ds_i", "n", "p_tcrej", "ci_low", "ci_high",
    "trials_total", "seed",
]


def campaign_csv_header() -> str:
    return ",".join(CAMPAIGN_COLUMNS)


def run_campaign(cfg: SimConfig, code: Optional[LinearCode] = None,
                 n_codewords: int = 40,
                 start_probs: tuple[float, float] = (0.0, 0.0)):
    """Estimate every component at each grid point and compose the bound.

    Returns (rows, records): ``rows`` are dicts matching
    CAMPAIGN_COLUMNS; ``records`` maps (eb_n0_db, quantity) to the full
    EstimateRecord.  Start-marker probabilities default to 0 (negligible
    at the grid's operating points) and can be supplied explicitly.

    The composed bound is monotone nondecreasing in every component, so
    the reported interval evaluates it at the componentwise Wilson
    bounds.
    """
    code = code or ccsds_short_code()
    decoder = MinSumDecoder(code)
    entry = cfg.ts_entry()
    idle_dts = BUILTIN_TS["idle"].dts
    rows = []
    records: dict[tuple[float, str], EstimateRecord] = {}
    p_fa_s, p_md_s = start_probs
    for eb in cfg.eb_n0_grid:
        params = ChannelParams(eb)
        cer = estimate_cer(code, params, cfg, decoder)
        p_ds_t = estimate_p_ds(code, entry.dts, params, cfg, decoder,
                               name="p_ds_t")
        p_ds_i = estimate_p_ds(code, idle_dts, params, cfg, decoder,
                               name="p_ds_i")
        if cfg.mode == "lrt":
            det = DetectorConfig.for_word(cfg.detector, entry.dts,
                                          noise_variance=params.sigma2)
            p_md_t, p_fa_t = estimate_detector_probs(
                det, entry.dts, params, cfg, code)
        else:
            zero = EstimateRecord("unused", 0.0, 0, 0, (0.0, 0.0), 0.0,
                                  cfg.master_seed)
            p_md_t = replace(zero, name="p_md_t")
            p_fa_t = replace(zero, name="p_fa_t")

        point = RejectionInputs(
            p_fa_s, p_md_s, p_fa_t.estimate, p_md_t.estimate, cer.estimate,
            p_ds_t.estimate, p_ds_i.estimate, n_codewords)
        lo = RejectionInputs(
            p_fa_s, p_md_s, p_fa_t.ci[0], p_md_t.ci[0], cer.ci[0],
            p_ds_t.ci[0], p_ds_i.ci[0], n_codewords)
        hi = RejectionInputs(
            p_fa_s, p_md_s, p_fa_t.ci[1], p_md_t.ci[1], cer.ci[1],
            p_ds_t.ci[1], p_ds_i.ci[1], n_codewords)

        for rec in (cer, p_ds_t, p_ds_i, p_md_t, p_fa_t):
            records[(eb, rec.name)] = rec
        rows.append({
            "eb_n0_db": eb,
            "mode": cfg.mode,
            "ts_label": entry.label,
            "p_fa_s": p_fa_s,
            "p_md_s": p_md_s,
            "p_fa_t": p_fa_t.estimate,
            "p_md_t": p_md_t.estimate,
            "cer": cer.estimate,
            "p_ds_t": p_ds_t.estimate,
            "p_ds_i": p_ds_i.estimate,
            "n": n_codewords,
            "p_tcrej": compose_rejection(point, cfg.mode),
            "ci_low": compose_rejection(lo, cfg.mode),
            "ci_high": compose_rejection(hi, cfg.mode),
            "trials_total": cer.trials + p_ds_t.trials + p_ds_i.trials
            + p_md_t.trials + p_fa_t.trials,
            "seed": cfg.master_seed,
        })
    return rows, records


def write_campaign_csv(rows: list[dict], path: str | Path) -> None:
    lines = [campaign_csv_header()]
    for row in rows:
        lines.append(",".join(_render(row[c]) for c in CAMPAIGN_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def _render(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)
