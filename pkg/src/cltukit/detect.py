"""Sequence-presence detectors and threshold calibration.

Three metrics over a window of received symbols r against a known +-1
reference v:

* hard correlation   |sum sgn(r_i) v_i|          (present: large)
* soft correlation   |sum r_i v_i|               (present: large)
* LRT                sum ln(1 + exp(-2 v_i r_i / sigma^2))
                                                  (present: small)

sgn(0) counts as +1.  Thresholds come from the empirical quantile of the
metric under the absent hypothesis at a target false-alarm probability,
using midpoint interpolation between order statistics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .channel import ChannelParams, modulate, stream_rng
from .code import LinearCode
from .gf2 import BitWord

__all__ = [
    "DetectorConfig",
    "CalibrationResult",
    "metric",
    "metrics",
    "decide",
    "calibrate_threshold",
    "scan_start",
    "absent_sampler",
    "present_sampler",
    "wilson_interval",
]

_KINDS = ("hard", "soft", "lrt")


@dataclass(frozen=True)
class DetectorConfig:
    kind: str
    reference: np.ndarray  # +-1 symbols of the sought pattern
    noise_variance: Optional[float] = None  # required for lrt
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        ref = np.asarray(self.reference, dtype=np.float64)
        if not np.all(np.abs(ref) == 1.0):
            raise ValueError("reference must be +-1 symbols")
        object.__setattr__(self, "reference", ref)
        if self.kind == "lrt":
            if self.noise_variance is None or self.noise_variance <= 0:
                raise ValueError("lrt requires noise_variance > 0")

    @property
    def detection_length(self) -> int:
        return self.reference.shape[0]

    @classmethod
    def for_word(cls, kind: str, word: BitWord,
                 noise_variance: Optional[float] = None,
                 threshold: Optional[float] = None,
                 detection_length: Optional[int] = None) -> "DetectorConfig":
        """Build a config from a bit pattern; ``detection_length`` keeps
        only the first that many symbols of the reference."""
        ref = modulate(word)
        if detection_length is not None:
            ref = ref[:detection_length]
        return cls(kind, ref, noise_variance, threshold)


def metrics(cfg: DetectorConfig, received: np.ndarray) -> np.ndarray:
    """Metric for each row of ``received`` (shape: trials x N)."""
    r = np.atleast_2d(np.asarray(received, dtype=np.float64))
    if r.shape[1] != cfg.detection_length:
        raise ValueError("received length != detection length")
    v = cfg.reference
    if cfg.kind == "hard":
        s = np.where(r >= 0, 1.0, -1.0)
        return np.abs(s @ v)
    if cfg.kind == "soft":
        return np.abs(r @ v)
    x = (-2.0 / cfg.noise_variance) * (r * v)
    return np.logaddexp(0.0, x).sum(axis=1)


def metric(cfg: DetectorConfig, received: np.ndarray) -> float:
    return float(metrics(cfg, received)[0])


def decide(cfg: DetectorConfig, received: np.ndarray) -> bool:
    """Presence decision; LRT declares present below the threshold."""
    if cfg.threshold is None:
        raise ValueError("detector has no calibrated threshold")
    m = metric(cfg, received)
    if cfg.kind == "lrt":
        return m <= cfg.threshold
    return m >= cfg.threshold


def wilson_interval(events: int, trials: int, z: float = 1.959964):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    p = events / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    hw = (z / denom) * np.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return (max(0.0, center - hw), min(1.0, center + hw))


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    achieved_pfa: float
    pfa_ci: tuple[float, float]
    trials: int
    infeasible: bool  # target not resolvable at this trial count


def threshold_from_pool(kind: str, pool: np.ndarray,
                        target_pfa: float) -> CalibrationResult:
    """Threshold from a pool of absent-hypothesis metrics.

    Midpoint interpolation between the order statistics bracketing the
    target quantile.  When those statistics are tied (discrete metrics),
    the threshold moves to the midpoint with the nearest distinct value
    on the safe side, so the achieved false-alarm rate never exceeds the
    target.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}")
    pool = np.sort(np.asarray(pool, dtype=np.float64))
    t = pool.shape[0]
    c = int(np.floor(target_pfa * t))
    infeasible = c < 1
    if kind == "lrt":
        # present side is the low side: need #{x <= thr} <= c
        if c < 1 or c >= t:
            thr = pool[0] - 1.0 if c < 1 else pool[-1] + 1.0
        elif pool[c] > pool[c - 1]:
            thr = 0.5 * (pool[c - 1] + pool[c])
        else:
            i = int(np.searchsorted(pool, pool[c - 1], side="left"))
            thr = pool[0] - 1.0 if i == 0 else 0.5 * (pool[i - 1] + pool[i])
        fa = int(np.searchsorted(pool, thr, side="right"))
    else:
        # present side is the high side: need #{x >= thr} <= c
        if c < 1 or c >= t:
            thr = pool[-1] + 1.0 if c < 1 else pool[0] - 1.0
        elif pool[t - c] > pool[t - c - 1]:
            thr = 0.5 * (pool[t - c - 1] + pool[t - c])
        else:
            j = int(np.searchsorted(pool, pool[t - c], side="right"))
            thr = pool[-1] + 1.0 if j >= t else 0.5 * (pool[j - 1] + pool[j])
        fa = t - int(np.searchsorted(pool, thr, side="left"))
    return CalibrationResult(float(thr), fa / t, wilson_interval(fa, t),
                             t, infeasible)


def absent_sampler(model: str, params: ChannelParams, length: int,
                   code: Optional[LinearCode] = None,
                   idle_pattern: Optional[BitWord] = None) -> Callable:
    """Batch sampler for the absent hypothesis.

    ``codeword``: noisy random codewords (tail-detector false alarm);
    ``idle``: the noisy idle pattern (start-detector false alarm);
    ``noise``: zero-mean AWGN only.
    Returns sample(rng, batch) -> (batch, length) float array.
    """
    if model == "codeword":
        if code is None:
            raise ValueError("codeword model needs a code")
        if length > code.n:
            raise ValueError("window longer than a codeword")
        gl = code.forms.g_left.a.astype(np.float64)

        def sample(rng, batch):
            msgs = rng.integers(0, 2, size=(batch, code.k))
            bits = (msgs @ gl) % 2
            sym = 1.0 - 2.0 * bits[:, :length]
            return sym + rng.standard_normal((batch, length)) * params.sigma
        return sample

    if model == "idle":
        if idle_pattern is None:
            raise ValueError("idle model needs the idle pattern")
        sym = modulate(idle_pattern)[:length]

        def sample(rng, batch):
            return sym[None, :] + rng.standard_normal((batch, length)) * params.sigma
        return sample

    if model == "noise":
        def sample(rng, batch):
            return rng.standard_normal((batch, length)) * params.sigma
        return sample

    raise ValueError(f"unknown absent model {model!r}")


def present_sampler(word_or_ref, params: ChannelParams,
                    length: Optional[int] = None) -> Callable:
    """Batch sampler for the present hypothesis (the sought pattern plus
    noise)."""
    ref = modulate(word_or_ref) if isinstance(word_or_ref, BitWord) \
        else np.asarray(word_or_ref, dtype=np.float64)
    if length is not None:
        ref = ref[:length]

    def sample(rng, batch):
        return ref[None, :] + rng.standard_normal((batch, ref.shape[0])) * params.sigma
    return sample


def calibrate_threshold(cfg: DetectorConfig, target_pfa: float,
                        noise_model: Callable, trials: int, seed: int,
                        batch: int = 1 << 16) -> CalibrationResult:
    """Monte Carlo threshold calibration at a target false-alarm rate.

    ``noise_model`` is a batch sampler as returned by ``absent_sampler``.
    A warning is emitted when trials < 10 / target_pfa.
    """
    if trials < 10 / target_pfa:
        warnings.warn(
            f"{trials} absent trials is low for target P_fa {target_pfa:g}; "
            "recommend at least 10/target", stacklevel=2)
    pool = np.empty(trials, dtype=np.float64)
    done = 0
    idx = 0
    while done < trials:
        b = min(batch, trials - done)
        rng = stream_rng(seed, idx)
        recv = noise_model(rng, b)
        pool[done:done + b] = metrics(cfg, recv)
        done += b
        idx += 1
    return threshold_from_pool(cfg.kind, pool, target_pfa)


def scan_start(received: np.ndarray, cfg: DetectorConfig) -> list[int]:
    """Sliding symbol-wise scan; returns offsets declared present."""
    r = np.asarray(received, dtype=np.float64)
    n = cfg.detection_length
    if r.shape[0] < n:
        return []
    windows = np.lib.stride_tricks.sliding_window_view(r, n)
    m = metrics(cfg, windows)
    if cfg.threshold is None:
        raise ValueError("detector has no calibrated threshold")
    if cfg.kind == "lrt":
        hits = np.flatnonzero(m <= cfg.threshold)
    else:
        hits = np.flatnonzero(m >= cfg.threshold)
    return [int(h) for h in hits]
