"""cltukit: link-layer toolkit for short-block LDPC telecommand framing.

Builds the standardized short (128, 64) uplink code, designs and
certifies tail sequences that force decoder failure, and estimates the
detection and rejection probabilities of the resulting link under
decoder-based, correlator, and LRT termination strategies.
"""

__version__ = "0.1.0"

from .gf2 import (BinaryMatrix, BitWord, QcSpec, QcToken, SystematicForms,
                  expand_qc, hamming_distance, overlap, systematic_forms,
                  weight)
from .code import LinearCode, ccsds_short_code, ccsds_short_spec
from .scrambler import keystream, randomize, derandomize_soft
from .decoder import DecodeOutcome, MinSumDecoder
from .framing import (CltuConfig, SymbolStream, dts_of, encapsulate,
                      idle_pattern, tail_windows)
from .tsdesign import (CodewordList, DistanceReport, SearchParams,
                       brute_force_nearest, certify_min_distance,
                       enumerate_low_weight, guaranteed_search, local_search,
                       ncs, transform_for_lrt)
from .channel import ChannelParams, llr, modulate, transmit
from .detect import DetectorConfig, calibrate_threshold, decide, metric, scan_start
from .experiments import (BUILTIN_TS, EstimateRecord, RejectionInputs,
                          SimConfig, compose_rejection, estimate_cer,
                          estimate_detector_probs, estimate_p_ds, run_campaign)
