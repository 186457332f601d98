"""Braided convolutional codes: BP thresholds by Monte-Carlo density
evolution, analytic Eb/N0 prediction, and sliding-window BER simulation."""

from .bcjr import bcjr_extrinsic, bcjr_extrinsic_batch
from .channel import (
    ChannelParam,
    capacity_biawgn,
    channel_llrs,
    ebno_db,
    entropy_h,
    invert_capacity,
    shannon_limit_db,
    sigma_from_ebno,
)
from .density import MessageDensity
from .ensemble import (
    BccSpec,
    CodedChain,
    EnsembleGraph,
    PunctureSpec,
    alpha_for_rate,
    apply_puncture,
    build_graph,
    build_permutors,
    effective_rate,
    encode_chain,
)
from .errors import (
    BccdeError,
    BracketError,
    BudgetError,
    ConfigError,
    DecodeContradictionError,
    LlrContradictionError,
)
from .mcde import DeConfig, DeResult, ThresholdResult, de_run, threshold_search
from .predictor import (
    MixedPrediction,
    PredictionRow,
    PredictorInput,
    ecp,
    predict_awgn_theta,
    predict_bec_punctured,
    predict_mixed,
    theta_e,
    theta_g,
)
from .simulate import (
    BerPoint,
    WindowConfig,
    decode_full,
    decode_window,
    run_ber_sweep,
    transmit,
)
from .trellis import DEFAULT_COMPONENT, GeneratorConfig, Trellis, build_trellis, encode_block

__version__ = "0.1.0"

__all__ = [
    "BccSpec",
    "BccdeError",
    "BerPoint",
    "BracketError",
    "BudgetError",
    "ChannelParam",
    "CodedChain",
    "ConfigError",
    "DeConfig",
    "DeResult",
    "DecodeContradictionError",
    "DEFAULT_COMPONENT",
    "EnsembleGraph",
    "GeneratorConfig",
    "LlrContradictionError",
    "MessageDensity",
    "MixedPrediction",
    "PredictionRow",
    "PredictorInput",
    "PunctureSpec",
    "ThresholdResult",
    "Trellis",
    "WindowConfig",
    "alpha_for_rate",
    "apply_puncture",
    "bcjr_extrinsic",
    "bcjr_extrinsic_batch",
    "build_graph",
    "build_permutors",
    "build_trellis",
    "capacity_biawgn",
    "channel_llrs",
    "de_run",
    "decode_full",
    "decode_window",
    "ebno_db",
    "ecp",
    "effective_rate",
    "encode_block",
    "encode_chain",
    "entropy_h",
    "invert_capacity",
    "predict_awgn_theta",
    "predict_bec_punctured",
    "predict_mixed",
    "run_ber_sweep",
    "shannon_limit_db",
    "sigma_from_ebno",
    "theta_e",
    "theta_g",
    "threshold_search",
    "transmit",
]
