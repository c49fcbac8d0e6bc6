"""Link-level simulator for autoencoder-based transmission over AWGN.

A small numpy-backed neural network models the transmitter and receiver,
message representations range from one-hot to m-of-M codebooks, and the
surrounding harness covers adaptive subset selection, a classical
Hamming(7,4)/BPSK baseline, softmax-linearization analysis, and seeded
Monte Carlo sweeps with CSV output.
"""

from .adaptive import (AdaptiveState, probe_mses, run_adaptive,
                       run_adaptive_gdr, select_vectors, selected_codebook)
from .analysis import (LinearizedReceiver, achievable_rate, build_F,
                       mse_decomposition, relu_activation_report)
from .channel import (ChannelSpec, awgn, sigma2_from_ebn0, sigma2_to_snr_db,
                      snr_db_to_sigma2, spawn_rng)
from .codebooks import (Codebook, build_gdr, build_onehot, data_rate,
                        decode_batch, decode_top_m, gray_bit_errors,
                        gray_bits, subset_codebook)
from .errors import (CheckpointDimensionError, CheckpointError,
                     CheckpointTruncatedError, CheckpointVersionError,
                     ConfigError, DegenerateInputError, DomainError,
                     ShapeError, SingularityError, TrainingDivergedError,
                     UnknownRecipeError)
from .hamming import (bpsk_demod_hard, bpsk_modulate, hamming_decode_hd,
                      hamming_decode_ml, hamming_encode)
from .metrics import MetricRecord, estimate_bler, wald_ci95, write_csv
from .model import (Autoencoder, TrainingConfig, TrainingTrace, build_model,
                    load_checkpoint, save_checkpoint, theoretical_param_count,
                    train)
from .nn import power_normalize, softmax

__version__ = "0.1.0"

__all__ = [
    "AdaptiveState", "probe_mses", "run_adaptive", "run_adaptive_gdr",
    "select_vectors", "selected_codebook",
    "LinearizedReceiver", "achievable_rate", "build_F", "mse_decomposition",
    "relu_activation_report",
    "ChannelSpec", "awgn", "sigma2_from_ebn0", "sigma2_to_snr_db",
    "snr_db_to_sigma2", "spawn_rng",
    "Codebook", "build_gdr", "build_onehot", "data_rate", "decode_batch",
    "decode_top_m", "gray_bit_errors", "gray_bits", "subset_codebook",
    "CheckpointDimensionError", "CheckpointError", "CheckpointTruncatedError",
    "CheckpointVersionError", "ConfigError", "DegenerateInputError",
    "DomainError", "ShapeError", "SingularityError", "TrainingDivergedError",
    "UnknownRecipeError",
    "bpsk_demod_hard", "bpsk_modulate", "hamming_decode_hd",
    "hamming_decode_ml", "hamming_encode",
    "MetricRecord", "estimate_bler", "wald_ci95", "write_csv",
    "Autoencoder", "TrainingConfig", "TrainingTrace", "build_model",
    "load_checkpoint", "save_checkpoint", "theoretical_param_count", "train",
    "power_normalize", "softmax",
]
