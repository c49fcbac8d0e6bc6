"""End-to-end autoencoder link model: build, train, checkpoint.

Transmitter: dense(M->M, relu), dense(M->n, linear), l2 power normalization.
Receiver: dense(n->M, relu), dense(M->M, softmax). Training minimizes the
reconstruction loss through an additive-noise channel layer, drawing fresh
noise for every sample presentation.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .channel import awgn, snr_db_to_sigma2
from .codebooks import Codebook, build_gdr
from .errors import (
    CheckpointDimensionError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    ConfigError,
    TrainingDivergedError,
)

CHECKPOINT_MAGIC = "aecomm checkpoint"
CHECKPOINT_VERSION = 1


def theoretical_param_count(M: int, n: int) -> dict:
    """Per-layer and total trainable parameter counts, by the published
    accounting that charges 2n parameters to the normalization layer.

    The l2 normalization actually used has no parameters; the live model
    therefore carries total - 2n trainables (see Autoencoder.num_parameters).
    """
    return {
        "dense": (M + 1) * (M + n),
        "normalization": 2 * n,
        "relu": M * (n + 1),
        "softmax": M * (M + 1),
        "total": (2 * M + 3) * (M + n),
    }


class Autoencoder:
    """Trained (or trainable) transmitter/receiver pair over one codebook."""

    def __init__(self, codebook: Codebook, n: int, tx_layers, rx_layers,
                 training_summary: dict | None = None):
        self.codebook = codebook
        self.n = n
        self.tx_layers = list(tx_layers)
        self.rx_layers = list(rx_layers)
        self.training_summary = training_summary

    @property
    def M(self) -> int:
        return self.codebook.M

    def layers(self) -> list:
        return self.tx_layers + self.rx_layers

    def params(self) -> list[np.ndarray]:
        return nn.network_params(self.layers())

    def num_parameters(self) -> int:
        return sum(layer.param_count() for layer in self.layers())

    def transmit(self, s):
        """Codebook vector(s) -> power-normalized channel symbols."""
        return nn.forward_pass(self.tx_layers, s)

    def receive(self, y):
        """Channel output(s) -> softmax probability vector(s)."""
        return nn.forward_pass(self.rx_layers, y)

    def receiver_preactivation(self, y):
        """Affine part of the receiver relu layer, W_r y + b_r (no clipping)."""
        first = self.rx_layers[0]
        return np.asarray(y) @ first.weights.T + first.bias

    def end_to_end(self, message_ids, sigma2, rng) -> np.ndarray:
        """Transmit message ids through the noisy channel and receive."""
        s = self.codebook.encode(message_ids)
        x = self.transmit(s)
        y = awgn(x, sigma2, rng)
        return self.receive(y)

    def params_checksum(self) -> str:
        digest = hashlib.sha256()
        for p in self.params():
            digest.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
        return digest.hexdigest()


def build_model(codebook: Codebook, n: int, seed=0) -> Autoencoder:
    """Fresh autoencoder with seeded uniform weight initialization."""
    M = codebook.M
    rng = np.random.default_rng(seed)
    tx = [
        nn.glorot_uniform_dense(M, M, "relu", rng),
        nn.glorot_uniform_dense(n, M, "linear", rng),
        nn.PowerNormLayer(n),
    ]
    rx = [
        nn.glorot_uniform_dense(M, n, "relu", rng),
        nn.glorot_uniform_dense(M, M, "softmax", rng),
    ]
    return Autoencoder(codebook, n, tx, rx)


@dataclass
class TrainingConfig:
    """Training hyperparameters; defaults follow the published setup."""

    epochs: int = 150
    batch_size: int = 45
    train_samples: int = 20000
    test_samples: int = 1_000_000
    loss: str = "mse"
    training_snr_db: float | None = None
    training_snr_set_db: tuple | None = None
    seed: int = 0
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        if self.training_snr_db is None and not self.training_snr_set_db:
            raise ConfigError("one of training_snr_db or training_snr_set_db is required")
        if self.training_snr_db is not None and self.training_snr_set_db:
            raise ConfigError("training_snr_db and training_snr_set_db are mutually exclusive")
        if self.training_snr_set_db is not None:
            self.training_snr_set_db = tuple(float(v) for v in self.training_snr_set_db)
        for name in ("epochs", "batch_size", "train_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.loss not in nn.LOSSES:
            raise ConfigError(f"loss must be one of {nn.LOSSES}, got {self.loss!r}")

    def summary(self) -> dict:
        d = {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "train_samples": self.train_samples,
            "loss": self.loss,
            "seed": self.seed,
            "learning_rate": self.learning_rate,
        }
        if self.training_snr_db is not None:
            d["training_snr_db"] = self.training_snr_db
        else:
            d["training_snr_set_db"] = list(self.training_snr_set_db)
        return d


@dataclass
class TrainingTrace:
    """Per-epoch mean loss plus run metadata."""

    epoch_losses: list[float] = field(default_factory=list)
    wall_time_s: float = 0.0
    params_checksum: str = ""

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]

    def convergence_ratio(self) -> float:
        """Final epoch loss over first epoch loss; > 0.5 flags non-convergence."""
        return self.epoch_losses[-1] / self.epoch_losses[0]


def train(model: Autoencoder, config: TrainingConfig) -> TrainingTrace:
    """Train in place; returns the loss trace.

    Each epoch is one pass over train_samples uniformly drawn messages in
    batches of batch_size (the final short batch is kept as-is). Noise is
    drawn per sample at training_snr_db, or at an SNR picked uniformly per
    sample from training_snr_set_db.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    noise_layer = nn.AdditiveOffset(model.n)
    stack = model.tx_layers + [noise_layer] + model.rx_layers
    params = nn.network_params(stack)
    adam = nn.AdamState(params, learning_rate=config.learning_rate,
                        beta1=config.adam_beta1, beta2=config.adam_beta2,
                        epsilon=config.adam_epsilon)
    count = len(model.codebook)
    n = model.n
    if config.training_snr_set_db is not None:
        snr_choices = np.array(config.training_snr_set_db, dtype=np.float64)
    else:
        fixed_sigma = snr_db_to_sigma2(config.training_snr_db)

    trace = TrainingTrace()
    for epoch in range(config.epochs):
        remaining = config.train_samples
        loss_sum = 0.0
        while remaining > 0:
            b = min(config.batch_size, remaining)
            remaining -= b
            ids = rng.integers(0, count, size=b)
            s = model.codebook.entries[ids]
            if config.training_snr_set_db is not None:
                snrs = rng.choice(snr_choices, size=b)
                sigma2 = snr_db_to_sigma2(snrs)[:, None]
            else:
                sigma2 = fixed_sigma
            noise_layer.offset = np.sqrt(sigma2) * rng.standard_normal((b, n))
            loss, grads, _ = nn.backward_pass(stack, s, s, config.loss)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss)
            nn.adam_step(adam, params, nn.flatten_grads(grads))
            loss_sum += loss * b
        trace.epoch_losses.append(loss_sum / config.train_samples)

    trace.wall_time_s = time.perf_counter() - start
    trace.params_checksum = model.params_checksum()
    model.training_summary = config.summary()
    return trace


def _format_floats(row) -> str:
    return " ".join(format(v, ".17g") for v in row)


def save_checkpoint(model: Autoencoder, path) -> None:
    """Write a versioned text checkpoint; reload is bit-exact."""
    cb = model.codebook
    if cb.selection.startswith("subset"):
        raise ConfigError("subset codebooks are runtime state, not checkpointable")
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}"]
    lines.append("[codebook]")
    for key, value in cb.manifest().items():
        lines.append(f"{key} = {value}")
    lines.append("[architecture]")
    lines.append(f"n = {model.n}")
    for layer in model.layers():
        if isinstance(layer, nn.DenseLayer):
            lines.append(f"layer = dense {layer.activation} {layer.out_dim} {layer.in_dim}")
        elif isinstance(layer, nn.PowerNormLayer):
            lines.append(f"layer = power_norm {layer.dim}")
        else:
            raise ConfigError(f"cannot serialize layer type {type(layer).__name__}")
    lines.append(f"tx_layers = {len(model.tx_layers)}")
    lines.append("[training]")
    lines.append("config = " + json.dumps(model.training_summary, sort_keys=True))
    lines.append("[parameters]")
    idx = 0
    for layer in model.layers():
        if not isinstance(layer, nn.DenseLayer):
            continue
        lines.append(f"weights {idx} {layer.out_dim} {layer.in_dim}")
        for row in layer.weights:
            lines.append(_format_floats(row))
        lines.append(f"bias {idx} {layer.out_dim}")
        lines.append(_format_floats(layer.bias))
        idx += 1
    lines.append("[end]")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class _CheckpointReader:
    def __init__(self, lines, path):
        self.lines = lines
        self.pos = 0
        self.path = path
        self.section = "header"

    def next_line(self) -> str:
        if self.pos >= len(self.lines):
            raise CheckpointTruncatedError(
                f"{self.path}: file ends inside section [{self.section}]"
            )
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect_section(self, name: str) -> None:
        line = self.next_line()
        if line != f"[{name}]":
            raise CheckpointTruncatedError(
                f"{self.path}: expected section [{name}], found {line!r}"
            )
        self.section = name

    def key_value(self, key: str) -> str:
        line = self.next_line()
        prefix = f"{key} = "
        if not line.startswith(prefix):
            raise CheckpointTruncatedError(
                f"{self.path}: expected '{key} = ...' in [{self.section}], found {line!r}"
            )
        return line[len(prefix):]


def load_checkpoint(path, expect_M: int | None = None,
                    expect_n: int | None = None) -> Autoencoder:
    """Restore a model; optional expectations guard cross-experiment reuse."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    reader = _CheckpointReader(lines, path)

    header = reader.next_line()
    if not header.startswith(CHECKPOINT_MAGIC):
        raise CheckpointVersionError(f"{path}: not an aecomm checkpoint")
    version = header[len(CHECKPOINT_MAGIC):].strip()
    if version != str(CHECKPOINT_VERSION):
        raise CheckpointVersionError(
            f"{path}: format version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )

    reader.expect_section("codebook")
    M = int(reader.key_value("M"))
    m = int(reader.key_value("m"))
    selection = reader.key_value("selection")
    seed_text = reader.key_value("selection_seed")
    selection_seed = None if seed_text == "None" else int(seed_text)
    bits = int(reader.key_value("bits_per_message"))
    codebook = build_gdr(M, m, selection=selection, selection_seed=selection_seed)
    if codebook.bits_per_message != bits:
        raise CheckpointDimensionError(
            f"{path}: rebuilt codebook has {codebook.bits_per_message} bits/message, "
            f"checkpoint declares {bits}"
        )

    reader.expect_section("architecture")
    n = int(reader.key_value("n"))
    layer_specs = []
    while True:
        line = reader.next_line()
        if line.startswith("tx_layers = "):
            n_tx = int(line.split(" = ")[1])
            break
        if not line.startswith("layer = "):
            raise CheckpointTruncatedError(f"{path}: malformed architecture line {line!r}")
        layer_specs.append(line[len("layer = "):].split())

    reader.expect_section("training")
    training_summary = json.loads(reader.key_value("config"))

    reader.expect_section("parameters")
    layers = []
    dense_idx = 0
    for spec in layer_specs:
        if spec[0] == "power_norm":
            layers.append(nn.PowerNormLayer(int(spec[1])))
            continue
        activation, out_dim, in_dim = spec[1], int(spec[2]), int(spec[3])
        head = reader.next_line().split()
        if head[:2] != ["weights", str(dense_idx)]:
            raise CheckpointTruncatedError(f"{path}: expected weights {dense_idx}, found {head}")
        if [int(head[2]), int(head[3])] != [out_dim, in_dim]:
            raise CheckpointDimensionError(
                f"{path}: weights {dense_idx} declared {head[2]}x{head[3]}, "
                f"architecture says {out_dim}x{in_dim}"
            )
        rows = [reader.next_line().split() for _ in range(out_dim)]
        weights = np.array(rows, dtype=np.float64)
        if weights.shape != (out_dim, in_dim):
            raise CheckpointDimensionError(
                f"{path}: weights {dense_idx} matrix is {weights.shape}, "
                f"expected {(out_dim, in_dim)}"
            )
        head = reader.next_line().split()
        if head[:2] != ["bias", str(dense_idx)]:
            raise CheckpointTruncatedError(f"{path}: expected bias {dense_idx}, found {head}")
        bias = np.array(reader.next_line().split(), dtype=np.float64)
        if bias.shape != (out_dim,):
            raise CheckpointDimensionError(
                f"{path}: bias {dense_idx} has length {bias.shape[0]}, expected {out_dim}"
            )
        layers.append(nn.DenseLayer(weights, bias, activation))
        dense_idx += 1
    if reader.next_line() != "[end]":
        raise CheckpointTruncatedError(f"{path}: missing [end] marker")

    if expect_M is not None and M != expect_M:
        raise CheckpointDimensionError(
            f"{path}: checkpoint has M={M}, experiment expects M={expect_M}"
        )
    if expect_n is not None and n != expect_n:
        raise CheckpointDimensionError(
            f"{path}: checkpoint has n={n}, experiment expects n={expect_n}"
        )
    return Autoencoder(codebook, n, layers[:n_tx], layers[n_tx:],
                       training_summary=training_summary)
