"""Analytical tools: softmax linearization, MSE decomposition, channel capacity.

The receiver analysis models the decoder as a softmax applied to the relu
layer's affine response u = W_r y + b_r, linearized as p ~= F u with F
diagonal. That approximation only holds where every relu unit is active,
so the decomposition restricts itself to those blocks and reports how many
were excluded.
"""

from __future__ import annotations

from math import comb, log2

import numpy as np

from .codebooks import Codebook
from .errors import DomainError, SingularityError
from .nn import softmax

DEFAULT_TAYLOR_ORDER = 20
DEFAULT_U_MIN = 1e-3


class LinearizedReceiver:
    """Diagonal linear stand-in for the softmax, built at a reference point."""

    def __init__(self, f_diag: np.ndarray, taylor_order: int, u: np.ndarray):
        self.f_diag = f_diag
        self.taylor_order = taylor_order
        self.u = u
        self.all_active = bool(np.all(u > 0))

    @property
    def F(self) -> np.ndarray:
        return np.diag(self.f_diag)

    @property
    def F_plus(self) -> np.ndarray:
        if not self.all_active:
            raise DomainError("reference activation has non-positive entries; "
                              "the all-active form does not apply")
        return self.F

    def predict(self, u) -> np.ndarray:
        """Approximate softmax output, F u."""
        return np.asarray(u, dtype=np.float64) * self.f_diag


def _series(u: np.ndarray, order: int) -> np.ndarray:
    # 1/u + 1 + u/2! + ... + u^(order-1)/order!
    total = 1.0 / u + 1.0
    term = np.ones_like(u)
    for j in range(2, order + 1):
        term = term * u / j
        total = total + term
    return total


def build_F(u, taylor_order: int = DEFAULT_TAYLOR_ORDER,
            u_min: float = DEFAULT_U_MIN) -> LinearizedReceiver:
    """Diagonal linearization of the softmax at reference activation u.

    f_ii = (1/sum_k e^{u_k}) (1/u_i + 1 + u_i/2! + ... + u_i^(order-1)/order!).
    Entries with |u_i| below u_min would put the 1/u_i term out of control,
    so they are rejected.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise DomainError(f"reference activation must be 1-D, got ndim={u.ndim}")
    if taylor_order < 1:
        raise DomainError(f"taylor order must be >= 1, got {taylor_order}")
    small = np.nonzero(np.abs(u) < u_min)[0]
    if small.size:
        i = int(small[0])
        raise SingularityError(i, float(u[i]), u_min)
    f_diag = _series(u, taylor_order) / np.sum(np.exp(u))
    return LinearizedReceiver(f_diag, taylor_order, u)


def achievable_rate(M: int, m: int, n: int, ebn0_db) -> np.ndarray:
    """Capacity log2(1 + 2 (Eb/N0) floor(log2 C(M,m)) / n) in bits/s/Hz."""
    if m < 1 or m > M // 2:
        raise DomainError(f"order m={m} outside [1, {M // 2}] for M={M}")
    bits = int(log2(comb(M, m)))
    ebn0 = 10.0 ** (np.asarray(ebn0_db, dtype=np.float64) / 10.0)
    return np.log2(1.0 + 2.0 * ebn0 * bits / n)


def relu_activation_report(model, codebook: Codebook | None, sigma2: float,
                           samples: int, rng) -> float:
    """Fraction of received blocks whose relu units are all strictly active.

    Quantifies how often the all-active linearization case applies. With
    sigma2 = 0 the channel is deterministic, so the exact per-entry fraction
    is returned instead of a Monte Carlo estimate.
    """
    if codebook is None:
        codebook = model.codebook
    x = model.transmit(codebook.entries)
    if sigma2 == 0:
        u = model.receiver_preactivation(x)
        return float(np.mean(np.all(u > 0, axis=1)))
    active = 0
    done = 0
    while done < samples:
        b = min(samples - done, 1 << 16)
        done += b
        ids = rng.integers(0, len(codebook), size=b)
        y = x[ids] + np.sqrt(sigma2) * rng.standard_normal((b, x.shape[1]))
        u = model.receiver_preactivation(y)
        active += int(np.all(u > 0, axis=1).sum())
    return active / samples


def mse_decomposition(model, codebook: Codebook | None, sigma2: float,
                      samples: int, rng,
                      taylor_order: int = DEFAULT_TAYLOR_ORDER,
                      u_min: float = DEFAULT_U_MIN) -> dict:
    """Split the linearized reconstruction MSE into signal and noise terms.

    Per codebook entry, F is built at the noiseless activation u = W_r x + b_r
    and contributes ||F u - s||^2 plus the noise term ||F W_r||_F^2 sigma2
    (Frobenius, since E||F W_r n||^2 = sigma2 ||F W_r||_F^2 for white noise).
    Entries whose noiseless activation has a component below u_min cannot be
    linearized and are excluded and reported.

    The simulated reference is the Monte Carlo MSE of the same receiver path,
    softmax(W_r y + b_r), restricted to blocks where all relu units stay
    active; active_fraction reports how selective that restriction was.
    """
    if codebook is None:
        codebook = model.codebook
    first = model.rx_layers[0]
    W_r, b_r = first.weights, first.bias
    x = model.transmit(codebook.entries)
    u0 = x @ W_r.T + b_r
    ok = np.all(np.abs(u0) >= u_min, axis=1) & np.all(u0 > 0, axis=1)
    included = np.nonzero(ok)[0]
    excluded = np.nonzero(~ok)[0]
    if included.size == 0:
        raise DomainError("no codebook entry keeps every relu unit active; "
                          "the all-active decomposition does not apply")

    row_norms2 = np.sum(W_r ** 2, axis=1)
    signal_terms = np.empty(included.size)
    noise_terms = np.empty(included.size)
    for k, i in enumerate(included):
        f = _series(u0[i], taylor_order) / np.sum(np.exp(u0[i]))
        signal_terms[k] = np.sum((f * u0[i] - codebook.entries[i]) ** 2)
        noise_terms[k] = np.sum(f ** 2 * row_norms2) * sigma2
    signal_term = float(np.mean(signal_terms))
    noise_term = float(np.mean(noise_terms))

    sim_sum = 0.0
    sim_blocks = 0
    done = 0
    while done < samples:
        b = min(samples - done, 1 << 16)
        done += b
        ids = included[rng.integers(0, included.size, size=b)]
        y = x[ids] + np.sqrt(sigma2) * rng.standard_normal((b, x.shape[1]))
        u = y @ W_r.T + b_r
        active = np.all(u > 0, axis=1)
        if np.any(active):
            p = softmax(u[active])
            sim_sum += float(np.sum((p - codebook.entries[ids[active]]) ** 2))
            sim_blocks += int(active.sum())
    return {
        "sigma2": float(sigma2),
        "signal_term": signal_term,
        "noise_term": noise_term,
        "predicted_total": signal_term + noise_term,
        "simulated_mse": sim_sum / sim_blocks if sim_blocks else float("nan"),
        "active_fraction": sim_blocks / samples,
        "excluded_entries": tuple(int(i) for i in excluded),
    }
