"""Softmax gating over kernel channels.

Each training sample i gets a weight per kernel channel q,

    w[q, i] = softmax_q( coeffs[q] . K_q[:, i] + biases[q] ),

a linear read-out of the sample's Gram column plus a bias, pushed through a
softmax across channels. The gating parameters are learned by gradient
ascent on the same trace-ratio objective the projection is solved for; the
exact gradient expressions live in ``gating_gradients``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonFiniteGradient, ShapeMismatch, SingleClassGallery
from .kernels import KernelBank


@dataclass(frozen=True)
class GatingParams:
    """Per-kernel read-out vectors (``coeffs``, Q x N) and biases (Q,)."""

    coeffs: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        b = np.asarray(self.biases, dtype=np.float64)
        if c.ndim != 2 or b.shape != (c.shape[0],):
            raise ShapeMismatch(
                f"coeffs must be Q x N and biases length Q, got {c.shape} and {b.shape}"
            )
        if not (np.isfinite(c).all() and np.isfinite(b).all()):
            raise NonFinite("gating parameters contain NaN or Inf")
        c = c.copy()
        b = b.copy()
        c.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "biases", b)

    @property
    def n_kernels(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_train(self) -> int:
        return self.coeffs.shape[1]


def init_gating_params(n_kernels: int, n_train: int, rng: np.random.Generator) -> GatingParams:
    """Small random initialization, scaled down with the gallery size."""
    half = 0.01
    coeffs = rng.uniform(-half / n_train, half / n_train, size=(n_kernels, n_train))
    biases = rng.uniform(-half, half, size=n_kernels)
    return GatingParams(coeffs=coeffs, biases=biases)


def _check_bank_params(bank: KernelBank, params: GatingParams) -> None:
    if params.coeffs.shape != (bank.n_kernels, bank.n_train):
        raise ShapeMismatch(
            f"gating params shaped {params.coeffs.shape} do not match bank with "
            f"{bank.n_kernels} kernels and n_train={bank.n_train}"
        )


def gating_scores(bank: KernelBank, params: GatingParams) -> np.ndarray:
    """Pre-softmax scores, one per (kernel, sample)."""
    _check_bank_params(bank, params)
    scores = np.empty((bank.n_kernels, bank.n_train), dtype=np.float64)
    for q, gram in enumerate(bank.grams):
        scores[q] = params.coeffs[q] @ gram + params.biases[q]
    return scores


def softmax_columns(scores: np.ndarray) -> np.ndarray:
    """Columnwise softmax with max subtraction; safe for scores up to ~1e308."""
    shifted = scores - scores.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def gating_weights(bank: KernelBank, params: GatingParams) -> np.ndarray:
    """Per-sample kernel weights, Q x N, columns summing to one."""
    return softmax_columns(gating_scores(bank, params))


def _pair_masks(labels) -> tuple[np.ndarray, np.ndarray]:
    codes = np.asarray(labels)
    if codes.ndim != 1:
        raise ShapeMismatch(f"labels must be one-dimensional, got shape {codes.shape}")
    same = codes[:, None] == codes[None, :]
    return same.astype(np.float64), (~same).astype(np.float64)


def pair_counts(labels) -> tuple[int, int]:
    """Ordered pair counts (within-class including i == j, between-class)."""
    same, diff = _pair_masks(labels)
    return int(same.sum()), int(diff.sum())


def gating_gradients(
    bank: KernelBank,
    params: GatingParams,
    transform: np.ndarray,
    labels,
    counts: tuple[int, int],
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of the trace-ratio objective w.r.t. the gating params.

    With H_w and H_b the projected within/between scatter traces, the
    objective is J = H_b / (H_w + H_b) and the gradient follows from the
    quotient rule plus the softmax derivative. Both H terms are accumulated
    from per-pair projected squared distances, so this function never forms
    the N x N scatter matrices.

    ``transform`` is the current projection (N x target_dim, held fixed),
    ``counts`` the ordered within/between pair counts used to normalize the
    scatters. Returns ``(coeff_grads, bias_grads)`` shaped like the params.
    """
    _check_bank_params(bank, params)
    e = np.asarray(transform, dtype=np.float64)
    n = bank.n_train
    if e.ndim != 2 or e.shape[0] != n:
        raise ShapeMismatch(f"transform must be {n} x d, got {e.shape}")
    if len(labels) != n:
        raise ShapeMismatch(f"{len(labels)} labels for n_train={n}")
    n_within, n_between = counts
    if n_between <= 0:
        raise SingleClassGallery("no between-class pairs; gradients undefined")
    if n_within <= 0:
        raise ShapeMismatch(f"within-pair count must be positive, got {n_within}")

    weights = gating_weights(bank, params)
    same, diff = _pair_masks(labels)

    n_kernels = bank.n_kernels
    # Per-kernel matrix of projected squared distances between Gram columns:
    # dist2[k][i, j] = || E.T @ (K_k[:, i] - K_k[:, j]) ||^2.
    dist2 = []
    for gram in bank.grams:
        g = e.T @ gram
        sq = np.einsum("di,di->i", g, g)
        a = sq[:, None] + sq[None, :] - 2.0 * (g.T @ g)
        dist2.append(a)

    h_w = 0.0
    h_b = 0.0
    row_w = []
    col_w = []
    row_b = []
    col_b = []
    for k in range(n_kernels):
        pairw = (weights[k][:, None] * weights[k][None, :]) * dist2[k]
        mw = pairw * same
        mb = pairw * diff
        h_w += float(mw.sum())
        h_b += float(mb.sum())
        row_w.append(mw.sum(axis=1))
        col_w.append(mw.sum(axis=0))
        row_b.append(mb.sum(axis=1))
        col_b.append(mb.sum(axis=0))
    h_w /= n_within
    h_b /= n_between

    coeff_grads = np.zeros_like(params.coeffs)
    bias_grads = np.zeros_like(params.biases)
    denom = (h_w + h_b) ** 2
    if denom <= 0.0:
        # both scatters project to nothing; the objective is flat
        return coeff_grads, bias_grads

    for q in range(n_kernels):
        gram_q = bank.grams[q]
        dh_w_dc = np.zeros(n, dtype=np.float64)
        dh_b_dc = np.zeros(n, dtype=np.float64)
        dh_w_db = 0.0
        dh_b_db = 0.0
        for k in range(n_kernels):
            # derivative of softmax: d w[k,i] / d score[q,i] = w[k,i] * (1{q==k} - w[q,i])
            f = (1.0 if q == k else 0.0) - weights[q]
            dh_w_dc += gram_q @ (f * row_w[k]) + gram_q @ (f * col_w[k])
            dh_b_dc += gram_q @ (f * row_b[k]) + gram_q @ (f * col_b[k])
            dh_w_db += float(f @ row_w[k]) + float(f @ col_w[k])
            dh_b_db += float(f @ row_b[k]) + float(f @ col_b[k])
        dh_w_dc /= n_within
        dh_b_dc /= n_between
        dh_w_db /= n_within
        dh_b_db /= n_between
        coeff_grads[q] = (dh_b_dc * h_w - dh_w_dc * h_b) / denom
        bias_grads[q] = (dh_b_db * h_w - dh_w_db * h_b) / denom
    return coeff_grads, bias_grads


def gradient_ascent_step(
    params: GatingParams,
    grads: tuple[np.ndarray, np.ndarray],
    learning_rate: float,
) -> GatingParams:
    """One gradient-ascent step; pure (returns new params, inputs untouched)."""
    if learning_rate < 0.0:
        raise ValueError(f"learning_rate must be >= 0, got {learning_rate}")
    coeff_grads, bias_grads = grads
    if coeff_grads.shape != params.coeffs.shape or bias_grads.shape != params.biases.shape:
        raise ShapeMismatch("gradient shapes do not match parameter shapes")
    if not (np.isfinite(coeff_grads).all() and np.isfinite(bias_grads).all()):
        raise NonFiniteGradient("gradient contains NaN or Inf")
    return GatingParams(
        coeffs=params.coeffs + learning_rate * coeff_grads,
        biases=params.biases + learning_rate * bias_grads,
    )
