"""Riemannian kernels over the three set descriptors.

Each descriptor lives on a curved manifold; the kernels below are the usual
positive-definite liftings into a Hilbert space:

* log-Euclidean kernel on SPD matrices:  trace(log(C1) @ log(C2))
* projection kernel on subspaces:        ||Y1.T @ Y2||_F^2
* Gaussian-embedding kernel:             log-Euclidean kernel on the
                                         determinant-one embeddings

Gram matrices are assembled from per-descriptor lifted representations (the
matrix log, or the subspace projector), computed once per descriptor. The
per-pair arithmetic is shared between ``gram_matrix`` and
``cross_kernel_vector`` so a probe identical to a gallery member reproduces
the corresponding Gram column bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from .descriptors import DescriptorTriple, GaussianDescriptor, GrassmannPoint
from .errors import DimensionMismatch, NormalizationDegenerate, SetfuseError
from .spd import spd_log

# Gram traces at or below this value cannot be normalized against.
NORMALIZATION_TRACE_FLOOR = 1e-12


class KernelId(IntEnum):
    """Which descriptor a kernel channel reads."""

    LOG_EUCLIDEAN = 1
    PROJECTION = 2
    GAUSSIAN_EMBEDDED = 3


ALL_KERNELS = (KernelId.LOG_EUCLIDEAN, KernelId.PROJECTION, KernelId.GAUSSIAN_EMBEDDED)


def log_euclidean_kernel(c1, c2) -> float:
    """trace(log(C1) @ log(C2)) for SPD matrices of equal size."""
    a1 = np.asarray(c1, dtype=np.float64)
    a2 = np.asarray(c2, dtype=np.float64)
    if a1.shape != a2.shape:
        raise DimensionMismatch(f"SPD shapes differ: {a1.shape} vs {a2.shape}")
    return _pair_value(KernelId.LOG_EUCLIDEAN, spd_log(a1), spd_log(a2))


def projection_kernel(y1: GrassmannPoint, y2: GrassmannPoint) -> float:
    """||Y1.T @ Y2||_F^2 for subspace bases of equal ambient and subspace dim."""
    if y1.dim != y2.dim or y1.subspace_dim != y2.subspace_dim:
        raise DimensionMismatch(
            f"subspace shapes differ: {y1.basis.shape} vs {y2.basis.shape}"
        )
    return float(np.sum((y1.basis.T @ y2.basis) ** 2))


def gaussian_embedding_kernel(g1: GaussianDescriptor, g2: GaussianDescriptor) -> float:
    """Log-Euclidean kernel applied to the two Gaussian embeddings."""
    if g1.dim != g2.dim:
        raise DimensionMismatch(f"Gaussian dims differ: {g1.dim} vs {g2.dim}")
    return log_euclidean_kernel(g1.embedding, g2.embedding)


def _lift(triple: DescriptorTriple, kid: KernelId) -> np.ndarray:
    """Per-descriptor representation in which the kernel is a plain dot product."""
    if kid == KernelId.LOG_EUCLIDEAN:
        return spd_log(triple.cov)
    if kid == KernelId.PROJECTION:
        y = triple.subspace.basis
        return y @ y.T
    if kid == KernelId.GAUSSIAN_EMBEDDED:
        return spd_log(triple.gauss.embedding)
    raise ValueError(f"unknown kernel id {kid!r}")


def _pair_value(kid: KernelId, a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise DimensionMismatch(f"lifted shapes differ: {a.shape} vs {b.shape}")
    # trace(A @ B) for symmetric A, B; elementwise form keeps the arithmetic
    # identical regardless of argument order.
    return float(np.sum(a * b))


def _lift_all(triples: Sequence[DescriptorTriple], kid: KernelId) -> list[np.ndarray]:
    lifted = []
    for i, t in enumerate(triples):
        try:
            lifted.append(_lift(t, kid))
        except SetfuseError as exc:
            raise type(exc)(f"descriptor {i} ({t.set_id!r}): {exc}") from exc
    return lifted


def gram_matrix(
    triples: Sequence[DescriptorTriple], kid: KernelId, normalize: bool = False
) -> np.ndarray:
    """Kernel Gram matrix over a gallery of descriptor triples.

    Only the upper triangle is computed; the lower is mirrored, so the
    result is exactly symmetric. With ``normalize`` the matrix is rescaled
    to trace N (raises ``NormalizationDegenerate`` when the raw trace is
    numerically zero).
    """
    n = len(triples)
    if n < 1:
        raise ValueError("gram_matrix needs at least one descriptor")
    lifted = _lift_all(triples, kid)
    k = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            try:
                v = _pair_value(kid, lifted[i], lifted[j])
            except DimensionMismatch as exc:
                raise DimensionMismatch(f"pair ({i}, {j}): {exc}") from exc
            k[i, j] = v
            k[j, i] = v
    if normalize:
        k = k * gram_normalizer(k)
    return k


def gram_normalizer(k: np.ndarray) -> float:
    """Factor that rescales a Gram matrix to trace N."""
    tr = float(np.trace(k))
    if tr <= NORMALIZATION_TRACE_FLOOR:
        raise NormalizationDegenerate(f"gram trace {tr:.3e} too small to normalize")
    return k.shape[0] / tr


def cross_kernel_vector(
    test: DescriptorTriple,
    gallery: Sequence[DescriptorTriple],
    kid: KernelId,
    normalize_ref: float = 1.0,
) -> np.ndarray:
    """Kernel values between one probe and every gallery member.

    ``normalize_ref`` replays the training-time Gram scaling (1.0 when
    normalization was off) so probe columns stay commensurate with the
    stored Gram matrix.
    """
    if len(gallery) < 1:
        raise ValueError("cross_kernel_vector needs a non-empty gallery")
    lifted_test = _lift(test, kid)
    lifted = _lift_all(gallery, kid)
    out = np.empty(len(gallery), dtype=np.float64)
    for i, lg in enumerate(lifted):
        try:
            out[i] = _pair_value(kid, lifted_test, lg)
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"probe vs gallery {i}: {exc}") from exc
    if normalize_ref != 1.0:
        out = out * normalize_ref
    return out


@dataclass(frozen=True)
class KernelBank:
    """Training-side kernel state: one Gram matrix per enabled kernel.

    ``scales`` records the factor already applied to each Gram matrix
    (1.0 when normalization is off); probes must be scaled by the same
    factor at test time.
    """

    kernel_ids: tuple[KernelId, ...]
    grams: tuple[np.ndarray, ...]
    n_train: int
    normalized: tuple[bool, ...]
    scales: tuple[float, ...]

    def __post_init__(self):
        if not self.kernel_ids:
            raise ValueError("kernel bank needs at least one kernel")
        if not (
            len(self.grams) == len(self.kernel_ids) == len(self.normalized) == len(self.scales)
        ):
            raise ValueError("kernel bank fields disagree on the number of kernels")
        for g in self.grams:
            if g.shape != (self.n_train, self.n_train):
                raise DimensionMismatch(
                    f"gram shape {g.shape} does not match n_train={self.n_train}"
                )

    @property
    def n_kernels(self) -> int:
        return len(self.kernel_ids)


def build_kernel_bank(
    triples: Sequence[DescriptorTriple],
    kernel_ids: Sequence[KernelId] = ALL_KERNELS,
    normalize: bool = False,
) -> KernelBank:
    """Assemble Gram matrices (and their scaling factors) for a gallery."""
    n = len(triples)
    if n < 1:
        raise ValueError("cannot build a kernel bank from an empty gallery")
    grams = []
    scales = []
    for kid in kernel_ids:
        raw = gram_matrix(triples, kid, normalize=False)
        s = gram_normalizer(raw) if normalize else 1.0
        grams.append(raw * s if normalize else raw)
        scales.append(s)
    return KernelBank(
        kernel_ids=tuple(KernelId(k) for k in kernel_ids),
        grams=tuple(grams),
        n_train=n,
        normalized=tuple(bool(normalize) for _ in kernel_ids),
        scales=tuple(float(s) for s in scales),
    )
