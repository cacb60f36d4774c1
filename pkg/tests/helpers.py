"""Shared random generators for the test suite."""

import numpy as np

from setfuse.descriptors import ImageSet
from setfuse.kernels import KernelBank, KernelId


def random_spd(rng, d, eig_low=0.5, eig_high=2.0):
    """Random SPD matrix with eigenvalues drawn uniformly in a safe band."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    vals = rng.uniform(eig_low, eig_high, d)
    m = (q * vals) @ q.T
    return 0.5 * (m + m.T)


def random_orthonormal(rng, d, q):
    mat, _ = np.linalg.qr(rng.standard_normal((d, q)))
    return mat


def random_image_set(rng, d=6, n=12, label="c0", set_id="s0"):
    return ImageSet(features=rng.standard_normal((d, n)), label=label, set_id=set_id)


def random_gallery_sets(rng, n_classes=3, sets_per_class=3, d=6, n=12, shift=3.0):
    """Labeled sets with per-class mean offsets, mildly separable."""
    sets = []
    for c in range(n_classes):
        center = rng.standard_normal(d) * shift
        for s in range(sets_per_class):
            x = center[:, None] + rng.standard_normal((d, n))
            sets.append(ImageSet(features=x, label=f"c{c}", set_id=f"c{c}_s{s}"))
    return sets


def random_bank(rng, n, n_kernels):
    """Kernel bank whose Gram matrices are random symmetric PSD, O(1) entries."""
    grams = []
    for _ in range(n_kernels):
        g = rng.standard_normal((n, n + 2))
        k = g @ g.T / (n + 2)
        grams.append(0.5 * (k + k.T))
    return KernelBank(
        kernel_ids=tuple(KernelId(i + 1) for i in range(n_kernels)),
        grams=tuple(grams),
        n_train=n,
        normalized=(False,) * n_kernels,
        scales=(1.0,) * n_kernels,
    )


def random_simplex_weights(rng, n_kernels, n):
    raw = rng.uniform(0.1, 1.0, (n_kernels, n))
    return raw / raw.sum(axis=0, keepdims=True)


def random_labels(rng, n, n_classes=3):
    labels = np.array([f"c{int(x)}" for x in rng.integers(0, n_classes, n)])
    # guarantee at least two classes
    labels[0] = "c0"
    labels[-1] = "c1"
    return labels


def brute_force_scatters(bank, labels, weights):
    """Quadruple-loop scatter reference: ordered pairs, i == j included."""
    n = bank.n_train
    within = np.zeros((n, n))
    between = np.zeros((n, n))
    n_within = 0
    n_between = 0
    for i in range(n):
        for j in range(n):
            same = labels[i] == labels[j]
            if same:
                n_within += 1
            else:
                n_between += 1
            for k, gram in enumerate(bank.grams):
                diff = gram[:, i] - gram[:, j]
                contrib = weights[k, i] * weights[k, j] * np.outer(diff, diff)
                if same:
                    within += contrib
                else:
                    between += contrib
    return within / n_within, between / n_between
