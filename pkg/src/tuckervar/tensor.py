"""Dense 3-way tensor algebra: matricization, mode products, Tucker reconstruction.

All tensors are plain ``numpy.ndarray`` objects with ``ndim == 3``. Matricization
follows the standard unfolding convention in which the remaining indices cycle
with the lower-numbered mode varying fastest, so that for a Tucker triple
``B_(1) = beta1 @ G_(1) @ kron(beta3, beta2).T`` holds as written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_tensor3(values, dims=None) -> np.ndarray:
    """Coerce ``values`` to a dense 3-way float array, validating its shape."""
    arr = np.asarray(values, dtype=float)
    if dims is not None:
        arr = arr.reshape(dims, order="F")
    if arr.ndim != 3:
        raise ValueError(f"expected a 3-way tensor, got ndim={arr.ndim}")
    if any(d <= 0 for d in arr.shape):
        raise ValueError(f"tensor dimensions must be positive, got {arr.shape}")
    return arr


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    return mode - 1


def mode_n_matricize(t: np.ndarray, mode: int) -> np.ndarray:
    """Unfold a 3-way tensor into its mode-``mode`` matricization.

    Returns the ``I_n x (prod of remaining dims)`` matrix whose columns are the
    mode-n fibers; remaining indices vary with the lower-numbered mode fastest.
    """
    t = as_tensor3(t)
    ax = _check_mode(mode)
    return np.moveaxis(t, ax, 0).reshape(t.shape[ax], -1, order="F")


def mode_n_unmatricize(m: np.ndarray, dims: tuple[int, int, int], mode: int) -> np.ndarray:
    """Inverse of :func:`mode_n_matricize` for a tensor of shape ``dims``."""
    ax = _check_mode(mode)
    rest = tuple(d for i, d in enumerate(dims) if i != ax)
    m = np.asarray(m, dtype=float)
    if m.shape != (dims[ax], int(np.prod(rest))):
        raise ValueError(f"matrix shape {m.shape} incompatible with dims {dims} at mode {mode}")
    return np.moveaxis(m.reshape((dims[ax],) + rest, order="F"), 0, ax)


def mode_n_product(t: np.ndarray, m: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n product of a 3-way tensor with a matrix of shape ``(J, I_n)``."""
    t = as_tensor3(t)
    ax = _check_mode(mode)
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[1] != t.shape[ax]:
        raise ValueError(
            f"matrix shape {m.shape} does not match tensor dim {t.shape[ax]} at mode {mode}"
        )
    return np.moveaxis(np.tensordot(m, t, axes=(1, ax)), 0, ax)


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def outer3(u, v, w) -> np.ndarray:
    """Outer product of three vectors: entry ``(i, j, k) = u_i * v_j * w_k``."""
    u, v, w = (np.asarray(x, dtype=float).reshape(-1) for x in (u, v, w))
    if u.size == 0 or v.size == 0 or w.size == 0:
        raise ValueError("outer3 requires nonempty vectors")
    return np.einsum("i,j,k->ijk", u, v, w)


@dataclass(frozen=True)
class TuckerFactors:
    """Core tensor plus factor matrices of a Tucker-factorized coefficient tensor.

    ``core`` has shape ``(R1, R2, R3)``; ``beta1`` is ``K x R1``, ``beta2`` is
    ``K x R2`` and ``beta3`` is ``L x R3``. Ranks are bounded by the dimensions
    they compress (``R1 <= K``, ``R2 <= K``, ``R3 <= L``).
    """

    core: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray

    def __post_init__(self):
        core = as_tensor3(self.core)
        b1, b2, b3 = (np.asarray(b, dtype=float) for b in (self.beta1, self.beta2, self.beta3))
        for name, b in (("beta1", b1), ("beta2", b2), ("beta3", b3)):
            if b.ndim != 2:
                raise ValueError(f"{name} must be 2-D, got ndim={b.ndim}")
        r1, r2, r3 = core.shape
        if b1.shape[1] != r1 or b2.shape[1] != r2 or b3.shape[1] != r3:
            raise ValueError(
                f"factor column counts {(b1.shape[1], b2.shape[1], b3.shape[1])} "
                f"do not match core dims {core.shape}"
            )
        if b1.shape[0] != b2.shape[0]:
            raise ValueError("beta1 and beta2 must have the same number of rows")
        if r1 > b1.shape[0] or r2 > b2.shape[0] or r3 > b3.shape[0]:
            raise ValueError(
                f"ranks {core.shape} exceed dimensions "
                f"{(b1.shape[0], b2.shape[0], b3.shape[0])}"
            )
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "beta1", b1)
        object.__setattr__(self, "beta2", b2)
        object.__setattr__(self, "beta3", b3)

    @property
    def ranks(self) -> tuple[int, int, int]:
        return self.core.shape

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.beta1.shape[0], self.beta2.shape[0], self.beta3.shape[0])


def tucker_reconstruct(f: TuckerFactors) -> np.ndarray:
    """Reconstruct the full ``K x K x L`` tensor from its Tucker factors."""
    out = mode_n_product(f.core, f.beta1, 1)
    out = mode_n_product(out, f.beta2, 2)
    return mode_n_product(out, f.beta3, 3)


def tucker_matricized(f: TuckerFactors) -> np.ndarray:
    """Mode-1 matricization of the reconstruction: ``beta1 @ G_(1) @ kron(beta3, beta2).T``.

    This is the ``K x KL`` transition-coefficient matrix ``[A_1 ... A_L]``.
    """
    g1 = mode_n_matricize(f.core, 1)
    return f.beta1 @ g1 @ kronecker(f.beta3, f.beta2).T
