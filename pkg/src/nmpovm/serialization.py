"""JSON encoding of complex matrices as row-major lists of ``[re, im]`` pairs."""

import numpy as np

from ._config import ContractError


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex).ravel()
    return [[float(v.real), float(v.imag)] for v in a]


def decode_matrix(data, d: int) -> np.ndarray:
    """Inverse of :func:`encode_matrix`; nested ``d x d`` row lists are accepted too."""
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ContractError("complex entries must be [re, im] pairs")
    # assign parts separately; re + 1j*im would lose the sign of zero
    z = np.empty(arr.shape[:-1], dtype=complex)
    z.real = arr[..., 0]
    z.imag = arr[..., 1]
    if z.size != d * d:
        raise ContractError(f"expected {d * d} entries, got {z.size}")
    return z.reshape(d, d)
