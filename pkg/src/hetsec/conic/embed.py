"""Bit-exact real parameterizations used by the conic layer.

Complex vector w of length n  ->  2n reals, interleaved:
    [Re w_0, Im w_0, Re w_1, Im w_1, ...]

Hermitian d x d matrix H  ->  d*d reals, column-major upper triangle; for
column j the off-diagonal pairs come first, then the (real) diagonal entry:
    [Re H_01, Im H_01, H_11-block...] concretely:
    for j in 0..d-1:  (Re H_0j, Im H_0j), ..., (Re H_{j-1,j}, Im H_{j-1,j}), H_jj

Hermitian PSD membership is enforced through the standard real-symmetric
embedding

    embed_hermitian(H) = [[Re H, -Im H], [Im H, Re H]]   (2d x 2d),

which is PSD iff H is, and whose spectrum is that of H with every
eigenvalue doubled in multiplicity.
"""
from __future__ import annotations

import numpy as np


def embed_complex_vector(v: np.ndarray) -> np.ndarray:
    """Interleaved [Re, Im] real image of a complex vector."""
    v = np.asarray(v, dtype=complex).ravel()
    out = np.empty(2 * v.size)
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def lift_complex_vector(params: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_complex_vector`."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size % 2:
        raise ValueError("interleaved parameter vector must have even length")
    return params[0::2] + 1j * params[1::2]


def hermitian_param_size(d: int) -> int:
    return d * d


def hermitian_to_params(h: np.ndarray) -> np.ndarray:
    """d*d real coordinates of a Hermitian matrix (see module docstring)."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    if h.shape != (d, d):
        raise ValueError("matrix must be square")
    if not np.allclose(h, h.conj().T, atol=1e-10 * max(1.0, np.abs(h).max())):
        raise ValueError("matrix must be Hermitian")
    out = np.empty(d * d)
    pos = 0
    for j in range(d):
        for i in range(j):
            out[pos] = h[i, j].real
            out[pos + 1] = h[i, j].imag
            pos += 2
        out[pos] = h[j, j].real
        pos += 1
    return out


def params_to_hermitian(params: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`hermitian_to_params`."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size != d * d:
        raise ValueError(f"expected {d * d} parameters, got {params.size}")
    h = np.zeros((d, d), dtype=complex)
    pos = 0
    for j in range(d):
        for i in range(j):
            h[i, j] = params[pos] + 1j * params[pos + 1]
            h[j, i] = params[pos] - 1j * params[pos + 1]
            pos += 2
        h[j, j] = params[pos]
        pos += 1
    return h


def hermitian_param_entry(d: int, i: int, j: int) -> tuple[int, int, float]:
    """Locate entry H_ij in the parameter vector.

    Returns (index of the Re coordinate, index of the Im coordinate or -1
    for a diagonal entry, sign of the Im coordinate).  H_ij with i > j maps
    to the conjugate of the stored upper-triangle entry.
    """
    sign = 1.0
    if i > j:
        i, j = j, i
        sign = -1.0
    col_base = j * j  # 2 * j(j-1)/2 off-diag params + j diagonals before column j
    if i == j:
        return col_base + 2 * j, -1, 0.0
    return col_base + 2 * i, col_base + 2 * i + 1, sign


def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]] real-symmetric image of Hermitian H."""
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def unembed_hermitian(e: np.ndarray) -> np.ndarray:
    """Hermitian pre-image of an embedded matrix (averages the two copies)."""
    d2 = e.shape[0]
    if d2 % 2:
        raise ValueError("embedded matrix must have even dimension")
    d = d2 // 2
    re = (e[:d, :d] + e[d:, d:]) / 2.0
    im = (e[d:, :d] - e[:d, d:]) / 2.0
    return re + 1j * im


def unembed_dual(s: np.ndarray) -> np.ndarray:
    """Pull a real-symmetric dual block back to a Hermitian dual.

    Defined so that Tr(Z H) = <S, embed_hermitian(H)> exactly; the pairing
    makes stationarity identities hold in Hermitian terms with no extra
    scale factor.
    """
    d2 = s.shape[0]
    d = d2 // 2
    return (s[:d, :d] + s[d:, d:]) + 1j * (s[d:, :d] - s[:d, d:])
