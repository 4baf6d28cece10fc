"""Third-order tensor algebra under the mode-3 discrete Fourier transform.

A tensor is a plain ``numpy.ndarray`` of shape ``(n1, n2, n3)``; frontal slice
``i`` is ``T[:, :, i]``. All functions are pure and never modify their inputs.
"""

import numpy as np

# imaginary residue tolerated when a real pipeline comes back from the
# frequency domain, relative to max(1, |T|_inf)
REAL_TOL = 1e-8


class NumericFailure(RuntimeError):
    """A linear-algebra kernel failed on one frequency slice."""

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


def as_tensor3(T):
    T = np.asarray(T)
    if T.ndim != 3 or min(T.shape) < 1:
        raise ValueError(f"expected a non-empty 3rd-order array, got shape {T.shape}")
    if not (np.issubdtype(T.dtype, np.floating) or np.issubdtype(T.dtype, np.complexfloating)):
        T = T.astype(np.float64)
    return T


def frontal_slice(T, i):
    """Return frontal slice ``i`` (0-based) as an ``n1 x n2`` matrix."""
    return T[:, :, i]


def from_slices(slices):
    """Stack equally shaped matrices as the frontal slices of a tensor."""
    return np.stack([np.asarray(s) for s in slices], axis=2)


def identity_tensor(n, n3, dtype=np.float64):
    """Identity tensor: first frontal slice ``I_n``, remaining slices zero."""
    I = np.zeros((n, n, n3), dtype=dtype)
    I[:, :, 0] = np.eye(n)
    return I


def mode3_dft(T, inverse=False):
    """Unnormalized DFT of every tube ``T[i, j, :]``; the inverse carries the 1/n3."""
    T = as_tensor3(T)
    if inverse:
        return np.fft.ifft(T, axis=2)
    return np.fft.fft(T, axis=2)


def to_real(T, what="tensor"):
    """Drop the imaginary part after an inverse DFT, checking it is negligible."""
    if not np.iscomplexobj(T):
        return T
    scale = max(1.0, float(np.max(np.abs(T.real), initial=0.0)))
    resid = float(np.max(np.abs(T.imag), initial=0.0))
    if resid > REAL_TOL * scale:
        raise NumericFailure(f"{what}: imaginary residue {resid:.3e} after inverse DFT")
    return np.ascontiguousarray(T.real)


def map_slices(fn, Tbar, symmetric=False):
    """Apply ``fn`` to each frequency slice of ``Tbar`` and restack.

    With ``symmetric=True`` only slices ``0 .. n3 // 2`` are computed and the
    rest are filled with conjugates, which is valid when ``Tbar`` is the DFT
    of a real tensor and ``fn`` commutes with conjugation.
    """
    n3 = Tbar.shape[2]
    last = n3 // 2 + 1 if symmetric else n3
    out = [None] * n3
    for i in range(last):
        try:
            out[i] = fn(Tbar[:, :, i])
        except np.linalg.LinAlgError as exc:
            raise NumericFailure(f"SVD did not converge on frequency slice {i}", i) from exc
    for i in range(last, n3):
        out[i] = np.conj(out[n3 - i])
    return np.stack(out, axis=2)


def facewise(A, B, adjoint_a=False):
    """Slice-by-slice matrix product ``A^(i) @ B^(i)`` (``A^(i)^H @ B^(i)`` if ``adjoint_a``)."""
    Ai = np.moveaxis(A, 2, 0)
    if adjoint_a:
        Ai = np.conj(np.swapaxes(Ai, 1, 2))
    return np.moveaxis(Ai @ np.moveaxis(B, 2, 0), 0, 2)


def t_product(A, B):
    """t-product ``A * B`` computed slice-wise in the Fourier domain."""
    A, B = as_tensor3(A), as_tensor3(B)
    if A.shape[1] != B.shape[0] or A.shape[2] != B.shape[2]:
        raise ValueError(f"t_product dimension mismatch: {A.shape} * {B.shape}")
    Abar, Bbar = mode3_dft(A), mode3_dft(B)
    Cbar = facewise(Abar, Bbar)
    C = mode3_dft(Cbar, inverse=True)
    if np.isrealobj(A) and np.isrealobj(B):
        return to_real(C, "t_product")
    return C


def t_transpose(A):
    """Tensor transpose: (conjugate-)transpose every slice, reverse slices 2..n3."""
    A = as_tensor3(A)
    At = np.conj(np.transpose(A, (1, 0, 2)))
    order = [0] + list(range(A.shape[2] - 1, 0, -1))
    return At[:, :, order]


def t_svd(T, symmetric=None):
    """Tensor SVD ``T = U * S * t_transpose(V)``.

    Parameters
    ----------
    T : ndarray, shape (n1, n2, n3)
    symmetric : bool, optional
        Mirror conjugate frequency slices. Defaults to True for real input,
        which is what makes ``U`` and ``V`` real.

    Returns
    -------
    U : ndarray, shape (n1, n1, n3)
    S : ndarray, shape (n1, n2, n3)
        f-diagonal; each frequency slice holds nonnegative singular values in
        descending order.
    V : ndarray, shape (n2, n2, n3)
    """
    T = as_tensor3(T)
    real = np.isrealobj(T)
    if symmetric is None:
        symmetric = real
    n1, n2, n3 = T.shape
    Tbar = mode3_dft(T)
    Ubar = np.empty((n1, n1, n3), dtype=complex)
    Sbar = np.zeros((n1, n2, n3), dtype=complex)
    Vbar = np.empty((n2, n2, n3), dtype=complex)
    last = n3 // 2 + 1 if symmetric else n3
    r = min(n1, n2)
    for i in range(last):
        try:
            u, s, vh = np.linalg.svd(Tbar[:, :, i])
        except np.linalg.LinAlgError as exc:
            raise NumericFailure(f"SVD did not converge on frequency slice {i}", i) from exc
        Ubar[:, :, i] = u
        Sbar[np.arange(r), np.arange(r), i] = s
        Vbar[:, :, i] = vh.conj().T
    for i in range(last, n3):
        Ubar[:, :, i] = np.conj(Ubar[:, :, n3 - i])
        Sbar[:, :, i] = Sbar[:, :, n3 - i]
        Vbar[:, :, i] = np.conj(Vbar[:, :, n3 - i])
    U, S, V = (mode3_dft(X, inverse=True) for X in (Ubar, Sbar, Vbar))
    if real and symmetric:
        U, S, V = to_real(U, "t_svd U"), to_real(S, "t_svd S"), to_real(V, "t_svd V")
    return U, S, V


def slice_singular_values(T):
    """Singular values of every frequency slice, shape ``(n3, min(n1, n2))``."""
    Tbar = mode3_dft(T)
    try:
        return np.linalg.svd(np.moveaxis(Tbar, 2, 0), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("SVD did not converge on a frequency slice") from exc


def rotate_mode(T, perm):
    """Reorder tensor modes; output ``[idx[perm]]`` holds input ``[idx]``.

    ``perm`` is a 0-based permutation of ``(0, 1, 2)``, so ``(0, 2, 1)`` turns
    an ``n x K x V`` tensor into ``n x V x K`` whose frontal slice ``k`` is the
    lateral slice ``k`` of the input.
    """
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"not a permutation of the three modes: {perm}")
    return np.transpose(as_tensor3(T), perm)


def inverse_permutation(perm):
    return tuple(int(i) for i in np.argsort(perm))
