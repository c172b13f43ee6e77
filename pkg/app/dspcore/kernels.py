"""
Deterministic numerical kernels: convolution, DFT, least squares and
null-space projection.

Every function is pure. Sequences, spectra and matrices are plain numpy
``complex128`` arrays; the aliases below only document intent.
"""
import logging

import numpy as np
from scipy import linalg, signal

from core.exceptions import (
    InvalidArgumentError,
    NearSingularError,
    RankDeficiencyError,
)

logger = logging.getLogger(__name__)

ComplexSequence = np.ndarray
Spectrum = np.ndarray
ComplexMatrix = np.ndarray

# Smallest singular value allowed relative to the largest one
RANK_TOLERANCE = 1e-12

# Relative Tikhonov weight for near-singular Gram matrices
DEFAULT_REG_EPSILON = 1e-12

# Shorter operand length from which convolve switches to FFTs
FFT_MIN_LENGTH = 128


def as_sequence(x, name='x'):
    """Validate and return x as a non-empty, finite 1-D complex array"""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(
            f'{name} must be a non-empty 1-D sequence, got shape {arr.shape}'
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f'{name} contains NaN or Inf samples')
    return arr


def convolve(a, b):
    """
    Full linear convolution of two sequences.

    Direct summation while either operand is short, FFT based once both
    reach FFT_MIN_LENGTH samples.
    """
    a = as_sequence(a, 'a')
    b = as_sequence(b, 'b')
    if min(a.size, b.size) >= FFT_MIN_LENGTH:
        return signal.fftconvolve(a, b)
    return np.convolve(a, b)


def time_reverse_conjugate(x, axis=-1):
    """Return conj(x(-t)) along axis, re-indexed to start at zero"""
    return np.conj(np.flip(np.asarray(x, dtype=np.complex128), axis=axis))


def dft(x, n_points, axis=-1):
    """
    Zero-padded DFT along axis.

    Bin f is sum_t x(t) exp(-j 2 pi f t / n_points). A transform shorter
    than the input would alias linear convolution, so it is refused.
    """
    arr = np.asarray(x, dtype=np.complex128)
    if arr.size == 0:
        raise InvalidArgumentError('cannot transform an empty sequence')
    n_points = int(n_points)
    if n_points < arr.shape[axis]:
        raise InvalidArgumentError(
            f'n_points={n_points} is shorter than the input length '
            f'{arr.shape[axis]}'
        )
    return np.fft.fft(arr, n=n_points, axis=axis)


def idft(spectrum, axis=-1):
    """Inverse of dft over the full spectrum length."""
    arr = np.asarray(spectrum, dtype=np.complex128)
    if arr.size == 0:
        raise InvalidArgumentError('cannot invert an empty spectrum')
    return np.fft.ifft(arr, axis=axis)


def convolution_matrix(h, num_columns):
    """
    Toeplitz matrix T such that T @ g == convolve(h, g) whenever
    len(g) == num_columns.
    """
    h = as_sequence(h, 'h')
    if num_columns < 1:
        raise InvalidArgumentError('num_columns must be at least 1')

    # First column is h followed by zeros, first row is h(0) then zeros
    column = np.concatenate([h, np.zeros(num_columns - 1, np.complex128)])
    row = np.zeros(num_columns, dtype=np.complex128)
    row[0] = h[0]
    return linalg.toeplitz(column, row)


def least_squares_solve(A, b):
    """
    Minimize ||A x - b||^2 for a tall, full-column-rank A.

    Solved with an SVD-based LAPACK driver; the normal equations are never
    formed.
    """
    A = np.asarray(A, dtype=np.complex128)
    b = as_sequence(b, 'b')
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise InvalidArgumentError(
            f'A must be a tall matrix (rows >= cols), got shape {A.shape}'
        )
    if A.shape[0] != b.size:
        raise InvalidArgumentError(
            f'A has {A.shape[0]} rows but b has {b.size} entries'
        )

    # Refuse rank-deficient systems instead of returning a minimum-norm guess
    singular_values = linalg.svdvals(A)
    largest, smallest = singular_values[0], singular_values[-1]
    if largest == 0 or smallest < RANK_TOLERANCE * largest:
        condition = np.inf if smallest == 0 else largest / smallest
        raise RankDeficiencyError(
            'least-squares matrix is rank deficient '
            f'(condition {condition:.3e})',
            condition=condition,
        )

    x, *_ = linalg.lstsq(A, b, lapack_driver='gelsd')
    return x


def _gram_condition(singular_values):
    """Condition number of B^H B from the singular values of B"""
    largest = singular_values[:, 0]
    smallest = singular_values[:, -1]
    ratio = np.divide(
        largest,
        smallest,
        out=np.full_like(largest, np.inf),
        where=smallest > 0,
    )
    return ratio ** 2


def nullspace_project(B, v, reg_epsilon=DEFAULT_REG_EPSILON):
    """
    Project v onto the null space of B^H.

    Computes w = (I - B (B^H B)^-1 B^H) v, the point of null(B^H) closest
    to v. B may carry leading batch dimensions, (..., M, K) with v shaped
    (..., M); each slice is projected on its own.

    A slice whose Gram matrix has a condition number above 1/reg_epsilon
    is projected with B^H B + lambda I instead, where
    lambda = reg_epsilon * trace(B^H B) / K, and a warning is logged.
    """
    B = np.asarray(B, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if B.ndim < 2 or v.shape != B.shape[:-1]:
        raise InvalidArgumentError(
            f'shape mismatch: B {B.shape} cannot project v {v.shape}'
        )
    num_rows, num_cols = B.shape[-2:]

    # No columns to null against: the projector is the identity
    if num_cols == 0:
        return v.copy()
    if num_rows <= num_cols:
        raise InvalidArgumentError(
            f'B must have more rows than columns, got {num_rows}x{num_cols}'
        )

    batch_shape = v.shape[:-1]
    B_stack = B.reshape(-1, num_rows, num_cols)
    v_stack = v.reshape(-1, num_rows)

    singular_values = np.linalg.svd(B_stack, compute_uv=False)
    if np.any(singular_values[:, 0] == 0):
        raise NearSingularError('projection basis has an all-zero slice')
    ill_conditioned = _gram_condition(singular_values) * reg_epsilon > 1

    # Well-conditioned slices use an orthonormal basis of range(B)
    Q, _ = np.linalg.qr(B_stack)
    coefficients = np.einsum('smk,sm->sk', Q.conj(), v_stack)
    w = v_stack - np.einsum('smk,sk->sm', Q, coefficients)

    if np.any(ill_conditioned):
        if reg_epsilon <= 0:
            raise NearSingularError(
                'Gram matrix is singular and regularization is disabled'
            )
        B_ill = B_stack[ill_conditioned]
        v_ill = v_stack[ill_conditioned]
        gram = np.einsum('smk,smj->skj', B_ill.conj(), B_ill)
        weight = reg_epsilon * np.real(np.trace(gram, axis1=1, axis2=2))
        weight = weight / num_cols
        regularized = gram + weight[:, None, None] * np.eye(num_cols)
        rhs = np.einsum('smk,sm->sk', B_ill.conj(), v_ill)
        try:
            solution = np.linalg.solve(regularized, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise NearSingularError(
                'regularized Gram matrix is still singular'
            ) from exc
        if not np.all(np.isfinite(solution)):
            raise NearSingularError('regularized projection is not finite')
        w[ill_conditioned] = v_ill - np.einsum('smk,sk->sm', B_ill, solution)
        logger.warning(
            'Tikhonov regularization applied to %d of %d projections',
            int(np.count_nonzero(ill_conditioned)),
            ill_conditioned.size,
        )

    return w.reshape(batch_shape + (num_rows,))
