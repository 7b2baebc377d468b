"""Dense-matrix ground truth for convolution kernels.

``lift(K)`` materializes the N x N matrix of ``f -> conv(K, f)`` on the
row-major flattened grid, so ``lift(K)[r, c] = K[(idx(r) - idx(c)) mod shape]``.
(A column-major flatten would permute rows and columns identically and change
nothing below.) The dense exponential is a plain scaling-and-squaring Taylor
scheme that never touches an FFT, which keeps it independent of the fast
path it is used to check.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .field import as_field, check_finite
from .spectral import conv, conv_exp

DEFAULT_CAP = 4096
TAYLOR_ORDER = 16


class OracleCapError(ValueError):
    pass


@dataclass
class CheckReport:
    check: str
    n: int
    t: float | None
    max_err: float
    tol: float
    passed: bool

    def to_json(self) -> str:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return json.dumps(d)

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        t = "" if self.t is None else f" t={self.t:g}"
        return f"[{status}] {self.check} n={self.n}{t} max_err={self.max_err:.3e} tol={self.tol:.1e}"


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise OracleCapError(f"lifted size {n} exceeds oracle cap {cap}")


def lift(K, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Dense matrix of the convolution operator ``f -> conv(K, f)``."""
    K = as_field(K)
    n = K.size
    _check_cap(n, cap)
    coords = np.indices(K.shape).reshape(K.ndim, n)
    flat = np.zeros((n, n), dtype=np.intp)
    for c, e in zip(coords, K.shape):
        flat = flat * e + (c[:, None] - c[None, :]) % e
    return K.ravel()[flat]


def unlift(M: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Kernel read back from column 0 of a convolutional matrix."""
    return np.asarray(M)[:, 0].reshape(tuple(shape)).astype(np.complex128)


def dense_expm(M, t: float = 1.0, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``exp(t M)`` by scaling and squaring with a degree-16 Taylor polynomial."""
    A = t * np.asarray(M, dtype=np.complex128)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("dense_expm needs a square matrix")
    _check_cap(n, cap)
    norm1 = np.abs(A).sum(axis=0).max(initial=0.0)
    squarings = math.ceil(math.log2(max(1.0, norm1)))
    A = A / 2.0**squarings
    # Horner evaluation of sum_k A^k / k!
    E = np.eye(n, dtype=np.complex128)
    for k in range(TAYLOR_ORDER, 0, -1):
        E = np.eye(n, dtype=np.complex128) + (A @ E) / k
    for _ in range(squarings):
        E = E @ E
    return check_finite(E, "matrix exponential")


def check_exp_equivalence(K, t: float = 1.0, tol: float = 1e-8, cap: int = DEFAULT_CAP) -> CheckReport:
    """Compare ``lift(conv_exp(K, t))`` against ``dense_expm(lift(K), t)``."""
    K = as_field(K)
    fast = lift(conv_exp(K, t), cap)
    slow = dense_expm(lift(K, cap), t, cap)
    err = float(np.max(np.abs(fast - slow)))
    return CheckReport("exp_equivalence", K.size, float(t), err, tol, err <= tol)


def row_convolution_square_check(K, tol: float = 1e-12, cap: int = DEFAULT_CAP) -> CheckReport:
    """``lift(K) @ lift(K)`` against ``lift(conv(K, K))``."""
    K = as_field(K)
    M = lift(K, cap)
    err = float(np.max(np.abs(M @ M - lift(conv(K, K), cap))))
    return CheckReport("row_convolution_square", K.size, None, err, tol, err <= tol)


def unitarity_defect(U) -> float:
    """``max |U^H U - I|``."""
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def is_circulant(M, shape: Sequence[int], tol: float = 0.0) -> bool:
    """True if ``M`` is the lift of the kernel in its first column."""
    M = np.asarray(M)
    return bool(np.max(np.abs(M - lift(unlift(M, shape), cap=M.shape[0]))) <= tol)


def bipartite_block_matrix(blocks, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Dense 2N x 2N matrix acting on ``concat(flatten(x), flatten(p))``."""
    return np.block(
        [
            [lift(blocks.xx, cap), lift(blocks.xp, cap)],
            [lift(blocks.px, cap), lift(blocks.pp, cap)],
        ]
    )
