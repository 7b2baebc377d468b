"""Analytic functions of convolution kernels, computed in Fourier space.

Convolution is diagonal in Fourier space, so any entire function ``g`` of the
operator ``K*`` is again a convolution, with kernel ``ifft(g(t * fft(K)))``.
This gives the convolutional exponential, sine and cosine in O(N log N), their
derivatives with respect to individual kernel entries (circular shifts of the
kernels themselves), and the four-kernel orthogonal block used by the
bipartite X/P network.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .field import as_field, check_finite, delta, fft, ifft
from .kernels import anti_hermitian_from_real, is_real, offsets


@dataclass(frozen=True)
class SpectralKernel:
    """Fourier multipliers of a kernel; applying it is one fft/ifft pair."""

    multipliers: np.ndarray

    @classmethod
    def of(cls, K) -> "SpectralKernel":
        return cls(fft(K))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.multipliers.shape

    def apply(self, f) -> np.ndarray:
        f = as_field(f, self.shape)
        return ifft(self.multipliers * fft(f))

    def kernel(self) -> np.ndarray:
        return ifft(self.multipliers)


def conv(K, f) -> np.ndarray:
    """Circular convolution ``(K * f)[x] = sum_j K[j] f[x - j]``."""
    K = as_field(K)
    f = as_field(f, K.shape)
    return ifft(fft(K) * fft(f))


def conv_direct(K, f) -> np.ndarray:
    """Circular convolution by explicit wrapped summation, O(N^2)."""
    K = as_field(K)
    f = as_field(f, K.shape)
    out = np.zeros_like(f)
    for j in zip(*np.nonzero(K)):
        out += K[j] * np.roll(f, j, axis=tuple(range(f.ndim)))
    return out


def apply_analytic(K, g: Callable[[np.ndarray], np.ndarray], t: float = 1.0) -> np.ndarray:
    """Kernel of the operator ``g(t K*)``: ``ifft(g(t * fft(K)))``.

    ``g`` must be entire (exp, sin, cos, polynomials ...). Overflow in the
    spectrum raises :class:`~convexp.field.NumericalDomainError` naming the
    offending frequency index.
    """
    spec = t * fft(K)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(g(spec), dtype=np.complex128)
    check_finite(out, "spectrum")
    return check_finite(ifft(out), "kernel")


def conv_exp(K, t: float = 1.0) -> np.ndarray:
    return apply_analytic(K, np.exp, t)


def conv_cos(K, t: float = 1.0) -> np.ndarray:
    return apply_analytic(K, np.cos, t)


def conv_sin(K, t: float = 1.0) -> np.ndarray:
    return apply_analytic(K, np.sin, t)


def shift(K, a: Sequence[int] | int) -> np.ndarray:
    """Circular translate: ``shift(K, a)[k] == K[k - a]``."""
    K = as_field(K)
    a = (a,) if np.isscalar(a) else tuple(a)
    if len(a) != K.ndim:
        raise ValueError(f"offset {a} has wrong dimensionality for a {K.ndim}-D kernel")
    return np.roll(K, a, axis=tuple(range(K.ndim)))


def deriv_exp_kernel(K, a: Sequence[int] | int, t: float = 1.0) -> np.ndarray:
    """Derivative of ``conv_exp(K, t)`` with respect to the entry ``K[a]``.

    Entries are treated as independent complex coordinates. The result is
    ``t`` times ``conv_exp(K, t)`` translated by ``+a``; at ``K = 0`` it is
    the impulse at ``a`` (the linear term of the series).
    """
    return t * shift(conv_exp(K, t), a)


def deriv_trig_kernels(K, a: Sequence[int] | int, t: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives ``(dcos, dsin)`` of ``conv_cos``/``conv_sin`` w.r.t. ``K[a]``."""
    return -t * shift(conv_sin(K, t), a), t * shift(conv_cos(K, t), a)


def deriv_exp_real_param(U, a: Sequence[int] | int, t: float = 1.0) -> np.ndarray:
    """Derivative of ``conv_exp(anti_hermitian_from_real(U), t)`` w.r.t. ``U[a]``.

    The bijection is linear: ``U[a]`` enters ``K[a]`` with weight ``(1+i)/2``
    and ``K[-a]`` with weight ``(-1+i)/2`` (weight ``i`` when ``a == -a``).
    """
    U = as_field(U)
    a = (a,) if np.isscalar(a) else tuple(int(i) for i in a)
    E = conv_exp(anti_hermitian_from_real(U), t)
    neg = tuple(-i for i in a)
    if all((i - j) % e == 0 for i, j, e in zip(a, neg, U.shape)):
        return 1j * t * shift(E, a)
    return t * ((1 + 1j) / 2 * shift(E, a) + (-1 + 1j) / 2 * shift(E, neg))


def second_moments(K) -> np.ndarray:
    """Per-axis ``sum K[x] * x_axis**2`` with offsets unwrapped to (-e/2, e/2]."""
    K = as_field(K)
    return np.array([np.sum(K * o.astype(float) ** 2) for o in offsets(K.shape)])


def first_moments(K) -> np.ndarray:
    K = as_field(K)
    return np.array([np.sum(K * o.astype(float)) for o in offsets(K.shape)])


# --- bipartite (X, P) orthogonal blocks -------------------------------------


@dataclass(frozen=True)
class BipartiteKernelSet:
    """The four kernels of ``exp(t [[0, K*], [-flip(K)*, 0]])``."""

    xx: np.ndarray
    xp: np.ndarray
    px: np.ndarray
    pp: np.ndarray
    time: float = 1.0

    @property
    def shape(self) -> tuple[int, ...]:
        return self.xx.shape

    def apply(self, x, p) -> tuple[np.ndarray, np.ndarray]:
        Fx, Fp = fft(x), fft(p)
        mx, mp_ = fft(self.xx), fft(self.xp)
        nx, np_ = fft(self.px), fft(self.pp)
        return ifft(mx * Fx + mp_ * Fp), ifft(nx * Fx + np_ * Fp)


def _sinc_t(s: np.ndarray, t: float) -> np.ndarray:
    """``sin(t s) / s`` with the removable singularity at ``s = 0`` set to ``t``."""
    out = np.full(s.shape, float(t))
    nz = s != 0
    out[nz] = np.sin(t * s[nz]) / s[nz]
    return out


def bipartite_exp(K, t: float = 1.0) -> BipartiteKernelSet:
    """Orthogonal four-kernel block generated by a real kernel ``K``.

    X is driven by ``K * P`` and P by ``-flip(K) * X``. Per frequency with
    ``c = fft(K)`` and ``s = |c|`` the blocks are ``cos(t s)`` on the
    diagonal, ``c sin(t s)/s`` and ``-conj(c) sin(t s)/s`` off it. For a
    centrally symmetric ``K`` this is ``cos(tK)``, ``+sin(tK)``, ``-sin(tK)``.
    """
    K = as_field(K)
    if not is_real(K):
        raise ValueError("bipartite_exp needs a real kernel")
    c = fft(K.real)
    s = np.abs(c)
    cs = np.cos(t * s)
    sn = _sinc_t(s, t)
    # every block spectrum is Hermitian-symmetric, so the kernels are real
    xx = ifft(cs).real.astype(np.complex128)
    xp = ifft(c * sn).real.astype(np.complex128)
    px = ifft(-np.conj(c) * sn).real.astype(np.complex128)
    return BipartiteKernelSet(xx=xx, xp=xp, px=px, pp=xx.copy(), time=float(t))


def rotation_delta(shape: Sequence[int], theta: float) -> BipartiteKernelSet:
    """Blocks of a global X/P rotation by ``theta`` (``K = theta * delta``)."""
    return bipartite_exp(theta * delta(shape))
