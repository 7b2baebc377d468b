"""Convolutional exponentials, unitary/orthogonal convolutional recurrences,
and a dense-matrix oracle that checks them."""

from .field import NumericalDomainError, delta, fft, ifft, load_field, save_field
from .kernels import (
    KernelCore,
    anti_hermitian_from_real,
    conj_flip,
    embed,
    flip,
    is_anti_hermitian,
)
from .spectral import (
    BipartiteKernelSet,
    SpectralKernel,
    bipartite_exp,
    conv,
    conv_cos,
    conv_exp,
    conv_sin,
    deriv_exp_kernel,
    deriv_trig_kernels,
)

__version__ = "0.1.0"
