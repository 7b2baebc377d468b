"""Complex fields on periodic grids: transforms, pointwise maps and CFLD I/O.

A field is a plain ``numpy`` complex128 array; its shape is the grid shape.
The forward transform is unnormalized with kernel ``exp(-2j*pi*j*k/n)`` along
every axis, the inverse carries the ``1/N`` factor, so that
``fft(conv(k, f)) == fft(k) * fft(f)``.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Callable, Iterator, Sequence

import numpy as np

CFLD_MAGIC = b"CFLD"
CFLD_VERSION = 1


class NumericalDomainError(ArithmeticError):
    """Raised when an operation produces NaN or Inf entries."""

    def __init__(self, message: str, index: tuple[int, ...] | None = None):
        super().__init__(message)
        self.index = index


class CfldFormatError(ValueError):
    pass


def parse_shape(text: str | int | Sequence[int]) -> tuple[int, ...]:
    """Parse ``"64x64"`` / ``"32"`` / ``7`` / ``(8, 6)`` into a validated grid shape."""
    if isinstance(text, (int, np.integer)):
        text = (text,)
    if isinstance(text, str):
        try:
            dims = tuple(int(p) for p in text.lower().replace(",", "x").split("x") if p)
        except ValueError as exc:
            raise ValueError(f"malformed grid shape {text!r}") from exc
    else:
        dims = tuple(int(d) for d in text)
    if not dims:
        raise ValueError("grid shape needs at least one dimension")
    for axis, e in enumerate(dims):
        if e < 1:
            raise ValueError(f"grid extent along axis {axis} must be >= 1, got {e}")
    return dims


def as_field(data, shape: Sequence[int] | None = None) -> np.ndarray:
    """Return ``data`` as a complex128 array, optionally checking its shape."""
    f = np.asarray(data, dtype=np.complex128)
    if f.ndim == 0:
        raise ValueError("a field needs at least one dimension")
    if shape is not None and f.shape != tuple(shape):
        raise ValueError(f"shape mismatch: expected {tuple(shape)}, got {f.shape}")
    return f


def check_finite(f: np.ndarray, what: str = "result") -> np.ndarray:
    bad = ~np.isfinite(f)
    if bad.any():
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NumericalDomainError(f"{what} is not finite at index {index}", index)
    return f


def fft(f) -> np.ndarray:
    f = as_field(f)
    return np.fft.fftn(f)


def ifft(F) -> np.ndarray:
    F = as_field(F)
    return np.fft.ifftn(F)


def dft_direct(f) -> np.ndarray:
    """O(N^2) forward DFT by explicit summation, axis by axis.

    Independent of ``numpy.fft``; used as the oracle for :func:`fft`.
    """
    out = as_field(f).copy()
    for axis, n in enumerate(out.shape):
        k = np.arange(n)
        w = np.exp(-2j * np.pi * np.outer(k, k) / n)
        out = np.moveaxis(np.tensordot(w, np.moveaxis(out, axis, 0), axes=(1, 0)), 0, axis)
    return out


def pointwise(f, g: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``g`` to every entry of ``f``; non-finite output is an error."""
    f = as_field(f)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(g(f), dtype=np.complex128)
    if out.shape != f.shape:
        out = np.broadcast_to(out, f.shape).copy()
    return check_finite(out, "pointwise result")


def delta(shape: Sequence[int], at: Sequence[int] | None = None) -> np.ndarray:
    """Unit impulse (the convolution identity when ``at`` is the origin)."""
    shape = parse_shape(shape)
    d = np.zeros(shape, dtype=np.complex128)
    idx = tuple(0 for _ in shape) if at is None else tuple(int(a) % e for a, e in zip(at, shape))
    d[idx] = 1.0
    return d


# --- CFLD binary format -----------------------------------------------------
# magic "CFLD" | u32 version | u32 D | D x u64 extents | N x (f64 re, f64 im)
# all little-endian, data row-major.


def write_cfld(stream: BinaryIO, f) -> None:
    f = as_field(f)
    stream.write(CFLD_MAGIC)
    stream.write(struct.pack("<II", CFLD_VERSION, f.ndim))
    stream.write(struct.pack(f"<{f.ndim}Q", *f.shape))
    stream.write(np.ascontiguousarray(f).astype("<c16").tobytes())


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = stream.read(n)
    if len(buf) != n:
        raise CfldFormatError(f"truncated CFLD record: wanted {n} bytes, got {len(buf)}")
    return buf


def read_cfld(stream: BinaryIO) -> np.ndarray | None:
    """Read one CFLD record; returns ``None`` at a clean end of stream."""
    magic = stream.read(4)
    if not magic:
        return None
    if magic != CFLD_MAGIC:
        raise CfldFormatError(f"bad magic {magic!r}, expected {CFLD_MAGIC!r}")
    version, ndim = struct.unpack("<II", _read_exact(stream, 8))
    if version != CFLD_VERSION:
        raise CfldFormatError(f"unsupported CFLD version {version}")
    if ndim < 1:
        raise CfldFormatError("CFLD record with zero dimensions")
    shape = struct.unpack(f"<{ndim}Q", _read_exact(stream, 8 * ndim))
    n = int(np.prod(shape))
    data = np.frombuffer(_read_exact(stream, 16 * n), dtype="<c16")
    return data.astype(np.complex128).reshape(shape)


def iter_cfld(stream: BinaryIO) -> Iterator[np.ndarray]:
    while (f := read_cfld(stream)) is not None:
        yield f


def save_field(path, f) -> None:
    with open(path, "wb") as fh:
        write_cfld(fh, f)


def load_field(path) -> np.ndarray:
    with open(path, "rb") as fh:
        f = read_cfld(fh)
    if f is None:
        raise CfldFormatError(f"{path}: empty file")
    return f


def load_fields(path) -> list[np.ndarray]:
    with open(path, "rb") as fh:
        return list(iter_cfld(fh))
