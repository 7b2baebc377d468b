"""Plot-ready exports: binary 16-bit PGM images and CSV tables."""

from __future__ import annotations

import csv
import io

import numpy as np

from .field import as_field

PGM_MAXVAL = 65535


def pgm_bytes(f, use_abs: bool = False, center: bool = False) -> bytes:
    """Binary P5 image of a 2-D field, min-max normalized to 16 bits.

    The real part is used unless ``use_abs``. ``center`` moves the origin to
    the middle of the image (``fftshift``); otherwise pixel (0, 0) is the
    origin.
    """
    f = as_field(f)
    if f.ndim != 2:
        raise ValueError(f"PGM export needs a 2-D field, got {f.ndim}-D")
    v = np.abs(f) if use_abs else f.real
    if center:
        v = np.fft.fftshift(v)
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros(v.shape) if hi == lo else (v - lo) / (hi - lo)
    pix = np.rint(scaled * PGM_MAXVAL).astype(">u2")
    rows, cols = v.shape
    return f"P5\n{cols} {rows}\n{PGM_MAXVAL}\n".encode("ascii") + pix.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(parts[4], dtype=dtype, count=rows * cols).reshape(rows, cols)


def csv_text(f) -> str:
    """Row-major CSV: one line per entry with its index columns, re and im."""
    f = as_field(f)
    if f.ndim not in (1, 2):
        raise ValueError(f"CSV export needs a 1-D or 2-D field, got {f.ndim}-D")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"i{k}" for k in range(f.ndim)] + ["re", "im"])
    for idx in np.ndindex(f.shape):
        v = f[idx]
        w.writerow([*idx, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def read_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    ndim = len(header) - 2
    idx = np.array([[int(c) for c in r[:ndim]] for r in body], dtype=int).reshape(-1, ndim)
    shape = tuple(int(m) + 1 for m in idx.max(axis=0))
    out = np.zeros(shape, dtype=np.complex128)
    for r, i in zip(body, idx):
        out[tuple(i)] = complex(float(r[ndim]), float(r[ndim + 1]))
    return out
