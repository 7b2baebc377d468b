"""Circular convolution kernels and their symmetry algebra.

Kernels are full-grid complex arrays with the origin at multi-index 0; a
negative offset ``-j`` lives at ``e - j`` along an axis of extent ``e``.
Compact stencils are kept as a :class:`KernelCore` (offset -> value map) and
placed on a grid with :func:`embed`.

Central symmetry uses ``-j mod e``, so on even grids the Nyquist index maps
to itself and an anti-Hermitian kernel has purely imaginary Nyquist entries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .field import as_field, parse_shape

DEFAULT_TOL = 1e-12


class KernelCoreError(ValueError):
    pass


@dataclass(frozen=True)
class KernelCore:
    """Sparse description of a kernel: signed multi-index offsets -> values."""

    entries: Mapping[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        dims = {len(k) for k in self.entries}
        if len(dims) > 1:
            raise KernelCoreError(f"mixed offset dimensionality {sorted(dims)}")
        clean = {tuple(int(i) for i in k): complex(v) for k, v in self.entries.items()}
        object.__setattr__(self, "entries", clean)

    @property
    def ndim(self) -> int | None:
        for k in self.entries:
            return len(k)
        return None

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[int] | int, complex]]) -> "KernelCore":
        out: dict[tuple[int, ...], complex] = {}
        for off, val in pairs:
            key = (int(off),) if np.isscalar(off) else tuple(int(i) for i in off)
            if key in out:
                raise KernelCoreError(f"duplicate offset {key}")
            out[key] = complex(val)
        return cls(out)


_CORE_LINE = re.compile(r"^\s*([-+\d\s,]+?)\s*:\s*(\S+)(?:\s+(\S+))?\s*$")


def parse_core(text: str) -> KernelCore:
    """Parse the text form: one ``i,j,...: re imag`` entry per line, ``#`` comments."""
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _CORE_LINE.match(line)
        if m is None:
            raise KernelCoreError(f"line {lineno}: cannot parse {raw!r}")
        try:
            off = tuple(int(p) for p in m.group(1).split(","))
            val = complex(float(m.group(2)), float(m.group(3) or 0.0))
        except ValueError as exc:
            raise KernelCoreError(f"line {lineno}: {exc}") from None
        if off in seen:
            raise KernelCoreError(f"line {lineno}: duplicate offset {off}")
        seen.add(off)
        pairs.append((off, val))
    try:
        return KernelCore.from_pairs(pairs)
    except KernelCoreError as exc:
        raise KernelCoreError(f"core file: {exc}") from None


def format_core(core: KernelCore) -> str:
    lines = []
    for off in sorted(core.entries):
        v = core.entries[off]
        lines.append(f"{','.join(str(i) for i in off)}: {v.real!r} {v.imag!r}")
    return "\n".join(lines) + "\n"


def embed(core: KernelCore, shape: Sequence[int]) -> np.ndarray:
    """Place a kernel core on a full periodic grid (zero elsewhere)."""
    shape = parse_shape(shape)
    K = np.zeros(shape, dtype=np.complex128)
    if core.ndim is not None and core.ndim != len(shape):
        raise KernelCoreError(f"core is {core.ndim}-D but grid is {len(shape)}-D")
    for off, val in core.entries.items():
        for axis, (o, e) in enumerate(zip(off, shape)):
            if not 2 * abs(o) < e:
                raise KernelCoreError(
                    f"offset {off} does not fit the grid along axis {axis} (extent {e})"
                )
        K[tuple(o % e for o, e in zip(off, shape))] = val
    return K


def core_of(K, tol: float = 0.0) -> KernelCore:
    """Inverse of :func:`embed`: nonzero entries with offsets unwrapped to (-e/2, e/2]."""
    K = as_field(K)
    pairs = []
    for idx in zip(*np.nonzero(np.abs(K) > tol)):
        off = tuple(int(i) if 2 * i <= e else int(i) - e for i, e in zip(idx, K.shape))
        pairs.append((off, K[idx]))
    return KernelCore.from_pairs(pairs)


def offsets(shape: Sequence[int]) -> list[np.ndarray]:
    """Per-axis signed offsets of every grid index, unwrapped to (-e/2, e/2]."""
    grids = np.indices(tuple(shape))
    return [np.where(2 * g <= e, g, g - e) for g, e in zip(grids, shape)]


# --- symmetry algebra -------------------------------------------------------


def flip(K) -> np.ndarray:
    """Central reflection: entry at ``j`` moves to ``-j mod shape``."""
    K = as_field(K)
    out = K
    for axis in range(K.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def conj_flip(K) -> np.ndarray:
    """Conjugate reflection; the kernel whose lifted matrix is the adjoint."""
    return np.conj(flip(K))


def is_anti_hermitian(K, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    K = as_field(K)
    return bool(np.max(np.abs(K + conj_flip(K)), initial=0.0) <= tol)


def is_hermitian(K, tol: float = DEFAULT_TOL) -> bool:
    K = as_field(K)
    return bool(np.max(np.abs(K - conj_flip(K)), initial=0.0) <= tol)


def is_symmetric(K, tol: float = DEFAULT_TOL) -> bool:
    K = as_field(K)
    return bool(np.max(np.abs(K - flip(K)), initial=0.0) <= tol)


def is_antisymmetric(K, tol: float = DEFAULT_TOL) -> bool:
    K = as_field(K)
    return bool(np.max(np.abs(K + flip(K)), initial=0.0) <= tol)


def is_real(K, tol: float = 0.0) -> bool:
    return bool(np.max(np.abs(np.imag(as_field(K))), initial=0.0) <= tol)


def symmetric_part(K) -> np.ndarray:
    K = as_field(K)
    return (K + flip(K)) / 2


def antisymmetric_part(K) -> np.ndarray:
    K = as_field(K)
    return (K - flip(K)) / 2


def _require_real(U, what="kernel") -> np.ndarray:
    U = as_field(U)
    if not is_real(U):
        raise ValueError(f"{what} must have real entries")
    return U.real.astype(np.complex128)


def anti_hermitian_from_real(U) -> np.ndarray:
    """Map a real kernel to an anti-Hermitian one.

    The antisymmetric part of ``U`` becomes the real part and the symmetric
    part becomes the imaginary part. :func:`real_from_anti_hermitian` inverts
    it.
    """
    U = _require_real(U, "U")
    Ut = conj_flip(U)
    return (U - Ut) / 2 + 1j * ((U + Ut) / 2)


def real_from_anti_hermitian(K) -> np.ndarray:
    K = as_field(K)
    return (K.real + K.imag).astype(np.complex128)


def classify(K, tol: float = DEFAULT_TOL) -> list[str]:
    """Names of the symmetry classes ``K`` belongs to."""
    tags = []
    if is_real(K, tol):
        tags.append("real")
    for name, pred in (
        ("symmetric", is_symmetric),
        ("antisymmetric", is_antisymmetric),
        ("hermitian", is_hermitian),
        ("anti-hermitian", is_anti_hermitian),
    ):
        if pred(K, tol):
            tags.append(name)
    return tags


# --- built-in stencils ------------------------------------------------------

LAPLACIAN_2D = KernelCore({(0, 0): -4, (1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
CENTRAL_DIFF_1D = KernelCore({(-1,): -0.5, (1,): 0.5})


def laplacian(shape: Sequence[int]) -> np.ndarray:
    """Nearest-neighbour Laplacian stencil (-2D at the centre) on any grid."""
    shape = parse_shape(shape)
    core = {tuple(0 for _ in shape): -2.0 * len(shape)}
    for axis in range(len(shape)):
        for s in (-1, 1):
            off = [0] * len(shape)
            off[axis] = s
            core[tuple(off)] = core.get(tuple(off), 0) + 1.0
    return embed(KernelCore(core), shape)


def random_real(shape: Sequence[int], seed: int | None = 0, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (scale * rng.standard_normal(parse_shape(shape))).astype(np.complex128)


def random_complex(shape: Sequence[int], seed: int | None = 0, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    shape = parse_shape(shape)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_anti_hermitian(shape: Sequence[int], seed: int | None = 0, scale: float = 1.0) -> np.ndarray:
    return anti_hermitian_from_real(random_real(shape, seed, scale))


BUILTINS = (
    "laplacian2d",
    "laplacian",
    "central-diff-1d",
    "delta",
    "zero",
    "random-real",
    "random-complex",
    "random-antihermitian",
)


def builtin_kernel(name: str, shape: Sequence[int], seed: int = 0) -> np.ndarray:
    """Full-grid kernel for one of the :data:`BUILTINS` names."""
    shape = parse_shape(shape)
    name = name.lower()
    if name == "laplacian2d":
        if len(shape) != 2:
            raise ValueError("laplacian2d needs a 2-D grid")
        return embed(LAPLACIAN_2D, shape)
    if name == "laplacian":
        return laplacian(shape)
    if name == "central-diff-1d":
        if len(shape) != 1:
            raise ValueError("central-diff-1d needs a 1-D grid")
        return embed(CENTRAL_DIFF_1D, shape)
    if name == "delta":
        K = np.zeros(shape, dtype=np.complex128)
        K[(0,) * len(shape)] = 1.0
        return K
    if name in ("zero", "zero-kernel"):
        return np.zeros(shape, dtype=np.complex128)
    if name == "random-real":
        return random_real(shape, seed)
    if name == "random-complex":
        return random_complex(shape, seed)
    if name == "random-antihermitian":
        return random_anti_hermitian(shape, seed)
    raise ValueError(f"unknown stencil {name!r}; choose from {', '.join(BUILTINS)}")
