"""Invariant catalog run by ``convexp check``.

Every check is built from library operations only and returns
:class:`~convexp.lift.CheckReport` records; nothing here raises on failure.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterator

import numpy as np

from . import ca, kernels as kn, lift as lo, rnn, spectral as sp
from .field import delta, dft_direct, fft, ifft
from .lift import CheckReport

SCOPES = ("field", "kernels", "spectral", "lift", "rnn", "ca")


def _report(name, n, err, tol, t=None) -> CheckReport:
    err = float(err)
    return CheckReport(name, int(n), None if t is None else float(t), err, float(tol), err <= tol)


def _rel(a, b) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def check_field(cap: int) -> Iterator[CheckReport]:
    rng = np.random.default_rng(0)
    f = rng.standard_normal((8, 6)) + 1j * rng.standard_normal((8, 6))
    yield _report("fft_roundtrip", f.size, np.max(np.abs(ifft(fft(f)) - f)), 1e-12)
    g = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    yield _report("fft_vs_direct_dft", g.size, _rel(fft(g), dft_direct(g)), 1e-12)
    parseval = abs(np.sum(np.abs(f) ** 2) - np.sum(np.abs(fft(f)) ** 2) / f.size) / np.sum(np.abs(f) ** 2)
    yield _report("parseval", f.size, parseval, 1e-12)


def check_kernels(cap: int) -> Iterator[CheckReport]:
    U = kn.random_real((16,), seed=1)
    K = kn.anti_hermitian_from_real(U)
    yield _report("anti_hermitian_from_real", K.size, np.max(np.abs(K + kn.conj_flip(K))), 1e-14)
    yield _report("anti_hermitian_spectrum_imaginary", K.size, np.max(np.abs(fft(K).real)), 1e-12)
    yield _report("bijection_roundtrip", K.size, np.max(np.abs(kn.real_from_anti_hermitian(K) - U)), 1e-14)
    C = kn.random_complex((5,), seed=2)
    if C.size <= cap:
        yield _report("conj_flip_is_adjoint", C.size, np.max(np.abs(lo.lift(kn.conj_flip(C), cap) - lo.lift(C, cap).conj().T)), 1e-14)
    R = kn.random_complex((4, 6), seed=3)
    yield _report("flip_involution", R.size, np.max(np.abs(kn.flip(kn.flip(R)) - R)), 0.0)
    parts = kn.symmetric_part(R) + kn.antisymmetric_part(R)
    yield _report("symmetric_parts_sum", R.size, np.max(np.abs(parts - R)), 1e-15)


def check_spectral(cap: int) -> Iterator[CheckReport]:
    K = kn.random_complex((16,), seed=4, scale=0.3)
    s, t = 0.7, 1.3
    yield _report("exp_group_law", K.size,
                  np.max(np.abs(sp.conv(sp.conv_exp(K, s), sp.conv_exp(K, t)) - sp.conv_exp(K, s + t))), 1e-11)
    A = kn.random_anti_hermitian((12, 12), seed=5)
    yield _report("exp_inverse", A.size,
                  np.max(np.abs(sp.conv(sp.conv_exp(A, 2.0), sp.conv_exp(A, -2.0)) - delta(A.shape))), 1e-11)
    yield _report("unit_modulus_spectrum", A.size, np.max(np.abs(np.abs(fft(sp.conv_exp(A))) - 1)), 1e-12)
    R = kn.random_real((16,), seed=6)
    c, sn = sp.conv_cos(R), sp.conv_sin(R)
    yield _report("pythagorean", R.size, np.max(np.abs(sp.conv(c, c) + sp.conv(sn, sn) - delta(R.shape))), 1e-11)
    L = kn.builtin_kernel("laplacian2d", (64, 64))
    for t in (1.0, 4.0, 9.0):
        m = sp.second_moments(sp.conv_exp(L, t)).real
        yield _report("heat_second_moment", L.size, np.max(np.abs(m - 2 * t)), 1e-6, t)
    K = kn.random_complex((16,), seed=7, scale=0.3)
    eps = 1e-6
    worst = 0.0
    for a in range(K.shape[0]):
        e = np.zeros(K.shape)
        e[a] = eps
        fd = (sp.conv_exp(K + e) - sp.conv_exp(K - e)) / (2 * eps)
        worst = max(worst, float(np.max(np.abs(fd - sp.deriv_exp_kernel(K, a)))))
    yield _report("deriv_exp_fd", K.size, worst, 1e-6)
    R = kn.random_real((10,), seed=8)
    if R.size <= cap:
        M = lo.bipartite_block_matrix(sp.bipartite_exp(R, 1.0), cap).real
        yield _report("bipartite_orthogonal", M.shape[0], np.max(np.abs(M.T @ M - np.eye(M.shape[0]))), 1e-10, 1.0)


def check_lift(cap: int) -> Iterator[CheckReport]:
    cases = [
        ("laplacian", kn.builtin_kernel("laplacian2d", (6, 6))),
        ("anti_hermitian", kn.random_anti_hermitian((16,), seed=9)),
        ("real", kn.random_real((5, 5), seed=10, scale=0.5)),
        ("complex", kn.random_complex((9,), seed=11, scale=0.5)),
    ]
    for name, K in cases:
        if K.size > cap:
            continue
        for t in (0.1, 1.0, 2.0):
            r = lo.check_exp_equivalence(K, t, 1e-8, cap)
            r.check = f"exp_equivalence[{name}]"
            yield r
        yield lo.row_convolution_square_check(K, 1e-12, cap)
    A = kn.random_anti_hermitian((16,), seed=12)
    if A.size <= cap:
        U = lo.dense_expm(lo.lift(A, cap), 2.0, cap)
        yield _report("dense_exp_unitary", A.size, lo.unitarity_defect(U), 1e-10, 2.0)


def check_rnn(cap: int) -> Iterator[CheckReport]:
    A = kn.random_anti_hermitian((16, 16), seed=13)
    rec = rnn.Recurrence("curnn", A, phi=rnn.IDENTITY, require_unitary=True)
    z0 = kn.random_complex((16, 16), seed=14)
    traj = rnn.run(rec, rnn.NetworkState(z=z0), 1000)
    yield _report("curnn_norm_conservation", A.size, abs(traj.norms[-1] / traj.norms[0] - 1), 1e-8)
    R = kn.random_real((16, 16), seed=15)
    rec = rnn.Recurrence("cornn", R)
    x0, p0 = kn.random_real((16, 16), seed=16).real, kn.random_real((16, 16), seed=17).real
    traj = rnn.run(rec, rnn.NetworkState(x=x0, p=p0), 1000)
    yield _report("cornn_norm_conservation", R.size, abs(traj.norms[-1] / traj.norms[0] - 1), 1e-8)
    small = kn.random_anti_hermitian((6,), seed=18)
    if 2 * small.size <= cap:
        tr = rnn.gradient_norm_trace(rnn.Recurrence("curnn", small, phi=rnn.IDENTITY), rnn.NetworkState(z=kn.random_complex((6,), seed=19)), 20, cap)
        yield _report("gradient_trace_unitary", small.size, np.max(np.abs(np.array(tr) - 1)), 1e-6)


def check_ca(cap: int) -> Iterator[CheckReport]:
    cfg = ca.EmbeddingConfig("table-map")
    bad = 0
    L = 12
    for bits in itertools.product((0, 1), repeat=L):
        row = np.array(bits, dtype=bool)
        bad += int(np.any(np.rint(ca.ca_step_embedded(row, cfg)).astype(bool) != ca.rule110_exact(row)))
    yield _report("ca_embedding_exact", 2**L, bad, 0)
    rep = ca.stability_experiment(200, 500, 1e-3, 10, cfg, seed=0)
    yield _report("ca_noise_stability", 200, rep.divergences, 0)


CATALOG: dict[str, Callable[[int], Iterator[CheckReport]]] = {
    "field": check_field,
    "kernels": check_kernels,
    "spectral": check_spectral,
    "lift": check_lift,
    "rnn": check_rnn,
    "ca": check_ca,
}


def run_checks(scope: str = "all", cap: int = lo.DEFAULT_CAP) -> list[CheckReport]:
    if scope == "all":
        names = SCOPES
    elif scope in CATALOG:
        names = (scope,)
    else:
        raise ValueError(f"unknown scope {scope!r}; choose from all, {', '.join(SCOPES)}")
    return [r for name in names for r in CATALOG[name](cap)]
