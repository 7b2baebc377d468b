"""Convolutional unitary (cuRNN) and orthogonal (coRNN) recurrences.

cuRNN:  z' = phi(exp(tK) * z + I)              with K anti-Hermitian
coRNN:  x' = phi(xx * x + xp * p + I)
        p' = psi(px * x + pp * p)              blocks from ``bipartite_exp``

Only P is left without an input term, exactly as in the coRNN update above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import numpy as np

from .field import NumericalDomainError, as_field, check_finite, fft, ifft
from .kernels import is_anti_hermitian, is_real
from .lift import DEFAULT_CAP, OracleCapError, lift
from .spectral import BipartiteKernelSet, bipartite_exp

POWER_ITERATIONS = 50
POWER_SEED = 12345


# --- activations ------------------------------------------------------------


@dataclass(frozen=True)
class Activation:
    """Elementwise activation.

    ``relu`` and ``controlled-relu`` act on real and imaginary parts
    separately when given complex input. ``modrelu`` rescales the modulus:
    ``z / |z| * max(|z| + bias, 0)``.
    """

    name: str = "identity"
    tau: float | None = None
    bias: float = 0.0

    NAMES = ("identity", "relu", "controlled-relu", "modrelu")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ValueError(f"unknown activation {self.name!r}; choose from {self.NAMES}")
        if self.name == "controlled-relu" and not (self.tau is not None and self.tau > 0):
            raise ValueError("controlled-relu needs tau > 0")

    @property
    def gain(self) -> float:
        """Slope on positive inputs."""
        if self.name == "controlled-relu":
            return 1.0 + 1.0 / self.tau
        return 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.name == "identity":
            return x
        if self.name in ("relu", "controlled-relu"):
            if np.iscomplexobj(x):
                return self.gain * (np.maximum(x.real, 0) + 1j * np.maximum(x.imag, 0))
            return self.gain * np.maximum(x, 0)
        # modrelu
        r = np.abs(x)
        with np.errstate(invalid="ignore"):
            scale = np.divide(np.maximum(r + self.bias, 0), r, out=np.zeros_like(r), where=r > 0)
            return x * scale

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """Real slope ``phi'(x)``; defined for real input (or identity)."""
        if self.name == "identity":
            return np.ones(np.shape(x))
        if np.iscomplexobj(x) and np.any(np.imag(x) != 0):
            raise ValueError(f"{self.name} has no scalar derivative on complex states")
        x = np.real(x)
        if self.name in ("relu", "controlled-relu"):
            return np.where(x > 0, self.gain, 0.0)
        # modrelu on the real line: sign(x) * max(|x| + b, 0)
        return np.where(np.abs(x) + self.bias > 0, 1.0, 0.0)


IDENTITY = Activation()
MODRELU = Activation("modrelu")


def activation(spec: str) -> Activation:
    """Parse ``identity``, ``relu``, ``controlled-relu:TAU`` or ``modrelu:BIAS``."""
    name, _, arg = spec.strip().partition(":")
    name = name.strip().lower()
    if name == "controlled-relu":
        return Activation(name, tau=float(arg) if arg else None)
    if name == "modrelu":
        return Activation(name, bias=float(arg) if arg else 0.0)
    if arg:
        raise ValueError(f"activation {name!r} takes no parameter")
    return Activation(name)


# --- step operators ---------------------------------------------------------


@dataclass(frozen=True)
class StepOperator:
    """Precomputed spectrum of ``exp(t K)`` for a fixed kernel."""

    multipliers: np.ndarray
    source: np.ndarray
    t: float = 1.0

    @classmethod
    def from_kernel(cls, K, t: float = 1.0):
        K = as_field(K)
        with np.errstate(over="ignore", invalid="ignore"):
            m = np.exp(t * fft(K))
        return cls(check_finite(m, "step spectrum"), K, float(t))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.multipliers.shape

    def apply(self, z) -> np.ndarray:
        z = as_field(z, self.shape)
        if self.is_identity:
            return z.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            out = ifft(self.multipliers * fft(z))
        # real kernel on a real state: drop the round-off imaginary part
        if is_real(self.source) and not np.any(z.imag):
            out = out.real.astype(np.complex128)
        return out

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.all(self.multipliers == 1))

    def modulus_defect(self) -> float:
        return float(np.max(np.abs(np.abs(self.multipliers) - 1.0)))

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.multipliers)))


class UnitaryStepOperator(StepOperator):
    """Step operator whose multipliers all lie on the unit circle."""

    TOL = 1e-10

    def __post_init__(self):
        if self.modulus_defect() > self.TOL:
            raise ValueError(
                f"step operator is not unitary: max||m|-1| = {self.modulus_defect():.3e}"
            )

    @classmethod
    def from_kernel(cls, K, t: float = 1.0):
        if not is_anti_hermitian(K):
            raise ValueError("a unitary step operator needs an anti-Hermitian kernel")
        return super().from_kernel(K, t)


@dataclass(frozen=True)
class BipartiteOperator:
    """Cached spectra of a :class:`BipartiteKernelSet`."""

    blocks: BipartiteKernelSet

    @cached_property
    def spectra(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        b = self.blocks
        return fft(b.xx), fft(b.xp), fft(b.px), fft(b.pp)

    def apply(self, x, p) -> tuple[np.ndarray, np.ndarray]:
        mxx, mxp, mpx, mpp = self.spectra
        Fx, Fp = fft(x), fft(p)
        return ifft(mxx * Fx + mxp * Fp).real, ifft(mpx * Fx + mpp * Fp).real


# --- states and steps -------------------------------------------------------


@dataclass
class NetworkState:
    z: np.ndarray | None = None
    x: np.ndarray | None = None
    p: np.ndarray | None = None
    step_index: int = 0

    @property
    def is_cornn(self) -> bool:
        return self.z is None

    def norm(self) -> float:
        if self.is_cornn:
            return float(np.sqrt(np.sum(self.x**2) + np.sum(self.p**2)))
        return float(np.linalg.norm(self.z.ravel()))

    def as_field(self) -> np.ndarray:
        """cuRNN: ``z``; coRNN: ``x`` and ``p`` stacked along a new leading axis."""
        if self.is_cornn:
            return np.stack([self.x, self.p]).astype(np.complex128)
        return self.z


def curnn_step(state: NetworkState, op: StepOperator, inp=None, phi: Activation = IDENTITY) -> NetworkState:
    pre = op.apply(state.z)
    if inp is not None:
        pre = pre + as_field(inp, op.shape)
    z = check_finite(np.asarray(phi(pre), dtype=np.complex128), "cuRNN state")
    return NetworkState(z=z, step_index=state.step_index + 1)


def cornn_step(
    state: NetworkState,
    blocks: BipartiteKernelSet | BipartiteOperator,
    inp=None,
    phi: Activation = IDENTITY,
    psi: Activation = IDENTITY,
) -> NetworkState:
    op = blocks if isinstance(blocks, BipartiteOperator) else BipartiteOperator(blocks)
    ax, ap = op.apply(state.x, state.p)
    if inp is not None:
        inp = np.asarray(inp)
        if np.iscomplexobj(inp) and np.any(inp.imag != 0):
            raise ValueError("coRNN input must be real")
        ax = ax + inp.real
    x = check_finite(np.asarray(phi(ax), dtype=float), "coRNN x")
    p = check_finite(np.asarray(psi(ap), dtype=float), "coRNN p")
    return NetworkState(x=x, p=p, step_index=state.step_index + 1)


# --- rollouts ---------------------------------------------------------------


@dataclass
class Recurrence:
    """Everything that defines a rollout except the initial state.

    ``phi`` defaults to modrelu (bias 0) for the cuRNN and identity for the
    coRNN; ``psi`` defaults to identity.
    """

    model: str
    kernel: np.ndarray
    t: float = 1.0
    phi: Activation | None = None
    psi: Activation = IDENTITY
    input_mode: str = "zero"
    input_value: complex = 0.0
    input_amplitude: float = 1.0
    seed: int = 0
    require_unitary: bool = False

    def __post_init__(self):
        if self.model not in ("curnn", "cornn"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.input_mode not in ("zero", "constant", "random"):
            raise ValueError(f"unknown input mode {self.input_mode!r}")
        if self.phi is None:
            self.phi = MODRELU if self.model == "curnn" else IDENTITY
        self.kernel = as_field(self.kernel)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.kernel.shape

    def operator(self):
        if self.model == "cornn":
            return BipartiteOperator(bipartite_exp(self.kernel, self.t))
        cls = UnitaryStepOperator if self.require_unitary else StepOperator
        return cls.from_kernel(self.kernel, self.t)

    def inputs(self):
        """Deterministic input stream; yields ``None`` for zero input."""
        rng = np.random.default_rng(self.seed)
        complex_state = self.model == "curnn"
        while True:
            if self.input_mode == "zero":
                yield None
            elif self.input_mode == "constant":
                v = self.input_value if complex_state else complex(self.input_value).real
                yield np.full(self.shape, v, dtype=np.complex128 if complex_state else float)
            else:
                a = self.input_amplitude
                u = rng.uniform(-a, a, self.shape)
                if complex_state:
                    u = u + 1j * rng.uniform(-a, a, self.shape)
                yield u

    def step(self, state: NetworkState, op, inp) -> NetworkState:
        if self.model == "curnn":
            return curnn_step(state, op, inp, self.phi)
        return cornn_step(state, op, inp, self.phi, self.psi)


@dataclass
class Trajectory:
    norms: list[float] = field(default_factory=list)
    states: list[NetworkState] = field(default_factory=list)

    @property
    def final(self) -> NetworkState:
        return self.states[-1]

    def norm_csv(self) -> str:
        rows = ["step,norm"] + [f"{i},{n!r}" for i, n in enumerate(self.norms)]
        return "\n".join(rows) + "\n"


class StepError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


def run(rec: Recurrence, initial: NetworkState, steps: int, record: str = "norm") -> Trajectory:
    """Roll the recurrence forward ``steps`` times.

    ``record="norm"`` keeps the norm trace and only the last state;
    ``record="full"`` keeps every state.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if record not in ("norm", "full"):
        raise ValueError(f"unknown record mode {record!r}")
    op = rec.operator()
    state = initial
    traj = Trajectory(norms=[state.norm()], states=[state])
    inputs = rec.inputs()
    for n in range(steps):
        try:
            state = rec.step(state, op, next(inputs))
        except (NumericalDomainError, ValueError) as exc:
            raise StepError(n + 1, exc) from exc
        traj.norms.append(state.norm())
        if record == "full":
            traj.states.append(state)
        else:
            traj.states[-1:] = [state]
    return traj


# --- gradient diagnostics ---------------------------------------------------


def _spectral_norm(P: np.ndarray, iterations: int = POWER_ITERATIONS, seed: int = POWER_SEED) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(P.shape[1])
    if np.iscomplexobj(P):
        v = v + 1j * rng.standard_normal(P.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iterations):
        w = P.conj().T @ (P @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        sigma = np.sqrt(nw)
        v = w / nw
    return float(sigma)


def gradient_norm_trace(
    rec: Recurrence, initial: NetworkState, steps: int, cap: int = DEFAULT_CAP
) -> list[float]:
    """Spectral norm of the Jacobian ``d state_n / d state_0`` for n = 1..steps.

    The Jacobian is the product of ``diag(phi'(pre_i)) @ M`` where ``M`` is
    the lifted linear step. Norms are power-iteration estimates with a fixed
    iteration count and seed.
    """
    op = rec.operator()
    if rec.model == "curnn":
        M = _lifted_step(op, cap)
    else:
        M = np.block(
            [
                [lift(op.blocks.xx, cap), lift(op.blocks.xp, cap)],
                [lift(op.blocks.px, cap), lift(op.blocks.pp, cap)],
            ]
        ).real
    n = M.shape[0]
    if n > cap:
        raise OracleCapError(f"lifted size {n} exceeds oracle cap {cap}")
    P = np.eye(n, dtype=M.dtype)
    state = initial
    inputs = rec.inputs()
    trace = []
    for _ in range(steps):
        inp = next(inputs)
        if rec.model == "curnn":
            pre = op.apply(state.z) + (0 if inp is None else inp)
            lam = rec.phi.derivative(pre).ravel()
        else:
            ax, ap = op.apply(state.x, state.p)
            if inp is not None:
                ax = ax + np.real(inp)
            lam = np.concatenate([rec.phi.derivative(ax).ravel(), rec.psi.derivative(ap).ravel()])
        state = rec.step(state, op, inp)
        P = lam[:, None] * (M @ P)
        trace.append(_spectral_norm(P))
    return trace


def _lifted_step(op: StepOperator, cap: int) -> np.ndarray:
    M = lift(ifft(op.multipliers), cap)
    return M.real if is_real(op.source) else M
