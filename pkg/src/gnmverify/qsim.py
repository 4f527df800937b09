"""Exact simulation of registers over the group-label basis.

A register has one basis state per group element plus an optional block
of junk dimensions that represent invalid labels. The central circuit is
Hadamard, controlled right-multiplication, Hadamard on a fresh control
qubit; its two outcome branches on the register are (psi +- M psi)/2 up
to normalization. Imperfections are modeled by a Werner-style mix of the
input with the maximally mixed state on the valid-label span and by an
interferometric visibility that damps the interference term of the
outcome distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooLargeForExact
from .groups import FiniteGroup, Subgroup

DEFAULT_DIM_CAP = 1 << 20
DENSITY_DIM_CAP = 1 << 12

PURE_NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
TRACE_TOL = 1e-10
_EAGER_PSD_LIMIT = 512


@dataclass(frozen=True)
class NoiseSpec:
    """Hardware imperfection parameters.

    `visibility` is the interference contrast of the control-qubit
    interferometer (1 = ideal); `state_fidelity_mix` is the weight of the
    intended state in a Werner mix with the maximally mixed state on the
    valid-label span (1 = ideal preparation).
    """

    visibility: float = 1.0
    state_fidelity_mix: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if not 0.0 <= self.state_fidelity_mix <= 1.0:
            raise ValueError("state_fidelity_mix must lie in [0, 1]")

    @property
    def is_trivial(self) -> bool:
        return self.visibility == 1.0 and self.state_fidelity_mix == 1.0

    @staticmethod
    def from_dict(payload: dict) -> "NoiseSpec":
        return NoiseSpec(
            visibility=float(payload.get("visibility", 1.0)),
            state_fidelity_mix=float(payload.get("state_fidelity_mix", 1.0)),
        )

    def to_dict(self) -> dict:
        return {"visibility": self.visibility, "state_fidelity_mix": self.state_fidelity_mix}


class PureState:
    """Normalized complex amplitude vector over m registers of dimension D."""

    __slots__ = ("num_registers", "dim", "amplitudes")

    def __init__(
        self,
        num_registers: int,
        dim: int,
        amplitudes: np.ndarray,
        *,
        dim_cap: int = DEFAULT_DIM_CAP,
        renormalize: bool = False,
    ) -> None:
        if num_registers < 1 or dim < 1:
            raise ValueError("need at least one register of dimension one")
        if dim**num_registers > dim_cap:
            raise TooLargeForExact(f"{dim}^{num_registers} exceeds the dimension cap {dim_cap}")
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != dim**num_registers:
            raise ValueError(f"expected {dim**num_registers} amplitudes, got {amps.size}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > PURE_NORM_TOL:
            if not renormalize or norm == 0.0:
                raise ValueError(f"state norm {norm} is not 1 within {PURE_NORM_TOL}")
        if norm != 1.0 and norm > 0.0:
            amps = amps / norm
        self.num_registers = num_registers
        self.dim = dim
        self.amplitudes = amps

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.dim,) * self.num_registers)

    def density(self) -> "DensityState":
        return DensityState(self.num_registers, self.dim, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_json_dict(self) -> dict:
        return {
            "registers": self.num_registers,
            "dim": self.dim,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @staticmethod
    def from_json_dict(payload: dict) -> "PureState":
        amps = np.array([complex(re, im) for re, im in payload["amplitudes"]])
        return PureState(int(payload["registers"]), int(payload["dim"]), amps)


class DensityState:
    """Hermitian, positive, trace-one matrix over m registers of dimension D."""

    __slots__ = ("num_registers", "dim", "matrix")

    def __init__(
        self,
        num_registers: int,
        dim: int,
        matrix: np.ndarray,
        *,
        validate: bool = True,
    ) -> None:
        if dim**num_registers > DENSITY_DIM_CAP:
            raise TooLargeForExact(
                f"density matrices support joint dimension <= {DENSITY_DIM_CAP}"
            )
        full = dim**num_registers
        mat = np.asarray(matrix, dtype=np.complex128).reshape(full, full)
        if validate:
            if float(np.abs(mat - mat.conj().T).max()) > HERMITIAN_TOL:
                raise ValueError("matrix is not Hermitian within tolerance")
            tr = complex(np.trace(mat))
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"trace {tr} is not 1 within {TRACE_TOL}")
            if full <= _EAGER_PSD_LIMIT:
                low = float(np.linalg.eigvalsh(mat).min())
                if low < -PSD_TOL:
                    raise ValueError(f"minimum eigenvalue {low} below -{PSD_TOL}")
        self.num_registers = num_registers
        self.dim = dim
        self.matrix = mat

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape((self.dim,) * (2 * self.num_registers))

    def fidelity_to_pure(self, pure: PureState) -> float:
        return float(np.real(np.vdot(pure.amplitudes, self.matrix @ pure.amplitudes)))

    def to_json_dict(self) -> dict:
        return {
            "registers": self.num_registers,
            "dim": self.dim,
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
        }

    @staticmethod
    def from_json_dict(payload: dict) -> "DensityState":
        mat = np.array([[complex(re, im) for re, im in row] for row in payload["matrix"]])
        return DensityState(int(payload["registers"]), int(payload["dim"]), mat)


State = PureState | DensityState


@dataclass
class CoreOutcome:
    """Outcome probabilities and post-measurement register states.

    A post state is None when its branch has probability zero. Posts are
    pure for ideal pure inputs and density states otherwise.
    """

    p0: float
    p1: float
    post0: State | None
    post1: State | None


def _clamp(p: float, tol: float = 1e-12) -> float:
    if -tol <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + tol:
        return 1.0
    return p


def register_dim(group: FiniteGroup, junk_dims: int = 0) -> int:
    return group.order + junk_dims


def basis_state(group: FiniteGroup, g: int, junk_dims: int = 0) -> PureState:
    """The quantum label of a single group element."""
    amps = np.zeros(register_dim(group, junk_dims), dtype=np.complex128)
    amps[g] = 1.0
    return PureState(1, amps.size, amps)


def coset_proof_state(subgroup: Subgroup, alpha: int, junk_dims: int = 0) -> PureState:
    """Uniform superposition over the coset alpha*S on one register."""
    group = subgroup.group
    amps = np.zeros(register_dim(group, junk_dims), dtype=np.complex128)
    weight = 1.0 / np.sqrt(subgroup.size)
    for s in subgroup.elements:
        amps[group.mul(alpha, s)] = weight
    return PureState(1, amps.size, amps, renormalize=True)


def right_mult_permutation(group: FiniteGroup, g: int, junk_dims: int = 0) -> np.ndarray:
    """Index map of the right-multiplication unitary: label a goes to a*g.

    Junk dimensions are fixed points, which keeps the map a permutation;
    the protocol always span-checks first, so that extension is never
    observed.
    """
    d = register_dim(group, junk_dims)
    perm = np.arange(d, dtype=np.int64)
    perm[: group.order] = group.mult[:, g]
    return perm


def right_mult_unitary(group: FiniteGroup, g: int, junk_dims: int = 0) -> np.ndarray:
    """Dense permutation matrix for right multiplication by g."""
    perm = right_mult_permutation(group, g, junk_dims)
    d = perm.size
    mat = np.zeros((d, d), dtype=np.complex128)
    mat[perm, np.arange(d)] = 1.0
    return mat


def _apply_perm_pure(tensor: np.ndarray, perm: np.ndarray, axis: int) -> np.ndarray:
    # new[b] = old[perm^{-1}(b)] along the register axis
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return np.take(tensor, inv, axis=axis)


def apply_right_mult(state: PureState, register: int, group: FiniteGroup, g: int) -> PureState:
    """Apply the right-multiplication unitary to one register."""
    perm = right_mult_permutation(group, g, state.dim - group.order)
    tensor = _apply_perm_pure(state.tensor(), perm, register)
    return PureState(state.num_registers, state.dim, tensor.reshape(-1))


def _density_apply_perm(dense: np.ndarray, perm: np.ndarray, m: int, register: int,
                        dim: int, side: str) -> np.ndarray:
    tensor = dense.reshape((dim,) * (2 * m))
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    if side in ("ket", "both"):
        tensor = np.take(tensor, inv, axis=register)
    if side in ("bra", "both"):
        tensor = np.take(tensor, inv, axis=m + register)
    full = dim**m
    return tensor.reshape(full, full)


def span_projector(group: FiniteGroup, junk_dims: int = 0) -> np.ndarray:
    """Diagonal of the projector onto valid group labels."""
    diag = np.zeros(register_dim(group, junk_dims))
    diag[: group.order] = 1.0
    return diag


def _span_mask(state_dim: int, group: FiniteGroup, register: int, m: int, keep: bool) -> np.ndarray:
    mask = np.zeros(state_dim, dtype=bool)
    mask[: group.order] = True
    if not keep:
        mask = ~mask
    shape = [1] * m
    shape[register] = state_dim
    return mask.reshape(shape)


def span_branches(
    state: State, register: int, group: FiniteGroup
) -> tuple[float, State | None, State | None]:
    """Both branches of the valid-label projective measurement.

    Returns (pass probability, renormalized pass state, fail state).
    """
    if isinstance(state, PureState):
        tensor = state.tensor()
        keep = _span_mask(state.dim, group, register, state.num_registers, keep=True)
        passed = np.where(keep, tensor, 0.0)
        p_pass = _clamp(float(np.linalg.norm(passed) ** 2))
        failed = tensor - passed
        post_pass = (
            PureState(state.num_registers, state.dim, passed.reshape(-1), renormalize=True)
            if p_pass > 0.0
            else None
        )
        p_fail = 1.0 - p_pass
        post_fail = (
            PureState(state.num_registers, state.dim, failed.reshape(-1), renormalize=True)
            if p_fail > PURE_NORM_TOL
            else None
        )
        return p_pass, post_pass, post_fail

    m = state.num_registers
    tensor = state.tensor()
    keep = np.zeros(state.dim, dtype=bool)
    keep[: group.order] = True

    def project(t: np.ndarray, sel: np.ndarray) -> np.ndarray:
        shape_ket = [1] * (2 * m)
        shape_ket[register] = state.dim
        shape_bra = [1] * (2 * m)
        shape_bra[m + register] = state.dim
        mask = sel.reshape(shape_ket) & sel.reshape(shape_bra)
        return np.where(mask, t, 0.0)

    pass_tensor = project(tensor, keep)
    fail_tensor = project(tensor, ~keep)
    full = state.dim**m
    p_pass = _clamp(float(np.real(np.trace(pass_tensor.reshape(full, full)))))
    p_fail = _clamp(float(np.real(np.trace(fail_tensor.reshape(full, full)))))
    post_pass = (
        DensityState(m, state.dim, pass_tensor.reshape(full, full) / p_pass, validate=False)
        if p_pass > 0.0
        else None
    )
    post_fail = (
        DensityState(m, state.dim, fail_tensor.reshape(full, full) / p_fail, validate=False)
        if p_fail > 0.0
        else None
    )
    return p_pass, post_pass, post_fail


def span_check(
    state: State,
    register: int,
    group: FiniteGroup,
    rng: np.random.Generator,
    tol: float = 1e-12,
) -> tuple[bool, State]:
    """Sample the valid-label measurement; True means the state passed."""
    p_pass, post_pass, post_fail = span_branches(state, register, group)
    if rng.random() < p_pass:
        assert post_pass is not None
        return True, post_pass
    if post_fail is None:
        # p_pass was 1 up to roundoff; treat as a pass
        assert p_pass > 1.0 - tol and post_pass is not None
        return True, post_pass
    return False, post_fail


def mix_register(state: DensityState, register: int, group: FiniteGroup, fidelity: float) -> DensityState:
    """Werner mix of one register with the maximally mixed valid-label state."""
    if fidelity == 1.0:
        return state
    m = state.num_registers
    d = state.dim
    tensor = state.tensor()
    # partial trace over the register, then re-tensor with P_span/N
    traced = np.trace(tensor, axis1=register, axis2=m + register)
    mixed = np.zeros_like(tensor)
    diag = span_projector(group, d - group.order) / group.order
    for k in np.flatnonzero(diag > 0):
        sl: list = [slice(None)] * (2 * m)
        sl[register] = k
        sl[m + register] = k
        mixed[tuple(sl)] = diag[k] * traced
    full = d**m
    out = fidelity * state.matrix + (1.0 - fidelity) * mixed.reshape(full, full)
    return DensityState(m, d, out, validate=False)


def apply_noise(state: State, group: FiniteGroup, noise: NoiseSpec) -> DensityState:
    """Werner mix of the whole state with the maximally mixed span state.

    Only `state_fidelity_mix` acts here; visibility belongs to the core
    circuit, not the state.
    """
    rho = state.density() if isinstance(state, PureState) else state
    f = noise.state_fidelity_mix
    if f == 1.0:
        return rho
    diag = span_projector(group, rho.dim - group.order) / group.order
    mixed = np.ones(1)
    for _ in range(rho.num_registers):
        mixed = np.kron(mixed, diag)
    out = f * rho.matrix + (1.0 - f) * np.diag(mixed.astype(np.complex128))
    return DensityState(rho.num_registers, rho.dim, out, validate=False)


def core_circuit(
    state: State,
    register: int,
    group: FiniteGroup,
    g: int,
    noise: NoiseSpec | None = None,
) -> CoreOutcome:
    """Run the control-qubit interference circuit against one register.

    Outcome 0 keeps the (psi + M psi)/2 branch, outcome 1 the
    (psi - M psi)/2 branch. With noise, the input register is first
    Werner-mixed per `state_fidelity_mix` and the outcome distribution is
    damped toward a fair coin per `visibility`; both posts then become
    density states.
    """
    ideal = noise is None or noise.is_trivial
    if isinstance(state, PureState) and ideal:
        perm = right_mult_permutation(group, g, state.dim - group.order)
        tensor = state.tensor()
        moved = _apply_perm_pure(tensor, perm, register)
        plus = 0.5 * (tensor + moved)
        minus = 0.5 * (tensor - moved)
        p0 = _clamp(float(np.linalg.norm(plus) ** 2))
        p1 = _clamp(float(np.linalg.norm(minus) ** 2))
        post0 = (
            PureState(state.num_registers, state.dim, plus.reshape(-1), renormalize=True)
            if p0 > 0.0
            else None
        )
        post1 = (
            PureState(state.num_registers, state.dim, minus.reshape(-1), renormalize=True)
            if p1 > 0.0
            else None
        )
        return CoreOutcome(p0=p0, p1=p1, post0=post0, post1=post1)

    rho = state.density() if isinstance(state, PureState) else state
    v = 1.0 if noise is None else noise.visibility
    f = 1.0 if noise is None else noise.state_fidelity_mix
    if f != 1.0:
        rho = mix_register(rho, register, group, f)
    m = rho.num_registers
    d = rho.dim
    perm = right_mult_permutation(group, g, d - group.order)
    mat = rho.matrix
    ket = _density_apply_perm(mat, perm, m, register, d, "ket")        # M rho
    both = _density_apply_perm(ket, perm, m, register, d, "bra")       # M rho M+
    bra = _density_apply_perm(mat, perm, m, register, d, "bra")        # rho M+
    sym = ket + bra
    post0_raw = 0.25 * (mat + both + v * sym)
    post1_raw = 0.25 * (mat + both - v * sym)
    p0 = _clamp(float(np.real(np.trace(post0_raw))))
    p1 = _clamp(float(np.real(np.trace(post1_raw))))
    post0 = DensityState(m, d, post0_raw / p0, validate=False) if p0 > 0.0 else None
    post1 = DensityState(m, d, post1_raw / p1, validate=False) if p1 > 0.0 else None
    return CoreOutcome(p0=p0, p1=p1, post0=post0, post1=post1)


def core_probability_closed_form(state: PureState, group: FiniteGroup, g: int) -> float:
    """Outcome-1 probability from the amplitude autocorrelation sum.

    Valid for a single register supported on the group labels:
    p = (1 - sum_a Re(conj(beta_a) * beta_{a g^-1})) / 2.
    """
    if state.num_registers != 1:
        raise ValueError("closed form applies to single-register states")
    beta = state.amplitudes[: group.order]
    shifted = beta[group.mult[:, group.inv(g)]]
    corr = float(np.sum(np.real(np.conj(beta) * shifted)))
    return _clamp(0.5 * (1.0 - corr))


def haar_random_pure(
    num_registers: int,
    dim: int,
    rng: np.random.Generator,
    *,
    span_dim: int | None = None,
) -> PureState:
    """Random pure state; `span_dim` restricts support to the first block."""
    full = dim**num_registers
    amps = rng.normal(size=full) + 1j * rng.normal(size=full)
    if span_dim is not None and span_dim < dim:
        tensor = amps.reshape((dim,) * num_registers)
        for axis in range(num_registers):
            sl = [slice(None)] * num_registers
            sl[axis] = slice(span_dim, dim)
            tensor[tuple(sl)] = 0.0
        amps = tensor.reshape(-1)
    return PureState(num_registers, dim, amps, renormalize=True)
