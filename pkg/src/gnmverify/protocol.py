"""Verification protocol engines.

The protocol sends m registers, tests m-1 of them with a sampled
subgroup element each (span check, then the core circuit, pass on
outcome 0), and uses the randomly reserved register for the actual
non-membership check (span check, then the core circuit with the
queried element, accept on outcome 1).

Three evaluation routes are provided and cross-checked in the tests:

* `monte_carlo` samples seeded trials of the real measurement process;
* `exact_accept_probability` enumerates reserved indices, sampled
  elements, and measurement branches through the channel simulator;
* `build_accept_operator` composes the single-register POVM elements
  into one acceptance operator E with Tr(E rho) equal to the acceptance
  probability, whose largest eigenvalue is the optimal cheat value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import StrategyDimensionMismatch, TooLargeForExact
from .groups import FiniteGroup, Subgroup
from .qsim import (
    DEFAULT_DIM_CAP,
    DensityState,
    NoiseSpec,
    PureState,
    State,
    basis_state,
    core_circuit,
    coset_proof_state,
    register_dim,
    right_mult_unitary,
    span_branches,
    span_check,
    span_projector,
)
from .rng import stream
from .sampling import SamplerSpec, sample_array, sampler_distribution

DENSE_EIG_LIMIT = 4096
ENUM_MAX_BRANCHES = 4096
POWER_ITER_MAX = 200_000


# ---------------------------------------------------------------------------
# Strategies and configuration


@dataclass(frozen=True)
class HonestCoset:
    """m copies of the uniform coset superposition alpha*S."""

    alpha: int | None = None


@dataclass(frozen=True)
class BasisBogus:
    """m copies of a single group-element label."""

    element: int


@dataclass(frozen=True, eq=False)
class PureBogus:
    """m copies of an arbitrary single-register pure state."""

    amplitudes: np.ndarray


@dataclass(frozen=True, eq=False)
class ProductJoint:
    """Independent single-register states, one per register."""

    states: tuple[PureState, ...]


@dataclass(frozen=True, eq=False)
class ArbitraryJoint:
    """A full joint state over all m registers, possibly entangled or mixed."""

    state: State


@dataclass(frozen=True)
class OptimalAdversary:
    """The joint state maximizing acceptance, found by eigensolving."""


ProverStrategy = (
    HonestCoset | BasisBogus | PureBogus | ProductJoint | ArbitraryJoint | OptimalAdversary
)


def describe_strategy(strategy: ProverStrategy, group: FiniteGroup) -> str:
    if isinstance(strategy, HonestCoset):
        alpha = group.identity if strategy.alpha is None else strategy.alpha
        return f"honest coset state, alpha={group.name_of(alpha)}"
    if isinstance(strategy, BasisBogus):
        return f"basis bogus |{group.name_of(strategy.element)}>"
    if isinstance(strategy, PureBogus):
        return "pure bogus (custom single-register amplitudes)"
    if isinstance(strategy, ProductJoint):
        return f"product of {len(strategy.states)} single-register states"
    if isinstance(strategy, ArbitraryJoint):
        kind = "density" if isinstance(strategy.state, DensityState) else "pure"
        return f"arbitrary joint {kind} state"
    return "optimal adversary (top eigenvector of the acceptance operator)"


@dataclass(frozen=True)
class ProtocolConfig:
    """Run parameters shared by every engine."""

    m: int
    sampler: SamplerSpec = field(default_factory=SamplerSpec)
    noise: NoiseSpec | None = None
    junk_dims: int = 0
    seed: int = 0
    trials: int = 10_000
    test_elements: str = "all"  # "all" follows the sampler; "nonidentity" conditions on s != e
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("the protocol needs at least two registers")
        if self.junk_dims < 0:
            raise ValueError("junk_dims must be non-negative")
        if self.test_elements not in ("all", "nonidentity"):
            raise ValueError("test_elements must be 'all' or 'nonidentity'")
        if self.trials < 1:
            raise ValueError("trials must be positive")


@dataclass(frozen=True)
class TrialRecord:
    """One protocol run. Bits follow the circuit convention: test outcome
    0 means pass, prove outcome 1 claims non-membership. `span_outcomes`
    holds one bit per register in register order (1 = valid label), with
    the reserved register's entry taken at the prove step. A record with
    reserved_index -1 marks the immediate rejection of the identity
    query."""

    reserved_index: int
    test_outcomes: tuple[int, ...]
    sampled_elements: tuple[int | None, ...]
    span_outcomes: tuple[int, ...]
    prove_outcome: int
    accepted: bool


@dataclass(frozen=True)
class TestChannelResult:
    bit: int
    state: State
    element: int | None
    span_passed: bool


@dataclass
class MonteCarloResult:
    accept_rate: float
    std_error: float
    trials: int
    rsi_accept_rate: float
    reserved_span_rate: float
    prove_one_rate: float
    records: list[TrialRecord] | None = None


# ---------------------------------------------------------------------------
# Shared helpers


def test_distribution(subgroup: Subgroup, config: ProtocolConfig) -> np.ndarray:
    """Probability of each subgroup element being the test multiplier."""
    dist = sampler_distribution(subgroup, config.sampler)
    if config.test_elements == "nonidentity":
        dist = dist.copy()
        pos = subgroup.elements.index(subgroup.group.identity)
        dist[pos] = 0.0
        total = dist.sum()
        if total <= 0.0:
            raise ValueError("cannot exclude the identity from the trivial subgroup")
        dist /= total
    return dist


def _draw_test_element(subgroup: Subgroup, config: ProtocolConfig, rng: np.random.Generator) -> int:
    return int(
        sample_array(
            subgroup,
            config.sampler,
            rng,
            1,
            exclude_identity=config.test_elements == "nonidentity",
        )[0]
    )


def materialize_strategy(
    strategy: ProverStrategy,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> State:
    """Build the m-register state a strategy submits."""
    group = subgroup.group
    dim = register_dim(group, config.junk_dims)

    def power(single: PureState) -> PureState:
        amps = reduce(np.kron, [single.amplitudes] * config.m)
        return PureState(config.m, dim, amps, dim_cap=config.dim_cap, renormalize=True)

    if isinstance(strategy, HonestCoset):
        alpha = group.identity if strategy.alpha is None else strategy.alpha
        return power(coset_proof_state(subgroup, alpha, config.junk_dims))
    if isinstance(strategy, BasisBogus):
        return power(basis_state(group, strategy.element, config.junk_dims))
    if isinstance(strategy, PureBogus):
        if np.asarray(strategy.amplitudes).size != dim:
            raise StrategyDimensionMismatch(
                f"expected {dim} amplitudes, got {np.asarray(strategy.amplitudes).size}"
            )
        return power(PureState(1, dim, strategy.amplitudes, renormalize=True))
    if isinstance(strategy, ProductJoint):
        if len(strategy.states) != config.m:
            raise StrategyDimensionMismatch(f"need {config.m} states, got {len(strategy.states)}")
        for st in strategy.states:
            if st.num_registers != 1 or st.dim != dim:
                raise StrategyDimensionMismatch("product factors must be single registers of the run dimension")
        amps = reduce(np.kron, [st.amplitudes for st in strategy.states])
        return PureState(config.m, dim, amps, dim_cap=config.dim_cap, renormalize=True)
    if isinstance(strategy, ArbitraryJoint):
        st = strategy.state
        if st.num_registers != config.m or st.dim != dim:
            raise StrategyDimensionMismatch(
                f"joint state has shape ({st.num_registers}, {st.dim}), run needs ({config.m}, {dim})"
            )
        return st
    if isinstance(strategy, OptimalAdversary):
        op = build_accept_operator(g, subgroup, config)
        _, vec = op.lambda_max()
        return PureState(config.m, dim, vec, dim_cap=config.dim_cap, renormalize=True)
    raise TypeError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Sampled protocol (one trial at a time)


def test_channel(
    state: State,
    register: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
    rng: np.random.Generator,
) -> TestChannelResult:
    """Apply the test channel to one register of the joint state.

    Output bit 0 means pass. A register that fails the valid-label check
    outputs 1 immediately and no element is sampled.
    """
    group = subgroup.group
    passed, state = span_check(state, register, group, rng)
    if not passed:
        return TestChannelResult(bit=1, state=state, element=None, span_passed=False)
    s = _draw_test_element(subgroup, config, rng)
    out = core_circuit(state, register, group, s, config.noise)
    if rng.random() < out.p0:
        assert out.post0 is not None
        return TestChannelResult(bit=0, state=out.post0, element=s, span_passed=True)
    assert out.post1 is not None
    return TestChannelResult(bit=1, state=out.post1, element=s, span_passed=True)


@dataclass(frozen=True)
class RsiResult:
    accepted: bool
    reserved_index: int
    state: State
    test_outcomes: tuple[int, ...]
    sampled_elements: tuple[int | None, ...]
    span_outcomes: tuple[int, ...]


def rsi(
    state: State,
    subgroup: Subgroup,
    config: ProtocolConfig,
    rng: np.random.Generator,
) -> RsiResult:
    """Random state inspection: test every register except a reserved one."""
    m = config.m
    reserved = int(rng.integers(m))
    bits: list[int] = []
    elements: list[int | None] = []
    spans: list[int] = []
    for j in range(m):
        if j == reserved:
            continue
        res = test_channel(state, j, subgroup, config, rng)
        state = res.state
        bits.append(res.bit)
        elements.append(res.element)
        spans.append(1 if res.span_passed else 0)
    return RsiResult(
        accepted=all(b == 0 for b in bits),
        reserved_index=reserved,
        state=state,
        test_outcomes=tuple(bits),
        sampled_elements=tuple(elements),
        span_outcomes=tuple(spans),
    )


def _short_circuit_record() -> TrialRecord:
    return TrialRecord(
        reserved_index=-1,
        test_outcomes=(),
        sampled_elements=(),
        span_outcomes=(),
        prove_outcome=0,
        accepted=False,
    )


def verify_gnm(
    strategy: ProverStrategy,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
    rng: np.random.Generator,
) -> TrialRecord:
    """One full verification trial."""
    group = subgroup.group
    if g == group.identity:
        # the identity is in every subgroup, so the verifier rejects outright
        return _short_circuit_record()
    state = materialize_strategy(strategy, g, subgroup, config)
    inspected = rsi(state, subgroup, config, rng)
    state = inspected.state
    span_ok, state = span_check(state, inspected.reserved_index, group, rng)
    if span_ok:
        out = core_circuit(state, inspected.reserved_index, group, g, config.noise)
        prove = 1 if rng.random() < out.p1 else 0
    else:
        prove = 0
    spans = list(inspected.span_outcomes)
    spans.insert(inspected.reserved_index, 1 if span_ok else 0)
    return TrialRecord(
        reserved_index=inspected.reserved_index,
        test_outcomes=inspected.test_outcomes,
        sampled_elements=inspected.sampled_elements,
        span_outcomes=tuple(spans),
        prove_outcome=prove,
        accepted=inspected.accepted and span_ok and prove == 1,
    )


# ---------------------------------------------------------------------------
# Exact enumeration engine


def _single_register_profile(
    state: PureState | DensityState,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> tuple[float, np.ndarray, float]:
    """(span pass prob, outcome-0 prob per sampled element, prove-1 prob)
    for one register, conditioned on the span check passing."""
    group = subgroup.group
    p_span, post, _ = span_branches(state, 0, group)
    if p_span == 0.0 or post is None:
        return 0.0, np.zeros(len(subgroup.elements)), 0.0
    q0 = np.array(
        [core_circuit(post, 0, group, s, config.noise).p0 for s in subgroup.elements]
    )
    prove = core_circuit(post, 0, group, g, config.noise).p1
    return p_span, q0, prove


def _product_registers(
    strategy: ProverStrategy,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> list[PureState] | None:
    """Single-register factors for product strategies, else None."""
    group = subgroup.group
    dim = register_dim(group, config.junk_dims)
    if isinstance(strategy, HonestCoset):
        alpha = group.identity if strategy.alpha is None else strategy.alpha
        return [coset_proof_state(subgroup, alpha, config.junk_dims)] * config.m
    if isinstance(strategy, BasisBogus):
        return [basis_state(group, strategy.element, config.junk_dims)] * config.m
    if isinstance(strategy, PureBogus):
        if np.asarray(strategy.amplitudes).size != dim:
            raise StrategyDimensionMismatch(
                f"expected {dim} amplitudes, got {np.asarray(strategy.amplitudes).size}"
            )
        return [PureState(1, dim, strategy.amplitudes, renormalize=True)] * config.m
    if isinstance(strategy, ProductJoint):
        if len(strategy.states) != config.m:
            raise StrategyDimensionMismatch(f"need {config.m} states, got {len(strategy.states)}")
        for st in strategy.states:
            if st.num_registers != 1 or st.dim != dim:
                raise StrategyDimensionMismatch(
                    "product factors must be single registers of the run dimension"
                )
        return list(strategy.states)
    return None


def _exact_product(
    registers: Sequence[PureState],
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> float:
    dist = test_distribution(subgroup, config)
    t_pass: list[float] = []
    prove1: list[float] = []
    for st in registers:
        p_span, q0, prove = _single_register_profile(st, g, subgroup, config)
        t_pass.append(p_span * float(np.dot(dist, q0)))
        prove1.append(p_span * prove)
    m = config.m
    total = 0.0
    for r in range(m):
        term = prove1[r]
        for j in range(m):
            if j != r:
                term *= t_pass[j]
        total += term
    return total / m


def _exact_joint(
    joint: State,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> float:
    group = subgroup.group
    elems = subgroup.elements
    dist = test_distribution(subgroup, config)
    m = config.m
    branches = len(elems) ** (m - 1)
    if branches > ENUM_MAX_BRANCHES:
        raise TooLargeForExact(
            f"{branches} sampled-element tuples exceed the enumeration limit {ENUM_MAX_BRANCHES}"
        )
    total = 0.0
    for reserved in range(m):
        tested = [j for j in range(m) if j != reserved]
        for combo in itertools.product(range(len(elems)), repeat=m - 1):
            weight = float(np.prod(dist[list(combo)])) if combo else 1.0
            if weight == 0.0:
                continue
            prob = 1.0
            state: State | None = joint
            for j, si in zip(tested, combo):
                p_span, state, _ = span_branches(state, j, group)
                prob *= p_span
                if prob == 0.0 or state is None:
                    break
                out = core_circuit(state, j, group, elems[si], config.noise)
                prob *= out.p0
                state = out.post0
                if prob == 0.0 or state is None:
                    break
            else:
                p_span, state, _ = span_branches(state, reserved, group)
                prob *= p_span
                if prob > 0.0 and state is not None:
                    out = core_circuit(state, reserved, group, g, config.noise)
                    prob *= out.p1
                else:
                    prob = 0.0
                total += weight * prob
    return total / m


def exact_accept_probability(
    strategy: ProverStrategy,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> float:
    """Acceptance probability by exhaustive enumeration of the protocol.

    Sums over the reserved index, every tuple of sampled elements, and
    every measurement branch, walking the actual channel simulator. This
    is the Monte Carlo limit and is independent of the operator engine.
    """
    group = subgroup.group
    dim = register_dim(group, config.junk_dims)
    if dim**config.m > config.dim_cap:
        raise TooLargeForExact(f"{dim}^{config.m} exceeds the dimension cap {config.dim_cap}")
    if g == group.identity:
        return 0.0
    registers = _product_registers(strategy, subgroup, config)
    if registers is not None:
        return _exact_product(registers, g, subgroup, config)
    joint = materialize_strategy(strategy, g, subgroup, config)
    return _exact_joint(joint, g, subgroup, config)


# ---------------------------------------------------------------------------
# Acceptance operator engine


def _core_povm_element(
    group: FiniteGroup,
    g: int,
    junk_dims: int,
    outcome: int,
    noise: NoiseSpec | None,
) -> np.ndarray:
    """Effective POVM element of the core circuit for one outcome,
    including the visibility damping and the preparation mix."""
    d = register_dim(group, junk_dims)
    eye = np.eye(d, dtype=np.complex128)
    mat = right_mult_unitary(group, g, junk_dims)
    half = 0.5 * (eye + mat) if outcome == 0 else 0.5 * (eye - mat)
    element = half.conj().T @ half
    if noise is not None and noise.visibility != 1.0:
        element = (1.0 - noise.visibility) * 0.5 * eye + noise.visibility * element
    if noise is not None and noise.state_fidelity_mix != 1.0:
        f = noise.state_fidelity_mix
        proj = np.diag(span_projector(group, junk_dims)).astype(np.complex128)
        mixed_weight = float(np.real(np.trace(element @ proj))) / group.order
        element = f * element + (1.0 - f) * mixed_weight * eye
    return element


def _span_conjugate(element: np.ndarray, group: FiniteGroup, junk_dims: int) -> np.ndarray:
    diag = span_projector(group, junk_dims)
    return element * np.outer(diag, diag)


def test_pass_operator(subgroup: Subgroup, config: ProtocolConfig) -> np.ndarray:
    """Single-register POVM element of 'the test channel outputs 0'."""
    group = subgroup.group
    dist = test_distribution(subgroup, config)
    d = register_dim(group, config.junk_dims)
    acc = np.zeros((d, d), dtype=np.complex128)
    for pi, s in zip(dist, subgroup.elements):
        if pi == 0.0:
            continue
        acc += pi * _core_povm_element(group, s, config.junk_dims, 0, config.noise)
    return _span_conjugate(acc, group, config.junk_dims)


def prove_operator(group: FiniteGroup, g: int, config: ProtocolConfig) -> np.ndarray:
    """Single-register POVM element of 'the prove step outputs 1'."""
    element = _core_povm_element(group, g, config.junk_dims, 1, config.noise)
    return _span_conjugate(element, group, config.junk_dims)


def _apply_axis(tensor: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    moved = np.tensordot(op, tensor, axes=([1], [axis]))
    return np.moveaxis(moved, 0, axis)


class AcceptOperator:
    """E = (1/m) sum_r [tensor_{j!=r} T] (x) B_r with T the test-pass
    element and B the prove element; Tr(E rho) is the acceptance
    probability of the joint prover state rho."""

    def __init__(self, m: int, dim: int, test_op: np.ndarray, prove_op: np.ndarray):
        self.m = m
        self.dim = dim
        self.test_op = test_op
        self.prove_op = prove_op

    @property
    def full_dim(self) -> int:
        return self.dim**self.m

    def apply(self, vec: np.ndarray) -> np.ndarray:
        tensor = np.asarray(vec, dtype=np.complex128).reshape((self.dim,) * self.m)
        acc = np.zeros_like(tensor)
        for r in range(self.m):
            term = tensor
            for j in range(self.m):
                term = _apply_axis(term, self.prove_op if j == r else self.test_op, j)
            acc = acc + term
        return (acc / self.m).reshape(-1)

    def expectation(self, state: State) -> float:
        if isinstance(state, PureState):
            out = self.apply(state.amplitudes)
            return float(np.real(np.vdot(state.amplitudes, out)))
        total = 0.0
        tensor = state.tensor()
        for r in range(self.m):
            term = tensor
            for j in range(self.m):
                term = _apply_axis(term, self.prove_op if j == r else self.test_op, j)
            full = state.dim**self.m
            total += float(np.real(np.trace(term.reshape(full, full))))
        return total / self.m

    def dense(self) -> np.ndarray:
        if self.full_dim > DENSE_EIG_LIMIT:
            raise TooLargeForExact(
                f"dense operator dimension {self.full_dim} exceeds {DENSE_EIG_LIMIT}"
            )
        acc = np.zeros((self.full_dim, self.full_dim), dtype=np.complex128)
        for r in range(self.m):
            factors = [self.prove_op if j == r else self.test_op for j in range(self.m)]
            acc += reduce(np.kron, factors)
        return acc / self.m

    def lambda_max(self, tol: float = 1e-9) -> tuple[float, np.ndarray]:
        """Largest eigenvalue and eigenvector of E.

        Dense Hermitian solve up to dimension 4096, power iteration with
        deflation beyond that.
        """
        n = self.full_dim
        if n <= DENSE_EIG_LIMIT:
            mat = self.dense()
            if n <= 1024:
                vals, vecs = np.linalg.eigh(mat)
                return float(vals[-1]), vecs[:, -1]
            # the subset drivers can return nothing on degenerate top
            # clusters; fall back through evx and the full solve
            for driver in ("evr", "evx"):
                vals, vecs = scipy.linalg.eigh(mat, subset_by_index=[n - 1, n - 1], driver=driver)
                if vals.size:
                    return float(vals[0]), vecs[:, 0]
            vals, vecs = np.linalg.eigh(mat)
            return float(vals[-1]), vecs[:, -1]
        vals, vecs = power_iteration_topk(self.apply, n, k=1, tol=tol)
        return vals[0], vecs[0]


def power_iteration_topk(
    apply_fn,
    dim: int,
    k: int = 1,
    tol: float = 1e-9,
    max_iter: int = POWER_ITER_MAX,
    seed: int = 0,
) -> tuple[list[float], list[np.ndarray]]:
    """Top-k eigenpairs of a PSD Hermitian operator by power iteration,
    deflating each converged eigenvector out of the next run."""
    rng = stream(seed, dim, k)
    found_vals: list[float] = []
    found_vecs: list[np.ndarray] = []

    def deflated(vec: np.ndarray) -> np.ndarray:
        for u in found_vecs:
            vec = vec - np.vdot(u, vec) * u
        return vec

    for _ in range(k):
        vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        vec = deflated(vec)
        vec /= np.linalg.norm(vec)
        last = np.inf
        for _ in range(max_iter):
            nxt = deflated(apply_fn(vec))
            norm = float(np.linalg.norm(nxt))
            if norm == 0.0:
                last = 0.0
                break
            nxt /= norm
            rayleigh = float(np.real(np.vdot(nxt, apply_fn(nxt))))
            if abs(rayleigh - last) <= tol * max(1.0, abs(rayleigh)):
                vec = nxt
                last = rayleigh
                break
            vec = nxt
            last = rayleigh
        found_vals.append(float(last) if np.isfinite(last) else 0.0)
        found_vecs.append(vec)
    return found_vals, found_vecs


def build_accept_operator(g: int, subgroup: Subgroup, config: ProtocolConfig) -> AcceptOperator:
    """Acceptance operator for querying g under the configured run.

    The identity short circuit is a protocol rule, not a circuit
    property, so it is applied by the callers and not folded in here.
    """
    group = subgroup.group
    dim = register_dim(group, config.junk_dims)
    if dim**config.m > config.dim_cap:
        raise TooLargeForExact(f"{dim}^{config.m} exceeds the dimension cap {config.dim_cap}")
    return AcceptOperator(
        m=config.m,
        dim=dim,
        test_op=test_pass_operator(subgroup, config),
        prove_op=prove_operator(group, g, config),
    )


def optimal_cheat_probability(g: int, subgroup: Subgroup, config: ProtocolConfig) -> float:
    """Supremum of acceptance over all prover states for a member query."""
    group = subgroup.group
    if not subgroup.contains(g):
        raise ValueError("optimal cheating is defined for elements inside the subgroup")
    if g == group.identity:
        return 0.0
    value, _ = build_accept_operator(g, subgroup, config).lambda_max()
    return value


# ---------------------------------------------------------------------------
# Reserved-register statistics (exact)


@dataclass(frozen=True)
class ReservedStatistics:
    """Exact pass probabilities of one inspection round."""

    rsi_pass: float
    reserved_and_rsi_pass: float

    @property
    def conditional_reserved_pass(self) -> float:
        return self.reserved_and_rsi_pass / self.rsi_pass


def reserved_register_statistics(
    joint: State,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> ReservedStatistics:
    """Pr(inspection passes) and Pr(inspection passes AND the reserved
    register would itself pass the test channel)."""
    t_op = test_pass_operator(subgroup, config)
    m = config.m
    if isinstance(joint, PureState):
        tensor = joint.tensor()

        def expect(ops: list[np.ndarray | None]) -> float:
            term = tensor
            for axis, op in enumerate(ops):
                if op is not None:
                    term = _apply_axis(term, op, axis)
            return float(np.real(np.vdot(tensor, term)))

    else:
        tensor = joint.tensor()
        full = joint.dim**m

        def expect(ops: list[np.ndarray | None]) -> float:
            term = tensor
            for axis, op in enumerate(ops):
                if op is not None:
                    term = _apply_axis(term, op, axis)
            return float(np.real(np.trace(term.reshape(full, full))))

    rsi_pass = 0.0
    for r in range(m):
        ops: list[np.ndarray | None] = [t_op] * m
        ops[r] = None
        rsi_pass += expect(ops)
    rsi_pass /= m
    joint_pass = expect([t_op] * m)
    return ReservedStatistics(rsi_pass=rsi_pass, reserved_and_rsi_pass=joint_pass)


# ---------------------------------------------------------------------------
# Monte Carlo engine


def _identical_product_state(
    strategy: ProverStrategy,
    subgroup: Subgroup,
    config: ProtocolConfig,
) -> PureState | None:
    group = subgroup.group
    dim = register_dim(group, config.junk_dims)
    if isinstance(strategy, HonestCoset):
        alpha = group.identity if strategy.alpha is None else strategy.alpha
        return coset_proof_state(subgroup, alpha, config.junk_dims)
    if isinstance(strategy, BasisBogus):
        return basis_state(group, strategy.element, config.junk_dims)
    if isinstance(strategy, PureBogus):
        return PureState(1, dim, strategy.amplitudes, renormalize=True)
    return None


def _monte_carlo_fast(
    single: PureState,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
    keep_records: bool,
) -> MonteCarloResult:
    """Vectorized trials for m identical unentangled registers.

    Measuring one register of a product state never disturbs the others,
    so every outcome is an independent Bernoulli draw from per-register
    probabilities computed once up front.
    """
    group = subgroup.group
    rng = stream(config.seed, 0)
    trials = config.trials
    m = config.m
    p_span, q0, prove1 = _single_register_profile(single, g, subgroup, config)

    reserved = rng.integers(m, size=trials)
    n_tested = m - 1
    span_pass = rng.random(size=(trials, n_tested)) < p_span
    sampled = sample_array(
        subgroup,
        config.sampler,
        rng,
        trials * n_tested,
        exclude_identity=config.test_elements == "nonidentity",
    ).reshape(trials, n_tested)
    pos_of = {e: i for i, e in enumerate(subgroup.elements)}
    pos_lookup = np.zeros(group.order, dtype=np.int64)
    for e, i in pos_of.items():
        pos_lookup[e] = i
    core0 = rng.random(size=(trials, n_tested)) < q0[pos_lookup[sampled]]
    test_pass = span_pass & core0
    rsi_ok = test_pass.all(axis=1)

    res_span = rng.random(size=trials) < p_span
    prove_bit = (rng.random(size=trials) < prove1) & res_span
    accepted = rsi_ok & prove_bit

    records: list[TrialRecord] | None = None
    if keep_records:
        records = []
        for t in range(trials):
            spans = [1 if span_pass[t, i] else 0 for i in range(n_tested)]
            spans.insert(int(reserved[t]), 1 if res_span[t] else 0)
            records.append(
                TrialRecord(
                    reserved_index=int(reserved[t]),
                    test_outcomes=tuple(0 if test_pass[t, i] else 1 for i in range(n_tested)),
                    sampled_elements=tuple(
                        int(sampled[t, i]) if span_pass[t, i] else None for i in range(n_tested)
                    ),
                    span_outcomes=tuple(spans),
                    prove_outcome=1 if prove_bit[t] else 0,
                    accepted=bool(accepted[t]),
                )
            )
    rate = float(accepted.mean())
    return MonteCarloResult(
        accept_rate=rate,
        std_error=float(np.sqrt(max(rate * (1.0 - rate), 0.0) / trials)),
        trials=trials,
        rsi_accept_rate=float(rsi_ok.mean()),
        reserved_span_rate=float(res_span.mean()),
        prove_one_rate=float(prove_bit.mean()),
        records=records,
    )


def monte_carlo(
    strategy: ProverStrategy,
    g: int,
    subgroup: Subgroup,
    config: ProtocolConfig,
    keep_records: bool = False,
) -> MonteCarloResult:
    """Seeded Monte Carlo estimate of the acceptance probability.

    Identical-copy product strategies use a vectorized path; entangled or
    per-register-distinct strategies replay the full sequential protocol
    with one split random stream per trial.
    """
    group = subgroup.group
    if g == group.identity:
        records = [_short_circuit_record() for _ in range(config.trials)] if keep_records else None
        return MonteCarloResult(0.0, 0.0, config.trials, 0.0, 0.0, 0.0, records)
    single = _identical_product_state(strategy, subgroup, config)
    if single is not None:
        return _monte_carlo_fast(single, g, subgroup, config, keep_records)

    records = []
    accept = rsi_ok = res_span = prove_one = 0
    for t in range(config.trials):
        record = verify_gnm(strategy, g, subgroup, config, stream(config.seed, 1, t))
        if keep_records:
            records.append(record)
        accept += record.accepted
        rsi_ok += all(b == 0 for b in record.test_outcomes)
        if record.reserved_index >= 0:
            res_span += record.span_outcomes[record.reserved_index]
        prove_one += record.prove_outcome
    trials = config.trials
    rate = accept / trials
    return MonteCarloResult(
        accept_rate=rate,
        std_error=float(np.sqrt(max(rate * (1.0 - rate), 0.0) / trials)),
        trials=trials,
        rsi_accept_rate=rsi_ok / trials,
        reserved_span_rate=res_span / trials,
        prove_one_rate=prove_one / trials,
        records=records if keep_records else None,
    )
