"""Random sampling of subgroup elements from generator sets.

Two samplers are provided. `exact-uniform` draws from the enumerated
closure and is the default for protocol runs. `babai-subproduct` draws a
random subproduct over the generator pool: the pool is the generator
list repeated cyclically to a configured length, and each pool entry is
multiplied in with an independent fair coin. Membership in the closure
is guaranteed by construction; closeness to uniform is measured, not
proven, and `calibrate_subproduct_length` records the shortest pool that
meets a target total-variation distance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import TooLargeForExact
from .groups import Subgroup
from .rng import stream

EXACT_DISTRIBUTION_MAX_SIZE = 256
EXACT_DISTRIBUTION_MAX_LENGTH = 24


class SamplerKind(str, Enum):
    EXACT_UNIFORM = "exact-uniform"
    BABAI_SUBPRODUCT = "babai-subproduct"


_KIND_ALIASES = {
    "exact-uniform": SamplerKind.EXACT_UNIFORM,
    "exactuniform": SamplerKind.EXACT_UNIFORM,
    "babai-subproduct": SamplerKind.BABAI_SUBPRODUCT,
    "babaisubproduct": SamplerKind.BABAI_SUBPRODUCT,
}


def parse_sampler_kind(text: str) -> SamplerKind:
    key = text.strip().lower().replace("_", "-")
    try:
        return _KIND_ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown sampler kind {text!r}") from None


@dataclass(frozen=True)
class SamplerSpec:
    """Configuration of the subgroup-element sampler.

    `epsilon` is the target deviation from uniform for the subproduct
    sampler (defaults downstream to 1/2^(2n) for the ambient group);
    `subproduct_length` is the pool length.
    """

    kind: SamplerKind = SamplerKind.EXACT_UNIFORM
    epsilon: float | None = None
    subproduct_length: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.subproduct_length < 1:
            raise ValueError("subproduct_length must be at least 1")

    @staticmethod
    def from_dict(payload: dict) -> "SamplerSpec":
        return SamplerSpec(
            kind=parse_sampler_kind(payload.get("kind", "exact-uniform")),
            epsilon=payload.get("epsilon"),
            subproduct_length=int(payload.get("length", payload.get("subproduct_length", 16))),
            seed=int(payload.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "epsilon": self.epsilon,
            "length": self.subproduct_length,
            "seed": self.seed,
        }


def _pool(subgroup: Subgroup, length: int) -> list[int]:
    gens = list(subgroup.generators)
    if not gens:
        gens = [subgroup.group.identity]
    return [gens[i % len(gens)] for i in range(length)]


def exact_uniform_sample(subgroup: Subgroup, rng: np.random.Generator) -> int:
    """One uniform draw from the enumerated closure."""
    return int(subgroup.elements[int(rng.integers(len(subgroup.elements)))])


def babai_sample(subgroup: Subgroup, spec: SamplerSpec, rng: np.random.Generator) -> int:
    """One random-subproduct draw; always a member of the closure."""
    if spec.kind is not SamplerKind.BABAI_SUBPRODUCT:
        raise ValueError("babai_sample needs a babai-subproduct spec")
    mult = subgroup.group.mult
    acc = subgroup.group.identity
    for g in _pool(subgroup, spec.subproduct_length):
        if rng.integers(2):
            acc = int(mult[acc, g])
    return acc


def sample_array(
    subgroup: Subgroup,
    spec: SamplerSpec,
    rng: np.random.Generator,
    size: int,
    *,
    exclude_identity: bool = False,
) -> np.ndarray:
    """Vectorized batch of draws (parent-group element indices).

    With `exclude_identity` the draw is conditioned on s != e, which is
    what the bundled-experiment reproduction mode uses.
    """
    if spec.kind is SamplerKind.EXACT_UNIFORM:
        elems = np.asarray(subgroup.elements, dtype=np.int64)
        if exclude_identity:
            elems = elems[elems != subgroup.group.identity]
            if elems.size == 0:
                raise ValueError("cannot exclude the identity from the trivial subgroup")
        return elems[rng.integers(elems.size, size=size)]

    if exclude_identity and len(subgroup.elements) == 1:
        raise ValueError("cannot exclude the identity from the trivial subgroup")
    mult = subgroup.group.mult
    out = np.full(size, subgroup.group.identity, dtype=np.int64)
    pending = np.arange(size)
    while pending.size:
        acc = np.full(pending.size, subgroup.group.identity, dtype=np.int64)
        for g in _pool(subgroup, spec.subproduct_length):
            takes = rng.integers(2, size=pending.size).astype(bool)
            acc[takes] = mult[acc[takes], g]
        out[pending] = acc
        if not exclude_identity:
            break
        pending = pending[acc == subgroup.group.identity]
    return out


def sampler_distribution(subgroup: Subgroup, spec: SamplerSpec) -> np.ndarray:
    """Exact output distribution, indexed like `subgroup.elements`.

    For the subproduct sampler this convolves the coin-flip steps over
    the closure; sizes beyond the exact caps raise TooLargeForExact and
    the caller must explicitly fall back to `empirical_distribution`.
    """
    size = len(subgroup.elements)
    if spec.kind is SamplerKind.EXACT_UNIFORM:
        return np.full(size, 1.0 / size)
    if size > EXACT_DISTRIBUTION_MAX_SIZE or spec.subproduct_length > EXACT_DISTRIBUTION_MAX_LENGTH:
        raise TooLargeForExact(
            f"exact convolution supports |S| <= {EXACT_DISTRIBUTION_MAX_SIZE} and "
            f"length <= {EXACT_DISTRIBUTION_MAX_LENGTH}; use empirical_distribution"
        )
    index = {g: i for i, g in enumerate(subgroup.elements)}
    mult = subgroup.group.mult
    dist = np.zeros(size)
    dist[index[subgroup.group.identity]] = 1.0
    for g in _pool(subgroup, spec.subproduct_length):
        stepped = np.zeros(size)
        for i, x in enumerate(subgroup.elements):
            stepped[index[int(mult[x, g])]] += dist[i]
        dist = 0.5 * dist + 0.5 * stepped
    return dist


def empirical_distribution(
    subgroup: Subgroup,
    spec: SamplerSpec,
    draws: int,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of the sampler distribution with standard errors."""
    if rng is None:
        rng = stream(spec.seed)
    samples = sample_array(subgroup, spec, rng, draws)
    index = {g: i for i, g in enumerate(subgroup.elements)}
    counts = np.zeros(len(subgroup.elements))
    values, value_counts = np.unique(samples, return_counts=True)
    for v, c in zip(values, value_counts):
        counts[index[int(v)]] = c
    freq = counts / draws
    stderr = np.sqrt(np.clip(freq * (1.0 - freq), 0.0, None) / draws)
    return freq, stderr


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@dataclass(frozen=True)
class CalibrationRecord:
    """Outcome of the subproduct-length search for one subgroup."""

    subgroup_size: int
    target_tv: float
    length: int
    tv_distance: float
    max_deviation: float
    max_stderr: float
    draws: int
    achieved: bool


def calibrate_subproduct_length(
    subgroup: Subgroup,
    *,
    target_tv: float | None = None,
    max_length: int = 64,
    draws: int = 10**6,
    seed: int = 0,
) -> CalibrationRecord:
    """Find the shortest pool length meeting the uniformity target.

    The default target is 1/2^(2n) for n = ceil(log2 N) of the parent
    group. Lengths are probed doubling from 1; each probe measures the
    empirical total variation from uniform over `draws` samples.
    """
    if target_tv is None:
        target_tv = 1.0 / 2 ** (2 * subgroup.group.label_bits)
    uniform = np.full(len(subgroup.elements), 1.0 / len(subgroup.elements))
    lengths = []
    length = 1
    while length <= max_length:
        lengths.append(length)
        length *= 2
    if lengths[-1] != max_length:
        lengths.append(max_length)
    best: CalibrationRecord | None = None
    for length in lengths:
        spec = SamplerSpec(
            kind=SamplerKind.BABAI_SUBPRODUCT,
            epsilon=target_tv,
            subproduct_length=length,
            seed=seed,
        )
        freq, stderr = empirical_distribution(subgroup, spec, draws, stream(seed, length))
        record = CalibrationRecord(
            subgroup_size=len(subgroup.elements),
            target_tv=target_tv,
            length=length,
            tv_distance=total_variation(freq, uniform),
            max_deviation=float(np.abs(freq - uniform).max()),
            max_stderr=float(stderr.max()),
            draws=draws,
            achieved=False,
        )
        if record.tv_distance < target_tv and record.max_deviation < target_tv:
            return replace(record, achieved=True)
        if best is None or record.tv_distance < best.tv_distance:
            best = record
    assert best is not None
    return best
