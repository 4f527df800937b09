"""Finite group arithmetic over explicit multiplication tables.

Elements are integers in [0, N). Groups are validated on construction
(identity, associativity, inverse, and Latin-square axioms) and are
immutable afterwards, so they can be shared freely between tasks. Cosets
of a generated subgroup are enumerated once and keyed by their minimal
element, which fixes a deterministic output ordering everywhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NotAGroup

MAX_GROUP_ORDER = 4096
_EXHAUSTIVE_ASSOC_LIMIT = 64
_RANDOM_ASSOC_TRIPLES = 10_000


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its full multiplication table.

    `mult[a, b]` is the index of a*b. `label_bits` is ceil(log2(order)),
    the number of bits needed to label an element; the quantum-register
    dimension bookkeeping elsewhere relies on it.
    """

    order: int
    mult: np.ndarray
    identity: int
    inverse: np.ndarray
    element_orders: np.ndarray
    names: tuple[str, ...]
    label_bits: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "label_bits", max(int(math.ceil(math.log2(self.order))), 0))
        self.mult.setflags(write=False)
        self.inverse.setflags(write=False)
        self.element_orders.setflags(write=False)

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def power(self, a: int, k: int) -> int:
        if k < 0:
            return self.power(self.inv(a), -k)
        acc = self.identity
        for _ in range(k):
            acc = self.mul(acc, a)
        return acc

    def name_of(self, a: int) -> str:
        return self.names[a]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no element named {name!r}") from None

    def elements(self) -> range:
        return range(self.order)

    def fingerprint(self) -> str:
        """Hex digest of the table and names, used in run manifests."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.mult, dtype=np.int64).tobytes())
        h.update("\x1f".join(self.names).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class Subgroup:
    """A generated subgroup with its enumerated closure and coset blocks.

    `cosets` partitions [0, N) into blocks alpha*S, ordered and keyed by
    each block's minimal element.
    """

    group: FiniteGroup
    generators: tuple[int, ...]
    elements: tuple[int, ...]
    cosets: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.elements)

    def contains(self, x: int) -> bool:
        return x in self._member_set

    @property
    def _member_set(self) -> frozenset[int]:
        return frozenset(self.elements)

    def coset_of(self, alpha: int) -> tuple[int, ...]:
        """The block alpha*S containing alpha."""
        for block in self.cosets:
            if alpha in block:
                return block
        raise KeyError(alpha)

    def names(self) -> tuple[str, ...]:
        return tuple(self.group.name_of(x) for x in self.elements)


def _check_latin(table: np.ndarray) -> None:
    n = table.shape[0]
    want = np.arange(n)
    for a in range(n):
        if not np.array_equal(np.sort(table[a]), want):
            raise NotAGroup(f"row {a} of the table is not a permutation of 0..{n - 1}")
    for b in range(n):
        if not np.array_equal(np.sort(table[:, b]), want):
            raise NotAGroup(f"column {b} of the table is not a permutation of 0..{n - 1}")


def _find_identity(table: np.ndarray) -> int:
    n = table.shape[0]
    want = np.arange(n)
    for e in range(n):
        if np.array_equal(table[e], want) and np.array_equal(table[:, e], want):
            return e
    raise NotAGroup("no two-sided identity element")


def _check_associative(table: np.ndarray, seed: int = 0) -> None:
    n = table.shape[0]
    if n <= _EXHAUSTIVE_ASSOC_LIMIT:
        # (a*b)*c vs a*(b*c) for the whole cube at once.
        ab_c = table[table, :]               # [a, b, c] -> (a*b)*c
        a_bc = table[:, table]               # [a, b, c] -> a*(b*c)
        if not np.array_equal(ab_c, a_bc):
            bad = np.argwhere(ab_c != a_bc)[0]
            raise NotAGroup(f"associativity fails at triple {tuple(int(x) for x in bad)}")
        return
    rng = np.random.default_rng(seed)
    trips = rng.integers(0, n, size=(_RANDOM_ASSOC_TRIPLES, 3))
    lhs = table[table[trips[:, 0], trips[:, 1]], trips[:, 2]]
    rhs = table[trips[:, 0], table[trips[:, 1], trips[:, 2]]]
    if not np.array_equal(lhs, rhs):
        bad = trips[np.argmax(lhs != rhs)]
        raise NotAGroup(f"associativity fails at triple {tuple(int(x) for x in bad)}")


def _inverses(table: np.ndarray, identity: int) -> np.ndarray:
    n = table.shape[0]
    inv = np.empty(n, dtype=np.int64)
    for a in range(n):
        hits = np.flatnonzero(table[a] == identity)
        b = int(hits[0])
        if table[b, a] != identity:
            raise NotAGroup(f"element {a} has a right inverse that is not a left inverse")
        inv[a] = b
    return inv


def _element_orders(table: np.ndarray, identity: int) -> np.ndarray:
    n = table.shape[0]
    orders = np.zeros(n, dtype=np.int64)
    power = np.arange(n)
    base = np.arange(n)
    k = 1
    while np.any(orders == 0) and k <= n:
        done = (power == identity) & (orders == 0)
        orders[done] = k
        power = table[power, base]
        k += 1
    if np.any(orders == 0):
        raise NotAGroup("some element has no finite order below the group order")
    return orders


def build_from_table(
    table: Sequence[Sequence[int]] | np.ndarray,
    names: Sequence[str] | None = None,
    *,
    max_order: int = MAX_GROUP_ORDER,
) -> FiniteGroup:
    """Validate a multiplication table and return the group it defines.

    Raises NotAGroup naming the first violated axiom. Orders above
    `max_order` are rejected to keep every downstream check exhaustive.
    """
    arr = np.asarray(table, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise NotAGroup("table must be a square matrix with at least one row")
    n = arr.shape[0]
    if n > max_order:
        raise NotAGroup(f"order {n} exceeds the supported maximum {max_order}")
    if arr.min() < 0 or arr.max() >= n:
        raise NotAGroup("table entries must be element indices in [0, N)")
    _check_latin(arr)
    identity = _find_identity(arr)
    _check_associative(arr)
    inverse = _inverses(arr, identity)
    orders = _element_orders(arr, identity)
    if names is None:
        name_tuple = tuple(f"g{i}" for i in range(n))
    else:
        if len(names) != n:
            raise NotAGroup(f"{len(names)} names given for {n} elements")
        name_tuple = tuple(str(x) for x in names)
    return FiniteGroup(
        order=n,
        mult=arr,
        identity=identity,
        inverse=inverse,
        element_orders=orders,
        names=name_tuple,
    )


def build_klein() -> FiniteGroup:
    """The abelian group {E, A, B, AB} with A*A = B*B = E and A*B = B*A."""
    table = [
        [0, 1, 2, 3],
        [1, 0, 3, 2],
        [2, 3, 0, 1],
        [3, 2, 1, 0],
    ]
    return build_from_table(table, names=["E", "A", "B", "AB"])


def build_cyclic(n: int) -> FiniteGroup:
    """The cyclic group of order n, generated by the element named g."""
    if n < 1:
        raise NotAGroup("cyclic order must be at least 1")
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    names = ["e"] + [f"g{k}" if k > 1 else "g" for k in range(1, n)]
    return build_from_table(table, names=names)


def subgroup_closure(group: FiniteGroup, generators: Sequence[int]) -> Subgroup:
    """Close a generator set and enumerate the coset partition.

    An empty generator list yields the trivial subgroup {e}.
    """
    gens = tuple(int(g) for g in generators)
    for g in gens:
        if not 0 <= g < group.order:
            raise NotAGroup(f"generator index {g} out of range for order {group.order}")
    closure = {group.identity}
    frontier = [group.identity]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = group.mul(x, g)
            if y not in closure:
                closure.add(y)
                frontier.append(y)
            z = group.mul(g, x)
            if z not in closure:
                closure.add(z)
                frontier.append(z)
    elements = tuple(sorted(closure))

    assigned = [False] * group.order
    blocks: list[tuple[int, ...]] = []
    for alpha in range(group.order):
        if assigned[alpha]:
            continue
        block = tuple(sorted(group.mul(alpha, s) for s in elements))
        for x in block:
            assigned[x] = True
        blocks.append(block)
    return Subgroup(group=group, generators=gens, elements=elements, cosets=tuple(blocks))


def element_order(group: FiniteGroup, g: int) -> int:
    """Smallest k >= 1 with g^k = e."""
    return int(group.element_orders[g])


# ---------------------------------------------------------------------------
# Permutation-generator input and JSON group files


def _perm_from_cycles(cycles: Sequence[Sequence[int]], npoints: int) -> tuple[int, ...]:
    perm = list(range(npoints))
    for cycle in cycles:
        if len(cycle) < 2:
            continue
        for i, src in enumerate(cycle):
            dst = cycle[(i + 1) % len(cycle)]
            perm[int(src)] = int(dst)
    return tuple(perm)


def _perm_name(perm: tuple[int, ...]) -> str:
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start] or perm[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        nxt = perm[start]
        while nxt != start:
            cyc.append(nxt)
            seen[nxt] = True
            nxt = perm[nxt]
        cycles.append("(" + " ".join(str(x) for x in cyc) + ")")
    return "".join(cycles) if cycles else "e"


def group_from_permutations(
    generator_cycles: Sequence[Sequence[Sequence[int]]],
    *,
    max_order: int = MAX_GROUP_ORDER,
) -> FiniteGroup:
    """Cayley-enumerate the group generated by permutations in cycle form.

    Each generator is a list of cycles over point indices; composition is
    left-to-right ((p*q)(x) = q(p(x))). The identity gets index 0 and the
    remaining elements appear in breadth-first discovery order.
    """
    npoints = 0
    for cycles in generator_cycles:
        for cycle in cycles:
            if cycle:
                npoints = max(npoints, max(int(x) for x in cycle) + 1)
    npoints = max(npoints, 1)
    gens = [_perm_from_cycles(cycles, npoints) for cycles in generator_cycles]

    identity = tuple(range(npoints))
    index: dict[tuple[int, ...], int] = {identity: 0}
    order_list = [identity]
    frontier = [identity]
    while frontier:
        p = frontier.pop(0)
        for q in gens:
            r = tuple(q[p[x]] for x in range(npoints))
            if r not in index:
                if len(order_list) >= max_order:
                    raise NotAGroup(f"generated group exceeds the supported maximum {max_order}")
                index[r] = len(order_list)
                order_list.append(r)
                frontier.append(r)
    n = len(order_list)
    table = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(order_list):
        for j, q in enumerate(order_list):
            table[i, j] = index[tuple(q[p[x]] for x in range(npoints))]
    return build_from_table(table, names=[_perm_name(p) for p in order_list], max_order=max_order)


def group_from_dict(payload: dict, *, max_order: int = MAX_GROUP_ORDER) -> FiniteGroup:
    """Build a group from a parsed definition file (table or permutations)."""
    if "table" in payload:
        return build_from_table(payload["table"], payload.get("names"), max_order=max_order)
    if "permutation_generators" in payload:
        return group_from_permutations(payload["permutation_generators"], max_order=max_order)
    raise NotAGroup("group definition needs either 'table' or 'permutation_generators'")


def load_group_file(path: str | Path, *, max_order: int = MAX_GROUP_ORDER) -> tuple[FiniteGroup, dict[str, list[str]]]:
    """Load a group JSON file; returns the group and its named subgroup lists."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    group = group_from_dict(payload, max_order=max_order)
    named = {str(k): [str(x) for x in v] for k, v in payload.get("subgroups", {}).items()}
    return group, named


BUNDLED_GROUPS = ("klein", "c6", "s3", "trivial")


def bundled_group(name: str) -> tuple[FiniteGroup, dict[str, list[str]]]:
    """Load one of the groups shipped with the package by short name."""
    if name not in BUNDLED_GROUPS:
        raise KeyError(f"unknown bundled group {name!r}; choose from {BUNDLED_GROUPS}")
    ref = resources.files("gnmverify").joinpath(f"data/{name}.json")
    payload = json.loads(ref.read_text(encoding="utf-8"))
    group = group_from_dict(payload)
    named = {str(k): [str(x) for x in v] for k, v in payload.get("subgroups", {}).items()}
    return group, named


def resolve_group(ref: str | dict) -> tuple[FiniteGroup, dict[str, list[str]]]:
    """Resolve a group reference: bundled name, file path, or inline dict."""
    if isinstance(ref, dict):
        group = group_from_dict(ref)
        named = {str(k): [str(x) for x in v] for k, v in ref.get("subgroups", {}).items()}
        return group, named
    if ref in BUNDLED_GROUPS:
        return bundled_group(ref)
    return load_group_file(ref)
