"""Closed-form bounds, the cyclic-correlation maximization, and the
completeness-soundness gap optimizer.

The maximization: over real vectors R of length n with sum(R_i^2) = l
and cyclic correlation sum(R_i R_{i+1}) = b, the maximum of
(sum R_i)^2 is n/(1 - cos(ceil(n/2) * 2pi/n)) * (b - l) + n*l. The
brute-force counterpart checks that value numerically with multi-start
sequential quadratic programming under explicit constraint projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import (
    ConstraintProjectionFailure,
    DegenerateDenominator,
    EmptyRange,
    IdentityOrder,
    InfeasibleInstance,
    ZeroPassProbability,
)
from .rng import stream


def soundness_bound(m: int) -> float:
    """Generic cap on cheating acceptance with m registers: 8/m."""
    if m < 2:
        raise ValueError("the bound needs at least two registers")
    return 8.0 / m


def klein_soundness_bound(m: int) -> float:
    """Cheating cap for the order-4 group of exponent two: 16/(7(m-1))."""
    if m < 2:
        raise ValueError("the bound needs at least two registers")
    return 16.0 / (7.0 * (m - 1))


def k_factor(order: int) -> float:
    """Order-dependent constant K with 1/K = 1 - cos(ceil(q/2) * 2pi/q).

    K is 1/2 for order-2 elements and at least 1/2 for every order.
    """
    if order == 1:
        raise IdentityOrder("the identity is rejected outright; K is undefined for order 1")
    if order < 1:
        raise ValueError("order must be positive")
    inv = 1.0 - math.cos(math.ceil(order / 2) * 2.0 * math.pi / order)
    return 1.0 / inv


def pass_soundness_bound(
    test_pass_prob: float,
    order: int,
    subgroup_size: int,
    n: int,
) -> float:
    """Cap on wrongly proving a member, given the test-pass probability.

    Returns (1 - p_pass) / (K * (1 - |S|/2^(2n))) for an element of the
    given order inside a subgroup of the given size, with n the number of
    label bits.
    """
    if not 0.0 <= test_pass_prob <= 1.0:
        raise ValueError("test_pass_prob must lie in [0, 1]")
    window = 2 ** (2 * n)
    if subgroup_size >= window:
        raise DegenerateDenominator(f"|S| = {subgroup_size} is not below 2^(2n) = {window}")
    k = k_factor(order)
    return (1.0 - test_pass_prob) / (k * (1.0 - subgroup_size / window))


def main_text_pass_bound(test_pass_prob: float) -> float:
    """The always-valid relaxation 4 * (1 - p_pass)."""
    return 4.0 * (1.0 - test_pass_prob)


def reserved_pass_bound(overall_pass: float, m: int) -> float:
    """Lower bound on the reserved register's conditional pass probability.

    Given the overall inspection pass probability p, the reserved
    register passes the test channel, conditioned on the inspection
    passing, with probability at least 1 - (1/p - 1)/(m - 1).
    """
    if m < 2:
        raise ValueError("the bound needs at least two registers")
    if overall_pass <= 0.0:
        raise ZeroPassProbability("the bound needs a positive overall pass probability")
    if overall_pass > 1.0:
        raise ValueError("overall_pass cannot exceed 1")
    return 1.0 - (1.0 / overall_pass - 1.0) / (m - 1)


# ---------------------------------------------------------------------------
# Cyclic-correlation maximization


@dataclass(frozen=True)
class OmaxInstance:
    """Constraint data: vector length n, correlation b, squared norm l."""

    n: int
    b: float
    l: float

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 < self.l <= 1.0:
            raise ValueError("l must lie in (0, 1]")

    @property
    def min_feasible_b(self) -> float:
        """Most negative correlation any real vector can reach: l times the
        minimum of cos(2*pi*k/n) over frequencies k. It is -l for even n
        but strictly above -l for odd n."""
        return self.l * math.cos(math.ceil(self.n / 2) * 2.0 * math.pi / self.n)

    def check_feasible(self) -> None:
        if abs(self.b) > self.l + 1e-12:
            raise InfeasibleInstance(f"|b| = {abs(self.b)} exceeds l = {self.l}")
        if self.b < self.min_feasible_b - 1e-12:
            raise InfeasibleInstance(
                f"b = {self.b} lies below the cyclic minimum {self.min_feasible_b} for n = {self.n}"
            )


def omax_closed_form(inst: OmaxInstance) -> float:
    """Closed-form maximum of (sum R_i)^2 under both cyclic constraints."""
    inst.check_feasible()
    denom = 1.0 - math.cos(math.ceil(inst.n / 2) * 2.0 * math.pi / inst.n)
    return inst.n / denom * (inst.b - inst.l) + inst.n * inst.l


def _constraints(r: np.ndarray, inst: OmaxInstance) -> np.ndarray:
    rolled = np.roll(r, -1)
    return np.array([float(r @ r) - inst.l, float(r @ rolled) - inst.b])


def _constraint_jacobian(r: np.ndarray) -> np.ndarray:
    return np.vstack([2.0 * r, np.roll(r, -1) + np.roll(r, 1)])


def _project_to_manifold(
    r: np.ndarray,
    inst: OmaxInstance,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> np.ndarray | None:
    """Newton projection onto the two-constraint manifold; None on failure."""
    x = np.array(r, dtype=float)
    for _ in range(max_iter):
        c = _constraints(x, inst)
        if float(np.abs(c).max()) <= tol:
            return x
        jac = _constraint_jacobian(x)
        step, *_ = np.linalg.lstsq(jac, c, rcond=None)
        x = x - step
        if not np.all(np.isfinite(x)):
            return None
    c = _constraints(x, inst)
    return x if float(np.abs(c).max()) <= tol else None


def _start_points(inst: OmaxInstance, starts: int, seed: int) -> list[np.ndarray]:
    n = inst.n
    rng = stream(seed, n)
    pts: list[np.ndarray] = []
    scale = math.sqrt(inst.l / n)
    pts.append(np.full(n, scale))
    pts.append(np.full(n, -scale))
    # single-frequency waves cover the symmetric candidates
    idx = np.arange(n)
    for k in range(1, n // 2 + 1):
        wave = np.cos(2.0 * math.pi * k * idx / n) + 0.1
        pts.append(wave)
    while len(pts) < starts:
        pts.append(rng.normal(size=n))
    return pts


def omax_bruteforce(
    inst: OmaxInstance,
    tol: float = 1e-10,
    starts: int = 64,
    seed: int = 0,
) -> float:
    """Numerical maximum of (sum R_i)^2 under both constraints.

    Runs sequential quadratic programming from `starts` projected start
    points and keeps the best value whose final constraint residuals are
    within `tol`. Raises ConstraintProjectionFailure when no start can be
    placed on the manifold (in particular for infeasible instances).
    """
    if inst.n > 10:
        raise ValueError("the brute-force oracle supports n <= 10")
    inst.check_feasible()

    def neg_objective(r: np.ndarray) -> float:
        total = float(r.sum())
        return -(total * total)

    def neg_gradient(r: np.ndarray) -> np.ndarray:
        return np.full(inst.n, -2.0 * float(r.sum()))

    constraints = [
        {
            "type": "eq",
            "fun": lambda r: float(r @ r) - inst.l,
            "jac": lambda r: 2.0 * r,
        },
        {
            "type": "eq",
            "fun": lambda r: float(r @ np.roll(r, -1)) - inst.b,
            "jac": lambda r: np.roll(r, -1) + np.roll(r, 1),
        },
    ]

    best: float | None = None
    for point in _start_points(inst, starts, seed):
        x0 = _project_to_manifold(point, inst)
        if x0 is None:
            continue
        result = scipy.optimize.minimize(
            neg_objective,
            x0,
            jac=neg_gradient,
            method="SLSQP",
            constraints=constraints,
            options={"ftol": 1e-14, "maxiter": 400},
        )
        candidate = _project_to_manifold(result.x, inst)
        if candidate is None:
            candidate = x0
        residual = float(np.abs(_constraints(candidate, inst)).max())
        if residual > tol:
            continue
        value = float(candidate.sum()) ** 2
        if best is None or value > best:
            best = value
    if best is None:
        raise ConstraintProjectionFailure(
            f"no start point reached the constraint manifold for n={inst.n}, b={inst.b}, l={inst.l}"
        )
    return best


def random_feasible_instance(n: int, rng: np.random.Generator, margin: float = 0.01) -> OmaxInstance:
    """Draw (b, l) uniformly inside the strictly feasible cyclic region.

    `margin` keeps b away from the degenerate lower edge where the two
    constraint gradients become parallel.
    """
    l = float(rng.uniform(0.05, 1.0))
    low = l * math.cos(math.ceil(n / 2) * 2.0 * math.pi / n)
    low = low + margin * (l - low)
    b = float(rng.uniform(low, l))
    return OmaxInstance(n=n, b=b, l=l)


# ---------------------------------------------------------------------------
# Completeness-soundness gap


@dataclass(frozen=True)
class GapResult:
    m: int
    gap: float
    completeness_curve: float
    soundness_curve: float


def gap_optimize(
    p_prove: float,
    q_test: float,
    bound,
    m_range: range,
) -> GapResult:
    """Maximize p_prove * q_test^(m-1) - bound(m) over integer m.

    Ties break toward smaller m.
    """
    if not 0.0 <= p_prove <= 1.0 or not 0.0 <= q_test <= 1.0:
        raise ValueError("p_prove and q_test must lie in [0, 1]")
    if len(m_range) == 0:
        raise EmptyRange("empty register-count range")
    best: GapResult | None = None
    for m in m_range:
        pc = p_prove * q_test ** (m - 1)
        ps = float(bound(m))
        gap = pc - ps
        if best is None or gap > best.gap:
            best = GapResult(m=m, gap=gap, completeness_curve=pc, soundness_curve=ps)
    assert best is not None
    return best


@dataclass(frozen=True)
class BoundReport:
    """One row of the bound table at a given register count."""

    m: int
    soundness_8_over_m: float
    klein_bound: float
    completeness: float
    p_prove: float
    q_test: float
    gap_value: float

    @staticmethod
    def at(m: int, p_prove: float, q_test: float) -> "BoundReport":
        pc = p_prove * q_test ** (m - 1)
        ps = klein_soundness_bound(m)
        return BoundReport(
            m=m,
            soundness_8_over_m=soundness_bound(m),
            klein_bound=ps,
            completeness=0.5,
            p_prove=p_prove,
            q_test=q_test,
            gap_value=pc - ps,
        )


def bound_table(m_range: range, p_prove: float, q_test: float) -> list[BoundReport]:
    if len(m_range) == 0:
        raise EmptyRange("empty register-count range")
    return [BoundReport.at(m, p_prove, q_test) for m in m_range]
