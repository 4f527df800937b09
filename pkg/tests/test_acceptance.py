"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines. Every
tolerance is fixed here; nothing is calibrated at runtime.
"""

import numpy as np
import pytest

from gnmverify.analysis import (
    OmaxInstance,
    gap_optimize,
    k_factor,
    klein_soundness_bound,
    main_text_pass_bound,
    omax_bruteforce,
    omax_closed_form,
    pass_soundness_bound,
    random_feasible_instance,
    soundness_bound,
)
from gnmverify.groups import build_cyclic, build_klein, subgroup_closure
from gnmverify.protocol import (
    HonestCoset,
    ProtocolConfig,
    exact_accept_probability,
    monte_carlo,
    optimal_cheat_probability,
    reserved_register_statistics,
)
from gnmverify.protocol import test_pass_operator as build_test_pass_operator
from gnmverify.qsim import (
    NoiseSpec,
    basis_state,
    core_circuit,
    core_probability_closed_form,
    coset_proof_state,
    haar_random_pure,
)
from gnmverify.rng import stream
from gnmverify.sampling import SamplerSpec, sampler_distribution
from gnmverify.sampling import calibrate_subproduct_length

KLEIN = build_klein()
C6 = build_cyclic(6)

KLEIN_S = subgroup_closure(KLEIN, [KLEIN.index_of("A")])
KLEIN_SP = subgroup_closure(KLEIN, [KLEIN.index_of("AB")])
KLEIN_SB = subgroup_closure(KLEIN, [KLEIN.index_of("B")])
C6_S = subgroup_closure(C6, [C6.index_of("g3")])
C6_S3 = subgroup_closure(C6, [C6.index_of("g2")])

BUNDLED_PAIRS = [
    ("klein", KLEIN, KLEIN_S),
    ("klein", KLEIN, KLEIN_SP),
    ("klein", KLEIN, KLEIN_SB),
    ("c6", C6, C6_S),
    ("c6", C6, C6_S3),
]


def report(number: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number} {status}: {detail}")
    assert ok, detail


def test_criterion_1_completeness():
    """Honest prover accepted with probability exactly 1/2 for g outside S."""
    worst_exact = 0.0
    worst_mc = 0.0
    for _, group, sub in BUNDLED_PAIRS:
        alpha = next(x for x in group.elements() if not sub.contains(x))
        outsiders = [g for g in group.elements() if not sub.contains(g)]
        for m in (2, 3):
            config = ProtocolConfig(m=m, seed=42, trials=10)
            for g in outsiders:
                value = exact_accept_probability(HonestCoset(alpha), g, sub, config)
                worst_exact = max(worst_exact, abs(value - 0.5))
        mc = monte_carlo(
            HonestCoset(alpha), outsiders[0], sub,
            ProtocolConfig(m=2, seed=42, trials=100_000),
        )
        worst_mc = max(worst_mc, abs(mc.accept_rate - 0.5))
    sigma = np.sqrt(0.25 / 100_000)
    ok = worst_exact <= 1e-12 and worst_mc <= 4.0 * sigma
    report(1, ok, f"completeness exact dev {worst_exact:.2e} (tol 1e-12), "
                  f"MC dev {worst_mc:.4f} (tol {4 * sigma:.4f})")


def test_criterion_2_soundness_eigenvalues():
    """Optimal cheating stays below min(8/m, 16/(7(m-1))) for the Klein runs."""
    worst_margin = np.inf
    details = []
    for sub, g_name in ((KLEIN_S, "A"), (KLEIN_SP, "AB")):
        g = KLEIN.index_of(g_name)
        for m in range(2, 7):
            lam = optimal_cheat_probability(g, sub, ProtocolConfig(m=m))
            cap = min(soundness_bound(m), klein_soundness_bound(m))
            worst_margin = min(worst_margin, cap - lam)
            details.append(f"m={m}:{lam:.6f}<={cap:.6f}")
    ok = worst_margin >= -1e-9
    report(2, ok, f"soundness margins all >= {worst_margin:.3e} (tol -1e-9)")


def test_criterion_3_reserved_register_bound():
    """Conditional reserved-register pass probability obeys the 1/(m-1) bound."""
    checked = 0
    worst = np.inf
    for m in range(2, 6):
        config = ProtocolConfig(m=m)
        for i in range(200):
            psi = haar_random_pure(m, 4, stream(300, m, i))
            stats = reserved_register_statistics(psi, KLEIN_S, config)
            if stats.rsi_pass < 1e-6:
                continue
            bound = 1.0 - (1.0 / stats.rsi_pass - 1.0) / (m - 1)
            worst = min(worst, stats.conditional_reserved_pass - bound)
            checked += 1
    ok = worst >= -1e-9 and checked >= 700
    report(3, ok, f"{checked} joint states, worst conditional-minus-bound {worst:.3e} (tol -1e-9)")


def test_criterion_4_pass_soundness_inequality():
    """Member-query outcome-1 probability obeys the pass bound and the
    factor-4 relaxation for random pure states."""
    cases = [
        (KLEIN, KLEIN_S, KLEIN.index_of("A")),
        (KLEIN, KLEIN_SP, KLEIN.index_of("AB")),
        (C6, C6_S, C6.index_of("g3")),
    ]
    worst_tight = np.inf
    worst_relaxed = np.inf
    for group, sub, g in cases:
        dist = sampler_distribution(sub, SamplerSpec())
        order = int(group.element_orders[g])
        n = group.label_bits
        for i in range(1000):
            psi = haar_random_pure(1, group.order, stream(400, group.order, g, i))
            p_g = core_probability_closed_form(psi, group, g)
            p_pass = float(sum(
                pi * (1.0 - core_probability_closed_form(psi, group, s))
                for pi, s in zip(dist, sub.elements)
            ))
            tight = pass_soundness_bound(p_pass, order, sub.size, n)
            relaxed = main_text_pass_bound(p_pass)
            worst_tight = min(worst_tight, tight - p_g)
            worst_relaxed = min(worst_relaxed, relaxed - p_g)
    ok = worst_tight >= -1e-9 and worst_relaxed >= -1e-9
    report(4, ok, f"pass bound margin {worst_tight:.3e}, relaxation margin "
                  f"{worst_relaxed:.3e} (tol -1e-9)")


def test_criterion_5_appendix_maximization():
    """Numerical maximization matches the closed form on random feasible
    instances, the n=2 identity, and the b=l degenerate family."""
    worst = 0.0
    for n in range(2, 9):
        rng = stream(500, n)
        for i in range(50):
            inst = random_feasible_instance(n, rng)
            closed = omax_closed_form(inst)
            brute = omax_bruteforce(inst, seed=i)
            worst = max(worst, abs(closed - brute))
    ok_sweep = worst <= 1e-5

    rng = stream(501)
    worst_n2 = 0.0
    for _ in range(50):
        l = float(rng.uniform(0.05, 1.0))
        b = float(rng.uniform(-l, l))
        worst_n2 = max(worst_n2, abs(omax_closed_form(OmaxInstance(2, b, l)) - (b + l)))
    ok_n2 = worst_n2 <= 1e-12

    worst_bl = 0.0
    for n in range(2, 9):
        inst = OmaxInstance(n=n, b=0.6, l=0.6)
        worst_bl = max(worst_bl, abs(omax_closed_form(inst) - n * 0.6))
        worst_bl = max(worst_bl, abs(omax_bruteforce(inst, starts=16) - n * 0.6))
    ok_bl = worst_bl <= 1e-5

    ok = ok_sweep and ok_n2 and ok_bl
    report(5, ok, f"sweep residual {worst:.2e} (tol 1e-5), n=2 identity dev {worst_n2:.2e}, "
                  f"b=l dev {worst_bl:.2e}")


def test_criterion_6_gap_reproduction():
    """Gap optimization lands on m=14/0.075 and m=19/0.207."""
    r1 = gap_optimize(0.496, 0.949, klein_soundness_bound, range(2, 400))
    r2 = gap_optimize(0.481, 0.980, klein_soundness_bound, range(2, 400))
    ok = (r1.m == 14 and abs(r1.gap - 0.075) <= 1e-3
          and r2.m == 19 and abs(r2.gap - 0.207) <= 1e-3)
    report(6, ok, f"gap results (m={r1.m}, {r1.gap:.4f}) and (m={r2.m}, {r2.gap:.4f}) "
                  f"vs expected (14, 0.075) and (19, 0.207) within 1e-3")


def test_criterion_7_hardware_number_proximity():
    """The noise model lands near the measured test-channel rates."""
    proof = coset_proof_state(KLEIN_S, KLEIN.index_of("B"))
    bogus = [
        coset_proof_state(KLEIN_SP, KLEIN.index_of("B")),
        basis_state(KLEIN, KLEIN.index_of("A")),
        basis_state(KLEIN, KLEIN.index_of("B")),
    ]
    worst_honest = 0.0
    worst_bogus = 0.0
    for visibility in (0.955, 0.963, 0.971):
        noise = NoiseSpec(visibility=visibility, state_fidelity_mix=0.959)
        config = ProtocolConfig(m=2, noise=noise, test_elements="nonidentity")
        t_op = build_test_pass_operator(KLEIN_S, config)
        honest_pass = float(np.real(np.vdot(proof.amplitudes, t_op @ proof.amplitudes)))
        worst_honest = max(worst_honest, abs(honest_pass - 0.955))
        for state in bogus:
            value = float(np.real(np.vdot(state.amplitudes, t_op @ state.amplitudes)))
            worst_bogus = max(worst_bogus, abs(value - 0.5))
    ok = worst_honest <= 0.05 and worst_bogus <= 0.05
    report(7, ok, f"honest test-pass within {worst_honest:.4f} of 0.955, "
                  f"bogus within {worst_bogus:.4f} of 0.5 (tol 0.05)")


def test_criterion_8_circuit_closed_form_equivalence():
    """Circuit simulation equals the amplitude closed form to 1e-12."""
    worst = 0.0
    for i in range(1000):
        psi = haar_random_pure(1, 4, stream(800, i))
        for g in KLEIN.elements():
            circuit = core_circuit(psi, 0, KLEIN, g).p1
            closed = core_probability_closed_form(psi, KLEIN, g)
            worst = max(worst, abs(circuit - closed))
    ok = worst <= 1e-12
    report(8, ok, f"1000 states x 4 multipliers, worst |circuit - closed| = {worst:.2e} (tol 1e-12)")


def test_criterion_9_sampler_uniformity():
    """The subproduct sampler reaches the 1/2^(2n) uniformity window at
    some pool length <= 64 on every bundled subgroup."""
    bundles = [
        ("klein <A>", KLEIN_S),
        ("klein <AB>", KLEIN_SP),
        ("klein <A,B>", subgroup_closure(KLEIN, [KLEIN.index_of("A"), KLEIN.index_of("B")])),
        ("c6 <g3>", C6_S),
        ("c6 <g2>", C6_S3),
        ("c6 <g>", subgroup_closure(C6, [C6.index_of("g")])),
    ]
    ok = True
    lines = []
    for name, sub in bundles:
        record = calibrate_subproduct_length(sub, max_length=64, draws=1_000_000, seed=900)
        ok = ok and record.achieved and record.length <= 64
        lines.append(
            f"{name}: length {record.length}, TV {record.tv_distance:.5f} "
            f"< {record.target_tv:.5f}, max stderr {record.max_stderr:.2e}"
        )
    report(9, ok, "; ".join(lines))
