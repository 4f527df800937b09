"""Register simulator: states, multiplication unitaries, the core circuit,
span checks, and the noise channels."""

import numpy as np
import pytest

from gnmverify.errors import TooLargeForExact
from gnmverify.groups import build_klein, subgroup_closure
from gnmverify.qsim import (
    DensityState,
    NoiseSpec,
    PureState,
    apply_noise,
    apply_right_mult,
    basis_state,
    core_circuit,
    core_probability_closed_form,
    coset_proof_state,
    haar_random_pure,
    mix_register,
    right_mult_unitary,
    span_branches,
    span_check,
)
from gnmverify.rng import stream

KLEIN = build_klein()
S = subgroup_closure(KLEIN, [KLEIN.index_of("A")])
SP = subgroup_closure(KLEIN, [KLEIN.index_of("AB")])
A, B, AB = (KLEIN.index_of(x) for x in ("A", "B", "AB"))


def test_pure_state_norm_enforced():
    with pytest.raises(ValueError):
        PureState(1, 4, np.array([1.0, 1.0, 0.0, 0.0]))
    st = PureState(1, 4, np.array([1.0, 1.0, 0.0, 0.0]), renormalize=True)
    assert abs(np.linalg.norm(st.amplitudes) - 1.0) <= 1e-12


def test_pure_state_dim_cap():
    with pytest.raises(TooLargeForExact):
        PureState(11, 4, np.zeros(4**11), dim_cap=1 << 20)


def test_density_validation():
    good = np.eye(4) / 4.0
    DensityState(1, 4, good)
    with pytest.raises(ValueError):
        DensityState(1, 4, good * 2.0)  # trace 2
    bad = good.astype(complex).copy()
    bad[0, 1] = 0.5j  # not Hermitian
    with pytest.raises(ValueError):
        DensityState(1, 4, bad)
    neg = np.diag([0.6, 0.6, -0.2, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        DensityState(1, 4, neg)


def test_coset_proof_state_examples():
    q = coset_proof_state(S, B)
    expect = np.zeros(4, dtype=complex)
    expect[B] = expect[AB] = 1.0 / np.sqrt(2.0)
    assert np.allclose(q.amplitudes, expect)

    qp = coset_proof_state(SP, B)
    expect = np.zeros(4, dtype=complex)
    expect[B] = expect[A] = 1.0 / np.sqrt(2.0)
    assert np.allclose(qp.amplitudes, expect)

    trivial = subgroup_closure(KLEIN, [])
    assert np.allclose(coset_proof_state(trivial, B).amplitudes, basis_state(KLEIN, B).amplitudes)


def test_right_mult_unitary_basics():
    assert np.allclose(right_mult_unitary(KLEIN, KLEIN.identity), np.eye(4))
    m_a = right_mult_unitary(KLEIN, A)
    vec = np.zeros(4)
    vec[B] = 1.0
    moved = m_a @ vec
    assert moved[AB] == 1.0 and abs(np.linalg.norm(moved) - 1.0) < 1e-12
    for g in KLEIN.elements():
        m = right_mult_unitary(KLEIN, g)
        assert np.allclose(m.conj().T @ m, np.eye(4), atol=1e-12)
        assert np.allclose(m @ right_mult_unitary(KLEIN, KLEIN.inv(g)), np.eye(4))


def test_right_mult_composition_order():
    for g1 in KLEIN.elements():
        for g2 in KLEIN.elements():
            lhs = right_mult_unitary(KLEIN, g1) @ right_mult_unitary(KLEIN, g2)
            rhs = right_mult_unitary(KLEIN, KLEIN.mul(g2, g1))
            assert np.allclose(lhs, rhs)


def test_coset_invariance_exact():
    q = coset_proof_state(S, B)
    for s in S.elements:
        moved = apply_right_mult(q, 0, KLEIN, s)
        assert np.array_equal(moved.amplitudes, q.amplitudes)


def test_coset_orthogonality_exact():
    q = coset_proof_state(S, B)
    for x in KLEIN.elements():
        if S.contains(x):
            continue
        moved = apply_right_mult(q, 0, KLEIN, x)
        assert q.overlap(moved) == 0.0


def test_core_circuit_honest_examples():
    q = coset_proof_state(S, B)
    assert core_circuit(q, 0, KLEIN, A).p1 == 0.0
    out = core_circuit(q, 0, KLEIN, B)
    assert abs(out.p1 - 0.5) <= 1e-12
    rng = stream(0)
    for _ in range(20):
        st = haar_random_pure(1, 4, rng)
        assert core_circuit(st, 0, KLEIN, KLEIN.identity).p1 == 0.0


def test_core_outcome_normalization():
    rng = stream(1)
    noise = NoiseSpec(visibility=0.93, state_fidelity_mix=0.9)
    for _ in range(50):
        st = haar_random_pure(1, 4, rng)
        for g in KLEIN.elements():
            ideal = core_circuit(st, 0, KLEIN, g)
            assert abs(ideal.p0 + ideal.p1 - 1.0) <= 1e-12
            noisy = core_circuit(st, 0, KLEIN, g, noise)
            assert abs(noisy.p0 + noisy.p1 - 1.0) <= 1e-12


def test_circuit_matches_closed_form():
    from gnmverify.groups import bundled_group

    rng = stream(2)
    groups = [KLEIN, bundled_group("c6")[0], bundled_group("s3")[0]]
    for group in groups:
        for _ in range(200):
            st = haar_random_pure(1, group.order, rng)
            for g in group.elements():
                p_circuit = core_circuit(st, 0, group, g).p1
                p_closed = core_probability_closed_form(st, group, g)
                assert abs(p_circuit - p_closed) <= 1e-12


def test_core_circuit_post_states():
    st = basis_state(KLEIN, B)
    out = core_circuit(st, 0, KLEIN, A)
    assert abs(out.p1 - 0.5) <= 1e-12
    # outcome-1 branch holds (|B> - |AB>)/sqrt(2)
    expect = np.zeros(4, dtype=complex)
    expect[B], expect[AB] = 1.0, -1.0
    expect /= np.sqrt(2.0)
    assert np.allclose(out.post1.amplitudes, expect)


def test_span_check_examples():
    # all-label support passes surely
    st = coset_proof_state(S, B, junk_dims=2)
    p_pass, post, _ = span_branches(st, 0, KLEIN)
    assert p_pass == 1.0
    # pure junk support fails surely
    junk = np.zeros(6, dtype=complex)
    junk[5] = 1.0
    p_pass, post, fail = span_branches(PureState(1, 6, junk), 0, KLEIN)
    assert p_pass == 0.0 and post is None and fail is not None
    # half-and-half collapses to |E>
    mix = np.zeros(6, dtype=complex)
    mix[KLEIN.identity] = mix[4] = 1.0 / np.sqrt(2.0)
    p_pass, post, fail = span_branches(PureState(1, 6, mix), 0, KLEIN)
    assert abs(p_pass - 0.5) <= 1e-12
    assert np.allclose(post.amplitudes, basis_state(KLEIN, KLEIN.identity, junk_dims=2).amplitudes)
    passed, _ = span_check(PureState(1, 6, junk), 0, KLEIN, stream(0))
    assert not passed


def test_span_check_density():
    rho = DensityState(1, 6, np.diag([0.25, 0.25, 0.25, 0.0, 0.25, 0.0]).astype(complex))
    p_pass, post, fail = span_branches(rho, 0, KLEIN)
    assert abs(p_pass - 0.75) <= 1e-12
    assert abs(np.trace(post.matrix) - 1.0) <= 1e-10
    assert abs(np.trace(fail.matrix) - 1.0) <= 1e-10


def test_apply_noise_identity_and_full_mix():
    q = coset_proof_state(S, B)
    rho = apply_noise(q, KLEIN, NoiseSpec(state_fidelity_mix=1.0))
    assert np.allclose(rho.matrix, np.outer(q.amplitudes, q.amplitudes.conj()))
    mixed = apply_noise(q, KLEIN, NoiseSpec(state_fidelity_mix=0.0))
    assert np.allclose(mixed.matrix, np.eye(4) / 4.0)


def test_apply_noise_fidelity_value():
    q = coset_proof_state(S, B)
    rho = apply_noise(q, KLEIN, NoiseSpec(state_fidelity_mix=0.959))
    fid = rho.fidelity_to_pure(q)
    assert abs(fid - (0.959 + 0.041 / 4.0)) <= 1e-12


def test_mix_register_affects_only_target():
    joint = PureState(2, 4, np.kron(coset_proof_state(S, B).amplitudes,
                                    basis_state(KLEIN, A).amplitudes))
    rho = mix_register(joint.density(), 0, KLEIN, 0.5)
    # register 1 stays pure |A>
    tensor = rho.tensor()
    reduced = np.trace(tensor, axis1=0, axis2=2)
    assert abs(reduced[A, A] - 1.0) <= 1e-12


def test_visibility_shrinks_interference():
    rng = stream(3)
    noise = NoiseSpec(visibility=0.8)
    for _ in range(50):
        st = haar_random_pure(1, 4, rng)
        for g in KLEIN.elements():
            ideal = core_circuit(st, 0, KLEIN, g).p1
            noisy = core_circuit(st, 0, KLEIN, g, noise).p1
            assert abs(noisy - 0.5) <= abs(ideal - 0.5) + 1e-12
            assert abs(noisy - (0.5 - 0.8 * (0.5 - ideal))) <= 1e-12


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(visibility=1.2)
    with pytest.raises(ValueError):
        NoiseSpec(state_fidelity_mix=-0.1)


def test_state_serialization_roundtrip():
    rng = stream(4)
    st = haar_random_pure(2, 4, rng)
    again = PureState.from_json_dict(st.to_json_dict())
    assert np.array_equal(st.amplitudes, again.amplitudes)
    rho = st.density()
    rho2 = DensityState.from_json_dict(rho.to_json_dict())
    assert np.array_equal(rho.matrix, rho2.matrix)


def test_closed_form_requires_single_register():
    rng = stream(5)
    st = haar_random_pure(2, 4, rng)
    with pytest.raises(ValueError):
        core_probability_closed_form(st, KLEIN, A)
