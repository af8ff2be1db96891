import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nppt_activation.tensor import (
    LabeledOperator,
    Layout,
    PureState,
    flip_operator,
    hermitian_spectrum,
    identity,
    kron,
    max_entangled_projector,
    operator_from_json,
    operator_to_json,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    sample_states,
    schmidt_coefficients,
    state_from_json,
    state_to_json,
)
from nppt_activation.states import WernerParam, werner_matrix

from conftest import labeled, random_density, random_hermitian, random_matrix


def pt_by_definition(mat, d):
    """<ij|rho^{T_A}|kl> = <kj|rho|il>, straight from the index formula."""
    out = np.zeros_like(mat)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    out[i * d + j, k * d + l] = mat[k * d + j, i * d + l]
    return out


def test_layout_rejects_duplicates():
    with pytest.raises(ValueError):
        Layout([("A", 2), ("A", 3)])


def test_operator_shape_must_match_layout():
    with pytest.raises(ValueError):
        LabeledOperator(Layout([("A", 2), ("B", 2)]), np.eye(3))


def test_operator_is_immutable():
    op = identity([("A", 2)])
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5


def test_flip_d2():
    f = flip_operator(2).matrix
    expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.array_equal(f, expected)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_flip_trace_and_involution(d):
    f = flip_operator(d)
    assert f.trace() == d
    assert np.array_equal((f @ f).matrix, np.eye(d * d))


def test_flip_rejects_small_d():
    with pytest.raises(ValueError):
        flip_operator(1)
    with pytest.raises(ValueError):
        max_entangled_projector(1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_max_entangled_projector(d):
    p = max_entangled_projector(d)
    assert p.trace() == pytest.approx(1, abs=1e-15)
    spec = hermitian_spectrum(p)
    assert np.allclose(spec, [0] * (d * d - 1) + [1], atol=1e-12)
    # P^{T_B} = F / d, entry by entry
    assert np.allclose(partial_transpose(p, ["B"]).matrix, flip_operator(d).matrix / d, atol=1e-15)


def test_kron_identities(rng):
    d = 3
    assert np.array_equal(kron(identity([("A", d)]), identity([("B", d)])).matrix, np.eye(d * d))
    a = labeled(random_matrix(rng, 3), [("A", 3)])
    b = labeled(random_matrix(rng, 3), [("B", 3)])
    assert kron(a, b).trace() == pytest.approx(a.trace() * b.trace(), abs=1e-12)
    f = flip_operator(d, ("A", "B"))
    p = max_entangled_projector(d, ("C", "D"))
    assert kron(f, p).trace() == pytest.approx(d, abs=1e-12)


def test_kron_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        kron(identity([("A", 2)]), identity([("A", 2)]))


def test_permute_flip_is_symmetric():
    f = flip_operator(3)
    swapped = permute_subsystems(f, ["B", "A"])
    assert swapped.labels == ("B", "A")
    assert np.array_equal(swapped.matrix, f.matrix)


def test_permute_round_trip_and_spectrum(rng):
    h = labeled(random_hermitian(rng, 24), [("A", 2), ("B", 3), ("C", 4)])
    p = permute_subsystems(h, ["C", "A", "B"])
    back = permute_subsystems(p, ["A", "B", "C"])
    assert np.array_equal(back.matrix, h.matrix)
    assert np.allclose(hermitian_spectrum(p), hermitian_spectrum(h), atol=1e-12)


def test_permute_moves_factors(rng):
    a = labeled(random_matrix(rng, 2), [("A", 2)])
    b = labeled(random_matrix(rng, 3), [("B", 3)])
    assert np.allclose(permute_subsystems(kron(a, b), ["B", "A"]).matrix, kron(b, a).matrix)


def test_permute_rejects_bad_orders():
    f = flip_operator(2)
    with pytest.raises(KeyError):
        permute_subsystems(f, ["A", "C"])
    with pytest.raises(ValueError):
        permute_subsystems(f, ["A", "A"])
    with pytest.raises(ValueError):
        permute_subsystems(f, ["A"])


def test_partial_transpose_matches_index_definition(rng):
    d = 3
    m = random_matrix(rng, d * d)
    op = labeled(m, [("A", d), ("B", d)])
    assert np.array_equal(partial_transpose(op, ["A"]).matrix, pt_by_definition(m, d))


def test_partial_transpose_involution_and_factorized(rng):
    m, n = random_matrix(rng, 3), random_matrix(rng, 3)
    op = kron(labeled(m, [("M", 3)]), labeled(n, [("N", 3)]))
    assert np.array_equal(partial_transpose(partial_transpose(op, ["N"]), ["N"]).matrix, op.matrix)
    assert np.array_equal(partial_transpose(op, ["N"]).matrix, np.kron(m, n.T))
    assert partial_transpose(op, ["M"]).trace() == pytest.approx(op.trace(), abs=1e-12)


def test_partial_transpose_both_sides_is_full_transpose(rng):
    op = labeled(random_matrix(rng, 12), [("A", 3), ("B", 4)])
    both = partial_transpose(partial_transpose(op, ["A"]), ["B"])
    assert np.array_equal(both.matrix, op.matrix.T)


def test_partial_transpose_rejects_unknown_label():
    with pytest.raises(KeyError):
        partial_transpose(flip_operator(2), ["Z"])


@pytest.mark.parametrize("alpha", [-3.0, 0.0, 1.0, 2.0, 3.0])
def test_werner_pt_min_eigenvalue(alpha):
    d = 3
    rho = werner_matrix(WernerParam(d, alpha))
    brute = hermitian_spectrum(partial_transpose(rho, ["B"]))[0]
    # rho^{T_B} = (1 - alpha P)/(d^2 - alpha): eigenvalues (1 - alpha)/(d^2-alpha) and 1/(d^2-alpha)
    analytic = min(1 - alpha, 1) / (d * d - alpha)
    assert brute == pytest.approx(analytic, abs=1e-12)


def test_partial_trace_basics(rng):
    a = labeled(random_matrix(rng, 3), [("A", 3)])
    b = labeled(random_matrix(rng, 2), [("B", 2)])
    red = partial_trace(kron(a, b), ["B"])
    assert red.labels == ("A",)
    assert np.allclose(red.matrix, a.matrix * b.trace())
    red_a = partial_trace(kron(a, b), ["A"])
    assert np.allclose(red_a.matrix, b.matrix * a.trace())
    p = max_entangled_projector(4)
    assert np.allclose(partial_trace(p, ["A"]).matrix, np.eye(4) / 4)
    x = labeled(random_matrix(rng, 24), [("A", 2), ("B", 3), ("C", 4)])
    for subset in (["A"], ["B"], ["C"], ["A", "C"], ["B", "C"]):
        assert partial_trace(x, subset).trace() == pytest.approx(x.trace(), abs=1e-10)


def test_partial_trace_three_parties_against_einsum(rng):
    m = random_matrix(rng, 24)
    x = labeled(m, [("A", 2), ("B", 3), ("C", 4)])
    t = m.reshape(2, 3, 4, 2, 3, 4)
    assert np.allclose(partial_trace(x, ["B"]).matrix, np.einsum("abcdbf->acdf", t).reshape(8, 8))
    assert np.allclose(partial_trace(x, ["A", "C"]).matrix, np.einsum("abcaec->be", t))


def test_partial_trace_rejects_everything():
    with pytest.raises(ValueError):
        partial_trace(flip_operator(2), ["A", "B"])


def test_partial_trace_preserves_positivity(rng):
    rho = labeled(random_density(rng, 12), [("A", 3), ("B", 4)])
    assert hermitian_spectrum(partial_trace(rho, ["A"]))[0] >= -1e-12


def test_spectrum_examples():
    assert np.allclose(hermitian_spectrum(flip_operator(2)), [-1, 1, 1, 1])
    assert np.allclose(hermitian_spectrum(identity([("A", 5)])), np.ones(5))


def test_spectrum_rejects_non_hermitian():
    op = LabeledOperator(Layout([("A", 2)]), np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError, match="deviation"):
        hermitian_spectrum(op)


@pytest.mark.parametrize("alpha", [-3.0, 0.0, 3.0])
def test_werner_spectrum_is_a_distribution(alpha):
    spec = hermitian_spectrum(werner_matrix(WernerParam(3, alpha)))
    assert spec[0] >= -1e-12
    assert spec.sum() == pytest.approx(1, abs=1e-12)


def test_sample_product_states_have_pure_marginals():
    for seed in range(5):
        psi = sample_states("haar_pure_product", 3, seed)
        rho = psi.projector()
        for side in ("A", "B"):
            red = partial_trace(rho, [side]).matrix
            assert np.real(np.trace(red @ red)) == pytest.approx(1, abs=1e-12)


def test_sample_schmidt_rank2():
    for seed in range(5):
        psi = sample_states("schmidt_rank2", 4, seed)
        coeffs = schmidt_coefficients(psi, ["A"])
        assert np.all(coeffs[2:] < 1e-12)
        assert coeffs[1] > 1e-6


def test_sample_determinism():
    a = sample_states("schmidt_rank2", 3, 7).amplitudes
    b = sample_states("schmidt_rank2", 3, 7).amplitudes
    assert a.tobytes() == b.tobytes()
    u = sample_states("haar_unitary", 3, 7).matrix
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)
    with pytest.raises(ValueError):
        sample_states("gaussian", 3, 0)


def test_pure_state_normalization():
    with pytest.raises(ValueError):
        PureState(Layout([("A", 2)]), np.array([1.0, 1.0]))


def test_operator_json_round_trip(rng):
    op = labeled(random_matrix(rng, 6), [("A", 2), ("B", 3)])
    back = operator_from_json(operator_to_json(op))
    assert back.layout == op.layout
    assert back.matrix.tobytes() == op.matrix.tobytes()
    payload = json.loads(operator_to_json(op))
    assert set(payload) == {"labels", "dims", "re", "im"}


def test_operator_json_rejects_mismatched_lengths():
    payload = {"labels": ["A"], "dims": [2], "re": [1, 0, 0], "im": [0, 0, 0]}
    with pytest.raises(ValueError):
        operator_from_json(payload)
    payload = {"labels": ["A"], "dims": [2], "re": [1, 0, 0, 1], "im": [0, 0, 0]}
    with pytest.raises(ValueError):
        operator_from_json(payload)


def test_state_json_round_trip():
    psi = sample_states("haar_pure_product", 2, 3)
    back = state_from_json(state_to_json(psi))
    assert back.amplitudes.tobytes() == psi.amplitudes.tobytes()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), order=st.permutations(["A", "B", "C"]))
def test_permute_commutes_with_partial_transpose(seed, order):
    rng = np.random.default_rng(seed)
    x = labeled(random_matrix(rng, 12), [("A", 2), ("B", 3), ("C", 2)])
    lhs = partial_transpose(permute_subsystems(x, order), ["B"])
    rhs = permute_subsystems(partial_transpose(x, ["B"]), order)
    assert np.allclose(lhs.matrix, rhs.matrix, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_trace_with_local_operator(seed):
    rng = np.random.default_rng(seed)
    m, n, x = (random_matrix(rng, 3) for _ in range(3))
    mn = kron(labeled(m, [("A", 3)]), labeled(n, [("B", 3)]))
    one_x = kron(identity([("A", 3)]), labeled(x, [("B", 3)]))
    lhs = (mn @ one_x).trace()
    assert lhs == pytest.approx(np.trace(m) * np.trace(n @ x), abs=1e-12 * max(1, abs(lhs)))
