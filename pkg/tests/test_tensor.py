import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tuckervar.tensor import (
    TuckerFactors,
    kronecker,
    mode_n_matricize,
    mode_n_product,
    mode_n_unmatricize,
    outer3,
    tucker_matricized,
    tucker_reconstruct,
)


# ---------------------------------------------------------------------------
# Independent oracles: definitional loops, never the vectorized code paths.


def matricize_by_fibers(t, mode):
    """Column-by-column unfolding straight from the fiber definition."""
    ax = mode - 1
    rest = [i for i in range(3) if i != ax]
    cols = []
    for hi in range(t.shape[rest[1]]):
        for lo in range(t.shape[rest[0]]):
            idx = [0, 0, 0]
            idx[rest[0]] = lo
            idx[rest[1]] = hi
            fiber = []
            for i in range(t.shape[ax]):
                idx[ax] = i
                fiber.append(t[tuple(idx)])
            cols.append(fiber)
    return np.array(cols).T


def mode_product_by_sum(t, m, mode):
    ax = mode - 1
    out_shape = list(t.shape)
    out_shape[ax] = m.shape[0]
    out = np.zeros(out_shape)
    for i in range(out_shape[0]):
        for j in range(out_shape[1]):
            for k in range(out_shape[2]):
                acc = 0.0
                for s in range(t.shape[ax]):
                    idx = [i, j, k]
                    idx[ax] = s
                    acc += t[tuple(idx)] * m[[i, j, k][ax], s]
                out[i, j, k] = acc
    return out


def tucker_by_triple_sum(core, b1, b2, b3):
    r1, r2, r3 = core.shape
    out = np.zeros((b1.shape[0], b2.shape[0], b3.shape[0]))
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            for k in range(out.shape[2]):
                acc = 0.0
                for a in range(r1):
                    for b in range(r2):
                        for c in range(r3):
                            acc += core[a, b, c] * b1[i, a] * b2[j, b] * b3[k, c]
                out[i, j, k] = acc
    return out


def random_factors(rng, k=3, el=2, ranks=(2, 2, 2)):
    return TuckerFactors(
        core=rng.standard_normal(ranks),
        beta1=rng.standard_normal((k, ranks[0])),
        beta2=rng.standard_normal((k, ranks[1])),
        beta3=rng.standard_normal((el, ranks[2])),
    )


# ---------------------------------------------------------------------------
# mode_n_matricize


def test_matricize_single_entry():
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = 5.0
    m = mode_n_matricize(t, 1)
    expected = np.zeros((2, 4))
    expected[0, 0] = 5.0
    np.testing.assert_array_equal(m, expected)


def test_matricize_outer_product_kron_identity():
    rng = np.random.default_rng(1)
    u, v, w = rng.standard_normal(3), rng.standard_normal(4), rng.standard_normal(2)
    t = outer3(u, v, w)
    np.testing.assert_allclose(mode_n_matricize(t, 1), np.outer(u, np.kron(w, v)))


def test_matricize_mode2_fiber_definition():
    t = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                t[i, j, k] = (i + 1) + 2 * j + 4 * k
    np.testing.assert_array_equal(mode_n_matricize(t, 2), matricize_by_fibers(t, 2))


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_matricize_matches_fiber_oracle(mode):
    rng = np.random.default_rng(mode)
    t = rng.standard_normal((3, 4, 2))
    np.testing.assert_array_equal(mode_n_matricize(t, mode), matricize_by_fibers(t, mode))


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_matricize_roundtrip_exact(mode):
    rng = np.random.default_rng(10 + mode)
    t = rng.standard_normal((4, 3, 5))
    m = mode_n_matricize(t, mode)
    np.testing.assert_array_equal(mode_n_unmatricize(m, t.shape, mode), t)


def test_matricize_rejects_bad_mode():
    with pytest.raises(ValueError):
        mode_n_matricize(np.zeros((2, 2, 2)), 0)
    with pytest.raises(ValueError):
        mode_n_matricize(np.zeros((2, 2, 2)), 4)


# ---------------------------------------------------------------------------
# mode_n_product


def test_mode_product_identity():
    rng = np.random.default_rng(2)
    t = rng.standard_normal((3, 2, 4))
    np.testing.assert_array_equal(mode_n_product(t, np.eye(3), 1), t)


def test_mode_product_rank_one():
    rng = np.random.default_rng(3)
    u, v, w = rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal(2)
    m = rng.standard_normal((4, 3))
    np.testing.assert_allclose(mode_n_product(outer3(u, v, w), m, 1), outer3(m @ u, v, w))


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_mode_product_matches_sum_oracle(mode):
    rng = np.random.default_rng(4 + mode)
    t = rng.standard_normal((3, 2, 2))
    m = rng.standard_normal((4, t.shape[mode - 1]))
    np.testing.assert_allclose(mode_n_product(t, m, mode), mode_product_by_sum(t, m, mode))


def test_mode_product_dimension_mismatch():
    with pytest.raises(ValueError):
        mode_n_product(np.zeros((3, 2, 2)), np.zeros((4, 2)), 1)


# ---------------------------------------------------------------------------
# kronecker / outer3


def test_kron_identity_left():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    got = kronecker(np.eye(2), a)
    expected = np.block([[a, np.zeros((2, 2))], [np.zeros((2, 2)), a]])
    np.testing.assert_array_equal(got, expected)


def test_kron_scalar():
    np.testing.assert_array_equal(kronecker([[2.0]], [[3.0]]), [[6.0]])


def test_kron_block_definition():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    got = kronecker(a, b)
    for i in range(2):
        for j in range(2):
            np.testing.assert_array_equal(got[2 * i : 2 * i + 2, 2 * j : 2 * j + 2], a[i, j] * b)


def test_outer3_basis():
    t = outer3([1, 0], [1, 0, 0], [1, 0])
    assert t[0, 0, 0] == 1.0
    assert np.sum(np.abs(t)) == 1.0


def test_outer3_zero_vector_annihilates():
    t = outer3([0.0, 0.0], [1.0, 2.0], [3.0, 4.0])
    np.testing.assert_array_equal(t, np.zeros((2, 2, 2)))


def test_outer3_elementwise():
    u, v, w = np.array([1.0, 2.0]), np.array([3.0, 4.0]), np.array([5.0, 6.0])
    t = outer3(u, v, w)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                assert t[i, j, k] == u[i] * v[j] * w[k]


def test_outer3_rejects_empty():
    with pytest.raises(ValueError):
        outer3([], [1.0], [1.0])


# ---------------------------------------------------------------------------
# tucker_reconstruct


def test_tucker_rank_one():
    rng = np.random.default_rng(5)
    u, v, w = rng.standard_normal(3), rng.standard_normal(3), rng.standard_normal(2)
    f = TuckerFactors(
        core=np.ones((1, 1, 1)), beta1=u[:, None], beta2=v[:, None], beta3=w[:, None]
    )
    np.testing.assert_allclose(tucker_reconstruct(f), outer3(u, v, w))


def test_tucker_identity_factors():
    rng = np.random.default_rng(6)
    core = rng.standard_normal((3, 3, 2))
    f = TuckerFactors(core=core, beta1=np.eye(3), beta2=np.eye(3), beta3=np.eye(2))
    np.testing.assert_array_equal(tucker_reconstruct(f), core)


def test_tucker_matches_triple_sum():
    rng = np.random.default_rng(7)
    f = random_factors(rng, k=3, el=2, ranks=(2, 2, 2))
    oracle = tucker_by_triple_sum(f.core, f.beta1, f.beta2, f.beta3)
    np.testing.assert_allclose(tucker_reconstruct(f), oracle, rtol=1e-12, atol=1e-12)


def test_tucker_factor_validation():
    with pytest.raises(ValueError):
        TuckerFactors(
            core=np.zeros((2, 2, 2)),
            beta1=np.zeros((3, 1)),  # R1 mismatch
            beta2=np.zeros((3, 2)),
            beta3=np.zeros((2, 2)),
        )
    with pytest.raises(ValueError):
        TuckerFactors(
            core=np.zeros((4, 2, 2)),  # R1 > K
            beta1=np.zeros((3, 4)),
            beta2=np.zeros((3, 2)),
            beta3=np.zeros((2, 2)),
        )


# ---------------------------------------------------------------------------
# Cross-representation invariants


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_triple_sum_and_mode_product_agree(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    el = int(rng.integers(1, 4))
    ranks = (int(rng.integers(1, k + 1)), int(rng.integers(1, k + 1)), int(rng.integers(1, el + 1)))
    f = random_factors(rng, k=k, el=el, ranks=ranks)
    a = tucker_reconstruct(f)
    b = tucker_by_triple_sum(f.core, f.beta1, f.beta2, f.beta3)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


def test_mode1_kron_identity():
    rng = np.random.default_rng(8)
    f = random_factors(rng, k=4, el=3, ranks=(2, 3, 2))
    lhs = tucker_matricized(f)
    rhs = mode_n_matricize(tucker_reconstruct(f), 1)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_zero_beta3_row_zeroes_frontal_slice():
    # Forward direction of the lag-elimination lemma: exact zeros, no tolerance.
    rng = np.random.default_rng(9)
    f = random_factors(rng, k=4, el=3, ranks=(2, 2, 2))
    b3 = f.beta3.copy()
    b3[1, :] = 0.0
    f = TuckerFactors(core=f.core, beta1=f.beta1, beta2=f.beta2, beta3=b3)
    slice1 = tucker_reconstruct(f)[:, :, 1]
    assert np.all(slice1 == 0.0)
