import math

import numpy as np
import pytest
import torch
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from helpers import finite_difference_check
from trajpred.attention import (AttentionParams, InteractionAttention, NeighborSet, area_att, area_scores,
                                dist_att, dist_scores, fuse, inverse_softplus, masked_softmax)

EXPECTED = [0.622459, 0.377541]
D = 128


def basis(i, d=D):
    v = np.zeros(d)
    v[i] = 1.0
    return v


def two_neighbors(**kw):
    base = dict(k_pos=np.array([[1.0, 0.0], [0.0, 2.0]]), k_area=np.array([10.0, 20.0]),
                v=np.stack([basis(0), basis(1)]), q_area=10.0)
    base.update(kw)
    return NeighborSet(**base)


def test_effective_w_dist_initialised_to_one():
    assert AttentionParams().w_dist == pytest.approx(1.0, abs=1e-12)
    assert inverse_softplus(2.5) == pytest.approx(math.log(math.expm1(2.5)), abs=1e-12)


class TestDistance:
    def test_single_neighbor(self):
        ns = NeighborSet(k_pos=np.array([[37.0, -4.0]]), k_area=np.array([9.0]), v=basis(3)[None])
        assert dist_scores(ns).tolist() == [1.0]
        np.testing.assert_array_equal(dist_att(ns), basis(3))

    def test_distances_one_and_two(self):
        np.testing.assert_allclose(dist_scores(two_neighbors()), EXPECTED, atol=1e-6)

    def test_equidistant(self):
        ns = two_neighbors(k_pos=np.array([[3.0, 4.0], [-5.0, 0.0]]))
        np.testing.assert_allclose(dist_scores(ns), [0.5, 0.5], atol=1e-12)

    def test_weighted_sum_of_basis_vectors(self):
        out = dist_att(two_neighbors())
        np.testing.assert_allclose(out[:2], EXPECTED, atol=1e-6)
        assert not out[2:].any()

    def test_equal_features_pass_through(self):
        v = np.random.default_rng(0).normal(size=D)
        ns = two_neighbors(v=np.stack([v, v]))
        np.testing.assert_allclose(dist_att(ns), v, atol=1e-12)

    def test_no_valid_neighbor(self):
        ns = two_neighbors(mask=np.array([False, False]))
        assert dist_scores(ns).size == 0
        np.testing.assert_array_equal(dist_att(ns), np.zeros(D))

    def test_coincident_neighbor_stays_finite(self):
        ns = two_neighbors(k_pos=np.array([[0.0, 0.0], [1.0, 0.0]]))
        w = dist_scores(ns)
        assert np.isfinite(w).all() and w[0] == pytest.approx(1.0)

    def test_mask_excludes_entry(self):
        w = dist_scores(two_neighbors(k_pos=np.array([[1.0, 0.0], [0.0, 2.0], [0.1, 0.0]]),
                                      k_area=np.array([10.0, 20.0, 5.0]),
                                      v=np.stack([basis(0), basis(1), basis(2)]),
                                      mask=np.array([True, True, False])))
        np.testing.assert_allclose(w, EXPECTED + [0.0], atol=1e-6)

    def test_alpha_changes_ratio(self):
        sharp = dist_scores(two_neighbors(), AttentionParams(alpha1=3.0))
        base = dist_scores(two_neighbors())
        assert sharp[0] / sharp[1] > base[0] / base[1]
        flat = dist_scores(two_neighbors(), AttentionParams(w_dist_raw=inverse_softplus(10.0)))
        assert flat[0] / flat[1] < base[0] / base[1]


class TestArea:
    def test_example(self):
        np.testing.assert_allclose(area_scores(two_neighbors()), EXPECTED, atol=1e-6)

    def test_equal_areas_uniform(self):
        w = area_scores(two_neighbors(k_area=np.array([7.0, 7.0])))
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-12)

    def test_single_neighbor(self):
        ns = NeighborSet(k_pos=np.array([[1.0, 1.0]]), k_area=np.array([3.0]), v=basis(5)[None])
        assert area_scores(ns).tolist() == [1.0]
        np.testing.assert_array_equal(area_att(ns), basis(5))

    def test_weighted_sum_of_basis_vectors(self):
        out = area_att(two_neighbors())
        np.testing.assert_allclose(out[:2], EXPECTED, atol=1e-6)

    def test_equal_features_pass_through(self):
        v = np.random.default_rng(1).normal(size=D)
        np.testing.assert_allclose(area_att(two_neighbors(v=np.stack([v, v]))), v, atol=1e-12)

    @pytest.mark.parametrize("areas", [[10.0, 0.0], [-1.0, 4.0]])
    def test_non_positive_area_rejected(self, areas):
        with pytest.raises(ValueError):
            area_scores(two_neighbors(k_area=np.array(areas)))

    def test_masked_non_positive_area_ignored(self):
        w = area_scores(two_neighbors(k_area=np.array([10.0, 0.0]), mask=np.array([True, False])))
        assert w.tolist() == [1.0, 0.0]


class TestFuse:
    def test_zeros(self):
        assert not fuse(np.zeros(D), np.zeros(D)).any() and fuse(np.zeros(D), np.zeros(D)).shape == (256,)

    def test_halves(self):
        a, b = np.arange(D, dtype=float), -np.arange(D, dtype=float)
        out = fuse(a, b)
        np.testing.assert_array_equal(out[:D], a)
        np.testing.assert_array_equal(out[D:], b)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            fuse(np.zeros(D), np.zeros(D - 1))

    def test_no_neighbors_gives_zero_interaction(self):
        att = InteractionAttention()
        out = att(torch.zeros(1, 2), torch.zeros(1, 0, 2), torch.ones(1), torch.zeros(1, 0),
                  torch.zeros(1, 0, D), torch.zeros(1, 0, dtype=torch.bool))
        assert out.shape == (1, 2 * D) and not out.any()


def random_set(rng, n, d=8):
    return NeighborSet(k_pos=rng.uniform(-40, 40, (n, 2)), k_area=rng.uniform(0.3, 40, n),
                       v=rng.normal(size=(n, d)), mask=rng.random(n) < 0.8, q_area=float(rng.uniform(0.3, 40)))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_weights_normalised(n, seed):
    ns = random_set(np.random.default_rng(seed), n)
    assume(ns.mask.any())
    for w in (dist_scores(ns), area_scores(ns)):
        assert (w >= 0).all() and abs(w.sum() - 1.0) < 1e-6
        assert not w[~ns.mask].any()


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_permutation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    ns = random_set(rng, n)
    perm = rng.permutation(n)
    shuffled = NeighborSet(ns.k_pos[perm], ns.k_area[perm], ns.v[perm], ns.mask[perm], q_area=ns.q_area)
    np.testing.assert_allclose(dist_att(shuffled), dist_att(ns), atol=1e-9)
    np.testing.assert_allclose(area_att(shuffled), area_att(ns), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
def test_closer_neighbor_gets_more_weight(n, seed, alpha):
    rng = np.random.default_rng(seed)
    ns = random_set(rng, n)
    ns.mask = np.ones(n, dtype=bool)
    w = dist_scores(ns, AttentionParams(alpha1=alpha))
    d = np.linalg.norm(ns.k_pos, axis=1)
    for i in range(n):
        for j in range(n):
            if d[i] < d[j] - 1e-9:
                assert w[i] > w[j]


@pytest.mark.parametrize("seed", range(5))
def test_scalar_parameter_gradients(seed):
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    att = InteractionAttention(init=AttentionParams(alpha1=rng.uniform(0.5, 2), alpha2=rng.uniform(0.5, 2),
                                                    w_area=rng.uniform(0.5, 2))).double()
    b, n = 2, 4
    q = torch.zeros(b, 2, dtype=torch.float64)
    k = torch.tensor(rng.uniform(-5, 5, (b, n, 2)))
    qa = torch.tensor(rng.uniform(2, 10, b))
    ka = torch.tensor(rng.uniform(2, 10, (b, n)))
    v = torch.tensor(rng.normal(size=(b, n, 6)))
    mask = torch.tensor([[True, True, True, False], [True, False, True, True]])
    target = torch.tensor(rng.normal(size=(b, 12)))
    params = [att.alpha1, att.w_dist_raw, att.alpha2, att.w_area]
    err = finite_difference_check(lambda: ((att(q, k, qa, ka, v, mask) - target) ** 2).sum(), params,
                                  seed=seed)
    assert err < 1e-4


def test_masked_softmax_rows():
    scores = torch.tensor([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
    mask = torch.tensor([[True, False, True], [False, False, False]])
    out = masked_softmax(scores, mask)
    assert out[0, 1] == 0 and out[0].sum().item() == pytest.approx(1.0)
    assert not out[1].any()


def test_disabled_branches_output_zeros():
    rng = np.random.default_rng(3)
    ns = random_set(rng, 4, d=D)
    q, k, qa, ka, v, mask = ns.tensors()
    att = InteractionAttention(use_distance=False, use_area=True).double()
    out = att(q, k, qa, ka, v, mask)
    assert not out[0, :D].any() and out[0, D:].any()
