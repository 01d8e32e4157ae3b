import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from dimwall.boolean import all_parities, hypercube_space, k_sparse_parities
from dimwall.bound import epsilon_deterministic, theorem1_report
from dimwall.hilbert import DiscreteSpace, FuncVec, residual_sq
from dimwall.kernel import (
    KernelFit,
    KernelSpec,
    LabeledSample,
    builtin_kernels,
    deterministic_design,
    fit,
    gaussian_kernel,
    get_kernel,
    iid_design,
    iid_design_sampler,
    kernel_section,
    labels_for,
    linear_kernel,
    method_subspace,
    mse_under_P,
    polynomial_kernel,
    sample_size_lower_bound,
)

seeds = st.integers(0, 2 ** 32 - 1)


def cube_points(rng, d, n):
    return hypercube_space(d).coords[rng.integers(0, 1 << d, size=n)]


class TestBuiltins:
    def test_names_and_defaults(self):
        names = [k.name for k in builtin_kernels()]
        assert names == ["gaussian", "polynomial", "linear"]
        assert get_kernel("polynomial").params["degree"] == 3

    def test_unknown(self):
        with pytest.raises(KeyError):
            get_kernel("sigmoid")

    def test_gaussian_diagonal(self, rng):
        k = gaussian_kernel()
        for x in rng.normal(size=(5, 3)):
            assert k.eval(x, x) == 1.0

    def test_polynomial_formula(self):
        x = np.ones(4)
        assert polynomial_kernel(3).eval(x, x) == 8.0

    def test_linear_formula(self):
        x = np.array([1.0, -1.0, 1.0])
        y = np.array([1.0, 1.0, 1.0])
        assert linear_kernel().eval(x, y) == pytest.approx(1 + 1 / 3)

    def test_gaussian_default_gamma(self):
        x, y = np.ones(5), -np.ones(5)
        assert gaussian_kernel().eval(x, y) == pytest.approx(math.exp(-20 / 5))

    @pytest.mark.parametrize("k", builtin_kernels(), ids=lambda k: k.name)
    def test_block_matches_eval(self, k, rng):
        xs, ys = rng.normal(size=(6, 4)), rng.normal(size=(5, 4))
        loop = np.array([[k.eval(a, b) for b in ys] for a in xs])
        np.testing.assert_allclose(k.matrix(xs, ys), loop, rtol=1e-12)

    @pytest.mark.parametrize("k", builtin_kernels(), ids=lambda k: k.name)
    def test_psd_and_symmetric(self, k, rng):
        xs = cube_points(rng, 6, 16)
        g = k.matrix(xs, xs)
        assert np.abs(g - g.T).max() <= 1e-12
        ev = np.linalg.eigvalsh(g)
        assert ev.min() >= -1e-8 * ev.max()

    def test_eval_only_kernel(self, rng):
        k = KernelSpec("custom", lambda x, y: float(np.dot(x, y)))
        xs = rng.normal(size=(3, 2))
        np.testing.assert_allclose(k.matrix(xs, xs), xs @ xs.T)


class TestSections:
    def test_linear_pointwise(self):
        space = hypercube_space(2)
        k = linear_kernel()
        x0 = space.coords[2]
        f = kernel_section(k, x0, space)
        np.testing.assert_allclose(f.values, [k.eval(x, x0) for x in space.coords])

    def test_sharp_gaussian(self):
        space = hypercube_space(3)
        gamma = 50.0
        f = kernel_section(gaussian_kernel(gamma), space.coords[5], space)
        assert f.values[5] == 1.0
        assert np.all(np.delete(f.values, 5) <= math.exp(-4 * gamma))

    def test_deterministic(self):
        space = hypercube_space(4)
        a = kernel_section(gaussian_kernel(), space.coords[3], space)
        b = kernel_section(gaussian_kernel(), space.coords[3], space)
        assert a.values.tobytes() == b.values.tobytes()

    def test_point_not_in_space(self):
        with pytest.raises(ValueError):
            kernel_section(gaussian_kernel(), np.zeros(3), hypercube_space(3))


class TestMethodSubspace:
    def test_duplicates(self):
        space = hypercube_space(3)
        x0 = space.coords[1]
        assert method_subspace(gaussian_kernel(), [x0, x0], space).rank == 1

    def test_full_rank(self):
        space = hypercube_space(4)
        k = gaussian_kernel()
        g = k.matrix(space.coords, space.coords)
        assert np.linalg.eigvalsh(g).min() > 0
        assert method_subspace(k, space.coords, space).rank == space.size

    def test_rank_at_most_n_d10(self, rng):
        space = hypercube_space(10)
        xs = iid_design(space, 512, rng)
        assert method_subspace(gaussian_kernel(), xs, space).rank <= 512

    def test_low_rank_kernels(self, rng):
        # multilinear monomials of degree <= p span the sections
        space = hypercube_space(6)
        xs = space.coords
        assert method_subspace(linear_kernel(), xs, space).rank == 7
        assert method_subspace(polynomial_kernel(2), xs, space).rank == 1 + 6 + 15


class TestFit:
    def test_interpolates(self, rng):
        space = hypercube_space(4)
        xs = space.coords[rng.choice(16, 8, replace=False)]
        ys = rng.normal(size=8)
        f = fit(gaussian_kernel(), LabeledSample(xs, ys))
        np.testing.assert_allclose(f.predict(xs), ys, atol=1e-8)

    def test_zero_labels(self, rng):
        xs = cube_points(rng, 3, 5)
        f = fit(gaussian_kernel(), LabeledSample(xs, np.zeros(5)))
        np.testing.assert_array_equal(f.alphas, 0.0)

    def test_dense_solver_oracle(self, rng):
        space = hypercube_space(3)
        xs = space.coords[rng.choice(8, 5, replace=False)]
        ys = rng.normal(size=5)
        k = gaussian_kernel()
        g = np.array([[k.eval(a, b) for b in xs] for a in xs])
        np.testing.assert_allclose(fit(k, LabeledSample(xs, ys)).alphas,
                                   scipy.linalg.solve(g, ys, assume_a="pos"), atol=1e-8)
        ridge = 0.1
        np.testing.assert_allclose(fit(k, LabeledSample(xs, ys), ridge).alphas,
                                   scipy.linalg.solve(g + ridge * 5 * np.eye(5), ys), atol=1e-8)

    def test_singular_min_norm(self, rng):
        space = hypercube_space(3)
        x0 = space.coords[0]
        xs = np.stack([x0, x0, space.coords[1]])
        ys = np.array([1.0, 1.0, -1.0])
        k = gaussian_kernel()
        g = k.matrix(xs, xs)
        np.testing.assert_allclose(fit(k, LabeledSample(xs, ys)).alphas,
                                   scipy.linalg.pinv(g) @ ys, atol=1e-8)

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            LabeledSample(np.ones((2, 2)), [1.0, np.inf])
        with pytest.raises(ValueError):
            LabeledSample(np.ones((2, 2)), [1.0])
        with pytest.raises(ValueError):
            KernelFit(gaussian_kernel(), np.ones((2, 2)), np.ones(3))


class TestMSE:
    def test_section_target(self):
        space = hypercube_space(4)
        k = gaussian_kernel()
        x0 = space.coords[6]
        target = kernel_section(k, x0, space)
        f = fit(k, LabeledSample(x0[None, :], labels_for(target, [x0])))
        assert mse_under_P(f, target) == pytest.approx(0.0, abs=1e-9)

    def test_zero_predictor(self):
        target = all_parities(3)[5]
        f = KernelFit(gaussian_kernel(), hypercube_space(3).coords[:2], np.zeros(2))
        assert mse_under_P(f, target) == 1.0

    def test_direct_sum_oracle(self, rng):
        space = hypercube_space(4)
        target = FuncVec(space, rng.normal(size=16))
        k = polynomial_kernel()
        xs = cube_points(rng, 4, 6)
        f = KernelFit(k, xs, rng.normal(size=6))
        pred = [sum(a * k.eval(x, xi) for a, xi in zip(f.alphas, xs)) for x in space.coords]
        oracle = sum(p * (y - t) ** 2 for p, y, t in zip(space.weights, pred, target.values))
        assert mse_under_P(f, target) == pytest.approx(oracle, rel=1e-12)


class TestLowerBound:
    def test_paper_values(self):
        assert sample_size_lower_bound(2 ** 10, 0.1) == pytest.approx(921.6)
        assert sample_size_lower_bound(math.comb(10, 2), 0.5) == 22.5
        assert sample_size_lower_bound(17, 1.0) == 0.0

    def test_range(self):
        with pytest.raises(ValueError):
            sample_size_lower_bound(4, 1.5)

    @given(st.integers(1, 10 ** 6), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_linear_decreasing(self, n, a, b, t):
        lo, hi = sorted((a, b))
        assert sample_size_lower_bound(n, hi) <= sample_size_lower_bound(n, lo)
        mix = t * a + (1 - t) * b
        if 0 <= mix <= 1:
            expected = t * sample_size_lower_bound(n, a) + (1 - t) * sample_size_lower_bound(n, b)
            assert sample_size_lower_bound(n, mix) == pytest.approx(expected, rel=1e-9, abs=1e-6)


class TestSampler:
    def test_n1(self):
        s = iid_design_sampler(gaussian_kernel(), hypercube_space(4), 1)
        assert all(s.draw(seed).rank <= 1 for seed in range(10))

    def test_same_seed(self):
        s = iid_design_sampler(gaussian_kernel(), hypercube_space(5), 8)
        assert s.draw(17).vectors.tobytes() == s.draw(17).vectors.tobytes()

    def test_deterministic_design(self):
        space = hypercube_space(3)
        np.testing.assert_array_equal(deterministic_design(space, 3), space.coords[:3])
        with pytest.raises(ValueError):
            deterministic_design(space, 9)

    def test_label_noise(self, rng):
        target = all_parities(4)[3]
        xs = cube_points(rng, 4, 2000)
        clean = labels_for(target, xs)
        noisy = labels_for(target, xs, 0.2, rng)
        assert abs(np.mean(clean != noisy) - 0.2) < 0.04


# ---- walls -------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 7), st.sampled_from(["gaussian", "polynomial", "linear"]))
def test_dimension_wall(seed, d, name):
    rng = np.random.default_rng(seed)
    space = hypercube_space(d)
    n = int(rng.integers(1, 2 * space.size))
    w = method_subspace(get_kernel(name), iid_design(space, n, rng), space)
    eps = epsilon_deterministic(all_parities(d), w)
    assert eps >= 1 - n / space.size - 1e-9
    assert eps == pytest.approx(1 - w.rank / space.size, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 8))
def test_sparse_wall(seed, d):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, d + 1))
    space = hypercube_space(d)
    phis = k_sparse_parities(d, k)
    n = int(rng.integers(1, 40))
    w = method_subspace(gaussian_kernel(), iid_design(space, n, rng), space)
    rep = theorem1_report(phis, w)
    assert rep.slack >= -1e-9 * len(phis)
    assert rep.epsilon >= 1 - w.rank / len(phis) - 1e-9
    assert rep.epsilon >= 1 - n / len(phis) - 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 6), st.floats(0, 1))
def test_fit_never_beats_span(seed, d, ridge):
    rng = np.random.default_rng(seed)
    space = hypercube_space(d)
    k = gaussian_kernel()
    xs = iid_design(space, int(rng.integers(1, 20)), rng)
    target = FuncVec(space, rng.normal(size=space.size))
    f = fit(k, LabeledSample(xs, labels_for(target, xs)), ridge)
    assert mse_under_P(f, target) >= residual_sq(target, method_subspace(k, xs, space)) - 1e-9


def test_wall_ignores_labels(rng):
    space = hypercube_space(5)
    phis = all_parities(5)
    k = gaussian_kernel()
    xs = iid_design(space, 12, rng)
    target = phis[9]
    ys = labels_for(target, xs)
    perm = rng.permutation(len(ys))
    eps = [epsilon_deterministic(phis, method_subspace(k, xs, space)) for _ in (ys, ys[perm])]
    fits = [fit(k, LabeledSample(xs, y)) for y in (ys, ys[perm])]
    assert eps[0] == eps[1]
    assert not np.allclose(fits[0].alphas, fits[1].alphas)


def test_general_space_sections(rng):
    pts = rng.normal(size=(7, 2))
    space = DiscreteSpace(pts)
    w = method_subspace(gaussian_kernel(1.0), pts[:3], space)
    assert w.rank == 3
