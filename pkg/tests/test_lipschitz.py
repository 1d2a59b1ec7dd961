import numpy as np
import pytest
from numpy.testing import assert_allclose

from gapdirect.gap import gap_value_batch
from gapdirect.lipschitz import (BoundCache, gap_lipschitz_bound, l1_exact_vertices, l1_tilde,
                                 l2_exact, l3_bound, lf_bound, pseudoinverse, spectral_norm)
from gapdirect.problems import BoxSet, eval_F

from oracles import make_affine_ep
from test_problems import make_trig, make_vi

# Known counterexample data: P=[[1,1],[0,0]], r=(0,1) on [0,1]^2
P_CEX = np.array([[1.0, 1.0], [0.0, 0.0]])
R_CEX = np.array([0.0, 1.0])


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(4)) == pytest.approx(1.0)

    def test_counterexample_matrix(self):
        assert spectral_norm(P_CEX) == pytest.approx(np.sqrt(2.0))

    def test_diagonal(self):
        assert spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)


class TestPseudoinverse:
    def test_counterexample_matrix(self):
        assert_allclose(pseudoinverse(P_CEX), [[0.5, 0.0], [0.5, 0.0]], atol=1e-14)

    def test_identity_and_zero(self):
        assert_allclose(pseudoinverse(np.eye(3)), np.eye(3), atol=1e-14)
        assert_allclose(pseudoinverse(np.zeros((2, 2))), np.zeros((2, 2)))


class TestL1Tilde:
    def test_counterexample_bound_value(self):
        # min{L1', L1'', L1'''} = min{3, 3, 2 + sqrt(5)} = 3
        val = l1_tilde(P_CEX, R_CEX, np.zeros(2), np.ones(2))
        assert val == pytest.approx(3.0)
        exact = l1_exact_vertices(P_CEX, R_CEX, np.zeros(2), np.ones(2))
        assert exact == pytest.approx(np.sqrt(5.0))
        assert val >= exact

    def test_zero_matrix_collapses_to_r_norm(self):
        r = np.array([1.0, -2.0, 2.0])
        assert l1_tilde(np.zeros((3, 3)), r, -np.ones(3), np.ones(3)) == pytest.approx(3.0)

    def test_identity_tight(self):
        val = l1_tilde(np.eye(2), np.zeros(2), np.zeros(2), np.ones(2))
        assert val == pytest.approx(np.sqrt(2.0))

    def test_dominates_exact_maximum(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            n = rng.integers(1, 7)
            P = rng.uniform(-3, 3, (n, n))
            r = rng.uniform(-2, 2, n)
            a = rng.uniform(-2, 0, n)
            b = a + rng.uniform(0, 3, n)
            assert l1_tilde(P, r, a, b) >= l1_exact_vertices(P, r, a, b) - 1e-10

    def test_vertex_guard(self):
        with pytest.raises(ValueError):
            l1_exact_vertices(np.eye(13), np.zeros(13), np.zeros(13), np.ones(13))


class TestL2Exact:
    def test_unit_cube(self):
        box = BoxSet(lower=np.zeros(3), upper=np.ones(3))
        assert l2_exact(box, box) == pytest.approx(np.sqrt(3.0))

    def test_asymmetric(self):
        B = BoxSet(lower=[0.0], upper=[1.0])
        C = BoxSet(lower=[-1.0], upper=[1.0])
        assert l2_exact(B, C) == pytest.approx(2.0)

    def test_single_point(self):
        B = BoxSet(lower=[0.5, 0.5], upper=[0.5, 0.5])
        assert l2_exact(B, B) == 0.0

    def test_matches_corner_enumeration(self):
        rng = np.random.default_rng(37)
        import itertools
        for _ in range(20):
            n = rng.integers(1, 5)
            B = BoxSet(lower=rng.uniform(-2, 0, n), upper=rng.uniform(0.5, 3, n))
            C = BoxSet(lower=rng.uniform(-3, -1, n), upper=rng.uniform(1, 4, n))
            best = 0.0
            for px in itertools.product((0, 1), repeat=n):
                x = np.where(np.asarray(px, bool), B.upper, B.lower)
                for py in itertools.product((0, 1), repeat=n):
                    y = np.where(np.asarray(py, bool), C.upper, C.lower)
                    best = max(best, float(np.linalg.norm(x - y)))
            assert l2_exact(B, C) == pytest.approx(best)

    def test_shrinking_subbox_monotone(self):
        rng = np.random.default_rng(41)
        C = BoxSet(lower=rng.uniform(-2, 0, 4), upper=rng.uniform(1, 3, 4))
        B = C
        prev = l2_exact(B, C)
        for _ in range(5):
            lo = B.lower + 0.1 * (B.upper - B.lower)
            hi = B.upper - 0.1 * (B.upper - B.lower)
            B = BoxSet(lower=lo, upper=hi)
            cur = l2_exact(B, C)
            assert cur <= prev + 1e-12
            prev = cur


class TestL3AndLF:
    def test_l3_examples(self):
        p = make_vi(np.eye(2), np.zeros(2), -np.ones(2), np.ones(2))
        assert l3_bound(p, p.box, 1.0) == pytest.approx(0.0, abs=1e-12)
        pt = make_trig([[0.0]], [0.0], [2.0], [1.0], [-1.0], [1.0])
        assert l3_bound(pt, pt.box, 0.0) == pytest.approx(2.0)
        pd = make_vi(np.diag([3.0]), [0.0], [-1.0], [1.0])
        assert l3_bound(pd, pd.box, 1.0) == pytest.approx(2.0)

    def test_lf_examples(self):
        pt = make_trig([[0.0]], [0.0], [1.0], [3.0], [-1.0], [1.0])
        assert lf_bound(pt) == pytest.approx(3.0)
        p = make_vi(np.eye(3), np.zeros(3), -np.ones(3), np.ones(3))
        assert lf_bound(p) == pytest.approx(1.0)

    def test_lf_sampled_validity(self):
        rng = np.random.default_rng(43)
        p = make_trig(rng.uniform(0, 3, (4, 4)), rng.uniform(-2, 2, 4),
                      rng.uniform(0.1, 4, 4), rng.uniform(0.1, 2, 4),
                      rng.uniform(-2, 0, 4), rng.uniform(1, 3, 4))
        L = lf_bound(p)
        X = rng.uniform(p.box.lower, p.box.upper, (10_000, 4))
        Z = rng.uniform(p.box.lower, p.box.upper, (10_000, 4))
        for x, z in zip(X[:200], Z[:200]):
            lhs = np.linalg.norm(eval_F(p, x, x) - eval_F(p, z, z))
            assert lhs <= L * np.linalg.norm(x - z) + 1e-12
        # vectorized check over the full sample
        s = p.spec
        FX = X @ s.P.T + s.r + s.w * np.sin(s.v * X)
        FZ = Z @ s.P.T + s.r + s.w * np.sin(s.v * Z)
        lhs = np.linalg.norm(FX - FZ, axis=1)
        rhs = L * np.linalg.norm(X - Z, axis=1)
        assert np.all(lhs <= rhs + 1e-12)


class TestCounterexampleRegression:
    def test_pnorm_c_alone_is_not_an_upper_bound(self):
        # ||P|| * ||c(a,b)|| = 2 while the exact maximum is sqrt(5) > 2
        a, b = np.zeros(2), np.ones(2)
        shift = pseudoinverse(P_CEX) @ R_CEX
        c = np.maximum(np.abs(a + shift), np.abs(b + shift))
        claimed = spectral_norm(P_CEX) * float(np.linalg.norm(c))
        exact = l1_exact_vertices(P_CEX, R_CEX, a, b)
        assert claimed == pytest.approx(2.0)
        assert exact == pytest.approx(np.sqrt(5.0))
        assert exact > claimed
        assert l1_tilde(P_CEX, R_CEX, a, b) >= exact


def scalar_unit_problem():
    return make_vi([[1.0]], [0.0], [-1.0], [1.0])


class TestGapLipschitzBound:
    def test_zero_operator(self):
        p = make_vi(np.zeros((2, 2)), np.zeros(2), -np.ones(2), np.ones(2))
        rep = gap_lipschitz_bound(p, p.box, 1.0)
        assert rep.l1_bound == 0.0
        assert rep.thm33 == 0.0
        assert rep.chosen == 0.0

    def test_worked_scalar_example(self):
        p = scalar_unit_problem()
        rep = gap_lipschitz_bound(p, p.box, 1.0)
        assert rep.l1_bound == pytest.approx(1.0)
        assert rep.l2 == pytest.approx(2.0)
        assert rep.l3_bound == pytest.approx(0.0, abs=1e-12)
        assert rep.lf_bound == pytest.approx(1.0)
        assert rep.thm31 == pytest.approx(5.0)
        assert rep.thm32 == pytest.approx(1.0)
        assert rep.thm33 == pytest.approx(1.0)
        assert rep.chosen == pytest.approx(1.0)

    def test_alpha_zero_only_thm31(self):
        p = scalar_unit_problem()
        rep = gap_lipschitz_bound(p, p.box, 0.0)
        assert rep.thm32 is None and rep.thm33 is None
        assert rep.chosen == rep.thm31

    def test_ep_has_no_thm33(self):
        rng = np.random.default_rng(47)
        p = make_affine_ep(3, rng)
        rep = gap_lipschitz_bound(p, p.box, 1.0)
        assert rep.thm33 is None
        assert rep.chosen == min(rep.thm31, rep.thm32)

    def test_subbox_outside_C_drops_thm33(self):
        p = scalar_unit_problem()
        B = BoxSet(lower=[0.5], upper=[1.5])
        rep = gap_lipschitz_bound(p, B, 1.0)
        assert rep.thm33 is None

    def test_disjoint_subbox_rejected(self):
        p = scalar_unit_problem()
        with pytest.raises(ValueError, match="intersect"):
            gap_lipschitz_bound(p, BoxSet(lower=[2.0], upper=[3.0]), 1.0)

    def test_cache_reuse_matches(self):
        rng = np.random.default_rng(53)
        p = make_trig(rng.uniform(0, 3, (3, 3)), rng.uniform(-2, 2, 3),
                      rng.uniform(0.1, 4, 3), rng.uniform(0.1, 2, 3),
                      rng.uniform(-2, 0, 3), rng.uniform(1, 3, 3))
        cache = BoundCache(p, 1.0)
        for _ in range(5):
            lo = rng.uniform(p.box.lower, p.box.center)
            hi = rng.uniform(p.box.center, p.box.upper)
            B = BoxSet(lower=lo, upper=hi)
            a = gap_lipschitz_bound(p, B, 1.0, cache=cache)
            b = gap_lipschitz_bound(p, B, 1.0)
            assert a == b


def _random_subbox(rng, box):
    lo = rng.uniform(box.lower, box.upper)
    hi = rng.uniform(lo, box.upper)
    # keep some volume so pairs are spread out
    hi = np.minimum(box.upper, np.maximum(hi, lo + 0.05 * box.widths))
    return BoxSet(lower=lo, upper=hi)


@pytest.mark.parametrize("kind", ["affine", "trig", "ep"])
def test_soundness_sampled(kind):
    """|phi(x) - phi(y)| <= chosen * ||x - y|| + margin over random pairs in B."""
    rng = np.random.default_rng(hash(kind) % 2**32)
    n = 5
    for _ in range(4):
        if kind == "affine":
            p = make_vi(rng.uniform(0, 3, (n, n)), rng.uniform(-2, 2, n),
                        rng.uniform(-2, 0, n), rng.uniform(1, 3, n))
        elif kind == "trig":
            p = make_trig(rng.uniform(0, 3, (n, n)), rng.uniform(-2, 2, n),
                          rng.uniform(0.1, 4, n), rng.uniform(0.1, 2, n),
                          rng.uniform(-2, 0, n), rng.uniform(1, 3, n))
        else:
            p = make_affine_ep(n, rng)
        cache = BoundCache(p, 1.0)
        for _ in range(2):
            B = _random_subbox(rng, p.box)
            chosen = gap_lipschitz_bound(p, B, 1.0, cache=cache).chosen
            X = rng.uniform(B.lower, B.upper, (2000, n))
            Y = rng.uniform(B.lower, B.upper, (2000, n))
            fx = gap_value_batch(p, X, 1.0, tol=1e-8)
            fy = gap_value_batch(p, Y, 1.0, tol=1e-8)
            lhs = np.abs(fx - fy)
            rhs = chosen * np.linalg.norm(X - Y, axis=1) + 1e-6
            assert np.all(lhs <= rhs)
