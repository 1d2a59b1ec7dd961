import numpy as np
import pytest
from numpy.testing import assert_allclose

from gapdirect.problems import (AFFINE_EP, AFFINE_VI, TRIG_VI, AffineEPSpec, AffineVISpec,
                                BoxSet, ProblemFormatError, ProblemInstance, TrigVISpec,
                                eval_F, eval_f, jacobian1_F, load_problem, project_box,
                                save_problem)


def make_vi(P, r, lower, upper, ident="vi"):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return ProblemInstance(id=ident, n=r.shape[0], kind=AFFINE_VI,
                           spec=AffineVISpec(P=P, r=r),
                           box=BoxSet(lower=lower, upper=upper))


def make_trig(P, r, w, v, lower, upper, ident="trig"):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return ProblemInstance(id=ident, n=r.shape[0], kind=TRIG_VI,
                           spec=TrigVISpec(P=P, r=r, w=w, v=v),
                           box=BoxSet(lower=lower, upper=upper))


def make_ep(P, Q, r, lower, upper, ident="ep"):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return ProblemInstance(id=ident, n=r.shape[0], kind=AFFINE_EP,
                           spec=AffineEPSpec(P=P, Q=Q, r=r),
                           box=BoxSet(lower=lower, upper=upper))


class TestBoxSet:
    def test_invalid_bounds_rejected(self):
        with pytest.raises(ValueError):
            BoxSet(lower=[1.0, 0.0], upper=[0.0, 1.0])

    def test_degenerate_side_allowed(self):
        box = BoxSet(lower=[0.0, 1.0], upper=[0.0, 2.0])
        assert box.widths[0] == 0.0

    def test_contains(self):
        box = BoxSet(lower=[0.0], upper=[1.0])
        assert box.contains([0.5]) and not box.contains([1.5])

    def test_problem_box_must_be_nondegenerate(self):
        with pytest.raises(ValueError):
            make_vi([[1.0]], [0.0], [0.0], [0.0])


class TestEvalF:
    def test_zero_map(self):
        p = make_vi(np.zeros((2, 2)), np.zeros(2), [-1, -1], [1, 1])
        assert_allclose(eval_F(p, np.array([0.3, -0.7]), np.zeros(2)), 0.0)

    def test_affine_counterexample_data(self):
        # P=[[1,1],[0,0]], r=(0,1) evaluated at x=(1,1)
        p = make_vi([[1, 1], [0, 0]], [0, 1], [0, 0], [1, 1])
        assert_allclose(eval_F(p, np.ones(2), np.ones(2)), [2.0, 1.0])

    def test_trig_term(self):
        p = make_trig([[0.0]], [0.0], [2.0], [np.pi / 2], [-2], [2])
        assert_allclose(eval_F(p, np.array([1.0]), np.array([1.0])), [2.0])

    def test_affine_ep_uses_y(self):
        p = make_ep([[0.0]], [[1.0]], [0.0], [-3], [3])
        assert_allclose(eval_F(p, np.zeros(1), np.array([2.0])), [2.0])

    def test_dimension_mismatch(self):
        p = make_vi([[1.0]], [0.0], [-1], [1])
        with pytest.raises(ValueError):
            eval_F(p, np.zeros(2), np.zeros(1))


class TestEvalf:
    def test_diagonal_vanishes(self):
        rng = np.random.default_rng(0)
        p = make_trig(rng.uniform(0, 3, (3, 3)), rng.uniform(-2, 2, 3),
                      [1, 2, 3], [1, 0.5, 2], [-2, -2, -2], [2, 2, 2])
        for _ in range(25):
            x = rng.uniform(-2, 2, 3)
            assert eval_f(p, x, x) == 0.0

    def test_hand_values(self):
        p = make_vi([[1.0]], [0.0], [-1], [1])
        assert eval_f(p, np.array([1.0]), np.array([0.0])) == pytest.approx(-1.0)
        ep = make_ep([[0.0]], [[1.0]], [0.0], [-3], [3])
        assert eval_f(ep, np.array([0.0]), np.array([2.0])) == pytest.approx(4.0)


class TestJacobian:
    def test_affine_is_P(self):
        rng = np.random.default_rng(1)
        P = rng.uniform(0, 3, (4, 4))
        p = make_vi(P, np.zeros(4), -np.ones(4), np.ones(4))
        assert_allclose(jacobian1_F(p, rng.uniform(-1, 1, 4), np.zeros(4)), P)

    def test_trig_diagonal(self):
        p = make_trig([[0.0]], [0.0], [2.0], [1.0], [-2], [2])
        assert_allclose(jacobian1_F(p, np.zeros(1), np.zeros(1)), [[2.0]])
        p2 = make_trig([[0.0]], [0.0], [2.0], [np.pi / 2], [-2], [2])
        assert_allclose(jacobian1_F(p2, np.ones(1), np.ones(1)), [[0.0]], atol=1e-15)

    @pytest.mark.parametrize("kind", ["affine", "trig", "ep"])
    def test_matches_finite_differences(self, kind):
        rng = np.random.default_rng(7)
        n = 4
        if kind == "affine":
            p = make_vi(rng.uniform(0, 3, (n, n)), rng.uniform(-2, 2, n),
                        -2 * np.ones(n), 2 * np.ones(n))
        elif kind == "trig":
            p = make_trig(rng.uniform(0, 3, (n, n)), rng.uniform(-2, 2, n),
                          rng.uniform(0.5, 4, n), rng.uniform(0.5, 2, n),
                          -2 * np.ones(n), 2 * np.ones(n))
        else:
            G = rng.uniform(0, 1, (n, n))
            p = make_ep(rng.uniform(0, 3, (n, n)), G @ G.T, rng.uniform(-2, 2, n),
                        -2 * np.ones(n), 2 * np.ones(n))
        for _ in range(10):
            x = rng.uniform(-2, 2, n)
            y = rng.uniform(-2, 2, n)
            h = 1e-6 * (1 + np.linalg.norm(x))
            J = jacobian1_F(p, x, y)
            fd = np.empty((n, n))
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                fd[:, j] = (eval_F(p, x + e, y) - eval_F(p, x - e, y)) / (2 * h)
            assert np.linalg.norm(fd - J) <= 1e-6 * (1 + np.linalg.norm(J))


class TestTrigLimits:
    def test_tiny_amplitude_matches_affine(self):
        # amplitudes must stay positive; with w ~ 1e-200 the trig part is
        # far below machine epsilon relative to the affine part
        rng = np.random.default_rng(3)
        P = rng.uniform(0, 3, (3, 3))
        r = rng.uniform(-2, 2, 3)
        p = make_trig(P, r, np.full(3, 1e-200), np.ones(3), -2 * np.ones(3), 2 * np.ones(3))
        x = rng.uniform(-2, 2, 3)
        assert_allclose(eval_F(p, x, x), P @ x + r, rtol=0, atol=1e-180)

    def test_nonpositive_amplitude_rejected(self):
        with pytest.raises(ValueError):
            TrigVISpec(P=[[1.0]], r=[0.0], w=[0.0], v=[1.0])
        with pytest.raises(ValueError):
            TrigVISpec(P=[[1.0]], r=[0.0], w=[1.0], v=[-1.0])


class TestProjectBox:
    def test_fixed_point_and_clamp(self):
        box = BoxSet(lower=[0.0, 0.0], upper=[1.0, 1.0])
        assert_allclose(project_box(box, [0.4, 0.6]), [0.4, 0.6])
        assert_allclose(project_box(box, [-1.0, 2.0]), [0.0, 1.0])

    def test_idempotent_and_nonexpansive(self):
        rng = np.random.default_rng(11)
        box = BoxSet(lower=rng.uniform(-2, 0, 6), upper=rng.uniform(1, 3, 6))
        for _ in range(200):
            z1 = rng.uniform(-5, 5, 6)
            z2 = rng.uniform(-5, 5, 6)
            p1, p2 = project_box(box, z1), project_box(box, z2)
            assert_allclose(project_box(box, p1), p1)
            assert np.linalg.norm(p1 - p2) <= np.linalg.norm(z1 - z2) + 1e-15


class TestProblemFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        p = make_trig(rng.uniform(0, 3, (3, 3)), rng.uniform(-2, 2, 3),
                      rng.uniform(0.1, 4, 3), rng.uniform(0.1, 2, 3),
                      rng.uniform(-2, 0, 3), rng.uniform(1, 3, 3), ident="rt")
        path = tmp_path / "rt.json"
        save_problem(p, path)
        q = load_problem(path)
        assert q.id == p.id and q.kind == p.kind and q.n == p.n
        assert np.array_equal(q.spec.P, p.spec.P)
        assert np.array_equal(q.spec.r, p.spec.r)
        assert np.array_equal(q.spec.w, p.spec.w)
        assert np.array_equal(q.spec.v, p.spec.v)
        assert np.array_equal(q.box.lower, p.box.lower)
        assert np.array_equal(q.box.upper, p.box.upper)

    def test_round_trip_ep(self, tmp_path):
        rng = np.random.default_rng(6)
        G = rng.uniform(0, 1, (2, 2))
        p = make_ep(rng.uniform(0, 3, (2, 2)), G @ G.T, rng.uniform(-2, 2, 2),
                    [-1, -1], [1, 1], ident="ep-rt")
        path = tmp_path / "ep.json"
        save_problem(p, path)
        q = load_problem(path)
        assert np.array_equal(q.spec.Q, p.spec.Q)

    def test_bad_bounds_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"id":"b","class":"affine-vi","n":1,"P":[[1.0]],"r":[0.0],'
                        '"lower":[2.0],"upper":[1.0]}')
        with pytest.raises(ProblemFormatError):
            load_problem(path)

    def test_indefinite_Q_rejected(self, tmp_path):
        path = tmp_path / "indef.json"
        path.write_text('{"id":"q","class":"affine-ep","n":2,"P":[[1.0,0.0],[0.0,1.0]],'
                        '"Q":[[-1.0,0.0],[0.0,-1.0]],"r":[0.0,0.0],'
                        '"lower":[0.0,0.0],"upper":[1.0,1.0]}')
        with pytest.raises(ProblemFormatError, match="semidefinite"):
            load_problem(path)

    def test_parse_error_has_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"id": "x",\n  "class": }')
        with pytest.raises(ProblemFormatError, match=r":2:"):
            load_problem(path)

    def test_missing_field_reported(self, tmp_path):
        path = tmp_path / "missing.json"
        path.write_text('{"id":"m","class":"affine-vi","n":1,"P":[[1.0]],'
                        '"lower":[0.0],"upper":[1.0]}')
        with pytest.raises(ProblemFormatError, match="'r'"):
            load_problem(path)

    def test_flat_row_major_matrix_accepted(self, tmp_path):
        path = tmp_path / "flat.json"
        path.write_text('{"id":"f","class":"affine-vi","n":2,"P":[1.0,2.0,3.0,4.0],'
                        '"r":[0.0,0.0],"lower":[0.0,0.0],"upper":[1.0,1.0]}')
        q = load_problem(path)
        assert_allclose(q.spec.P, [[1.0, 2.0], [3.0, 4.0]])
