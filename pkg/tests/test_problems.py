import json
import math

import numpy as np
import pytest

import alia
from alia.errors import DimensionError, ParseError


# ---------------------------------------------------------------------------
# LIBSVM parsing


def test_parse_basic_line():
    ds = alia.parse_libsvm("1 1:0.5 3:2.0\n")
    assert np.array_equal(ds.labels, [1.0])
    assert np.array_equal(ds.features, [[0.5, 0.0, 2.0]])


def test_parse_label_only_line():
    ds = alia.parse_libsvm("-1\n")
    assert np.array_equal(ds.labels, [-1.0])
    assert ds.features.shape == (1, 0)


def test_parse_two_lines_fills_zeros():
    ds = alia.parse_libsvm("1 1:1 2:2\n-1 2:5 3:6\n")
    assert ds.features.shape == (2, 3)
    assert np.array_equal(ds.features, [[1.0, 2.0, 0.0], [0.0, 5.0, 6.0]])


def test_parse_comments_and_blank_lines():
    ds = alia.parse_libsvm("# header\n\n1 1:2.0 # trailing\n\n")
    assert np.array_equal(ds.features, [[2.0]])


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 1"):
        alia.parse_libsvm("x 1:2\n")
    with pytest.raises(ParseError, match="line 2.*malformed"):
        alia.parse_libsvm("1 1:2\n1 12\n")
    with pytest.raises(ParseError, match="line 1.*ascending"):
        alia.parse_libsvm("1 2:1 2:3\n")
    with pytest.raises(ParseError, match="line 1.*ascending"):
        alia.parse_libsvm("1 3:1 2:3\n")
    with pytest.raises(ParseError, match="line 1.*ascending"):
        alia.parse_libsvm("1 0:1\n")


def test_round_trip_preserves_dense_matrix():
    text = "2 1:1.5 4:0.25\n-3 2:7\n0.5\n"
    ds = alia.parse_libsvm(text)
    again = alia.parse_libsvm(alia.format_libsvm(ds))
    assert np.array_equal(ds.features, again.features)
    assert np.array_equal(ds.labels, again.labels)


def test_round_trip_is_byte_stable():
    text = "1 1:1 3:0\n-1 2:0.125\n"  # widest column holds only an explicit zero
    once = alia.format_libsvm(alia.parse_libsvm(text))
    twice = alia.format_libsvm(alia.parse_libsvm(once))
    assert once == twice
    assert alia.parse_libsvm(once).features.shape == alia.parse_libsvm(text).features.shape


def test_dataset_invariants():
    with pytest.raises(DimensionError):
        alia.Dataset(features=np.zeros((2, 2)), labels=[1.0])
    with pytest.raises(ValueError, match="non-finite"):
        alia.Dataset(features=np.array([[np.nan]]), labels=[1.0])


def test_synth_dataset_deterministic():
    a = alia.synth_dataset(9, 10, 4)
    b = alia.synth_dataset(9, 10, 4)
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)
    c = alia.synth_dataset(9, 10, 4, kind="classification")
    assert set(np.unique(c.labels)) <= {-1.0, 1.0}


# ---------------------------------------------------------------------------
# dual problem builders


def test_dual_lasso_one_dimensional_kkt():
    # 1-d oracle: the unconstrained minimizer 2b clipped so |A x| <= lam
    ds = alia.Dataset(features=[[2.0]], labels=[1.0])
    lam = 0.1
    prob = alia.build_dual_lasso(ds, lam)
    x_unc = 2.0 * 1.0
    x_star = x_unc if abs(2.0 * x_unc) <= lam else math.copysign(lam / 2.0, x_unc)
    assert x_star == 0.05
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8))
    assert res.status == "converged"
    assert res.state.x[0] == pytest.approx(x_star, abs=1e-5)
    assert res.state.y[0] == pytest.approx(2.0 * x_star, abs=1e-5)


def test_dual_lasso_inactive_constraint():
    ds = alia.synth_dataset(10, 6, 3)
    prob = alia.build_dual_lasso(ds, 1e9)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8))
    assert res.status == "converged"
    assert np.max(np.abs(res.state.x - 2.0 * ds.labels)) <= 1e-4


def test_dual_lasso_zero_data():
    ds = alia.Dataset(features=[[1.0, 0.5]], labels=[0.0])
    prob = alia.build_dual_lasso(ds, 0.3)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s1"))
    assert np.max(np.abs(res.state.x)) <= 1e-4 and np.max(np.abs(res.state.y)) <= 1e-4


def test_dual_lasso_gradient_mapping():
    ds = alia.synth_dataset(11, 5, 2)
    prob = alia.build_dual_lasso(ds, 0.1)
    x = np.arange(5.0)
    assert np.allclose(prob.f2.grad(x), x / 2.0 - ds.labels)
    assert prob.f2.value(x) == pytest.approx(0.25 * float(x @ x) - float(ds.labels @ x))


def test_dual_lad_zero_cost():
    ds = alia.Dataset(features=[[1.0], [2.0]], labels=[0.0, 0.0])
    prob = alia.build_dual_lad(ds, 0.5)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s1"))
    assert res.status == "converged"
    assert np.max(np.abs(res.state.x)) <= 1e-3


def test_dual_lad_linear_over_box():
    ds = alia.Dataset(features=[[1.0]], labels=[1.0])
    prob = alia.build_dual_lad(ds, 1e6)  # outer box is the binding constraint
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8, max_iters=200000))
    assert res.status == "converged"
    assert res.state.x[0] == pytest.approx(-1.0, abs=1e-4)


def test_dual_lad_matches_reference_objective():
    ds = alia.synth_dataset(12, 20, 5)
    prob = alia.build_dual_lad(ds, 0.1)
    xs, ys, us = alia.reference_solve(prob)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8, max_iters=300000))
    assert res.status == "converged"
    obj_ref = float(ds.labels @ xs)
    obj_run = float(ds.labels @ res.state.x)
    assert abs(obj_ref - obj_run) <= 1e-6 * max(1.0, abs(obj_ref))


def test_dual_svm_two_sample_symmetric():
    ds = alia.Dataset(features=[[1.0, 0.0], [0.0, 1.0]], labels=[1.0, -1.0])
    prob = alia.build_dual_svm(ds, 0.1)
    # active-set oracle: on the coupling line x1 = x2 = t, minimize t^2 - 2t over [0, C]
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8))
    assert res.status == "converged"
    assert np.max(np.abs(res.state.x - [0.1, 0.1])) <= 1e-5


def test_dual_svm_tiny_box_collapses():
    ds = alia.synth_dataset(13, 8, 10, kind="classification")
    prob = alia.build_dual_svm(ds, 1e-9)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s1"))
    assert np.max(np.abs(res.state.x)) <= 1e-8


def test_dual_svm_single_class_forces_zero():
    ds = alia.Dataset(features=np.eye(3), labels=[1.0, 1.0, 1.0])
    prob = alia.build_dual_svm(ds, 0.5)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8))
    assert res.status == "converged"
    assert np.max(np.abs(res.state.x)) <= 1e-4


def test_dual_svm_rejects_bad_labels():
    ds = alia.Dataset(features=np.eye(2), labels=[1.0, 2.0])
    with pytest.raises(ValueError, match="labels"):
        alia.build_dual_svm(ds, 0.1)


def test_builders_validate_dimensions():
    ds = alia.synth_dataset(14, 7, 4)
    for prob in (
        alia.build_dual_lasso(ds, 0.2),
        alia.build_dual_lad(ds, 0.2),
        alia.build_dual_svm(alia.synth_dataset(15, 7, 4, kind="classification"), 0.2),
    ):
        assert prob.A.cols == prob.dim_x and prob.B.cols == prob.dim_y
        assert prob.A.rows == prob.dim_u


def test_builder_kkt_spot_check():
    # one adaptive step from the reference saddle keeps residuals tiny
    ds = alia.synth_dataset(16, 12, 4)
    prob = alia.build_dual_lasso(ds, 0.1)
    xs, ys, us = alia.reference_solve(prob)
    opts = alia.SolverOptions(subroutine="s1")
    st = alia.initial_state(prob, xs, ys, us, gamma0=1.0)
    d = alia.select_step_s1(st, prob, opts)
    nxt = alia.advance(st, d, prob, opts)
    rep = alia.kkt_residuals(st, nxt, d.gamma_next, prob)
    assert max(rep.inf_norm_w12, rep.inf_norm_w3) <= 1e-6


# ---------------------------------------------------------------------------
# unmixing consensus


def test_synth_unmixing_shapes_and_determinism():
    out1 = alia.synth_unmixing(3, L=224, N=50, K=9)
    out2 = alia.synth_unmixing(3, L=224, N=50, K=9)
    Phi, W0, Y, aw, bw = out1
    assert Phi.shape == (224, 50) and W0.shape == (50, 9) and Y.shape == (224, 9)
    assert aw.shape == (50, 9) and bw.shape == (9,)
    for a, b in zip(out1, out2):
        assert np.array_equal(a, b)
    assert np.all(Phi >= 0) and np.allclose(W0.sum(axis=0), 1.0)
    assert np.all(np.diff(bw) == 0)  # constant weights keep the block convex


def test_synth_unmixing_noiseless():
    Phi, W0, Y, _, _ = alia.synth_unmixing(4, L=8, N=4, K=2, snr_db=math.inf)
    assert np.array_equal(Y, Phi @ W0)


def test_synth_unmixing_snr_scaling():
    Phi, W0, Y, _, _ = alia.synth_unmixing(5, L=30, N=6, K=4, snr_db=20.0)
    signal = np.linalg.norm(Phi @ W0)
    noise = np.linalg.norm(Y - Phi @ W0)
    assert 20.0 == pytest.approx(20.0 * math.log10(signal / noise), abs=1e-9)


def test_consensus_two_block_matches_prox_gradient_oracle():
    data = alia.synth_unmixing(6, L=10, N=4, K=3, snr_db=30.0)
    spec = alia.BlockSpec(2, 10, 4, 3, gamma=0.05, tau=0.0, a_weights=data[3], b_weights=data[4])
    prob = alia.build_consensus(spec, data)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-7, tol_inf=1e-9, max_iters=100000))
    assert res.status == "converged"
    smooth = alia.QuadraticSmooth(np.kron(data[0].T @ data[0], np.eye(3)), -(data[0].T @ data[2]).reshape(12))
    prox = alia.L1NonNeg((0.05 * data[3]).reshape(12))
    step = 0.9 / alia.smooth_lipschitz(smooth)
    oracle = alia.prox_gradient_solve(smooth, prox, np.zeros(12), step, max_iters=200000, tol=1e-11)
    assert np.max(np.abs(res.state.x - oracle)) <= 1e-5


def test_consensus_three_and_four_block_agree():
    data = alia.synth_unmixing(7, L=12, N=5, K=3, snr_db=30.0)
    objs = {}
    for nb in (3, 4):
        spec = alia.BlockSpec(nb, 12, 5, 3, gamma=0.01, tau=0.01, a_weights=data[3], b_weights=data[4])
        prob = alia.build_consensus(spec, data)
        res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-6, tol_inf=1e-8, max_iters=100000))
        assert res.status == "converged"
        objs[nb] = alia.consensus_objective(spec, data, alia.consensus_sparse_copy(spec, res.state.x))
    assert objs[3] == pytest.approx(objs[4], abs=1e-5)


def test_consensus_least_squares_limit():
    data = alia.synth_unmixing(8, L=12, N=5, K=3, snr_db=math.inf)
    Phi, W0, Y, aw, bw = data
    spec = alia.BlockSpec(2, 12, 5, 3, gamma=0.0, tau=0.0, a_weights=aw, b_weights=bw)
    prob = alia.build_consensus(spec, data)
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2", tol_two=1e-7, tol_inf=1e-9, max_iters=100000))
    # normal-equations oracle (noiseless data keeps it in the nonnegative set)
    W_ls = np.linalg.solve(Phi.T @ Phi, Phi.T @ Y).reshape(15)
    assert np.max(np.abs(res.state.y - W_ls)) <= 1e-5


def test_consensus_dimension_validation():
    data = alia.synth_unmixing(9, L=10, N=4, K=2, snr_db=30.0)
    with pytest.raises(DimensionError):
        alia.BlockSpec(2, 10, 4, 2, gamma=0.1, tau=0.1, a_weights=np.zeros((3, 2)), b_weights=data[4])
    spec = alia.BlockSpec(3, 10, 4, 2, gamma=0.1, tau=0.1, a_weights=data[3], b_weights=data[4])
    prob = alia.build_consensus(spec, data)
    assert prob.dim_x == 2 * 8 and prob.dim_y == 8 and prob.dim_u == 2 * 8


def test_block_spec_records_convexity_regime():
    data = alia.synth_unmixing(10, L=10, N=4, K=2, snr_db=30.0)
    spec = alia.BlockSpec(2, 10, 4, 2, gamma=0.1, tau=0.1, a_weights=data[3], b_weights=data[4])
    assert spec.convex_regime
    with pytest.warns(UserWarning):
        nonconvex = alia.BlockSpec(
            2, 10, 4, 2, gamma=0.1, tau=0.1, a_weights=data[3], b_weights=[1.0, 2.0]
        )
        assert not nonconvex.convex_regime
        alia.build_consensus(nonconvex, data)


# ---------------------------------------------------------------------------
# random saddle generator and custom files


def test_random_saddle_satisfies_kkt():
    for seed in (1, 2, 3):
        prob, (xs, ys, us) = alia.build_random_saddle(seed, p=6, q=5, r=4)
        assert np.max(np.abs(prob.A.apply(xs) + prob.B.apply(ys) - prob.c)) <= 1e-12
        gap = alia.lagrangian_gap(xs, ys, (xs, ys, us), prob)
        assert gap == 0.0
        # random nearby points have larger Lagrangian value
        gen = np.random.Generator(np.random.PCG64(seed + 100))
        for _ in range(20):
            x = xs + 0.1 * gen.standard_normal(6)
            y = ys + 0.1 * gen.standard_normal(5)
            assert alia.lagrangian_gap(x, y, (xs, ys, us), prob) >= -1e-10


def test_problem_json_round_trip(tmp_path):
    obj = {
        "f1": {"kind": "l1", "weights": [1.0, 2.0]},
        "f2": {"kind": "quadratic", "Q": [[1.0, 0.0], [0.0, 2.0]], "q": [0.5, -0.5]},
        "g1": {"kind": "separable_sum", "children": [
            {"start": 0, "stop": 1, "block": {"kind": "nonneg", "dim": 1}},
            {"start": 1, "stop": 2, "block": {"kind": "linf_ball", "dim": 1, "radius": 2.0}},
        ]},
        "g2": {"kind": "zero", "dim": 2},
        "A": {"kind": "dense", "matrix": [[1.0, 0.5], [0.0, 1.0]]},
        "B": {"kind": "scaled", "alpha": -1.0, "inner": {"kind": "identity", "dim": 2}},
        "c": [0.0, 0.0],
    }
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(obj))
    prob = alia.load_problem_file(path)
    assert prob.dim_x == 2 and prob.dim_y == 2 and prob.dim_u == 2
    res = alia.solve(prob, alia.SolverOptions(subroutine="s2"))
    assert res.status == "converged"
