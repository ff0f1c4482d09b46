"""Epoch optimizer, initialization, full learner: contracts and accounting."""

import math

import numpy as np
import pytest

import halfband as hb
from halfband.errors import InvalidInputError
from halfband.learner import erm_select, step_size
from halfband.oracles import halfspace_labels
from halfband.schedules import PROFILES, bandwidth, iteration_count

GAUSS5 = hb.make_distribution("gaussian", 5)
DESK = PROFILES["desk"]
NOISE = hb.massart(0.1)


def make_start(truth, r, rng):
    # a point at exact distance 4r from w*, orthogonal offset
    u = rng.standard_normal(truth.w_star.shape[0])
    u -= (u @ truth.w_star) * truth.w_star
    return truth.w_star + 4.0 * r * (u / np.linalg.norm(u))


def test_step_size_formula():
    r, b, T, d, delta = 1 / 16, 0.12, 255, 5, 0.05
    expected = DESK.c_alpha * (r / GAUSS5.beta) * math.sqrt(1.0 / (d * T)) / math.log(
        T * d / (delta * r * b * GAUSS5.R * GAUSS5.L))
    assert step_size(r, b, T, d, GAUSS5, delta, DESK) == pytest.approx(expected, rel=1e-12)
    dist20 = hb.make_distribution("gaussian", 20)
    sparse = step_size(r, b, T, 20, dist20, delta, DESK, sparse_s=3)
    expected_sparse = DESK.c_alpha * (r / dist20.beta) * math.sqrt(
        3 * math.log(20) / T) / math.log(T * 20 / (delta * r * b * dist20.R * dist20.L))
    assert sparse == pytest.approx(expected_sparse, rel=1e-12)


def test_optimize_single_step_average_is_normalized_start():
    rng = np.random.default_rng(21)
    truth = hb.make_ground_truth(5, rng)
    w1 = make_start(truth, 1 / 16, rng)
    ledger = hb.QueryLedger()
    out = hb.optimize(w1, 1 / 16, 0.1, 1, "average", GAUSS5, NOISE, truth, rng, ledger,
                      0.05, DESK)
    assert np.array_equal(out, hb.normalize(w1))
    assert ledger.label_calls == 1


def test_optimize_exact_label_count_and_feasibility():
    rng = np.random.default_rng(22)
    truth = hb.make_ground_truth(5, rng)
    r = 1 / 16
    w1 = make_start(truth, r, rng)
    ledger = hb.QueryLedger()
    monitor = {}
    seen = []
    hb.optimize(w1, r, 0.1, 64, "average", GAUSS5, NOISE, truth, rng, ledger, 0.05, DESK,
                monitor=monitor, iterate_hook=lambda t, w: seen.append((t, w)))
    assert ledger.label_calls == 64
    assert ledger.ex_calls >= 64
    assert monitor["max_feasibility_gap"] <= 1e-9
    assert len(seen) == 64
    for _, w in seen:
        assert float(np.linalg.norm(w - w1)) <= 4 * r + 1e-9


def test_optimize_random_aggregation_returns_signed_iterate():
    rng = np.random.default_rng(23)
    truth = hb.make_ground_truth(5, rng)
    r = 1 / 16
    w1 = make_start(truth, r, rng)
    seen = []
    out = hb.optimize(w1, r, 0.1, 5, "random", GAUSS5, NOISE, truth,
                      np.random.default_rng(23), hb.QueryLedger(), 0.05, DESK,
                      iterate_hook=lambda t, w: seen.append(w))
    match = any(
        np.allclose(out, sign * hb.normalize(w), atol=1e-12)
        for w in seen for sign in (1.0, -1.0)
    )
    assert match
    assert float(np.linalg.norm(out)) == pytest.approx(1.0, rel=1e-12)


def test_optimize_validation():
    rng = np.random.default_rng(24)
    truth = hb.make_ground_truth(5, rng)
    w1 = make_start(truth, 1 / 16, rng)
    with pytest.raises(InvalidInputError):
        hb.optimize(w1, 0.3, 0.1, 4, "average", GAUSS5, NOISE, truth, rng,
                    hb.QueryLedger(), 0.05, DESK)  # r > 1/4
    with pytest.raises(InvalidInputError):
        hb.optimize(w1, 1 / 16, 0.6, 4, "average", GAUSS5, NOISE, truth, rng,
                    hb.QueryLedger(), 0.05, DESK)  # b > R/2
    with pytest.raises(InvalidInputError):
        hb.optimize(w1, 1 / 16, 0.1, 0, "average", GAUSS5, NOISE, truth, rng,
                    hb.QueryLedger(), 0.05, DESK)
    with pytest.raises(InvalidInputError):
        hb.optimize(w1, 1 / 16, 0.1, 4, "mode", GAUSS5, NOISE, truth, rng,
                    hb.QueryLedger(), 0.05, DESK)


def test_average_aggregation_norm_at_most_one():
    rng = np.random.default_rng(25)
    truth = hb.make_ground_truth(5, rng)
    w1 = make_start(truth, 1 / 16, rng)
    out = hb.optimize(w1, 1 / 16, 0.1, 32, "average", GAUSS5, NOISE, truth, rng,
                      hb.QueryLedger(), 0.05, DESK)
    assert float(np.linalg.norm(out)) <= 1.0 + 1e-12


def test_erm_select_contracts():
    rng = np.random.default_rng(26)
    w_star = hb.normalize(rng.standard_normal(4))
    X = rng.standard_normal((100, 4))
    y = halfspace_labels(X, w_star)
    pick = erm_select([w_star, -w_star], X, y)
    assert np.array_equal(pick, w_star)
    # tie: two identical candidates, lowest index wins
    a, b = hb.normalize(rng.standard_normal(4)), None
    b = a.copy()
    tied = erm_select([a, b], X, y)
    assert tied is a or np.array_equal(tied, a)
    single = erm_select([w_star], X, y)
    assert np.array_equal(single, w_star)
    with pytest.raises(InvalidInputError):
        erm_select([], X, y)


def test_erm_select_tie_break_constructed():
    # candidate 0 errs only on point 0, candidate 1 errs only on point 1
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    X = np.array([[1.0, -1.0], [-1.0, 1.0]])
    y = np.array([-1.0, -1.0])
    errs0 = (halfspace_labels(X, e1) != y).sum()
    errs1 = (halfspace_labels(X, e2) != y).sum()
    assert errs0 == errs1 == 1
    pick = erm_select([e1, e2], X, y)
    assert np.array_equal(pick, e1)


def test_band_draw_depends_only_on_direction():
    # identical random streams, w vs 2w: identical samples bit for bit
    draws = []
    for scale in (1.0, 2.0):
        rng = np.random.default_rng(27)
        ledger = hb.QueryLedger()
        w = scale * np.array([3.0, -1.0, 0.5, 0.0, 2.0])
        sampler = hb.BandSampler(GAUSS5, 0.15, rng, ledger=ledger)
        draws.append(np.array([sampler.draw(hb.normalize(w)) for _ in range(64)]))
    assert np.array_equal(draws[0], draws[1])


def test_optimize_descent_in_band_potential():
    # thinned Monte Carlo of (1/T) sum psi(w_t) against psi(w1), 50 seeds
    r = 1.0 / 16.0
    b = bandwidth("MNC", r, GAUSS5, DESK, eta=0.1)
    T = iteration_count("MNC", r, GAUSS5, 0.05, DESK, GAUSS5.d, eta=0.1)
    wins = 0
    for seed in range(50):
        rng = np.random.default_rng((31, seed))
        truth = hb.make_ground_truth(5, rng)
        w1 = make_start(truth, r, rng)
        iterates = []
        hb.optimize(w1, r, b, T, "average", GAUSS5, NOISE, truth, rng, hb.QueryLedger(),
                    0.05, DESK,
                    iterate_hook=lambda t, w: iterates.append(w) if t % 16 == 0 else None)
        psi_rng = np.random.default_rng((32, seed))
        start = hb.estimate_psi(w1, b, GAUSS5, NOISE, truth, 2000, psi_rng).value
        along = [hb.estimate_psi(w, b, GAUSS5, NOISE, truth, 2000, psi_rng).value
                 for w in iterates]
        wins += float(np.mean(along)) <= start
    assert wins >= 45


def test_initialize_output_unit_and_ledger():
    sched = hb.make_schedule("MNC", GAUSS5, 0.3, 0.05, DESK, eta=0.1)
    rng = np.random.default_rng(33)
    truth = hb.make_ground_truth(5, rng)
    ledger = hb.QueryLedger()
    u0 = hb.initialize(sched, GAUSS5, NOISE, truth, rng, ledger)
    assert float(np.linalg.norm(u0)) == pytest.approx(1.0, rel=1e-12)
    assert ledger.label_calls == sched.init_label_total()


def test_learn_small_run_accounting_and_trace():
    config = hb.LearnerConfig(
        dist=hb.make_distribution("gaussian", 3),
        noise=hb.massart(0.1),
        epsilon=0.45,
        delta=0.05,
        seed=(404, 0),
        profile=DESK,
        trace_angles=True,
    )
    result = hb.learn(config)
    sched = result.schedule
    assert result.ledger.label_calls == sched.total_label_budget()
    assert float(np.linalg.norm(result.v)) == pytest.approx(1.0, rel=1e-12)
    assert result.trace[0]["stage"] == "init"
    main = [e for e in result.trace if e["stage"] == "main"]
    assert [e["j"] for e in main] == list(range(1, sched.k_eps + 1))
    for entry in main:
        assert {"r", "b", "T", "labels", "ex_calls", "angle"} <= set(entry)
    assert result.max_feasibility_gap <= 1e-9


def test_learn_rerun_is_bit_identical():
    def one():
        config = hb.LearnerConfig(
            dist=hb.make_distribution("gaussian", 3),
            noise=hb.massart(0.1),
            epsilon=0.45,
            delta=0.05,
            seed=(404, 1),
            profile=DESK,
            trace_angles=True,
        )
        return hb.learn(config)

    a, b = one(), one()
    assert a.v.tobytes() == b.v.tobytes()
    assert a.ledger == b.ledger
    assert a.trace == b.trace


def test_learn_config_validation():
    dist = hb.make_distribution("gaussian", 3)
    with pytest.raises(InvalidInputError):
        hb.learn(hb.LearnerConfig(dist=dist, noise=NOISE, epsilon=1.2, delta=0.05, seed=0))
    with pytest.raises(InvalidInputError):
        hb.learn(hb.LearnerConfig(dist=dist, noise=NOISE, epsilon=0.3, delta=0.2, seed=0))


def test_trace_angles_weakly_decreasing_across_main_epochs(criterion3_runs):
    # geometric halving: each epoch's output is within its own shrinking radius
    good = 0
    for run in criterion3_runs["runs"]:
        main = [e["angle"] for e in run["result"].trace if e["stage"] == "main"]
        good += all(main[k + 1] <= main[k] + 1e-12 for k in range(len(main) - 1))
    assert good >= 18  # >= 90% of 20
