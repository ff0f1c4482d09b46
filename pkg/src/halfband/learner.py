"""Band-restricted online gradient descent and the two-stage learning loop.

Stage one runs N independent descent trials from the zero vector through a
short epoch ladder and picks a candidate by empirical risk on a fresh labeled
sample. Stage two continues the ladder from that warm start down to the
target proximity scale. Every label the run consumes passes through
oracles.query_label, so the ledger count is exact.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dists
from .errors import InvalidInputError, NumericalError
from .geometry import angle, hard_threshold, normalize
from .oracles import (
    BandSampler,
    GroundTruth,
    NoiseModel,
    QueryLedger,
    halfspace_labels,
    make_ground_truth,
    query_label,
)
from .schedules import PROFILES, Profile, proximity, schedule_for
from .sparse import SparseConstraint, bregman_step, mirror_p, project_intersection

AGGREGATIONS = ("average", "random")


def step_size(r, b, T, d, dist, delta, profile, sparse_s=None):
    """Gradient step scale at proximity r; sparse mode swaps the root factor."""
    log_term = math.log(T * d / (delta * r * b * dist.R * dist.L))
    if sparse_s:
        root = math.sqrt(sparse_s * math.log(d) / T)
    else:
        root = math.sqrt(1.0 / (d * T))
    return profile.c_alpha * (r / dist.beta) * root / log_term


def erm_select(candidates, X, y):
    """Candidate with the fewest labeled-sample disagreements, lowest index on ties."""
    if len(candidates) == 0:
        raise InvalidInputError("erm_select needs at least one candidate")
    errs = [float(np.mean(halfspace_labels(X, c) != y)) for c in candidates]
    return candidates[int(np.argmin(errs))]


def optimize(
    w1,
    r,
    b,
    T,
    agg,
    dist,
    noise,
    truth,
    rng,
    ledger,
    delta,
    profile,
    sparse_s=None,
    max_attempts=None,
    monitor=None,
    iterate_hook=None,
):
    """One descent epoch: T labeled band queries around the running iterate.

    Iterates stay inside ball2(w1, 4r); in sparse mode also inside
    ball1(HT_s(w1), 8r*sqrt(2s)), with updates taken in the p-norm mirror
    geometry. Returns the aggregated direction: the mean of the per-step unit
    iterates ("average", norm at most 1) or a sign-flipped uniformly chosen
    one ("random", unit norm).
    """
    w1 = np.asarray(w1, dtype=float)
    d = w1.shape[0]
    if not 0.0 < r <= 0.25 + 1e-12:
        raise InvalidInputError("proximity scale r must lie in (0, 1/4]")
    if not 0.0 < b <= dist.R / 2.0 + 1e-12:
        raise InvalidInputError("bandwidth b must lie in (0, R/2]")
    T = int(T)
    if T < 1:
        raise InvalidInputError("iteration count T must be at least 1")
    if agg not in AGGREGATIONS:
        raise InvalidInputError(f"aggregation must be one of {AGGREGATIONS}")

    alpha = step_size(r, b, T, d, dist, delta, profile, sparse_s=sparse_s)
    radius = 4.0 * r
    sampler = BandSampler(dist, b, rng, ledger, max_attempts=max_attempts)
    acc = np.zeros(d)
    snaps = [] if agg == "random" else None
    max_gap = 0.0

    if sparse_s is None:
        rad_sq = radius * radius
        w = w1.copy()
        for t in range(T):
            nw = math.sqrt(float(w @ w))
            if nw == 0.0:
                w_hat = np.zeros(d)
                w_hat[0] = 1.0
            else:
                w_hat = w / nw
            if iterate_hook is not None:
                iterate_hook(t, w.copy())
            if snaps is None:
                acc += w_hat
            else:
                snaps.append(w_hat)
            x = sampler.draw(w_hat)
            y = query_label(noise, truth, x, rng, ledger)
            w = w + (alpha * y) * x
            diff = w - w1
            dd = float(diff @ diff)
            if dd > rad_sq:
                w = w1 + (radius / math.sqrt(dd)) * diff
                gap = math.sqrt(float((w - w1) @ (w - w1))) - radius
                if gap > max_gap:
                    max_gap = gap
    else:
        p = mirror_p(d)
        u1 = hard_threshold(w1, sparse_s)
        constraint = SparseConstraint(
            center2=w1,
            radius2=radius,
            center1=u1,
            radius1=8.0 * r * math.sqrt(2.0 * sparse_s),
        )
        w = project_intersection(w1, constraint)
        for t in range(T):
            nw = math.sqrt(float(w @ w))
            if nw == 0.0:
                w_hat = np.zeros(d)
                w_hat[0] = 1.0
            else:
                w_hat = w / nw
            if iterate_hook is not None:
                iterate_hook(t, w.copy())
            if snaps is None:
                acc += w_hat
            else:
                snaps.append(w_hat)
            x = sampler.draw(w_hat)
            y = query_label(noise, truth, x, rng, ledger)
            w = bregman_step(w, -y * x, alpha, constraint, u1, p)
            gap = constraint.violation(w)
            if gap > max_gap:
                max_gap = gap

    if monitor is not None:
        prev = monitor.get("max_feasibility_gap", 0.0)
        monitor["max_feasibility_gap"] = max(prev, max_gap)
    if agg == "average":
        return acc / T
    tau = int(rng.integers(T))
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return sign * snaps[tau]


def initialize(schedule, dist, noise, truth, rng, ledger, monitor=None, max_attempts=None):
    """Warm start: N descent trials from zero, then empirical risk selection."""
    candidates = []
    for _ in range(schedule.N):
        v = np.zeros(dist.d)
        for j in range(schedule.k0 + 1):
            agg = "random" if j == 0 else "average"
            v = optimize(
                v,
                proximity(j),
                schedule.bandwidths[j],
                schedule.iterations[j],
                agg,
                dist,
                noise,
                truth,
                rng,
                ledger,
                schedule.delta,
                schedule.profile,
                sparse_s=schedule.sparse_s,
                max_attempts=max_attempts,
                monitor=monitor,
            )
        candidates.append(v)
    X = dists.sample(dist, rng, schedule.m)
    ledger.ex_calls += schedule.m
    y = np.empty(schedule.m)
    for i in range(schedule.m):
        y[i] = query_label(noise, truth, X[i], rng, ledger)
    return normalize(erm_select(candidates, X, y))


@dataclass
class LearnerConfig:
    dist: dists.WellBehavedDistribution
    noise: NoiseModel
    epsilon: float
    delta: float
    seed: object  # int, or sequence of ints for substreams
    sparse_s: int | None = None
    regime: str | None = None  # override the regime implied by the noise
    A: float | None = None  # plain-Tsybakov coefficient, for regime="TNC"
    profile: Profile = PROFILES["desk"]
    trace_angles: bool = True
    max_attempts: int | None = None


@dataclass
class LearnResult:
    v: np.ndarray
    ledger: QueryLedger
    schedule: object
    truth: GroundTruth
    trace: list
    max_feasibility_gap: float


def learn(config, truth=None):
    """Run both stages; returns the unit-vector hypothesis and full accounting."""
    rng = np.random.default_rng(config.seed)
    if truth is None:
        truth = make_ground_truth(config.dist.d, rng, s=config.sparse_s)
    schedule = schedule_for(
        config.noise,
        config.dist,
        config.epsilon,
        config.delta,
        config.profile,
        sparse_s=config.sparse_s,
        regime=config.regime,
        A=config.A,
    )
    ledger = QueryLedger()
    monitor = {"max_feasibility_gap": 0.0}
    trace = []

    v = initialize(
        schedule, config.dist, config.noise, truth, rng, ledger, monitor, config.max_attempts
    )
    entry = {
        "stage": "init",
        "j": schedule.k0,
        "labels": ledger.label_calls,
        "ex_calls": ledger.ex_calls,
    }
    if config.trace_angles:
        entry["angle"] = angle(v, truth.w_star)
    trace.append(entry)

    for j in range(1, schedule.k_eps + 1):
        v = optimize(
            v,
            proximity(j),
            schedule.bandwidths[j],
            schedule.iterations[j],
            "average",
            config.dist,
            config.noise,
            truth,
            rng,
            ledger,
            schedule.delta,
            schedule.profile,
            sparse_s=config.sparse_s,
            max_attempts=config.max_attempts,
            monitor=monitor,
        )
        entry = {
            "stage": "main",
            "j": j,
            "r": proximity(j),
            "b": schedule.bandwidths[j],
            "T": schedule.iterations[j],
            "labels": ledger.label_calls,
            "ex_calls": ledger.ex_calls,
        }
        if config.trace_angles:
            entry["angle"] = angle(v, truth.w_star)
        trace.append(entry)

    expected = schedule.total_label_budget()
    if ledger.label_calls != expected:
        raise NumericalError(
            f"label ledger shows {ledger.label_calls} calls, schedule predicts {expected}"
        )
    return LearnResult(
        v=normalize(v),
        ledger=ledger,
        schedule=schedule,
        truth=truth,
        trace=trace,
        max_feasibility_gap=monitor["max_feasibility_gap"],
    )
