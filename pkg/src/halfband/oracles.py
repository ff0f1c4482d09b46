"""Simulated oracles: hidden ground truth, noisy labels, band-restricted sampling.

The labeling oracle is the only label source in the package, so the ledger's
label count is exactly the label complexity. Band sampling is implemented by
inverse-CDF sampling of the margin coordinate plus a geometric attempt count;
the joint law of (returned point, EX calls consumed) is identical to literal
keep-trying rejection sampling because the accepted point of a rejection loop
is independent of how many proposals it burned.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import distributions as dists
from .errors import BandTooThinError, InvalidInputError
from .geometry import normalize


@dataclass
class QueryLedger:
    ex_calls: int = 0
    label_calls: int = 0


@dataclass(frozen=True)
class GroundTruth:
    w_star: np.ndarray
    s: int | None = None


def make_ground_truth(d, rng, s=None):
    """Hidden optimum: a seeded uniformly random unit vector.

    Sparse mode places s nonzeros of equal magnitude and random sign at
    seeded random coordinates.
    """
    d = int(d)
    if s is None:
        return GroundTruth(normalize(rng.standard_normal(d)))
    s = int(s)
    if not 1 <= s <= d:
        raise InvalidInputError("sparse support size must satisfy 1 <= s <= d")
    w = np.zeros(d)
    idx = rng.choice(d, size=s, replace=False)
    w[idx] = rng.choice([-1.0, 1.0], size=s) / np.sqrt(s)
    return GroundTruth(w, s=s)


@dataclass(frozen=True)
class NoiseModel:
    """Conditional flip rate eta(x); every kind keeps eta(x) <= 1/2.

    kinds: "massart" (constant eta), "massart_band" (eta inside margin tau,
    clean outside), "geometric_tsybakov" (flip rate approaching 1/2 at the
    decision boundary at a rate set by B and alpha; the hardest generator
    compatible with the pointwise margin condition
    1/2 - eta(x) >= min(1/2, B |<w*,x>|^{(1-alpha)/alpha}), met with equality).
    """

    kind: str
    eta: float = 0.0
    tau: float = 0.0
    B: float = 0.0
    alpha: float = 1.0


def massart(eta):
    if not 0.0 <= eta < 0.5:
        raise InvalidInputError("massart: eta must lie in [0, 1/2)")
    return NoiseModel("massart", eta=float(eta))


def massart_band(eta, tau):
    if not 0.0 <= eta < 0.5:
        raise InvalidInputError("massart_band: eta must lie in [0, 1/2)")
    if not tau > 0:
        raise InvalidInputError("massart_band: tau must be positive")
    return NoiseModel("massart_band", eta=float(eta), tau=float(tau))


def geometric_tsybakov(B, alpha):
    if not B > 0:
        raise InvalidInputError("geometric_tsybakov: B must be positive")
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError("geometric_tsybakov: alpha must lie in (0, 1]")
    return NoiseModel("geometric_tsybakov", B=float(B), alpha=float(alpha))


def eta_of_margin(model, m):
    """Flip rate as a function of the ground-truth margin <w*,x>; vectorized."""
    m = np.asarray(m, dtype=float)
    if model.kind == "massart":
        return np.full_like(m, model.eta)
    if model.kind == "massart_band":
        return np.where(np.abs(m) <= model.tau, model.eta, 0.0)
    if model.kind == "geometric_tsybakov":
        expo = (1.0 - model.alpha) / model.alpha
        return 0.5 - np.minimum(0.5, model.B * np.abs(m) ** expo)
    raise InvalidInputError(f"unknown noise kind {model.kind!r}")


def eta(model, truth, x):
    """Flip rate at a single point x."""
    return float(eta_of_margin(model, np.dot(truth.w_star, np.asarray(x, dtype=float))))


def query_label(model, truth, x, rng, ledger):
    """One labeling-oracle call: sign(<w*,x>) flipped with probability eta(x).

    sign(0) is +1. Increments ledger.label_calls by exactly 1; this function
    is the package's only label source.
    """
    m = float(np.dot(truth.w_star, x))
    y = 1.0 if m >= 0.0 else -1.0
    ledger.label_calls += 1
    if rng.random() < float(eta_of_margin(model, m)):
        y = -y
    return y


def halfspace_labels(X, w):
    """Noise-free labels sign(<w,x>) with sign(0) = +1; rows of X."""
    return np.where(X @ w >= 0.0, 1.0, -1.0)


def default_max_attempts(p):
    """Attempt budget: failure probability < e^-50 per draw when p is honest."""
    return max(10**4, math.ceil(50.0 / p))


def _geometric_attempts(p, u):
    """Map u ~ Unif[0,1) to the attempt count of a success-probability-p loop."""
    if p >= 1.0:
        return np.ones_like(np.asarray(u), dtype=np.int64)
    return (np.floor(np.log1p(-np.asarray(u)) / math.log1p(-p))).astype(np.int64) + 1


def _complete_band_point(dist, w_hat, m, z, v):
    """Assemble x with <w_hat,x> = m using isotropic randomness z (and radius u.v.)."""
    if dist.family == "gaussian":
        # orthogonal part of a standard normal stays standard normal
        return z + (m - z @ w_hat) * w_hat
    # uniform ball: given the margin, the rest is uniform in a (d-1)-ball
    z_perp = z - (z @ w_hat) * w_hat
    z_perp /= np.linalg.norm(z_perp)
    radial = math.sqrt(dist.radius**2 - m * m) * v ** (1.0 / (dist.d - 1))
    return m * w_hat + radial * z_perp


def rejection_sample_band(dist, w_hat, b, rng, ledger, max_attempts=None):
    """Draw x ~ D conditioned on |<w_hat,x>| <= b, charging EX calls per attempt.

    Law-exact equivalent of querying EX until a point lands in the band.
    Raises BandTooThinError (carrying b) once a draw would exceed the attempt
    budget, with the budget's worth of EX calls charged, exactly as a literal
    loop would have.
    """
    if not b > 0:
        raise InvalidInputError("rejection_sample_band: b must be positive")
    w_hat = np.asarray(w_hat, dtype=float)
    p = dists.band_probability(dist, b)
    if max_attempts is None:
        max_attempts = default_max_attempts(p)
    if dist.family == "gaussian" and special.ndtr(b) >= 1.0 - 1e-9:
        # inverse CDF is numerically degenerate this far out; the band is nearly
        # the whole space, so literal rejection is cheap and exact
        for _ in range(max_attempts):
            x = dists.sample(dist, rng)
            ledger.ex_calls += 1
            if abs(x @ w_hat) <= b:
                return x
        raise BandTooThinError(b, max_attempts)
    g = int(_geometric_attempts(p, rng.random())[()])
    if g > max_attempts:
        ledger.ex_calls += max_attempts
        raise BandTooThinError(b, max_attempts)
    ledger.ex_calls += g
    m = float(dists.truncated_margin(dist, b, 2.0 * rng.random() - 1.0))
    z = rng.standard_normal(dist.d)
    v = rng.random() if dist.family == "uniform_ball" else 0.0
    return _complete_band_point(dist, w_hat, m, z, v)


class BandSampler:
    """Band-conditional draws around a per-call unit direction, block-buffered.

    Margins, attempt counts, and the isotropic completion variables are
    pre-drawn in blocks (they are i.i.d. and independent of the direction),
    which keeps the per-draw law identical to rejection_sample_band while
    amortizing generator overhead across an optimization loop.
    """

    def __init__(self, dist, b, rng, ledger=None, max_attempts=None, block=8192):
        if not b > 0:
            raise InvalidInputError("BandSampler: b must be positive")
        self.dist = dist
        self.b = float(b)
        self.rng = rng
        self.ledger = ledger
        self.p = dists.band_probability(dist, b)
        self.max_attempts = (
            default_max_attempts(self.p) if max_attempts is None else int(max_attempts)
        )
        self.block = int(block)
        self.literal = dist.family == "gaussian" and special.ndtr(b) >= 1.0 - 1e-9
        self.pos = self.block  # force a refill on first draw

    def _refill(self):
        n = self.block
        self.attempts = _geometric_attempts(self.p, self.rng.random(n))
        self.margins = dists.truncated_margin(self.dist, self.b, 2.0 * self.rng.random(n) - 1.0)
        self.Z = self.rng.standard_normal((n, self.dist.d))
        self.V = self.rng.random(n) if self.dist.family == "uniform_ball" else np.zeros(n)
        self.pos = 0

    def draw(self, w_hat):
        if self.literal:
            ledger = self.ledger if self.ledger is not None else QueryLedger()
            return rejection_sample_band(
                self.dist, w_hat, self.b, self.rng, ledger, self.max_attempts
            )
        if self.pos >= self.block:
            self._refill()
        i = self.pos
        self.pos += 1
        g = int(self.attempts[i])
        if g > self.max_attempts:
            if self.ledger is not None:
                self.ledger.ex_calls += self.max_attempts
            raise BandTooThinError(self.b, self.max_attempts)
        if self.ledger is not None:
            self.ledger.ex_calls += g
        return _complete_band_point(
            self.dist, w_hat, float(self.margins[i]), self.Z[i], float(self.V[i])
        )


def effective_tsybakov_A(B, alpha, dist):
    """Coefficient 4 U beta (1/B)^{alpha/(1-alpha)}.

    Reported (A, alpha) that a geometric noise generator justifies for
    plain-Tsybakov schedules, valid up to a logarithmic factor in the tail
    bound. alpha = 1 degenerates to bounded (Massart-like) noise: returns 0.
    """
    if not B > 0:
        raise InvalidInputError("effective_tsybakov_A: B must be positive")
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError("effective_tsybakov_A: alpha must lie in (0, 1]")
    if alpha == 1.0:
        return 0.0
    return 4.0 * dist.U * dist.beta * (1.0 / B) ** (alpha / (1.0 - alpha))


def exact_tsybakov_A(B, alpha, dist):
    """Tightest plain-Tsybakov A of the geometric generator under this margin law.

    P(1/2 - eta(x) <= t) = P(|<w*,x>| <= (t/B)^{alpha/(1-alpha)}) and the margin
    CDF is peak-density-Lipschitz at 0, so A = 2 f0 (1/B)^{alpha/(1-alpha)} works
    with no log factor. Used by diagnostics that need a true (A, alpha) pair.
    """
    if not B > 0:
        raise InvalidInputError("exact_tsybakov_A: B must be positive")
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError("exact_tsybakov_A: alpha must lie in (0, 1)")
    f0 = dists.margin_density_at_zero(dist)
    return 2.0 * f0 * (1.0 / B) ** (alpha / (1.0 - alpha))
