"""Exact minimax lower-bound machinery.

Shtarkov sums by full enumeration (small horizons) or binomial grouping
(exchangeable families, large horizons), game values by backward
induction, the source-identification bound, and the block-design and
power-constrained lower-bound constructions.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .experts import ds_project
from .losses import log_sum_exp

ENUMERATION_CAP = 22


def _log_binom(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _bernoulli_log_lik(k, n, w):
    """k*ln(w) + (n-k)*ln(1-w) with the 0*ln(0) := 0 convention."""
    k = np.asarray(k, dtype=float)
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(k == 0, 0.0, k * np.log(w))
        b = np.where(k == n, 0.0, (n - k) * np.log1p(-w))
    return a + b


# ---------------------------------------------------------------------------
# Sup-probability oracles


class FiniteMaxOracle:
    """ln sup over a finite family; requires the feature sequence."""

    kind = "FiniteMax"
    exchangeable = False

    def __init__(self, family, features):
        self.family = family
        self.features = np.atleast_2d(np.asarray(features, dtype=float))

    def per_step_probs(self, T):
        """(n_experts, T) matrix of per-step probabilities of label 1."""
        cols = [np.asarray(self.family.all_predictions(self.features[: t + 1]), dtype=float)
                for t in range(T)]
        return np.stack(cols, axis=1)

    def log_sup(self, labels):
        P = self.per_step_probs(len(labels))
        y = np.asarray(labels, dtype=float)
        with np.errstate(divide="ignore"):
            # select per label so 0 * ln 0 never arises
            ll = np.where(y > 0.5, np.log(P), np.log1p(-P))
        return float(ll.sum(axis=1).max())


class ExchangeableOracle:
    """Base for oracles whose sup depends on labels only through the count of 1s."""

    exchangeable = True

    def log_sup(self, labels):
        labels = list(labels)
        return float(self.log_sup_by_count(sum(labels), len(labels)))


class ConstantBernoulliMLE(ExchangeableOracle):
    """Constant-probability experts p in [0, 1]: sup at the empirical frequency."""

    kind = "ConstantBernoulliMLE"

    def log_sup_by_count(self, k, n):
        return _bernoulli_log_lik(k, n, np.clip(np.asarray(k, dtype=float) / n, 0.0, 1.0))


class IntervalBernoulli(ExchangeableOracle):
    """Constant-probability experts restricted to [lo, hi]: clamped MLE."""

    kind = "IntervalBernoulli"

    def __init__(self, lo, hi):
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError("interval must sit inside [0, 1]")
        self.lo, self.hi = float(lo), float(hi)

    def log_sup_by_count(self, k, n):
        w = np.clip(np.asarray(k, dtype=float) / n, self.lo, self.hi)
        return _bernoulli_log_lik(k, n, w)


class DsClosedForm(ExchangeableOracle):
    """Power-mass-constrained vectors: sup = k^(-k/s) for k ones (1 for k <= 1)."""

    kind = "DsClosedForm"

    def __init__(self, s):
        self.s = float(s)
        if self.s < 1:
            raise ValueError("s must be >= 1")

    def log_sup_by_count(self, k, n):
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(k <= 1, 0.0, -(k / self.s) * np.log(np.maximum(k, 1.0)))
        return out


def shtarkov_sum(oracle, T, features=None):
    """ln S_T = ln sum over label sequences of the family's sup probability.

    Exchangeable oracles are grouped by the number of ones and run to very
    large T; generic oracles enumerate all 2^T sequences (T <= 22).
    """
    if getattr(oracle, "exchangeable", False):
        k = np.arange(T + 1)
        return log_sum_exp(_log_binom(T, k) + oracle.log_sup_by_count(k, T))
    if T > ENUMERATION_CAP:
        raise ValueError(f"T={T} exceeds the enumeration cap {ENUMERATION_CAP} "
                         "for a non-exchangeable oracle")
    return minimax_value(oracle, T, features).root


# ---------------------------------------------------------------------------
# Game values by backward induction


@dataclass
class GameValueTable:
    """Backward-induction values over all label prefixes.

    `levels[t]` holds one value per prefix of length t, indexed by the
    prefix read as a binary number (first label most significant).  Every
    internal value is the log-sum-exp of its two children; leaves are the
    family's log sup probabilities; the root equals ln S_T.
    """

    levels: list
    horizon: int

    @property
    def root(self):
        return float(self.levels[0][0])

    def value(self, label_prefix):
        idx = 0
        for y in label_prefix:
            idx = idx * 2 + int(y)
        return float(self.levels[len(label_prefix)][idx])


def _leaf_log_sups(oracle, T, features):
    if isinstance(oracle, FiniteMaxOracle):
        P = oracle.per_step_probs(T)
        with np.errstate(divide="ignore"):
            l1 = np.log(P)
            l0 = np.log1p(-P)
        # leaves indexed by the binary expansion of y^T, y_1 most significant
        n = P.shape[0]
        ll = np.zeros((n, 1))
        for t in range(T):
            ll = (ll[:, :, None] + np.stack([l0[:, t], l1[:, t]], axis=1)[:, None, :]
                  ).reshape(n, -1)
        ll = np.where(np.isnan(ll), -math.inf, ll)
        return ll.max(axis=0)
    leaves = np.empty(2 ** T)
    for idx, labels in enumerate(itertools.product((0, 1), repeat=T)):
        leaves[idx] = oracle.log_sup(list(labels))
    return leaves


def minimax_value(oracle, T, features=None):
    """Exact fixed-design game values; the root realizes ln S_T."""
    if T > ENUMERATION_CAP:
        raise ValueError(f"T={T} exceeds the enumeration cap {ENUMERATION_CAP}")
    leaves = _leaf_log_sups(oracle, T, features)
    levels = [leaves]
    cur = leaves
    for _ in range(T):
        pair = cur.reshape(-1, 2)
        m = pair.max(axis=1)
        with np.errstate(invalid="ignore"):
            nxt = m + np.log(np.exp(pair[:, 0] - m) + np.exp(pair[:, 1] - m))
        nxt = np.where(m == -math.inf, -math.inf, nxt)
        levels.append(nxt)
        cur = nxt
    levels.reverse()
    return GameValueTable(levels, T)


# ---------------------------------------------------------------------------
# Identification bound


def identification_bound(distributions, exhaustive_cap=10 ** 6):
    """Lower bound 1 - S/|P| on the minimax identification error.

    `distributions` is a (|P|, n_outcomes) row-stochastic matrix.  The
    exhaustive optimum enumerates every estimator map when |P|^n_outcomes
    is under the cap; otherwise it is None (reported, bound still valid).
    """
    P = np.atleast_2d(np.asarray(distributions, dtype=float))
    m, n = P.shape
    if not np.allclose(P.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("rows must be probability distributions")
    S = float(P.max(axis=0).sum())
    bound = 1.0 - S / m
    optimum = None
    if m ** n <= exhaustive_cap:
        best = math.inf
        for phi in itertools.product(range(m), repeat=n):
            phi = np.asarray(phi)
            err = max(float(P[p, phi != p].sum()) for p in range(m))
            best = min(best, err)
        optimum = best
    return bound, optimum


# ---------------------------------------------------------------------------
# Block-design lower bound


def block_design_features(d, T):
    """Features in d blocks: block i repeats the i-th standard basis vector.

    T is trimmed down to d * floor(T/d); returns (T_trimmed, features).
    """
    if d > T:
        raise ValueError(f"d={d} exceeds T={T}")
    n = T // d
    Tt = d * n
    feats = np.zeros((Tt, d))
    for i in range(d):
        feats[i * n:(i + 1) * n, i] = 1.0
    return Tt, feats


def restricted_binomial_shtarkov(n, lo, hi):
    """ln sum_k C(n,k) * sup_{w in [lo,hi]} w^k (1-w)^(n-k), exactly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < lo <= hi < 1.0:
        raise ValueError("interval must sit strictly inside (0, 1)")
    oracle = IntervalBernoulli(lo, hi)
    k = np.arange(n + 1)
    return log_sum_exp(_log_binom(n, k) + oracle.log_sup_by_count(k, n))


def block_shtarkov_lower(d, T, link, s):
    """Certified lower bound on ln S_T for a generalized linear family
    over the block feature design: d times the per-block restricted sum.

    Rejects links whose interval containment fails at this d.
    """
    r = 1.0 / float(s)
    if not link.interval_containment_ok(d, r):
        raise ValueError(f"link {link.name} fails interval containment at d={d}, r={r}")
    if T % d != 0:
        T = d * (T // d)
    n = T // d
    if n < 1 or n > 10 ** 5:
        raise ValueError(f"per-block length {n} outside [1, 1e5]")
    h = d ** (-r)
    return d * restricted_binomial_shtarkov(n, link.c1 - link.c2 * h, link.c1 + link.c2 * h)


# ---------------------------------------------------------------------------
# Power-constrained family


def ds_lower_bound(T, s):
    """(exact ln sum_k C(T,k) k^(-k/s), closed-form lower envelope).

    The envelope ((s+1)/(s*e)) * T^(s/(s+1)) is asymptotic; it overtakes
    the exact value only below a small-T threshold (around T < 10 for s=1).
    """
    s = float(s)
    exact = shtarkov_sum(DsClosedForm(s), T)
    formula = (s + 1.0) / (s * math.e) * T ** (s / (s + 1.0))
    return exact, formula


def ds_sup_verify(labels, s, grid_cap=200_000):
    """Closed-form sup of the sequence probability over the power-mass set
    versus a projected-grid brute-force maximization.

    Returns (closed_form_log, brute_log).  Brute force: grid the active
    coordinates over [0, 1], rescale each candidate into the feasible set,
    take the best product.
    """
    labels = [int(y) for y in labels]
    T = len(labels)
    if T > 8:
        raise ValueError("brute grid is limited to T <= 8")
    k = sum(labels)
    closed = float(DsClosedForm(s).log_sup_by_count(k, T))
    if k == 0:
        return closed, 0.0
    m = max(2, int(grid_cap ** (1.0 / k)))
    axis = np.linspace(1.0 / m, 1.0, m)
    best = -math.inf
    for combo in itertools.product(axis, repeat=k):
        p = ds_project(np.asarray(combo), s)
        with np.errstate(divide="ignore"):
            val = float(np.log(p).sum())
        best = max(best, val)
    return closed, best


# ---------------------------------------------------------------------------
# Hard-class certificate


@dataclass
class HardClassReport:
    n_sources: int
    min_hamming: int
    hamming_threshold: float
    mc_error: float          # worst per-source Monte-Carlo error estimate
    mc_std_err: float
    analytic_error_bound: float
    implied_lower_bound: float   # ln(M/2), contingent on error <= 1/2
    formula_lower_bound: float   # closed-form comparison value
    informative: bool


def _pairwise_discriminator_sets(table):
    """For each ordered pair (a, b), the largest index set where a's value is 0
    and b's is positive; the all-zeros test on that set separates the pair."""
    M, T = table.shape
    sets = {}
    for a in range(M):
        for b in range(M):
            if a == b:
                continue
            J = np.where((table[a] == 0) & (table[b] > 0))[0]
            sets[(a, b)] = J
    return sets


def hard_class_certificate(family, codebook, trials=10_000, seed=0,
                           d=None, R=1.0, L=1.0):
    """Monte-Carlo certificate for the hard Lipschitz construction.

    Verifies the codebook distance, estimates the misidentification error
    of the all-zeros discriminator, and reports the implied ln(M/2) lower
    bound next to the analytic error bound M^2 * exp(-alpha*T/8).
    """
    table = family.table
    M, T = table.shape
    if codebook.vectors.shape != (M, T) or not np.array_equal(
            (codebook.vectors > 0), (table > 0)):
        raise ValueError("codebook does not match the family's value table")
    alpha = float(table.max())
    min_h = codebook.min_hamming
    if min_h < T / 4.0:
        raise ValueError("codebook violates the T/4 distance requirement")
    sets = _pairwise_discriminator_sets(table)

    rng = np.random.default_rng(seed)
    worst_err = 0.0
    per_source = max(1, trials // M)
    for src in range(M):
        p = table[src]
        samples = rng.uniform(size=(per_source, T)) < p  # Bernoulli per coordinate
        errors = 0
        for y in samples:
            # src must win every pairwise all-zeros test it takes part in
            ok = True
            for other in range(M):
                if other == src:
                    continue
                J = sets[(src, other)]
                K = sets[(other, src)]
                # use the larger side, oriented so all-zeros picks the 0-valued row
                if len(J) >= len(K):
                    if y[J].any():
                        ok = False
                        break
                else:
                    if not y[K].any():
                        ok = False
                        break
            if not ok:
                errors += 1
        worst_err = max(worst_err, errors / per_source)
    std_err = math.sqrt(max(worst_err * (1 - worst_err), 1.0 / per_source) / per_source)

    analytic = M ** 2 * math.exp(-alpha * T / 8.0)
    implied = math.log(M / 2.0)
    dd = d if d is not None else family.packing.shape[1]
    rlt = R * L * T
    formula = (dd * math.log(rlt / dd) - dd * math.log(64.0)
               - dd * math.log(math.log(rlt)))
    return HardClassReport(
        n_sources=M,
        min_hamming=min_h,
        hamming_threshold=T / 4.0,
        mc_error=worst_err,
        mc_std_err=std_err,
        analytic_error_bound=analytic,
        implied_lower_bound=implied,
        formula_lower_bound=formula,
        informative=(M > 2 and min(worst_err, analytic) <= 0.5),
    )
