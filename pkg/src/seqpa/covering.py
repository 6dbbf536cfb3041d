"""Global sequential covers and shattering numbers.

Two constructions: lattice covers of a parameter ball for Lipschitz
parametric families, and the multi-level mistake-bounded-learner cover for
finite discretized families.  Shattering recursions are exhaustive and
memoized, intended for desk-scale instances.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .experts import FiniteParamFamily

DEFAULT_SIZE_CAP = 10 ** 7


@dataclass
class CoverSet:
    """Finite set of sequential functions covering a family at a given scale.

    Members are callables on a feature prefix.  When the cover came from a
    parameter lattice, `family` gives vectorized access for the mixture
    predictors.
    """

    scale: float
    provenance: str
    members: list
    family: object = None

    def __len__(self):
        return len(self.members)


# ---------------------------------------------------------------------------
# Lattice covers of Lipschitz parametric families


def grid_cover(pfam, alpha, size_cap=DEFAULT_SIZE_CAP):
    """Lattice cover of the parameter ball at l_s radius alpha/L.

    Members are the static functions w -> f(w, .) at the lattice points,
    lifted to sequential functions.  The member count is checked against
    the standard (2RL/alpha + 1)^d covering bound.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    ball = pfam.ball
    d, R, s = ball.dimension, ball.radius, ball.norm_order
    L = pfam.lipschitz
    radius = alpha / L
    # a cubic cell of side delta has l_s circumradius (delta/2) * d^(1/s)
    dpow = 1.0 if math.isinf(s) else d ** (1.0 / s)
    delta = 2.0 * radius / dpow
    reach = R + radius  # lattice points this far out still cover boundary cells
    kmax = math.floor(reach / delta)
    axis = np.arange(-kmax, kmax + 1) * delta
    if len(axis) ** d > size_cap:
        raise ValueError(f"lattice cover would have up to {len(axis) ** d} members, "
                         f"over the cap {size_cap}")
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    W = np.stack([m.ravel() for m in mesh], axis=1)
    if math.isinf(s):
        norms = np.abs(W).max(axis=1)
    else:
        norms = (np.abs(W) ** s).sum(axis=1) ** (1.0 / s)
    W = W[norms <= reach + 1e-12]
    bound = (2.0 * R * L / alpha + 1.0) ** d
    if len(W) > bound:
        raise ValueError(f"lattice cover has {len(W)} members, over the "
                         f"(2RL/alpha+1)^d bound {bound:.6g}; this construction "
                         f"needs d^(1/s) below 2")
    fam = FiniteParamFamily(W, pfam)

    def make_member(w):
        return lambda prefix: pfam.value(w, np.asarray(prefix)[-1])

    members = [make_member(w) for w in W]
    return CoverSet(scale=alpha, provenance="grid", members=members, family=fam)


# ---------------------------------------------------------------------------
# Discretization


@dataclass
class DiscretizedFamily:
    """A finite family snapped to K levels (2*alpha spacing starting at alpha).

    `table` holds 0-based level indices per (expert, feature column);
    `feature_keys` name the columns.  Levels are z_k = (2k+1)*alpha.
    """

    alpha: float
    levels: np.ndarray
    table: np.ndarray
    feature_keys: list = None

    @property
    def K(self):
        return len(self.levels)

    @property
    def n_experts(self):
        return self.table.shape[0]


def discretization_levels(alpha):
    K = math.ceil(1.0 / (2.0 * alpha))
    return np.array([(2 * k + 1) * alpha for k in range(K)])


def discretize(values, alpha, feature_keys=None):
    """Snap a [0,1] value table to the nearest level, ties toward the lower index."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    levels = discretization_levels(alpha)
    dist = np.abs(values[..., None] - levels[None, None, :])
    # argmin takes the first (lowest) index on ties
    table = dist.argmin(axis=-1)
    return DiscretizedFamily(alpha=alpha, levels=levels, table=table,
                             feature_keys=feature_keys)


# ---------------------------------------------------------------------------
# Shattering numbers (exhaustive, memoized)


def fat_shattering_number(values, alpha, depth_cap=None):
    """Largest depth of a feature-labeled tree the family shatters with
    margin alpha around witness levels.

    `values` is an (n_experts, n_features) table over a finite feature
    set.  Witness candidates are midpoints of member-value pairs.  Returns
    (depth, exact); empty family gives (-1, True).
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n, F = values.shape
    if n == 0:
        return -1, True
    if depth_cap is None:
        depth_cap = max(1, int(math.log2(n))) if n > 1 else 0
    cache = {}

    def can(sub, k):
        if k == 0:
            return True
        if len(sub) < 2 ** k:
            return False
        key = (sub, k)
        if key in cache:
            return cache[key]
        idx = sorted(sub)
        out = False
        for j in range(F):
            vals = sorted(set(values[idx, j]))
            witnesses = {(a + b) / 2.0 for a, b in itertools.combinations(vals, 2)
                         if b - a >= 2 * alpha - 1e-12}
            for s in witnesses:
                low = frozenset(i for i in idx if values[i, j] <= s - alpha + 1e-12)
                high = frozenset(i for i in idx if values[i, j] >= s + alpha - 1e-12)
                if low and high and can(low, k - 1) and can(high, k - 1):
                    out = True
                    break
            if out:
                break
        cache[key] = out
        return out

    full = frozenset(range(n))
    depth = 0
    while depth < depth_cap and can(full, depth + 1):
        depth += 1
    return depth, depth < depth_cap or not can(full, depth + 1)


def fat1_number(table, K, depth_cap=None, cache=None):
    """Discretized 1-shattering number of a level-valued family.

    `table` is (n_experts, n_features) with 0-based level indices.
    Returns (depth, exact); empty family gives (-1, True).
    """
    table = np.atleast_2d(np.asarray(table, dtype=int))
    n, F = table.shape
    if n == 0:
        return -1, True
    if depth_cap is None:
        depth_cap = max(1, int(math.log2(n))) if n > 1 else 0
    if cache is None:
        cache = {}

    def can(sub, k):
        if k == 0:
            return True
        if len(sub) < 2 ** k:
            return False
        key = (sub, k)
        if key in cache:
            return cache[key]
        idx = sorted(sub)
        out = False
        for j in range(F):
            col = table[idx, j]
            for s in range(K):
                low = frozenset(i for i, v in zip(idx, col) if v <= s - 1)
                high = frozenset(i for i, v in zip(idx, col) if v >= s + 1)
                if low and high and can(low, k - 1) and can(high, k - 1):
                    out = True
                    break
            if out:
                break
        cache[key] = out
        return out

    full = frozenset(range(n))
    depth = 0
    while depth < depth_cap and can(full, depth + 1):
        depth += 1
    return depth, depth < depth_cap or not can(full, depth + 1)


# ---------------------------------------------------------------------------
# Multi-level mistake-bounded learner (M-SOA)


class _Fat1Cache:
    """Shared memo for 1-shattering numbers of subfamilies of one family."""

    def __init__(self, dfamily):
        self.table = dfamily.table
        self.K = dfamily.K
        self._memo = {}
        self._can_cache = {}

    def value(self, members):
        members = frozenset(members)
        if members in self._memo:
            return self._memo[members]
        if not members:
            self._memo[members] = -1
            return -1
        sub = self.table[sorted(members)]
        val, _ = fat1_number(sub, self.K, cache=None)
        self._memo[members] = val
        return val


def msoa_run(dfamily, x_cols, y_levels, forced=None, cache=None):
    """Run the multi-level mistake-bounded learner.

    `x_cols` are feature column indices, `y_levels` the revealed 0-based
    level labels.  Prediction: the level whose consistent subclass has the
    largest 1-shattering number (lowest level wins ties).  An error is a
    prediction off by >= 2 levels; errors trigger restriction to the
    consistent subclass.

    `forced` overrides the update rule for cover enumeration: a dict
    {step: level} restricting on exactly those steps regardless of errors
    (y_levels may be None in that mode).

    Returns (predictions, error_count).
    """
    if cache is None:
        cache = _Fat1Cache(dfamily)
    table = dfamily.table
    members = frozenset(range(dfamily.n_experts))
    preds = []
    errors = 0
    for t, j in enumerate(x_cols):
        scores = []
        for k in range(dfamily.K):
            consistent = frozenset(i for i in members if table[i, j] == k)
            scores.append(cache.value(consistent))
        khat = int(np.argmax(scores))  # argmax takes the lowest index on ties
        preds.append(khat)
        if forced is not None:
            if t in forced:
                # a forced step plays the given level outright: the cover
                # member must match the target exactly where it restricts
                preds[-1] = int(forced[t])
                members = frozenset(i for i in members if table[i, j] == forced[t])
            continue
        y = int(y_levels[t])
        if abs(khat - y) >= 2:
            errors += 1
            members = frozenset(i for i in members if table[i, j] == y)
            if not members:
                raise RuntimeError("consistent class became empty after an error; "
                                   "the input was not realizable")
    return preds, errors


class _MsoaCoverMember:
    """Sequential function defined by one forced-update run of the learner."""

    def __init__(self, dfamily, feature_index, forced, cache):
        self.dfamily = dfamily
        self._feature_index = feature_index
        self.forced = forced
        self._cache = cache
        self._runs = {}

    def level_trajectory(self, x_cols):
        key = tuple(x_cols)
        if key not in self._runs:
            preds, _ = msoa_run(self.dfamily, x_cols, None, forced=self.forced,
                                cache=self._cache)
            self._runs[key] = preds
        return self._runs[key]

    def __call__(self, prefix):
        prefix = np.atleast_2d(np.asarray(prefix, dtype=float))
        cols = [self._feature_index[tuple(x.tolist())] for x in prefix]
        levels = self.level_trajectory(cols)
        return float(self.dfamily.levels[levels[-1]])


def cover_size_bound(T, alpha, dfat):
    """Exact sum_{t<=dfat} C(T,t) * ceil(3/(2*alpha))^t, as a float (inf on overflow)."""
    if dfat < 0:
        return 0.0
    base = math.ceil(3.0 / (2.0 * alpha))
    total = sum(math.comb(T, t) * base ** t for t in range(min(dfat, T) + 1))
    try:
        return float(total)
    except OverflowError:
        return math.inf


def msoa_cover(values, alpha, T, feature_keys, size_cap=DEFAULT_SIZE_CAP):
    """Enumerate forced-update learner runs into a 3*alpha sequential cover.

    `values` is the original [0,1] value table over a finite feature set;
    it is discretized at scale alpha, and every (step set I, level
    assignment) with |I| up to the 1-shattering number defines one cover
    member.  Member count is sum_{t<=d} C(T,t) * K^t.
    """
    dfam = discretize(values, alpha, feature_keys=feature_keys)
    cache = _Fat1Cache(dfam)
    d = cache.value(frozenset(range(dfam.n_experts)))
    d = max(d, 0)
    K = dfam.K
    size = sum(math.comb(T, t) * K ** t for t in range(min(d, T) + 1))
    if size > size_cap:
        raise ValueError(f"cover enumeration would produce {size} members, "
                         f"over the cap {size_cap}")
    keys = [tuple(np.atleast_1d(np.asarray(k, dtype=float)).tolist()) for k in feature_keys]
    index = {k: j for j, k in enumerate(keys)}
    members = []
    for t in range(min(d, T) + 1):
        for I in itertools.combinations(range(T), t):
            for ks in itertools.product(range(K), repeat=t):
                forced = dict(zip(I, ks))
                members.append(_MsoaCoverMember(dfam, index, forced, cache))
    return CoverSet(scale=3.0 * alpha, provenance="msoa", members=members,
                    family=None)
