"""Hypothesis families.

Families come in two flavors.  Finite families expose fast vectorized
per-step predictions through ``all_predictions`` (this is what the mixture
predictors iterate over).  Parametric families carry an evaluation oracle
``value(w, x)`` plus a parameter ball, and are turned into finite families
by the covering module or by grid discretization.

Static experts look only at the latest feature of a prefix; sequential
experts may use the whole prefix (cover members built from M-SOA runs do).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .losses import as_prob

MEMBERSHIP_SLACK = 1e-12


@dataclass(frozen=True)
class ParamBall:
    """Ball of radius R under the l_s norm in R^d (s = inf allowed)."""

    dimension: int
    radius: float
    norm_order: float = 2.0

    def __post_init__(self):
        if self.dimension < 1 or self.radius <= 0 or self.norm_order < 1:
            raise ValueError(f"invalid ball {self!r}")

    def norm(self, w):
        w = np.asarray(w, dtype=float)
        if math.isinf(self.norm_order):
            return float(np.abs(w).max())
        return float((np.abs(w) ** self.norm_order).sum() ** (1.0 / self.norm_order))

    def contains(self, w):
        return self.norm(w) <= self.radius + MEMBERSHIP_SLACK


@dataclass(frozen=True)
class LinkFunction:
    """Monotone map from the reals to [0, 1].

    `c1`, `c2` describe the interval-surjectivity property used by the
    block-design lower bound: [c1 - c2*d^-r, c1 + c2*d^-r] must sit inside
    the image of [-d^-r, d^-r].  `interval_containment_ok` checks that
    numerically for a concrete d and r rather than assuming it.
    """

    name: str
    fn: object  # vectorized callable real -> [0, 1]
    c1: float | None = None
    c2: float | None = None

    def __call__(self, z):
        return self.fn(z)

    def interval_containment_ok(self, d, r):
        if self.c1 is None or self.c2 is None:
            return False
        h = d ** (-float(r))
        lo, hi = self.c1 - self.c2 * h, self.c1 + self.c2 * h
        if not (0.0 < lo < hi < 1.0):
            return False
        # monotone link: image of [-h, h] is [fn(-h), fn(h)]
        return float(self.fn(-h)) <= lo and float(self.fn(h)) >= hi


LOGISTIC = LinkFunction("logistic", expit, c1=0.5, c2=0.2)


def _validate_table(table):
    table = np.asarray(table, dtype=float)
    if table.ndim != 2:
        raise ValueError("expert table must be 2-D (experts x features)")
    if np.isnan(table).any() or table.min() < 0 or table.max() > 1:
        raise ValueError("expert table entries must lie in [0, 1]")
    return table


class FiniteStaticFamily:
    """Finite set of static experts given by a value table.

    `feature_keys` maps hashable feature encodings (tuples) to table
    columns.  With `feature_keys=None` the family is a set of constants
    and ignores features entirely.
    """

    kind = "FiniteStatic"

    def __init__(self, table, feature_keys=None):
        self.table = _validate_table(table)
        if feature_keys is None:
            if self.table.shape[1] != 1:
                raise ValueError("constant family needs a single-column table")
            self.feature_keys = None
            self._index = None
        else:
            keys = [tuple(np.atleast_1d(np.asarray(k, dtype=float)).tolist()) for k in feature_keys]
            if len(keys) != self.table.shape[1]:
                raise ValueError("feature_keys length must match table columns")
            self.feature_keys = keys
            self._index = {k: j for j, k in enumerate(keys)}

    @property
    def n_experts(self):
        return self.table.shape[0]

    def _column(self, x):
        if self._index is None:
            return 0
        key = tuple(np.atleast_1d(np.asarray(x, dtype=float)).tolist())
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"feature {x!r} is not in this family's finite feature set") from None

    def all_predictions(self, prefix):
        return self.table[:, self._column(prefix[-1])]

    def expert_prediction(self, i, prefix):
        return float(self.table[i, self._column(prefix[-1])])


class SequentialFamily:
    """Finite set of sequential experts, each a callable on a feature prefix."""

    kind = "FiniteSequential"

    def __init__(self, members):
        self.members = list(members)
        if not self.members:
            raise ValueError("empty sequential family")

    @property
    def n_experts(self):
        return len(self.members)

    def all_predictions(self, prefix):
        return np.array([as_prob(g(prefix)) for g in self.members])

    def expert_prediction(self, i, prefix):
        return as_prob(self.members[i](prefix))


@dataclass
class ParametricFamily:
    """L-Lipschitz (in the parameter) family f(w, .) over a parameter ball."""

    kind: str
    ball: ParamBall
    lipschitz: float
    value: object  # (w, x) -> prob
    value_batch: object  # (W: (n,d), x: (d,)) -> (n,)

    def eval(self, w, prefix):
        w = np.asarray(w, dtype=float)
        if not self.ball.contains(w):
            raise ValueError(f"parameter outside {self.ball}")
        return as_prob(self.value(w, np.asarray(prefix)[-1]))


def glm_family(link=LOGISTIC, ball=None, d=1, R=1.0, s=2.0, lipschitz=None):
    """Generalized linear family x -> link(<w, x>) over a parameter ball.

    The default Lipschitz constant assumes features with norm at most 1 and
    a link with slope at most 1/4 (logistic); pass `lipschitz` otherwise.
    """
    if ball is None:
        ball = ParamBall(d, R, s)
    if lipschitz is None:
        lipschitz = 1.0

    def value(w, x):
        return float(link(float(np.dot(w, x))))

    def value_batch(W, x):
        return np.asarray(link(W @ np.asarray(x, dtype=float)))

    return ParametricFamily("GeneralizedLinear", ball, lipschitz, value, value_batch, )


class FiniteParamFamily:
    """A parametric family restricted to a finite parameter set (a cover grid)."""

    kind = "FiniteParametric"

    def __init__(self, params, parent):
        self.params = np.atleast_2d(np.asarray(params, dtype=float))
        self.parent = parent

    @property
    def n_experts(self):
        return self.params.shape[0]

    def all_predictions(self, prefix):
        return np.clip(self.parent.value_batch(self.params, np.asarray(prefix)[-1]), 0.0, 1.0)

    def expert_prediction(self, i, prefix):
        return as_prob(self.parent.value(self.params[i], np.asarray(prefix)[-1]))


class DsFamily:
    """Label-probability vectors p with sum_t p_t^s <= 1, evaluated by time index.

    The t-th prediction of member p is p[t-1]; features are ignored beyond
    the prefix length.
    """

    kind = "DsFamily"

    def __init__(self, vectors, s):
        self.vectors = _validate_table(vectors)
        self.s = float(s)
        if self.s < 1:
            raise ValueError("s must be >= 1")
        for row in self.vectors:
            if _power_mass(row, self.s) > 1.0 + 1e-9:
                raise ValueError("member violates the power-mass constraint")

    @property
    def n_experts(self):
        return self.vectors.shape[0]

    def all_predictions(self, prefix):
        t = len(prefix)
        return self.vectors[:, t - 1]

    def expert_prediction(self, i, prefix):
        return float(self.vectors[i, len(prefix) - 1])


def _power_mass(p, s):
    p = np.asarray(p, dtype=float)
    if math.isinf(s):
        return float(np.abs(p).max())
    with np.errstate(divide="ignore"):
        return float((p**s).sum())


def ds_project(p, s):
    """Rescale p into the feasible set {sum p_t^s <= 1}; no-op if already inside."""
    p = np.asarray(p, dtype=float)
    if p.size and (p.min() < 0 or p.max() > 1):
        raise ValueError("entries must lie in [0, 1]")
    mass = _power_mass(p, float(s))
    if mass <= 1.0:
        return p.copy()
    if math.isinf(s):
        return np.clip(p, 0.0, 1.0)
    return p * mass ** (-1.0 / s)


# ---------------------------------------------------------------------------
# Best in hindsight


def _finite_losses(family, features, labels):
    """(n_experts,) cumulative losses of a finite family on (x^T, y^T)."""
    T = len(labels)
    n = family.n_experts
    total = np.zeros(n)
    for t in range(T):
        p = np.asarray(family.all_predictions(features[: t + 1]), dtype=float)
        q = p if labels[t] == 1 else 1.0 - p
        with np.errstate(divide="ignore"):
            total += -np.log(q)
    return total


def best_in_hindsight(family, features, labels, points_per_axis=None, refine_iters=3):
    """Exact minimizer for finite families; grid + coordinate refinement otherwise.

    Returns (params, loss) where params is the expert index for finite
    families and the parameter vector for parametric ones.  The parametric
    loss is an upper bound on the true infimum within the grid resolution.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = [int(y) for y in labels]
    if not labels:
        return None, 0.0
    if hasattr(family, "n_experts"):
        losses = _finite_losses(family, features, labels)
        i = int(np.argmin(losses))
        return i, float(losses[i])
    return _best_parametric(family, features, labels, points_per_axis, refine_iters)


def _param_losses(family, W, features, labels):
    total = np.zeros(W.shape[0])
    for t in range(len(labels)):
        p = np.clip(family.value_batch(W, features[t]), 0.0, 1.0)
        q = p if labels[t] == 1 else 1.0 - p
        with np.errstate(divide="ignore"):
            total += -np.log(q)
    return total


def _ball_grid(ball, points_per_axis):
    axes = [np.linspace(-ball.radius, ball.radius, points_per_axis)] * ball.dimension
    W = np.array(list(itertools.product(*axes)))
    keep = np.array([ball.contains(w) for w in W])
    return W[keep]


def _best_parametric(family, features, labels, points_per_axis, refine_iters):
    ball = family.ball
    if points_per_axis is None:
        points_per_axis = 1000 if ball.dimension <= 2 else 100
    W = _ball_grid(ball, points_per_axis)
    losses = _param_losses(family, W, features, labels)
    w = W[int(np.argmin(losses))].copy()
    best = float(losses.min())
    # local coordinate refinement around the grid winner
    step = 2 * ball.radius / (points_per_axis - 1)
    for _ in range(refine_iters):
        for j in range(ball.dimension):
            cand = np.tile(w, (41, 1))
            cand[:, j] += np.linspace(-step, step, 41)
            keep = np.array([ball.contains(c) for c in cand])
            cand = cand[keep]
            closs = _param_losses(family, cand, features, labels)
            k = int(np.argmin(closs))
            if closs[k] < best:
                best = float(closs[k])
                w = cand[k].copy()
        step /= 8.0
    return w, best


# ---------------------------------------------------------------------------
# Hard Lipschitz construction


@dataclass
class CodeBook:
    """Binary code vectors with a verified minimum pairwise Hamming distance."""

    vectors: np.ndarray  # (M, T) uint8
    min_hamming: int

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.uint8)
        actual = _min_pairwise_hamming(self.vectors)
        if actual < self.min_hamming:
            raise ValueError(f"pairwise Hamming distance {actual} is below the "
                             f"declared minimum {self.min_hamming}")


def _min_pairwise_hamming(vectors):
    M = vectors.shape[0]
    best = vectors.shape[1]
    for i in range(M):
        for j in range(i + 1, M):
            best = min(best, int((vectors[i] != vectors[j]).sum()))
    return best


class HardLipschitzFamily:
    """Expert family taking values {0, alpha} on T designated features.

    At a packing point the family reads its own code row; at any other
    parameter the value is the tight Lipschitz extension
    sup_{w'} {f(w', x_t) - L * ||w - w'||_2}, clipped at 0.  Features off
    the designated list evaluate to 0.
    """

    kind = "HardLipschitz"

    def __init__(self, packing, table, features, lipschitz, ball):
        self.packing = np.atleast_2d(np.asarray(packing, dtype=float))
        self.table = _validate_table(table)
        self.features = np.atleast_2d(np.asarray(features, dtype=float))
        self.lipschitz = float(lipschitz)
        self.ball = ball
        self._feature_index = {tuple(x.tolist()): t for t, x in enumerate(self.features)}

    @property
    def n_experts(self):
        return self.packing.shape[0]

    def _time_of(self, x):
        return self._feature_index.get(tuple(np.atleast_1d(np.asarray(x, dtype=float)).tolist()))

    def all_predictions(self, prefix):
        t = self._time_of(np.asarray(prefix)[-1])
        if t is None:
            return np.zeros(self.n_experts)
        return self.table[:, t]

    def expert_prediction(self, i, prefix):
        t = self._time_of(np.asarray(prefix)[-1])
        return 0.0 if t is None else float(self.table[i, t])

    def eval_extended(self, w, x):
        """Value at an arbitrary parameter via the sup-minus-distance extension."""
        t = self._time_of(x)
        if t is None:
            return 0.0
        w = np.asarray(w, dtype=float)
        dists = np.linalg.norm(self.packing - w, axis=1)
        return float(max(0.0, (self.table[:, t] - self.lipschitz * dists).max()))


def _lattice_packing(d, R, separation, count):
    """First `count` points of an integer lattice (spacing = separation) in B_2^d(R)."""
    per_axis = np.arange(-math.floor(R / separation), math.floor(R / separation) + 1) * separation
    pts = [np.array(p) for p in itertools.product(per_axis, repeat=d)
           if np.linalg.norm(p) <= R + MEMBERSHIP_SLACK]
    pts.sort(key=lambda p: (np.linalg.norm(p), tuple(p)))
    if len(pts) < count:
        raise ValueError(f"lattice packing of B_2^{d}({R}) at separation {separation} "
                         f"has only {len(pts)} points, need {count}")
    return np.array(pts[:count])


def build_hard_lipschitz_class(d, T, R, L, alpha, seed, retry_cap=10_000):
    """Construct the hard Lipschitz family together with its codebook.

    Draws M = floor((L*R/(2*alpha))^d) binary code vectors by rejection
    until all pairwise Hamming distances reach T/4, pairs them with a
    lattice packing of the parameter ball at separation alpha/L, and
    assigns values 0/alpha along T designated features.
    """
    M = int((L * R / (2.0 * alpha)) ** d)
    if M < 2:
        raise ValueError(f"need at least 2 code vectors, got M={M} "
                         f"(increase R*L or decrease alpha)")
    rng = np.random.default_rng(seed)
    threshold = T / 4.0
    vectors = []
    rejections = 0
    while len(vectors) < M:
        cand = rng.integers(0, 2, size=T).astype(np.uint8)
        if all((cand != v).sum() >= threshold for v in vectors):
            vectors.append(cand)
        else:
            rejections += 1
            if rejections > retry_cap:
                raise RuntimeError(f"rejection sampling failed for (M={M}, T={T}) "
                                   f"after {retry_cap} rejections")
    vectors = np.array(vectors)
    codebook = CodeBook(vectors, _min_pairwise_hamming(vectors))

    packing = _lattice_packing(d, R, alpha / L, M)
    table = vectors.astype(float) * alpha
    # designated features: distinct points on the first axis
    features = np.zeros((T, d))
    features[:, 0] = (np.arange(T) + 1.0) / (T + 1.0)
    family = HardLipschitzFamily(packing, table, features, L, ParamBall(d, R, 2.0))
    return family, codebook


# ---------------------------------------------------------------------------
# Plain-text serialization (one expert per row)


def save_finite_family(path, family):
    with open(path, "w") as fh:
        if family.feature_keys is None:
            fh.write("# constants\n")
        else:
            fh.write("# features: " + " | ".join(
                ";".join(repr(float(c)) for c in key) for key in family.feature_keys) + "\n")
        for row in family.table:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_finite_family(path):
    with open(path) as fh:
        header = fh.readline().strip()
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    if header.startswith("# features:"):
        keys = [tuple(float(c) for c in part.split(";"))
                for part in header[len("# features:"):].split("|")]
    else:
        keys = None
    return FiniteStaticFamily(np.array(rows), feature_keys=keys)


def save_codebook(path, codebook):
    np.savetxt(path, codebook.vectors, fmt="%d")


def load_codebook(path):
    vectors = np.atleast_2d(np.loadtxt(path, dtype=np.uint8))
    return CodeBook(vectors, _min_pairwise_hamming(vectors))
