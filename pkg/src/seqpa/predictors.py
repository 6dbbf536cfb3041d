"""Online prediction strategies.

`MixturePredictor` is the posterior-weighted mixture over a finite expert
family, optionally with smooth truncation of every expert prediction.  The
continuous-prior variant is realized as a uniform grid over an enlarged
parameter ball.  `nml_predictor` is the fixed-design normalized maximum
likelihood strategy obtained from the exact game-value table.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import shtarkov
from .experts import FiniteParamFamily, ParamBall, ParametricFamily
from .losses import as_label, log_loss, log_sum_exp


def smooth_truncate(g, alpha):
    """(g + alpha) / (1 + 2*alpha): pulls predictions away from {0, 1}."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("truncation parameter must lie in (0, 1)")
    g = np.asarray(g, dtype=float)
    if np.any(np.isnan(g)) or np.any((g < 0.0) | (g > 1.0)):
        raise ValueError("predictions must lie in [0, 1]")
    out = (g + alpha) / (1.0 + 2.0 * alpha)
    return float(out) if out.ndim == 0 else out


@dataclass
class Transcript:
    """One online run."""

    features: np.ndarray
    predictions: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    step_losses: list = field(default_factory=list)
    cumulative_loss: float = 0.0
    best_params: object = None
    best_loss: float | None = None

    def append(self, yhat, y):
        loss = log_loss(yhat, y)
        self.predictions.append(yhat)
        self.labels.append(y)
        self.step_losses.append(loss)
        self.cumulative_loss += loss

    def to_csv(self, path_or_buf):
        fh = open(path_or_buf, "w", newline="") if isinstance(path_or_buf, str) else path_or_buf
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "x", "y", "yhat", "step_loss", "cum_loss"])
            cum = 0.0
            for t, (y, yhat, loss) in enumerate(
                    zip(self.labels, self.predictions, self.step_losses), start=1):
                cum += loss
                x = ";".join(f"{v:.12g}" for v in np.atleast_1d(self.features[t - 1]))
                writer.writerow([t, x, y, f"{yhat:.12g}", f"{loss:.12g}", f"{cum:.12g}"])
        finally:
            if isinstance(path_or_buf, str):
                fh.close()

    def to_csv_string(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


class AllExpertsRuledOut(RuntimeError):
    """Every expert has assigned probability zero to the observed past."""


class MixturePredictor:
    """Posterior-weighted mixture over a finite family (log-domain weights).

    With `truncation=None` this is the plain Bayesian mixture; with
    `truncation=alpha` every expert prediction is smooth-truncated before
    both the mixture average and the weight update, so each log-weight
    stays equal to minus the truncated cumulative loss of that expert.
    Step/update alternation is enforced.
    """

    def __init__(self, family, truncation=None, prior_log_weights=None):
        self.family = family
        self.truncation = truncation
        if truncation is not None and not 0.0 < truncation < 1.0:
            raise ValueError("truncation parameter must lie in (0, 1)")
        n = family.n_experts
        if prior_log_weights is None:
            self.log_weights = np.zeros(n)
        else:
            self.log_weights = np.asarray(prior_log_weights, dtype=float).copy()
            if self.log_weights.shape != (n,):
                raise ValueError("prior shape mismatch")
        self.t = 0
        self._features = []
        self._pending = None

    def step(self, x):
        """Receive feature x_t and return the mixture prediction."""
        if self._pending is not None:
            raise RuntimeError("step called twice without an update")
        self._features.append(np.atleast_1d(np.asarray(x, dtype=float)))
        prefix = np.vstack(self._features)
        p = np.asarray(self.family.all_predictions(prefix), dtype=float)
        if self.truncation is not None:
            p = (p + self.truncation) / (1.0 + 2.0 * self.truncation)
        m = self.log_weights.max()
        if m == -math.inf:
            raise AllExpertsRuledOut("all mixture weights are zero")
        w = np.exp(self.log_weights - m)
        w /= w.sum()
        self._pending = p
        return float(np.clip(w @ p, 0.0, 1.0))

    def update(self, y):
        """Reveal label y_t; decrement each log-weight by that expert's loss."""
        if self._pending is None:
            raise RuntimeError("update called before step")
        y = as_label(y)
        p = self._pending
        self._pending = None
        q = p if y == 1 else 1.0 - p
        with np.errstate(divide="ignore"):
            self.log_weights += np.log(q)
        self.t += 1

    def log_mixture_mass(self):
        """ln of the prior-weighted mixture probability of the observed past."""
        n = self.family.n_experts
        return log_sum_exp(self.log_weights) - math.log(n)


def continuous_bayes(family, T, hessian_bound, d=None, R=None, verify_hessian=True,
                     seed=0):
    """Bayesian mixture over a uniform grid on the enlarged parameter ball.

    The grid spacing is a tenth of the half-ball radius sqrt(d/CT), which
    keeps the discretization error of the continuous-prior mixture well
    under 0.1 nats.  Desk-scale guard: d <= 4.
    """
    if isinstance(family, ParametricFamily):
        ball = family.ball
        d = ball.dimension
        R = ball.radius
    else:
        raise TypeError("continuous_bayes needs a parametric family")
    if d > 4:
        raise ValueError("continuous-prior grids are limited to d <= 4")
    C = float(hessian_bound)
    if C <= 0:
        raise ValueError("Hessian bound must be positive")
    if verify_hessian:
        emp = empirical_hessian_bound(family, n_samples=200, seed=seed)
        if emp > 1.01 * C:
            raise ValueError(f"claimed Hessian bound {C} refuted: empirical {emp:.6g}")
    rho = math.sqrt(d / (C * T))
    R_star = R + rho
    per_axis = math.ceil(10.0 * math.sqrt(C * T / d) * R_star)
    axes = np.linspace(-R_star, R_star, per_axis)
    mesh = np.meshgrid(*([axes] * d), indexing="ij")
    W = np.stack([m.ravel() for m in mesh], axis=1)
    W = W[np.linalg.norm(W, axis=1) <= R_star]
    enlarged = ParametricFamily(family.kind, ParamBall(d, R_star, 2.0),
                                family.lipschitz, family.value, family.value_batch)
    grid = FiniteParamFamily(W, enlarged)
    return MixturePredictor(grid)


def empirical_hessian_bound(family, n_samples=200, seed=0, eps=1e-4):
    """Largest second directional derivative of the per-label log likelihood,
    estimated by central finite differences at random parameters/features."""
    rng = np.random.default_rng(seed)
    ball = family.ball
    d = ball.dimension
    worst = 0.0
    for _ in range(n_samples):
        w = rng.normal(size=d)
        w *= rng.uniform() ** (1.0 / d) * ball.radius / max(np.linalg.norm(w), 1e-12)
        x = rng.normal(size=d)
        x /= max(np.linalg.norm(x), 1e-12)
        u = rng.normal(size=d)
        u /= max(np.linalg.norm(u), 1e-12)
        for y in (0, 1):
            def ll(v):
                p = min(max(family.value(v, x), 1e-12), 1 - 1e-12)
                return math.log(p if y == 1 else 1.0 - p)
            second = (ll(w + eps * u) - 2.0 * ll(w) + ll(w - eps * u)) / eps**2
            worst = max(worst, abs(second))
    return worst


class NmlPredictor:
    """Fixed-design normalized maximum likelihood strategy.

    Built from the exact backward-induction value table; the step-t
    prediction is the conditional Q(y_t = 1 | y^{t-1}).  Prefixes with zero
    mass predict 1/2 (the equalizer argument never reaches them).
    """

    def __init__(self, table):
        self.table = table
        self.regret = table.root  # ln S_T, constant over positive-mass sequences

    @property
    def horizon(self):
        return self.table.horizon

    def predict(self, label_prefix):
        t = len(label_prefix)
        if t >= self.horizon:
            raise ValueError("prediction past the horizon")
        idx = 0
        for y in label_prefix:
            idx = idx * 2 + as_label(y)
        v = self.table.levels[t][idx]
        if v == -math.inf:
            return 0.5
        v1 = self.table.levels[t + 1][idx * 2 + 1]
        return float(math.exp(v1 - v)) if v1 > -math.inf else 0.0

    def run(self, labels):
        """Predictions along one label sequence."""
        return [self.predict(labels[:t]) for t in range(len(labels))]


def nml_predict(oracle, T, features=None):
    """NML predictor for a family given through its sup-probability oracle."""
    table = shtarkov.minimax_value(oracle, T, features)
    return NmlPredictor(table)
