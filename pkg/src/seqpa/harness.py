"""Experiment runner: adversaries, predictor-vs-bound matrices, CSV reports.

The online protocol is strictly sequential: the learner predicts from the
feature prefix, then the adversary (label source) reveals the label.  The
feature sequence is always fixed up front; adversarial search is over
labels only, using either the exhaustive game tree (small horizons) or
the greedy per-step heuristic.
"""

import configparser
import hashlib
import itertools
import math
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds
from .covering import grid_cover
from .experts import best_in_hindsight, glm_family
from .losses import pointwise_regret
from .predictors import MixturePredictor, Transcript, continuous_bayes

SCHEMA_VERSION = 1
WORST_CASE_CAP = 18


class ConstantPredictor:
    """Always predicts the same value (the trivial T-bound baseline)."""

    def __init__(self, value=0.5):
        self.value = value
        self._pending = False

    def step(self, x):
        self._pending = True
        return self.value

    def update(self, y):
        self._pending = False


def run_protocol(predictor, features, label_fn):
    """Play the sequential protocol: predict, reveal, score."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    transcript = Transcript(features=features)
    for t in range(features.shape[0]):
        yhat = predictor.step(features[t])
        y = int(label_fn(t, yhat))
        predictor.update(y)
        transcript.append(yhat, y)
    return transcript


# ---------------------------------------------------------------------------
# Adversaries


def greedy_label_fn():
    """Pick the label with the larger instantaneous loss; ties go to 1."""
    return lambda t, yhat: 0 if yhat > 0.5 else 1


def iid_label_fn(p, rng):
    return lambda t, yhat: int(rng.uniform() < p)


def fixed_label_fn(labels):
    return lambda t, yhat: int(labels[t])


def greedy_labels(predictor, features):
    """Run the greedy adversary against a live predictor; returns the labels."""
    return run_protocol(predictor, features, greedy_label_fn()).labels


def worst_case_labels(predictor_factory, family, features, cap=WORST_CASE_CAP,
                      hindsight_kwargs=None):
    """Exhaustive label-tree search for the regret-maximizing sequence.

    Runs a fresh predictor (from `predictor_factory`) on every label
    sequence and scores it against the family's best in hindsight.  Above
    the cap, falls back to the greedy adversary with a warning.
    Returns (labels, regret).
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    T = features.shape[0]
    hindsight_kwargs = hindsight_kwargs or {}
    if T > cap:
        warnings.warn(f"T={T} over the exhaustive cap {cap}; using the greedy adversary")
        labels = greedy_labels(predictor_factory(), features)
        _, best = best_in_hindsight(family, features, labels, **hindsight_kwargs)
        tr = run_protocol(predictor_factory(), features, fixed_label_fn(labels))
        return labels, pointwise_regret(tr, best)
    best_labels, best_regret = None, -math.inf
    for labels in itertools.product((0, 1), repeat=T):
        tr = run_protocol(predictor_factory(), features, fixed_label_fn(labels))
        _, best = best_in_hindsight(family, features, list(labels), **hindsight_kwargs)
        regret = pointwise_regret(tr, best)
        if regret > best_regret:
            best_labels, best_regret = list(labels), regret
    return best_labels, best_regret


# ---------------------------------------------------------------------------
# Experiment cells


@dataclass
class ReportRow:
    digest: str
    family: str
    predictor: str
    adversary: str
    T: int
    d: int
    seed: int
    regret: float
    bound: float
    slack: float
    allowance: float
    ok: bool
    wall_time: float

    CSV_FIELDS = ("digest", "family", "predictor", "adversary", "T", "d",
                  "seed", "regret", "bound", "slack", "allowance", "ok")

    def csv_line(self):
        # wall_time deliberately excluded: summaries must be byte-identical
        # across repeated runs of the same config+seed
        vals = [self.digest, self.family, self.predictor, self.adversary,
                str(self.T), str(self.d), str(self.seed),
                f"{self.regret:.12g}", f"{self.bound:.12g}", f"{self.slack:.12g}",
                f"{self.allowance:.12g}", str(int(self.ok))]
        return ",".join(vals)


def _cell_digest(cell):
    blob = ";".join(f"{k}={cell[k]}" for k in sorted(cell))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _ball_features(rng, T, d):
    g = rng.normal(size=(T, d))
    g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-12)
    return g * rng.uniform(size=(T, 1)) ** (1.0 / d)


def _build_features(cell, rng, T, d):
    kind = cell.get("features", "ball")
    if kind == "ball":
        return _ball_features(rng, T, d)
    if kind == "block":
        from .shtarkov import block_design_features
        Tt, feats = block_design_features(d, T)
        if Tt != T:
            raise ValueError(f"block design needs d | T (got T={T}, d={d})")
        return feats
    raise ValueError(f"unknown feature design {kind!r}")


def _build_label_fn(cell, rng):
    kind = cell.get("adversary", "greedy")
    if kind == "greedy":
        return greedy_label_fn()
    if kind.startswith("iid:"):
        return iid_label_fn(float(kind.split(":", 1)[1]), rng)
    if kind.startswith("file:"):
        labels = [int(v) for v in Path(kind.split(":", 1)[1]).read_text().split()]
        return fixed_label_fn(labels)
    raise ValueError(f"unknown adversary {kind!r}")


def run_experiment(cell, out_dir=None):
    """Run one experiment cell; returns (ReportRow, Transcript).

    The cell is a flat dict of strings (one point of the bench matrix).
    A transcript CSV is written to `out_dir` when given.
    """
    start = time.monotonic()
    digest = _cell_digest(cell)
    T = int(cell["T"])
    d = int(cell.get("d", 1))
    R = float(cell.get("R", 1.0))
    L = float(cell.get("L", 1.0))
    seed = int(cell.get("seed", 0))
    fam_kind = cell.get("family", "logistic")
    algo = cell.get("algorithm", "smooth_bayes")

    rng = np.random.default_rng([seed, int(digest[:8], 16)])
    features = _build_features(cell, rng, T, d)

    if fam_kind != "logistic":
        raise ValueError(f"unknown family {fam_kind!r} for bench cells")
    family = glm_family(d=d, R=R, s=2.0, lipschitz=L)

    allowance = 0.0
    if algo == "smooth_bayes":
        alpha_raw = cell.get("alpha", "auto")
        alpha = d / T if alpha_raw == "auto" else float(alpha_raw)
        cover = grid_cover(family, alpha)
        predictor = MixturePredictor(cover.family, truncation=alpha)
        bound = bounds.lipschitz_upper(T, d, R, L)
    elif algo == "continuous_bayes":
        C = float(cell.get("C", 0.25))
        predictor = continuous_bayes(family, T, C, verify_hessian=False)
        bound = bounds.hessian_upper(T, d, R, C)
        allowance = 0.1
    elif algo == "constant":
        predictor = ConstantPredictor(0.5)
        bound = float(T)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")

    transcript = run_protocol(predictor, features, _build_label_fn(cell, rng))
    ppa = 1000 if d <= 2 else 100
    params, best = best_in_hindsight(family, features, transcript.labels,
                                     points_per_axis=min(ppa, 400 if d == 2 else ppa))
    transcript.best_params = params
    transcript.best_loss = best
    regret = pointwise_regret(transcript, best)
    slack = bound - regret
    row = ReportRow(digest=digest, family=fam_kind, predictor=algo,
                    adversary=cell.get("adversary", "greedy"), T=T, d=d,
                    seed=seed, regret=regret, bound=bound, slack=slack,
                    allowance=allowance, ok=slack >= -allowance,
                    wall_time=time.monotonic() - start)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        transcript.to_csv(str(out_dir / f"transcript_{digest}.csv"))
    return row, transcript


# ---------------------------------------------------------------------------
# Bench matrices


def parse_bench_config(path):
    """Parse a key=value sectioned config into a list of experiment cells.

    Every comma-separated value is a matrix axis; the cell list is the
    cross product over all axes, flattened across sections.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys like T and R are case-sensitive
    with open(path) as fh:
        cp.read_file(fh)
    axes = []
    for section in cp.sections():
        for key, raw in cp.items(section):
            values = [v.strip() for v in raw.split(",")] if "," in raw else [raw.strip()]
            axes.append((key, values))
    keys = [k for k, _ in axes]
    cells = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        cells.append(dict(zip(keys, combo)))
    return cells


def run_bench(config_path, out_dir):
    """Run every cell of a bench config; returns (rows, any_failure).

    Writes transcript CSVs and a summary CSV (rows keyed and sorted by
    config digest, so assembly order is irrelevant).
    """
    cells = parse_bench_config(config_path)
    rows = [run_experiment(cell, out_dir=out_dir)[0] for cell in cells]
    rows.sort(key=lambda r: r.digest)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = out_dir / "summary.csv"
    with open(summary, "w", newline="") as fh:
        fh.write(f"# schema={SCHEMA_VERSION}\n")
        fh.write(",".join(ReportRow.CSV_FIELDS) + "\n")
        for row in rows:
            fh.write(row.csv_line() + "\n")
    return rows, any(not r.ok for r in rows)
