"""Minimal supervised-learning stack for milestone forecasting.

Classifiers (LDA, CART, kNN) estimate the probability of finishing late;
regressors (OLS, ridge, CART, kNN) quantify the expected deviation. A
k-fold cross-validation harness compares algorithms and picks the best,
caret-style: hyperparameter grids are resolved on the same folds and the
winner's per-fold metric samples are reported.

The roster is open: register additional algorithms in CLASSIFIERS /
REGRESSORS behind the same fit/predict contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree


class RankDeficientError(ValueError):
    """The regression design matrix has collinear columns."""


DEFAULT_KNN_GRID = (5, 9, 15, 25)
DEFAULT_RIDGE_GRID = (0.0, 0.01, 0.1, 1.0, 10.0)
DEFAULT_CART_MIN_LEAF = 20
DEFAULT_CART_MAX_DEPTH = 8

CLASSIFICATION_ROSTER = ("lda", "cart", "knn")
REGRESSION_ROSTER = ("ols", "ridge", "cart", "knn")


@dataclass(frozen=True)
class HyperGrids:
    knn_k: tuple[int, ...] = DEFAULT_KNN_GRID
    ridge_lam: tuple[float, ...] = DEFAULT_RIDGE_GRID
    cart_min_leaf: int = DEFAULT_CART_MIN_LEAF
    cart_max_depth: int = DEFAULT_CART_MAX_DEPTH


@dataclass
class Dataset:
    """Feature rows with either binary labels or real-valued targets."""

    features: np.ndarray
    targets: np.ndarray
    task: str  # "classification" | "regression"
    train_fraction: float = 0.8

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim == 1:
            self.features = self.features[:, None]
        self.targets = np.asarray(self.targets, dtype=float)
        if len(self.features) != len(self.targets):
            raise ValueError("features and targets must have the same length")
        if self.task == "classification" and not set(np.unique(self.targets)) <= {0.0, 1.0}:
            raise ValueError("classification targets must be 0/1 labels")
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")

    def split(self, seed: int = 0, stratified: bool | None = None):
        """Deterministic train/test index split at train_fraction."""
        n = len(self.targets)
        rng = np.random.default_rng(seed)
        if stratified is None:
            stratified = self.task == "classification"
        if stratified:
            train_idx = []
            for label in np.unique(self.targets):
                members = np.flatnonzero(self.targets == label)
                members = rng.permutation(members)
                cut = int(round(self.train_fraction * len(members)))
                train_idx.append(members[:cut])
            train = np.sort(np.concatenate(train_idx))
        else:
            perm = rng.permutation(n)
            train = np.sort(perm[: int(round(self.train_fraction * n))])
        mask = np.zeros(n, dtype=bool)
        mask[train] = True
        return train, np.flatnonzero(~mask)


@dataclass(frozen=True)
class CVPlan:
    folds: int = 10
    repeats: int | None = None  # None: 1 for classification, 3 for regression
    stratified: bool = True
    seed: int = 0

    def resolved_repeats(self, task: str) -> int:
        if self.repeats is not None:
            return self.repeats
        return 1 if task == "classification" else 3


def kfold_split(n: int, plan: CVPlan, labels=None) -> list[np.ndarray]:
    """Fold id per sample, one array per repeat.

    Folds are near-equal; with labels given and stratification on, each
    class is dealt round-robin so per-fold label counts differ by at most
    one sample per class.
    """
    if plan.folds < 2:
        raise ValueError("need at least 2 folds")
    if plan.folds > n:
        raise ValueError(f"cannot split {n} samples into {plan.folds} folds")
    repeats = plan.repeats if plan.repeats is not None else 1
    rng = np.random.default_rng(plan.seed)
    assignments = []
    for _ in range(repeats):
        fold = np.empty(n, dtype=int)
        if labels is not None and plan.stratified:
            for label in np.unique(labels):
                members = rng.permutation(np.flatnonzero(np.asarray(labels) == label))
                fold[members] = np.arange(len(members)) % plan.folds
        else:
            fold[rng.permutation(n)] = np.arange(n) % plan.folds
        assignments.append(fold)
    return assignments


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    _require_nonempty(y_true)
    return float(np.mean(y_true == y_pred))


def kappa(y_true, y_pred) -> float:
    """Cohen's kappa; chance agreement from the marginal products. Returns
    nan when chance agreement is 1 (single-class degenerate)."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    _require_nonempty(y_true)
    n = len(y_true)
    labels = np.union1d(y_true, y_pred)
    p_o = np.mean(y_true == y_pred)
    p_e = sum(
        np.mean(y_true == c) * np.mean(y_pred == c) for c in labels
    )
    if abs(1.0 - p_e) < 1e-15:
        return float("nan")
    return float((p_o - p_e) / (1.0 - p_e))


def mae(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    _require_nonempty(y_true)
    return float(np.mean(np.abs(y_true - y_pred)))


def rmse(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    _require_nonempty(y_true)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def r2(y_true, y_pred) -> float:
    """Coefficient of determination; nan when the targets have no variance."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    _require_nonempty(y_true)
    ss_tot = np.sum((y_true - np.mean(y_true)) ** 2)
    if ss_tot == 0:
        return float("nan")
    return float(1.0 - np.sum((y_true - y_pred) ** 2) / ss_tot)


def _require_nonempty(y):
    if len(y) == 0:
        raise ValueError("metric needs at least one prediction/target pair")


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

class LdaClassifier:
    """Two-class Gaussian discriminant with pooled covariance."""

    def __init__(self):
        self.regularized = False

    def fit(self, X, y):
        X, y = np.asarray(X, dtype=float), np.asarray(y)
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise ValueError("lda needs at least one sample of each class")
        self.means_ = np.array([X[y == c].mean(axis=0) for c in self.classes_])
        self.priors_ = np.array([np.mean(y == c) for c in self.classes_])
        centered = np.vstack([X[y == c] - m for c, m in zip(self.classes_, self.means_)])
        cov = centered.T @ centered / max(len(X) - len(self.classes_), 1)
        if np.linalg.cond(cov) > 1e12 or not np.isfinite(np.linalg.cond(cov)):
            cov = cov + 1e-8 * np.eye(cov.shape[0])
            self.regularized = True
        self.cov_inv_ = np.linalg.inv(cov)
        return self

    def _log_posteriors(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        scores = np.empty((len(X), len(self.classes_)))
        for k, (m, prior) in enumerate(zip(self.means_, self.priors_)):
            d = X - m
            scores[:, k] = -0.5 * np.einsum("ij,jk,ik->i", d, self.cov_inv_, d) + np.log(prior)
        return scores

    def posteriors(self, X) -> np.ndarray:
        """(n, 2) class posterior probabilities, rows summing to 1."""
        scores = self._log_posteriors(X)
        scores -= scores.max(axis=1, keepdims=True)
        p = np.exp(scores)
        return p / p.sum(axis=1, keepdims=True)

    def predict_proba(self, X) -> np.ndarray:
        """P(label == 1) per row."""
        post = self.posteriors(X)
        col1 = np.flatnonzero(self.classes_ == 1)
        if len(col1) == 0:
            return np.zeros(len(post))
        return post[:, col1[0]]

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(float)


class CartTree:
    """Binary decision tree: Gini splits for classification, variance
    reduction for regression; leaves hold class proportions / means."""

    def __init__(self, task: str, min_leaf: int = DEFAULT_CART_MIN_LEAF,
                 max_depth: int = DEFAULT_CART_MAX_DEPTH):
        self.task = task
        self.min_leaf = min_leaf
        self.max_depth = max_depth

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.n_nodes = 0
        self.root_ = self._grow(X, y, 0)
        return self

    def _leaf(self, y):
        self.n_nodes += 1
        return {"leaf": float(np.mean(y)), "n": len(y)}

    def _grow(self, X, y, depth):
        if depth >= self.max_depth or len(y) < 2 * self.min_leaf or np.all(y == y[0]):
            return self._leaf(y)
        best = self._best_split(X, y)
        if best is None:
            return self._leaf(y)
        j, thr = best
        mask = X[:, j] <= thr
        self.n_nodes += 1
        return {
            "feature": j,
            "threshold": thr,
            "left": self._grow(X[mask], y[mask], depth + 1),
            "right": self._grow(X[~mask], y[~mask], depth + 1),
        }

    def _best_split(self, X, y):
        n = len(y)
        best_score, best = np.inf, None
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="mergesort")
            xs, ys = X[order, j], y[order]
            # candidate cuts between distinct values, both children >= min_leaf
            cuts = np.flatnonzero(xs[:-1] < xs[1:])
            cuts = cuts[(cuts + 1 >= self.min_leaf) & (n - cuts - 1 >= self.min_leaf)]
            if len(cuts) == 0:
                continue
            n_left = (cuts + 1).astype(float)
            n_right = n - n_left
            csum = np.cumsum(ys)[cuts]
            if self.task == "classification":
                total = np.sum(ys)
                p_l = csum / n_left
                p_r = (total - csum) / n_right
                score = n_left * p_l * (1 - p_l) + n_right * p_r * (1 - p_r)
            else:
                csq = np.cumsum(ys**2)[cuts]
                total, total_sq = np.sum(ys), np.sum(ys**2)
                sse_l = csq - csum**2 / n_left
                sse_r = (total_sq - csq) - (total - csum) ** 2 / n_right
                score = sse_l + sse_r
            k = int(np.argmin(score))
            if score[k] < best_score - 1e-12:
                best_score = score[k]
                thr = 0.5 * (xs[cuts[k]] + xs[cuts[k] + 1])
                best = (j, thr)
        return best

    def _traverse(self, node, x):
        while "leaf" not in node:
            node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
        return node["leaf"]

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.array([self._traverse(self.root_, x) for x in X])
        if self.task == "classification":
            return (out >= 0.5).astype(float)
        return out

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self._traverse(self.root_, x) for x in X])

    @property
    def depth(self) -> int:
        def walk(node):
            if "leaf" in node:
                return 0
            return 1 + max(walk(node["left"]), walk(node["right"]))

        return walk(self.root_)


class KnnModel:
    """k nearest neighbors on standardized features (Euclidean metric)."""

    def __init__(self, task: str, k: int = 9):
        self.task = task
        self.k = k

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.y_ = np.asarray(y, dtype=float)
        if self.k > len(X):
            raise ValueError(f"k={self.k} exceeds the {len(X)} training samples")
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd_ = np.where(sd > 0, sd, 1.0)
        self.tree_ = cKDTree((X - self.mean_) / self.sd_)
        return self

    def _neighbor_targets(self, X, k):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        z = (X - self.mean_) / self.sd_
        _, idx = self.tree_.query(z, k=k)
        if idx.ndim == 1:  # k == 1 collapses the neighbor axis
            idx = idx[:, None]
        return self.y_[idx]

    def predict_proba(self, X) -> np.ndarray:
        return self._neighbor_targets(X, self.k).mean(axis=1)

    def predict(self, X) -> np.ndarray:
        vote = self._neighbor_targets(X, self.k).mean(axis=1)
        if self.task == "classification":
            return (vote >= 0.5).astype(float)
        return vote


class OlsRegressor:
    """Least squares with intercept."""

    def fit(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        design = np.column_stack([np.ones(len(X)), X])
        rank = np.linalg.matrix_rank(design)
        if rank < design.shape[1]:
            raise RankDeficientError(
                "design matrix is rank deficient; collinear columns: "
                + ", ".join(_collinear_columns(design))
            )
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        self.intercept_ = float(coef[0])
        self.coef_ = coef[1:]
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.intercept_ + X @ self.coef_


def _collinear_columns(design: np.ndarray) -> list[str]:
    """Greedy scan: columns that do not increase the design rank."""
    names = ["intercept"] + [f"x{j}" for j in range(design.shape[1] - 1)]
    kept: list[int] = []
    flagged = []
    for j in range(design.shape[1]):
        trial = design[:, kept + [j]]
        if np.linalg.matrix_rank(trial) > len(kept):
            kept.append(j)
        else:
            flagged.append(names[j])
    return flagged


class RidgeRegressor:
    """L2-penalized least squares on standardized features; the intercept is
    not penalized. lam = 0 reproduces OLS."""

    def __init__(self, lam: float = 0.0):
        self.lam = lam

    def fit(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd_ = np.where(sd > 0, sd, 1.0)
        z = (X - self.mean_) / self.sd_
        self.y_mean_ = float(np.mean(y))
        a = z.T @ z + self.lam * np.eye(z.shape[1])
        self.coef_ = np.linalg.solve(a, z.T @ (y - self.y_mean_))
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.y_mean_ + ((X - self.mean_) / self.sd_) @ self.coef_


# ---------------------------------------------------------------------------
# Training factories
# ---------------------------------------------------------------------------

def train_classifier(algo: str, X, y, hyper: dict | None = None):
    hyper = hyper or {}
    if algo == "lda":
        return LdaClassifier().fit(X, y)
    if algo == "cart":
        return CartTree(
            "classification",
            min_leaf=hyper.get("min_leaf", DEFAULT_CART_MIN_LEAF),
            max_depth=hyper.get("max_depth", DEFAULT_CART_MAX_DEPTH),
        ).fit(X, y)
    if algo == "knn":
        return KnnModel("classification", k=hyper.get("k", 9)).fit(X, y)
    raise ValueError(f"unknown classifier {algo!r} (roster: {CLASSIFICATION_ROSTER})")


def train_regressor(algo: str, X, y, hyper: dict | None = None):
    hyper = hyper or {}
    if algo == "ols":
        return OlsRegressor().fit(X, y)
    if algo == "ridge":
        return RidgeRegressor(lam=hyper.get("lam", 0.0)).fit(X, y)
    if algo == "cart":
        return CartTree(
            "regression",
            min_leaf=hyper.get("min_leaf", DEFAULT_CART_MIN_LEAF),
            max_depth=hyper.get("max_depth", DEFAULT_CART_MAX_DEPTH),
        ).fit(X, y)
    if algo == "knn":
        return KnnModel("regression", k=hyper.get("k", 9)).fit(X, y)
    raise ValueError(f"unknown regressor {algo!r} (roster: {REGRESSION_ROSTER})")


def _hyper_candidates(algo: str, task: str, grids: HyperGrids, n_train: int) -> list[dict]:
    if algo == "knn":
        ks = [k for k in grids.knn_k if k <= n_train] or [min(grids.knn_k)]
        return [{"k": k} for k in ks]
    if algo == "ridge" and task == "regression":
        return [{"lam": lam} for lam in grids.ridge_lam]
    if algo == "cart":
        return [{"min_leaf": grids.cart_min_leaf, "max_depth": grids.cart_max_depth}]
    return [{}]


# ---------------------------------------------------------------------------
# Cross-validation harness and reporting
# ---------------------------------------------------------------------------

CLASSIFICATION_METRICS = ("accuracy", "kappa")
REGRESSION_METRICS = ("mae", "rmse", "r2")


@dataclass
class AlgoCVResult:
    algo: str
    hyper: dict
    samples: dict[str, np.ndarray]  # metric -> one value per fold x repeat

    def mean(self, metric: str) -> float:
        return float(np.nanmean(self.samples[metric]))


@dataclass
class CVReport:
    task: str
    entries: dict[str, AlgoCVResult] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    def summary_rows(self) -> list[dict]:
        """One row per (algorithm, metric) with the six order statistics."""
        rows = []
        for algo, res in self.entries.items():
            for metric, samples in res.samples.items():
                clean = samples[~np.isnan(samples)]
                if len(clean) == 0:
                    clean = np.array([np.nan])
                q1, med, q3 = np.percentile(clean, [25, 50, 75])
                rows.append(
                    {
                        "algorithm": algo,
                        "metric": metric,
                        "Min": float(np.min(clean)),
                        "1st Qu": float(q1),
                        "Median": float(med),
                        "Mean": float(np.mean(clean)),
                        "3rd Qu": float(q3),
                        "Max": float(np.max(clean)),
                    }
                )
        return rows

    def format_table(self) -> str:
        header = ["algorithm", "metric", "Min", "1st Qu", "Median", "Mean", "3rd Qu", "Max"]
        lines = ["\t".join(header)]
        for row in self.summary_rows():
            lines.append(
                "\t".join(
                    [row["algorithm"], row["metric"]]
                    + [f"{row[h]:.7f}" for h in header[2:]]
                )
            )
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("algorithm,metric,min,1st_qu,median,mean,3rd_qu,max\n")
            for row in self.summary_rows():
                fh.write(
                    f"{row['algorithm']},{row['metric']},{row['Min']!r},"
                    f"{row['1st Qu']!r},{row['Median']!r},{row['Mean']!r},"
                    f"{row['3rd Qu']!r},{row['Max']!r}\n"
                )


def cross_validate(
    dataset: Dataset,
    plan: CVPlan,
    roster: tuple[str, ...] | None = None,
    grids: HyperGrids = HyperGrids(),
) -> CVReport:
    """Evaluate every roster algorithm with k-fold CV on the dataset.

    Hyperparameter grids are resolved on the same folds; the report keeps
    the per-fold metric samples of each algorithm's winning configuration.
    """
    task = dataset.task
    if roster is None:
        roster = CLASSIFICATION_ROSTER if task == "classification" else REGRESSION_ROSTER
    X, y = dataset.features, dataset.targets
    n = len(y)
    folds_plan = CVPlan(
        folds=plan.folds,
        repeats=plan.resolved_repeats(task),
        stratified=plan.stratified and task == "classification",
        seed=plan.seed,
    )
    labels = y if folds_plan.stratified else None
    assignments = kfold_split(n, folds_plan, labels)
    train_fn = train_classifier if task == "classification" else train_regressor
    metrics = CLASSIFICATION_METRICS if task == "classification" else REGRESSION_METRICS
    select_metric = "accuracy" if task == "classification" else "rmse"
    better = np.greater if task == "classification" else np.less

    report = CVReport(task=task)
    for algo in roster:
        best_result = None
        failure = None
        for hyper in _hyper_candidates(algo, task, grids, n - n // folds_plan.folds):
            samples: dict[str, list[float]] = {m: [] for m in metrics}
            try:
                for fold_ids in assignments:
                    for f in range(folds_plan.folds):
                        val = fold_ids == f
                        model = train_fn(algo, X[~val], y[~val], hyper)
                        pred = model.predict(X[val])
                        for m in metrics:
                            samples[m].append(_METRIC_FN[m](y[val], pred))
            except ValueError as exc:
                # candidate cannot be fitted on this data (rank deficiency,
                # single-class fold, ...): drop it, as caret would
                failure = str(exc)
                continue
            result = AlgoCVResult(
                algo=algo,
                hyper=hyper,
                samples={m: np.array(v) for m, v in samples.items()},
            )
            if best_result is None or better(
                result.mean(select_metric), best_result.mean(select_metric)
            ):
                best_result = result
        if best_result is None:
            report.failures[algo] = failure or "no fittable configuration"
        else:
            report.entries[algo] = best_result
    return report


_METRIC_FN = {"accuracy": accuracy, "kappa": kappa, "mae": mae, "rmse": rmse, "r2": r2}


def select_model(report: CVReport, roster: tuple[str, ...] | None = None) -> str:
    """Pick the winning algorithm: highest mean accuracy (ties: higher mean
    kappa, then roster order) for classification; lowest mean RMSE (ties:
    lower MAE, then roster order) for regression."""
    if not report.entries:
        raise ValueError("no algorithms evaluated")
    if roster is None:
        roster = tuple(report.entries)
    if report.task == "classification":
        key = lambda a: (-report.entries[a].mean("accuracy"),
                         -report.entries[a].mean("kappa"),
                         roster.index(a))
    else:
        key = lambda a: (report.entries[a].mean("rmse"),
                         report.entries[a].mean("mae"),
                         roster.index(a))
    return min(report.entries, key=key)
