"""Random forest and gradient-boosting ensembles on the shared tree kernel."""

import numpy as np

from ._tree import Tree, candidate_thresholds

HIST_MAX_BINS = 255


class RandomForestRegressor:
    """Bootstrap-aggregated CART trees with per-split feature subsampling.

    max_features is the fraction of features sampled per split. Trees are
    grown to unlimited depth by default.
    """

    def __init__(self, n_estimators: int, max_features: float,
                 random_state: int, max_depth: int | None = None,
                 min_samples_leaf: int = 1):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.random_state = random_state
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.trees_: list[Tree] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        mtry = max(1, int(self.max_features * d))
        cand = candidate_thresholds(X)
        rng = np.random.default_rng(self.random_state)
        self.trees_ = []
        depth = -1 if self.max_depth is None else self.max_depth
        for _ in range(self.n_estimators):
            sample_idx = rng.integers(0, n, n).astype(np.int64)
            seed = int(rng.integers(0, 2**31 - 1))
            self.trees_.append(Tree.fit(X, y, sample_idx=sample_idx, cand=cand,
                                        max_depth=depth,
                                        min_leaf=self.min_samples_leaf,
                                        mtry=mtry, seed=seed))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees_:
            acc += tree.predict(X)
        return acc / len(self.trees_)

    def to_dict(self) -> dict:
        return {
            "kind": "random_forest",
            "n_estimators": self.n_estimators,
            "max_features": self.max_features,
            "random_state": self.random_state,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestRegressor":
        model = cls(d["n_estimators"], d["max_features"], d["random_state"],
                    d["max_depth"], d["min_samples_leaf"])
        model.trees_ = [Tree.from_dict(t) for t in d["trees"]]
        return model


class GradientBoostingRegressor:
    """Stagewise boosting of depth-limited CART trees on squared error.

    With max_bins set, candidate split thresholds are capped to histogram bin
    edges (the histogram-based variant); otherwise splits are exact.
    """

    def __init__(self, n_estimators: int, learning_rate: float,
                 random_state: int, max_depth: int = 6,
                 min_samples_leaf: int = 1, max_bins: int | None = None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.random_state = random_state
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_bins = max_bins
        self.base_prediction_ = 0.0
        self.trees_: list[Tree] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        cand = candidate_thresholds(X, max_bins=self.max_bins)
        self.base_prediction_ = float(np.mean(y))
        current = np.full(y.shape[0], self.base_prediction_)
        self.trees_ = []
        for _ in range(self.n_estimators):
            residuals = y - current
            tree = Tree.fit(X, residuals, cand=cand, max_depth=self.max_depth,
                            min_leaf=self.min_samples_leaf)
            current = current + self.learning_rate * tree.predict(X)
            self.trees_.append(tree)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        acc = np.full(X.shape[0], self.base_prediction_)
        for tree in self.trees_:
            acc += self.learning_rate * tree.predict(X)
        return acc

    def to_dict(self) -> dict:
        return {
            "kind": "hist_gbm" if self.max_bins else "boosted_trees",
            "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
            "random_state": self.random_state,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_bins": self.max_bins,
            "base_prediction": self.base_prediction_,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientBoostingRegressor":
        model = cls(d["n_estimators"], d["learning_rate"], d["random_state"],
                    d["max_depth"], d["min_samples_leaf"], d["max_bins"])
        model.base_prediction_ = d["base_prediction"]
        model.trees_ = [Tree.from_dict(t) for t in d["trees"]]
        return model
