"""Linear SVM with L1 hinge loss, trained by dual coordinate descent.

One binary problem per class, one-vs-rest. The per-epoch inner loop lives
in a compiled extension when available, with a pure-Python twin used as a
fallback; both produce bit-identical weights because the driver feeds them
the same permutations and both apply the same arithmetic in the same
order. Set DA_SVM_BACKEND=python to force the fallback.

The bias enters as an appended always-on feature, so it is regularized
like any other weight.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..dialogues import DataFormatError, UsageError
from ..features import FeatureConfig, FeatureVector

DEFAULT_C_GRID = (10.0, 1.0, 0.1, 0.01, 0.001)


class TrainingError(Exception):
    """Training data cannot support the requested model."""


def _pick_backend():
    if os.environ.get("DA_SVM_BACKEND", "").lower() == "python":
        from . import _dcd
        return _dcd, "python"
    try:
        from . import _dcd_cy
        return _dcd_cy, "cython"
    except ImportError:
        from . import _dcd
        return _dcd, "python"


_KERNEL, BACKEND = _pick_backend()


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _dcd_cy  # noqa: F401
        out.insert(0, "cython")
    except ImportError:
        pass
    return out


@dataclass(frozen=True)
class TrainConfig:
    C: float = 0.1
    max_outer_iterations: int = 1000
    tolerance: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise UsageError(f"C must be positive, got {self.C}")
        if self.tolerance <= 0:
            raise UsageError(f"tolerance must be positive, got {self.tolerance}")


@dataclass
class Problem:
    """Training examples packed into flat arrays the kernels share."""
    indptr: np.ndarray  # int64, n+1
    indices: np.ndarray  # int32
    data: np.ndarray  # float64
    dense: np.ndarray  # float64, (n, dense_dim); dense_dim may be 0
    n_sparse: int

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def dense_dim(self) -> int:
        return self.dense.shape[1]

    @property
    def dim(self) -> int:
        return self.n_sparse + self.dense_dim + 1  # +1 bias

    def qii(self) -> np.ndarray:
        q = np.empty(self.n, dtype=np.float64)
        for i in range(self.n):
            row = self.data[self.indptr[i]:self.indptr[i + 1]]
            q[i] = float(row @ row) + float(self.dense[i] @ self.dense[i]) + 1.0
        return q


def pack(vectors: Sequence[FeatureVector], n_sparse: Optional[int] = None) -> Problem:
    if not vectors:
        raise UsageError("no feature vectors to pack")
    dense_dims = {0 if v.dense is None else len(v.dense) for v in vectors}
    if len(dense_dims) != 1:
        raise UsageError(f"mixed dense dimensions: {sorted(dense_dims)}")
    dense_dim = dense_dims.pop()
    n = len(vectors)
    indptr = np.zeros(n + 1, dtype=np.int64)
    cols: list[int] = []
    vals: list[float] = []
    for i, v in enumerate(vectors):
        prev = -1
        for j, x in v.sparse:
            if j <= prev:
                raise UsageError("sparse ids must be strictly increasing")
            prev = j
            cols.append(j)
            vals.append(x)
        indptr[i + 1] = len(cols)
    indices = np.array(cols, dtype=np.int32)
    data = np.array(vals, dtype=np.float64)
    if n_sparse is None:
        n_sparse = int(indices.max()) + 1 if len(indices) else 0
    elif len(indices) and int(indices.max()) >= n_sparse:
        raise UsageError(
            f"sparse id {int(indices.max())} outside declared width {n_sparse}")
    dense = np.zeros((n, dense_dim), dtype=np.float64)
    for i, v in enumerate(vectors):
        if v.dense is not None:
            dense[i] = v.dense
    if not np.isfinite(data).all() or not np.isfinite(dense).all():
        raise DataFormatError("non-finite feature value in training data")
    return Problem(indptr=indptr, indices=indices, data=data, dense=dense,
                   n_sparse=n_sparse)


def _rng(seed_key: tuple[int, ...]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed_key))))


def _solve(problem: Problem, y: np.ndarray, cfg: TrainConfig,
           seed_key: tuple[int, ...],
           instrument: Optional[list] = None,
           kernel=None) -> np.ndarray:
    kernel = kernel or _KERNEL
    n = problem.n
    w = np.zeros(problem.dim, dtype=np.float64)
    alpha = np.zeros(n, dtype=np.float64)
    qii = problem.qii()
    rng = _rng(seed_key)
    c_upper = float(cfg.C)
    for it in range(cfg.max_outer_iterations):
        perm = rng.permutation(n).astype(np.int64)
        mpg = kernel.epoch(w, alpha, problem.indptr, problem.indices,
                           problem.data, problem.dense, y, qii, c_upper, perm)
        if instrument is not None:
            instrument.append({
                "epoch": it,
                "max_pg": float(mpg),
                # minimization form: 0.5 aQa - e.a == 0.5|w|^2 - sum(alpha)
                "dual_objective": 0.5 * float(w @ w) - float(alpha.sum()),
                "alpha_min": float(alpha.min()) if n else 0.0,
                "alpha_max": float(alpha.max()) if n else 0.0,
            })
        if mpg < cfg.tolerance:
            break
    return w


def train_binary(data: Sequence[tuple[FeatureVector, int]], cfg: TrainConfig,
                 n_sparse: Optional[int] = None,
                 instrument: Optional[list] = None,
                 kernel=None) -> np.ndarray:
    """Weights for one two-class problem; labels must be +1/-1."""
    if not data:
        raise UsageError("no training data")
    ys = {y for _, y in data}
    if not ys <= {-1, 1}:
        raise UsageError(f"binary labels must be +1/-1, got {sorted(ys)}")
    if ys != {-1, 1}:
        raise TrainingError("training data contains a single class")
    problem = pack([v for v, _ in data], n_sparse)
    y = np.array([float(lb) for _, lb in data], dtype=np.float64)
    return _solve(problem, y, cfg, (cfg.seed,), instrument, kernel)


@dataclass
class LinearModel:
    classes: list[str]
    weights: np.ndarray  # (n_classes, n_sparse + dense_dim + 1)
    n_sparse: int
    dense_dim: int
    feature_config: FeatureConfig
    vocab_ref: str = ""

    def __post_init__(self):
        if not self.classes:
            raise UsageError("model has no classes")
        if len(set(self.classes)) != len(self.classes):
            raise UsageError("duplicate class labels")
        expect = (len(self.classes), self.n_sparse + self.dense_dim + 1)
        if tuple(self.weights.shape) != expect:
            raise UsageError(
                f"weight matrix shape {self.weights.shape}, expected {expect}")


def train_ovr(data: Sequence[tuple[FeatureVector, str]], cfg: TrainConfig,
              classes: Optional[Sequence[str]] = None,
              n_sparse: Optional[int] = None,
              feature_config: Optional[FeatureConfig] = None,
              vocab_ref: str = "", n_jobs: int = 1) -> LinearModel:
    if not data:
        raise UsageError("no training data")
    labels = [lb for _, lb in data]
    present = set(labels)
    if classes is None:
        classes = sorted(present)
    classes = list(classes)
    if len(classes) != len(set(classes)):
        raise UsageError("duplicate entries in class list")
    if len(classes) < 2:
        raise TrainingError("one-vs-rest needs at least two classes")
    for c in classes:
        if c not in present:
            raise TrainingError(f"class {c!r} has no training examples")
    stray = present - set(classes)
    if stray:
        raise UsageError(f"labels outside declared classes: {sorted(stray)}")

    problem = pack([v for v, _ in data], n_sparse)
    weights = np.zeros((len(classes), problem.dim), dtype=np.float64)

    def solve_class(idx: int):
        y = np.array([1.0 if lb == classes[idx] else -1.0 for lb in labels],
                     dtype=np.float64)
        weights[idx] = _solve(problem, y, cfg, (cfg.seed, idx))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            list(ex.map(solve_class, range(len(classes))))
    else:
        for idx in range(len(classes)):
            solve_class(idx)

    return LinearModel(
        classes=classes, weights=weights, n_sparse=problem.n_sparse,
        dense_dim=problem.dense_dim,
        feature_config=feature_config or FeatureConfig(),
        vocab_ref=vocab_ref)


def decision_scores(model: LinearModel, x: FeatureVector) -> np.ndarray:
    if model.dense_dim:
        if x.dense is None or len(x.dense) != model.dense_dim:
            got = 0 if x.dense is None else len(x.dense)
            raise UsageError(
                f"dense block of length {got}, model expects {model.dense_dim}")
    s = model.weights[:, -1].copy()
    for j, v in x.sparse:
        if j < model.n_sparse:
            s += model.weights[:, j] * v
    if model.dense_dim and x.dense is not None:
        s += model.weights[:, model.n_sparse:model.n_sparse + model.dense_dim] @ x.dense
    return s


def predict(model: LinearModel, x: FeatureVector) -> tuple[str, dict[str, float]]:
    s = decision_scores(model, x)
    idx = int(np.argmax(s))  # ties resolve to the first class in order
    return model.classes[idx], {c: float(v) for c, v in zip(model.classes, s)}


def _accuracy(model: LinearModel, data: Sequence[tuple[FeatureVector, str]]) -> float:
    if not data:
        raise UsageError("empty evaluation set")
    hits = sum(1 for x, lb in data if predict(model, x)[0] == lb)
    return hits / len(data)


def tune_C(train: Sequence[tuple[FeatureVector, str]],
           dev: Sequence[tuple[FeatureVector, str]],
           grid: Sequence[float] = DEFAULT_C_GRID,
           cfg: TrainConfig = TrainConfig(),
           classes: Optional[Sequence[str]] = None,
           n_sparse: Optional[int] = None,
           n_jobs: int = 1) -> tuple[float, dict[float, float]]:
    """Best C by development accuracy; ties go to the smaller C."""
    if not grid:
        raise UsageError("empty C grid")
    accs: dict[float, float] = {}
    for C in grid:
        if C in accs:
            continue
        model = train_ovr(train, replace(cfg, C=C), classes=classes,
                          n_sparse=n_sparse, n_jobs=n_jobs)
        accs[C] = _accuracy(model, dev)
    best = max(accs, key=lambda C: (accs[C], -C))
    return best, accs


MODEL_FORMAT = "da-tagger-linear"
MODEL_VERSION = 1


def save_model(model: LinearModel, path: Path | str):
    """Versioned JSON with hex-float weights for a bit-exact round trip."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": model.classes,
        "n_sparse": model.n_sparse,
        "dense_dim": model.dense_dim,
        "vocab_ref": model.vocab_ref,
        "feature_config": model.feature_config.to_json(),
        "weights": [[w.hex() for w in row.tolist()] for row in model.weights],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path: Path | str) -> LinearModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}: {e}") from e
    if doc.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise DataFormatError(f"{path}: unsupported version {doc.get('version')}")
    weights = np.array([[float.fromhex(h) for h in row]
                        for row in doc["weights"]], dtype=np.float64)
    if weights.ndim != 2:
        weights = weights.reshape(len(doc["classes"]), -1)
    return LinearModel(
        classes=list(doc["classes"]), weights=weights,
        n_sparse=int(doc["n_sparse"]), dense_dim=int(doc["dense_dim"]),
        feature_config=FeatureConfig.from_json(doc["feature_config"]),
        vocab_ref=doc.get("vocab_ref", ""))
