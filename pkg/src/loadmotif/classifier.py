"""Single-neuron binary classifier over motif inputs.

A linear unit (weight vector a1, bias b1) cascaded with a sigmoid whose
input is scaled by a2 and shifted by b2.  Because the sigmoid is
monotone, ranking consumers only needs the linear score, which is O(k)
for k consumers.  Training is full-batch gradient descent on binary
cross-entropy with a deterministic, seed-fixed initialisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MaskSpec
from .errors import DataError, DivergenceError, UsageError


@dataclass
class ClassifierModel:
    a1: np.ndarray
    b1: float
    a2: float
    b2: float
    decision_threshold: float = 0.5
    mask_applied: MaskSpec | None = None

    def __post_init__(self):
        self.a1 = np.asarray(self.a1, dtype=np.float64)
        if self.a1.ndim != 1:
            raise UsageError("a1 must be a 1-D weight vector")


@dataclass
class Prediction:
    consumer_id: str
    score: float
    linear_score: float
    label: int


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 2000
    seed: int = 0
    init_scale: float = 0.01
    mask: MaskSpec | None = None
    constrain_to_mask: bool = False


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def training_loss(a1, b1, a2, b2, inputs, labels) -> float:
    """Mean binary cross-entropy of the two-stage unit, in the
    softplus form that stays finite for saturated scores."""
    with np.errstate(over="ignore", invalid="ignore"):
        z1 = inputs @ a1 + b1
        z2 = a2 * z1 + b2
        return float(np.mean((1.0 - labels) * z2 + np.logaddexp(0.0, -z2)))


def training_gradients(a1, b1, a2, b2, inputs, labels):
    """Analytic gradient of :func:`training_loss` in (a1, b1, a2, b2)."""
    k = inputs.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        z1 = inputs @ a1 + b1
        z2 = a2 * z1 + b2
        r = (_sigmoid(z2) - labels) / k
        da2 = float(r @ z1)
        db2 = float(r.sum())
        dz1 = a2 * r
        da1 = inputs.T @ dz1
        db1 = float(dz1.sum())
    return da1, db1, da2, db2


def train(inputs, labels, config: TrainConfig | None = None) -> ClassifierModel:
    """Fit the single-neuron model by full-batch gradient descent.

    `inputs` is the k x m matrix of motifs, `labels` the 0/1 class
    vector; both classes must be present.  a1 starts from the daytime
    mask vector (all ones when no mask is configured) scaled down, plus a
    small seeded perturbation; b1 = b2 = 0 and a2 = 1.  When
    `constrain_to_mask` is set, weights outside the mask window are
    zeroed after every step, mirroring the calibrated setup.  Training is
    deterministic for a fixed config.
    """
    config = config or TrainConfig()
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[0] != labels.shape[0]:
        raise UsageError(
            f"inputs {inputs.shape} and labels {labels.shape} do not line up"
        )
    k, m = inputs.shape
    if k < 2:
        raise DataError(f"need at least 2 training motifs, got {k}")
    if not np.isfinite(inputs).all():
        raise DataError("training motifs contain non-finite values")
    classes = np.unique(labels)
    if not np.array_equal(classes, [0.0, 1.0]):
        raise DataError(
            f"training needs both classes present, got labels {classes}"
        )

    if config.mask is not None:
        if config.mask.m != m:
            raise UsageError(f"mask m={config.mask.m} != motif length {m}")
        base = config.mask.vector()
    else:
        base = np.ones(m)
    rng = np.random.default_rng(config.seed)
    a1 = config.init_scale * (base + 0.1 * rng.standard_normal(m))
    keep = base > 0 if (config.constrain_to_mask and config.mask is not None) else None
    if keep is not None:
        a1[~keep] = 0.0
    b1 = 0.0
    a2 = 1.0
    b2 = 0.0

    lr = config.learning_rate
    for epoch in range(config.epochs):
        da1, db1, da2, db2 = training_gradients(a1, b1, a2, b2, inputs, labels)
        a1 = a1 - lr * da1
        b1 -= lr * db1
        a2 -= lr * da2
        b2 -= lr * db2
        if keep is not None:
            a1[~keep] = 0.0
        loss = training_loss(a1, b1, a2, b2, inputs, labels)
        if not np.isfinite(loss):
            raise DivergenceError(f"training loss diverged at epoch {epoch}")

    return ClassifierModel(
        a1=a1, b1=float(b1), a2=float(a2), b2=float(b2),
        mask_applied=config.mask if config.constrain_to_mask else None,
    )


def predict(model: ClassifierModel, motif, consumer_id: str = "") -> Prediction:
    """Score one motif: sigmoid(a2 * (motif . a1 + b1) + b2), positive
    when the score reaches the decision threshold."""
    motif = np.asarray(motif, dtype=np.float64)
    if motif.shape != model.a1.shape:
        raise UsageError(
            f"motif length {motif.shape} does not match model m={model.a1.shape}"
        )
    linear = float(motif @ model.a1)
    score = float(_sigmoid(model.a2 * (linear + model.b1) + model.b2))
    return Prediction(
        consumer_id=consumer_id,
        score=score,
        linear_score=linear,
        label=int(score >= model.decision_threshold),
    )


def predict_batch(model: ClassifierModel, inputs,
                  consumer_ids: list[str] | None = None) -> list[Prediction]:
    """Vectorised :func:`predict` over a k x m motif matrix."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != model.a1.shape[0]:
        raise UsageError(
            f"input matrix {inputs.shape} does not match model m={model.a1.shape[0]}"
        )
    ids = consumer_ids if consumer_ids is not None else [""] * inputs.shape[0]
    linear = inputs @ model.a1
    scores = _sigmoid(model.a2 * (linear + model.b1) + model.b2)
    labels = scores >= model.decision_threshold
    return [
        Prediction(consumer_id=ids[i], score=float(scores[i]),
                   linear_score=float(linear[i]), label=int(labels[i]))
        for i in range(inputs.shape[0])
    ]


def rank_consumers(model: ClassifierModel, inputs) -> np.ndarray:
    """Indices ordered most-positive first using only the linear scores.

    Equivalent to sorting by sigmoid score because the sigmoid is
    monotone and a2, b1, b2 are shared constants.
    """
    if model.a2 == 0.0:
        raise UsageError("degenerate model: a2 = 0 gives a constant score")
    inputs = np.asarray(inputs, dtype=np.float64)
    linear = inputs @ model.a1
    return np.argsort(-np.sign(model.a2) * linear, kind="stable")


def save_model(model: ClassifierModel, path) -> None:
    """Flat text format: m, the m weights, b1, a2, b2, decision
    threshold, one value per line at full round-trip precision."""
    lines = [str(len(model.a1))]
    lines += [repr(float(v)) for v in model.a1]
    lines += [repr(float(model.b1)), repr(float(model.a2)),
              repr(float(model.b2)), repr(float(model.decision_threshold))]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> ClassifierModel:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        m = int(lines[0])
        vals = [float(v) for v in lines[1:]]
        if len(vals) != m + 4:
            raise ValueError(f"expected {m + 4} values after m, got {len(vals)}")
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: not a valid model file: {exc}") from None
    return ClassifierModel(
        a1=np.array(vals[:m]), b1=vals[m], a2=vals[m + 1], b2=vals[m + 2],
        decision_threshold=vals[m + 3],
    )
