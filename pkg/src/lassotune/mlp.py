"""Multilayer perceptrons with Swish activations trained by Adam on summary
records.

Two model kinds share the machinery: a two-output performance model
predicting (path error, solver runtime) from problem features plus the
solver configuration, and a one-output model predicting the exact solver's
runtime from problem features alone.  Inputs are log-transformed then
standardized; targets are log-transformed then standardized, and
predictions invert both steps, so outputs are strictly positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .cd import SolverConfig
from .errors import CorruptFile, NonFiniteLoss, VersionMismatch, WrongModelKind
from .synth import DataFeatures, N_GAMMA

FORMAT_VERSION = 1
PERFORMANCE = "performance"
LARS_TIME = "lars_time"
_SPE_EPS = 1e-12  # keeps log(spe) finite on numerically exact paths
_N_FEATURES = {PERFORMANCE: 2 + N_GAMMA + 2, LARS_TIME: 2 + N_GAMMA}
_N_TARGETS = {PERFORMANCE: 2, LARS_TIME: 1}

# paper-grade defaults for the two kinds; batch sizes are clamped to the
# training-set size on small summaries
PERFORMANCE_SPEC_DEFAULTS = dict(
    hidden=(64, 61, 57), learning_rate=7.6e-4, epochs=500, batch_size=20_263
)
LARS_SPEC_DEFAULTS = dict(
    hidden=(45, 44, 37), learning_rate=1.08e-3, epochs=500, batch_size=1_700
)


def swish(x):
    """x * sigmoid(x); stable for large negative inputs."""
    x = np.asarray(x, dtype=np.float64)
    return x * expit(x)


def swish_grad(x):
    s = expit(np.asarray(x, dtype=np.float64))
    return s * (1.0 + x * (1.0 - s))


@dataclass(frozen=True)
class TrainSpec:
    """Architecture and optimization settings for one training run."""

    hidden: tuple = (64, 61, 57)
    learning_rate: float = 7.6e-4
    epochs: int = 500
    batch_size: int = 20_263
    seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if not (self.learning_rate > 0.0):
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not (0.0 < self.validation_fraction < 1.0):
            raise ValueError("validation fraction must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ValueError("hidden layers must all have >= 1 unit")


@dataclass(eq=False)
class MlpModel:
    """Weights, biases, and the frozen input/target transforms.

    ``input_shift``/``input_scale`` apply after the log pre-transform of the
    raw features; ``target_shift``/``target_scale`` apply after the log
    transform of the raw targets.  The forward pass is deterministic and
    the instance is safe to share across threads once built.
    """

    kind: str
    layer_sizes: tuple
    weights: list
    biases: list
    input_shift: np.ndarray
    input_scale: np.ndarray
    target_shift: np.ndarray
    target_scale: np.ndarray
    train_losses: list = field(default_factory=list, repr=False)
    validation_loss: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in (PERFORMANCE, LARS_TIME):
            raise ValueError(f"unknown model kind {self.kind!r}")
        sizes = self.layer_sizes
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[l], sizes[l + 1]) or b.shape != (sizes[l + 1],):
                raise ValueError("layer shapes inconsistent with layer_sizes")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError("model parameters must be finite")
        if np.any(self.input_scale <= 0.0) or np.any(self.target_scale <= 0.0):
            raise ValueError("transform scales must be positive")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]


# --- transforms ---


def log_features(raw: np.ndarray, kind: str) -> np.ndarray:
    """Log pre-transform of raw feature rows [n, p, gammas(, tau, n_lambda)].

    tau uses log10 to keep its literal exponent readable in diagnostics;
    all other entries use the natural log, with a small shift protecting
    zero eigenvalues.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    out = np.empty_like(raw)
    out[:, 0] = np.log(raw[:, 0])
    out[:, 1] = np.log(raw[:, 1])
    out[:, 2 : 2 + N_GAMMA] = np.log(raw[:, 2 : 2 + N_GAMMA] + 1e-12)
    if kind == PERFORMANCE:
        out[:, 12] = np.log10(raw[:, 12])
        out[:, 13] = np.log(raw[:, 13])
    return out


def transform_targets(raw: np.ndarray, shift, scale) -> np.ndarray:
    """log then standardize; exact inverse of inverse_transform_targets."""
    return (np.log(np.asarray(raw, dtype=np.float64)) - shift) / scale


def inverse_transform_targets(z: np.ndarray, shift, scale) -> np.ndarray:
    """de-standardize then exponentiate; codomain is strictly positive."""
    return np.exp(np.asarray(z, dtype=np.float64) * scale + shift)


def _forward(weights, biases, x):
    """Returns (pre-activations per layer, activations incl. input)."""
    a = x
    zs, acts = [], [x]
    last = len(weights) - 1
    for l, (w, b) in enumerate(zip(weights, biases)):
        z = a @ w + b
        zs.append(z)
        a = swish(z) if l < last else z
        acts.append(a)
    return zs, acts


def _loss_and_grads(weights, biases, x, y):
    """MSE summed over targets, with gradients for every parameter."""
    zs, acts = _forward(weights, biases, x)
    resid = acts[-1] - y
    b = x.shape[0]
    loss = float((resid**2).mean(axis=0).sum())
    delta = 2.0 * resid / b
    gw = [None] * len(weights)
    gb = [None] * len(weights)
    for l in range(len(weights) - 1, -1, -1):
        gw[l] = acts[l].T @ delta
        gb[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ weights[l].T) * swish_grad(zs[l - 1])
    return loss, gw, gb


def model_loss(model: MlpModel, x, y) -> float:
    """MSE (summed over targets) in the model's transformed spaces."""
    loss, _, _ = _loss_and_grads(model.weights, model.biases, np.atleast_2d(x), np.atleast_2d(y))
    return loss


def records_to_arrays(records, kind: str):
    """Raw feature/target matrices from usable (non-flagged) records."""
    feats, targets = [], []
    for r in records:
        if r.is_flagged():
            continue
        base = [float(r.n), float(r.p), *r.gamma.tolist()]
        if kind == PERFORMANCE:
            feats.append(base + [r.tau, float(r.n_lambda)])
            targets.append([r.spe + _SPE_EPS, r.t_glmnet_seconds])
        else:
            if r.t_lars_seconds is None or not math.isfinite(r.t_lars_seconds):
                continue
            feats.append(base)
            targets.append([r.t_lars_seconds])
    return np.array(feats, dtype=np.float64), np.array(targets, dtype=np.float64)


def train(records, spec: TrainSpec, targets: str = PERFORMANCE) -> MlpModel:
    """Fit an MLP on summary records by Adam (beta1=0.9, beta2=0.999,
    eps=1e-8) minimizing the summed per-target MSE on transformed targets.

    Transforms are frozen from the training split only; the run is
    deterministic in the spec seed.  Divergence raises NonFiniteLoss with
    the epoch index.
    """
    if targets not in (PERFORMANCE, LARS_TIME):
        raise ValueError(f"unknown target set {targets!r}")
    x_raw, y_raw = records_to_arrays(list(records), targets)
    if x_raw.shape[0] < 100:
        raise ValueError(
            f"need at least 100 usable records, got {x_raw.shape[0]}"
        )
    rng = np.random.default_rng(spec.seed)
    n = x_raw.shape[0]
    perm = rng.permutation(n)
    n_val = max(1, int(round(spec.validation_fraction * n)))
    val_idx, train_idx = perm[:n_val], perm[n_val:]

    x_log = log_features(x_raw, targets)
    in_shift = x_log[train_idx].mean(axis=0)
    in_scale = x_log[train_idx].std(axis=0)
    in_scale[in_scale == 0.0] = 1.0
    y_log = np.log(y_raw)
    t_shift = y_log[train_idx].mean(axis=0)
    t_scale = y_log[train_idx].std(axis=0)
    t_scale[t_scale == 0.0] = 1.0

    xs = (x_log - in_shift) / in_scale
    ys = (y_log - t_shift) / t_scale
    x_train, y_train = xs[train_idx], ys[train_idx]
    x_val, y_val = xs[val_idx], ys[val_idx]

    sizes = (_N_FEATURES[targets], *spec.hidden, _N_TARGETS[targets])
    weights, biases = _init_params(sizes, rng)

    batch = min(spec.batch_size, x_train.shape[0])
    lr, b1, b2, eps = spec.learning_rate, 0.9, 0.999, 1e-8
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    step = 0
    train_losses = []
    for epoch in range(spec.epochs):
        order = rng.permutation(x_train.shape[0])
        for start in range(0, x_train.shape[0], batch):
            idx = order[start : start + batch]
            loss, gw, gb = _loss_and_grads(weights, biases, x_train[idx], y_train[idx])
            if not math.isfinite(loss):
                raise NonFiniteLoss(
                    f"non-finite training loss at epoch {epoch}", epoch=epoch
                )
            step += 1
            corr1 = 1.0 - b1**step
            corr2 = 1.0 - b2**step
            for l in range(len(weights)):
                m_w[l] = b1 * m_w[l] + (1 - b1) * gw[l]
                v_w[l] = b2 * v_w[l] + (1 - b2) * gw[l] ** 2
                weights[l] -= lr * (m_w[l] / corr1) / (np.sqrt(v_w[l] / corr2) + eps)
                m_b[l] = b1 * m_b[l] + (1 - b1) * gb[l]
                v_b[l] = b2 * v_b[l] + (1 - b2) * gb[l] ** 2
                biases[l] -= lr * (m_b[l] / corr1) / (np.sqrt(v_b[l] / corr2) + eps)
        epoch_loss, _, _ = _loss_and_grads(weights, biases, x_train, y_train)
        if not math.isfinite(epoch_loss):
            raise NonFiniteLoss(
                f"non-finite training loss at epoch {epoch}", epoch=epoch
            )
        train_losses.append(epoch_loss)

    val_loss, _, _ = _loss_and_grads(weights, biases, x_val, y_val)
    return MlpModel(
        kind=targets,
        layer_sizes=sizes,
        weights=weights,
        biases=biases,
        input_shift=in_shift,
        input_scale=in_scale,
        target_shift=t_shift,
        target_scale=t_scale,
        train_losses=train_losses,
        validation_loss=float(val_loss),
    )


def _init_params(sizes, rng):
    weights, biases = [], []
    for d_in, d_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((d_in, d_out)) * np.sqrt(2.0 / d_in))
        biases.append(np.zeros(d_out))
    return weights, biases


def predict_raw(model: MlpModel, raw_features: np.ndarray) -> np.ndarray:
    """Forward pass from raw feature rows to original-scale outputs."""
    x_log = log_features(raw_features, model.kind)
    xs = (x_log - model.input_shift) / model.input_scale
    _, acts = _forward(model.weights, model.biases, xs)
    return inverse_transform_targets(acts[-1], model.target_shift, model.target_scale)


def predict_performance(model: MlpModel, features: DataFeatures, config: SolverConfig):
    """Predicted (path error, runtime seconds) for one configuration."""
    if model.kind != PERFORMANCE:
        raise WrongModelKind(f"expected a {PERFORMANCE} model, got {model.kind}")
    row = np.concatenate([features.vector(), [config.tau, float(config.n_lambda)]])
    out = predict_raw(model, row[None, :])[0]
    return float(out[0]), float(out[1])


def predict_performance_batch(model: MlpModel, features: DataFeatures, configs):
    """Vectorized predictions over many configurations; returns
    (spe_hat, t_hat) arrays in config order."""
    if model.kind != PERFORMANCE:
        raise WrongModelKind(f"expected a {PERFORMANCE} model, got {model.kind}")
    base = features.vector()
    rows = np.empty((len(configs), base.size + 2))
    rows[:, : base.size] = base
    rows[:, base.size] = [c.tau for c in configs]
    rows[:, base.size + 1] = [float(c.n_lambda) for c in configs]
    out = predict_raw(model, rows)
    return out[:, 0], out[:, 1]


def predict_lars_time(model: MlpModel, features: DataFeatures) -> float:
    """Predicted exact-solver runtime in seconds."""
    if model.kind != LARS_TIME:
        raise WrongModelKind(f"expected a {LARS_TIME} model, got {model.kind}")
    out = predict_raw(model, features.vector()[None, :])[0]
    return float(out[0])


def gradient_check(model: MlpModel, sample) -> float:
    """Max symmetric-relative disagreement between analytic parameter
    gradients and central finite differences (h = 1e-5) of the MSE loss at
    ``sample = (x, y)`` in the model's transformed spaces."""
    x, y = sample
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    _, gw, gb = _loss_and_grads(weights, biases, x, y)
    h = 1e-5
    worst = 0.0

    def probe(arr, grad):
        nonlocal worst
        flat = arr.ravel()
        gflat = grad.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up, _, _ = _loss_and_grads(weights, biases, x, y)
            flat[i] = orig - h
            down, _, _ = _loss_and_grads(weights, biases, x, y)
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            err = abs(gflat[i] - numeric) / max(1e-12, abs(gflat[i]) + abs(numeric))
            worst = max(worst, err)

    for w, g in zip(weights, gw):
        probe(w, g)
    for b, g in zip(biases, gb):
        probe(b, g)
    return worst


def save_model(model: MlpModel, path) -> None:
    """Serialize to self-describing JSON; float repr round-trips exactly."""
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "layer_sizes": list(model.layer_sizes),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "input_shift": model.input_shift.tolist(),
        "input_scale": model.input_scale.tolist(),
        "target_shift": model.target_shift.tolist(),
        "target_scale": model.target_scale.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path) -> MlpModel:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorruptFile(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptFile("model file must hold a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"unsupported model format version {version!r} "
            f"(supported: {FORMAT_VERSION})"
        )
    try:
        sizes = tuple(int(s) for s in payload["layer_sizes"])
        model = MlpModel(
            kind=payload["kind"],
            layer_sizes=sizes,
            weights=[np.array(w, dtype=np.float64) for w in payload["weights"]],
            biases=[np.array(b, dtype=np.float64) for b in payload["biases"]],
            input_shift=np.array(payload["input_shift"], dtype=np.float64),
            input_scale=np.array(payload["input_scale"], dtype=np.float64),
            target_shift=np.array(payload["target_shift"], dtype=np.float64),
            target_scale=np.array(payload["target_scale"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"model file is structurally invalid: {exc}") from exc
    if model.n_inputs != _N_FEATURES[model.kind] or model.n_outputs != _N_TARGETS[model.kind]:
        raise CorruptFile(
            f"layer sizes {sizes} do not match kind {model.kind!r}"
        )
    return model


def random_search(
    records,
    targets: str,
    n_trials: int,
    seed: int,
    epochs: int = 120,
    batch_size: int = 4096,
):
    """Plain random search over 1-3 hidden layers of 1-64 units and a
    log-uniform learning rate in [1e-5, 1e-1]; returns (best_model,
    best_spec, trials) ranked by validation loss."""
    rng = np.random.default_rng(seed)
    best = None
    trials = []
    for t in range(n_trials):
        depth = int(rng.integers(1, 4))
        hidden = tuple(int(rng.integers(1, 65)) for _ in range(depth))
        lr = float(10.0 ** rng.uniform(-5, -1))
        spec = TrainSpec(
            hidden=hidden,
            learning_rate=lr,
            epochs=epochs,
            batch_size=batch_size,
            seed=int(rng.integers(0, 2**31)),
        )
        try:
            model = train(records, spec, targets)
        except NonFiniteLoss:
            trials.append((spec, math.inf))
            continue
        trials.append((spec, model.validation_loss))
        if best is None or model.validation_loss < best[0].validation_loss:
            best = (model, spec)
    if best is None:
        raise NonFiniteLoss("every random-search trial diverged")
    return best[0], best[1], trials
