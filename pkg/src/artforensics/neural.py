"""Multilayer perceptron and a small convolutional network, in numpy.

Both train with Adam. The CNN works on NHWC float batches and follows a
Keras-style layer stack: rescaling, conv/pool stages, dropout, flatten and
two dense layers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit, log_expit, logsumexp, softmax

from artforensics.errors import DegenerateLabels, InvalidInput, ShapeError

ACTIVATIONS = ("identity", "logistic", "relu")


def _activate(z, name):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "logistic":
        return expit(z)
    return z


def _activation_grad(z, a, name):
    """Derivative of the activation, given pre-activation ``z`` and output ``a``."""
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "logistic":
        return a * (1.0 - a)
    return np.ones_like(z)


class Adam:
    """Adam optimizer updating a list of arrays in place."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * math.sqrt(1 - b2**self.t) / (1 - b1**self.t)
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= lr_t * m / (np.sqrt(v) + self.eps)


def _glorot(rng, fan_in, fan_out, shape, factor=6.0):
    bound = math.sqrt(factor / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def _check_classification_labels(y, n_classes):
    y = np.asarray(y).astype(np.int64).ravel()
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training labels contain a single class")
    if y.min() < 0 or y.max() >= n_classes:
        raise InvalidInput(f"labels must lie in 0..{n_classes - 1}")
    return y


# -- MLP ----------------------------------------------------------------------

@dataclass(frozen=True)
class MLPConfig:
    hidden_layer_sizes: tuple[int, ...] = (100,)
    activation: str = "relu"
    alpha: float = 1e-4
    learning_rate_init: float = 1e-3
    max_iter: int = 200
    random_state: int = 0
    batch_size: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "hidden_layer_sizes", tuple(int(h) for h in self.hidden_layer_sizes))
        if not self.hidden_layer_sizes or min(self.hidden_layer_sizes) < 1:
            raise InvalidInput("MLP needs at least one hidden layer of positive width")
        if self.activation not in ACTIVATIONS:
            raise InvalidInput(f"activation must be one of {ACTIVATIONS}")
        if self.alpha < 0 or not self.learning_rate_init > 0 or self.max_iter < 1:
            raise InvalidInput("invalid MLP alpha, learning_rate_init or max_iter")


@dataclass(eq=False)
class MLPModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str
    task: str
    n_classes: int
    loss_curve: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def forward(self, X):
        """Pre-activations and activations of every layer; last entry is the output."""
        zs, acts = [], [X]
        a = X
        last = len(self.weights) - 1
        for li, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            zs.append(z)
            if li < last:
                a = _activate(z, self.activation)
            elif self.task == "binary":
                a = expit(z)
            else:
                a = softmax(z, axis=1)
            acts.append(a)
        return zs, acts


def init_mlp(n_features, n_classes, cfg: MLPConfig, task) -> MLPModel:
    rng = np.random.default_rng(cfg.random_state)
    sizes = [n_features, *cfg.hidden_layer_sizes, 1 if task == "binary" else n_classes]
    factor = 2.0 if cfg.activation == "logistic" else 6.0
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(_glorot(rng, fan_in, fan_out, (fan_in, fan_out), factor))
        biases.append(_glorot(rng, fan_in, fan_out, (fan_out,), factor))
    return MLPModel(weights, biases, cfg.activation, task, n_classes)


def mlp_objective(model: MLPModel, X, y, alpha):
    """Summed cross-entropy over the batch plus ``alpha/2 * sum ||W||^2``.

    Returns the value and the gradients for ``weights + biases`` (in that
    order). Dividing by the batch size gives the per-sample loss that the
    optimizer steps on.
    """
    zs, acts = model.forward(X)
    n = len(X)
    z_out = zs[-1]
    if model.task == "binary":
        z = z_out[:, 0]
        data = -np.sum(log_expit(z) * y + log_expit(-z) * (1 - y))
        delta = (acts[-1][:, 0] - y)[:, None]
    else:
        data = np.sum(logsumexp(z_out, axis=1) - z_out[np.arange(n), y])
        delta = acts[-1].copy()
        delta[np.arange(n), y] -= 1.0
    penalty = 0.5 * alpha * sum(np.sum(W * W) for W in model.weights)

    gW = [None] * len(model.weights)
    gb = [None] * len(model.biases)
    for li in range(len(model.weights) - 1, -1, -1):
        gW[li] = acts[li].T @ delta + alpha * model.weights[li]
        gb[li] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ model.weights[li].T) * _activation_grad(zs[li - 1], acts[li],
                                                                      model.activation)
    return float(data + penalty), gW + gb


def train_mlp(X, y, cfg: MLPConfig = MLPConfig(), task: str = "binary", n_classes=None) -> MLPModel:
    """Mini-batch Adam on cross-entropy with an L2 weight penalty.

    Runs exactly ``cfg.max_iter`` epochs; the batch order is reshuffled each
    epoch from ``cfg.random_state``.
    """
    X = np.asarray(X, dtype=np.float64)
    k = 2 if task == "binary" else (n_classes or int(np.max(y)) + 1)
    y = _check_classification_labels(y, k)
    model = init_mlp(X.shape[1], k, cfg, task)
    n = len(X)
    batch = min(cfg.batch_size or 200, n)
    rng = np.random.default_rng(cfg.random_state)
    params = model.weights + model.biases
    opt = Adam(params, lr=cfg.learning_rate_init)
    for _ in range(cfg.max_iter):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            value, grads = mlp_objective(model, X[idx], y[idx], cfg.alpha)
            m = len(idx)
            opt.step([g / m for g in grads])
            total += value
        model.loss_curve.append(total / n)
    return model


def predict_mlp(model: MLPModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Labels and scores; binary scores are ``(n, 2)`` probabilities."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(f"expected inputs of width {model.n_features}, got shape {X.shape}")
    out = model.forward(X)[1][-1]
    if model.task == "binary":
        out = np.column_stack([1.0 - out[:, 0], out[:, 0]])
    return np.argmax(out, axis=1), out


# -- CNN layers ----------------------------------------------------------------

class Layer:
    kind = "layer"
    params: tuple[str, ...] = ()
    l2 = 0.0

    def output_shape(self, shape):
        return shape

    def forward(self, x, training=False, rng=None):
        return x

    def backward(self, grad):
        return grad

    def config(self) -> dict:
        return {}


class Rescaling(Layer):
    kind = "rescaling"

    def __init__(self, scale=1.0 / 255.0):
        self.scale = scale

    def forward(self, x, training=False, rng=None):
        return x * self.scale

    def backward(self, grad):
        return grad * self.scale

    def config(self):
        return {"scale": self.scale}


class Conv2D(Layer):
    """Valid, stride-1 convolution over NHWC input with a fused activation."""

    kind = "conv2d"
    params = ("W", "b")

    def __init__(self, in_channels, filters, kernel=3, activation="relu", l2=0.0, rng=None):
        self.in_channels, self.filters, self.kernel = in_channels, filters, kernel
        self.activation, self.l2 = activation, l2
        k = kernel
        rng = rng or np.random.default_rng(0)
        self.W = _glorot(rng, k * k * in_channels, k * k * filters, (k, k, in_channels, filters))
        self.b = np.zeros(filters)

    def output_shape(self, shape):
        h, w, _ = shape
        k = self.kernel
        if h < k or w < k:
            raise ShapeError(f"{k}x{k} convolution cannot run on {h}x{w} input")
        return (h - k + 1, w - k + 1, self.filters)

    def forward(self, x, training=False, rng=None):
        k = self.kernel
        n, h, w, c = x.shape
        self.output_shape((h, w, c))
        win = sliding_window_view(x, (k, k), axis=(1, 2))  # n, h', w', c, k, k
        cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(-1, k * k * c)
        z = cols @ self.W.reshape(-1, self.filters) + self.b
        z = z.reshape(n, h - k + 1, w - k + 1, self.filters)
        a = _activate(z, self.activation)
        self._cache = (x.shape, cols, z, a)
        return a

    def backward(self, grad):
        shape, cols, z, a = self._cache
        n, h, w, c = shape
        k = self.kernel
        dz = grad * _activation_grad(z, a, self.activation)
        dz_flat = dz.reshape(-1, self.filters)
        self.dW = (cols.T @ dz_flat).reshape(self.W.shape) + 2.0 * self.l2 * self.W
        self.db = dz_flat.sum(axis=0)
        dcols = (dz_flat @ self.W.reshape(-1, self.filters).T)
        dcols = dcols.reshape(n, h - k + 1, w - k + 1, k, k, c)
        dx = np.zeros(shape)
        for i in range(k):
            for j in range(k):
                dx[:, i : i + h - k + 1, j : j + w - k + 1, :] += dcols[:, :, :, i, j, :]
        return dx

    def config(self):
        return {"in_channels": self.in_channels, "filters": self.filters, "kernel": self.kernel,
                "activation": self.activation, "l2": self.l2}


class MaxPool2D(Layer):
    """2x2 max pooling, stride 2; odd trailing rows/columns are dropped."""

    kind = "maxpool2d"

    def output_shape(self, shape):
        h, w, c = shape
        if h < 2 or w < 2:
            raise ShapeError(f"2x2 pooling cannot run on {h}x{w} input")
        return (h // 2, w // 2, c)

    def forward(self, x, training=False, rng=None):
        n, h, w, c = x.shape
        h2, w2, _ = self.output_shape((h, w, c))
        blocks = x[:, : 2 * h2, : 2 * w2, :].reshape(n, h2, 2, w2, 2, c)
        blocks = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(n, h2, w2, c, 4)
        arg = np.argmax(blocks, axis=-1)
        self._cache = (x.shape, arg)
        return np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        shape, arg = self._cache
        n, h, w, c = shape
        h2, w2 = grad.shape[1], grad.shape[2]
        routed = np.zeros((n, h2, w2, c, 4))
        np.put_along_axis(routed, arg[..., None], grad[..., None], axis=-1)
        routed = routed.reshape(n, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
        dx = np.zeros(shape)
        dx[:, : 2 * h2, : 2 * w2, :] = routed.reshape(n, 2 * h2, 2 * w2, c)
        return dx


class Dropout(Layer):
    """Inverted dropout; identity outside training or at rate 0."""

    kind = "dropout"

    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise InvalidInput(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, grad):
        return grad if self._mask is None else grad * self._mask

    def config(self):
        return {"rate": self.rate}


class Flatten(Layer):
    kind = "flatten"

    def output_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, x, training=False, rng=None):
        self._shape = x.shape
        return x.reshape(len(x), -1)

    def backward(self, grad):
        return grad.reshape(self._shape)


class Dense(Layer):
    """Fully connected layer. ``activation`` may also be 'sigmoid'/'softmax'
    on the output layer, where the loss handles the backward pass."""

    kind = "dense"
    params = ("W", "b")

    def __init__(self, in_features, units, activation="relu", l2=0.0, rng=None):
        self.in_features, self.units, self.activation, self.l2 = in_features, units, activation, l2
        rng = rng or np.random.default_rng(0)
        self.W = _glorot(rng, in_features, units, (in_features, units))
        self.b = np.zeros(units)

    def output_shape(self, shape):
        if shape != (self.in_features,):
            raise ShapeError(f"dense layer expects {self.in_features} inputs, got {shape}")
        return (self.units,)

    def forward(self, x, training=False, rng=None):
        z = x @ self.W + self.b
        if self.activation == "sigmoid":
            a = expit(z)
        elif self.activation == "softmax":
            a = softmax(z, axis=1)
        else:
            a = _activate(z, self.activation)
        self._cache = (x, z, a)
        return a

    def backward(self, grad, pre_activation=False):
        x, z, a = self._cache
        dz = grad if pre_activation else grad * _activation_grad(z, a, self.activation)
        self.dW = x.T @ dz + 2.0 * self.l2 * self.W
        self.db = dz.sum(axis=0)
        return dz @ self.W.T

    def config(self):
        return {"in_features": self.in_features, "units": self.units,
                "activation": self.activation, "l2": self.l2}


LAYER_TYPES = {cls.kind: cls for cls in (Rescaling, Conv2D, MaxPool2D, Dropout, Flatten, Dense)}


# -- CNN model -----------------------------------------------------------------

ARCHITECTURES = {
    # name: (conv filters per stage, L2 on convs and first dense, output units for the task)
    "binary11": ((16, 32, 64), False),
    "multiclass9": ((16, 32), True),
}


@dataclass(frozen=True)
class CNNConfig:
    input_side: int = 64
    architecture: str = "binary11"
    dropout_rate: float = 0.1
    l2_weight: float = 1e-3
    final_activation: str = "sigmoid"
    learning_rate: float = 1e-3
    epochs: int = 4
    seed: int = 0
    n_classes: int = 2
    dense_units: int = 128
    batch_size: int = 32
    filters: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise InvalidInput(f"architecture must be one of {sorted(ARCHITECTURES)}")
        if self.final_activation not in ("sigmoid", "softmax"):
            raise InvalidInput("final_activation must be 'sigmoid' or 'softmax'")
        if not 0.0 <= self.dropout_rate < 1.0 or self.l2_weight < 0:
            raise InvalidInput("invalid dropout_rate or l2_weight")
        if self.input_side < 1 or self.epochs < 0 or self.n_classes < 2:
            raise InvalidInput("invalid input_side, epochs or n_classes")
        if self.filters is not None:
            object.__setattr__(self, "filters", tuple(int(f) for f in self.filters))

    @property
    def output_units(self) -> int:
        """One sigmoid unit for a two-class sigmoid head, one unit per class otherwise."""
        if self.n_classes == 2 and self.final_activation == "sigmoid":
            return 1
        return self.n_classes

    def to_dict(self):
        d = asdict(self)
        d["filters"] = list(self.filters) if self.filters is not None else None
        return d


@dataclass(eq=False)
class CNNModel:
    config: CNNConfig
    layers: list[Layer]

    def __len__(self):
        return len(self.layers)

    def forward(self, x, training=False, rng=None):
        a = np.asarray(x, dtype=np.float64)
        side = self.config.input_side
        if a.ndim != 4 or a.shape[1:3] != (side, side):
            raise ShapeError(f"expected NHWC batch of {side}x{side} images, got {a.shape}")
        for layer in self.layers:
            a = layer.forward(a, training, rng)
        return a

    def parameters(self):
        return [(layer, name) for layer in self.layers for name in layer.params]

    def regularization(self) -> float:
        return float(sum(layer.l2 * np.sum(layer.W * layer.W)
                         for layer in self.layers if layer.l2 > 0))

    def loss(self, out, y) -> tuple[float, np.ndarray]:
        """Mean cross-entropy plus L2 terms, and dLoss/d(output pre-activation)."""
        data, dz = self.cross_entropy(out, y)
        return data + self.regularization(), dz

    def cross_entropy(self, out, y) -> tuple[float, np.ndarray]:
        """Mean cross-entropy of the last forward pass and its gradient with
        respect to the output pre-activation."""
        head = self.layers[-1]
        _, z, s = head._cache
        n = len(y)
        rows = np.arange(n)
        if head.units == 1:
            zz = z[:, 0]
            data = -np.mean(log_expit(zz) * y + log_expit(-zz) * (1 - y))
            dz = ((s[:, 0] - y) / n)[:, None]
        elif head.activation == "softmax":
            data = np.mean(logsumexp(z, axis=1) - z[rows, y])
            dz = s.copy()
            dz[rows, y] -= 1.0
            dz /= n
        else:
            # Categorical cross-entropy over sigmoid outputs renormalised to sum 1.
            total = s.sum(axis=1)
            data = np.mean(np.log(total) - log_expit(z[rows, y]))
            dz = s * (1.0 - s) / total[:, None]
            dz[rows, y] -= 1.0 - s[rows, y]
            dz /= n
        return float(data), dz

    def loss_and_grads(self, x, y, training=True, rng=None):
        y = np.asarray(y, dtype=np.int64)
        out = self.forward(x, training, rng)
        value, dz = self.loss(out, y)
        grad = self.layers[-1].backward(dz, pre_activation=True)
        for layer in reversed(self.layers[:-1]):
            grad = layer.backward(grad)
        grads = [getattr(layer, "d" + name) for layer, name in self.parameters()]
        return value, grads

    def scores(self, x, batch_size=64) -> np.ndarray:
        outs = [self.forward(x[i : i + batch_size]) for i in range(0, len(x), batch_size)]
        return np.concatenate(outs) if outs else np.zeros((0, self.layers[-1].units))


def build_cnn(cfg: CNNConfig, channels: int = 3) -> CNNModel:
    """Assemble the ``binary11`` (11 layers) or ``multiclass9`` (9 layers) stack."""
    filters, use_l2 = ARCHITECTURES[cfg.architecture]
    if cfg.filters is not None:
        if len(cfg.filters) != len(filters):
            raise InvalidInput(f"{cfg.architecture} needs {len(filters)} filter counts")
        filters = cfg.filters
    l2 = cfg.l2_weight if use_l2 else 0.0
    rng = np.random.default_rng(cfg.seed)
    layers: list[Layer] = [Rescaling(1.0 / 255.0)]
    shape = (cfg.input_side, cfg.input_side, channels)
    in_ch = channels
    for f in filters:
        conv = Conv2D(in_ch, f, 3, "relu", l2, rng)
        shape = conv.output_shape(shape)
        pool = MaxPool2D()
        shape = pool.output_shape(shape)
        layers += [conv, pool]
        in_ch = f
    flatten = Flatten()
    layers += [Dropout(cfg.dropout_rate), flatten]
    (flat,) = flatten.output_shape(shape)
    layers.append(Dense(flat, cfg.dense_units, "relu", l2, rng))
    layers.append(Dense(cfg.dense_units, cfg.output_units, cfg.final_activation, 0.0, rng))
    return CNNModel(cfg, layers)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


def _labels_from_scores(scores) -> np.ndarray:
    if scores.shape[1] == 1:
        return (scores[:, 0] > 0.5).astype(np.int64)
    return np.argmax(scores, axis=1)


def evaluate_cnn(model: CNNModel, images, labels, batch_size=64,
                 include_penalty=True) -> tuple[float, float]:
    """Mean loss and accuracy without dropout."""
    labels = np.asarray(labels, dtype=np.int64)
    total, correct = 0.0, 0
    for i in range(0, len(images), batch_size):
        xb, yb = images[i : i + batch_size], labels[i : i + batch_size]
        out = model.forward(xb)
        value, _ = model.cross_entropy(out, yb)
        total += value * len(yb)
        correct += int(np.sum(_labels_from_scores(out) == yb))
    n = max(len(labels), 1)
    mean = total / n
    if include_penalty:
        mean += model.regularization()
    return mean, correct / n


def train_cnn(images, labels, cfg: CNNConfig, train_idx, val_idx=None,
              model: CNNModel | None = None) -> tuple[CNNModel, list[EpochRecord]]:
    """Train for exactly ``cfg.epochs`` epochs with Adam.

    Shuffling and dropout masks draw from a generator seeded with
    ``cfg.seed``. Epoch 0 in the returned log is the untrained network.
    """
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64)
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if len(np.unique(labels[train_idx])) < 2:
        raise DegenerateLabels("CNN training labels contain a single class")
    if model is None:
        model = build_cnn(cfg, channels=images.shape[-1])
    rng = np.random.default_rng(cfg.seed + 1)
    opt = Adam([getattr(layer, name) for layer, name in model.parameters()], lr=cfg.learning_rate)
    val = val_idx if val_idx is not None and len(val_idx) else None

    def record(epoch, train_loss=None, train_acc=None):
        if train_loss is None:
            train_loss, train_acc = evaluate_cnn(model, images[train_idx], labels[train_idx])
        if val is not None:
            vl, va = evaluate_cnn(model, images[val], labels[val])
        else:
            vl, va = float("nan"), float("nan")
        return EpochRecord(epoch, float(train_loss), float(train_acc), float(vl), float(va))

    history = [record(0)]
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(train_idx)
        total, correct = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            value, grads = model.loss_and_grads(images[idx], labels[idx], True, rng)
            correct += int(np.sum(_labels_from_scores(model.layers[-1]._cache[2]) == labels[idx]))
            opt.step(grads)
            total += value * len(idx)
        history.append(record(epoch, total / len(order), correct / len(order)))
    return model, history


def predict_cnn(model: CNNModel, images) -> tuple[np.ndarray, np.ndarray]:
    """Labels and per-class scores (``(n, 2)`` for a single sigmoid unit)."""
    scores = model.scores(np.asarray(images, dtype=np.float64))
    labels = _labels_from_scores(scores)
    if scores.shape[1] == 1:
        scores = np.column_stack([1.0 - scores[:, 0], scores[:, 0]])
    return labels, scores


# -- (de)serialisation helpers -------------------------------------------------

def cnn_to_dict(model: CNNModel) -> dict:
    return {
        "config": model.config.to_dict(),
        "layers": [
            {"kind": layer.kind, "config": layer.config(),
             "params": {name: getattr(layer, name).tolist() for name in layer.params}}
            for layer in model.layers
        ],
    }


def cnn_from_dict(d: dict) -> CNNModel:
    cfg = dict(d["config"])
    cfg = CNNConfig(**cfg)
    layers = []
    for spec in d["layers"]:
        cls = LAYER_TYPES[spec["kind"]]
        layer = cls(**spec["config"])
        for name, value in spec["params"].items():
            setattr(layer, name, np.array(value, dtype=np.float64))
        layers.append(layer)
    return CNNModel(cfg, layers)


def mlp_to_dict(model: MLPModel) -> dict:
    return {
        "weights": [W.tolist() for W in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "activation": model.activation,
        "task": model.task,
        "n_classes": model.n_classes,
    }


def mlp_from_dict(d: dict) -> MLPModel:
    return MLPModel(
        weights=[np.array(W, dtype=np.float64).reshape(len(W), -1) for W in d["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in d["biases"]],
        activation=d["activation"], task=d["task"], n_classes=int(d["n_classes"]),
    )
