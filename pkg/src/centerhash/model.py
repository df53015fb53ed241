"""The hash head: a 3-layer MLP trained to pull codes onto their centers.

forward maps a length-d feature vector through two ReLU layers and a
sigmoid output to a relaxed code in (0,1)^K. Training minimizes

    L = [use_lc] * L_central + lambda1 * [use_lq] * L_quant

where L_central is the per-bit binary cross-entropy between the relaxed
code and its assigned binary center, and L_quant is a log-cosh penalty
that pushes every output toward {0, 1}. All math is float64 and every
random draw is seeded, so training is bit-reproducible.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import binfmt, hamming
from .errors import DimensionError, FormatError, NumericError, TrainingError
from .seeds import substream

MAGIC_MODEL = b"CSQM"

BCE_EPS = 1e-7  # clamp for log arguments


@dataclass
class TrainConfig:
    lambda1: float = 1e-4
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 16
    epochs: int = 100
    seed: int = 0
    use_lc: bool = True
    use_lq: bool = True
    hidden: tuple[int, int] | None = None  # None: derived from (d, k)

    def __post_init__(self):
        if not (self.use_lc or self.use_lq):
            raise ValueError("at least one loss term must be enabled")
        if self.lambda1 < 0:
            raise ValueError("lambda1 must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


@dataclass
class HashModel:
    """Weights (fan_out, fan_in) and biases of the three fc layers."""

    weights: list
    biases: list

    @property
    def layer_sizes(self) -> list:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def k(self) -> int:
        return self.weights[-1].shape[0]


@dataclass
class Gradients:
    weights: list
    biases: list


@dataclass
class EpochLog:
    epoch: int
    total: float
    central: float
    quant: float


def default_hidden(d: int, k: int) -> tuple[int, int]:
    """Hidden widths (1024, 512), shrunk proportionally for small inputs."""
    if d >= 1024:
        return (max(1024, k), max(512, k))
    return (max(d, k), max(d // 2, k))


def init_model(d: int, k: int, hidden: tuple[int, int] | None = None, seed: int = 0) -> HashModel:
    """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer."""
    if d < 1 or k < 1:
        raise ValueError("d and k must be positive")
    w1, w2 = hidden if hidden is not None else default_hidden(d, k)
    rng = substream(seed, "init")
    weights, biases = [], []
    for fan_in, fan_out in ((d, w1), (w1, w2), (w2, k)):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return HashModel(weights=weights, biases=biases)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logcosh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def _forward_cached(model: HashModel, x: np.ndarray):
    w1, w2, w3 = model.weights
    b1, b2, b3 = model.biases
    z1 = x @ w1.T + b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ w2.T + b2
    a2 = np.maximum(z2, 0.0)
    h = _sigmoid(a2 @ w3.T + b3)
    return z1, a1, z2, a2, h


def forward(model: HashModel, x) -> np.ndarray:
    """Relaxed codes in (0,1)^K for one feature vector or a batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x2 = x[None, :] if single else x
    if x2.ndim != 2 or x2.shape[1] != model.layer_sizes[0]:
        raise DimensionError(
            f"features have shape {x.shape}, model expects dim {model.layer_sizes[0]}"
        )
    h = _forward_cached(model, x2)[-1]
    return h[0] if single else h


def _as_batches(h, c=None):
    h = np.asarray(h, dtype=np.float64)
    if h.ndim == 1:
        h = h[None, :]
    if c is None:
        return h, None
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 1:
        c = c[None, :]
    if c.shape != h.shape:
        raise DimensionError(f"codes {h.shape} and centers {c.shape} differ")
    return h, c


def central_loss(h, c) -> float:
    """Mean per-bit binary cross-entropy between relaxed codes and centers."""
    h, c = _as_batches(h, c)
    hc = np.clip(h, BCE_EPS, 1.0 - BCE_EPS)
    per_sample = -(c * np.log(hc) + (1.0 - c) * np.log1p(-hc)).sum(axis=1) / h.shape[1]
    return float(per_sample.mean())


def quantization_loss(h) -> float:
    """Mean over samples of sum_k logcosh(|2 h_k - 1| - 1); zero iff binary."""
    h, _ = _as_batches(h)
    if np.isnan(h).any():
        raise NumericError("relaxed code contains NaN")
    per_sample = _logcosh(np.abs(2.0 * h - 1.0) - 1.0).sum(axis=1)
    return float(per_sample.mean())


def total_loss(h, c, cfg: TrainConfig) -> float:
    loss = 0.0
    if cfg.use_lc:
        loss += central_loss(h, c)
    if cfg.use_lq and cfg.lambda1 != 0.0:
        loss += cfg.lambda1 * quantization_loss(h)
    return loss


def backward(model: HashModel, x, c, cfg: TrainConfig) -> Gradients:
    """Exact gradients of the batch objective w.r.t. every parameter.

    The |.| subderivative at 0 is taken as 0, and coordinates clamped by
    the cross-entropy epsilon propagate a zero gradient, matching what a
    finite difference of the actual loss sees.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 1:
        c = c[None, :]
    if c.shape != (x.shape[0], model.k):
        raise DimensionError(f"centers {c.shape} do not match batch ({x.shape[0]}, {model.k})")
    w1, w2, w3 = model.weights
    z1, a1, z2, a2, h = _forward_cached(model, x)
    n, k = h.shape

    dh = np.zeros_like(h)
    if cfg.use_lc:
        hc = np.clip(h, BCE_EPS, 1.0 - BCE_EPS)
        inside = (h > BCE_EPS) & (h < 1.0 - BCE_EPS)
        dh += np.where(inside, -(c / hc - (1.0 - c) / (1.0 - hc)) / (n * k), 0.0)
    if cfg.use_lq and cfg.lambda1 != 0.0:
        u = np.abs(2.0 * h - 1.0) - 1.0
        dh += (cfg.lambda1 * 2.0 / n) * np.sign(2.0 * h - 1.0) * np.tanh(u)

    dz3 = dh * h * (1.0 - h)
    dw3 = dz3.T @ a2
    db3 = dz3.sum(axis=0)
    dz2 = (dz3 @ w3) * (z2 > 0)
    dw2 = dz2.T @ a1
    db2 = dz2.sum(axis=0)
    dz1 = (dz2 @ w2) * (z1 > 0)
    dw1 = dz1.T @ x
    db1 = dz1.sum(axis=0)

    grads = Gradients(weights=[dw1, dw2, dw3], biases=[db1, db2, db3])
    for g in grads.weights + grads.biases:
        if not np.isfinite(g).all():
            raise NumericError("non-finite gradient")
    return grads


def train(features, center_vectors, cfg: TrainConfig) -> tuple[HashModel, list]:
    """Mini-batch SGD with momentum toward the per-sample centers.

    Shuffling, init, and tie streams all hang off cfg.seed, so identical
    inputs and config reproduce the trained parameters byte for byte.
    Returns the model and one loss record per epoch.
    """
    x = np.asarray(features, dtype=np.float64)
    c = np.asarray(center_vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"need a nonempty (n, d) feature matrix, got {x.shape}")
    if c.ndim != 2 or c.shape[0] != x.shape[0]:
        raise DimensionError(
            f"center map covers {c.shape[0] if c.ndim == 2 else '?'} samples, features have {x.shape[0]}"
        )
    n, d = x.shape
    k = c.shape[1]

    model = init_model(d, k, hidden=cfg.hidden, seed=cfg.seed)
    vel_w = [np.zeros_like(w) for w in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]
    shuffle_rng = substream(cfg.seed, "shuffle")

    log: list[EpochLog] = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        sum_total = sum_central = sum_quant = 0.0
        for batch_idx, start in enumerate(range(0, n, cfg.batch_size)):
            sel = order[start : start + cfg.batch_size]
            xb, cb = x[sel], c[sel]
            h = forward(model, xb)
            if not np.isfinite(h).all():
                raise TrainingError("model output is not finite", epoch=epoch, batch=batch_idx)
            lc = central_loss(h, cb) if cfg.use_lc else 0.0
            lq = quantization_loss(h) if cfg.use_lq and cfg.lambda1 != 0.0 else 0.0
            batch_loss = lc + cfg.lambda1 * lq
            if not math.isfinite(batch_loss):
                raise TrainingError("loss is not finite", epoch=epoch, batch=batch_idx)
            sum_total += batch_loss * len(sel)
            sum_central += lc * len(sel)
            sum_quant += lq * len(sel)

            try:
                grads = backward(model, xb, cb, cfg)
            except NumericError as exc:
                raise TrainingError(str(exc), epoch=epoch, batch=batch_idx) from exc
            for w, b, gw, gb, vw, vb in zip(
                model.weights, model.biases, grads.weights, grads.biases, vel_w, vel_b
            ):
                vw *= cfg.momentum
                vw += gw
                vb *= cfg.momentum
                vb += gb
                w -= cfg.learning_rate * vw
                b -= cfg.learning_rate * vb
        log.append(
            EpochLog(
                epoch=epoch,
                total=sum_total / n,
                central=sum_central / n,
                quant=sum_quant / n,
            )
        )
    return model, log


def encode(model: HashModel, features) -> np.ndarray:
    """Binary codes for a feature batch, packed into (n, W) uint64 words."""
    h = forward(model, np.asarray(features, dtype=np.float64))
    return hamming.binarize_matrix(h if h.ndim == 2 else h[None, :])


def save_model(path, model: HashModel) -> None:
    """Write a checkpoint (magic CSQM): layer sizes, then f64 params."""
    sizes = model.layer_sizes
    with open(path, "wb") as f:
        f.write(binfmt.header(MAGIC_MODEL))
        f.write(binfmt.u32(len(sizes)))
        for s in sizes:
            f.write(binfmt.u32(s))
        for w, b in zip(model.weights, model.biases):
            f.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_model(path) -> HashModel:
    r = binfmt.read_file(path)
    r.expect_magic(MAGIC_MODEL)
    count = r.u32()
    if count != 4:
        raise FormatError(f"expected 4 layer sizes, got {count}", offset=8)
    sizes = [r.u32() for _ in range(count)]
    if any(s < 1 for s in sizes):
        raise FormatError(f"bad layer sizes {sizes}", offset=12)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        w = np.frombuffer(r.take(8 * fan_out * fan_in), dtype="<f8")
        weights.append(w.reshape(fan_out, fan_in).astype(np.float64))
        b = np.frombuffer(r.take(8 * fan_out), dtype="<f8")
        biases.append(b.astype(np.float64))
    r.expect_end()
    return HashModel(weights=weights, biases=biases)
