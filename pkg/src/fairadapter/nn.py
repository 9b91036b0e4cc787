"""Minimal neural kernel: two-layer adapters, linear heads, cross-entropy,
exact backprop, Adam, and checkpoint files.

Everything here is a pure function over numpy arrays in double precision;
purity is what makes the finite-difference gradient checks in the test
suite meaningful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CHECKPOINT_FORMAT = "fairadapter-checkpoint"
CHECKPOINT_VERSION = 1

SCORE_VIA_CLASSIFY = "classify"
SCORE_VIA_FAIR = "fair"


@dataclass
class AdapterParams:
    """Two fully connected layers with a rectifier in between.

    Shapes: W1 (hidden, dim), b1 (hidden,), W2 (dim, hidden), b2 (dim,).
    """

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @property
    def dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    def copy(self) -> "AdapterParams":
        return AdapterParams(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())


@dataclass
class HeadParams:
    """Linear classification head emitting two logits.

    Logit index 0 scores "natural", index 1 scores "AI-generated".
    """

    W: np.ndarray  # (2, dim)
    b: np.ndarray  # (2,)

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}

    def copy(self) -> "HeadParams":
        return HeadParams(self.W.copy(), self.b.copy())


@dataclass
class ModelParams:
    """The four trainable groups: two adapters and their two heads.

    ``score_route`` records which head scores at inference time: the normal
    path runs enhancement then the classify adapter and its head; ablated
    models that never train the classify path score through the fair head
    instead.
    """

    fair_adapter: AdapterParams
    classify_adapter: AdapterParams
    fair_head: HeadParams
    classify_head: HeadParams
    dim: int
    hidden: int
    score_route: str = SCORE_VIA_CLASSIFY

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.fair_adapter.copy(),
            self.classify_adapter.copy(),
            self.fair_head.copy(),
            self.classify_head.copy(),
            self.dim,
            self.hidden,
            self.score_route,
        )


def init_adapter(dim: int, hidden: int, scheme: str = "uniform-fan-in", seed: int = 0) -> AdapterParams:
    """Initialize an adapter; ``zeros`` makes the residual block an identity."""
    _check_dims(dim, hidden)
    if scheme == "zeros":
        return AdapterParams(
            np.zeros((hidden, dim)), np.zeros(hidden), np.zeros((dim, hidden)), np.zeros(dim)
        )
    if scheme == "uniform-fan-in":
        rng = np.random.default_rng(seed)
        return AdapterParams(
            _fan_in_uniform(rng, (hidden, dim)),
            np.zeros(hidden),
            _fan_in_uniform(rng, (dim, hidden)),
            np.zeros(dim),
        )
    raise ValueError(f"unknown init scheme {scheme!r}")


def init_head(dim: int, scheme: str = "uniform-fan-in", seed: int = 0) -> HeadParams:
    _check_dims(dim, 1)
    if scheme == "zeros":
        return HeadParams(np.zeros((2, dim)), np.zeros(2))
    if scheme == "uniform-fan-in":
        rng = np.random.default_rng(seed)
        return HeadParams(_fan_in_uniform(rng, (2, dim)), np.zeros(2))
    raise ValueError(f"unknown init scheme {scheme!r}")


def init_model(dim: int, hidden: int, scheme: str = "uniform-fan-in", seed: int = 0) -> ModelParams:
    """Initialize all four parameter groups from one seed, deterministically."""
    _check_dims(dim, hidden)
    seeds = np.random.SeedSequence(seed).generate_state(4)
    return ModelParams(
        fair_adapter=init_adapter(dim, hidden, scheme, int(seeds[0])),
        classify_adapter=init_adapter(dim, hidden, scheme, int(seeds[1])),
        fair_head=init_head(dim, scheme, int(seeds[2])),
        classify_head=init_head(dim, scheme, int(seeds[3])),
        dim=dim,
        hidden=hidden,
    )


def adapter_forward(p: AdapterParams, x: np.ndarray, residual: bool) -> np.ndarray:
    """W2 relu(W1 x + b1) + b2, plus x when the residual connection is on."""
    x = _check_vector(x, p.dim)
    hidden = np.maximum(p.W1 @ x + p.b1, 0.0)
    out = p.W2 @ hidden + p.b2
    return out + x if residual else out


def adapter_backward(
    p: AdapterParams, x: np.ndarray, residual: bool, upstream: np.ndarray
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Backprop ``upstream`` (dL/d output) through one adapter.

    Returns the parameter gradients and dL/dx.
    """
    x = _check_vector(x, p.dim)
    pre = p.W1 @ x + p.b1
    hidden = np.maximum(pre, 0.0)
    d_out = np.asarray(upstream, dtype=np.float64)
    grads = {
        "W2": np.outer(d_out, hidden),
        "b2": d_out.copy(),
    }
    d_hidden = p.W2.T @ d_out
    d_pre = d_hidden * (pre > 0.0)
    grads["W1"] = np.outer(d_pre, x)
    grads["b1"] = d_pre
    d_x = p.W1.T @ d_pre
    if residual:
        d_x = d_x + d_out
    return grads, d_x


def head_forward(h: HeadParams, x: np.ndarray) -> np.ndarray:
    """Linear logits W x + b."""
    x = _check_vector(x, h.dim)
    return h.W @ x + h.b


def head_backward(
    h: HeadParams, x: np.ndarray, d_logits: np.ndarray
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Backprop dL/d logits through the head; returns grads and dL/dx."""
    x = _check_vector(x, h.dim)
    d_logits = np.asarray(d_logits, dtype=np.float64)
    grads = {"W": np.outer(d_logits, x), "b": d_logits.copy()}
    return grads, h.W.T @ d_logits


def softmax_ce(logits: np.ndarray, label: int) -> float:
    """Cross-entropy of softmax(logits) against ``label``, overflow-safe."""
    logits = np.asarray(logits, dtype=np.float64)
    m = np.max(logits)
    shifted = logits - m
    return float(np.log(np.sum(np.exp(shifted))) - shifted[label])


def softmax_ce_grad(logits: np.ndarray, label: int) -> np.ndarray:
    """d softmax_ce / d logits = softmax(logits) - onehot(label)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = np.exp(logits - np.max(logits))
    probs = shifted / np.sum(shifted)
    probs[label] -= 1.0
    return probs


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = np.exp(logits - np.max(logits))
    return shifted / np.sum(shifted)


@dataclass
class AdamState:
    """Adam moment accumulators for a named group of parameter arrays."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], learning_rate: float) -> "AdamState":
        return cls(
            learning_rate=learning_rate,
            m={k: np.zeros_like(a) for k, a in params.items()},
            v={k: np.zeros_like(a) for k, a in params.items()},
        )

    def copy(self) -> "AdamState":
        return AdamState(
            self.learning_rate,
            self.beta1,
            self.beta2,
            self.eps,
            self.t,
            {k: a.copy() for k, a in self.m.items()},
            {k: a.copy() for k, a in self.v.items()},
        )


def adam_step(
    state: AdamState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update. Pure: inputs are left untouched."""
    if set(params) != set(state.m) or not set(grads) <= set(params):
        raise ValueError("parameter/gradient names do not match the optimizer state")
    new = state.copy()
    new.t += 1
    bc1 = 1.0 - new.beta1**new.t
    bc2 = 1.0 - new.beta2**new.t
    out = {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape} for {name!r}")
        new.m[name] = new.beta1 * new.m[name] + (1.0 - new.beta1) * g
        new.v[name] = new.beta2 * new.v[name] + (1.0 - new.beta2) * g * g
        m_hat = new.m[name] / bc1
        v_hat = new.v[name] / bc2
        out[name] = p - new.learning_rate * m_hat / (np.sqrt(v_hat) + new.eps)
    return out, new


def write_checkpoint(model: ModelParams, path) -> None:
    """Persist a model as JSON lines: header then one line per group."""
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dim": model.dim,
        "hidden": model.hidden,
        "score_route": model.score_route,
    }
    groups = {
        "fair_adapter": model.fair_adapter.arrays(),
        "classify_adapter": model.classify_adapter.arrays(),
        "fair_head": model.fair_head.arrays(),
        "classify_head": model.classify_head.arrays(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":"), allow_nan=False) + "\n")
        for name, arrays in groups.items():
            obj = {
                "group": name,
                "arrays": {k: [float(v) for v in a.ravel()] for k, a in arrays.items()},
            }
            fh.write(json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n")


def read_checkpoint(path) -> ModelParams:
    """Load a model checkpoint written by :func:`write_checkpoint`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty checkpoint file")
    header = json.loads(lines[0])
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unknown checkpoint format {header.get('format')!r}")
    if header.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {header.get('version')!r}")
    dim, hidden = int(header["dim"]), int(header["hidden"])
    route = header.get("score_route", SCORE_VIA_CLASSIFY)
    if route not in (SCORE_VIA_CLASSIFY, SCORE_VIA_FAIR):
        raise ValueError(f"unknown score_route {route!r}")

    groups: dict[str, dict[str, np.ndarray]] = {}
    for raw in lines[1:]:
        obj = json.loads(raw)
        groups[obj["group"]] = {k: np.asarray(v, dtype=np.float64) for k, v in obj["arrays"].items()}
    missing = {"fair_adapter", "classify_adapter", "fair_head", "classify_head"} - set(groups)
    if missing:
        raise ValueError(f"checkpoint missing parameter groups: {sorted(missing)}")

    def unpack_adapter(name: str) -> AdapterParams:
        a = groups[name]
        return AdapterParams(
            _reshape(a["W1"], (hidden, dim), name),
            _reshape(a["b1"], (hidden,), name),
            _reshape(a["W2"], (dim, hidden), name),
            _reshape(a["b2"], (dim,), name),
        )

    def unpack_head(name: str) -> HeadParams:
        a = groups[name]
        return HeadParams(_reshape(a["W"], (2, dim), name), _reshape(a["b"], (2,), name))

    return ModelParams(
        fair_adapter=unpack_adapter("fair_adapter"),
        classify_adapter=unpack_adapter("classify_adapter"),
        fair_head=unpack_head("fair_head"),
        classify_head=unpack_head("classify_head"),
        dim=dim,
        hidden=hidden,
        score_route=route,
    )


def _fan_in_uniform(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    bound = 1.0 / np.sqrt(shape[1])
    return rng.uniform(-bound, bound, size=shape)


def _check_dims(dim: int, hidden: int) -> None:
    if dim < 1 or hidden < 1:
        raise ValueError(f"dimensions must be positive, got dim={dim}, hidden={hidden}")


def _check_vector(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise ValueError(f"expected vector of length {dim}, got shape {x.shape}")
    return x


def _reshape(flat: np.ndarray, shape: tuple[int, ...], group: str) -> np.ndarray:
    expected = int(np.prod(shape))
    if flat.size != expected:
        raise ValueError(f"group {group!r}: expected {expected} values, got {flat.size}")
    return flat.reshape(shape)
