"""Desk-scale neighborhood-sampling graph autoencoder.

Encoder: L rounds of (sample k_l neighbors) -> mean -> linear -> ReLU, with the
final round linear so inner products can be negative.  Decoder: parameter-less
inner product.  Loss: negative-sampling link prediction, summed over the
batch.  Gradients are hand-derived and backpropagate through the sampled
computation graph with the samples frozen per evaluation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, TrainingDivergedError, ValidationError
from .walks import build_negative_sampler


@dataclass(frozen=True)
class GnnConfig:
    layers: int = 2
    sample_sizes: tuple[int, ...] = (25, 10)
    dims: tuple[int, ...] = (64, 64, 16)
    batch_size: int = 1000
    negatives: int = 15
    lr: float = 5e-6
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    setting: str = "full"
    include_self: bool = True
    steps: int = 2000
    init_scale: float = 0.1

    def __post_init__(self):
        if self.layers < 1:
            raise ValidationError("layers must be >= 1")
        if len(self.sample_sizes) != self.layers:
            raise ValidationError("need one sample size per layer")
        if any(k < 1 for k in self.sample_sizes):
            raise ValidationError("sample sizes must be >= 1")
        if len(self.dims) != self.layers + 1:
            raise ValidationError("dims must list input plus one size per layer")
        if self.lr <= 0:
            raise ValidationError("lr must be positive")
        if self.setting not in ("full", "author_less"):
            raise ValidationError("setting must be 'full' or 'author_less'")


@dataclass
class GnnParams:
    """Trainable per-node input vectors plus one weight matrix per layer."""

    h0: np.ndarray
    weights: list[np.ndarray]

    def blocks(self) -> list[tuple[str, np.ndarray]]:
        return [("h0", self.h0)] + [
            (f"W{i}", w) for i, w in enumerate(self.weights)
        ]


def init_params(n_nodes: int, cfg: GnnConfig, rng: np.random.Generator) -> GnnParams:
    h0 = rng.uniform(-cfg.init_scale, cfg.init_scale, size=(n_nodes, cfg.dims[0]))
    weights = [
        rng.uniform(-cfg.init_scale, cfg.init_scale, size=(cfg.dims[i], cfg.dims[i + 1]))
        for i in range(cfg.layers)
    ]
    return GnnParams(h0=h0, weights=weights)


def sample_neighborhood(
    neighbors: Sequence[int],
    node: int,
    k: int,
    rng: np.random.Generator,
    include_self: bool = True,
) -> np.ndarray:
    """k uniform draws with replacement from the neighbor pool.

    The pool is N(node) plus the node itself when include_self; a node with an
    empty pool falls back to k copies of itself.
    """
    pool = list(neighbors)
    if include_self or not pool:
        pool = pool + [node]
    arr = np.asarray(pool, dtype=np.int64)
    return arr[rng.integers(len(arr), size=k)]


def draw_layer_samples(
    neighbors_list: Sequence[np.ndarray], cfg: GnnConfig, rng: np.random.Generator
) -> list[np.ndarray]:
    """One (n_nodes x k_l) index matrix per layer."""
    n = len(neighbors_list)
    out = []
    for k in cfg.sample_sizes:
        mat = np.empty((n, k), dtype=np.int64)
        for i in range(n):
            mat[i] = sample_neighborhood(
                neighbors_list[i], i, k, rng, include_self=cfg.include_self
            )
        out.append(mat)
    return out


def _forward(params: GnnParams, cfg: GnnConfig, samples: Sequence[np.ndarray]):
    h = params.h0
    agg_cache, pre_cache = [], []
    for layer in range(cfg.layers):
        gathered = h[samples[layer]]  # (n, k, d)
        agg = gathered.mean(axis=1)
        pre = agg @ params.weights[layer]
        agg_cache.append(agg)
        pre_cache.append(pre)
        h = np.maximum(pre, 0.0) if layer < cfg.layers - 1 else pre
    return h, agg_cache, pre_cache


def encode(
    params: GnnParams,
    cfg: GnnConfig,
    samples: Sequence[np.ndarray],
    nodes: Sequence[int] | None = None,
) -> np.ndarray:
    """Embeddings for all nodes (or a subset) under frozen neighborhood samples."""
    for layer, mat in enumerate(samples):
        if mat.shape != (params.h0.shape[0], cfg.sample_sizes[layer]):
            raise ValidationError(
                f"layer {layer} samples have shape {mat.shape}, expected "
                f"({params.h0.shape[0]}, {cfg.sample_sizes[layer]})"
            )
    z, _, _ = _forward(params, cfg, samples)
    return z if nodes is None else z[np.asarray(nodes, dtype=np.int64)]


def _backward(
    params: GnnParams,
    cfg: GnnConfig,
    samples: Sequence[np.ndarray],
    agg_cache: list[np.ndarray],
    pre_cache: list[np.ndarray],
    d_out: np.ndarray,
) -> GnnParams:
    grad_w = [np.zeros_like(w) for w in params.weights]
    grad = d_out
    for layer in range(cfg.layers - 1, -1, -1):
        if layer < cfg.layers - 1:
            grad = grad * (pre_cache[layer] > 0)
        grad_w[layer] = agg_cache[layer].T @ grad
        d_agg = grad @ params.weights[layer].T
        k = cfg.sample_sizes[layer]
        d_h = np.zeros((params.h0.shape[0], d_agg.shape[1]))
        np.add.at(d_h, samples[layer].ravel(), np.repeat(d_agg / k, k, axis=0))
        grad = d_h
    return GnnParams(h0=grad, weights=grad_w)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def loss_and_grad(
    params: GnnParams,
    cfg: GnnConfig,
    pairs: np.ndarray,
    negatives: np.ndarray,
    samples: Sequence[np.ndarray],
) -> tuple[float, GnnParams]:
    """Summed link-prediction loss and exact gradients, samples frozen.

    pairs: (B, 2) node indices; negatives: (B, n_neg) node indices drawn for
    each pair's center node.
    """
    if len(pairs) == 0:
        raise DomainError("batch must be nonempty")
    z, agg_cache, pre_cache = _forward(params, cfg, samples)
    u = pairs[:, 0]
    v = pairs[:, 1]
    zu, zv, zn = z[u], z[v], z[negatives]
    s_pos = np.einsum("bd,bd->b", zu, zv)
    s_neg = np.einsum("bd,bkd->bk", zu, zn)
    loss = float(np.logaddexp(0.0, -s_pos).sum() + np.logaddexp(0.0, s_neg).sum())

    coef_pos = _sigmoid(s_pos) - 1.0
    coef_neg = _sigmoid(s_neg)
    dz = np.zeros_like(z)
    np.add.at(
        dz, u, coef_pos[:, None] * zv + np.einsum("bk,bkd->bd", coef_neg, zn)
    )
    np.add.at(dz, v, coef_pos[:, None] * zu)
    np.add.at(
        dz,
        negatives.ravel(),
        (coef_neg[:, :, None] * zu[:, None, :]).reshape(-1, z.shape[1]),
    )
    grads = _backward(params, cfg, samples, agg_cache, pre_cache, dz)
    return loss, grads


def decoder_score(z: np.ndarray, u: int, v: int) -> float:
    """Inner-product link score; symmetric by construction."""
    return float(z[u] @ z[v])


class _Adam:
    def __init__(self, shapes, cfg: GnnConfig):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0
        self.cfg = cfg

    def step(self, arrays, grads):
        self.t += 1
        c = self.cfg
        for i, (arr, g) in enumerate(zip(arrays, grads)):
            self.m[i] = c.adam_beta1 * self.m[i] + (1 - c.adam_beta1) * g
            self.v[i] = c.adam_beta2 * self.v[i] + (1 - c.adam_beta2) * (g * g)
            m_hat = self.m[i] / (1 - c.adam_beta1**self.t)
            v_hat = self.v[i] / (1 - c.adam_beta2**self.t)
            arr -= c.lr * m_hat / (np.sqrt(v_hat) + c.adam_eps)


def adjacency_index(adj: Mapping[int, set[int]]) -> tuple[list[int], list[np.ndarray]]:
    """Sorted global node ids and per-node local neighbor arrays."""
    node_ids = sorted(adj)
    local = {g: i for i, g in enumerate(node_ids)}
    neighbors = [
        np.array(sorted(local[n] for n in adj[g] if n in local), dtype=np.int64)
        for g in node_ids
    ]
    return node_ids, neighbors


def train_autoencoder(
    adj: Mapping[int, set[int]],
    pairs: Sequence[tuple[int, int]],
    cfg: GnnConfig,
    node_frequencies: Mapping[int, int] | None = None,
) -> tuple[GnnParams, np.ndarray, list[float], list[int]]:
    """Adam-trained autoencoder over the adjacency, positives from walk pairs.

    pairs use the adjacency's (global) node ids.  Returns trained parameters,
    final embeddings under a dedicated evaluation sample, the per-step mean
    batch loss trace, and the node-id order of the embedding rows.
    """
    if not pairs:
        raise DomainError("need at least one positive pair")
    node_ids, neighbors = adjacency_index(adj)
    local = {g: i for i, g in enumerate(node_ids)}
    try:
        pair_arr = np.array([(local[a], local[b]) for a, b in pairs], dtype=np.int64)
    except KeyError as exc:
        raise ValidationError(f"pair references node {exc} outside the adjacency") from exc

    if node_frequencies is None:
        freqs: dict[int, int] = {}
        for a, b in pair_arr:
            freqs[int(a)] = freqs.get(int(a), 0) + 1
            freqs[int(b)] = freqs.get(int(b), 0) + 1
    else:
        freqs = {local[g]: c for g, c in node_frequencies.items() if g in local}
    sampler = build_negative_sampler(freqs, power=0.75)
    neg_tokens = np.array(sampler.tokens, dtype=np.int64)
    neg_cum = np.cumsum(sampler.probabilities)

    rng = np.random.default_rng(cfg.seed)
    params = init_params(len(node_ids), cfg, rng)
    opt = _Adam([params.h0.shape] + [w.shape for w in params.weights], cfg)

    trace: list[float] = []
    initial: float | None = None
    order = rng.permutation(len(pair_arr))
    cursor = 0
    for _ in range(cfg.steps):
        if cursor + cfg.batch_size > len(order):
            order = rng.permutation(len(pair_arr))
            cursor = 0
        idx = order[cursor : cursor + min(cfg.batch_size, len(order))]
        cursor += len(idx)
        batch = pair_arr[idx]
        draws = np.searchsorted(neg_cum, rng.random((len(batch), cfg.negatives)), side="right")
        negs = neg_tokens[np.minimum(draws, len(neg_tokens) - 1)]
        samples = draw_layer_samples(neighbors, cfg, rng)
        loss, grads = loss_and_grad(params, cfg, batch, negs, samples)
        mean_loss = loss / len(batch)
        if initial is None:
            initial = mean_loss
        if not np.isfinite(mean_loss) or mean_loss > 10.0 * max(initial, 1e-12):
            raise TrainingDivergedError(
                f"loss {mean_loss:.4g} exceeded 10x initial {initial:.4g}", trace
            )
        arrays = [params.h0] + params.weights
        opt.step(arrays, [grads.h0] + grads.weights)
        trace.append(mean_loss)

    eval_rng = np.random.default_rng((cfg.seed, len(trace)))
    final_samples = draw_layer_samples(neighbors, cfg, eval_rng)
    z = encode(params, cfg, final_samples)
    return params, z, trace, node_ids


def save_checkpoint(
    params: GnnParams, cfg: GnnConfig, node_labels: Sequence[str], path
) -> None:
    """Config JSON plus flat parameter arrays with shape headers."""
    payload = {
        "config": asdict(cfg),
        "node_labels": list(node_labels),
        "h0": {"shape": list(params.h0.shape), "data": params.h0.ravel().tolist()},
        "weights": [
            {"shape": list(w.shape), "data": w.ravel().tolist()} for w in params.weights
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path) -> tuple[GnnParams, GnnConfig, list[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    cfg_dict = dict(payload["config"])
    cfg_dict["sample_sizes"] = tuple(cfg_dict["sample_sizes"])
    cfg_dict["dims"] = tuple(cfg_dict["dims"])
    cfg = GnnConfig(**cfg_dict)
    h0 = np.array(payload["h0"]["data"]).reshape(payload["h0"]["shape"])
    weights = [
        np.array(w["data"]).reshape(w["shape"]) for w in payload["weights"]
    ]
    return GnnParams(h0=h0, weights=weights), cfg, list(payload["node_labels"])
