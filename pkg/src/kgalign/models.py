"""MAN and HMAN forward/backward passes.

Both variants share a featureless topology GCN (the first layer reads its
weight rows directly instead of materializing an N x N identity input).
MAN runs two more GCN stacks over the relation and attribute count
channels and concatenates [topology | attribute | relation].  HMAN feeds
each count channel through a gated feedforward encoder without any graph
propagation, concatenates [topology | relation | attribute] and applies
row-wise L2 normalization to the result.

Backward passes are hand-chained from the kernel gradients in
:mod:`kgalign.linalg`; parameters are plain float64 arrays addressed by
dotted names (``topo.w0``, ``relation.wt`` ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _binio
from .features import FeatureSet
from .linalg import (
    SparseMatrix,
    l2_normalize_rows_grad,
    relu,
    relu_grad,
    row_norms,
    sigmoid,
    sigmoid_grad,
    spmm,
    spmm_grad_dense,
)

MAN = "man"
HMAN = "hman"

CKPT_MAGIC = b"KGCK"
CKPT_VERSION = 1

# branch concatenation order per variant
_BRANCH_ORDER = {MAN: ("topo", "attribute", "relation"),
                 HMAN: ("topo", "relation", "attribute")}


@dataclass
class GcnStack:
    """Stacked graph-convolution weights; ReLU after every layer."""

    weights: list
    featureless: bool

    def named_params(self, prefix):
        for i, w in enumerate(self.weights):
            yield f"{prefix}.w{i}", w


@dataclass
class HighwayEncoder:
    """FC projection followed by an optional highway layer.

    With the gate disabled the encoder reduces to the plain FC layer
    (the "without highway" ablation).
    """

    w1: np.ndarray
    b1: np.ndarray
    wt: np.ndarray | None = None
    bt: np.ndarray | None = None
    w2: np.ndarray | None = None
    b2: np.ndarray | None = None
    gated: bool = True

    def named_params(self, prefix):
        yield f"{prefix}.w1", self.w1
        yield f"{prefix}.b1", self.b1
        if self.gated:
            yield f"{prefix}.wt", self.wt
            yield f"{prefix}.bt", self.bt
            yield f"{prefix}.w2", self.w2
            yield f"{prefix}.b2", self.b2


@dataclass
class ModelParams:
    """All learnable weights of one model variant."""

    variant: str
    dims: tuple
    top_f: int
    n_entities: int
    seed: int
    topo: GcnStack | None
    relation: GcnStack | HighwayEncoder | None
    attribute: GcnStack | HighwayEncoder | None
    meta: dict = field(default_factory=dict)

    def branches(self):
        for name in _BRANCH_ORDER[self.variant]:
            branch = getattr(self, name)
            if branch is not None:
                yield name, branch

    def named_params(self):
        for name, branch in self.branches():
            yield from branch.named_params(name)

    def get_param(self, name: str) -> np.ndarray:
        branch_name, leaf = name.split(".", 1)
        branch = getattr(self, branch_name)
        idx = {"w1": "w1", "b1": "b1", "wt": "wt", "bt": "bt", "w2": "w2", "b2": "b2"}
        if isinstance(branch, GcnStack):
            return branch.weights[int(leaf[1:])]
        return getattr(branch, idx[leaf])

    def drop_set(self) -> frozenset:
        dropped = set()
        if self.topo is None:
            dropped.add("te")
        if self.relation is None:
            dropped.add("re")
        if self.attribute is None:
            dropped.add("ae")
        return frozenset(dropped)


def _glorot(rng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _init_gcn(rng, in_dim: int, out_dim: int, layers: int, featureless: bool) -> GcnStack:
    weights = [_glorot(rng, in_dim, out_dim)]
    for _ in range(layers - 1):
        weights.append(_glorot(rng, out_dim, out_dim))
    return GcnStack(weights=weights, featureless=featureless)


def _init_highway(rng, in_dim: int, out_dim: int, gated: bool) -> HighwayEncoder:
    w1 = _glorot(rng, in_dim, out_dim)
    b1 = np.zeros(out_dim)
    if not gated:
        return HighwayEncoder(w1=w1, b1=b1, gated=False)
    return HighwayEncoder(
        w1=w1, b1=b1,
        wt=_glorot(rng, out_dim, out_dim),
        bt=np.full(out_dim, -1.0),  # mild carry preference at the start
        w2=_glorot(rng, out_dim, out_dim),
        b2=np.zeros(out_dim),
        gated=True,
    )


def init_params(variant: str, feats: FeatureSet, dims=(200, 100, 100),
                layers: int = 2, highway: bool = True, seed: int = 0) -> ModelParams:
    """Initialize a model for the channels active in ``feats``.

    Each branch draws from its own seed stream, so e.g. the topology
    weights depend only on the seed and shapes, not on the variant or on
    which other channels are present.
    """
    if variant not in (MAN, HMAN):
        raise ValueError(f"unknown variant {variant!r}")
    d_t, d_r, d_a = dims
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
    n = feats.n_entities

    topo = relation = attribute = None
    if feats.include_topology:
        topo = _init_gcn(streams[0], n, d_t, layers, featureless=True)
    if feats.relation_feats is not None:
        f_rel = feats.relation_feats.cols
        if variant == MAN:
            relation = _init_gcn(streams[1], f_rel, d_r, layers, featureless=False)
        else:
            relation = _init_highway(streams[1], f_rel, d_r, gated=highway)
    if feats.attribute_feats is not None:
        f_attr = feats.attribute_feats.cols
        if variant == MAN:
            attribute = _init_gcn(streams[2], f_attr, d_a, layers, featureless=False)
        else:
            attribute = _init_highway(streams[2], f_attr, d_a, gated=highway)
    if topo is None and relation is None and attribute is None:
        raise ValueError("model needs at least one active feature channel")

    return ModelParams(variant=variant, dims=tuple(dims), top_f=feats.top_f,
                       n_entities=n, seed=seed, topo=topo, relation=relation,
                       attribute=attribute)


def _gcn_branch_forward(stack: GcnStack, a_hat: SparseMatrix, x0: SparseMatrix | None):
    caches = []
    h = None
    for li, w in enumerate(stack.weights):
        if li == 0:
            pre = spmm(a_hat, w) if stack.featureless else spmm(a_hat, spmm(x0, w))
        else:
            pre = spmm(a_hat, h @ w)
        caches.append((h, pre))
        h = relu(pre)
    return h, caches


def _gcn_branch_backward(stack: GcnStack, a_hat, x0, caches, grad_out):
    grads = {}
    g = grad_out
    for li in range(len(stack.weights) - 1, -1, -1):
        h_in, pre = caches[li]
        gz = relu_grad(pre, g)
        gy = spmm_grad_dense(a_hat, gz)  # gradient of the propagated product
        if li == 0:
            grads[f"w{li}"] = gy if stack.featureless else spmm_grad_dense(x0, gy)
        else:
            grads[f"w{li}"] = h_in.T @ gy
            g = gy @ stack.weights[li].T
    return grads


def highway_forward(enc: HighwayEncoder, x: SparseMatrix) -> np.ndarray:
    """Encode each feature row independently (no graph propagation)."""
    out, _ = _highway_forward_cached(enc, x)
    return out


def _highway_forward_cached(enc: HighwayEncoder, x: SparseMatrix):
    if x.cols != enc.w1.shape[0]:
        raise ValueError(f"feature width {x.cols} does not match encoder input {enc.w1.shape[0]}")
    s_pre = spmm(x, enc.w1) + enc.b1
    s = relu(s_pre)
    if not enc.gated:
        return s, (s_pre, s, None, None, None)
    t = sigmoid(s @ enc.wt + enc.bt)
    r_pre = s @ enc.w2 + enc.b2
    r = relu(r_pre)
    out = r * t + s * (1.0 - t)
    return out, (s_pre, s, t, r_pre, r)


def _highway_backward(enc: HighwayEncoder, x: SparseMatrix, cache, grad_out):
    s_pre, s, t, r_pre, r = cache
    grads = {}
    if enc.gated:
        dr = grad_out * t
        dt = grad_out * (r - s)
        ds = grad_out * (1.0 - t)
        dr_pre = relu_grad(r_pre, dr)
        grads["w2"] = s.T @ dr_pre
        grads["b2"] = dr_pre.sum(axis=0)
        ds = ds + dr_pre @ enc.w2.T
        dt_pre = sigmoid_grad(t, dt)
        grads["wt"] = s.T @ dt_pre
        grads["bt"] = dt_pre.sum(axis=0)
        ds = ds + dt_pre @ enc.wt.T
    else:
        ds = grad_out
    ds_pre = relu_grad(s_pre, ds)
    grads["w1"] = spmm_grad_dense(x, ds_pre)
    grads["b1"] = ds_pre.sum(axis=0)
    return grads


def _branch_input(name: str, feats: FeatureSet):
    if name == "topo":
        return None
    x = feats.relation_feats if name == "relation" else feats.attribute_feats
    if x is None:
        raise ValueError(f"model has a {name} branch but the channel was dropped from features")
    return x


def _is_normalized(params: ModelParams) -> bool:
    # normalization is attached to the hybrid concatenation; with both
    # encoder branches dropped HMAN degenerates to the plain topology GCN
    return params.variant == HMAN and (params.relation is not None or params.attribute is not None)


def forward(params: ModelParams, a_hat: SparseMatrix, feats: FeatureSet):
    """Run the variant's forward pass; returns (embedding, cache)."""
    segments = []
    branch_caches = {}
    for name, branch in params.branches():
        x0 = _branch_input(name, feats)
        if isinstance(branch, GcnStack):
            out, cache = _gcn_branch_forward(branch, a_hat, x0)
        else:
            out, cache = _highway_forward_cached(branch, x0)
        branch_caches[name] = cache
        segments.append((name, out))
    concat = np.concatenate([out for _, out in segments], axis=1)
    if _is_normalized(params):
        norms = row_norms(concat)
        safe = np.where(norms > 0.0, norms, 1.0)
        emb = concat / safe[:, None]
    else:
        emb = concat
    widths = [(name, out.shape[1]) for name, out in segments]
    return emb, {"branches": branch_caches, "concat": concat, "widths": widths}


def backward(params: ModelParams, a_hat: SparseMatrix, feats: FeatureSet,
             cache, grad_emb: np.ndarray) -> dict:
    """Gradients of every parameter given the gradient on the embedding."""
    g = l2_normalize_rows_grad(cache["concat"], grad_emb) if _is_normalized(params) else grad_emb
    grads = {}
    col = 0
    by_name = dict(params.branches())
    for name, width in cache["widths"]:
        seg = g[:, col:col + width]
        col += width
        branch = by_name[name]
        x0 = _branch_input(name, feats)
        if isinstance(branch, GcnStack):
            part = _gcn_branch_backward(branch, a_hat, x0, cache["branches"][name], seg)
        else:
            part = _highway_backward(branch, x0, cache["branches"][name], seg)
        for leaf, val in part.items():
            grads[f"{name}.{leaf}"] = val
    return grads


def man_forward(params: ModelParams, a_hat: SparseMatrix, feats: FeatureSet) -> np.ndarray:
    if params.variant != MAN:
        raise ValueError("man_forward called with a non-MAN model")
    emb, _ = forward(params, a_hat, feats)
    return emb


def hman_forward(params: ModelParams, a_hat: SparseMatrix, feats: FeatureSet) -> np.ndarray:
    if params.variant != HMAN:
        raise ValueError("hman_forward called with a non-HMAN model")
    emb, _ = forward(params, a_hat, feats)
    return emb


def sgd_step(params: ModelParams, grads: dict, step_size: float) -> None:
    """In-place gradient step over every named parameter."""
    for name, p in params.named_params():
        p -= step_size * grads[name]


def save_checkpoint(params: ModelParams, path, extra_meta: dict | None = None) -> None:
    arrays = list(params.named_params())
    gate_flags = [b.gated for _, b in params.branches() if isinstance(b, HighwayEncoder)]
    meta = {
        "variant": params.variant,
        "dims": list(params.dims),
        "top_f": params.top_f,
        "n_entities": params.n_entities,
        "seed": params.seed,
        "drop": sorted(params.drop_set()),
        "highway": all(gate_flags) if gate_flags else True,
        "layers": len(params.topo.weights) if params.topo is not None else 2,
        "param_names": [name for name, _ in arrays],
        "extra": extra_meta or {},
    }
    with _binio.atomic_write(path) as f:
        _binio.write_header(f, CKPT_MAGIC, CKPT_VERSION, meta)
        for _, arr in arrays:
            _binio.write_array(f, arr)


def load_checkpoint(path) -> tuple[ModelParams, dict]:
    with open(path, "rb") as f:
        meta = _binio.read_header(f, CKPT_MAGIC, CKPT_VERSION)
        arrays = {name: _binio.read_array(f) for name in meta["param_names"]}

    def build_branch(name):
        names = [n for n in meta["param_names"] if n.startswith(name + ".")]
        if not names:
            return None
        leaves = {n.split(".", 1)[1]: arrays[n] for n in names}
        if "b1" not in leaves:  # GCN stacks carry only w0..w{L-1}
            ws = [leaves[f"w{i}"] for i in range(len(leaves))]
            return GcnStack(weights=ws, featureless=(name == "topo"))
        gated = "wt" in leaves
        return HighwayEncoder(
            w1=leaves["w1"], b1=leaves["b1"],
            wt=leaves.get("wt"), bt=leaves.get("bt"),
            w2=leaves.get("w2"), b2=leaves.get("b2"),
            gated=gated,
        )

    params = ModelParams(
        variant=meta["variant"],
        dims=tuple(meta["dims"]),
        top_f=meta["top_f"],
        n_entities=meta["n_entities"],
        seed=meta["seed"],
        topo=build_branch("topo"),
        relation=build_branch("relation"),
        attribute=build_branch("attribute"),
        meta=meta.get("extra", {}),
    )
    return params, meta
