"""Feed-forward ReLU networks: evaluation, JSON files, and the structural
builders used to compose plants with controllers."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .dynamics import AffineDynamics


class NetworkFormatError(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Affine:
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.size != W.shape[0]:
            raise ShapeMismatch(f"bias of length {b.size} for a {W.shape} weight")
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]


class ReLU:
    def __eq__(self, other):
        return isinstance(other, ReLU)

    def __hash__(self):
        return hash("relu")

    def __repr__(self):
        return "ReLU()"


Layer = Union[Affine, ReLU]


class Network:
    """An ordered list of affine and ReLU layers."""

    def __init__(self, layers: Sequence[Layer], in_dim: int):
        self.layers: tuple[Layer, ...] = tuple(layers)
        self.in_dim = int(in_dim)
        if self.in_dim <= 0:
            raise ShapeMismatch("in_dim must be positive")
        width = self.in_dim
        for k, layer in enumerate(self.layers):
            if isinstance(layer, Affine):
                if layer.in_dim != width:
                    raise ShapeMismatch(
                        f"layer {k}: affine expects {layer.in_dim} inputs but receives {width}")
                width = layer.out_dim
            elif not isinstance(layer, ReLU):
                raise NetworkFormatError(f"layer {k}: unsupported layer {layer!r}")
        self.out_dim = width

    def __repr__(self):
        widths = [self.in_dim] + [l.out_dim for l in self.layers if isinstance(l, Affine)]
        return f"Network({'-'.join(map(str, widths))}, {len(self.layers)} layers)"

    def __call__(self, x):
        return self.eval(x)

    @property
    def affine_layers(self) -> list[Affine]:
        return [l for l in self.layers if isinstance(l, Affine)]

    def eval(self, x) -> np.ndarray:
        """Forward pass for one input vector or a batch (rows)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.in_dim:
            raise ShapeMismatch(f"network takes {self.in_dim} inputs, got {h.shape[1]}")
        for layer in self.layers:
            if isinstance(layer, Affine):
                h = h @ layer.W.T + layer.b
            else:
                h = np.maximum(h, 0.0)
        return h[0] if single else h

    def then(self, other: "Network") -> "Network":
        """Sequential composition ``other(self(x))``; touching affine layers fuse."""
        if other.in_dim != self.out_dim:
            raise ShapeMismatch(f"cannot feed {self.out_dim} outputs into {other.in_dim} inputs")
        return Network(_fuse(list(self.layers) + list(other.layers)), self.in_dim)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, Affine):
                layers.append({"type": "affine", "w": layer.W.tolist(), "b": layer.b.tolist()})
            else:
                layers.append({"type": "relu"})
        return {"in_dim": self.in_dim, "layers": layers}

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        if not isinstance(doc, dict) or "in_dim" not in doc or "layers" not in doc:
            raise NetworkFormatError("network document needs 'in_dim' and 'layers'")
        extra = set(doc) - {"in_dim", "layers"}
        if extra:
            raise NetworkFormatError(f"unknown network keys: {sorted(extra)}")
        in_dim = doc["in_dim"]
        if not isinstance(in_dim, int) or isinstance(in_dim, bool) or in_dim <= 0:
            raise NetworkFormatError("in_dim must be a positive integer")
        layers: list[Layer] = []
        for k, spec in enumerate(doc["layers"]):
            kind = spec.get("type") if isinstance(spec, dict) else None
            if kind == "relu":
                if set(spec) != {"type"}:
                    raise NetworkFormatError(f"layer {k}: relu takes no fields")
                layers.append(ReLU())
            elif kind == "affine":
                for key in ("w", "b"):
                    if key not in spec:
                        raise NetworkFormatError(f"layer {k}: affine layer is missing '{key}'")
                if set(spec) != {"type", "w", "b"}:
                    raise NetworkFormatError(f"layer {k}: unexpected fields {sorted(set(spec) - {'type', 'w', 'b'})}")
                W = _finite_array(spec["w"], k, "w", ndim=2)
                b = _finite_array(spec["b"], k, "b", ndim=1)
                if W.shape[0] != b.size:
                    raise NetworkFormatError(f"layer {k}: {W.shape[0]} weight rows but {b.size} biases")
                layers.append(Affine(W, b))
            else:
                raise NetworkFormatError(f"layer {k}: unknown layer type {kind!r}")
        try:
            return cls(layers, in_dim)
        except ShapeMismatch as err:
            raise NetworkFormatError(str(err)) from None

    def dumps(self) -> str:
        # repr of a Python float round-trips exactly
        return json.dumps(self.to_dict(), separators=(",", ":"), allow_nan=False) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "Network":
        try:
            doc = json.loads(text, parse_constant=_reject_constant)
        except json.JSONDecodeError as err:
            raise NetworkFormatError(f"malformed JSON: {err}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "Network":
        return cls.loads(Path(path).read_text())


def _reject_constant(name):
    raise NetworkFormatError(f"non-finite weight {name} is not allowed")


def _finite_array(value, k, key, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise NetworkFormatError(f"layer {k}: '{key}' is not a numeric array") from None
    if ndim == 2 and arr.ndim == 2 and arr.shape[1] == 0:
        raise NetworkFormatError(f"layer {k}: empty weight matrix")
    if arr.ndim != ndim:
        raise NetworkFormatError(f"layer {k}: '{key}' should have {ndim} dimension(s)")
    if not np.all(np.isfinite(arr)):
        raise NetworkFormatError(f"layer {k}: '{key}' contains NaN or Inf")
    return arr


def _fuse(layers: list[Layer]) -> list[Layer]:
    out: list[Layer] = []
    for layer in layers:
        if isinstance(layer, Affine) and out and isinstance(out[-1], Affine):
            prev = out.pop()
            out.append(Affine(layer.W @ prev.W, layer.W @ prev.b + layer.b))
        else:
            out.append(layer)
    return out


def identity_network(n: int) -> Network:
    return Network([Affine(np.eye(n), np.zeros(n))], n)


def affine_network(A, b) -> Network:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return Network([Affine(A, b)], A.shape[1])


def append_affine(n: Network, A, b=None) -> Network:
    """Network computing ``A @ n(x) + b``, folded into the last affine layer."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != n.out_dim:
        raise ShapeMismatch(f"appended map has {A.shape[1]} columns, network outputs {n.out_dim}")
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).reshape(-1)
    if b.size != A.shape[0]:
        raise ShapeMismatch("appended offset length does not match map rows")
    return Network(_fuse(list(n.layers) + [Affine(A, b)]), n.in_dim)


def append_clamp01(n: Network) -> Network:
    """Clamp every output to [0, 1] as ``relu(u) - relu(u - 1)``."""
    k = n.out_dim
    I = np.eye(k)
    split = Affine(np.vstack([I, I]), np.concatenate([np.zeros(k), -np.ones(k)]))
    merge = Affine(np.hstack([I, -I]), np.zeros(k))
    return Network(_fuse(list(n.layers) + [split]) + [ReLU(), merge], n.in_dim)


def carry_inputs(n: Network, total_in: int, carry: Sequence[int]) -> Network:
    """Widen ``n`` so it also carries selected inputs through every layer.

    The result takes ``total_in`` inputs, feeds the first ``n.in_dim`` of them
    to ``n`` and outputs ``(y[carry], n(y[:n.in_dim]))``.  Carried values cross
    each ReLU as the pair ``(relu(s), relu(-s))``, whose difference is ``s``
    exactly.
    """
    carry = list(carry)
    s = len(carry)
    if total_in < n.in_dim:
        raise ShapeMismatch("total input width smaller than the wrapped network's input")
    if any(not 0 <= c < total_in for c in carry):
        raise ShapeMismatch("carried index out of range")
    layers = list(n.layers)
    if layers and isinstance(layers[0], ReLU):
        layers.insert(0, Affine(np.eye(n.in_dim), np.zeros(n.in_dim)))
    # readout R maps the widened hidden vector [h; c] to the carried values
    width = n.in_dim
    R = np.zeros((s, total_in))
    R[np.arange(s), carry] = 1.0
    extra = total_in - n.in_dim   # columns of the widened vector beyond h
    out: list[Layer] = []
    for k, layer in enumerate(layers):
        if isinstance(layer, ReLU):
            out.append(ReLU())
            continue
        nxt_relu = k + 1 < len(layers) and isinstance(layers[k + 1], ReLU)
        is_last = k == len(layers) - 1
        W_top = np.hstack([layer.W, np.zeros((layer.out_dim, extra))])
        if is_last:
            W = np.vstack([R, W_top])
            b = np.concatenate([np.zeros(s), layer.b])
            out.append(Affine(W, b))
            return Network(out, total_in)
        P = np.vstack([R, -R]) if nxt_relu else R
        W = np.vstack([W_top, P])
        b = np.concatenate([layer.b, np.zeros(P.shape[0])])
        out.append(Affine(W, b))
        width = layer.out_dim
        extra = P.shape[0]
        R = np.zeros((s, width + extra))
        if nxt_relu:
            R[:, width:width + s] = np.eye(s)
            R[:, width + s:] = -np.eye(s)
        else:
            R[:, width:] = np.eye(s)
    # no layers, or the last layer was a ReLU: finish with a readout layer
    W = np.vstack([R, np.hstack([np.eye(width), np.zeros((width, extra))])])
    out.append(Affine(W, np.zeros(W.shape[0])))
    return Network(out, total_in)


def build_state_passthrough(n: Network, state_dims: int) -> Network:
    """Network mapping ``x`` to ``(x[:state_dims], n(x))``."""
    if not 0 < state_dims <= n.in_dim:
        raise ShapeMismatch(f"state_dims={state_dims} outside 1..{n.in_dim}")
    return carry_inputs(n, n.in_dim, range(state_dims))


def unroll_affine_system(n: Network, dyn: AffineDynamics, substeps: int | None = None,
                         m: int = 1, latent_dims: int | None = None) -> Network:
    """Chain ``m`` control periods into one network.

    ``n`` maps ``(x, z)`` to the control ``u``.  The result takes
    ``(x0, z0, ..., z_{m-1})`` and returns ``x_m``.
    """
    if not isinstance(dyn, AffineDynamics):
        raise TypeError("unrolling needs affine dynamics; use the star pipeline for nonlinear plants")
    if m < 1:
        raise ValueError("m must be >= 1")
    s = dyn.state_dim
    if latent_dims is None:
        latent_dims = n.in_dim - s
    if n.in_dim != s + latent_dims:
        raise ShapeMismatch(f"controller takes {n.in_dim} inputs, expected {s}+{latent_dims}")
    if n.out_dim != dyn.control_dim:
        raise ShapeMismatch("controller output does not match the control dimension")
    J, off = dyn.joint_matrix(substeps)
    layers: list[Layer] = []
    for k in range(m):
        remaining = m - k - 1
        width = s + latent_dims * (remaining + 1)
        carry = list(range(s)) + list(range(s + latent_dims, width))
        period = carry_inputs(n, width, carry)
        # period outputs (x, z_future, u); dynamics give (x_next, z_future)
        fut = latent_dims * remaining
        D = np.zeros((s + fut, s + fut + dyn.control_dim))
        D[:s, :s] = J[:, :s]
        D[:s, s + fut:] = J[:, s:]
        D[s:, s:s + fut] = np.eye(fut)
        bias = np.concatenate([off, np.zeros(fut)])
        layers = _fuse(layers + list(period.layers) + [Affine(D, bias)])
    return Network(layers, s + m * latent_dims)


def lower_clamp_layers(doc: dict) -> dict:
    """Rewrite ``{"type": "clamp01"}`` entries as ReLU algebra (load-time helper)."""
    layers = []
    width = doc["in_dim"]
    for spec in doc["layers"]:
        if spec.get("type") == "clamp01":
            I = np.eye(width)
            layers.append({"type": "affine", "w": np.vstack([I, I]).tolist(),
                           "b": [0.0] * width + [-1.0] * width})
            layers.append({"type": "relu"})
            layers.append({"type": "affine", "w": np.hstack([I, -I]).tolist(), "b": [0.0] * width})
        else:
            if spec.get("type") == "affine":
                width = len(spec["b"])
            layers.append(spec)
    return {"in_dim": doc["in_dim"], "layers": layers}


def load_network(path) -> Network:
    """Load a network file, lowering any ``clamp01`` layers."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as err:
        raise NetworkFormatError(f"malformed JSON: {err}") from None
    if isinstance(doc, dict) and isinstance(doc.get("layers"), list):
        doc = lower_clamp_layers(doc)
    return Network.from_dict(doc)


def save_network(n: Network, path) -> None:
    n.save(path)


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
