"""Seeded generation of the small surrogate networks and scenario bundles.

Each surrogate is a ReLU MLP fitted (scikit-learn, L-BFGS, fixed seed) to an
ideal observation/controller map with a latent-dependent perturbation, so
that the latent inputs genuinely move the output.  Input and output
normalization are folded into the first and last affine layers, so the
saved network works on raw state units.

Regenerating the shipped files is a maintenance task::

    python -m nncsreach gen --output-dir src/nncsreach/data
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .network import Affine, Network, ReLU

TAXI_P_RANGE = (-11.0, 11.0)
TAXI_THETA_RANGE = (-math.radians(30.0), math.radians(30.0))
TAXI_LATENT = 0.8
BRAKE_D_RANGE = (0.0, 60.0)
BRAKE_V_RANGE = (0.0, 30.0)
BRAKE_LATENT = 1e-2

DEFAULT_SEED = 0
_SAMPLES = 12000


def taxi_observation(x: np.ndarray) -> np.ndarray:
    """Ideal perception map ``(p, theta, z1, z2) -> (p_hat, theta_hat)``."""
    p, th, z1, z2 = x.T
    p_hat = p + 0.3 * z1 + 0.2 * np.tanh(p / 4.0) * z2
    th_hat = th + 0.02 * z2 + 0.01 * z1 * np.cos(3.0 * th)
    return np.stack([p_hat, th_hat], axis=1)


def brake_pre_clamp(x: np.ndarray) -> np.ndarray:
    """Ideal brake command before clamping to [0, 1]."""
    d, v, z1, z2, z3, z4 = x.T
    u = 3.0 * v / (d + 3.0) - 0.3 + 10.0 * z1 - 5.0 * z2 + 5.0 * z3 + 2.5 * z4
    return u[:, None]


def _fit(x: np.ndarray, y: np.ndarray, hidden: tuple[int, ...], seed: int) -> Network:
    from sklearn.neural_network import MLPRegressor

    mu, sd = x.mean(axis=0), x.std(axis=0)
    ymu, ysd = y.mean(axis=0), y.std(axis=0)
    model = MLPRegressor(hidden_layer_sizes=hidden, activation="relu", solver="lbfgs",
                         alpha=1e-6, max_iter=4000, max_fun=40000, tol=1e-10,
                         random_state=seed)
    target = (y - ymu) / ysd
    model.fit((x - mu) / sd, target[:, 0] if target.shape[1] == 1 else target)
    Ws = [np.asarray(w, dtype=float).T for w in model.coefs_]
    bs = [np.asarray(b, dtype=float) for b in model.intercepts_]
    # fold the normalizations into the outer layers
    W0 = Ws[0] / sd
    b0 = bs[0] - W0 @ mu
    Ws[0], bs[0] = W0, b0
    Ws[-1] = Ws[-1] * ysd[:, None]
    bs[-1] = bs[-1] * ysd + ymu
    layers = []
    for k, (W, b) in enumerate(zip(Ws, bs)):
        layers.append(Affine(W, b))
        if k < len(Ws) - 1:
            layers.append(ReLU())
    return Network(layers, x.shape[1])


def _uniform(rng: np.random.Generator, lo, hi, n: int) -> np.ndarray:
    return rng.uniform(np.asarray(lo), np.asarray(hi), size=(n, len(lo)))


def gen_taxi_surrogate(seed: int = DEFAULT_SEED, hidden: tuple[int, ...] = (16, 16)) -> Network:
    """Perception surrogate ``(p, theta, z1, z2) -> (p_hat, theta_hat)``."""
    rng = np.random.default_rng(seed)
    lo = [TAXI_P_RANGE[0], TAXI_THETA_RANGE[0], -TAXI_LATENT, -TAXI_LATENT]
    hi = [TAXI_P_RANGE[1], TAXI_THETA_RANGE[1], TAXI_LATENT, TAXI_LATENT]
    x = _uniform(rng, lo, hi, _SAMPLES)
    return _fit(x, taxi_observation(x), hidden, seed)


def gen_brake_surrogate(seed: int = DEFAULT_SEED, hidden: tuple[int, ...] = (16, 16)) -> Network:
    """Brake controller ``(d, v, z1..z4) -> u`` without its output clamp."""
    rng = np.random.default_rng(seed)
    lo = [BRAKE_D_RANGE[0], BRAKE_V_RANGE[0]] + [-BRAKE_LATENT] * 4
    hi = [BRAKE_D_RANGE[1], BRAKE_V_RANGE[1]] + [BRAKE_LATENT] * 4
    x = _uniform(rng, lo, hi, _SAMPLES)
    # oversample the low-speed band where braking decisions are delicate
    slow = _uniform(rng, lo, [BRAKE_D_RANGE[1], 1.0] + [BRAKE_LATENT] * 4, _SAMPLES // 2)
    x = np.vstack([x, slow])
    return _fit(x, brake_pre_clamp(x), hidden, seed)


def brake_document(n: Network) -> dict:
    """Network document with the output clamp kept as a ``clamp01`` layer."""
    doc = n.to_dict()
    doc["layers"].append({"type": "clamp01"})
    return doc


# golden inputs whose outputs are recorded next to each generated file
TAXI_PROBES = [[0.0, 0.0, 0.0, 0.0], [3.0, 0.1, 0.5, -0.5], [-8.0, -0.3, -0.8, 0.8]]
BRAKE_PROBES = [[30.0, 5.0, 0.0, 0.0, 0.0, 0.0], [59.7, 0.0002, 0.0, 0.0, 0.0, 0.0],
                [5.0, 20.0, 0.01, -0.01, 0.01, -0.01]]


def _dump(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def write_bundle(out_dir, seed: int = DEFAULT_SEED) -> dict:
    """Write both networks plus a manifest of hashes and golden evaluations."""
    from .network import load_network

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    taxi = gen_taxi_surrogate(seed)
    brake = gen_brake_surrogate(seed)
    files = {"taxi_net.json": _dump(taxi.to_dict()), "brake_net.json": _dump(brake_document(brake))}
    manifest = {"seed": seed, "files": {}}
    for name, text in files.items():
        (out / name).write_text(text)
        loaded = load_network(out / name)
        probes = TAXI_PROBES if name.startswith("taxi") else BRAKE_PROBES
        manifest["files"][name] = {
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
            "probes": probes,
            "outputs": loaded.eval(np.asarray(probes)).tolist(),
        }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
