import json

import numpy as np
import pytest

from nncsreach.dynamics import BRAKE_GAIN, BRAKE_OFFSET, BrakeParams, brake_affine, taxi_control_matrix
from nncsreach.network import (Affine, Network, NetworkFormatError, ReLU, ShapeMismatch,
                               append_affine, append_clamp01, build_state_passthrough, file_sha256,
                               identity_network, load_network, save_network, unroll_affine_system)
from nncsreach.dynamics import AffineDynamics
from nncsreach.scenario_gen import gen_taxi_surrogate

from conftest import random_net

DATA = __import__("nncsreach.cli", fromlist=["DATA_DIR"]).DATA_DIR
MANIFEST = json.loads((DATA / "manifest.json").read_text())


def test_identity_eval(rng):
    x = rng.normal(size=4)
    np.testing.assert_array_equal(identity_network(4).eval(x), x)


def test_single_relu():
    np.testing.assert_array_equal(Network([ReLU()], 2).eval([-3.0, 2.0]), [0.0, 2.0])


def test_batch_eval_matches_rows(rng):
    n = random_net(rng, [3, 6, 2])
    xs = rng.normal(size=(10, 3))
    np.testing.assert_allclose(n.eval(xs), np.array([n.eval(x) for x in xs]), rtol=0, atol=1e-15)


def test_shape_mismatch_on_eval(rng):
    with pytest.raises(ShapeMismatch):
        random_net(rng, [3, 4, 1]).eval(np.zeros(2))


@pytest.mark.parametrize("name", ["taxi_net.json", "brake_net.json"])
def test_shipped_networks_match_recorded_probes(name):
    entry = MANIFEST["files"][name]
    n = load_network(DATA / name)
    np.testing.assert_allclose(n.eval(np.array(entry["probes"])), entry["outputs"], rtol=0, atol=1e-12)


@pytest.mark.parametrize("name", ["taxi_net.json", "brake_net.json"])
def test_shipped_network_hashes(name):
    assert file_sha256(DATA / name) == MANIFEST["files"][name]["sha256"]


def test_shipped_networks_are_small():
    for name in ("taxi_net.json", "brake_net.json"):
        doc = json.loads((DATA / name).read_text())
        affine = [l for l in doc["layers"] if l["type"] == "affine"]
        assert len(affine) <= 6
        assert max(len(l["b"]) for l in affine) <= 64


# -- serialization ------------------------------------------------------------

def test_roundtrip_is_bit_identical(rng, tmp_path):
    n = random_net(rng, [3, 8, 8, 2])
    save_network(n, tmp_path / "n.json")
    m = Network.load(tmp_path / "n.json")
    for a, b in zip(n.affine_layers, m.affine_layers):
        assert np.array_equal(a.W, b.W) and np.array_equal(a.b, b.b)
    assert (tmp_path / "n.json").read_text() == n.dumps()


def test_missing_bias_names_the_layer():
    doc = {"in_dim": 1, "layers": [{"type": "relu"}, {"type": "affine", "w": [[1.0]]}]}
    with pytest.raises(NetworkFormatError, match="layer 1"):
        Network.from_dict(doc)


@pytest.mark.parametrize("text", [
    '{"in_dim": 1, "layers": [{"type": "affine", "w": [[NaN]], "b": [0]}]}',
    '{"in_dim": 1, "layers": [{"type": "affine", "w": [[Infinity]], "b": [0]}]}',
    '{"in_dim": 1, "layers": [{"type": "affine", "w": [[1, 2]], "b": [0]}]}',
    '{"in_dim": 1, "layers": [{"type": "conv"}]}',
    '{"in_dim": 1, "layers": []',
])
def test_malformed_documents_rejected(text):
    with pytest.raises(NetworkFormatError):
        Network.loads(text)


def test_clamp_layer_lowered_on_load(tmp_path):
    doc = {"in_dim": 1, "layers": [{"type": "affine", "w": [[2.0]], "b": [-0.5]}, {"type": "clamp01"}]}
    (tmp_path / "c.json").write_text(json.dumps(doc))
    n = load_network(tmp_path / "c.json")
    assert all(isinstance(l, (Affine, ReLU)) for l in n.layers)
    xs = np.linspace(-2, 2, 101)[:, None]
    np.testing.assert_allclose(n.eval(xs)[:, 0], np.clip(2 * xs[:, 0] - 0.5, 0, 1), atol=1e-15)


def test_append_clamp01(rng):
    n = append_clamp01(random_net(rng, [2, 5, 1], scale=3.0))
    ys = n.eval(rng.normal(size=(500, 2)) * 3)
    assert ys.min() >= 0 and ys.max() <= 1


# -- append_affine --------------------------------------------------------------

def test_append_identity_keeps_eval(rng):
    n = random_net(rng, [3, 5, 2])
    m = append_affine(n, np.eye(2))
    xs = rng.normal(size=(100, 3))
    np.testing.assert_allclose(m.eval(xs), n.eval(xs), atol=1e-14)


def test_append_brake_deceleration_row(rng):
    n = append_clamp01(random_net(rng, [6, 8, 1], scale=2.0))
    a = append_affine(n, [[BRAKE_GAIN]], [BRAKE_OFFSET])
    xs = rng.normal(size=(200, 6))
    u = n.eval(xs)[:, 0]
    np.testing.assert_allclose(a.eval(xs)[:, 0], 0.009 * u + 0.0042, atol=1e-15)
    assert a.eval(xs).min() >= 0.0042 - 1e-15 and a.eval(xs).max() <= 0.0132 + 1e-15


def test_double_append_composes(rng):
    n = random_net(rng, [3, 4, 2])
    A1, b1 = rng.normal(size=(3, 2)), rng.normal(size=3)
    A2, b2 = rng.normal(size=(2, 3)), rng.normal(size=2)
    two = append_affine(append_affine(n, A1, b1), A2, b2)
    one = append_affine(n, A2 @ A1, A2 @ b1 + b2)
    assert np.allclose(two.layers[-1].W, one.layers[-1].W) and np.allclose(two.layers[-1].b, one.layers[-1].b)
    xs = rng.normal(size=(50, 3))
    np.testing.assert_allclose(two.eval(xs), one.eval(xs), atol=1e-12)


def test_append_shape_mismatch(rng):
    with pytest.raises(ShapeMismatch):
        append_affine(random_net(rng, [3, 4, 2]), np.eye(3))


# -- passthrough ------------------------------------------------------------------

def test_passthrough_on_identity(rng):
    n = build_state_passthrough(identity_network(4), 2)
    x = rng.normal(size=4)
    np.testing.assert_array_equal(n.eval(x), np.concatenate([x[:2], x]))


def test_passthrough_carries_states_exactly(rng):
    base = random_net(rng, [4, 8, 8, 2])
    n = build_state_passthrough(base, 2)
    xs = rng.normal(size=(1000, 4)) * 10       # many negative states
    out = n.eval(xs)
    assert np.array_equal(out[:, :2], xs[:, :2])
    np.testing.assert_allclose(out[:, 2:], base.eval(xs), atol=1e-12)


def test_passthrough_with_taxi_control_map():
    n = build_state_passthrough(append_affine(gen_taxi_surrogate(0), taxi_control_matrix()), 2)
    rng = np.random.default_rng(5)
    xs = np.column_stack([rng.uniform(-10, 10, 300), rng.uniform(-0.5, 0.5, 300),
                          rng.uniform(-0.8, 0.8, (300, 2))])
    out = n.eval(xs)
    obs = gen_taxi_surrogate(0).eval(xs)
    phi_deg = np.degrees(out[:, 2])
    np.testing.assert_allclose(phi_deg, -0.74 * obs[:, 0] - 0.44 * np.degrees(obs[:, 1]), atol=1e-9)
    assert np.array_equal(out[:, :2], xs[:, :2])


# -- unrolling ------------------------------------------------------------------

def _identity_system():
    ctrl = Network([Affine(np.zeros((1, 3)), np.zeros(1))], 3)
    dyn = AffineDynamics(np.eye(2), np.zeros((2, 1)), np.zeros(2))
    return ctrl, dyn


def test_unroll_identity_fixed_point(rng):
    ctrl, dyn = _identity_system()
    u = unroll_affine_system(ctrl, dyn, m=1, latent_dims=1)
    x = rng.normal(size=3)
    np.testing.assert_array_equal(u.eval(x), x[:2])


@pytest.mark.parametrize("m", [1, 2, 3])
def test_unroll_input_width(m):
    ctrl, dyn = _identity_system()
    assert unroll_affine_system(ctrl, dyn, m=m, latent_dims=1).in_dim == 2 + m


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("substeps", [1, 2, 4])
def test_unrolled_brake_equals_iterated_period(m, substeps):
    ctrl = load_network(DATA / "brake_net.json")
    dyn = brake_affine(BrakeParams(substeps=substeps))
    net = unroll_affine_system(ctrl, dyn, m=m, latent_dims=4)
    rng = np.random.default_rng(m * 10 + substeps)
    x = np.column_stack([rng.uniform(0, 60, 1000), rng.uniform(0, 30, 1000)])
    zs = [rng.uniform(-0.01, 0.01, (1000, 4)) for _ in range(m)]
    ref = x
    for z in zs:
        ref = dyn.step(ref, ctrl.eval(np.hstack([ref, z])))
    got = net.eval(np.hstack([x] + zs))
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-10)


def test_unroll_rejects_nonaffine():
    with pytest.raises(TypeError):
        unroll_affine_system(identity_network(3), object(), m=1)
