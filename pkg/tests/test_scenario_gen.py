import numpy as np
import pytest

from nncsreach.cli import DATA_DIR
from nncsreach.network import load_network
from nncsreach.scenario_gen import brake_pre_clamp, taxi_observation, write_bundle


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    return out, write_bundle(out, seed=0)


@pytest.mark.parametrize("name", ["taxi_net.json", "brake_net.json", "manifest.json"])
def test_regeneration_is_bit_identical(bundle, name):
    out, _ = bundle
    assert (out / name).read_bytes() == (DATA_DIR / name).read_bytes()


def test_taxi_surrogate_tracks_state_at_zero_latent():
    n = load_network(DATA_DIR / "taxi_net.json")
    rng = np.random.default_rng(0)
    x = np.column_stack([rng.uniform(-10, 10, 2000), rng.uniform(-0.5, 0.5, 2000), np.zeros((2000, 2))])
    err = np.abs(n.eval(x) - x[:, :2])
    assert err[:, 0].max() < 0.2 and err[:, 1].max() < 0.01
    assert err[:, 0].mean() < 0.05


def test_taxi_surrogate_fits_target_map():
    n = load_network(DATA_DIR / "taxi_net.json")
    rng = np.random.default_rng(1)
    x = np.column_stack([rng.uniform(-11, 11, 5000), rng.uniform(-0.5, 0.5, 5000),
                         rng.uniform(-0.8, 0.8, (5000, 2))])
    err = np.abs(n.eval(x) - taxi_observation(x))
    assert err.mean(axis=0)[0] < 0.05 and err.mean(axis=0)[1] < 0.005


def test_latents_move_the_outputs():
    taxi = load_network(DATA_DIR / "taxi_net.json")
    x = np.array([[2.0, 0.1, 0.0, 0.0]])
    dz = np.array([[0, 0, 0.1, 0]])
    assert abs(taxi.eval(x + dz)[0, 0] - taxi.eval(x - dz)[0, 0]) / 0.2 > 0.1
    brake = load_network(DATA_DIR / "brake_net.json")
    y = np.array([[30.0, 5.0, 0, 0, 0, 0]])
    dz = np.array([[0, 0, 0.005, 0, 0, 0]])
    assert abs(brake.eval(y + dz)[0, 0] - brake.eval(y - dz)[0, 0]) / 0.01 > 1.0


def test_brake_surrogate_is_clamped_and_close():
    n = load_network(DATA_DIR / "brake_net.json")
    rng = np.random.default_rng(2)
    x = np.column_stack([rng.uniform(0, 60, 5000), rng.uniform(0, 30, 5000),
                         rng.uniform(-0.01, 0.01, (5000, 4))])
    u = n.eval(x)[:, 0]
    assert u.min() >= 0.0 and u.max() <= 1.0
    ref = np.clip(brake_pre_clamp(x)[:, 0], 0, 1)
    assert np.abs(u - ref).mean() < 0.03


def test_manifest_records_probes(bundle):
    _, manifest = bundle
    for entry in manifest["files"].values():
        assert len(entry["probes"]) == len(entry["outputs"]) == 3
        assert len(entry["sha256"]) == 64
