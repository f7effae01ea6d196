import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from nncsreach.cli import DATA_DIR, load_config, parse_config, run

GOLDEN = Path(__file__).parent / "goldens"


def _doc(name):
    return json.loads((DATA_DIR / name).read_text())


def test_forward_taxi_exit_zero_and_golden(tmp_path, capsys):
    assert run(["forward", "--config", "taxi.json", "--output-dir", str(tmp_path)]) == 0
    got = json.loads((tmp_path / "forward_star_m1.json").read_text())
    assert got == json.loads((GOLDEN / "taxi_forward_star_m1.json").read_text())
    assert (tmp_path / "forward_star_m1.csv").read_text().startswith("step,i0,i1,lo0,hi0,lo1,hi1\n")
    assert "converged_at=5" in capsys.readouterr().out


def test_backward_brake_writes_safe_csv(tmp_path):
    code = run(["backward", "--config", "brake.json", "--m", "2", "--output-dir", str(tmp_path)])
    got = json.loads((tmp_path / "backward_ibp_m2.json").read_text())
    assert got == json.loads((GOLDEN / "brake_backward_ibp_m2.json").read_text())
    csv = (tmp_path / "backward_ibp_m2_safe.csv").read_text().splitlines()
    assert csv[0] == "tag,i0,i1,lo0,hi0,lo1,hi1"
    assert len(csv) - 1 == len(got["safe"])
    assert code == (0 if got["safe"] else 1)


def test_backward_fine_grid_has_safe_cells(tmp_path):
    assert run(["backward", "--config", "brake_fine.json", "--m", "2", "--output-dir", str(tmp_path)]) == 0
    rows = (tmp_path / "backward_ibp_m2_safe.csv").read_text().splitlines()[1:]
    assert len(rows) == 835


def test_missing_config_exit_two():
    proc = subprocess.run([sys.executable, "-m", "nncsreach", "forward", "--config", "nope/none.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "not found" in proc.stderr


def test_bad_arguments_exit_two():
    assert run(["forward"]) == 2
    assert run(["explode", "--config", "taxi.json"]) == 2


def test_unknown_key_rejected(tmp_path, capsys):
    doc = _doc("taxi.json")
    doc["colour"] = "red"
    doc["network"] = str(DATA_DIR / "taxi_net.json")
    (tmp_path / "c.json").write_text(json.dumps(doc))
    assert run(["forward", "--config", str(tmp_path / "c.json")]) == 2
    assert "colour" in capsys.readouterr().err


def test_incompatible_engine_has_hint(capsys):
    assert run(["forward", "--config", "taxi.json", "--engine", "ibp"]) == 2
    assert "use engine 'star'" in capsys.readouterr().err
    assert run(["forward", "--config", "taxi.json", "--engine", "baseline", "--m", "2"]) == 2


def test_degree_keys_converted():
    rc = load_config("taxi.json")
    assert rc.scenario.grid.bounds.hi[1] == pytest.approx(math.radians(30))
    assert rc.initial.lo[1] == pytest.approx(math.radians(-5))


def test_unsafe_box_fills_missing_variables():
    rc = load_config("taxi.json")
    u = rc.scenario.unsafe[0]
    g = rc.scenario.grid
    assert u.lo[1] < g.bounds.lo[1] and u.hi[1] > g.bounds.hi[1]


@pytest.mark.parametrize("patch, msg", [
    ({"grid": {"counts": [0, 3], "bounds": {"p": [0, 1], "theta": [0, 1]}}}, "grid.counts"),
    ({"latent": []}, "latent"),
    ({"absorbing": [["q", "lo"]]}, "absorbing"),
    ({"initial": {"p": [2, 1], "theta": [0, 0]}}, "lo <= hi"),
    ({"dynamics": {"v": -1}}, "dynamics"),
])
def test_config_errors(patch, msg):
    doc = _doc("taxi.json")
    doc.update(patch)
    with pytest.raises(ValueError, match=msg):
        parse_config(doc, DATA_DIR)


def test_gen_subcommand(tmp_path, capsys):
    assert run(["gen", "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / "taxi_net.json").read_bytes() == (DATA_DIR / "taxi_net.json").read_bytes()
    assert "taxi_net.json" in capsys.readouterr().out


def test_forward_without_fixpoint_is_inconclusive(tmp_path, capsys):
    # the fine braking grid at one period keeps creeping towards d = 0
    assert run(["forward", "--config", "brake_fine.json", "--output-dir", str(tmp_path)]) == 1
    assert "inconclusive" in capsys.readouterr().out
