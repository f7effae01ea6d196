"""Batch front end.

Usage::

    python -m nncsreach forward  --config taxi.json [--engine star] [--m 2]
    python -m nncsreach backward --config brake.json --m 2
    python -m nncsreach simulate --config brake.json
    python -m nncsreach maps     --config brake_fine.json
    python -m nncsreach gen      --output-dir DIR [--seed 0]

Exit status: 0 verified safe, 1 unsafe or inconclusive, 2 configuration or
analysis error.  A bare config name that does not exist in the working
directory is looked up among the shipped scenarios.

Config documents are strict JSON objects (unknown keys are rejected)::

    {
      "name": "taxi",
      "plant": "taxi",                      # or "brake"
      "network": "taxi_net.json",           # relative to the config file
      "dynamics": {"v": 5, "L": 5, "dt": 0.05, "substeps": 20},
      "grid": {"counts": [32, 32],
               "bounds": {"p": [-11, 11], "theta_deg": [-30, 30]}},
      "latent": [[-0.8, 0.8], [-0.8, 0.8]],
      "unsafe": [{"p": [-11, -10]}, {"p": [10, 11]}],
      "initial": {"p": [-5, 5], "theta_deg": [-5, 5]},
      "engine": "star", "m": 1, "k_max": 50,
      "absorbing": [],
      "simulate": {"runs_per_cell": 500, "horizon": 60},
      "split_cap": 4096, "eps_shrink": false,
      "seed": 0, "workers": 1, "output_dir": "out"
    }

State boxes are keyed by variable name (taxi: ``p``, ``theta``; brake:
``d``, ``v``); angles may be given in degrees with a ``_deg`` suffix.  A
variable missing from an unsafe box spans the whole grid in that dimension.
``absorbing`` lists grid faces as ``[variable, "lo"|"hi"]``; the shipped
braking scenarios absorb ``["v", "lo"]`` (the vehicle stopped) and
``["d", "hi"]`` (only reachable by the unclipped interval extension of an
already stopped state) and run with engine ``ibp``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .dynamics import BrakeParams, TaxiParams
from .grid import Grid, OutOfDomain, alpha
from .interval import Box
from .network import NetworkFormatError, load_network
from .propagation import DEFAULT_SPLIT_CAP
from .reach import (ConfigError, Scenario, backward_reach, build_transition_maps, cells_csv,
                    default_workers, forward_reach, safe_cells, simulate_cells)

DATA_DIR = Path(__file__).parent / "data"

STATE_VARS = {"taxi": ("p", "theta"), "brake": ("d", "v")}
ANGLE_VARS = {"theta"}
DYNAMICS_KEYS = {"taxi": {"v", "L", "dt", "substeps"}, "brake": {"dt", "substeps"}}
TOP_KEYS = {"name", "plant", "network", "dynamics", "grid", "latent", "unsafe", "initial",
            "engine", "m", "k_max", "absorbing", "simulate", "split_cap", "eps_shrink",
            "seed", "workers", "output_dir"}
REQUIRED = {"plant", "network", "grid", "latent"}


@dataclass
class RunConfig:
    scenario: Scenario
    initial: Box | None
    runs_per_cell: int
    horizon: int
    seed: int
    workers: int
    output_dir: Path


def _strict(doc, allowed: set, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _pair(v, where: str) -> tuple[float, float]:
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        raise ConfigError(f"{where} must be a [lo, hi] pair of numbers")
    lo, hi = float(v[0]), float(v[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise ConfigError(f"{where} must satisfy lo <= hi with finite values")
    return lo, hi


def _state_box(doc, names, where: str, fill: Box | None = None) -> Box:
    allowed = set(names) | {f"{n}_deg" for n in names if n in ANGLE_VARS}
    _strict(doc, allowed, where)
    lo, hi = [], []
    for d, n in enumerate(names):
        if n in doc and f"{n}_deg" in doc:
            raise ConfigError(f"{where}: give either '{n}' or '{n}_deg', not both")
        if n in doc:
            a, b = _pair(doc[n], f"{where}.{n}")
        elif f"{n}_deg" in doc:
            a, b = (math.radians(x) for x in _pair(doc[f"{n}_deg"], f"{where}.{n}_deg"))
        elif fill is not None:
            a, b = float(fill.lo[d]), float(fill.hi[d])
        else:
            raise ConfigError(f"{where} is missing variable '{n}'")
        lo.append(a)
        hi.append(b)
    return Box(lo, hi)


def _int(doc, key, default, lo=1):
    v = doc.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise ConfigError(f"'{key}' must be an integer >= {lo}")
    return v


def resolve_config_path(path: str | Path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    shipped = DATA_DIR / p.name
    if p.parent == Path(".") and shipped.exists():
        return shipped
    raise FileNotFoundError(f"config file not found: {path}")


def parse_config(doc: dict, base_dir: Path = Path("."), overrides: dict | None = None) -> RunConfig:
    """Validate a config document and build the scenario it describes."""
    _strict(doc, TOP_KEYS, "config")
    doc = dict(doc)
    for k, v in (overrides or {}).items():
        if v is not None:
            doc[k] = v
    missing = REQUIRED - set(doc)
    if missing:
        raise ConfigError(f"config is missing: {', '.join(sorted(missing))}")
    plant = doc["plant"]
    if plant not in STATE_VARS:
        raise ConfigError(f"plant must be one of {sorted(STATE_VARS)}")
    names = STATE_VARS[plant]
    dyn_doc = doc.get("dynamics", {})
    _strict(dyn_doc, DYNAMICS_KEYS[plant], "dynamics")
    try:
        dynamics = TaxiParams(**dyn_doc) if plant == "taxi" else BrakeParams(**dyn_doc)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"dynamics: {err}") from None
    gdoc = doc["grid"]
    _strict(gdoc, {"counts", "bounds"}, "grid")
    bounds = _state_box(gdoc.get("bounds", {}), names, "grid.bounds")
    counts = gdoc.get("counts")
    if not isinstance(counts, list) or len(counts) != len(names) or \
            not all(isinstance(c, int) and not isinstance(c, bool) and c >= 1 for c in counts):
        raise ConfigError("grid.counts must list one positive integer per state variable")
    try:
        grid = Grid(bounds, tuple(counts))
    except ValueError as err:
        raise ConfigError(f"grid: {err}") from None
    lat = doc["latent"]
    if not isinstance(lat, list) or not lat:
        raise ConfigError("latent must be a non-empty list of [lo, hi] pairs")
    pairs = [_pair(v, f"latent[{k}]") for k, v in enumerate(lat)]
    latent = Box([a for a, _ in pairs], [b for _, b in pairs])
    unsafe_doc = doc.get("unsafe", [])
    if not isinstance(unsafe_doc, list):
        raise ConfigError("unsafe must be a list of boxes")
    wide = Box(grid.bounds.lo - grid.widths, grid.bounds.hi + grid.widths)
    unsafe = [_state_box(u, names, f"unsafe[{k}]", fill=wide) for k, u in enumerate(unsafe_doc)]
    initial = _state_box(doc["initial"], names, "initial") if "initial" in doc else None
    absorbing = []
    for k, face in enumerate(doc.get("absorbing", [])):
        if not (isinstance(face, list) and len(face) == 2 and face[0] in names and face[1] in ("lo", "hi")):
            raise ConfigError(f"absorbing[{k}] must look like [\"{names[-1]}\", \"lo\"]")
        absorbing.append((names.index(face[0]), face[1]))
    sim = doc.get("simulate", {})
    _strict(sim, {"runs_per_cell", "horizon"}, "simulate")
    eps = doc.get("eps_shrink", False)
    if not isinstance(eps, bool):
        raise ConfigError("eps_shrink must be true or false")
    net_path = Path(doc["network"])
    if not net_path.is_absolute():
        net_path = base_dir / net_path
    try:
        network = load_network(net_path)
    except FileNotFoundError:
        raise ConfigError(f"network file not found: {net_path}") from None
    except NetworkFormatError as err:
        raise ConfigError(f"network {net_path}: {err}") from None
    name = doc.get("name", plant)
    if not isinstance(name, str):
        raise ConfigError("name must be a string")
    scenario = Scenario(network=network, dynamics=dynamics, grid=grid, latent_box=latent,
                        unsafe=tuple(unsafe), engine=doc.get("engine", "star"),
                        m=_int(doc, "m", 1), k_max=_int(doc, "k_max", 50), absorbing=tuple(absorbing),
                        split_cap=_int(doc, "split_cap", DEFAULT_SPLIT_CAP), eps_shrink=eps, name=name)
    out = doc.get("output_dir", "out")
    if not isinstance(out, str):
        raise ConfigError("output_dir must be a string")
    workers = doc.get("workers")
    workers = default_workers() if workers is None else _int(doc, "workers", 1)
    return RunConfig(scenario, initial, _int(sim, "runs_per_cell", 500), _int(sim, "horizon", 60),
                     _int(doc, "seed", 0, lo=0), workers, Path(out))


def load_config(path, overrides: dict | None = None) -> RunConfig:
    p = resolve_config_path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"{p}: malformed JSON: {err}") from None
    return parse_config(doc, p.parent, overrides)


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _cmd_forward(rc: RunConfig) -> int:
    if rc.initial is None:
        raise ConfigError("forward analysis needs an 'initial' box")
    sc = rc.scenario
    res = forward_reach(sc, rc.initial, workers=rc.workers)
    stem = f"forward_{sc.engine}_m{sc.m}"
    _write(rc.output_dir, stem + ".json", res.to_json())
    _write(rc.output_dir, stem + ".csv", res.to_csv(sc.grid))
    print(f"{sc.name}: {len(res.global_cells)} cells, converged_at={res.converged_at}, "
          f"safe={res.is_safe}")
    if res.converged_at is None:
        # no fixpoint within k_max: the verdict only covers the periods analysed
        print(f"{sc.name}: no fixpoint within k_max={sc.k_max}; result inconclusive")
        return 1
    return 0 if res.is_safe else 1


def _cmd_backward(rc: RunConfig) -> int:
    sc = rc.scenario
    unsafe = backward_reach(sc, workers=rc.workers)
    safe = safe_cells(sc, unsafe)
    stem = f"backward_{sc.engine}_m{sc.m}"
    _write(rc.output_dir, stem + ".json",
           _dumps({"m": sc.m, "unsafe": unsafe.to_list(), "safe": safe.to_list()}))
    _write(rc.output_dir, stem + "_safe.csv", cells_csv(list(safe), sc.grid, label="tag"))
    print(f"{sc.name}: {len(safe)} of {sc.grid.total_cells} cells proven safe (m={sc.m})")
    if rc.initial is not None:
        return 0 if alpha(rc.initial, sc.grid, sc.eps_shrink) <= safe else 1
    return 0 if safe else 1


def _cmd_simulate(rc: RunConfig) -> int:
    sc = rc.scenario
    flagged = simulate_cells(sc, rc.runs_per_cell, rc.horizon, seed=rc.seed)
    _write(rc.output_dir, "simulate.json",
           _dumps({"runs_per_cell": rc.runs_per_cell, "horizon": rc.horizon, "seed": rc.seed,
                   "unsafe": flagged.to_list()}))
    _write(rc.output_dir, "simulate_unsafe.csv", cells_csv(list(flagged), sc.grid, label="tag"))
    print(f"{sc.name}: {len(flagged)} cells reach the unsafe set in simulation")
    if rc.initial is not None:
        return 0 if alpha(rc.initial, sc.grid).isdisjoint(flagged) else 1
    return 0 if not flagged else 1


def _cmd_maps(rc: RunConfig) -> int:
    sc = rc.scenario
    maps = build_transition_maps(sc, workers=rc.workers)
    _write(rc.output_dir, f"maps_{sc.engine}_m{sc.m}.json", _dumps(maps.to_dict()))
    print(f"{sc.name}: transition maps for i = 1..{sc.m} over {sc.grid.total_cells} cells")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nncsreach", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("forward", "backward", "simulate", "maps"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--m", type=int)
        p.add_argument("--engine", choices=("baseline", "ibp", "star"))
        p.add_argument("--workers", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir")
    g = sub.add_parser("gen")
    g.add_argument("--output-dir", required=True)
    g.add_argument("--seed", type=int, default=0)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "gen":
            from .scenario_gen import write_bundle
            manifest = write_bundle(args.output_dir, args.seed)
            for name, info in sorted(manifest["files"].items()):
                print(f"{name} {info['sha256']}")
            return 0
        overrides = {"m": args.m, "engine": args.engine, "workers": args.workers,
                     "seed": args.seed, "output_dir": args.output_dir}
        rc = load_config(args.config, overrides)
        handler = {"forward": _cmd_forward, "backward": _cmd_backward,
                   "simulate": _cmd_simulate, "maps": _cmd_maps}[args.command]
        return handler(rc)
    except (ConfigError, FileNotFoundError, OutOfDomain) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(run())
