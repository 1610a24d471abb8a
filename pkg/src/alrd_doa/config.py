"""Experiment configuration files (YAML).

A config has five optional blocks. Anything left out takes the large-array
defaults (M=60, 15 sources, N=20, I=12, D=5, alpha=0.998, 0.3 degree grid)::

    geometry:   {M: 60, spacing_ratio: 0.5}
    scenario:   {doas: [...], snr: 15, snr_list: [...], N: 20,
                 correlated_pair: [0, 1], rho: 0.7, seed: 0, source_power: 1.0}
    estimators:
      - {method: malrd, I: 12, D: 5, alpha: 0.998, delta: 30.0, delta_aux: 0.1}
      - {method: music, fba: true, K: 15}
    harness:    {trials: 100, grid_start: 0.3, grid_stop: 179.7, grid_step: 0.3}
    output:     {directory: out, emit_plot_script: false}

``correlated_pair`` uses 0-based source indices. ``snr`` drives the spectrum
command; ``snr_list`` drives sweeps (falling back to ``[snr]``). For the RLS
methods ``delta`` and ``delta_aux`` are multiples of the batch's mean
per-sensor power unless ``scale_to_data: false``.
"""
from dataclasses import dataclass, field

import yaml

from .alrd import AlrdConfig
from .errors import ConfigError, DomainError
from .harness import ALL_METHODS, RLS_METHODS, EstimatorSpec
from .signal_model import DEFAULT_DOAS_DEG, SourceScenario, UlaGeometry
from .spectrum import DEFAULT_GRID, angle_grid

DEFAULT_SNR_LIST = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
DEFAULT_METHODS = ("malrd", "alrd", "music", "capon", "esprit")

_BLOCKS = {
    "geometry": {"M", "spacing_ratio"},
    "scenario": {"doas", "snr", "snr_list", "N", "correlated_pair", "rho", "seed", "source_power"},
    "estimators": None,
    "harness": {"trials", "grid_start", "grid_stop", "grid_step"},
    "output": {"directory", "emit_plot_script"},
}
_RLS_KEYS = {"method", "label", "I", "D", "alpha", "delta", "delta_aux", "scale_to_data"}
_BASELINE_KEYS = {"method", "label", "fba", "K"}


@dataclass
class ExperimentConfig:
    geometry: UlaGeometry
    scenario: SourceScenario
    snr_list: list
    estimators: list
    trials: int = 100
    grid: tuple = DEFAULT_GRID
    out_dir: str = "out"
    emit_plot_script: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    def estimator(self, method):
        """The estimator block labelled (or else typed) ``method``; a default one if absent."""
        for spec in self.estimators:
            if spec.label == method:
                return spec
        for spec in self.estimators:
            if spec.method == method:
                return spec
        if method not in ALL_METHODS:
            raise ConfigError(f"unknown method {method!r}; expected one of {ALL_METHODS}")
        return EstimatorSpec(method, rls=_rls_config({}, self.grid) if method in RLS_METHODS else None)


def _check_keys(where, block, allowed):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(block).__name__}")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")


def _num(where, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _flag(where, value):
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true or false, got {value!r}")
    return value


def _rls_config(block, grid, where="estimator"):
    return AlrdConfig(
        basis_len=_num(f"{where}.I", block.get("I", 12), int),
        rank=_num(f"{where}.D", block.get("D", 5), int),
        forget=_num(f"{where}.alpha", block.get("alpha", 0.998)),
        init_scale=_num(f"{where}.delta", block.get("delta", 30.0)),
        aux_init_scale=_num(f"{where}.delta_aux", block.get("delta_aux", 0.1)),
        scale_to_data=_flag(f"{where}.scale_to_data", block.get("scale_to_data", True)),
        grid_start_deg=grid[0],
        grid_stop_deg=grid[1],
        grid_step_deg=grid[2],
    )


def _estimator(i, block, grid, geometry):
    where = f"estimators[{i}]"
    if not isinstance(block, dict) or "method" not in block:
        raise ConfigError(f"{where}: each estimator needs a 'method'")
    method = block["method"]
    if method not in ALL_METHODS:
        raise ConfigError(f"{where}: unknown method {method!r}; expected one of {ALL_METHODS}")
    label = block.get("label")
    if label is not None and not isinstance(label, str):
        raise ConfigError(f"{where}.label: expected a string")
    if method in RLS_METHODS:
        _check_keys(where, block, _RLS_KEYS)
        cfg = _rls_config(block, grid, where)
        if (cfg.rank - 1) * (geometry.num_sensors // cfg.rank) > geometry.num_sensors - 1:
            raise ConfigError(f"{where}: D={cfg.rank} too large for M={geometry.num_sensors}")
        if cfg.basis_len > geometry.num_sensors or cfg.rank > geometry.num_sensors:
            raise ConfigError(f"{where}: I and D must not exceed M")
        return EstimatorSpec(method, rls=cfg, label=label)
    _check_keys(where, block, _BASELINE_KEYS)
    k = block.get("K")
    if k is not None:
        k = _num(f"{where}.K", k, int)
        if not 1 <= k < geometry.num_sensors:
            raise ConfigError(f"{where}.K must lie in [1, M)")
    return EstimatorSpec(method, use_fba=_flag(f"{where}.fba", block.get("fba", True)), num_sources=k, label=label)


def parse_config(doc, seed_override=None):
    """Validate a config mapping and build an :class:`ExperimentConfig`."""
    doc = {} if doc is None else doc
    _check_keys("config", doc, set(_BLOCKS))
    for name, keys in _BLOCKS.items():
        if keys is not None and name in doc:
            _check_keys(name, doc[name], keys)

    try:
        g = doc.get("geometry", {})
        geometry = UlaGeometry(
            _num("geometry.M", g.get("M", 60), int),
            _num("geometry.spacing_ratio", g.get("spacing_ratio", 0.5)),
        )

        h = doc.get("harness", {})
        trials = _num("harness.trials", h.get("trials", 100), int)
        if trials < 1:
            raise ConfigError(f"harness.trials must be >= 1, got {trials}")
        grid = (
            _num("harness.grid_start", h.get("grid_start", DEFAULT_GRID[0])),
            _num("harness.grid_stop", h.get("grid_stop", DEFAULT_GRID[1])),
            _num("harness.grid_step", h.get("grid_step", DEFAULT_GRID[2])),
        )
        angle_grid(*grid)

        s = doc.get("scenario", {})
        doas = s.get("doas", list(DEFAULT_DOAS_DEG))
        if not isinstance(doas, list) or not doas:
            raise ConfigError("scenario.doas: expected a non-empty list of angles")
        doas = [_num("scenario.doas", d) for d in doas]
        snr = _num("scenario.snr", s["snr"]) if "snr" in s else None
        if "snr_list" in s:
            if not isinstance(s["snr_list"], list) or not s["snr_list"]:
                raise ConfigError("scenario.snr_list: expected a non-empty list")
            snr_list = [_num("scenario.snr_list", x) for x in s["snr_list"]]
        else:
            snr_list = [snr] if snr is not None else list(DEFAULT_SNR_LIST)
        if snr is None:
            snr = 15.0 if "snr_list" not in s else snr_list[-1]
        pair = s.get("correlated_pair", [0, 1] if len(doas) >= 2 else None)
        if pair is not None and (not isinstance(pair, list) or len(pair) != 2):
            raise ConfigError("scenario.correlated_pair: expected two source indices or null")
        rho = _num("scenario.rho", s.get("rho", 0.7))
        if not 0.0 <= rho < 1.0:
            raise ConfigError(f"scenario.rho must lie in [0, 1), got {rho}")
        seed = seed_override if seed_override is not None else s.get("seed", 0)
        seed = _num("scenario.seed", seed, int)
        if seed < 0:
            raise ConfigError("scenario.seed must be non-negative")
        scenario = SourceScenario(
            doas_deg=tuple(doas),
            num_snapshots=_num("scenario.N", s.get("N", 20), int),
            source_power=_num("scenario.source_power", s.get("source_power", 1.0)),
            snr_db=snr,
            correlated_pair=None if pair is None else tuple(_num("scenario.correlated_pair", p, int) for p in pair),
            correlation_coeff=rho if pair is not None else 0.0,
            rng_seed=seed,
        )
        if scenario.num_sources >= geometry.num_sensors:
            raise ConfigError("scenario needs fewer sources than sensors")

        blocks = doc.get("estimators", [{"method": m} for m in DEFAULT_METHODS])
        if not isinstance(blocks, list) or not blocks:
            raise ConfigError("estimators: expected a non-empty list")
        estimators = [_estimator(i, b, grid, geometry) for i, b in enumerate(blocks)]
        labels = [e.label for e in estimators]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"estimators: duplicate labels {labels}; set 'label' to tell them apart")

        o = doc.get("output", {})
        out_dir = o.get("directory", "out")
        if not isinstance(out_dir, str):
            raise ConfigError("output.directory: expected a string")
        emit = _flag("output.emit_plot_script", o.get("emit_plot_script", False))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    return ExperimentConfig(
        geometry=geometry,
        scenario=scenario,
        snr_list=snr_list,
        estimators=estimators,
        trials=trials,
        grid=grid,
        out_dir=out_dir,
        emit_plot_script=emit,
        raw=doc,
    )


def load_config(path, seed_override=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    return parse_config(doc, seed_override=seed_override)


def scenario_to_dict(scenario, geometry=None):
    """Config-file blocks describing ``scenario`` (and ``geometry`` if given)."""
    doc = {
        "scenario": {
            "doas": list(scenario.doas_deg),
            "N": scenario.num_snapshots,
            "source_power": scenario.source_power,
            "correlated_pair": None if scenario.correlated_pair is None else list(scenario.correlated_pair),
            "rho": scenario.correlation_coeff,
            "seed": scenario.rng_seed,
        }
    }
    if scenario.snr_db is not None:
        doc["scenario"]["snr"] = scenario.snr_db
    else:
        raise ConfigError("only SNR-specified scenarios can be written to a config")
    if geometry is not None:
        doc["geometry"] = {"M": geometry.num_sensors, "spacing_ratio": geometry.spacing_ratio}
    return doc


def dump_scenario(scenario, geometry=None):
    return yaml.safe_dump(scenario_to_dict(scenario, geometry), sort_keys=False)
