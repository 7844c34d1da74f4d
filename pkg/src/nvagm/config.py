"""Experiment configuration: TOML schema, problem-default merging, presets.

A config names a registered problem and overrides whatever run parameters
it cares about; everything left unset falls back to the problem's defaults.
Unknown keys are rejected so typos fail loudly instead of silently running
the default.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .estimation import UtilityScheme, utility_cmaes, utility_truncation
from .objectives import get_problem
from .optimizers import ALGORITHMS, RunConfig, Schedule

__all__ = [
    "ExperimentConfig",
    "config_from_dict",
    "config_from_toml",
    "config_to_dict",
    "config_to_toml_str",
    "resolve_run",
    "build_utilities",
    "PRESET_NAMES",
    "get_preset",
]

_INT_KEYS = {"K", "B", "T", "kappa", "mu_variant", "s_variant", "replicates", "seed"}
_FLOAT_KEYS = {"omega1", "alpha", "rho1", "beta", "tau", "sigma0", "epsilon"}
_STR_KEYS = {"problem", "algorithm", "precision_rule", "out_dir"}
_DICT_KEYS = {"utilities", "init"}
ALLOWED_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _DICT_KEYS


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment as written in TOML; None means inherit the default."""

    problem: str
    algorithm: str = None
    K: int = None
    B: int = None
    T: int = None
    omega1: float = None
    alpha: float = None
    rho1: float = None
    beta: float = None
    kappa: int = None
    tau: float = None
    mu_variant: int = None
    s_variant: int = None
    precision_rule: str = None
    utilities: dict = None
    init: dict = None
    sigma0: float = None
    epsilon: float = None
    replicates: int = None
    seed: int = None
    out_dir: str = None


def config_from_dict(raw: dict) -> ExperimentConfig:
    unknown = sorted(set(raw) - ALLOWED_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    if "problem" not in raw:
        raise ValueError("missing required key: problem")
    clean = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"key {key} must be an integer, got {value!r}")
        elif key in _FLOAT_KEYS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"key {key} must be a number, got {value!r}")
            value = float(value)
        elif key in _STR_KEYS:
            if not isinstance(value, str):
                raise ValueError(f"key {key} must be a string, got {value!r}")
        elif key in _DICT_KEYS and not isinstance(value, dict):
            raise ValueError(f"key {key} must be a table, got {value!r}")
        clean[key] = value
    _validate_utilities(clean.get("utilities"))
    _validate_init(clean.get("init"))
    return ExperimentConfig(**clean)


def _validate_utilities(util):
    if util is None:
        return
    extra = sorted(set(util) - {"kind", "eta", "B0"})
    if extra:
        raise ValueError(f"unknown utilities keys: {', '.join(extra)}")
    kind = util.get("kind")
    if kind not in ("truncation", "cmaes"):
        raise ValueError(f"utilities.kind must be truncation or cmaes, got {kind!r}")
    if ("eta" in util) == ("B0" in util):
        raise ValueError("utilities needs exactly one of eta or B0")


def _validate_init(init):
    if init is None:
        return
    extra = sorted(set(init) - {"lo", "hi", "means"})
    if extra:
        raise ValueError(f"unknown init keys: {', '.join(extra)}")
    has_box = "lo" in init or "hi" in init
    if "means" in init:
        if has_box:
            raise ValueError("init takes either means or a lo/hi box, not both")
    elif not ("lo" in init and "hi" in init):
        raise ValueError("init box needs both lo and hi")


def config_from_toml(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        return config_from_dict(tomllib.load(fh))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {k: v for k, v in asdict(cfg).items() if v is not None}


def _toml_scalar(value):
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float):
        out = repr(value)
        return out if ("." in out or "e" in out or "inf" in out) else out + ".0"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    return repr(value)


def config_to_toml_str(cfg: ExperimentConfig) -> str:
    """Emit exactly the keys that are set; tables last, per TOML rules."""
    data = config_to_dict(cfg)
    lines = [
        f"{key} = {_toml_scalar(data[key])}"
        for key in data
        if key not in _DICT_KEYS
    ]
    for key in _DICT_KEYS:
        if key in data:
            lines.append("")
            lines.append(f"[{key}]")
            lines.extend(f"{k} = {_toml_scalar(v)}" for k, v in data[key].items())
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ resolution


def build_utilities(spec: dict, batch: int) -> UtilityScheme:
    """Instantiate a utility scheme from its config table."""
    _validate_utilities(spec)
    if "B0" in spec:
        keep = int(spec["B0"])
    else:
        keep = int(np.floor(batch * float(spec["eta"]) + 0.5))
    if spec["kind"] == "cmaes":
        return utility_cmaes(batch, keep)
    if keep <= 0 or keep > batch:
        raise ValueError(f"truncation keeps {keep} of {batch} samples")
    return utility_truncation(batch, keep / batch)


def _require(merged, key):
    value = merged.get(key)
    if value is None:
        raise ValueError(f"missing required key: {key}")
    return value


def resolve_run(cfg: ExperimentConfig):
    """Merge config over problem defaults into a RunConfig plus bench options.

    Returns (run_config, options) where options carries epsilon, replicates,
    and out_dir for the benchmark layer.
    """
    bundle = get_problem(cfg.problem)
    merged = dict(bundle.defaults)
    fs_over = merged.pop("fs", None)
    if (cfg.algorithm or merged.get("algorithm")) == "fs-nva-gm" and fs_over:
        # rank-based updates need their own defaults: the growing learning
        # rates tuned for the derivative estimators destabilize them
        merged.update(fs_over)
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is not None and f.name not in ("problem", "out_dir", "replicates"):
            merged[f.name] = value

    algorithm = _require(merged, "algorithm")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    n_components = int(_require(merged, "K"))
    batch = int(_require(merged, "B"))
    if n_components < 1:
        raise ValueError("K must be at least 1")
    if batch < 1:
        raise ValueError("B must be at least 1")
    schedule = Schedule(
        omega1=float(_require(merged, "omega1")),
        alpha=float(merged.get("alpha", 0.0) if merged.get("alpha") is not None else 0.0),
        rho1=float(_require(merged, "rho1")),
        beta=float(merged.get("beta", 0.0) if merged.get("beta") is not None else 0.0),
        steps=int(_require(merged, "T")),
        kappa=int(merged.get("kappa") or 0),
        tau=float(merged.get("tau") or 0.0),
    )

    utilities = None
    util_spec = merged.get("utilities")
    if util_spec is not None and algorithm in ("fs-nva-gm", "pcmaes"):
        utilities = build_utilities(util_spec, batch)
    elif algorithm == "fs-nva-gm":
        raise ValueError("fs-nva-gm requires a utilities table")

    init_means = init_lo = init_hi = None
    if cfg.init is not None:
        _validate_init(cfg.init)
        if "means" in cfg.init:
            init_means = np.asarray(cfg.init["means"], dtype=float)
        else:
            init_lo = np.asarray(cfg.init["lo"], dtype=float)
            init_hi = np.asarray(cfg.init["hi"], dtype=float)

    run_config = RunConfig(
        problem=bundle,
        algorithm=algorithm,
        n_components=n_components,
        batch=batch,
        schedule=schedule,
        mu_variant=int(merged.get("mu_variant", 1)),
        s_variant=int(merged.get("s_variant", 2)),
        utilities=utilities,
        init_means=init_means,
        init_lo=init_lo,
        init_hi=init_hi,
        sigma0=float(merged.get("sigma0", 1.0)),
        fixed_omega=float(merged["omega1"]) if algorithm == "snga" else None,
        seed=int(merged.get("seed") or 0),
    )
    replicates = cfg.replicates if cfg.replicates is not None else 10
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    options = {
        "epsilon": float(merged.get("epsilon", 0.1)),
        "replicates": int(replicates),
        "out_dir": cfg.out_dir,
    }
    return run_config, options


# ------------------------------------------------------------------ presets


def _sym_algo_config(algorithm, k, seed=0):
    base = dict(problem="sym-gmm", algorithm=algorithm, K=k, replicates=100, seed=seed)
    if algorithm == "fs-nva-gm":
        base.update(B=16, utilities={"kind": "cmaes", "B0": 4})
    elif algorithm == "pcmaes":
        base.update(B=16, utilities={"kind": "cmaes", "B0": 4})
    elif algorithm == "psga":
        base.update(T=10000, rho1=1.0, B=1)
    return ExperimentConfig(**base)


def _preset_fig_mode_sym():
    out = []
    for algorithm in ("nva-gm", "fs-nva-gm", "psga", "pcmaes"):
        for k in (2, 3, 4, 5):
            out.append((f"fig-mode-sym-{algorithm}-k{k}", _sym_algo_config(algorithm, k)))
    return out


def _preset_fig_mode_st():
    out = []
    for algorithm in ("nva-gm", "fs-nva-gm"):
        base = dict(problem="styblinski-tang-4", algorithm=algorithm, replicates=100)
        if algorithm == "fs-nva-gm":
            base.update(B=16, utilities={"kind": "cmaes", "B0": 4})
        out.append((f"fig-mode-st-{algorithm}", ExperimentConfig(**base)))
    return out


def _preset_weights(name, problem, **over):
    base = dict(problem=problem, replicates=10)
    base.update(over)
    return [(name, ExperimentConfig(**base))]


_PRESETS = {
    "fig-mode-sym": _preset_fig_mode_sym,
    "fig-mode-st": _preset_fig_mode_st,
    "fig-weight-sym": lambda: _preset_weights(
        "fig-weight-sym", "sym-gmm", K=4, T=10000
    ),
    "fig-weight-asym": lambda: _preset_weights("fig-weight-asym", "asym-gmm"),
    "fig-weight-degen": lambda: _preset_weights("fig-weight-degen", "degenerate-psi"),
    "cec-f1": lambda: _preset_weights("cec-f1", "cec-f1", replicates=50),
    "cec-f2": lambda: _preset_weights("cec-f2", "cec-f2", replicates=50),
    "cec-f3": lambda: _preset_weights("cec-f3", "cec-f3", replicates=50),
    "cec-f4": lambda: _preset_weights("cec-f4", "cec-f4", replicates=50),
    "cec-f5": lambda: _preset_weights("cec-f5", "cec-f5", replicates=50),
    "cec-f6": lambda: _preset_weights("cec-f6", "cec-f6", replicates=50),
}

PRESET_NAMES = tuple(_PRESETS)


def get_preset(name: str):
    """Named experiment batteries; returns [(experiment id, config), ...]."""
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; have {', '.join(PRESET_NAMES)}")
    return _PRESETS[name]()
