"""Experiment configuration: sectioned key-value files (INI dialect).

A config file drives one experiment (or a sweep of them).  Sections:
[params], [grid], [initial_data], [evolution], [classify], [solver],
[verify], [sweep], [output].  All keys are optional except the parameter
block; unknown keys raise ConfigParseError so typos cannot silently change
an experiment.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .errors import ConfigParseError
from .evolution import EvolutionConfig
from .grid import GridMapping
from .ground_state import SolverOptions
from .params import Params, validate

_KNOWN_KEYS = {
    "params": {"d", "b", "sigma", "c"},
    "grid": {"n", "r_max", "mapping", "r_min"},
    "initial_data": {"family", "lam", "mode", "amplitude", "width", "chirp"},
    "evolution": {
        "dt", "t_final", "snapshot_stride", "blowup_growth_factor", "min_dt",
        "boundary_mass_limit", "stiffness_theta", "detection_mass_budget",
        "detection_energy_budget", "field_dump_stride",
    },
    "classify": {"symmetry", "equality_band"},
    "solver": {"tol", "fixed_point_tol", "max_fixed_point", "max_newton", "seed_width"},
    "verify": {"checks", "n_random", "refine"},
    "sweep": {"d", "b", "sigma", "c", "action", "jobs"},
    "output": {"out_dir", "cache_dir", "seed", "quiet", "require_cached_groundstate"},
}

ENV_CACHE_DIR = "INLSLAB_CACHE_DIR"

VERIFY_ALL_CHECKS = (
    "quadrature", "hardy", "pohozaev", "gn", "thresholds", "virial",
    "cutoff", "uncertainty", "momentum", "x0", "snapshot",
)


@dataclass(frozen=True)
class InitialData:
    family: str = "ground_state"
    lam: float = 1.0
    mode: str = "amplitude"
    amplitude: float = 1.0
    width: float = 1.0
    chirp: float = 0.0


@dataclass(frozen=True)
class VerifyConfig:
    checks: tuple = VERIFY_ALL_CHECKS
    n_random: int = 50
    refine: bool = False


@dataclass(frozen=True)
class SweepConfig:
    d: tuple = ()
    b: tuple = ()
    sigma: tuple = ()
    c: tuple = ()
    action: str = "ground-state"
    jobs: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    params: Params
    grid_n: int = 2048
    grid_r_max: float = 20.0
    grid_mapping: GridMapping = GridMapping()
    initial_data: InitialData = InitialData()
    evolution: EvolutionConfig = EvolutionConfig()
    solver: SolverOptions = SolverOptions()
    verify: VerifyConfig = VerifyConfig()
    sweep: SweepConfig = SweepConfig()
    symmetry: str = "radial"
    equality_band: float = 1e-6
    out_dir: Path = Path("out")
    cache_dir: Path | None = None
    seed: int = 12345
    quiet: bool = False
    require_cached_groundstate: bool = False
    echo: dict = dc_field(default_factory=dict)   # canonical raw key-value echo

    def resolved_cache_dir(self) -> Path:
        if self.cache_dir is not None:
            return Path(self.cache_dir)
        env = os.environ.get(ENV_CACHE_DIR)
        if env:
            return Path(env)
        return Path("gs-cache")


def _getfloat(sec, key, default):
    raw = sec.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigParseError(f"bad float for {key}: {raw!r}") from exc


def _getint(sec, key, default):
    raw = sec.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigParseError(f"bad int for {key}: {raw!r}") from exc


def _getbool(sec, key, default):
    raw = sec.get(key)
    if raw is None:
        return default
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigParseError(f"bad bool for {key}: {raw!r}")


def _float_list(raw: str) -> tuple:
    items = [x.strip() for x in raw.split(",") if x.strip()]
    try:
        return tuple(float(x) for x in items)
    except ValueError as exc:
        raise ConfigParseError(f"bad list: {raw!r}") from exc


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse an experiment config file; CLI overrides win over file values."""
    path = Path(path)
    if not path.exists():
        raise ConfigParseError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigParseError(f"cannot parse {path}: {exc}") from exc

    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigParseError(f"unknown section [{section}]")
        unknown = set(cp[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigParseError(f"unknown keys in [{section}]: {sorted(unknown)}")

    if "params" not in cp:
        raise ConfigParseError("missing [params] section")
    ps = cp["params"]
    for key in ("d", "b", "sigma", "c"):
        if key not in ps:
            raise ConfigParseError(f"[params] missing {key}")
    params = validate(_getint(ps, "d", None), _getfloat(ps, "b", None),
                      _getfloat(ps, "sigma", None), _getfloat(ps, "c", None))

    gs = cp["grid"] if "grid" in cp else {}
    mapping_kind = (gs.get("mapping") or "log").strip().lower()
    r_min_raw = (gs.get("r_min") or "auto").strip().lower()
    r_min = None if r_min_raw == "auto" else float(r_min_raw)
    mapping = GridMapping(kind=mapping_kind, r_min=r_min)

    ids = cp["initial_data"] if "initial_data" in cp else {}
    initial = InitialData(
        family=(ids.get("family") or "ground_state").strip(),
        lam=_getfloat(ids, "lam", 1.0),
        mode=(ids.get("mode") or "amplitude").strip(),
        amplitude=_getfloat(ids, "amplitude", 1.0),
        width=_getfloat(ids, "width", 1.0),
        chirp=_getfloat(ids, "chirp", 0.0),
    )

    es = cp["evolution"] if "evolution" in cp else {}
    evo = EvolutionConfig(
        dt=_getfloat(es, "dt", 1e-3),
        t_final=_getfloat(es, "t_final", 5.0),
        snapshot_stride=_getint(es, "snapshot_stride", 10),
        blowup_growth_factor=_getfloat(es, "blowup_growth_factor", 100.0),
        min_dt=_getfloat(es, "min_dt", 1e-7),
        boundary_mass_limit=_getfloat(es, "boundary_mass_limit", 1e-6),
        stiffness_theta=_getfloat(es, "stiffness_theta", 0.35),
        detection_mass_budget=_getfloat(es, "detection_mass_budget", 1e-8),
        detection_energy_budget=_getfloat(es, "detection_energy_budget", 1e-2),
        field_dump_stride=_getint(es, "field_dump_stride", 0),
    )

    ss = cp["solver"] if "solver" in cp else {}
    solver = SolverOptions(
        tol=_getfloat(ss, "tol", 1e-8),
        fixed_point_tol=_getfloat(ss, "fixed_point_tol", 1e-11),
        max_fixed_point=_getint(ss, "max_fixed_point", 5000),
        max_newton=_getint(ss, "max_newton", 60),
        seed_width=_getfloat(ss, "seed_width", 1.0),
    )

    vs = cp["verify"] if "verify" in cp else {}
    raw_checks = vs.get("checks") if "verify" in cp else None
    if raw_checks is None:
        checks = VERIFY_ALL_CHECKS
    else:
        checks = tuple(x.strip() for x in raw_checks.split(",") if x.strip())
        unknown = set(checks) - set(VERIFY_ALL_CHECKS)
        if unknown:
            raise ConfigParseError(f"unknown verify checks: {sorted(unknown)}")
    verify_cfg = VerifyConfig(
        checks=checks,
        n_random=_getint(vs, "n_random", 50),
        refine=_getbool(vs, "refine", False),
    )

    ws = cp["sweep"] if "sweep" in cp else {}
    sweep = SweepConfig(
        d=tuple(int(x) for x in _float_list(ws.get("d"))) if ws.get("d") else (),
        b=_float_list(ws.get("b")) if ws.get("b") else (),
        sigma=_float_list(ws.get("sigma")) if ws.get("sigma") else (),
        c=_float_list(ws.get("c")) if ws.get("c") else (),
        action=(ws.get("action") or "ground-state").strip(),
        jobs=_getint(ws, "jobs", 1),
    )

    cs = cp["classify"] if "classify" in cp else {}
    os_ = cp["output"] if "output" in cp else {}
    cache_raw = os_.get("cache_dir")

    echo = {s: dict(cp[s]) for s in cp.sections()}
    cfg = ExperimentConfig(
        params=params,
        grid_n=_getint(gs, "n", 2048),
        grid_r_max=_getfloat(gs, "r_max", 20.0),
        grid_mapping=mapping,
        initial_data=initial,
        evolution=evo,
        solver=solver,
        verify=verify_cfg,
        sweep=sweep,
        symmetry=(cs.get("symmetry") or "radial").strip(),
        equality_band=_getfloat(cs, "equality_band", 1e-6),
        out_dir=Path(os_.get("out_dir") or "out"),
        cache_dir=Path(cache_raw) if cache_raw else None,
        seed=_getint(os_, "seed", 12345),
        quiet=_getbool(os_, "quiet", False),
        require_cached_groundstate=_getbool(os_, "require_cached_groundstate", False),
        echo=echo,
    )
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


def apply_overrides(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Apply CLI-level overrides (out_dir, cache_dir, seed, quiet)."""
    from dataclasses import replace

    kwargs = {}
    if overrides.get("out_dir") is not None:
        kwargs["out_dir"] = Path(overrides["out_dir"])
    if overrides.get("cache_dir") is not None:
        kwargs["cache_dir"] = Path(overrides["cache_dir"])
    if overrides.get("seed") is not None:
        kwargs["seed"] = int(overrides["seed"])
    if overrides.get("quiet") is not None:
        kwargs["quiet"] = bool(overrides["quiet"])
    return replace(cfg, **kwargs) if kwargs else cfg
