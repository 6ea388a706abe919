import configparser
import logging
import os
from dataclasses import fields
from typing import Callable, Dict, Tuple

from ..errors import ConfigurationError
from ..sim.config import SimConfig
from ..spectral.grid import Grid1D
from ..utils import config_hash
from .scenarios import AnalysisSpec, FractalSpec, LevySpec, PotentialSpec, Scenario

logger = logging.getLogger(__name__)


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in text.split(",") if item.strip())


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "yes", "true", "on"):
        return True
    if value in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_format(float(v)) for v in value)
    return str(value)


# config key -> (dataclass field, parser); units live in the key names
SIMULATION_KEYS: Dict[str, Tuple[str, Callable]] = {
    "horizon_time": ("horizon", float),
    "time_step": ("dt", float),
    "small_jump_cutoff": ("eps_s", float),
    "window_bound": ("window", float),
    "n_paths": ("n_paths", int),
    "initial_law": ("initial_law", str),
    "initial_point": ("x0", float),
    "record_jumps": ("record_jumps", _bool),
    "record_rejected": ("record_rejected", _bool),
    "chunk_steps": ("chunk_steps", int),
    "batch_size": ("batch_size", int),
}

FRACTAL_KEYS: Dict[str, Tuple[str, Callable]] = {
    "n_paths": ("n_paths", int),
    "horizon_time": ("horizon", float),
    "time_step": ("dt", float),
    "small_jump_cutoff": ("eps_s", float),
    "h_grid": ("h_grid", _floats),
    "delta_max": ("delta_max", float),
    "min_bin_count": ("min_bin_count", int),
    "holder_probes": ("holder_probes", int),
    "covering_deltas": ("covering_deltas", _floats),
    "baseline_paths": ("baseline_paths", int),
    "baseline_time_step": ("baseline_dt", float),
    "baseline_small_jump_cutoff": ("baseline_eps_s", float),
}

ANALYSIS_KEYS: Dict[str, Tuple[str, Callable]] = {
    "martingale_times": ("martingale_times", _floats),
    "martingale_functions": ("martingale_functions", int),
    "stationarity_time": ("stationarity_time", float),
    "thinning_proposals": ("thinning_proposals", int),
    "thinning_bins": ("thinning_bins", int),
    "thinning_state": ("thinning_state", float),
    "unitary_functions": ("unitary_functions", int),
    "kato_times": ("kato_times", _floats),
    "kato_paths": ("kato_paths", int),
    "determinism_rerun": ("determinism_rerun", _bool),
    "grid_doubling": ("grid_doubling", _bool),
}

LEVY_PARAMS: Dict[str, Callable] = {
    "alpha": float,
    "scale": float,
    "tempering": float,
    "a": float,
    "mass": float,
    "points": _floats,
    "values": _floats,
}

POTENTIAL_PARAMS: Dict[str, Callable] = {
    "degree_half": int,
    "scale": float,
    "depth": float,
    "half_width": float,
    "table_path": str,
}

SECTIONS = ("scenario", "levy", "potential", "grid", "simulation", "fractal", "analysis")


def _convert(section: str, key: str, text: str, parse: Callable):
    try:
        return parse(text)
    except ValueError as exc:
        raise ConfigurationError(f"[{section}] {key}: cannot parse {text!r} ({exc})") from exc


def _check_keys(parser: configparser.ConfigParser, section: str, allowed):
    unknown = set(parser[section]) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _section_fields(parser, section: str, table: Dict[str, Tuple[str, Callable]]) -> Dict:
    if not parser.has_section(section):
        return {}
    _check_keys(parser, section, table)
    return {attr: _convert(section, key, parser[section][key], parse)
            for key, (attr, parse) in table.items() if key in parser[section]}


def parse_scenario_text(text: str, source_dir: str = ".") -> Scenario:
    """
    Build a Scenario from INI text. Unknown sections and keys are errors.

    Raises:
        ConfigurationError: Malformed text, unknown keys or failed component validation
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from exc
    unknown = set(parser.sections()) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown section(s): {', '.join(sorted(unknown))}")
    for required in ("scenario", "levy", "potential", "grid", "simulation"):
        if not parser.has_section(required):
            raise ConfigurationError(f"missing section [{required}]")

    head = parser["scenario"]
    _check_keys(parser, "scenario", ("name", "seed", "exploratory", "reference"))
    if "name" not in head:
        raise ConfigurationError("[scenario] name is required")

    levy = parser["levy"]
    _check_keys(parser, "levy", ("sigma", "density", *LEVY_PARAMS))
    levy_params = tuple(
        (key, _convert("levy", key, levy[key], LEVY_PARAMS[key])) for key in sorted(LEVY_PARAMS) if key in levy
    )
    levy_spec = LevySpec(
        sigma=_convert("levy", "sigma", levy.get("sigma", "0"), float),
        density=levy.get("density", "none"),
        params=levy_params,
    )

    potential = parser["potential"]
    _check_keys(parser, "potential", ("kind", *POTENTIAL_PARAMS))
    potential_params = []
    for key in sorted(POTENTIAL_PARAMS):
        if key in potential:
            value = _convert("potential", key, potential[key], POTENTIAL_PARAMS[key])
            if key == "table_path" and not os.path.isabs(value):
                value = os.path.normpath(os.path.join(source_dir, value))
            potential_params.append((key, value))
    potential_spec = PotentialSpec(kind=potential.get("kind", "polynomial"), params=tuple(potential_params))

    _check_keys(parser, "grid", ("grid_halfwidth", "grid_points"))
    try:
        grid = Grid1D(
            half_width=_convert("grid", "grid_halfwidth", parser["grid"]["grid_halfwidth"], float),
            points=_convert("grid", "grid_points", parser["grid"]["grid_points"], int),
        )
    except KeyError as exc:
        raise ConfigurationError(f"[grid] missing key {exc}") from exc

    simulation = SimConfig(**_section_fields(parser, "simulation", SIMULATION_KEYS))
    if "seed" in head:
        simulation = simulation.with_(seed=_convert("scenario", "seed", head["seed"], int))

    scenario = Scenario(
        name=head["name"].strip(),
        levy=levy_spec,
        potential=potential_spec,
        grid=grid,
        simulation=simulation,
        fractal=FractalSpec(**_section_fields(parser, "fractal", FRACTAL_KEYS)),
        analysis=AnalysisSpec(**_section_fields(parser, "analysis", ANALYSIS_KEYS)),
        exploratory=_convert("scenario", "exploratory", head.get("exploratory", "false"), _bool),
        reference=head.get("reference", "D2").strip(),
    )
    return scenario.validate()


def read_scenario(path: str) -> Scenario:
    """Read and validate a scenario configuration file."""
    if not os.path.isfile(path):
        raise ConfigurationError(f"configuration file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        return parse_scenario_text(handle.read(), os.path.dirname(os.path.abspath(path)))


def _dump_fields(obj, table: Dict[str, Tuple[str, Callable]]) -> Dict[str, str]:
    values = {f.name: getattr(obj, f.name) for f in fields(obj)}
    return {key: _format(values[attr]) for key, (attr, _) in table.items()}


def scenario_to_text(scenario: Scenario) -> str:
    """Canonical INI text: sorted sections and keys, repr-exact floats, seed included."""
    sections = {
        "scenario": {
            "name": scenario.name,
            "seed": str(scenario.seed),
            "exploratory": _format(scenario.exploratory),
            "reference": scenario.reference,
        },
        "levy": {
            "sigma": _format(float(scenario.levy.sigma)),
            "density": scenario.levy.density,
            **{key: _format(value) for key, value in scenario.levy.params},
        },
        "potential": {"kind": scenario.potential.kind, **{k: _format(v) for k, v in scenario.potential.params}},
        "grid": {
            "grid_halfwidth": _format(float(scenario.grid.half_width)),
            "grid_points": str(scenario.grid.points),
        },
        "simulation": _dump_fields(scenario.simulation, SIMULATION_KEYS),
        "fractal": _dump_fields(scenario.fractal, FRACTAL_KEYS),
        "analysis": _dump_fields(scenario.analysis, ANALYSIS_KEYS),
    }
    lines = []
    for section in sorted(sections):
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {sections[section][key]}" for key in sorted(sections[section]))
        lines.append("")
    return "\n".join(lines)


def scenario_hash(scenario: Scenario) -> str:
    return config_hash(scenario_to_text(scenario))


def write_scenario(scenario: Scenario, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(scenario_to_text(scenario))
    logger.debug("wrote %s", path)
    return path


def override_seed(scenario: Scenario, seed) -> Scenario:
    """--seed takes precedence over the configured seed."""
    return scenario if seed is None else scenario.with_seed(seed)
