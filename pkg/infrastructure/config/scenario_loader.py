"""
Scenario Loader
Strict JSON parsing of scenario and ensemble files, and their normalized re-emission.

Units are natural (ħ = c = 1, lengths and times in 1/m). Unknown keys are
errors so a misspelled parameter never silently falls back to a default.
"""

import hashlib
import json
import re
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple

import numpy as np

from core.entities.action import KernelChoice, KernelVariant
from core.entities.dirac import MassParameter, PotentialSchedule, PotentialTerm, SpatialShape, TemporalShape
from core.entities.ensemble import (DriveEnvelope, EnsembleConfig, EnvelopeShape, IntegrationMethod,
                                    ModalSystem)
from core.entities.errors import ConfigError, SimulationError
from core.entities.grid import SpacetimeGrid, XBoundary
from core.entities.scenario import BoundaryPolicy, FinalSlice, InitialState, InitialStateKind, Scenario
from shared.utils.logger import get_logger

config_logger = get_logger("config")

GRID_KEYS = {"n_t", "n_x", "dt", "dx", "origin_t", "origin_x", "x_boundary"}
TERM_KEYS = {"component", "amplitude", "temporal", "onset", "duration", "spatial",
             "wavenumber", "center", "spread"}
INITIAL_KEYS = {"kind", "amplitudes", "center", "width", "momentum", "spinor"}
SCENARIO_KEYS = {"name", "grid", "mass", "potential", "initial_state", "epsilon", "t_i",
                 "boundary", "final_slice", "kernel", "seed", "quadruple_samples",
                 "max_iterations", "gradient_tolerance", "top_k"}
SYSTEM_KEYS = {"energies", "energy_slopes", "gamma0", "initial", "drive_weights", "drive",
               "outcome_groups", "mass"}
DRIVE_KEYS = {"shape", "amplitude", "center", "width"}
ENSEMBLE_KEYS = {"system", "n_samples", "duration", "window_periods", "seed", "method",
                 "decay_strength"}


class _Document:
    """Raw text plus helpers that attach line numbers to errors."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def locate(self, key: str) -> Tuple[Optional[int], Optional[int]]:
        match = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        if match is None:
            return None, None
        line = self.text.count("\n", 0, match.start()) + 1
        column = match.start() - (self.text.rfind("\n", 0, match.start()) + 1) + 1
        return line, column

    def error(self, message: str, path: str) -> ConfigError:
        line, column = self.locate(path.split(".")[-1].split("[")[0])
        return ConfigError(message, field=path, line=line, column=column)

    def section(self, payload: Any, path: str, allowed: Iterable[str],
                required: Iterable[str] = ()) -> Dict[str, Any]:
        if not isinstance(payload, dict):
            raise self.error(f"expected an object at '{path or 'top level'}'", path or "root")
        allowed = set(allowed)
        for key in payload:
            if key not in allowed:
                raise self.error(f"unknown key '{key}' (allowed: {', '.join(sorted(allowed))})",
                                 f"{path}.{key}" if path else key)
        for key in required:
            if key not in payload:
                where = f"{path}.{key}" if path else key
                raise ConfigError(f"missing required field '{where}'", field=where)
        return payload

    def value(self, payload: Dict[str, Any], key: str, path: str, cast: Callable, default: Any = None):
        where = f"{path}.{key}" if path else key
        if key not in payload:
            return default
        raw = payload[key]
        try:
            if cast in (int, float) and isinstance(raw, bool):
                raise TypeError("booleans are not numbers")
            if cast is int and isinstance(raw, float) and not raw.is_integer():
                raise TypeError("expected an integer")
            return cast(raw)
        except (TypeError, ValueError) as e:
            raise self.error(f"invalid value {raw!r} for '{where}': {e}", where)


def _parse_text(text: str, source: str) -> Tuple[_Document, Dict[str, Any]]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {source}: {e.msg}", line=e.lineno, column=e.colno)
    return _Document(text, source), payload


def _complex(raw: Any) -> complex:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ValueError("complex numbers are [real, imag] pairs")
        return complex(float(raw[0]), float(raw[1]))
    if isinstance(raw, bool):
        raise TypeError("booleans are not numbers")
    return complex(float(raw))


def _encode_complex(value: complex) -> Any:
    value = complex(value)
    return value.real if value.imag == 0.0 else [value.real, value.imag]


def _enum(enum_type):
    def cast(raw):
        try:
            return enum_type(raw)
        except ValueError:
            options = ", ".join(e.value for e in enum_type)
            raise ValueError(f"expected one of: {options}")
    return cast


def _grid(doc: _Document, payload: Any) -> SpacetimeGrid:
    section = doc.section(payload, "grid", GRID_KEYS, ("n_t", "n_x", "dt", "dx"))
    return SpacetimeGrid(
        n_t=doc.value(section, "n_t", "grid", int),
        n_x=doc.value(section, "n_x", "grid", int),
        dt=doc.value(section, "dt", "grid", float),
        dx=doc.value(section, "dx", "grid", float),
        origin_t=doc.value(section, "origin_t", "grid", float, 0.0),
        origin_x=doc.value(section, "origin_x", "grid", float, 0.0),
        x_boundary=doc.value(section, "x_boundary", "grid", _enum(XBoundary), XBoundary.PERIODIC))


def _schedule(doc: _Document, payload: Any) -> PotentialSchedule:
    if payload is None:
        return PotentialSchedule()
    section = doc.section(payload, "potential", {"charge", "terms"})
    terms = []
    for n, raw in enumerate(section.get("terms", [])):
        path = f"potential.terms[{n}]"
        term = doc.section(raw, path, TERM_KEYS, ("component", "amplitude"))
        terms.append(PotentialTerm(
            component=doc.value(term, "component", path, int),
            amplitude=doc.value(term, "amplitude", path, float),
            temporal=doc.value(term, "temporal", path, _enum(TemporalShape), TemporalShape.CONSTANT),
            onset=doc.value(term, "onset", path, float, 0.0),
            duration=doc.value(term, "duration", path, float, 1.0),
            spatial=doc.value(term, "spatial", path, _enum(SpatialShape), SpatialShape.UNIFORM),
            wavenumber=doc.value(term, "wavenumber", path, int, 1),
            center=doc.value(term, "center", path, float, 0.0),
            spread=doc.value(term, "spread", path, float, 1.0)))
    return PotentialSchedule(tuple(terms), doc.value(section, "charge", "potential", float, 1.0))


def _initial_state(doc: _Document, payload: Any) -> InitialState:
    section = doc.section(payload, "initial_state", INITIAL_KEYS, ("kind",))
    kind = doc.value(section, "kind", "initial_state", _enum(InitialStateKind))
    amplitudes = []
    for n, pair in enumerate(section.get("amplitudes", [])):
        where = f"initial_state.amplitudes[{n}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise doc.error("amplitudes are [mode, amplitude] pairs", where)
        try:
            amplitudes.append((int(pair[0]), _complex(pair[1])))
        except (TypeError, ValueError) as e:
            raise doc.error(f"invalid amplitude: {e}", where)
    spinor = section.get("spinor", [1.0, 0.0, 0.0, 0.0])
    try:
        spinor = tuple(_complex(c) for c in spinor)
    except (TypeError, ValueError) as e:
        raise doc.error(f"invalid spinor: {e}", "initial_state.spinor")
    if len(spinor) != 4:
        raise doc.error("spinor needs 4 components", "initial_state.spinor")
    return InitialState(
        kind=kind, amplitudes=tuple(amplitudes),
        center=doc.value(section, "center", "initial_state", float, 0.0),
        width=doc.value(section, "width", "initial_state", float, 1.0),
        momentum=doc.value(section, "momentum", "initial_state", float, 0.0),
        spinor=spinor)


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Build a Scenario from JSON text; raises ConfigError with field and line details."""
    doc, payload = _parse_text(text, source)
    top = doc.section(payload, "", SCENARIO_KEYS, ("grid", "initial_state", "epsilon"))
    try:
        return Scenario(
            name=doc.value(top, "name", "", str, Path(source).stem),
            grid=_grid(doc, top["grid"]),
            mass=MassParameter(doc.value(top, "mass", "", float, 1.0)),
            schedule=_schedule(doc, top.get("potential")),
            initial_state=_initial_state(doc, top["initial_state"]),
            epsilon=doc.value(top, "epsilon", "", float),
            t_i=doc.value(top, "t_i", "", float, 0.0),
            boundary=doc.value(top, "boundary", "", _enum(BoundaryPolicy), BoundaryPolicy.FIX_INITIAL),
            final_slice=doc.value(top, "final_slice", "", _enum(FinalSlice), FinalSlice.PROPAGATED),
            kernel=KernelChoice(doc.value(top, "kernel", "", _enum(KernelVariant), KernelVariant.COVARIANT)),
            seed=doc.value(top, "seed", "", int, 0),
            quadruple_samples=doc.value(top, "quadruple_samples", "", int, 4000),
            max_iterations=doc.value(top, "max_iterations", "", int, 200),
            gradient_tolerance=doc.value(top, "gradient_tolerance", "", float, 1e-9),
            top_k=doc.value(top, "top_k", "", lambda v: None if v is None else int(v), None))
    except ConfigError as e:
        if e.line is None and e.field:
            raise doc.error(str(e).split(" [field")[0], e.field)
        raise
    except SimulationError as e:
        raise ConfigError(str(e), field="scenario")


def emit_scenario(scenario: Scenario) -> str:
    """Normalized JSON for a Scenario; parse_scenario(emit_scenario(s)) == s."""
    grid = scenario.grid.to_dict()
    payload = {
        "name": scenario.name,
        "grid": {k: grid[k] for k in ("n_t", "n_x", "dt", "dx", "origin_t", "origin_x", "x_boundary")},
        "mass": scenario.mass.m,
        "potential": scenario.schedule.to_dict(),
        "initial_state": {
            "kind": scenario.initial_state.kind.value,
            "amplitudes": [[j, _encode_complex(c)] for j, c in scenario.initial_state.amplitudes],
            "center": scenario.initial_state.center,
            "width": scenario.initial_state.width,
            "momentum": scenario.initial_state.momentum,
            "spinor": [_encode_complex(c) for c in scenario.initial_state.spinor]
        },
        "epsilon": scenario.epsilon,
        "t_i": scenario.t_i,
        "boundary": scenario.boundary.value,
        "final_slice": scenario.final_slice.value,
        "kernel": scenario.kernel.variant.value,
        "seed": scenario.seed,
        "quadruple_samples": scenario.quadruple_samples,
        "max_iterations": scenario.max_iterations,
        "gradient_tolerance": scenario.gradient_tolerance,
        "top_k": scenario.top_k
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _system(doc: _Document, payload: Any) -> ModalSystem:
    section = doc.section(payload, "system", SYSTEM_KEYS,
                          ("energies", "gamma0", "initial", "drive_weights"))

    def vector(key, cast=_complex):
        try:
            return np.array([cast(v) for v in section[key]])
        except (TypeError, ValueError) as e:
            raise doc.error(f"invalid entries: {e}", f"system.{key}")

    energies = vector("energies", float)
    try:
        gamma0 = np.array([[_complex(v) for v in row] for row in section["gamma0"]])
    except (TypeError, ValueError) as e:
        raise doc.error(f"invalid entries: {e}", "system.gamma0")
    drive = DriveEnvelope()
    if "drive" in section:
        raw = doc.section(section["drive"], "system.drive", DRIVE_KEYS)
        drive = DriveEnvelope(
            shape=doc.value(raw, "shape", "system.drive", _enum(EnvelopeShape), EnvelopeShape.GAUSSIAN),
            amplitude=doc.value(raw, "amplitude", "system.drive", float, 0.0),
            center=doc.value(raw, "center", "system.drive", float, 0.0),
            width=doc.value(raw, "width", "system.drive", float, 1.0))
    groups = None
    if "outcome_groups" in section:
        if not isinstance(section["outcome_groups"], dict):
            raise doc.error("outcome_groups maps labels to mode lists", "system.outcome_groups")
        groups = {str(k): tuple(int(j) for j in v) for k, v in section["outcome_groups"].items()}
    return ModalSystem(
        energies=energies, gamma0=gamma0, initial=vector("initial"),
        drive_weights=vector("drive_weights"), drive=drive,
        energy_slopes=vector("energy_slopes", float) if "energy_slopes" in section else None,
        outcome_groups=groups, mass=doc.value(section, "mass", "system", float, 1.0))


def parse_ensemble(text: str, source: str = "<ensemble>") -> Tuple[ModalSystem, EnsembleConfig]:
    """Build a ModalSystem and EnsembleConfig from JSON text."""
    doc, payload = _parse_text(text, source)
    top = doc.section(payload, "", ENSEMBLE_KEYS, ("system", "n_samples", "duration"))
    try:
        system = _system(doc, top["system"])
        config = EnsembleConfig(
            n_samples=doc.value(top, "n_samples", "", int),
            duration=doc.value(top, "duration", "", float),
            window_periods=doc.value(top, "window_periods", "", float, 100.0),
            seed=doc.value(top, "seed", "", int, 0),
            method=doc.value(top, "method", "", _enum(IntegrationMethod), IntegrationMethod.STATIONARY),
            decay_strength=doc.value(top, "decay_strength", "", float, 40.0))
    except ConfigError as e:
        if e.line is None and e.field:
            raise doc.error(str(e).split(" [field")[0], e.field)
        raise
    except SimulationError as e:
        raise ConfigError(str(e), field="system")
    return system, config


def emit_ensemble(system: ModalSystem, config: EnsembleConfig) -> str:
    """Normalized JSON for an ensemble run."""
    payload = {
        "system": {
            "energies": [float(e) for e in system.energies],
            "energy_slopes": [float(s) for s in system.energy_slopes],
            "gamma0": [[_encode_complex(v) for v in row] for row in system.gamma0],
            "initial": [_encode_complex(v) for v in system.initial],
            "drive_weights": [_encode_complex(v) for v in system.drive_weights],
            "drive": system.drive.to_dict(),
            "outcome_groups": {k: list(v) for k, v in system.outcome_groups.items()},
            "mass": system.mass
        },
        **config.to_dict()
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file: {e}", field="path")
    scenario = parse_scenario(text, str(path))
    config_logger.info("Scenario loaded", name=scenario.name, path=str(path))
    return scenario


def load_ensemble(path: Path) -> Tuple[ModalSystem, EnsembleConfig]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read ensemble file: {e}", field="path")
    return parse_ensemble(text, str(path))


def config_hash(normalized: str) -> str:
    """sha256 of a normalized emission; identical configs hash identically."""
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()
