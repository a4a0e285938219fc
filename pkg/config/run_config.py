"""
Run Configuration Loader

A run is described by one JSON document. Sections and their keys are
declared in RUN_CONFIG_RULES; anything else is rejected with the file and
line of the offending key.
"""
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from config.solver_config import DEFAULT_SEED, ERROR_MESSAGES, RUN_CONFIG_RULES
from delaysim.models.presets import ModelPreset, build_inline_model, build_preset, initial_segment
from delaysim.models.spectral_operator import SpatialGrid
from delaysim.solvers.invariance import ConstraintSet
from delaysim.solvers.stepper import StepperConfig
from delaysim.utils.errors import ConfigError, InputError
from delaysim.utils.validators import ConfigValidator

logger = logging.getLogger(__name__)


def _find_line(text: str, path: Sequence[str]) -> Optional[int]:
    """1-based line of the last key of path, searching each key after its parent"""
    pos = None
    start = 0
    for key in path:
        match = re.compile(rf'"{re.escape(str(key))}"\s*:').search(text, start)
        if match is None:
            break
        pos = start = match.start()
    if pos is None:
        return None
    return text.count('\n', 0, pos) + 1


def _lookup(data: Dict[str, Any], path: Sequence[str]):
    node = data
    for key in path:
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def _validate(data: Dict[str, Any], text: str, source: str):
    rules = RUN_CONFIG_RULES
    sections = rules['sections']

    def fail(message: str, path: Sequence[str]):
        raise ConfigError(message, source, _find_line(text, path), key=str(path[-1]) if path else None)

    ok, stranger = ConfigValidator.validate_keys(data, list(sections) + rules['scalars'])
    if not ok:
        fail(f"{ERROR_MESSAGES['unknown_key']} {stranger!r}", [stranger])

    for name in rules['required_sections']:
        if name not in data:
            raise ConfigError(f"{ERROR_MESSAGES['missing_section']} {name!r}", source, 1, key=name)

    for name, allowed in sections.items():
        if name not in data:
            continue
        ok, stranger = ConfigValidator.validate_keys(data[name], allowed)
        if not ok:
            if not isinstance(data[name], dict):
                fail(f"Section {name!r} must be an object", [name])
            fail(f"{ERROR_MESSAGES['unknown_key']} {name}.{stranger}", [name, stranger])

    model = data['model']
    if ('preset' in model) == ('inline' in model):
        fail(ERROR_MESSAGES['model_source'], ['model'])
    if 'params' in model and not isinstance(model['params'], dict):
        fail("model.params must be an object", ['model', 'params'])

    for path in rules['positive']:
        value = _lookup(data, path)
        if value is not None and not ConfigValidator.validate_positive(value)[0]:
            fail(f"{'.'.join(path)}: {ERROR_MESSAGES['not_positive']}, got {value!r}", path)

    for path, choices in rules['choices'].items():
        value = _lookup(data, path)
        if value is not None and not ConfigValidator.validate_choice(value, choices)[0]:
            fail(f"{'.'.join(path)}: {ERROR_MESSAGES['bad_choice']} {choices}, got {value!r}", path)

    if 'seed' in data and not ConfigValidator.validate_seed(data['seed'])[0]:
        fail(f"seed must be a non-negative integer, got {data['seed']!r}", ['seed'])

    ladder = _lookup(data, ('probes', 'h_values'))
    if ladder is not None:
        ok, message = ConfigValidator.validate_h_ladder(ladder)
        if not ok:
            fail(f"probes.h_values: {message}", ['probes', 'h_values'])

    dts = _lookup(data, ('verify', 'dts'))
    if dts is not None:
        ok, message = ConfigValidator.validate_dts(dts)
        if not ok:
            fail(f"verify.dts: {message}", ['verify', 'dts'])


@dataclass
class RunConfig:
    """One validated run description"""
    model: Dict[str, Any]
    source: str = '<string>'
    grid: Dict[str, Any] = field(default_factory=dict)
    initial: Optional[Dict[str, Any]] = None
    stepper: Dict[str, Any] = field(default_factory=dict)
    constraint: Optional[Dict[str, Any]] = None
    probes: Dict[str, Any] = field(default_factory=dict)
    verify: Dict[str, Any] = field(default_factory=dict)
    dependence: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, Any] = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    text: str = field(default='', repr=False)

    def _error(self, error: Exception, section: Sequence[str]) -> ConfigError:
        """Re-raise builder errors located at their key, or at the section"""
        key = getattr(error, 'key', None)
        line = None
        if key is not None:
            line = _find_line(self.text, list(section) + [key])
        if line is None:
            line = _find_line(self.text, section)
        message = error.reason if isinstance(error, ConfigError) else str(error)
        return ConfigError(message, self.source, line, key)

    def spatial_grid(self) -> Optional[SpatialGrid]:
        """Grid from the 'grid' section; None leaves the preset's default"""
        if not self.grid:
            return None
        try:
            if self.grid.get('domain', 'interval') == 'point':
                return SpatialGrid.point()
            return SpatialGrid.interval(self.grid.get('length', 1.0), self.grid.get('n_modes', 16),
                                        self.grid.get('boundary', 'neumann'), self.grid.get('n_collocation'))
        except InputError as e:
            raise self._error(e, ['grid']) from e

    def stepper_config(self, end_time: float) -> StepperConfig:
        try:
            values = dict(self.stepper)
            values['end_time'] = float(values.get('end_time', end_time))
            return StepperConfig(**values)
        except (InputError, TypeError) as e:
            raise self._error(e, ['stepper']) from e

    def constraint_set(self) -> Optional[ConstraintSet]:
        spec = self.constraint or {}
        kind = spec.get('kind', 'nonneg_cone')
        try:
            tolerance = spec.get('tolerance')
            kwargs = {} if tolerance is None else {'tolerance': tolerance}
            if kind == 'none':
                return None
            if kind == 'nonneg_cone':
                return ConstraintSet.nonneg_cone(**kwargs)
            if kind == 'box':
                return ConstraintSet.box(spec.get('lower'), spec.get('upper'), **kwargs)
            return ConstraintSet.time_indexed_box(spec.get('times'), spec.get('lower'), spec.get('upper'),
                                                  **kwargs)
        except (InputError, TypeError, ValueError) as e:
            raise self._error(e, ['constraint']) from e

    def build_preset(self, rng: Optional[np.random.Generator] = None) -> ModelPreset:
        """Model with the config's grid, initial history, constraint and horizon applied"""
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        grid = self.spatial_grid()
        try:
            if 'inline' in self.model:
                preset = build_inline_model(self.model['inline'], grid)
            else:
                preset = build_preset(self.model['preset'], self.model.get('params'), grid)
        except (InputError, TypeError) as e:
            raise self._error(e, ['model']) from e

        if self.initial is not None:
            try:
                preset = preset.with_initial(initial_segment(self.initial, preset.grid, preset.n_species,
                                                             preset.delay_horizon, preset.start_time, rng))
            except InputError as e:
                raise self._error(e, ['initial']) from e
        if self.constraint is not None:
            preset = preset.with_constraint(self.constraint_set())
        if 'end_time' in self.stepper:
            preset = preset.with_end_time(self.stepper['end_time'])
        logger.info(f"Model {preset.name}: {preset.description}")
        return preset


def parse_run_config(text: str, source: str = '<string>') -> RunConfig:
    """Parse and validate a JSON run description"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON: {e.msg} (column {e.colno})", source, e.lineno)
    if not isinstance(data, dict):
        raise ConfigError(ERROR_MESSAGES['config_not_object'], source, 1)

    _validate(data, text, source)
    return RunConfig(
        model=data['model'],
        source=source,
        grid=data.get('grid', {}),
        initial=data.get('initial'),
        stepper=data.get('stepper', {}),
        constraint=data.get('constraint'),
        probes=data.get('probes', {}),
        verify=data.get('verify', {}),
        dependence=data.get('dependence', {}),
        output=data.get('output', {}),
        seed=data.get('seed', DEFAULT_SEED),
        text=text,
    )


def load_run_config(path) -> RunConfig:
    """Read a run config file"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise ConfigError(ERROR_MESSAGES['config_not_found'], str(path))
    except OSError as e:
        raise ConfigError(f"Cannot read run config: {e}", str(path))
    logger.debug(f"Loaded run config from {path}")
    return parse_run_config(text, str(path))
