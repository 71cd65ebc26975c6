# workbench/sweep_config.py
"""
Sweep configuration: one YAML document naming a model family, parameter
ranges, an S-ladder and the tasks to run on every grid point.
"""

import itertools
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional

import numpy as np
import yaml

from config.settings import settings
from core.errors import ConfigError, WorkbenchError
from core.spin_algebra import SpinSpace
from models import get_family

TASKS = ('spectrum', 'steady', 'pt-residual', 'dynamics', 'trajectory', 'perturb', 'check-pt', 'btc-detect')
# Extra tables a task writes when its switch is on; figures may draw from them
DUMP_TABLES = {'trajectory-samples': 'trajectory', 'trajectory-jumps': 'trajectory'}
FIGURE_KINDS = ('line', 'heatmap')


@dataclass
class FigureRecipe:
    kind: str
    task: str
    x: str
    y: str
    series: Optional[str] = None
    value: Optional[str] = None
    title: str = ''
    name: str = ''
    # column -> value; only matching rows are drawn
    where: Dict[str, Any] = field(default_factory=dict)


@dataclass
class TimeGrid:
    start: float = 0.0
    stop: float = 10.0
    num: int = 101

    def __post_init__(self):
        self.start = float(self.start)
        self.stop = float(self.stop)
        self.num = int(self.num)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class SweepConfig:
    model: str
    S: List[float]
    tasks: List[str]
    params: Dict[str, List[Any]] = field(default_factory=dict)
    output_dir: str = 'results'
    seed: int = 0
    tolerances: Dict[str, float] = field(default_factory=dict)
    time_grid: TimeGrid = field(default_factory=TimeGrid)
    initial_polarization: float = 1.0
    trajectories: int = 100
    perturbation_order: int = 2
    dump_trajectories: bool = False
    workers: int = 1
    figures: List[FigureRecipe] = field(default_factory=list)
    source: Optional[str] = field(default=None, compare=False)

    def grid(self) -> Iterator[Dict[str, Any]]:
        """Cartesian product of the parameter lists, in declaration order"""
        names = list(self.params)
        for values in itertools.product(*(self.params[n] for n in names)):
            yield dict(zip(names, values))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop('source')
        return data

    def echo(self) -> str:
        return yaml.safe_dump(self.to_dict(), default_flow_style=False, sort_keys=False, indent=2)


def expand_range(name: str, value: Any) -> List[Any]:
    """Scalars, lists or {linspace: [start, stop, num]} become a list of values"""
    if isinstance(value, Mapping):
        if set(value) != {'linspace'} or len(value['linspace']) != 3:
            raise ConfigError(f"Parameter '{name}': ranges are written as {{linspace: [start, stop, num]}}")
        start, stop, num = value['linspace']
        return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
    if isinstance(value, (list, tuple)):
        if len(value) == 0:
            raise ConfigError(f"Parameter '{name}' has an empty value list")
        return list(value)
    return [value]


def _key_lines(text: str) -> Dict[str, int]:
    """1-based line of every top-level key"""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(root, yaml.MappingNode):
        return {}
    return {key.value: key.start_mark.line + 1 for key, _ in root.value}


def parse_config(data: Any, source: Optional[str] = None, lines: Optional[Dict[str, int]] = None) -> SweepConfig:
    lines = lines or {}

    def fail(message: str, key: Optional[str] = None):
        raise ConfigError(message, source, lines.get(key) if key else None)

    if not isinstance(data, Mapping):
        fail("Configuration must be a mapping")
    known = {f for f in SweepConfig.__dataclass_fields__ if f != 'source'}
    for key in data:
        if key not in known:
            fail(f"Unknown key '{key}'", key)
    for key in ('model', 'S', 'tasks'):
        if key not in data:
            fail(f"Missing required key '{key}'")

    try:
        family = get_family(data['model'])
    except ConfigError as e:
        fail(str(e), 'model')

    ladder = expand_range('S', data['S'])
    if not ladder:
        fail("S-ladder is empty", 'S')
    try:
        ladder = [SpinSpace.from_spin(S).S for S in ladder]
    except WorkbenchError as e:
        fail(str(e), 'S')

    tasks = data['tasks'] or []
    if not isinstance(tasks, list) or not tasks:
        fail("Task list is empty", 'tasks')
    for task in tasks:
        if task not in TASKS:
            fail(f"Unknown task '{task}', expected one of {list(TASKS)}", 'tasks')

    params = {}
    raw_params = data.get('params') or {}
    if not isinstance(raw_params, Mapping):
        fail("'params' must be a mapping", 'params')
    allowed = set(family.parameter_names) - {'S'}
    for name, value in raw_params.items():
        if name not in allowed:
            fail(f"Parameter '{name}' does not belong to model '{family.name}' ({sorted(allowed)})", 'params')
        # triples sweeps over dissipator sets, so its value is always a list of sets
        params[name] = expand_range(name, value)

    dump_trajectories = data.get('dump_trajectories', False)
    if not isinstance(dump_trajectories, bool):
        fail("dump_trajectories must be true or false", 'dump_trajectories')
    tables = set(tasks)
    if dump_trajectories and 'trajectory' in tasks:
        tables.update(DUMP_TABLES)

    figures = []
    for recipe in data.get('figures') or []:
        try:
            figure = FigureRecipe(**recipe)
        except TypeError as e:
            fail(f"Bad figure recipe {recipe}: {e}", 'figures')
        if figure.kind not in FIGURE_KINDS or figure.task not in tables:
            fail(f"Figure recipe needs kind in {list(FIGURE_KINDS)} and one of the tables {sorted(tables)}", 'figures')
        if not isinstance(figure.where, Mapping):
            fail(f"Figure '{figure.name}': 'where' must map columns to values", 'figures')
        figures.append(figure)

    try:
        config = SweepConfig(
            model=family.name,
            S=ladder,
            tasks=list(tasks),
            params=params,
            output_dir=str(data.get('output_dir', settings.get('workbench.output_dir', 'results'))),
            seed=int(data.get('seed', 0)),
            tolerances={str(k): float(v) for k, v in (data.get('tolerances') or {}).items()},
            time_grid=TimeGrid(**(data.get('time_grid') or {})),
            initial_polarization=float(data.get('initial_polarization', 1.0)),
            trajectories=int(data.get('trajectories', 100)),
            perturbation_order=int(data.get('perturbation_order', 2)),
            dump_trajectories=dump_trajectories,
            workers=int(data.get('workers', 1)),
            figures=figures,
            source=source,
        )
    except (TypeError, ValueError) as e:
        fail(f"Invalid value: {e}")
    if config.trajectories < 1 or config.time_grid.num < 1:
        fail("trajectories and time_grid.num must be positive")
    if config.perturbation_order not in (1, 2):
        fail("perturbation_order must be 1 or 2", 'perturbation_order')

    # Every grid point must build a valid parameter record
    for point in config.grid():
        try:
            family.make_params({**point, 'S': ladder[0]})
        except WorkbenchError as e:
            fail(f"Grid point {point}: {e}", 'params')
    return config


def load_config(text: str, source: Optional[str] = None) -> SweepConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, 'problem', None) or str(e)
        raise ConfigError(f"YAML parse error: {problem}", source or '<config>', line)
    return parse_config(data, source or '<config>', _key_lines(text))


def load_config_file(path: str) -> SweepConfig:
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read configuration: {e}", path)
    return load_config(text, path)
