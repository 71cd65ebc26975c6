# workbench/tasks.py
"""
Task execution for one SweepConfig.

Every grid point (parameter combination × S) is evaluated independently on a
thread pool; rows come back in grid order and a single ResultWriter persists
them, so identical configs and seeds give byte-identical tables.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.diagnostics import btc_detect_values, magnetization, pt_residual_matrix, purity, q_pt, symmetry_delta
from analysis.perturbation import PerturbationEngine, PerturbativeSplit
from analysis.trajectory import TrajectoryRunner, ensemble_average
from config.settings import settings
from core.errors import CapExceededError, ConfigError, InvalidParameterError, NumericalFailure, WorkbenchError
from core.lindblad import (
    DensityMatrix,
    ModelSpec,
    build_liouvillian,
    check_liouvillian_pt,
    evolve,
    expectation,
    is_pt_symmetric,
    spectrum,
    stationary_state,
)
from core.logs import setup_logger
from core.spin_algebra import OperatorMatrix, ProductSpace, SpinSpace, build_spin_operators, embed_a, spin_state
from models import get_family
from workbench import __version__
from workbench.svg_export import FigureStyle, LineSeries, export_heatmap_svg, export_line_svg
from workbench.sweep_config import FigureRecipe, SweepConfig
from workbench.writers import ResultWriter

Row = List[Any]

TASK_COLUMNS: Dict[str, Tuple[str, ...]] = {
    'spectrum': ('S', 'index', 're', 'im'),
    'steady': ('S', 'purity', 'q_pt', 'magnetization', 'delta'),
    'pt-residual': ('S', 'i', 'j', 'residual'),
    'dynamics': ('S', 't', 'magnetization'),
    'trajectory': ('S', 't', 'mean', 'stderr', 'n_traj'),
    'perturb': ('S', 'q', 'l', 'first_order', 'second_order_re', 'second_order_im'),
    'check-pt': ('S', 'residual', 'symmetric'),
    'btc-detect': ('S', 'min_abs_re', 'n_candidates', 'base_frequency', 'commensurable', 'positive'),
}

# Tables written next to a task when dump_trajectories is on
DUMP_COLUMNS: Dict[str, Tuple[str, ...]] = {
    'trajectory-samples': ('S', 'seed', 't', 'sample', 'jumps'),
    'trajectory-jumps': ('S', 'seed', 't', 'channel'),
}


class TaskResult:
    """Result object for one workbench task"""

    def __init__(self, success: bool, task: str, path: str = "", message: str = "",
                 metadata: Dict = None, wall_time: float = 0.0, exit_code: int = 0):
        self.success = success
        self.task = task
        self.path = path
        self.message = message
        self.metadata = metadata or {}
        self.wall_time = wall_time
        self.exit_code = exit_code
        self.timestamp = datetime.now().isoformat()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'task': self.task,
            'success': self.success,
            'path': self.path,
            'message': self.message,
            'metadata': self.metadata,
            'wall_time': self.wall_time,
            'exit_code': self.exit_code,
            'timestamp': self.timestamp,
        }


def exit_code_for(error: Exception) -> int:
    return 3 if isinstance(error, NumericalFailure) else 2


def _param_cell(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, default=str, separators=(',', ':'))
    return value


def _series_label(recipe: FigureRecipe, key: Any) -> str:
    if recipe.series is None:
        return recipe.y
    if isinstance(key, float):
        return f"{recipe.series}={key:g}"
    return f"{recipe.series}={key}"


@dataclass(frozen=True)
class GridPoint:
    index: int
    values: Dict[str, Any]
    S: Optional[float] = None
    params: Any = None


@dataclass
class TaskTable:
    columns: Tuple[str, ...]
    rows: List[Row] = field(default_factory=list)


class TaskRunner:
    """Runs every task of a SweepConfig and writes tables, figures and the manifest"""

    def __init__(self, config: SweepConfig, writer: Optional[ResultWriter] = None, workers: Optional[int] = None):
        self.config = config
        self.family = get_family(config.model)
        self.writer = writer or ResultWriter(config.output_dir)
        self.workers = max(1, int(workers or config.workers or settings.get_int('workbench.workers', 1)))
        self.logger = setup_logger('Workbench', self.__class__.__name__)
        self.tables: Dict[str, TaskTable] = {}
        self.results: List[TaskResult] = []
        self._handlers: Dict[str, Callable[[GridPoint], List[Row]]] = {
            'spectrum': self._spectrum,
            'steady': self._steady,
            'pt-residual': self._pt_residual,
            'dynamics': self._dynamics,
            'trajectory': self._trajectory,
            'perturb': self._perturb,
            'check-pt': self._check_pt,
        }

    @property
    def param_columns(self) -> Tuple[str, ...]:
        return tuple(self.config.params)

    @property
    def exit_code(self) -> int:
        return max((r.exit_code for r in self.results), default=0)

    # ------------------------------------------------------------------ setup

    def _apply_tolerances(self) -> Dict[str, Any]:
        """Push config tolerance overrides into settings; returns the previous values"""
        previous = {}
        for key, value in self.config.tolerances.items():
            full_key = key if '.' in key else f'tolerances.{key}'
            current = settings.get(full_key)
            if current is None or isinstance(current, dict):
                raise ConfigError(f"Unknown tolerance '{key}'", self.config.source)
            previous[full_key] = current
            settings.set(full_key, value)
        return previous

    def _points(self, with_S: bool = True) -> List[GridPoint]:
        points = []
        for values in self.config.grid():
            ladder = self.config.S if with_S else [None]
            for S in ladder:
                params = self.family.make_params({**values, 'S': S}) if S is not None else None
                points.append(GridPoint(index=len(points), values=values, S=S, params=params))
        return points

    def _prefix(self, point: GridPoint) -> Row:
        return [_param_cell(point.values[name]) for name in self.param_columns]

    def _map(self, handler: Callable[[GridPoint], List[Row]], points: Sequence[GridPoint]) -> List[Row]:
        """Evaluate points on the pool; rows are concatenated in grid order"""
        if self.workers == 1:
            chunks = [handler(p) for p in points]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                chunks = list(pool.map(handler, points))
        return [row for chunk in chunks for row in chunk]

    # ------------------------------------------------------------------ tasks

    def _model(self, point: GridPoint) -> ModelSpec:
        return self.family.build(point.params)

    def _check_one_spin_cap(self, model: ModelSpec, cap_key: str, default: int):
        if isinstance(model.space, SpinSpace):
            cap = settings.get_float(cap_key, default)
            if model.space.S > cap:
                raise CapExceededError(f"{model.label}: S = {model.space.S} above {cap_key} = {cap}")

    def _spectrum(self, point: GridPoint) -> List[Row]:
        model = self._model(point)
        self._check_one_spin_cap(model, 'caps.one_spin_spectrum_S', 25)
        values = spectrum(build_liouvillian(model), with_modes=False).eigenvalues
        prefix = self._prefix(point)
        return [prefix + [float(point.S), k, float(v.real), float(v.imag)] for k, v in enumerate(values)]

    def _steady(self, point: GridPoint) -> List[Row]:
        model = self._model(point)
        rho = stationary_state(build_liouvillian(model))
        q = q_pt(rho, model.parity) if model.parity is not None else None
        mag = magnetization(rho) if isinstance(model.space, SpinSpace) else None
        delta = symmetry_delta(rho) if isinstance(model.space, ProductSpace) else None
        return [self._prefix(point) + [float(point.S), purity(rho), q, mag, delta]]

    def _pt_residual(self, point: GridPoint) -> List[Row]:
        """|ρ_ss - PTρ_ssPT| entry by entry, z-basis indices"""
        model = self._model(point)
        if model.parity is None:
            raise InvalidParameterError(f"{model.label} has no parity; the PT residual is undefined")
        residual = pt_residual_matrix(stationary_state(build_liouvillian(model)), model.parity)
        prefix = self._prefix(point)
        dim = residual.shape[0]
        return [prefix + [float(point.S), i, j, float(residual[i, j])] for i in range(dim) for j in range(dim)]

    def _initial_state(self, model: ModelSpec) -> Tuple[np.ndarray, OperatorMatrix]:
        """|m⟩ with m the magnetic number nearest polarization·S, and the Sz/S observable"""
        if isinstance(model.space, ProductSpace):
            factor = model.space.factor
        else:
            factor = model.space
        polarization = self.config.initial_polarization
        if abs(polarization) > 1:
            raise InvalidParameterError(f"initial_polarization must lie in [-1, 1], got {polarization}")
        m = factor.S - int(round(factor.S * (1 - polarization)))
        ket = spin_state(factor, m)
        sz = build_spin_operators(factor).sz / factor.S
        if isinstance(model.space, ProductSpace):
            observable = embed_a(sz)
            return np.kron(ket, ket), OperatorMatrix(model.space, observable.data, True, 'Sz,A/S')
        return ket, OperatorMatrix(model.space, sz.data, True, 'Sz/S')

    def _dynamics(self, point: GridPoint) -> List[Row]:
        model = self._model(point)
        self._check_one_spin_cap(model, 'caps.dynamics_S', 80)
        ket, observable = self._initial_state(model)
        times = self.config.time_grid.values()
        states = evolve(build_liouvillian(model), DensityMatrix.from_ket(model.space, ket), times)
        prefix = self._prefix(point)
        return [prefix + [float(point.S), float(t), float(expectation(rho, observable).real)]
                for t, rho in zip(times, states)]

    def _trajectory(self, point: GridPoint) -> List[Row]:
        model = self._model(point)
        ket, observable = self._initial_state(model)
        times = self.config.time_grid.values()
        # Seeds of different grid points never overlap
        base_seed = self.config.seed + point.index * self.config.trajectories
        average = ensemble_average(model, ket, times, self.config.trajectories, base_seed,
                                   observable=observable, workers=1)
        prefix = self._prefix(point)
        rows = []
        for k, t in enumerate(times):
            stderr = float(average.stderr[k]) if average.stderr is not None else None
            rows.append(prefix + [float(point.S), float(t), float(average.mean[k]), stderr, average.n_traj])
        return rows

    def _trajectory_dump(self, point: GridPoint) -> Tuple[List[Row], List[Row]]:
        """Samples and jump log of the first trajectory of the point's ensemble"""
        model = self._model(point)
        ket, observable = self._initial_state(model)
        times = self.config.time_grid.values()
        seed = self.config.seed + point.index * self.config.trajectories
        run = TrajectoryRunner(model, observable).run(ket, times, seed)
        prefix = self._prefix(point)
        jump_times = np.array([t for t, _ in run.jump_log])
        samples = [prefix + [float(point.S), seed, float(t), float(value), int(np.sum(jump_times <= t))]
                   for t, value in zip(times, run.samples)]
        jumps = [prefix + [float(point.S), seed, float(t), int(channel)] for t, channel in run.jump_log]
        return samples, jumps

    def _write_dumps(self, points: Sequence[GridPoint]) -> List[str]:
        if self.workers == 1:
            dumps = [self._trajectory_dump(p) for p in points]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                dumps = list(pool.map(self._trajectory_dump, points))
        paths = []
        for name, k in (('trajectory-samples', 0), ('trajectory-jumps', 1)):
            columns = self.param_columns + DUMP_COLUMNS[name]
            rows = [row for dump in dumps for row in dump[k]]
            paths.append(self.writer.write_table(name.replace('-', '_'), columns, rows))
            self.tables[name] = TaskTable(columns=columns, rows=rows)
        return paths

    def _perturb(self, point: GridPoint) -> List[Row]:
        if 'kappa' not in self.family.parameter_names:
            raise InvalidParameterError(f"Perturbation in κ needs a model with a 'kappa' parameter, not {self.family.name}")
        reference = self.family.build(replace(point.params, kappa=1.0))
        engine = PerturbationEngine(PerturbativeSplit.from_model(reference, kappa=1.0))
        table = engine.corrections(second=self.config.perturbation_order == 2)
        prefix = self._prefix(point)
        return [prefix + [float(S), int(q), int(l), float(first), float(re), float(im)]
                for S, q, l, first, re, im in table.rows()]

    def _check_pt(self, point: GridPoint) -> List[Row]:
        model = self._model(point)
        residual = check_liouvillian_pt(model)
        return [self._prefix(point) + [float(point.S), float(residual), bool(is_pt_symmetric(model))]]

    def _btc_detect(self, point: GridPoint) -> List[Row]:
        """One verdict over the whole S-ladder of a parameter combination"""
        eigenvalues = {}
        for S in self.config.S:
            model = self.family.build(self.family.make_params({**point.values, 'S': S}))
            self._check_one_spin_cap(model, 'caps.one_spin_spectrum_S', 25)
            eigenvalues[float(S)] = spectrum(build_liouvillian(model), with_modes=False).eigenvalues
        verdict = btc_detect_values(eigenvalues)
        prefix = self._prefix(point)
        return [prefix + [e.S, e.min_abs_re, len(e.candidates), verdict.base_frequency,
                          bool(verdict.commensurable), bool(verdict.positive)]
                for e in verdict.evidence]

    def run_task(self, task: str) -> TaskResult:
        columns = self.param_columns + TASK_COLUMNS[task]
        started = time.perf_counter()
        extra: List[str] = []
        try:
            if task == 'btc-detect':
                rows = self._map(self._btc_detect, self._points(with_S=False))
            else:
                rows = self._map(self._handlers[task], self._points())
            name = task.replace('-', '_')
            path = self.writer.write_table(name, columns, rows)
            if task == 'trajectory' and self.config.dump_trajectories:
                extra = self._write_dumps(self._points())
        except WorkbenchError as e:
            elapsed = time.perf_counter() - started
            self.logger.error(f"Task '{task}' failed: {e}")
            return TaskResult(False, task, message=str(e), wall_time=elapsed, exit_code=exit_code_for(e),
                              metadata={'columns': list(columns), 'error': type(e).__name__})

        self.tables[task] = TaskTable(columns=columns, rows=rows)
        elapsed = time.perf_counter() - started
        self.logger.info(f"Task '{task}': {len(rows)} rows in {elapsed:.3f} s")
        metadata = {'columns': list(columns), 'rows': len(rows)}
        if extra:
            metadata['extra'] = extra
        return TaskResult(True, task, path=path, message=f"{len(rows)} rows", wall_time=elapsed, metadata=metadata)

    # ---------------------------------------------------------------- figures

    def _column(self, table: TaskTable, name: str) -> int:
        if name not in table.columns:
            raise InvalidParameterError(f"Column '{name}' not in {list(table.columns)}")
        return table.columns.index(name)

    def _selected_rows(self, recipe: FigureRecipe, table: TaskTable) -> List[Row]:
        """Rows whose columns equal every value in recipe.where"""
        checks = [(self._column(table, name), value) for name, value in recipe.where.items()]

        def matches(cell: Any, value: Any) -> bool:
            if isinstance(value, (int, float)) and not isinstance(value, bool) and cell is not None:
                try:
                    return bool(np.isclose(float(cell), float(value), rtol=1e-12, atol=0.0))
                except (TypeError, ValueError):
                    return False
            return cell == value

        rows = [row for row in table.rows if all(matches(row[i], v) for i, v in checks)]
        if not rows:
            raise InvalidParameterError(f"Figure '{recipe.name}': no rows match {recipe.where}")
        return rows

    def _line_figure(self, recipe: FigureRecipe, table: TaskTable) -> str:
        xi, yi = self._column(table, recipe.x), self._column(table, recipe.y)
        groups: Dict[Any, Tuple[List[float], List[float]]] = {}
        si = self._column(table, recipe.series) if recipe.series else None
        for row in self._selected_rows(recipe, table):
            key = row[si] if si is not None else None
            xs, ys = groups.setdefault(key, ([], []))
            xs.append(np.nan if row[xi] is None else float(row[xi]))
            ys.append(np.nan if row[yi] is None else float(row[yi]))
        series = [LineSeries(label=_series_label(recipe, key), x=xs, y=ys) for key, (xs, ys) in groups.items()]
        style = FigureStyle(title=recipe.title, xlabel=recipe.x, ylabel=recipe.y)
        return export_line_svg(series, style)

    def _heatmap_figure(self, recipe: FigureRecipe, table: TaskTable) -> str:
        if not recipe.value:
            raise InvalidParameterError("Heatmap recipes need a 'value' column")
        xi, yi, vi = (self._column(table, recipe.x), self._column(table, recipe.y),
                      self._column(table, recipe.value))
        rows = self._selected_rows(recipe, table)
        xs = sorted({float(row[xi]) for row in rows})
        ys = sorted({float(row[yi]) for row in rows})
        matrix = np.full((len(ys), len(xs)), np.nan)
        for row in rows:
            value = row[vi]
            matrix[ys.index(float(row[yi])), xs.index(float(row[xi]))] = np.nan if value is None else float(value)
        style = FigureStyle(title=recipe.title, xlabel=recipe.x, ylabel=recipe.y, colorbar_label=recipe.value)
        return export_heatmap_svg(matrix, style, x_values=xs, y_values=ys)

    def render_figure(self, recipe: FigureRecipe) -> TaskResult:
        name = recipe.name or f"{recipe.task.replace('-', '_')}_{recipe.kind}_{recipe.y}"
        label = f"figure:{name}"
        table = self.tables.get(recipe.task)
        if table is None:
            return TaskResult(False, label, message=f"Task '{recipe.task}' produced no table", exit_code=2)
        started = time.perf_counter()
        try:
            if recipe.kind == 'line':
                svg = self._line_figure(recipe, table)
            else:
                svg = self._heatmap_figure(recipe, table)
            path = self.writer.write_text(f"{name}.svg", svg, 'svg')
        except WorkbenchError as e:
            self.logger.error(f"Figure '{name}' failed: {e}")
            return TaskResult(False, label, message=str(e), wall_time=time.perf_counter() - started,
                              exit_code=exit_code_for(e))
        return TaskResult(True, label, path=path, wall_time=time.perf_counter() - started)

    # -------------------------------------------------------------------- run

    def run(self) -> List[TaskResult]:
        previous = self._apply_tolerances()
        try:
            self.logger.info(f"Running {self.config.tasks} for model '{self.family.name}' over S={self.config.S}")
            for task in self.config.tasks:
                self.results.append(self.run_task(task))
            for recipe in self.config.figures:
                self.results.append(self.render_figure(recipe))
        finally:
            for key, value in previous.items():
                settings.set(key, value)

        self.writer.write_manifest(self.config.echo(), __version__, [r.to_dict() for r in self.results])
        failed = [r.task for r in self.results if not r.success]
        if failed:
            self.logger.warning(f"Failed: {failed}")
        return self.results


def run_config(config: SweepConfig, fmt: str = 'csv', workers: Optional[int] = None) -> TaskRunner:
    runner = TaskRunner(config, ResultWriter(config.output_dir, fmt), workers)
    runner.run()
    return runner
