"""JSON run configuration: one document drives simulation and bound reports.

A config is parsed and fully validated up front, so every invariant error
surfaces before any work starts. Syntax errors carry line:column from the
JSON parser; semantic errors carry the offending field path.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pooltest.model import MAX_POPULATION, Prior, TestParams
from pooltest.simulate import EpisodeConfig, make_stopping


class ConfigError(ValueError):
    """Invalid run configuration (bad syntax, field, or value)."""


_TOP_KEYS = {
    "population", "prior", "true_params", "assumed_params", "delta",
    "max_tests", "strategy", "runs", "seed", "output_dir", "truth_mode",
    "k_infected", "grid", "deltas", "checkpoints", "nu", "nu_prime",
    "nu_trace",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated campaign description shared by the CLI commands."""

    prior: Prior
    true_params: TestParams
    assumed_params: TestParams
    delta: float
    max_tests: int
    strategy: str
    runs: int
    seed: int
    output_dir: Optional[Path]
    truth_mode: str
    k_infected: int
    grid: Optional[Tuple[Tuple[float, float], ...]]
    deltas: Tuple[float, ...]
    checkpoints: Tuple[int, ...]
    nu: float
    nu_prime: float
    nu_trace: Optional[Path]

    @property
    def matched(self) -> bool:
        return self.assumed_params == self.true_params

    def episode_config(self) -> EpisodeConfig:
        return EpisodeConfig(
            prior=self.prior,
            true_params=self.true_params,
            assumed_params=self.assumed_params,
            stopping=make_stopping(self.prior, self.delta, self.max_tests),
            strategy=self.strategy,
            truth_mode=self.truth_mode,
            k_infected=self.k_infected,
            seed=self.seed,
        )

    def sweep_grid(self) -> Tuple[Tuple[float, float], ...]:
        """Cells to simulate: explicit grid, else the single assumed cell."""
        if self.grid is not None:
            return self.grid
        return ((self.assumed_params.specificity, self.assumed_params.sensitivity),)


def _expect(mapping: Dict[str, Any], key: str, kinds, path: str, required: bool = True, default=None):
    if key not in mapping:
        if required:
            raise ConfigError(f"field '{path}': required but missing")
        return default
    value = mapping[key]
    # bool passes isinstance(int) checks, but "true" is never a valid count
    if isinstance(value, bool) or not isinstance(value, kinds):
        names = "/".join(k.__name__ for k in (kinds if isinstance(kinds, tuple) else (kinds,)))
        raise ConfigError(f"field '{path}': expected {names}, got {type(value).__name__}")
    return value


def _parse_params(raw: Dict[str, Any], path: str) -> TestParams:
    s = _expect(raw, "sensitivity", (int, float), f"{path}.sensitivity")
    sigma = _expect(raw, "specificity", (int, float), f"{path}.specificity")
    extra = set(raw) - {"sensitivity", "specificity"}
    if extra:
        raise ConfigError(f"field '{path}': unknown keys {sorted(extra)}")
    try:
        return TestParams(float(s), float(sigma))
    except ValueError as exc:
        raise ConfigError(f"field '{path}': {exc}") from exc


def _parse_prior(raw: Dict[str, Any], n: int) -> Prior:
    if not isinstance(raw, dict):
        raise ConfigError(f"field 'prior': expected object, got {type(raw).__name__}")
    keys = set(raw)
    try:
        if keys == {"q"}:
            q = _expect(raw, "q", (int, float), "prior.q")
            return Prior.uniform(n, float(q))
        if keys == {"per_individual"}:
            values = _expect(raw, "per_individual", list, "prior.per_individual")
            if len(values) != n:
                raise ConfigError(
                    f"field 'prior.per_individual': length {len(values)} != population {n}"
                )
            for i, v in enumerate(values):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(
                        f"field 'prior.per_individual[{i}]': expected number, got {type(v).__name__}"
                    )
            return Prior([float(v) for v in values])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"field 'prior': {exc}") from exc
    raise ConfigError("field 'prior': must contain exactly one of 'q' or 'per_individual'")


def parse_config(text: str, source: str = "config") -> RunConfig:
    """Parse and validate a JSON config document.

    source is used as the filename prefix in error messages.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")

    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")

    n = _expect(raw, "population", int, "population")
    if not 1 <= n <= MAX_POPULATION:
        raise ConfigError(f"field 'population': must lie in [1, {MAX_POPULATION}], got {n}")

    prior = _parse_prior(_expect(raw, "prior", dict, "prior"), n)
    true_params = _parse_params(_expect(raw, "true_params", dict, "true_params"), "true_params")
    assumed_raw = _expect(raw, "assumed_params", dict, "assumed_params", required=False)
    assumed_params = (
        _parse_params(assumed_raw, "assumed_params") if assumed_raw is not None else true_params
    )

    delta = float(_expect(raw, "delta", (int, float), "delta"))
    if not 0.0 <= delta <= 1.0:
        raise ConfigError(f"field 'delta': must lie in [0, 1], got {delta}")

    max_tests = _expect(raw, "max_tests", int, "max_tests")
    if max_tests < 1:
        raise ConfigError(f"field 'max_tests': must be >= 1, got {max_tests}")

    strategy = _expect(raw, "strategy", str, "strategy", required=False, default="exhaustive")
    if strategy not in ("exhaustive", "greedy"):
        raise ConfigError(f"field 'strategy': must be 'exhaustive' or 'greedy', got '{strategy}'")

    runs = _expect(raw, "runs", int, "runs", required=False, default=1)
    if runs < 1:
        raise ConfigError(f"field 'runs': must be >= 1, got {runs}")

    seed = _expect(raw, "seed", int, "seed", required=False, default=0)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"field 'seed': must be an unsigned 64-bit integer, got {seed}")

    out_raw = _expect(raw, "output_dir", str, "output_dir", required=False)
    output_dir = Path(out_raw) if out_raw is not None else None

    truth_mode = _expect(raw, "truth_mode", str, "truth_mode", required=False, default="prior")
    if truth_mode not in ("prior", "fixed_k"):
        raise ConfigError(f"field 'truth_mode': must be 'prior' or 'fixed_k', got '{truth_mode}'")

    k_infected = _expect(raw, "k_infected", int, "k_infected", required=False, default=1)
    if truth_mode == "fixed_k" and not 1 <= k_infected <= n:
        raise ConfigError(f"field 'k_infected': must lie in [1, {n}], got {k_infected}")

    grid_raw = _expect(raw, "grid", list, "grid", required=False)
    grid: Optional[Tuple[Tuple[float, float], ...]] = None
    if grid_raw is not None:
        cells: List[Tuple[float, float]] = []
        for i, cell in enumerate(grid_raw):
            if (
                not isinstance(cell, list)
                or len(cell) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in cell)
            ):
                raise ConfigError(f"field 'grid[{i}]': expected [sigma_prime, s_prime] pair")
            sigma_p, s_p = float(cell[0]), float(cell[1])
            try:
                TestParams(s_p, sigma_p)
            except ValueError as exc:
                raise ConfigError(f"field 'grid[{i}]': {exc}") from exc
            cells.append((sigma_p, s_p))
        if not cells:
            raise ConfigError("field 'grid': must list at least one cell")
        grid = tuple(cells)

    deltas_raw = _expect(raw, "deltas", list, "deltas", required=False)
    if deltas_raw is None:
        deltas = (delta,)
    else:
        for i, d in enumerate(deltas_raw):
            if isinstance(d, bool) or not isinstance(d, (int, float)) or not 0.0 <= d <= 1.0:
                raise ConfigError(f"field 'deltas[{i}]': must be a number in [0, 1]")
        if not deltas_raw:
            raise ConfigError("field 'deltas': must list at least one threshold")
        deltas = tuple(float(d) for d in deltas_raw)

    checkpoints_raw = _expect(raw, "checkpoints", list, "checkpoints", required=False)
    if checkpoints_raw is None:
        checkpoints = (4, 8)
    else:
        for i, c in enumerate(checkpoints_raw):
            if isinstance(c, bool) or not isinstance(c, int) or not 1 <= c <= max_tests:
                raise ConfigError(f"field 'checkpoints[{i}]': must be an integer in [1, max_tests]")
        checkpoints = tuple(checkpoints_raw)

    nu = float(_expect(raw, "nu", (int, float), "nu", required=False, default=0.0))
    if nu < 0.0:
        raise ConfigError(f"field 'nu': must be >= 0, got {nu}")
    nu_prime = float(_expect(raw, "nu_prime", (int, float), "nu_prime", required=False, default=0.0))
    if nu_prime < 0.0:
        raise ConfigError(f"field 'nu_prime': must be >= 0, got {nu_prime}")

    trace_raw = _expect(raw, "nu_trace", str, "nu_trace", required=False)
    nu_trace = Path(trace_raw) if trace_raw is not None else None

    cfg = RunConfig(
        prior=prior,
        true_params=true_params,
        assumed_params=assumed_params,
        delta=delta,
        max_tests=max_tests,
        strategy=strategy,
        runs=runs,
        seed=seed,
        output_dir=output_dir,
        truth_mode=truth_mode,
        k_infected=k_infected,
        grid=grid,
        deltas=deltas,
        checkpoints=checkpoints,
        nu=nu,
        nu_prime=nu_prime,
        nu_trace=nu_trace,
    )
    cfg.episode_config()  # trigger every downstream invariant before any work
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a config file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: {exc.strerror or exc}") from exc
    return parse_config(text, source=str(p))


def load_f_traces(path: str | Path) -> List[List[float]]:
    """Read achieved-f traces for noise estimation: one CSV row per episode."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: {exc.strerror or exc}") from exc
    traces: List[List[float]] = []
    for row_no, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row:
            continue
        try:
            traces.append([float(v) for v in row])
        except ValueError as exc:
            raise ConfigError(f"{p}:{row_no}: non-numeric f value") from exc
    if not traces:
        raise ConfigError(f"{p}: no traces found")
    return traces
