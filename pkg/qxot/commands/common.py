"""Shared plumbing for the subcommands: options, config merging, error mapping, fan-out."""

import functools
import json
import re
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

import click
import numpy as np
from pydantic import ValidationError

from qxot.core.config import settings
from qxot.core.exceptions import InvariantViolation, QxotError, ResourceCapError, UsageError
from qxot.core.logging import get_logger, log_run_info
from qxot.core.telemetry import get_telemetry
from qxot.schemas.schemas import RunConfig

logger = get_logger("cli")

VARIANTS = click.Choice(["p1", "p2", "p2b"], case_sensitive=False)


def parse_bits(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[tuple]:
    if value is None:
        return None
    if not value or any(c not in "01" for c in value):
        raise click.BadParameter(f"expected a bit string such as 0110, got {value!r}")
    return tuple(int(c) for c in value)


def parse_tolerances(ctx: click.Context, param: click.Parameter, values: Iterable[str]) -> Dict[str, float]:
    tolerances = {}
    for item in values:
        name, sep, raw = item.partition("=")
        try:
            if not sep:
                raise ValueError
            tolerances[name.strip().upper()] = float(raw)
        except ValueError:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}") from None
    return tolerances


def common_options(func: Callable) -> Callable:
    """``--config``, ``--output-dir`` and ``--tolerance`` shared by every subcommand."""
    func = click.option(
        "--tolerance",
        "tolerances",
        multiple=True,
        callback=parse_tolerances,
        help="Override a numerical tolerance, e.g. FIDELITY_ATOL=1e-8.",
    )(func)
    func = click.option("--output-dir", type=click.Path(file_okay=False), default=None, help="Where report files go.")(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="JSON file with RunConfig fields; flags take precedence.",
    )(func)
    return func


def seed_option(func: Callable) -> Callable:
    return click.option("--seed", type=click.IntRange(min=0), envvar="QXOT_SEED", default=None, help="Random seed (or QXOT_SEED).")(func)


def fanout_options(func: Callable) -> Callable:
    func = click.option("--jobs", type=int, default=None, help="Worker processes for --runs.")(func)
    func = click.option("--runs", type=int, default=None, help="Independent seeded runs.")(func)
    return func


def build_config(command: str, config_path: Optional[str], require_seed: bool = False, **flags: Any) -> RunConfig:
    """Merge flags over the ``--config`` file over the settings defaults."""
    values: Dict[str, Any] = {}
    if config_path:
        try:
            values.update(json.loads(Path(config_path).read_text()))
        except json.JSONDecodeError as e:
            raise UsageError(f"config file {config_path} is not valid JSON: {e}") from None
    values.update({key: value for key, value in flags.items() if value is not None and value != {}})
    values["command"] = command
    if values.get("seed") is None:
        values["seed"] = settings.SEED
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e.errors()[0]['msg']}") from None
    if require_seed and config.seed is None:
        raise UsageError("a seed is required (pass --seed or set QXOT_SEED)")
    if config.runs > settings.MAX_RUNS:
        raise ResourceCapError(f"--runs {config.runs} exceeds the cap of {settings.MAX_RUNS}")
    config.apply_tolerances()
    return config


def handle_errors(command: str) -> Callable:
    """Turn :class:`QxotError` into the matching process exit code and record the run."""

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            saved = {name: getattr(settings, name) for name in settings.tolerance_names}
            try:
                result = func(*args, **kwargs)
            except QxotError as e:
                if isinstance(e, InvariantViolation) and (telemetry := get_telemetry()):
                    telemetry.track_violation(command, type(e).__name__)
                logger.error(f"{command} failed: {e.detail}")
                click.echo(f"Error: {e.detail}", err=True)
                raise click.exceptions.Exit(e.exit_code)
            finally:
                # --tolerance overrides last for one invocation
                for name, value in saved.items():
                    setattr(settings, name, value)
            if telemetry := get_telemetry():
                variant, runs = result if result else ("-", 1)
                telemetry.track_run(command, variant, time.perf_counter() - start, runs)
            return None

        return wrapper

    return decorator


def run_seeds(seed: int, runs: int) -> List[int]:
    """A single run keeps ``seed``; more runs get independent children of it."""
    if runs == 1:
        return [seed]
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(runs)]


def fan_out(worker: Callable, tasks: List[Any], jobs: int) -> List[Any]:
    """Run ``worker`` over ``tasks``; results keep task order regardless of ``jobs``."""
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def output_path(config: RunConfig, stem: str, suffix: str = ".json") -> Path:
    safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", stem)
    return Path(config.output_dir) / f"{safe}{suffix}"


def finish(command: str, config: RunConfig, paths: List[Path], **extra: Any) -> None:
    log_run_info(logger, command, {"seed": config.seed, "files": [str(p) for p in paths], **extra})
