from pathlib import Path

import click
import numpy as np

from qxot.commands.common import (
    VARIANTS,
    build_config,
    common_options,
    fan_out,
    fanout_options,
    finish,
    handle_errors,
    output_path,
    run_seeds,
    seed_option,
)
from qxot.core.config import settings
from qxot.core.exceptions import InvariantViolation, UsageError
from qxot.core.logging import get_logger
from qxot.models.states import Ket
from qxot.protocols.twoparty_qc import load_circuit, run_interactive
from qxot.schemas.schemas import RunConfig, RunLog, RunSummary, write_json

logger = get_logger("cli.qc")


def input_state(spec: str, num_qubits: int, seed: int) -> Ket:
    """``zero``, ``random`` (Haar, drawn from ``seed``) or a basis bit string."""
    if spec == "zero":
        return Ket.basis(0, num_qubits)
    if spec == "random":
        generator = np.random.default_rng((seed, 3))
        amplitudes = generator.normal(size=2**num_qubits) + 1j * generator.normal(size=2**num_qubits)
        return Ket.normalized(num_qubits, amplitudes)
    if len(spec) != num_qubits or any(c not in "01" for c in spec):
        raise UsageError(f"--input must be zero, random or {num_qubits} bits, got {spec!r}")
    return Ket.from_bits([int(c) for c in spec])


def _run_one(task: tuple) -> RunLog:
    config, spec, batch, seed = task
    RunConfig(**config).apply_tolerances()
    circuit = load_circuit(config["circuit"])
    state, log = run_interactive(input_state(spec, circuit.num_qubits, seed), circuit, seed, batch, config["variant"])
    return RunLog.from_log(log, Path(config["circuit"]).name, state)


@click.command("qc")
@click.option("--circuit", type=click.Path(dir_okay=False), default=None, help="Clifford+T circuit file.")
@click.option("--input", "input_spec", default="zero", show_default=True, help="zero, random or a basis bit string.")
@click.option("--batch", is_flag=True, help="One Protocol 3 session per stage with a shared k0.")
@click.option("--variant", type=VARIANTS, default=None, help="XOT subprocedure of the T corrections.")
@seed_option
@fanout_options
@common_options
@handle_errors("qc")
def qc(circuit, input_spec, batch, variant, seed, runs, jobs, config_path, output_dir, tolerances):
    """Evaluate Bob's circuit on Alice's state interactively and compare with direct evaluation."""
    config = build_config(
        "qc",
        config_path,
        require_seed=True,
        circuit=circuit,
        variant=variant and variant.lower(),
        seed=seed,
        runs=runs,
        jobs=jobs,
        output_dir=output_dir,
        tolerances=tolerances,
    )
    if config.circuit is None:
        raise UsageError("a circuit file is required (--circuit)")
    # parse once up front so format errors surface before any worker starts
    load_circuit(config.circuit)

    seeds = run_seeds(config.seed, config.runs)
    logs = fan_out(_run_one, [(config.model_dump(), input_spec, batch, s) for s in seeds], config.jobs)

    stem = f"qc_{Path(config.circuit).stem}_seed{config.seed}"
    worst = min(log.fidelity for log in logs)
    if config.runs == 1:
        path = write_json(logs[0], output_path(config, stem))
    else:
        failures = sum(log.fidelity < 1.0 - settings.FIDELITY_ATOL for log in logs)
        summary = RunSummary(command="qc", base_seed=config.seed, runs=config.runs, failures=failures, outputs=[])
        path = write_json(summary, output_path(config, f"{stem}_runs{config.runs}"))
    click.echo(f"fidelity {worst:.9f}")

    finish("qc", config, [path], circuit=config.circuit, fidelity=worst)
    if worst < 1.0 - settings.FIDELITY_ATOL:
        raise InvariantViolation(f"interactive output fidelity {worst!r} below 1")
    return Path(config.circuit).stem, config.runs
