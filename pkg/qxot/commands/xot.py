import click

from qxot.commands.common import (
    VARIANTS,
    build_config,
    common_options,
    fan_out,
    fanout_options,
    finish,
    handle_errors,
    output_path,
    parse_bits,
    run_seeds,
    seed_option,
)
from qxot.core.exceptions import InvariantViolation
from qxot.core.logging import get_logger
from qxot.protocols.xot import run_xot
from qxot.schemas.schemas import RunConfig, RunSummary, XotTranscript, write_json

logger = get_logger("cli.xot")


def _run_one(task: tuple) -> XotTranscript:
    config, x, y, seed = task
    RunConfig(**config).apply_tolerances()
    return XotTranscript.from_run(run_xot(config["variant"], x, y, seed))


@click.command("xot")
@click.option("--variant", type=VARIANTS, default=None, help="XOT protocol variant.")
@click.option("--x", "x", required=True, callback=parse_bits, help="Alice's two bits, e.g. 10.")
@click.option("--y", "y", required=True, callback=parse_bits, help="Bob's two bits, e.g. 11.")
@seed_option
@fanout_options
@common_options
@handle_errors("xot")
def xot(variant, x, y, seed, runs, jobs, config_path, output_dir, tolerances):
    """Run one XOR oblivious transfer and write its transcript."""
    config = build_config(
        "xot",
        config_path,
        require_seed=True,
        variant=variant and variant.lower(),
        seed=seed,
        runs=runs,
        jobs=jobs,
        output_dir=output_dir,
        tolerances=tolerances,
    )
    seeds = run_seeds(config.seed, config.runs)
    transcripts = fan_out(_run_one, [(config.model_dump(), x, y, s) for s in seeds], config.jobs)

    if config.runs == 1:
        (transcript,) = transcripts
        path = write_json(transcript, output_path(config, f"xot_{config.variant}_seed{config.seed}"))
        click.echo(f"output {transcript.output}")
        click.echo(f"expected {transcript.expected} ({'ok' if transcript.correct else 'MISMATCH'})")
        failures = 0 if transcript.correct else 1
    else:
        failures = sum(not t.correct for t in transcripts)
        summary = RunSummary(
            command="xot",
            base_seed=config.seed,
            runs=config.runs,
            failures=failures,
            outputs=[t.output for t in transcripts],
        )
        path = write_json(summary, output_path(config, f"xot_{config.variant}_seed{config.seed}_runs{config.runs}"))
        click.echo(f"runs {config.runs} failures {failures}")

    finish("xot", config, [path], variant=config.variant, failures=failures)
    if failures:
        raise InvariantViolation(f"{failures} run(s) decoded the wrong XOR bit")
    return config.variant, config.runs
