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
    parse_bits,
    run_seeds,
    seed_option,
)
from qxot.core.exceptions import InvariantViolation, ShadowMismatchError
from qxot.core.logging import get_logger
from qxot.protocols.linear_eval import bob_plaintext_view, inner_product, run_p3, run_p3_he, xor_share
from qxot.protocols.xor_he import he_keygen
from qxot.schemas.schemas import LinearRecord, P3RunRecord, RunConfig, RunSummary, write_json

logger = get_logger("cli.linear")


def _session(x, y, seed: int, variant: str, he: bool, prime_bits: int) -> P3RunRecord:
    if not he:
        return P3RunRecord.from_run(run_p3(x, y, seed, variant))
    # keys come from their own stream so the protocol draws match the plain run
    keys = he_keygen(prime_bits, np.random.default_rng((seed, 1)))
    run = run_p3_he(x, y, keys, seed, variant)
    disclosed = bob_plaintext_view(run)
    if len(disclosed) != 1:
        raise InvariantViolation(f"Bob saw {len(disclosed)} plaintext bits, expected exactly one")
    shadow = run_p3(x, y, seed, variant)
    if shadow.output != run.output:
        logger.error(f"Homomorphic run output {run.output} differs from plaintext shadow {shadow.output}")
        raise ShadowMismatchError(f"homomorphic output {run.output} differs from the plaintext shadow {shadow.output}")
    return P3RunRecord.from_run(run, he_keys=keys, plaintext_shadow=shadow.output)


def _run_one(task: tuple) -> LinearRecord:
    config, x, y, seed, he, y_shares = task
    RunConfig(**config).apply_tolerances()
    if y_shares > 1:
        shares = xor_share(y, y_shares, np.random.default_rng((seed, 2)))
        seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(y_shares)]
    else:
        shares, seeds = [tuple(y)], [seed]
    records = [_session(x, share, s, config["variant"], he, config["prime_bits"]) for share, s in zip(shares, seeds)]
    output = 0
    for record in records:
        output ^= record.output
    expected = inner_product(x, y)
    return LinearRecord(
        seed=seed,
        x=list(x),
        y=list(y),
        output=output,
        expected=expected,
        correct=output == expected,
        shares=records,
    )


@click.command("linear")
@click.option("--variant", type=VARIANTS, default=None, help="XOT subprocedure.")
@click.option("--x", "x", required=True, callback=parse_bits, help="Alice's 2n bits.")
@click.option("--y", "y", required=True, callback=parse_bits, help="Bob's 2n coefficients.")
@click.option("--he", is_flag=True, help="Combine the picked outcomes under XOR-homomorphic encryption.")
@click.option("--prime-bits", type=int, default=None, help="Bit length of each encryption prime.")
@click.option("--y-shares", type=int, default=1, show_default=True, help="Evaluate y as this many XOR shares.")
@seed_option
@fanout_options
@common_options
@handle_errors("linear")
def linear(variant, x, y, he, prime_bits, y_shares, seed, runs, jobs, config_path, output_dir, tolerances):
    """Evaluate <x, y> mod 2 with Protocol 3."""
    config = build_config(
        "linear",
        config_path,
        require_seed=True,
        variant=variant and variant.lower(),
        n=len(x) // 2,
        prime_bits=prime_bits,
        seed=seed,
        runs=runs,
        jobs=jobs,
        output_dir=output_dir,
        tolerances=tolerances,
    )
    if y_shares < 1:
        raise click.BadParameter("must be at least 1", param_hint="--y-shares")
    seeds = run_seeds(config.seed, config.runs)
    tasks = [(config.model_dump(), x, y, s, he, y_shares) for s in seeds]
    records = fan_out(_run_one, tasks, config.jobs)

    mode = "he" if he else "plain"
    stem = f"linear_{config.variant}_{mode}_seed{config.seed}"
    if config.runs == 1:
        (record,) = records
        path = write_json(record, output_path(config, stem))
        click.echo(f"output {record.output}")
        click.echo(f"expected {record.expected} ({'ok' if record.correct else 'MISMATCH'})")
        if he:
            click.echo("plaintext shadow ok")
    else:
        summary = RunSummary(
            command="linear",
            base_seed=config.seed,
            runs=config.runs,
            failures=sum(not r.correct for r in records),
            outputs=[r.output for r in records],
        )
        path = write_json(summary, output_path(config, f"{stem}_runs{config.runs}"))
        click.echo(f"runs {config.runs} failures {summary.failures}")

    failures = sum(not r.correct for r in records)
    finish("linear", config, [path], variant=config.variant, he=he, failures=failures)
    if failures:
        raise InvariantViolation(f"{failures} run(s) returned the wrong inner product")
    return config.variant, config.runs
