import click

from qxot.commands.common import VARIANTS, build_config, common_options, finish, handle_errors, output_path, parse_bits
from qxot.core.config import settings
from qxot.core.exceptions import InvariantViolation, UsageError
from qxot.core.logging import get_logger
from qxot.models.attacks import CheatAliceConfig
from qxot.protocols.adversaries import run_cheat_alice, undetectability_distance
from qxot.schemas.schemas import AttackReport, write_json

logger = get_logger("cli.attack")


@click.command("attack")
@click.option("--cheat-alice/--honest", "cheat", default=True, help="Coherent-key attack or the honest baseline.")
@click.option("--partial", is_flag=True, help="Keep the third key register classical (Protocol 1).")
@click.option("--target", type=click.Choice(["y1", "y2", "xor"], case_sensitive=False), default="xor", show_default=True)
@click.option("--variant", type=VARIANTS, default=None, help="XOT protocol variant.")
@click.option("--x", "x", default=None, callback=parse_bits, help="Alice's non-zero input; defaults from the target.")
@common_options
@handle_errors("attack")
def attack(cheat, partial, target, variant, x, config_path, output_dir, tolerances):
    """Exact success of a cheating Alice guessing both of Bob's bits."""
    config = build_config("attack", config_path, variant=variant and variant.lower(), output_dir=output_dir, tolerances=tolerances)
    if partial and not cheat:
        raise UsageError("--partial applies to the cheating attack only")
    attack_config = CheatAliceConfig(
        target=target.lower(),
        variant=config.variant,
        entangle_third=not partial,
        coherent_keys=cheat,
        x=x,
    )
    result = run_cheat_alice(attack_config)
    distance = undetectability_distance(attack_config)
    report = AttackReport.from_result(result, distance)
    path = write_json(report, output_path(config, f"attack_{attack_config.label}_{config.variant}_{attack_config.target.value}"))

    click.echo(f"avg success {result.average_success:.9f}")
    click.echo(f"undetectability distance {distance:.9f}")

    finish("attack", config, [path], strategy=attack_config.label, success=result.average_success)
    if distance > settings.INFO_ATOL:
        raise InvariantViolation(f"Bob's received state differs from the honest one by {distance!r}")
    return config.variant, 1
