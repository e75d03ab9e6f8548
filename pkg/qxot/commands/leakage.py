import click

from qxot.commands.common import VARIANTS, build_config, common_options, finish, handle_errors, output_path, parse_bits
from qxot.core.logging import get_logger
from qxot.models.attacks import BobStrategy, CheatAliceConfig
from qxot.models.reports import LeakageScenario
from qxot.protocols.leakage import make_report, write_report_csv
from qxot.schemas.schemas import LeakageBundle, LeakageReport, write_json

logger = get_logger("cli.leakage")

STRATEGIES = click.Choice([s.value for s in BobStrategy], case_sensitive=False)


@click.command("leakage")
@click.option("--n", "n", type=int, default=None, help="Number of XOT instances.")
@click.option("--prior", default=None, help="uniform, pairs_equal or point:<bits>.")
@click.option("--party", type=click.Choice(["bob", "alice"]), default="bob", show_default=True, help="Whose view is measured.")
@click.option("--strategy", "strategies", type=STRATEGIES, multiple=True, help="Bob strategies (default: all).")
@click.option("--variant", type=VARIANTS, default=None, help="XOT subprocedure.")
@click.option("--cheat-alice", is_flag=True, help="Alice holds her keys coherently (party alice).")
@click.option("--x", "x", default=None, callback=parse_bits, help="Alice's fixed input (party alice).")
@click.option("--scenario-id", default=None, help="Label for the report rows.")
@common_options
@handle_errors("leakage")
def leakage(n, prior, party, strategies, variant, cheat_alice, x, scenario_id, config_path, output_dir, tolerances):
    """Information one party's view carries about the other's input."""
    config = build_config(
        "leakage",
        config_path,
        n=n,
        prior=prior,
        strategies=list(strategies) or None,
        variant=variant and variant.lower(),
        output_dir=output_dir,
        tolerances=tolerances,
    )
    n = config.n or 1
    if party == "alice":
        names = (BobStrategy.OPTIMAL_HOLEVO.value,)
        cheat = CheatAliceConfig(variant=config.variant, coherent_keys=cheat_alice)
        label = f"alice_n{n}_{'coherent' if cheat_alice else 'honest'}"
    else:
        names = tuple(config.strategies)
        cheat = None
        label = f"bob_n{n}_{config.prior}"
    scenario = LeakageScenario(
        scenario_id=scenario_id or label,
        n=n,
        prior=config.prior,
        party=party,
        strategies=names,
        variant=config.variant,
        cheat=cheat,
        x=x,
    )
    report = make_report(scenario)

    csv_path = write_report_csv([report], output_path(config, f"leakage_{scenario.scenario_id}", ".csv"))
    json_path = write_json(
        LeakageBundle(reports=[LeakageReport.from_report(report)]),
        output_path(config, f"leakage_{scenario.scenario_id}"),
    )
    for name, bits in report.strategies.items():
        click.echo(f"{name} {bits:.9f}")
    click.echo(f"holevo {report.holevo_bits:.9f} of {report.entropy_of_secret:.9f} bits")

    finish("leakage", config, [csv_path, json_path], scenario=scenario.scenario_id, holevo=report.holevo_bits)
    return scenario.scenario_id, 1
