import sys
from dataclasses import dataclass
from pathlib import Path
import click
from tabulate import tabulate
from dqm.app.cli.levels import parse_levels
from dqm.core.numeric import NumericPolicy
from dqm.domain.errors import DqmError, InadmissibleDeletion, ParameterError, VerificationFailed
from dqm.infrastructure.logging_setup import configure_logging
from dqm.infrastructure.report_writer import dual_frame, kernel_frame, spectrum_frame, write_csv, write_json
from dqm.infrastructure.settings import RunConfig, output_dir, policy_from_env
from dqm.use_cases.deletion import Deletion
from dqm.use_cases.dual import DualTableReport
from dqm.use_cases.families import ExportCatalog, ListFamilies
from dqm.use_cases.kernel import TransitionKernelReport
from dqm.use_cases.spectrum import Spectrum
from dqm.use_cases.verify import DEFAULT_SEED, VerifyAll


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DOMAIN = 2
EXIT_VERIFICATION = 3
EXIT_INADMISSIBLE = 4

FLOATFMT = ".6g"

# family parameters may be given as --name value after the known options
EXTRA_ARGS = {"ignore_unknown_options": True, "allow_extra_args": True}


@dataclass(frozen=True)
class CliState:
    policy: NumericPolicy
    output_dir: Path


def exit_code(err: Exception) -> int:
    if isinstance(err, InadmissibleDeletion):
        return EXIT_INADMISSIBLE
    if isinstance(err, ParameterError):
        return EXIT_DOMAIN
    if isinstance(err, VerificationFailed):
        return EXIT_VERIFICATION
    return EXIT_FAILURE


def fail(err: Exception) -> None:
    click.echo(f"Failed: {err}", err=True)
    sys.exit(exit_code(err))


def parameter_overrides(params: tuple[str, ...], extra: list[str]) -> dict[str, float]:
    """--param name=value pairs plus trailing --name value pairs."""
    overrides: dict[str, float] = {}
    pairs = [p.partition("=") for p in params]
    if len(extra) % 2:
        raise click.UsageError(f"parameter option without value: {extra[-1]}")
    pairs += [(extra[i], "=", extra[i + 1]) for i in range(0, len(extra), 2)]
    for name, sep, value in pairs:
        name = name.lstrip("-")
        if not sep or not name:
            raise click.UsageError(f"expected name=value, got {name!r}")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise click.UsageError(f"parameter {name} needs a number, got {value!r}")
    return overrides


def levels_option(text: str) -> tuple[int, ...]:
    res = parse_levels(text)
    if res.is_err:
        fail(res.unwrap_err())
    return res.unwrap()


def report_name(kind: str, family: str | None, levels: tuple[int, ...] = ()) -> str:
    parts = [kind] + ([family] if family else []) + (["D" + "_".join(map(str, levels))] if levels else [])
    return "-".join(parts)


def echo_failed_checks(report: dict) -> None:
    failed = [c for c in report["checks"] if not c["passed"]]
    if failed:
        click.echo(tabulate([(c["name"], c["deviation"], c["tolerance"]) for c in failed],
                            headers=["failed check", "deviation", "tolerance"], floatfmt=FLOATFMT))


@click.group()
@click.option("--verbose", is_flag=True, help="Debug logging.")
@click.option("--precision", type=click.Choice(["extended", "double"]), default=None, help="Working precision.")
@click.option("--identity-tol", type=float, default=None, help="Tolerance for identity checks.")
@click.option("--output-dir", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Report directory (default $DQM_OUTPUT_DIR or the user data directory).")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, precision: str | None, identity_tol: float | None, out_dir: Path | None):
    configure_logging(verbose)
    try:
        policy = policy_from_env(precision=precision, identity_tol=identity_tol)
    except DqmError as e:
        fail(e)
    ctx.obj = CliState(policy, output_dir(out_dir))


@cli.command("spectrum", context_settings=EXTRA_ARGS)
@click.option("--family", required=True)
@click.option("--param", "params", multiple=True, help="name=value, repeatable.")
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def spectrum_cmd(ctx: click.Context, family: str, params: tuple[str, ...], output_format: str):
    state: CliState = ctx.obj
    overrides = parameter_overrides(params, ctx.args)
    config = RunConfig.create("spectrum", family, overrides, output_format=output_format)
    res = Spectrum(state.policy).execute(family, overrides)
    if res.is_err:
        fail(res.unwrap_err())
    report = res.unwrap()
    frame = spectrum_frame(report)
    click.echo(tabulate(frame.values.tolist(), headers=list(frame.columns), floatfmt=FLOATFMT))
    name = report_name("spectrum", family)
    if output_format == "csv":
        path = write_csv(state.output_dir, name, frame)
    else:
        path = write_json(state.output_dir, name, "spectrum", {"config": config.to_args(), **report})
    click.echo(f"Wrote {path}")
    if not report["passed"]:
        echo_failed_checks(report)
        fail(VerificationFailed(report["failed"]))


@cli.command("delete", context_settings=EXTRA_ARGS)
@click.option("--family", required=True)
@click.option("--param", "params", multiple=True, help="name=value, repeatable.")
@click.option("--levels", "levels_text", required=True, help='Deletion set, e.g. "1,2" or "1-4".')
@click.option("--special", is_flag=True, help="Also build D = {1..l} from the deforming polynomial.")
@click.option("--unsafe", is_flag=True, help="Allow inadmissible deletion sets.")
@click.pass_context
def delete_cmd(ctx: click.Context, family: str, params: tuple[str, ...], levels_text: str, special: bool, unsafe: bool):
    state: CliState = ctx.obj
    overrides = parameter_overrides(params, ctx.args)
    levels = levels_option(levels_text)
    flags = tuple(f for f, on in (("special", special), ("unsafe", unsafe)) if on)
    config = RunConfig.create("delete", family, overrides, levels=levels, flags=flags)
    res = Deletion(state.policy).execute(family, overrides, levels, special=special, unsafe=unsafe)
    if res.is_err:
        fail(res.unwrap_err())
    report = res.unwrap()
    click.echo(f"D={report['D']} admissible={report['admissible']} mu={report['mu']} "
               f"hermitian={report['hermiticity']['passed']}")
    rows = list(zip(report["expected_after"], report["spectrum_after"] or [None] * len(report["expected_after"])))
    click.echo(tabulate(rows, headers=["E(n), n not in D", "eigenvalue"], floatfmt=FLOATFMT))
    if special:
        agreement = report["special"]["generic_agreement"]
        click.echo(f"deforming polynomial path vs generic path: max deviation {agreement:.3e}"
                   if agreement is not None else "deforming polynomial path: no comparison (l = 0)")
    path = write_json(state.output_dir, report_name("delete", family, levels), "deletion",
                      {"config": config.to_args(), **report})
    click.echo(f"Wrote {path}")
    if not report["passed"]:
        echo_failed_checks(report)
        fail(VerificationFailed(report["failed"]))


@cli.command("kernel", context_settings=EXTRA_ARGS)
@click.option("--family", required=True)
@click.option("--param", "params", multiple=True, help="name=value, repeatable.")
@click.option("--levels", "levels_text", default="", help="Delete these levels first.")
@click.option("--t", "t", type=float, required=True, help="Time.")
@click.option("--x", "x", type=int, default=0, help="State whose return probability is fitted.")
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def kernel_cmd(ctx: click.Context, family: str, params: tuple[str, ...], levels_text: str, t: float, x: int,
               output_format: str):
    state: CliState = ctx.obj
    overrides = parameter_overrides(params, ctx.args)
    levels = levels_option(levels_text)
    config = RunConfig.create("kernel", family, overrides, levels=levels, output_format=output_format,
                              options={"t": t, "x": x})
    res = TransitionKernelReport(state.policy).execute(family, overrides, t, levels, x)
    if res.is_err:
        fail(res.unwrap_err())
    report = res.unwrap()
    decay = report["decay"]
    click.echo(f"{family} D={report['D']} t={report['t']:g}: spectral residual {report['spectral_residual']:.3e}, "
               f"decay rate {decay['fitted_rate']:.6g} (spectrum {decay['leading_rate']:.6g})")
    name = report_name("kernel", family, levels)
    if output_format == "csv":
        path = write_csv(state.output_dir, name, kernel_frame(report["kernel"]))
    else:
        path = write_json(state.output_dir, name, "transition-kernel", {"config": config.to_args(), **report})
    click.echo(f"Wrote {path}")
    if not report["passed"]:
        echo_failed_checks(report)
        fail(VerificationFailed(report["failed"]))


@cli.command("dual", context_settings=EXTRA_ARGS)
@click.option("--family", required=True)
@click.option("--param", "params", multiple=True, help="name=value, repeatable.")
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default="csv")
@click.pass_context
def dual_cmd(ctx: click.Context, family: str, params: tuple[str, ...], output_format: str):
    """Dual polynomials Q_x(E(n)): rows x, one column per energy."""
    state: CliState = ctx.obj
    overrides = parameter_overrides(params, ctx.args)
    config = RunConfig.create("dual", family, overrides, output_format=output_format)
    res = DualTableReport(state.policy).execute(family, overrides)
    if res.is_err:
        fail(res.unwrap_err())
    report = res.unwrap()
    frame = dual_frame(report)
    click.echo(f"{family}: Q_x(E(n)) for x <= {len(frame) - 1}, {frame.shape[1] - 1} energies, "
               f"duality deviation {report['duality_deviation']:.3e}")
    name = report_name("dual", family)
    if output_format == "csv":
        path = write_csv(state.output_dir, name, frame)
    else:
        path = write_json(state.output_dir, name, "dual-table", {"config": config.to_args(), **report})
    click.echo(f"Wrote {path}")
    if not report["passed"]:
        echo_failed_checks(report)
        fail(VerificationFailed(report["failed"]))


@cli.command("verify-all")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Seed of the randomized checks.")
@click.option("--tolerance", type=float, default=None, help="Grade every check against this tolerance instead.")
@click.option("--family", "families", multiple=True, help="Restrict to these families.")
@click.pass_context
def verify_all_cmd(ctx: click.Context, seed: int, tolerance: float | None, families: tuple[str, ...]):
    state: CliState = ctx.obj
    config = RunConfig.create("verify-all", tolerances={"tolerance": tolerance}, seed=seed)
    res = VerifyAll(state.policy).execute(seed, tolerance, families or None)
    if res.is_err:
        fail(res.unwrap_err())
    report = res.unwrap()
    passed = sum(c["passed"] for c in report["checks"])
    click.echo(f"{passed} of {len(report['checks'])} checks passed, {len(report['errors'])} errors")
    path = write_json(state.output_dir, report_name("verify-all", None), "verify-all",
                      {"config": config.to_args(), **report})
    click.echo(f"Wrote {path}")
    if not report["passed"]:
        echo_failed_checks(report)
        for line in report["errors"]:
            click.echo(line)
        fail(VerificationFailed(report["failed"]))


@cli.command("families")
@click.option("--json", "as_json", is_flag=True, help="Export the catalog as JSON.")
@click.pass_context
def families_cmd(ctx: click.Context, as_json: bool):
    if as_json:
        res = ExportCatalog().execute()
        if res.is_err:
            fail(res.unwrap_err())
        click.echo(res.unwrap())
        return
    res = ListFamilies().execute()
    if res.is_ok:
        click.echo(tabulate([(f["id"], f["title"], f["finite"], f["xi_implemented"], f["status"]) for f in res.unwrap()],
                            headers=["id", "title", "finite", "xi", "status"]))
    else:
        fail(res.unwrap_err())
