"""
Command-Line Interface for ThreshScatter.
"""
import logging
import os
from typing import List, Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from .config import OPERATORS, RunConfig, validate_config
from .engine import RunEngine, RunResult
from .errors import ThreshScatterError, UsageError
from .profiles import LogGrid, write_profile
from .threshold import ell1_profile, manufactured_from_jet, resonance_jet

app = typer.Typer(
    help="ThreshScatter: threshold scattering toolkit for Schrodinger operators."
)

console = Console()

USAGE_EXIT = 2
CHECK_EXIT = 1


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level.")):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def parse_scales(raw: str) -> List[float]:
    """'1,2,4' -> [1.0, 2.0, 4.0]."""
    try:
        return [float(s) for s in raw.split(',') if s.strip()]
    except ValueError:
        raise ValueError(f"scales must be a comma-separated list of numbers, got {raw!r}")


def _build(data: dict, grid_n: Optional[int], out_dir: str) -> RunConfig:
    if grid_n is not None:
        data.setdefault('grid', {})['n'] = grid_n
    data['output'] = {'out_dir': out_dir}
    return validate_config(data)


def _print_result(result: RunResult):
    table = Table(title=f"{result.task} checks", show_lines=False)
    table.add_column("check")
    table.add_column("identity", style="cyan")
    table.add_column("value")
    table.add_column("status")
    for c in result.checks:
        status = "[green]pass[/green]" if c['passed'] else "[red]FAIL[/red]"
        table.add_row(c['name'], c['identity'], f"{c['value']}", status)
    console.print(table)


def _execute(title: str, make_engine) -> None:
    """Runs one task with the shared banner, spinner and exit-code contract."""
    console.print(Panel.fit(f"[bold blue]{title}[/bold blue]", border_style="blue"))
    try:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True
        ) as progress:
            task = progress.add_task("Loading configuration...", total=None)
            try:
                engine = make_engine()
            except ThreshScatterError:
                raise
            except (ValueError, FileNotFoundError) as e:
                raise UsageError(str(e)) from e
            progress.update(task, description=f"Running {engine.config.task}...")
            result = engine.run()
            progress.update(task, description="Writing reports...")
            table_path, summary_path = engine.write_reports(result)
    except (UsageError, FileNotFoundError) as e:
        console.print(f"[bold red]✗ Usage error:[/bold red] {e}")
        raise typer.Exit(code=USAGE_EXIT)
    except (ThreshScatterError, ValueError, ArithmeticError) as e:
        console.print(f"[bold red]✗ Error:[/bold red] {type(e).__name__}: {e}")
        raise typer.Exit(code=CHECK_EXIT)

    _print_result(result)
    console.print(f"Reports: {table_path}, {summary_path}")
    if not result.passed:
        console.print(f"[bold red]✗ Failed checks:[/bold red] {', '.join(result.failed)}")
        raise typer.Exit(code=CHECK_EXIT)
    console.print("[bold green]✓[/bold green] All checks passed")


OUT_OPTION = typer.Option(".", "--out", "-o", help="Directory for report.csv and summary.json.")
GRID_OPTION = typer.Option(None, "--n", help="Grid size (overrides THRESHSCATTER_GRID_N).")
SEED_OPTION = typer.Option(0, "--seed", help="Random seed, recorded in the summary.")


@app.command(name="run", help="Run a task described by a YAML/JSON config file.")
def run_config(
    config_path: str = typer.Argument(..., help="Path to the run config."),
):
    _execute(f"Run\nConfig: {config_path}", lambda: RunEngine.from_file(config_path))


@app.command(name="constants", help="Check the dimension constants and their closed-form identities.")
def run_constants(
    m: int = typer.Option(..., "--m", help="Dimension."),
    out_dir: str = OUT_OPTION,
):
    _execute(f"Constant suite, m={m}",
             lambda: RunEngine(_build({'task': 'constants', 'm': m}, None, out_dir)))


@app.command(name="kernel-check", help="Compare kernel routes against the t-integral on random (lambda, r).")
def run_kernel_check(
    m: int = typer.Option(..., "--m", help="Dimension."),
    samples: int = typer.Option(50, "--samples", help="Number of random points."),
    seed: int = SEED_OPTION,
    out_dir: str = OUT_OPTION,
):
    _execute(f"Kernel check, m={m}, {samples} samples",
             lambda: RunEngine(_build({'task': 'kernel-check', 'm': m, 'samples': samples, 'seed': seed},
                                      None, out_dir)))


@app.command(name="threshold", help="Classify the zero-energy threshold of a potential file.")
def run_threshold(
    potential: str = typer.Option(..., "--potential", help="Potential profile file."),
    out_dir: str = OUT_OPTION,
):
    _execute(f"Threshold analysis\nPotential: {potential}",
             lambda: RunEngine(_build({'task': 'threshold', 'potential': os.path.abspath(potential)}, None, out_dir)))


@app.command(name="probe", help="Dilation or window L^p probe of a threshold operator.")
def run_probe(
    p: float = typer.Option(..., "--p", help="Lebesgue exponent."),
    operator: str = typer.Option("zs", "--operator", help=f"One of {', '.join(OPERATORS)}."),
    scales: str = typer.Option("1,2,4,8,16,32,64", "--scales", help="Comma-separated increasing scales."),
    family: str = typer.Option("dilation", "--family", help="dilation or window."),
    expect: Optional[str] = typer.Option(None, "--expect", help="Expected verdict: bounded or growing."),
    grid_n: Optional[int] = GRID_OPTION,
    out_dir: str = OUT_OPTION,
):
    def make():
        data = {'task': 'probe', 'p': p, 'operator': operator, 'scales': parse_scales(scales),
                'family': family, 'expect': expect}
        return RunEngine(_build(data, grid_n, out_dir))
    _execute(f"L^p probe of {operator}, p={p:g}", make)


@app.command(name="representation", help="Cross-check the pairing representation formula on Gaussian pairs.")
def run_representation(
    m: int = typer.Option(..., "--m", help="Dimension."),
    lam: float = typer.Option(0.5, "--lambda", help="Spectral parameter."),
    seed: int = SEED_OPTION,
    grid_n: Optional[int] = GRID_OPTION,
    out_dir: str = OUT_OPTION,
):
    _execute(f"Representation formula, m={m}, lambda={lam:g}",
             lambda: RunEngine(_build({'task': 'representation', 'm': m, 'lambda': lam, 'seed': seed},
                                      grid_n, out_dir)))


@app.command(name="manufacture", help="Write a manufactured potential with a known threshold.")
def run_manufacture(
    output_path: str = typer.Argument(..., help="Profile file to write."),
    kind: str = typer.Option("resonance", "--kind", help="resonance (first kind) or ell1 (eigenfunction)."),
    grid_n: int = typer.Option(2048, "--n", help="Grid size."),
):
    """
    The resonance potential is V = -3(1+r^2)^{-2} with phi = (1+r^2)^{-1/2};
    ell1 writes a compactly supported V whose null space holds x_1 h(r).
    """
    jets = {'resonance': (resonance_jet, 0), 'ell1': (ell1_profile(), 1)}
    if kind not in jets:
        console.print(f"[bold red]✗ Usage error:[/bold red] unknown kind {kind!r}; expected resonance or ell1")
        raise typer.Exit(code=USAGE_EXIT)
    jet, ell = jets[kind]
    try:
        V, _ = manufactured_from_jet(LogGrid(n=grid_n), jet, ell, kind)
        write_profile(output_path, V.V, m=3, ell=ell)
    except ThreshScatterError as e:
        console.print(f"[bold red]✗ Error:[/bold red] {e}")
        raise typer.Exit(code=CHECK_EXIT)
    console.print(f"[bold green]✓[/bold green] Wrote {kind} potential to {output_path}")


if __name__ == "__main__":
    app()
