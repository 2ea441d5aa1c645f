"""Command-line drivers.

Exit codes: 0 success, 1 validation/invariant failure, 2 solver failure.
Route lengths print with 2 decimals; CSV files carry full precision.
"""

from __future__ import annotations

import sys

import click
import numpy as np

from .bcd import BcdConfig, OracleFailure, SigmaRunaway
from .ctsp import CtspConfig, Instance, Tour, optimize_points, route_length
from .geometry import centroid
from .heuristics import SearchStats, constructive_insertion, relocation_local_search
from .instances import InstanceError, generate_instance, load_instance, preprocess, random_point, save_instance
from .render import render_svg


def _load(path) -> Instance:
    try:
        return load_instance(path)
    except InstanceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _print_stats_table(stats: SearchStats) -> None:
    click.echo(f"{'iter':>5} {'route length':>16} {'calls':>8} {'cycles':>10} "
               f"{'acc calls':>10} {'acc cycles':>12}")
    for r in stats.rows:
        click.echo(
            f"{r.iter:>5} {r.route_length:>16.2f} {r.bcd_calls:>8} {r.bcd_cycles:>10} "
            f"{r.accum_calls:>10} {r.accum_cycles:>12}"
        )


@click.group()
def main():
    """Continuous TSP over polygon regions via block coordinate descent."""


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True, help="Seed for the construction's starting points.")
@click.option("--alpha", default=1e-8, show_default=True, help="Sufficient-descent parameter.")
@click.option("--stats", "stats_path", default=None, type=click.Path(dir_okay=False), help="Write the per-iteration table as CSV.")
@click.option("--svg", "svg_path", default=None, type=click.Path(dir_okay=False), help="Render the final route as SVG.")
def solve(instance_path, seed, alpha, stats_path, svg_path):
    """Construct a tour by cheapest insertion, then improve it by relocation."""
    inst = _load(instance_path)
    config = CtspConfig(bcd=BcdConfig(alpha=alpha, max_cycles=500))
    try:
        tour, stats = constructive_insertion(inst, config, rng_seed=seed)
        tour, stats = relocation_local_search(tour, inst, config, stats)
    except (OracleFailure, SigmaRunaway) as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(2)
    _print_stats_table(stats)
    click.echo(f"final route length: {route_length(tour):.2f}")
    if stats_path:
        stats.write_csv(stats_path)
    if svg_path:
        render_svg(inst, tour=tour, path=svg_path)


@main.command(name="optimize-route")
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--perm", "perm_text", required=True, help="Visiting order as 1-based ids, e.g. '1,3,2'.")
@click.option("--init", "init_mode", type=click.Choice(["random", "centroid"]), default="centroid", show_default=True)
@click.option("--seed", default=0, show_default=True, help="Seed for --init random.")
@click.option("--alpha", default=1e-8, show_default=True)
@click.option("--cycles-table", "cycles_path", default=None, type=click.Path(dir_okay=False), help="Write per-cycle route lengths as CSV.")
@click.option("--trail", "trail_path", default=None, type=click.Path(dir_okay=False), help="Render per-cycle routes as an SVG trail.")
def optimize_route(instance_path, perm_text, init_mode, seed, alpha, cycles_path, trail_path):
    """Optimize the points of a fixed visiting order and report each cycle."""
    inst = _load(instance_path)
    try:
        perm = [int(tok) - 1 for tok in perm_text.replace(" ", "").split(",") if tok]
    except ValueError:
        click.echo("error: --perm must be a comma-separated list of integers", err=True)
        sys.exit(1)
    if sorted(perm) != list(range(inst.p)):
        click.echo(f"error: --perm must be a permutation of 1..{inst.p}", err=True)
        sys.exit(1)
    rng = np.random.default_rng(seed)
    if init_mode == "random":
        x0 = [random_point(inst.polygons[c], rng) for c in perm]
    else:
        x0 = [centroid(inst.polygons[c]) for c in perm]

    config = CtspConfig(bcd=BcdConfig(alpha=alpha, max_cycles=500))
    snapshots = []

    def observer(state, rec, n=len(perm)):
        if state.k % n == 0:
            snapshots.append([pt.copy() for pt in state.x])

    try:
        pts, state = optimize_points(inst, perm, x0, config, observer=observer)
    except (OracleFailure, SigmaRunaway) as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(2)

    lengths = [state.f0] + state.cycle_end_values()
    click.echo(f"{'cycle':>6} {'route length':>16}")
    for c, val in enumerate(lengths):
        click.echo(f"{c:>6} {val:>16.2f}")
    click.echo(f"termination: {state.termination} after {state.cycles} cycles")

    if cycles_path:
        lines = ["cycle,route_length"]
        lines += [f"{c},{val:.17g}" for c, val in enumerate(lengths)]
        with open(cycles_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    if trail_path:
        trail = [list(x0)] + snapshots
        points = [None] * inst.p
        for pos, c in enumerate(perm):
            points[c] = pts[pos]
        tour = Tour(perm, points)
        render_svg(inst, tour=tour, trail=trail, path=trail_path)


@main.command(name="preprocess")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--target", default=50, show_default=True, help="Target vertex count per polygon.")
@click.option("--shrink", default=0.8, show_default=True, help="Shrink factor about the bbox center.")
def preprocess_cmd(in_path, out_path, target, shrink):
    """Subsample and shrink every polygon of an instance."""
    inst = _load(in_path)
    try:
        out = preprocess(inst, target_vertices=target, shrink=shrink)
    except InstanceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for i, (before, after) in enumerate(zip(inst.polygons, out.polygons)):
        click.echo(f"polygon {i + 1}: {before.n_vertices} -> {after.n_vertices} vertices")
    save_instance(out, out_path)


# click derives "preprocess-cmd" from the function name; force the plain name
preprocess_cmd.name = "preprocess"


@main.command()
@click.option("--p", "p", required=True, type=int, help="Number of polygons.")
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--spread", default=10.0, show_default=True, help="Grid pitch between polygon centers.")
def generate(p, seed, out_path, spread):
    """Generate a random instance of disjoint star-shaped polygons."""
    try:
        inst = generate_instance(p, seed, spread=spread)
    except InstanceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    save_instance(inst, out_path)
    click.echo(f"wrote {inst.name} ({p} polygons) to {out_path}")


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
def check(instance_path):
    """Audit an instance file against all polygon invariants."""
    inst = _load(instance_path)
    for i, poly in enumerate(inst.polygons):
        click.echo(f"polygon {i + 1}: {poly.n_vertices} vertices, area {poly.area:.6g} -- ok")
    click.echo(f"instance '{inst.name}': {inst.p} polygons, all invariants hold")


if __name__ == "__main__":
    main()
