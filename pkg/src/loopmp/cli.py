"""Command-line interface: percolate, simulate, spectrum, eig-oracle, and
dump-neighborhood subcommands with CSV/JSON output.

Every output embeds the full parameter set (as `# key=value` comment lines
in CSV, as a "params" object in JSON) so runs are reproducible from their
own artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dense_eig import dense_eigenvalues, smoothed_density
from .graph import Graph, GraphParseError, laplacian, load_edge_list, load_matrix_triplets, to_dense
from .neighborhoods import TopologyBudgetError, build_topology, dump_neighborhood
from .percolation import PercParams, percolation_scan
from .percolation_sim import simulate
from .spectra import SpectralParams, spectral_density


@dataclass
class RunConfig:
    subcommand: str
    input: str
    output: str | None = None
    format: str = "csv"
    input_format: str = "edgelist"
    matrix: str = "adjacency"
    r: int = 1
    p_grid: str = "0:1:0.1"
    x_grid: str = "-3:3:0.05"
    z: tuple[float, ...] = ()
    eta: float = 0.05
    tol: float | None = None
    max_iter: int = 10_000
    samples: int = 8
    trials: int = 1000
    seed: int = 0
    estimator: str = "auto"
    node: int = 0
    threads: int = 0
    extra: dict = field(default_factory=dict)


def parse_grid(spec: str) -> np.ndarray:
    """Parse "a:b:step" into the inclusive grid a, a+step, ..., <= b."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {spec!r} must be 'a:b:step'")
    try:
        a, b, step = (float(x) for x in parts)
    except ValueError as exc:
        raise ValueError(f"grid {spec!r}: {exc}") from exc
    if step <= 0:
        raise ValueError(f"grid {spec!r}: step must be positive")
    if a > b:
        raise ValueError(f"grid {spec!r}: needs a <= b")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(count)


def _load_graph(config: RunConfig) -> Graph:
    path = Path(config.input)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GraphParseError(f"cannot read input file {path}: {exc}") from exc
    if config.input_format == "triplets":
        return load_matrix_triplets(text)
    return load_edge_list(text)


def _matrix_graph(g: Graph, which: str) -> Graph:
    if which == "laplacian":
        return laplacian(g)
    return g


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "True" if value else "False"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _emit(config: RunConfig, params: dict, columns: list[str], rows: list[list]) -> str:
    if config.format == "json":
        payload = {
            "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()},
            "columns": columns,
            "rows": [[(None if isinstance(x, float) and np.isnan(x) else x) for x in row] for row in rows],
        }
        return json.dumps(payload, indent=2, default=_format_value) + "\n"
    lines = [f"# {k}={_format_value(v)}" for k, v in params.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_value(x) for x in row))
    return "\n".join(lines) + "\n"


def _write_output(config: RunConfig, text: str):
    if config.output:
        Path(config.output).write_text(text)
    else:
        sys.stdout.write(text)


def _base_params(config: RunConfig) -> dict:
    params = {"tool": "loopmp", "version": __version__, "subcommand": config.subcommand,
              "input": config.input, "threads": config.threads}
    return params


def _run_percolate(config: RunConfig) -> str:
    g = _load_graph(config)
    p_values = parse_grid(config.p_grid)
    tol = config.tol if config.tol is not None else 1e-8
    params = PercParams(
        p=float(p_values[0]), r=config.r, tol=tol, max_iter=config.max_iter,
        estimator=config.estimator, samples=config.samples, seed=config.seed,
    )
    topo = build_topology(g, config.r)
    rows_dicts = percolation_scan(g, topo, params, p_values, z_values=config.z)
    columns = ["p", "S", "mean_s", "converged", "iterations"]
    columns += [f"H(z={z:g})" for z in config.z]
    rows = [[row[c] for c in columns] for row in rows_dicts]
    meta = _base_params(config)
    meta.update(r=config.r, p_grid=config.p_grid, z=",".join(f"{z:g}" for z in config.z),
                samples=config.samples, seed=config.seed, tol=tol,
                max_iter=config.max_iter, estimator=config.estimator)
    return _emit(config, meta, columns, rows)


def _run_simulate(config: RunConfig) -> str:
    g = _load_graph(config)
    p_values = parse_grid(config.p_grid)
    est = simulate(g, p_values, trials=config.trials, seed=config.seed)
    columns = ["p", "S_hat", "S_se", "mean_s_hat", "mean_s_se"]
    rows = [
        [float(est.p[i]), float(est.largest_fraction[i]), float(est.largest_fraction_se[i]),
         float(est.mean_cluster_size[i]), float(est.mean_cluster_size_se[i])]
        for i in range(len(est.p))
    ]
    meta = _base_params(config)
    meta.update(p_grid=config.p_grid, trials=config.trials, seed=config.seed)
    return _emit(config, meta, columns, rows)


def _run_spectrum(config: RunConfig) -> str:
    g = _matrix_graph(_load_graph(config), config.matrix)
    grid = parse_grid(config.x_grid)
    tol = config.tol if config.tol is not None else 1e-8
    params = SpectralParams(r=config.r, eta=config.eta, grid=grid, tol=tol, max_iter=config.max_iter)
    curve = spectral_density(g, params)
    columns = ["x", "rho", "converged", "iterations"]
    rows = [
        [float(curve.x[i]), float(curve.rho[i]), bool(curve.converged[i]), int(curve.iterations[i])]
        for i in range(len(curve.x))
    ]
    meta = _base_params(config)
    meta.update(matrix=config.matrix, r=config.r, eta=config.eta, x_grid=config.x_grid,
                tol=tol, max_iter=config.max_iter)
    return _emit(config, meta, columns, rows)


def _run_eig_oracle(config: RunConfig) -> str:
    g = _matrix_graph(_load_graph(config), config.matrix)
    grid = parse_grid(config.x_grid)
    eigs = dense_eigenvalues(to_dense(g))
    rho = smoothed_density(eigs, grid, config.eta)
    columns = ["x", "rho", "converged", "iterations"]
    rows = [[float(grid[i]), float(rho[i]), True, 0] for i in range(len(grid))]
    meta = _base_params(config)
    meta.update(matrix=config.matrix, eta=config.eta, x_grid=config.x_grid)
    return _emit(config, meta, columns, rows)


def _run_dump_neighborhood(config: RunConfig) -> str:
    g = _load_graph(config)
    return dump_neighborhood(g, config.node, config.r)


_RUNNERS = {
    "percolate": _run_percolate,
    "simulate": _run_simulate,
    "spectrum": _run_spectrum,
    "eig-oracle": _run_eig_oracle,
    "dump-neighborhood": _run_dump_neighborhood,
}


def run(config: RunConfig) -> int:
    """Dispatch a run; returns the process exit status."""
    try:
        text = _RUNNERS[config.subcommand](config)
    except (GraphParseError, TopologyBudgetError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_output(config, text)
    return 0


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--input", required=True, help="input graph/matrix file")
    sub.add_argument("--input-format", choices=["edgelist", "triplets"], default="edgelist")
    sub.add_argument("--output", default=None, help="output path (default: stdout)")
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--threads", type=int, default=0, help="worker threads (0 = auto)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopmp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"loopmp {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("percolate", help="message-passing percolation observables over a p grid")
    _add_common(p)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--p-grid", default="0:1:0.1")
    p.add_argument("--z", default="", help="comma-separated z values for extra H(z) columns")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--estimator", choices=["auto", "exhaustive", "monte-carlo"], default="auto")

    p = subs.add_parser("simulate", help="Newman-Ziff percolation simulation over a p grid")
    _add_common(p)
    p.add_argument("--p-grid", default="0:1:0.1")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = subs.add_parser("spectrum", help="message-passing spectral density over an x grid")
    _add_common(p)
    p.add_argument("--matrix", choices=["adjacency", "laplacian"], default="adjacency")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--x-grid", default="-3:3:0.05")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=10_000)

    p = subs.add_parser("eig-oracle", help="dense-eigendecomposition density (ground truth)")
    _add_common(p)
    p.add_argument("--matrix", choices=["adjacency", "laplacian"], default="adjacency")
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--x-grid", default="-3:3:0.05")

    p = subs.add_parser("dump-neighborhood", help="print a node's order-r neighborhood as edge-list text")
    _add_common(p)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--r", type=int, default=1)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    z = tuple(float(x) for x in args.z.split(",") if x.strip()) if getattr(args, "z", "") else ()
    fields = {}
    for name in ("input", "output", "format", "input_format", "matrix", "r", "p_grid", "x_grid",
                 "eta", "tol", "max_iter", "samples", "trials", "seed", "estimator", "node", "threads"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    return RunConfig(subcommand=args.subcommand, z=z, **fields)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
