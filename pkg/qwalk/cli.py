"""Command-line front end: `qwalk <particle|mode|packet|figure> [flags]`."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .coin_walk import CoinSpec, OperatorOrder, position_statistics, start_state, walk_evolve
from .config import (ConfigError, FigureRun, GridConfig, ModeRun, PacketRun, ParticleRun, RunConfig,
                     config_error_from, init_directories, load_config_file, settings)
from .export import render_svg, resolve_output, write_csv, write_gnuplot
from .plane_wave import ScanRow, displacement_scan, measured_moments, measured_step
from .presets import FigurePreset, FigurePresets
from .unmeasured_evolution import ModeEvolutionInput, evolve_mode
from .utils import setup_logging
from .wave_packet import (PROFILE_COLUMNS, GridValidationError, SpatialGrid, SpatialPacket, SpectralGrid,
                          WavePacketState, amplitude_profile, evolve_measured_all_left, evolve_unmeasured,
                          gaussian_packet, gaussian_pair_packet, packet_from_csv)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PARTICLE_COLUMNS = ("x", "P", "re_a_R", "im_a_R", "re_a_L", "im_a_L")
COHERENT_MODE_COLUMNS = ("t", "P1", "L1", "P2", "L2")
MEASURED_MODE_COLUMNS = ("t", "p_R", "l1", "p_L", "l2", "mean", "variance")
GRID_FLAGS = ("x_min", "x_max", "n_points", "k_max", "n_modes")


class QwalkArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message):
        raise ConfigError(message)


def _checkpoint_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"checkpoints must be comma-separated integers, got {text!r}")


def build_parser() -> QwalkArgumentParser:
    """Build the argument parser; every subcommand flag defaults to 'not given'."""
    common = QwalkArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", dest="config_file", type=Path, help="YAML key-value config file")
    common.add_argument("--out", dest="out_dir", type=Path, help="Output directory")
    common.add_argument("--format", choices=["csv", "svg", "gnuplot"], help="Rendering written next to the CSV")
    common.add_argument("--seed", type=int, help="Root seed (unsigned 64-bit)")
    common.add_argument("--precision", type=int, help="Significant digits of float cells (1-17)")
    common.add_argument("--long-run", dest="long_run", action="store_true", help="Allow multi-thousand-step runs")
    common.add_argument("-v", "--verbose", action="store_true", help="Log progress at INFO level")

    parser = QwalkArgumentParser(prog="qwalk", description="Discrete-time quantum walk simulations")
    parser.add_argument("--version", action="version", version=f"qwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    particle = sub.add_parser("particle", parents=[common], argument_default=argparse.SUPPRESS,
                              help="Coined walk of a particle on a lattice")
    particle.add_argument("--coin", choices=["hadamard", "identity", "general"])
    particle.add_argument("--eta", type=float)
    particle.add_argument("--phi", type=float)
    particle.add_argument("--theta-c", dest="theta_c", type=float)
    particle.add_argument("--varphi", type=float)
    particle.add_argument("--start", choices=["R", "L", "symmetric"])
    particle.add_argument("--steps", type=int)
    particle.add_argument("--order", choices=[o.value for o in OperatorOrder])
    particle.add_argument("--step-length", dest="step_length", type=float)

    mode = sub.add_parser("mode", parents=[common], argument_default=argparse.SUPPRESS,
                          help="Single plane-wave mode, measured or coherent")
    mode.add_argument("--mode", choices=["measured", "coherent"])
    mode.add_argument("--a-R", dest="a_R", type=float)
    mode.add_argument("--a-L", dest="a_L", type=float)
    mode.add_argument("--k", type=float)
    mode.add_argument("--l", type=float)
    mode.add_argument("--theta", type=float)
    mode.add_argument("--steps", type=int)
    mode.add_argument("--l0", type=float)

    packet = sub.add_parser("packet", parents=[common], argument_default=argparse.SUPPRESS,
                            help="Wave packet evolution by Fourier synthesis")
    packet.add_argument("--preset", choices=["gaussian", "gaussian_pair"])
    packet.add_argument("--input", type=Path, help="CSV of x, Re f, Im f")
    packet.add_argument("--width", type=float)
    packet.add_argument("--center", type=float)
    packet.add_argument("--separation", type=float)
    packet.add_argument("--evolution", choices=["measured-all-left", "coherent"])
    packet.add_argument("--checkpoints", type=_checkpoint_list, help="Comma-separated step counts")
    packet.add_argument("--a-R", dest="a_R", type=float)
    packet.add_argument("--a-L", dest="a_L", type=float)
    packet.add_argument("--theta", type=float)
    packet.add_argument("--l", type=float)
    for name in GRID_FLAGS:
        packet.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int if name.startswith("n_") else float)

    figure = sub.add_parser("figure", parents=[common], argument_default=argparse.SUPPRESS,
                            help="Reproduce the data of figure 1-6")
    figure.add_argument("figure", type=int)
    figure.add_argument("--presets", dest="presets_file", type=Path, help="YAML figure preset overrides")
    return parser


RUN_MODELS = {"particle": ParticleRun, "mode": ModeRun, "packet": PacketRun, "figure": FigureRun}


def build_run(args: argparse.Namespace) -> RunConfig:
    """
    Merge settings, config file and flags (in rising precedence) into a validated run.

    Raises:
        ConfigError: On unknown keys or invalid combinations
    """
    options = dict(vars(args))
    command = options.pop("command")
    options.pop("verbose", None)
    config_file = options.pop("config_file", None)

    merged: Dict[str, object] = load_config_file(config_file) if config_file is not None else {}
    if command == "packet":
        file_grid = merged.get("grid") or {}
        if not isinstance(file_grid, dict):
            raise ConfigError("grid: must be a mapping of grid settings")
        grid = settings.grid.model_dump()
        grid.update(file_grid)
        grid.update({name: options.pop(name) for name in GRID_FLAGS if name in options})
        merged["grid"] = grid
    merged.update(options)
    merged.setdefault("out_dir", settings.output.out_dir)
    merged.setdefault("format", settings.output.format)
    merged.setdefault("precision", settings.output.precision)
    merged.setdefault("seed", settings.monte_carlo.seed)
    if command in ("mode", "packet"):
        for key, value in settings.walk.model_dump().items():
            merged.setdefault(key, value)

    try:
        return RUN_MODELS[command](**merged)
    except ValidationError as e:
        raise config_error_from(e)


def _metadata(run: RunConfig, command: str, **extra) -> Dict[str, object]:
    meta: Dict[str, object] = {"tool": f"qwalk {__version__}", "command": command, "seed": run.seed,
                               "generator": settings.monte_carlo.generator}
    meta.update(extra)
    return meta


def _write_table(run: RunConfig, name: str, columns: Sequence[str], rows, meta: Dict[str, object]) -> Path:
    return write_csv(resolve_output(run.out_dir, name), columns, rows, meta, precision=run.precision)


def _render(run: RunConfig, stem: str, csv_files: Sequence[Path], x_column: str,
            y_columns: Sequence[str], columns: Sequence[str], title: str,
            always_gnuplot: bool = False) -> List[Path]:
    written = []
    if run.format == "gnuplot" or always_gnuplot:
        written.append(write_gnuplot(resolve_output(run.out_dir, f"{stem}.gp"), csv_files,
                                     x_column, y_columns, columns, title))
    if run.format == "svg":
        written.append(render_svg(resolve_output(run.out_dir, f"{stem}.svg"), csv_files,
                                  x_column, y_columns, title))
    return written


def cmd_particle(run: ParticleRun) -> List[Path]:
    """Position distribution of a particle walk."""
    if run.coin == "hadamard":
        coin = CoinSpec.hadamard()
    elif run.coin == "identity":
        coin = CoinSpec.identity()
    else:
        coin = CoinSpec(eta=run.eta, phi=run.phi, theta_c=run.theta_c, varphi=run.varphi)

    state = walk_evolve(start_state(run.start, run.step_length), coin, OperatorOrder(run.order), run.steps)
    mean, variance = position_statistics(state)
    rows = [
        (x, p, a[0].real, a[0].imag, a[1].real, a[1].imag)
        for x, p, a in zip(state.positions, state.probabilities, state.amplitudes)
    ]
    path = _write_table(run, "particle.csv", PARTICLE_COLUMNS, rows,
                        _metadata(run, "particle", coin=run.coin, start=run.start, order=run.order,
                                  steps=run.steps, mean=repr(mean), variance=repr(variance)))
    return [path] + _render(run, "particle", [path], "x", ["P"], PARTICLE_COLUMNS, "particle walk")


def cmd_mode(run: ModeRun) -> List[Path]:
    """Measured or coherent evolution of one plane-wave mode, one row per step count."""
    rows = []
    if run.mode == "coherent":
        columns = COHERENT_MODE_COLUMNS
        for t in range(run.steps + 1):
            result = evolve_mode(ModeEvolutionInput(run.a_R, run.a_L, run.k, run.l, run.theta, t, run.l0))
            rows.append((t, result.P1, result.L1, result.P2, result.L2))
    else:
        columns = MEASURED_MODE_COLUMNS
        step = measured_step(run.a_R, run.a_L, run.theta, run.k, run.l)
        for t in range(run.steps + 1):
            mean, variance = measured_moments(step, t)
            rows.append((t, step.p_R, step.l1, step.p_L, step.l2, mean, variance))

    path = _write_table(run, f"mode_{run.mode}.csv", columns, rows,
                        _metadata(run, "mode", mode=run.mode, a_R=repr(run.a_R), a_L=repr(run.a_L), k=repr(run.k),
                                  l=repr(run.l), theta=repr(run.theta), l0=repr(run.l0)))
    y_columns = ["L1", "L2"] if run.mode == "coherent" else ["mean"]
    return [path] + _render(run, f"mode_{run.mode}", [path], "t", y_columns, columns, f"{run.mode} mode")


def _grid_metadata(grid: GridConfig) -> Dict[str, object]:
    return {"x_grid": f"[{grid.x_min!r}, {grid.x_max!r}] x {grid.n_points}",
            "k_grid": f"[{-grid.k_max!r}, {grid.k_max!r}] x {grid.n_modes}"}


def _evolve_packet(packet: SpatialPacket, evolution: str, a_R: float, a_L: float, theta: float, l: float,
                   t: int, spectral: SpectralGrid) -> WavePacketState:
    if evolution == "coherent":
        return evolve_unmeasured(packet, a_R, a_L, theta, l, t, spectral)
    return evolve_measured_all_left(packet, a_R, a_L, theta, l, t, spectral)


def cmd_packet(run: PacketRun) -> List[Path]:
    """Amplitude profiles of an evolved packet at each checkpoint."""
    grid = SpatialGrid.from_config(run.grid)
    spectral = SpectralGrid.from_config(run.grid)
    if run.input is not None:
        try:
            packet = packet_from_csv(run.input, grid)
        except ValueError as e:
            raise ConfigError(str(e))
        source = str(run.input)
    elif run.preset == "gaussian_pair":
        packet = gaussian_pair_packet(grid, run.separation, run.width, run.center)
        source = f"gaussian_pair(width={run.width!r}, separation={run.separation!r}, center={run.center!r})"
    else:
        packet = gaussian_packet(grid, run.width, run.center)
        source = f"gaussian(width={run.width!r}, center={run.center!r})"

    written = []
    for t in run.checkpoints:
        state = _evolve_packet(packet, run.evolution, run.a_R, run.a_L, run.theta, run.l, t, spectral)
        meta = _metadata(run, "packet", packet=source, evolution=run.evolution, t=t,
                         normalization=repr(state.normalization), **_grid_metadata(run.grid))
        written.append(_write_table(run, f"packet_t{t}.csv", PROFILE_COLUMNS, amplitude_profile(state), meta))
    return written + _render(run, "packet", written, "x", ["abs_R", "abs_L"], PROFILE_COLUMNS, run.evolution)


def _scan_rows(rows: Sequence[ScanRow]):
    return [(r.value, r.l1, r.l2, r.p_R, r.p_L, r.flagged) for r in rows]


def _figure_scan(run: FigureRun, preset: FigurePreset) -> List[Path]:
    axis = "theta" if preset.kind == "theta-scan" else "k"
    rows = displacement_scan(axis, preset.start, preset.stop, preset.samples, preset.a_R, preset.a_L,
                             theta=preset.theta, k=preset.k, l=preset.l, endpoint=preset.endpoint)
    columns = (axis, "L1", "L2", "p_R", "p_L", "flagged")
    meta = _metadata(run, "figure", figure=run.figure, caption=preset.caption, axis=axis,
                     a_R=repr(preset.a_R), a_L=repr(preset.a_L), l=repr(preset.l))
    if axis == "theta":
        meta["k"] = repr(preset.k)
    else:
        meta["theta"] = repr(preset.theta)
    path = _write_table(run, f"fig{run.figure}_scan.csv", columns, _scan_rows(rows), meta)
    written = [path]
    if preset.note:
        note = resolve_output(run.out_dir, f"fig{run.figure}_README.txt")
        note.write_text(preset.note + "\n")
        written.append(note)
    return written + _render(run, f"fig{run.figure}", [path], axis, ["L1", "L2"], columns, preset.caption,
                             always_gnuplot=True)


def _figure_packet(run: FigureRun, preset: FigurePreset) -> List[Path]:
    grid = SpatialGrid.from_config(preset.grid)
    spectral = SpectralGrid.from_config(preset.grid)
    packet = gaussian_packet(grid, preset.width)
    evolution = "coherent" if preset.kind == "coherent-packet" else "measured-all-left"
    base = _metadata(run, "figure", figure=run.figure, caption=preset.caption, evolution=evolution,
                     theta=repr(preset.theta), l=repr(preset.l), a_R=repr(preset.a_R), a_L=repr(preset.a_L),
                     **_grid_metadata(preset.grid))

    initial = packet.with_coin(preset.a_R, preset.a_L)
    written = [_write_table(run, f"fig{run.figure}_initial.csv", PROFILE_COLUMNS, amplitude_profile(initial),
                            dict(base, t=0))]
    for t in preset.checkpoints:
        state = _evolve_packet(packet, evolution, preset.a_R, preset.a_L, preset.theta, preset.l, t, spectral)
        written.append(_write_table(run, f"fig{run.figure}_t{t}.csv", PROFILE_COLUMNS, amplitude_profile(state),
                                    dict(base, t=t, normalization=repr(state.normalization))))
    y_columns = ["density"] if evolution == "measured-all-left" else ["abs_R", "abs_L"]
    return written + _render(run, f"fig{run.figure}", written, "x", y_columns, PROFILE_COLUMNS,
                             preset.caption, always_gnuplot=True)


def cmd_figure(run: FigureRun) -> List[Path]:
    """Data files (plus gnuplot script, optionally SVG) for one figure."""
    preset = FigurePresets(run.presets_file or settings.presets_file).get(run.figure)
    if preset.long_run and not run.long_run:
        raise ConfigError(f"figure {run.figure} is a long run; pass --long-run to acknowledge")
    logger.info(f"Figure {run.figure}: {preset.caption}")
    if preset.is_scan:
        return _figure_scan(run, preset)
    return _figure_packet(run, preset)


COMMANDS = {"particle": cmd_particle, "mode": cmd_mode, "packet": cmd_packet, "figure": cmd_figure}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        0 on success, 2 on configuration errors, 3 on numerical failures
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = "INFO" if getattr(args, "verbose", False) else settings.log_level
        setup_logging(level, settings.log_file)
        run = build_run(args)
        init_directories(run.out_dir)
        written = COMMANDS[args.command](run)
    except (ConfigError, ValidationError) as e:
        print(f"qwalk: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except GridValidationError as e:
        print(f"qwalk: numerical validation failed: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, ArithmeticError) as e:
        print(f"qwalk: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    for path in written:
        logger.info(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
