"""CSV tables and their gnuplot / SVG renderings."""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import ConfigError, settings

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "qwalk"


def resolve_output(out_dir: Path, name: str) -> Path:
    """
    Path of an output file, refusing anything outside out_dir.

    Raises:
        ConfigError: If name escapes the output directory
    """
    root = Path(out_dir).resolve()
    path = (root / name).resolve()
    if root != path and root not in path.parents:
        raise ConfigError(f"output path {name!r} escapes the output directory {out_dir}")
    return path


def format_value(value, precision: int = 17) -> str:
    """Decimal text for one table cell; 17 significant digits round-trip a double."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if np.isnan(value):
        return "nan"
    return f"%.{precision}g" % value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence],
              metadata: Optional[Dict[str, object]] = None, precision: Optional[int] = None) -> Path:
    """
    Write a table with '#'-prefixed metadata lines and one header row.

    Args:
        path: Destination file
        columns: Column names, in output order
        rows: Row sequences matching columns
        metadata: Ordered key/value pairs for the comment header
        precision: Significant digits of float cells (defaults to settings.output.precision)

    Returns:
        The written path
    """
    precision = precision or settings.output.precision
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        for key, value in (metadata or {}).items():
            f.write(f"# {key}: {value}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        n_rows = 0
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} cells for {len(columns)} columns")
            writer.writerow([format_value(v, precision) for v in row])
            n_rows += 1
    logger.info(f"Wrote {n_rows} rows to {path}")
    return path


def read_csv(path: Path) -> Tuple[Dict[str, str], List[str], np.ndarray]:
    """
    Read a table written by write_csv.

    Returns:
        Tuple of (metadata, column names, float array of shape (rows, columns))
    """
    metadata: Dict[str, str] = {}
    body = []
    with open(path, newline="") as f:
        for line in f:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                metadata[key.strip()] = value.strip()
            else:
                body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    return metadata, columns, data.reshape(-1, len(columns))


def write_gnuplot(path: Path, csv_files: Sequence[Path], x_column: str, y_columns: Sequence[str],
                  columns: Sequence[str], title: str = "") -> Path:
    """Plain-text gnuplot script plotting y_columns against x_column from each CSV."""
    path = Path(path)
    x_index = columns.index(x_column) + 1
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set title {title!r}" if title else "unset title",
        f"set xlabel '{x_column}'",
        "set terminal svg size 800,500",
        f"set output '{path.stem}.svg'",
    ]
    plots = []
    for csv_file in csv_files:
        for y in y_columns:
            y_index = columns.index(y) + 1
            plots.append(f"'{Path(csv_file).name}' using {x_index}:{y_index} with lines "
                         f"title '{Path(csv_file).stem} {y}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote gnuplot script {path}")
    return path


def render_svg(path: Path, csv_files: Sequence[Path], x_column: str, y_columns: Sequence[str],
               title: str = "") -> Path:
    """
    Plot CSV columns to a standalone SVG with matplotlib.

    Only the CSV contents are plotted, and the hash salt and date metadata are
    pinned so identical tables give identical files.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 5))
        for csv_file in csv_files:
            _, columns, data = read_csv(csv_file)
            x = data[:, columns.index(x_column)]
            for y in y_columns:
                ax.plot(x, data[:, columns.index(y)], label=f"{Path(csv_file).stem} {y}", linewidth=1.0)
        ax.set_xlabel(x_column)
        if title:
            ax.set_title(title)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info(f"Wrote SVG plot {path}")
    return path
