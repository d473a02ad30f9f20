from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union
from xml.sax.saxutils import escape
import csv
import logging

from noisylab.errors.empty_input_error import EmptyInputError
from noisylab.errors.missing_column_error import MissingColumnError

logger = logging.getLogger(__name__)

WIDTH = 800
HEIGHT = 500
PADDING = 60
_LEGEND_ROW = 18
_GRID_LINES = 5
_PALETTE = ("#3498db", "#e74c3c", "#2ecc71", "#f1c40f", "#9b59b6", "#e67e22", "#1abc9c", "#34495e")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Series:
    label: str
    epochs: Tuple[float, ...]
    values: Tuple[float, ...]


class SvgChart:
    """Static line chart of history columns against epoch.

    One polyline per (file, column) in argument order; coordinates are
    printed with two decimals so equal inputs give equal bytes.
    """

    @staticmethod
    def emit_plot(csv_paths: Sequence[PathLike], svg_path: PathLike, columns: Sequence[str]) -> Path:
        if not csv_paths:
            raise EmptyInputError("history file list")
        if not columns:
            raise EmptyInputError("column list")
        paths = [Path(p) for p in csv_paths]
        series = [s for path, name in zip(paths, SvgChart.__names(paths))
                  for s in SvgChart.load_series(path, columns, name)]
        svg_path = Path(svg_path)
        svg_path.parent.mkdir(parents=True, exist_ok=True)
        svg_path.write_text(SvgChart.render(series, y_label=", ".join(columns)), encoding="utf-8")
        logger.info("wrote %s (%d lines)", svg_path, len(series))
        return svg_path

    @staticmethod
    def load_series(path: Path, columns: Sequence[str], name: str) -> List[Series]:
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            for column in ("epoch", *columns):
                if column not in header:
                    raise MissingColumnError(column, str(path))
            rows = list(reader)
        epochs = tuple(float(row["epoch"]) for row in rows)
        return [Series(label=f"{name}: {column}", epochs=epochs, values=tuple(float(row[column]) for row in rows))
                for column in columns]

    @staticmethod
    def render(series: Sequence[Series], y_label: str) -> str:
        xs = [x for s in series for x in s.epochs]
        ys = [y for s in series for y in s.values]
        x_lo, x_hi = SvgChart.__span(xs, floor_at_zero=False)
        y_lo, y_hi = SvgChart.__span(ys, floor_at_zero=True)
        plot_w, plot_h = WIDTH - 2 * PADDING, HEIGHT - 2 * PADDING

        def px(x: float) -> float:
            return PADDING + (x - x_lo) / (x_hi - x_lo) * plot_w

        def py(y: float) -> float:
            return HEIGHT - PADDING - (y - y_lo) / (y_hi - y_lo) * plot_h

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
               f'width="{WIDTH}" height="{HEIGHT}">',
               '<rect width="100%" height="100%" fill="white"/>']

        for i in range(_GRID_LINES):
            value = y_lo + (y_hi - y_lo) * i / (_GRID_LINES - 1)
            y = py(value)
            out.append(f'<line x1="{PADDING}" y1="{y:.2f}" x2="{WIDTH - PADDING}" y2="{y:.2f}" '
                       f'stroke="#ddd" stroke-dasharray="4"/>')
            out.append(f'<text x="{PADDING - 5}" y="{y + 4:.2f}" font-family="Arial" font-size="10" '
                       f'text-anchor="end">{value:.2f}</text>')
        for i in range(_GRID_LINES):
            value = x_lo + (x_hi - x_lo) * i / (_GRID_LINES - 1)
            out.append(f'<text x="{px(value):.2f}" y="{HEIGHT - PADDING + 15}" font-family="Arial" font-size="10" '
                       f'text-anchor="middle">{value:.1f}</text>')

        out.append(f'<line x1="{PADDING}" y1="{HEIGHT - PADDING}" x2="{WIDTH - PADDING}" y2="{HEIGHT - PADDING}" '
                   f'stroke="black"/>')
        out.append(f'<line x1="{PADDING}" y1="{PADDING}" x2="{PADDING}" y2="{HEIGHT - PADDING}" stroke="black"/>')
        out.append(f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 20}" font-family="Arial" font-size="14" '
                   f'text-anchor="middle">epoch</text>')
        out.append(f'<text x="20" y="{HEIGHT / 2:.2f}" font-family="Arial" font-size="14" text-anchor="middle" '
                   f'transform="rotate(-90 20,{HEIGHT / 2:.2f})">{escape(y_label)}</text>')

        for index, s in enumerate(series):
            color = _PALETTE[index % len(_PALETTE)]
            points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.epochs, s.values))
            out.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>')

        legend_x, legend_y = WIDTH - PADDING - 220, PADDING + 10
        for index, s in enumerate(series):
            color = _PALETTE[index % len(_PALETTE)]
            y = legend_y + index * _LEGEND_ROW
            out.append(f'<rect x="{legend_x}" y="{y}" width="12" height="12" fill="{color}"/>')
            out.append(f'<text x="{legend_x + 18}" y="{y + 10}" font-family="Arial" font-size="12">'
                       f'{escape(s.label)}</text>')

        out.append("</svg>")
        return "\n".join(out) + "\n"

    @staticmethod
    def __names(paths: Sequence[Path]) -> List[str]:
        """File basenames, qualified by the parent folder when two files share one."""
        basenames = [p.name for p in paths]
        return [f"{p.parent.name}/{p.name}" if basenames.count(p.name) > 1 else p.name for p in paths]

    @staticmethod
    def __span(values: Sequence[float], floor_at_zero: bool) -> Tuple[float, float]:
        if not values:
            return 0.0, 1.0
        lo, hi = min(values), max(values)
        if floor_at_zero:
            lo = min(lo, 0.0)
        if hi <= lo:
            hi = lo + 1.0
        return lo, hi


def emit_plot(csv_paths: Sequence[PathLike], svg_path: PathLike, columns: Sequence[str]) -> Path:
    return SvgChart.emit_plot(csv_paths, svg_path, columns)
