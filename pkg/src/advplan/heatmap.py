"""Standalone SVG heatmap rendering, no plotting dependency.

Cells are colored on a blue-yellow-red ramp over the matrix range; optional
per-cell letters (zone labels) and outlined knee cells overlay the grid.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_RAMP = ((0.20, 0.28, 0.62), (0.98, 0.92, 0.45), (0.75, 0.12, 0.13))


def _color(value: float, lo: float, hi: float) -> str:
    if hi <= lo:
        t = 0.5
    else:
        t = (value - lo) / (hi - lo)
    if t <= 0.5:
        a, b, u = _RAMP[0], _RAMP[1], t * 2
    else:
        a, b, u = _RAMP[1], _RAMP[2], (t - 0.5) * 2
    rgb = [round(255 * ((1 - u) * x + u * y)) for x, y in zip(a, b)]
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def render_heatmap(
    matrix,
    row_labels: list[str],
    col_labels: list[str],
    path: str | Path,
    title: str = "",
    knee_cells: set[tuple[int, int]] | None = None,
    cell_labels: list[list[str]] | None = None,
    x_axis: str = "",
    y_axis: str = "",
    cell_size: int = 26,
) -> Path:
    """Write one heatmap SVG; returns the path.

    ``matrix`` is row-major (row 0 renders at the top). ``knee_cells`` holds
    (row, col) indices drawn with a bold outline; ``cell_labels`` overlays one
    short string per cell.
    """
    values = np.asarray(matrix, dtype=float)
    rows, cols = values.shape
    if rows != len(row_labels) or cols != len(col_labels):
        raise ValueError("label counts must match the matrix shape")
    lo, hi = float(values.min()), float(values.max())
    left, top = 70, 40
    width = left + cols * cell_size + 150
    height = top + rows * cell_size + 60

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="20" font-size="13">{title}</text>',
    ]
    for i in range(rows):
        for j in range(cols):
            x = left + j * cell_size
            y = top + i * cell_size
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_size}" height="{cell_size}" '
                f'fill="{_color(values[i, j], lo, hi)}" stroke="white" stroke-width="0.5"/>'
            )
            if cell_labels is not None:
                parts.append(
                    f'<text x="{x + cell_size / 2:.1f}" y="{y + cell_size / 2 + 4:.1f}" '
                    f'text-anchor="middle" font-size="9" fill="black">{cell_labels[i][j]}</text>'
                )
    for i, j in sorted(knee_cells or ()):
        x = left + j * cell_size
        y = top + i * cell_size
        parts.append(
            f'<rect x="{x + 1}" y="{y + 1}" width="{cell_size - 2}" height="{cell_size - 2}" '
            f'fill="none" stroke="black" stroke-width="2.5"/>'
        )
    for i, label in enumerate(row_labels):
        parts.append(
            f'<text x="{left - 6}" y="{top + i * cell_size + cell_size / 2 + 4:.1f}" '
            f'text-anchor="end">{label}</text>'
        )
    for j, label in enumerate(col_labels):
        parts.append(
            f'<text x="{left + j * cell_size + cell_size / 2:.1f}" '
            f'y="{top + rows * cell_size + 14}" text-anchor="middle">{label}</text>'
        )
    if x_axis:
        parts.append(
            f'<text x="{left + cols * cell_size / 2:.1f}" '
            f'y="{top + rows * cell_size + 34}" text-anchor="middle">{x_axis}</text>'
        )
    if y_axis:
        cy = top + rows * cell_size / 2
        parts.append(
            f'<text x="16" y="{cy:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {cy:.1f})">{y_axis}</text>'
        )

    # Simple legend: min, mid, max swatches.
    lx = left + cols * cell_size + 20
    for idx, frac in enumerate((0.0, 0.5, 1.0)):
        value = lo + frac * (hi - lo)
        y = top + idx * 22
        parts.append(
            f'<rect x="{lx}" y="{y}" width="16" height="16" '
            f'fill="{_color(value, lo, hi)}" stroke="gray" stroke-width="0.5"/>'
        )
        parts.append(f'<text x="{lx + 22}" y="{y + 12}">{value:.4g}</text>')
    parts.append("</svg>")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
