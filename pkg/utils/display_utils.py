from typing import Sequence

from wcwidth import wcswidth  # type: ignore[import]

__all__ = ['cell_width', 'format_table', 'pad_cells']


def cell_width(s: str) -> int:
    """The number of terminal cells s occupies.

    Raises ValueError if s contains non-printable characters.
    """
    width: int = wcswidth(s)
    if width < 0:
        raise ValueError(f'{s!r} contains non-printable characters')

    return width


def pad_cells(s: str, width: int, right_align: bool = False) -> str:
    """Pads s with spaces so that it occupies at least width cells. Plain
    str.ljust() miscounts strings with wide or combining characters."""
    padding = ' ' * max(0, width - cell_width(s))
    return padding + s if right_align else s + padding


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Lays out rows under headers in aligned columns. The first column is
    left-aligned and the rest right-aligned."""
    widths = [cell_width(h) for h in headers]
    for row in rows:
        if len(row) != len(headers):
            raise ValueError(f'Row {row!r} does not have {len(headers)} columns')

        for i, cell in enumerate(row):
            widths[i] = max(widths[i], cell_width(cell))

    def fmt(cells: Sequence[str]) -> str:
        return '  '.join(pad_cells(c, w, right_align=i > 0)
                         for i, (c, w) in enumerate(zip(cells, widths))).rstrip()

    lines = [fmt(headers), fmt(['-' * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return '\n'.join(lines)
