# pyright: reportUnusedImport=none

from .display_utils import cell_width, format_table, pad_cells
