"""CSV and aligned-text output for analysis reports."""

import csv
import io
from pathlib import Path
from typing import List, Sequence

from rich import box
from rich.console import Console
from rich.table import Table


def write_csv(path: Path, headers: Sequence[str], rows: Sequence[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        writer.writerows(rows)
    return path


def render_text(title: str, headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Plain aligned table (no colour codes) via rich."""
    table = Table(title=title, box=box.SIMPLE, title_justify="left")
    for i, header in enumerate(headers):
        table.add_column(header, justify="left" if i == 0 else "right")
    for row in rows:
        table.add_row(*[str(cell) for cell in row])
    console = Console(file=io.StringIO(), width=120, color_system=None, record=True)
    console.print(table)
    return console.export_text()


def write_report(out_dir: Path, name: str, title: str, headers: List[str], rows: List[List[str]]) -> str:
    """Write <name>.csv and <name>.txt under out_dir and return the text rendering."""
    out_dir = Path(out_dir)
    text = render_text(title, headers, rows)
    write_csv(out_dir / f"{name}.csv", headers, rows)
    (out_dir / f"{name}.txt").write_text(text)
    return text
