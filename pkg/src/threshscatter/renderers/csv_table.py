"""
CSV Table Renderer.
Writes ratio tables and other columnar results with `# key=value` header lines.
"""
import csv
import logging
import os
from typing import Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    return str(value)


class CsvTableRenderer:
    def __init__(self):
        self.rows_written = 0

    def render(self, columns: Sequence[str], rows: List[Sequence], output_path: str,
               header: Optional[Dict[str, object]] = None):
        """Writes `# key=value` comment lines, then a CSV table."""
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(output_path, 'w', encoding='utf-8', newline='') as f:
            for key, value in (header or {}).items():
                f.write(f"# {key}={_format(value)}\n")
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format(v) for v in row])

        self.rows_written = len(rows)
        logger.info(f"Wrote {self.rows_written} rows to {output_path}")

    def render_probe(self, report, output_path: str):
        """A ProbeReport as `scale,ratio` with operator, p and verdict in the header."""
        header = {
            'operator': report.operator,
            'p': report.p,
            'family': report.family,
            'verdict': report.verdict,
            'slope': report.slope,
        }
        rows = list(zip(report.scales, report.ratios))
        self.render(('scale', 'ratio'), rows, output_path, header)
