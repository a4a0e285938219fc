"""
Check reports and the writer that puts CSV and text outputs on disk
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from config.solver_config import FLOAT_FORMAT

logger = logging.getLogger(__name__)


@dataclass
class CheckReport:
    """Outcome of a report-only check; flagged items never raise"""
    name: str
    passed: bool
    applicable: bool = True
    rows: List[Dict[str, Any]] = field(default_factory=list)
    message: str = ''
    value: Optional[float] = None

    @property
    def flagged(self) -> bool:
        return self.applicable and not self.passed

    def summary_line(self) -> str:
        if not self.applicable:
            status = 'N/A '
        else:
            status = 'PASS' if self.passed else 'FAIL'
        line = f"{status} {self.name}"
        if self.message:
            line += f": {self.message}"
        return line


def format_value(value: Any) -> str:
    """Deterministic text form for CSV cells"""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    if value is None:
        return ''
    try:
        return format(float(value), FLOAT_FORMAT) if hasattr(value, 'dtype') else str(value)
    except (TypeError, ValueError):
        return str(value)


class ReportWriter:
    """Writes every output file of one run; the only writer in the process"""

    def __init__(self, out_dir, seed: Optional[int] = None, prefix: str = ''):
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.prefix = prefix
        self.written: List[Path] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        filename = f"{self.prefix}_{name}" if self.prefix else name
        return self.out_dir / filename

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """CSV with a leading '# seed=N' comment line"""
        path = self._path(name)
        try:
            with open(path, 'w', newline='', encoding='utf-8') as handle:
                handle.write(f"# seed={self.seed}\n")
                writer = csv.writer(handle, lineterminator='\n')
                writer.writerow(header)
                for row in rows:
                    writer.writerow([format_value(v) for v in row])
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def write_dict_rows(self, name: str, rows: List[Dict[str, Any]]) -> Optional[Path]:
        """CSV from a list of uniform dicts; nothing is written for an empty list"""
        if not rows:
            return None
        header = list(rows[0].keys())
        return self.write_csv(name, header, ([row.get(key) for key in header] for row in rows))

    def write_text(self, name: str, lines: Iterable[str]) -> Path:
        path = self._path(name)
        try:
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(f"seed: {self.seed}\n")
                for line in lines:
                    handle.write(f"{line}\n")
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def write_reports(self, name: str, reports: List[CheckReport]) -> Path:
        """One summary line per report, then a CSV per report with rows"""
        for report in reports:
            if report.rows:
                self.write_dict_rows(f"{name}_{report.name}.csv", report.rows)
        return self.write_text(f"{name}.txt", [report.summary_line() for report in reports])
