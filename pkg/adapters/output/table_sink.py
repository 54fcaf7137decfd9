"""
Table Report Sink - Tabella leggibile dei report (stdout o file)
"""

import sys
import logging
from typing import List

from adapters.ports import ReportSink
from core.reports import VerificationReport, format_complex

logger = logging.getLogger(__name__)

COLUMNS = ("identity", "outcome", "rel_gap", "budget", "lhs", "params")


class TableReportSink(ReportSink):
    """
    Config:
        - path: file di destinazione; assente -> stdout
        - params_width: larghezza massima della colonna params (default 60)
    """

    def __init__(self, name: str, config: dict):
        super().__init__(name, config)
        self.path = self.resolve(config['path']) if config.get('path') else None
        self.params_width = int(config.get('params_width', 60))

    def render(self, reports: List[VerificationReport]) -> str:
        rows = [COLUMNS]
        for r in reports:
            params = ", ".join(f"{k}={v}" for k, v in r.params.items())
            if len(params) > self.params_width:
                params = params[:self.params_width - 3] + "..."
            rows.append((
                r.identity,
                r.outcome.value.upper(),
                f"{r.rel_gap:.3e}",
                f"{r.budget:.3e}",
                format_complex(r.lhs),
                params,
            ))
        widths = [max(len(row[i]) for row in rows) for i in range(len(COLUMNS))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        passed = sum(1 for r in reports if r.passed)
        lines.append(f"{passed}/{len(reports)} passing")
        return "\n".join(lines) + "\n"

    def emit(self, reports: List[VerificationReport]) -> None:
        text = self.render(reports)
        if self.path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(self.path, 'w') as f:
                f.write(text)
            logger.info(f"✅ Report table written to {self.path}")
