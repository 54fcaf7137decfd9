"""
JSON Report Sink - Array JSON dei VerificationReport
I float sono scritti con repr (17 cifre significative): la rilettura e' bit-exact.
I valori non finiti (NaN, inf) diventano null: il file resta JSON standard.
"""

import json
import logging
import math
from typing import Any, List

from adapters.ports import ReportSink
from core.reports import VerificationReport

logger = logging.getLogger(__name__)


def finite_or_null(value: Any) -> Any:
    """Sostituisce ricorsivamente i float non finiti con None."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: finite_or_null(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [finite_or_null(v) for v in value]
    return value


class JsonReportSink(ReportSink):
    """
    Config:
        - path: file di destinazione (relativo a RECIP_HOME)
        - indent: indentazione (default 2)
    """

    def __init__(self, name: str, config: dict):
        super().__init__(name, config)
        if 'path' not in config:
            raise ValueError("JsonReportSink requires a 'path'")
        self.path = self.resolve(config['path'])
        self.indent = config.get('indent', 2)

    def emit(self, reports: List[VerificationReport]) -> None:
        payload = finite_or_null([r.to_dict() for r in reports])
        with open(self.path, 'w') as f:
            json.dump(payload, f, indent=self.indent, default=str, allow_nan=False)
        logger.info(f"✅ {len(reports)} reports written to {self.path}")


def load_reports(path: str) -> List[VerificationReport]:
    """Rilegge un file scritto da JsonReportSink."""
    with open(path, 'r') as f:
        return [VerificationReport.from_dict(entry) for entry in json.load(f)]
