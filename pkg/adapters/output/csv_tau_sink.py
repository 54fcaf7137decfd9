"""
CSV Tau Sink - Tabella n, tau(n), lambda(n)
"""

import csv
import logging
import sys
from typing import TextIO

from adapters.ports import TauTableSink
from core.coeffs import HeckeTable

logger = logging.getLogger(__name__)

STDOUT = "-"


class CsvTauSink(TauTableSink):
    """
    Config:
        - path: file CSV di destinazione ("-" per stdout)
    """

    def __init__(self, name: str, config: dict):
        super().__init__(name, config)
        if 'path' not in config:
            raise ValueError("CsvTauSink requires a 'path'")
        self.to_stdout = config['path'] == STDOUT
        self.path = None if self.to_stdout else self.resolve(config['path'])

    def write_table(self, table: HeckeTable) -> None:
        if self.to_stdout:
            self._write_rows(sys.stdout, table)
            sys.stdout.flush()
            logger.info(f"✅ tau table ({table.n_max} rows) written to stdout")
            return
        with open(self.path, 'w', newline='') as f:
            self._write_rows(f, table)
        logger.info(f"✅ tau table ({table.n_max} rows) written to {self.path}")

    @staticmethod
    def _write_rows(f: TextIO, table: HeckeTable) -> None:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(["n", "tau", "lambda"])
        for n, tau, lam in table.rows():
            writer.writerow([n, tau, format(lam, ".17g")])
