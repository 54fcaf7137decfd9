"""
Output Adapters (Secondary Adapters)
Sink che consegnano i risultati di un run al mondo esterno.

Le classi vengono automaticamente rese disponibili al factory tramite __all__.
"""

from .json_sink import JsonReportSink
from .table_sink import TableReportSink
from .log_sink import LogReportSink
from .csv_tau_sink import CsvTauSink

__all__ = [
    'JsonReportSink',
    'TableReportSink',
    'LogReportSink',
    'CsvTauSink'
]
