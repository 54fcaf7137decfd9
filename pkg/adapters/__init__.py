"""
Adapters - Secondary Adapters per l'architettura esagonale
"""

from .ports import SinkPort, ReportSink, TauTableSink
from .factory import SinkFactory

from . import output

__all__ = [
    'SinkPort',
    'ReportSink',
    'TauTableSink',
    'SinkFactory'
]
