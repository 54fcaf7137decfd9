"""
Port Interfaces - Contratti per i sink dei risultati
Implementazione del Port Pattern per l'architettura esagonale.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, TYPE_CHECKING
import logging

if TYPE_CHECKING:
    from core.coeffs import HeckeTable
    from core.reports import VerificationReport

logger = logging.getLogger(__name__)


class SinkPort(ABC):
    """
    Classe base COMUNE per tutti i sink.

    Fornisce:
    - Stato (name, config)
    - Risoluzione dei path relativi rispetto a RECIP_HOME
    - close() di default
    """

    def __init__(self, name: str, config: dict):
        """
        Args:
            name: Nome identificativo del sink
            config: Configurazione specifica del sink
        """
        self.name = name
        self.config = config
        logger.debug(f"🔌 {self.__class__.__name__} '{name}' initialized")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.config.get("recip_home"):
            p = Path(self.config["recip_home"]) / p
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def close(self) -> None:
        """Rilascia le risorse (default: niente)"""
        pass


class ReportSink(SinkPort):
    """Destinazione dei VerificationReport di un run."""

    @abstractmethod
    def emit(self, reports: List["VerificationReport"]) -> None:
        """Consegna tutti i report del run, nell'ordine di esecuzione"""
        pass


class TauTableSink(SinkPort):
    """Destinazione della tabella tau(n) del comando `tabulate tau`."""

    @abstractmethod
    def write_table(self, table: "HeckeTable") -> None:
        pass
