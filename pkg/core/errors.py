"""
Errors - Gerarchia delle eccezioni del motore di verifica.

Ogni eccezione porta un `kind` stabile: l'orchestrator lo scrive nel report
quando una suite fallisce con errore invece che con un gap.
"""

from typing import Any, Optional


class RecipError(Exception):
    """Classe base per tutti gli errori del dominio."""

    kind = "RecipError"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context = context

    def as_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self), **{k: repr(v) for k, v in self.context.items()}}


# ===== exp_sums =====

class NotCoprime(RecipError):
    kind = "NotCoprime"


class RowTooLarge(RecipError):
    kind = "RowTooLarge"


class ModulusNotAllowed(RecipError):
    kind = "ModulusNotAllowed"


# ===== coeffs =====

class UnsupportedWeight(RecipError):
    kind = "UnsupportedWeight"


class NeedsWidening(RecipError):
    kind = "NeedsWidening"


# ===== analysis / transforms =====

class GammaPole(RecipError):
    kind = "GammaPole"


class ZetaPole(RecipError):
    kind = "ZetaPole"


class ZetaDomain(RecipError):
    kind = "ZetaDomain"


class BesselRange(RecipError):
    kind = "BesselRange"


class MellinStrip(RecipError):
    kind = "MellinStrip"


class ContourTail(RecipError):
    kind = "ContourTail"


class NoAdmissibleContour(RecipError):
    kind = "NoAdmissibleContour"


# ===== lfun =====

class DirectSeriesDiverges(RecipError):
    kind = "DirectSeriesDiverges"


class ContinuationTail(RecipError):
    kind = "ContinuationTail"


# ===== engine =====

class EqualPrimes(RecipError):
    kind = "EqualPrimes"


class OutsideHalfPlane(RecipError):
    kind = "OutsideHalfPlane"


class SeriesDiverges(RecipError):
    kind = "SeriesDiverges"


# ===== config =====

class ConfigError(RecipError):
    """Errore di validazione della configurazione: `field` nomina il campo colpevole."""

    kind = "ConfigError"

    def __init__(self, field: str, message: str, value: Optional[Any] = None):
        super().__init__(f"{field}: {message}", field=field, value=value)
        self.field = field
