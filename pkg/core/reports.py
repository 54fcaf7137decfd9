"""
Reports - Record delle verifiche e dei valori con budget di troncamento.

Un VerificationReport e' immutabile: `passed` e i gap sono funzioni pure
degli altri campi, cosi' un report riletto da JSON da' lo stesso esito.
"""

import re
import math
import time
from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


TINY = 1e-300

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
    r"\s*(?:(?P<sign>[+-])\s*(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*[ij])?\s*$"
)


def parse_complex(text: Any) -> complex:
    """
    Converte "a+bi" (anche "1.5", "2i", "0.6+1i", "-i") in complex.

    Raises:
        ValueError: Se la stringa non e' un numero complesso valido
    """
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    # solo parte immaginaria: "2i", "-i", "+3.5j"
    pure_imag = re.fullmatch(r"([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?[ij]", s)
    if pure_imag:
        sign = -1.0 if pure_imag.group(1) == "-" else 1.0
        mag = float(pure_imag.group(2)) if pure_imag.group(2) else 1.0
        return complex(0.0, sign * mag)
    match = _COMPLEX_RE.match(s)
    if not match or match.group("re") is None:
        raise ValueError(f"not a complex literal: {text!r}")
    real = float(match.group("re"))
    if match.group("sign") is None:
        return complex(real, 0.0)
    imag = float(match.group("im")) if match.group("im") else 1.0
    if match.group("sign") == "-":
        imag = -imag
    return complex(real, imag)


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:g}{sign}{abs(z.imag):g}i"


def complex_to_json(z: complex) -> Dict[str, float]:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def _float_or_nan(value: Optional[float]) -> float:
    # null nel JSON: valore non finito all'emissione
    return math.nan if value is None else float(value)


def complex_from_json(obj: Dict[str, Optional[float]]) -> complex:
    return complex(_float_or_nan(obj["re"]), _float_or_nan(obj["im"]))


class Outcome(Enum):
    """Esito di una verifica."""
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


@dataclass(frozen=True, kw_only=True)
class Estimate:
    """
    Valore troncato con stima dell'errore di troncamento.

    components: contributi non negativi al budget (es. c_tail, window, mn_cap).
    """
    value: complex
    budget: float = 0.0
    components: Dict[str, float] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def scaled(self, factor: complex) -> "Estimate":
        return Estimate(
            value=self.value * factor,
            budget=self.budget * abs(factor),
            components={k: v * abs(factor) for k, v in self.components.items()},
            provenance=self.provenance,
        )


@dataclass(frozen=True, kw_only=True)
class VerificationReport:
    """
    Un record per ogni identita' verificata.

    passed = rel_gap <= max(rel_tol, 3 * budget / scale), con scale = max(|lhs|, |rhs|).
    """
    identity: str
    lhs: complex = 0j
    rhs: complex = 0j
    budget: float = 0.0
    rel_tol: float = 1e-3
    params: Dict[str, Any] = field(default_factory=dict)
    contours: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    runtime_ms: float = 0.0
    error: Optional[Dict[str, Any]] = None

    @property
    def abs_gap(self) -> float:
        return abs(complex(self.lhs) - complex(self.rhs))

    @property
    def scale(self) -> float:
        return max(abs(complex(self.lhs)), abs(complex(self.rhs)), TINY)

    @property
    def rel_gap(self) -> float:
        gap = self.abs_gap
        return 0.0 if gap == 0.0 else gap / self.scale

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        if not (math.isfinite(self.abs_gap) and math.isfinite(self.budget)):
            return False
        return self.rel_gap <= max(self.rel_tol, 3.0 * self.budget / self.scale)

    @property
    def outcome(self) -> Outcome:
        if self.error is not None:
            return Outcome.ERROR
        return Outcome.PASS if self.passed else Outcome.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "identity": self.identity,
            "params": self.params,
            "lhs": complex_to_json(self.lhs),
            "rhs": complex_to_json(self.rhs),
            "abs_gap": self.abs_gap,
            "rel_gap": self.rel_gap,
            "budget": self.budget,
            "rel_tol": self.rel_tol,
            "contours": self.contours,
            "notes": list(self.notes),
            "runtime_ms": self.runtime_ms,
            "error": self.error,
            "pass": self.passed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerificationReport":
        return cls(
            identity=data["identity"],
            lhs=complex_from_json(data["lhs"]),
            rhs=complex_from_json(data["rhs"]),
            budget=_float_or_nan(data["budget"]),
            rel_tol=data["rel_tol"],
            params=data.get("params", {}),
            contours=data.get("contours", {}),
            notes=data.get("notes", []),
            runtime_ms=data.get("runtime_ms", 0.0),
            error=data.get("error"),
        )

    def __repr__(self):
        return (f"VerificationReport(identity={self.identity}, "
                f"outcome={self.outcome.name}, rel_gap={self.rel_gap:.3e}, "
                f"budget={self.budget:.3e})")


# ===== HELPER FUNCTIONS =====

def create_report(
    identity: str,
    lhs: complex,
    rhs: complex,
    budget: float = 0.0,
    rel_tol: float = 1e-3,
    params: Optional[dict] = None,
    contours: Optional[dict] = None,
    notes: Optional[List[str]] = None,
    started: Optional[float] = None,
) -> VerificationReport:
    """Helper per creare un report; `started` e' un time.perf_counter() di partenza."""
    runtime_ms = 0.0 if started is None else (time.perf_counter() - started) * 1000.0
    return VerificationReport(
        identity=identity,
        lhs=complex(lhs),
        rhs=complex(rhs),
        budget=float(budget),
        rel_tol=float(rel_tol),
        params=params or {},
        contours=contours or {},
        notes=notes or [],
        runtime_ms=runtime_ms,
    )


def create_error_report(identity: str, error: Exception, params: Optional[dict] = None) -> VerificationReport:
    """Helper per un report di errore (suite interrotta da un'eccezione)."""
    kind = getattr(error, "kind", type(error).__name__)
    return VerificationReport(
        identity=identity,
        lhs=complex("nan"),
        rhs=complex("nan"),
        budget=float("inf"),
        params=params or {},
        error={"kind": kind, "message": str(error)},
    )
