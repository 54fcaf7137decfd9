"""
Recip Core - Hexagonal Architecture
Matematica pura: somme esponenziali, coefficienti, trasformate, funzioni L e motore di verifica.
Nessuna conoscenza dei sink o del formato di configurazione.
"""

from .errors import RecipError, ConfigError
from .reports import Estimate, Outcome, VerificationReport, create_report, create_error_report
from .engine import TruncationPolicy, verify_reciprocity, verify_sieve, verify_ng_s
from .suites import SUITES, SuiteContext, schedule

__all__ = [
    'RecipError',
    'ConfigError',
    'Outcome',
    'VerificationReport',
    'create_report',
    'create_error_report',
    'Estimate',
    'TruncationPolicy',
    'verify_reciprocity',
    'verify_sieve',
    'verify_ng_s',
    'SUITES',
    'SuiteContext',
    'schedule',
]
