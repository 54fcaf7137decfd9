"""
Exponential sums - Somme di Kloosterman e di Ramanujan.

S(a,b;c) = sum_{d mod c, (d,c)=1} e((a*dbar + b*d)/c), reale perche' d <-> -d
coniuga i termini. La parte immaginaria non viene mai materializzata.

Convenzioni:
- S(a,b;1) = 1 (la sola classe d = 0 del gruppo banale)
- a, b negativi sono ridotti mod c
"""

import math
import logging
from enum import Enum
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Optional, Tuple, Union

import numpy as np

from .arith import divisors, divisor_count, mobius, modpow_array
from .errors import NotCoprime, RowTooLarge, ModulusNotAllowed
from infrastructure.table_cache import TableCache

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def mod_inverse(a: int, c: int) -> int:
    """
    Inverso di a modulo c.

    Args:
        a: Intero (anche negativo)
        c: Modulo positivo

    Returns:
        x in [1, c) con a*x = 1 (mod c); per c = 1 ritorna 0, unico residuo

    Raises:
        NotCoprime: Se gcd(a, c) != 1
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    if c == 1:
        return 0
    try:
        return pow(int(a), -1, int(c))
    except ValueError as e:
        raise NotCoprime(f"{a} is not invertible mod {c}", a=a, c=c) from e


@lru_cache(maxsize=4096)
def _units_and_inverses(c: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unita' d mod c e relativi inversi (array int64, stesso ordine)."""
    residues = np.arange(c, dtype=np.int64)
    units = residues[np.gcd(residues, c) == 1]
    inverses = modpow_array(units, len(units) - 1, c)
    units.setflags(write=False)
    inverses.setflags(write=False)
    return units, inverses


def kloosterman(a: int, b: int, c: int) -> float:
    """
    Somma di Kloosterman S(a,b;c) per somma diretta dei coseni.

    Somma compensata (math.fsum) sui phi(c) termini.
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    units, inverses = _units_and_inverses(int(c))
    a_mod, b_mod = int(a) % c, int(b) % c
    phases = (a_mod * inverses + b_mod * units) % c
    return math.fsum(np.cos(TWO_PI * phases / c))


# ===== TABELLE PER MODULO =====

@dataclass(frozen=True, kw_only=True)
class KloostermanRow:
    """
    Tabella S(1,r;c) per r mod c.

    Per (a,c) = 1 vale S(a,b;c) = S(1,ab;c) = values[a*b mod c].
    """
    modulus: int
    values: np.ndarray = field(repr=False)
    error_bound: float = 0.0

    @property
    def nbytes(self) -> int:
        return int(self.values.nbytes)

    def __getitem__(self, r: int) -> float:
        return float(self.values[int(r) % self.modulus])

    def lookup(self, a: int, b: int) -> float:
        """S(a,b;c) tramite la riduzione S(a,b;c) = S(1,ab;c)."""
        c = self.modulus
        if gcd(int(a), c) != 1 and gcd(int(b), c) != 1:
            raise NotCoprime(f"row lookup needs a or b coprime to {c}", a=a, b=b, c=c)
        return float(self.values[(int(a) * int(b)) % c])


def _check_cap(c: int, nbytes: int, what: str) -> None:
    cap = TableCache.get_instance().max_bytes
    if nbytes > cap:
        raise RowTooLarge(
            f"{what} for c={c} needs {nbytes} bytes, cap is {cap}",
            c=c, nbytes=nbytes, cap=cap
        )


def _build_row(c: int) -> KloostermanRow:
    units, inverses = _units_and_inverses(c)
    twist = np.zeros(c, dtype=np.complex128)
    twist[units] = np.exp(2j * np.pi * inverses / c)
    # values[r] = sum_d e(dbar/c) e(d r/c) = c * ifft(twist)[r]
    values = (c * np.fft.ifft(twist)).real
    values.setflags(write=False)
    bound = 1e-15 * c * max(1.0, math.log2(c))
    return KloostermanRow(modulus=c, values=values, error_bound=bound)


def kloosterman_row(c: int) -> KloostermanRow:
    """
    Riga S(1,r;c), costruita una volta per modulo e tenuta nella cache LRU.

    Raises:
        RowTooLarge: Se la riga supera il limite di memoria configurato
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    _check_cap(c, 8 * c, "KloostermanRow")
    return TableCache.get_instance().get_or_build(("kloosterman_row", c), lambda: _build_row(c))


def _build_table(c: int) -> np.ndarray:
    units, inverses = _units_and_inverses(c)
    indicator = np.zeros((c, c), dtype=np.float64)
    indicator[inverses, units] = 1.0
    # table[a,b] = sum_d e((a dbar + b d)/c) = c^2 * ifft2(indicator)[a,b]
    table = (float(c) * c * np.fft.ifft2(indicator)).real
    table.setflags(write=False)
    return table


def kloosterman_table(c: int) -> np.ndarray:
    """
    Tabella completa S(a,b;c), a,b mod c (anche con a, b non unita').

    Raises:
        RowTooLarge: Se c*c double superano il limite configurato
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    _check_cap(c, 8 * c * c, "Kloosterman table")
    return TableCache.get_instance().get_or_build(("kloosterman_table", c), lambda: _build_table(c))


def kloosterman_many(a: np.ndarray, b: np.ndarray, c: int) -> np.ndarray:
    """
    S(a_i, b_i; c) vettoriale: riga per le coppie con un'unita', somma diretta per le altre.
    """
    a = np.asarray(a, dtype=np.int64) % c
    b = np.asarray(b, dtype=np.int64) % c
    out = np.empty(a.shape, dtype=np.float64)
    row = kloosterman_row(c).values
    easy = (np.gcd(a, c) == 1) | (np.gcd(b, c) == 1)
    out[easy] = row[(a[easy] * b[easy]) % c]

    hard = np.nonzero(~easy)[0]
    if hard.size:
        units, inverses = _units_and_inverses(c)
        chunk = max(1, 2_000_000 // max(1, len(units)))
        for start in range(0, hard.size, chunk):
            idx = hard[start:start + chunk]
            phases = (np.outer(a[idx], inverses) + np.outer(b[idx], units)) % c
            out[idx] = np.cos(TWO_PI * phases / c).sum(axis=1)
    return out


# ===== SOMME DI RAMANUJAN =====

def ramanujan_sum(n: int, c: int) -> int:
    """c_c(n) = S(0,n;c) = sum_{d | (n,c)} mu(c/d) d, intero esatto."""
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    g = gcd(int(n), int(c))
    return sum(mobius(c // d) * d for d in divisors(g))


# ===== COPPIA DI CUSPIDI 0-infinito =====

@dataclass(frozen=True, kw_only=True)
class CuspPairParams:
    """Moduli ammessi c*sqrt(N) con (c,N) = 1."""
    level: int
    modulus: int
    m: int
    n: int

    def __post_init__(self):
        if self.level < 1 or self.modulus < 1:
            raise ValueError("level and modulus must be positive")
        if gcd(self.modulus, self.level) != 1:
            raise ModulusNotAllowed(
                f"c={self.modulus} not coprime to N={self.level}",
                c=self.modulus, N=self.level
            )


def kloosterman_cusp_pair(m: int, n: int, c: int, N: int) -> float:
    """S_{inf,0}(m,n; c sqrt N) = S(Nbar m, n; c)."""
    params = CuspPairParams(level=N, modulus=c, m=m, n=n)
    return kloosterman(mod_inverse(params.level, c) * m, n, c)


# ===== LEMMA SULLE SOMME DI KLOOSTERMAN =====

class LemmaClause(Enum):
    P_EXACTLY_DIVIDES = 1      # p || c
    P_SQUARED_DIVIDES = 2      # p^2 | c, p non divide m
    SCALING = 3                # S(pm,pn;p^2 c) = p S(m,n;pc)


class Inapplicable(Enum):
    """Marker: la clausola non si applica ai parametri dati."""
    INAPPLICABLE = "inapplicable"


INAPPLICABLE = Inapplicable.INAPPLICABLE


@dataclass(frozen=True, kw_only=True)
class LemmaCheck:
    clause: LemmaClause
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


LemmaResult = Union[LemmaCheck, Inapplicable]


def check_kloo_lemma(m: int, n: int, c: int, p: int) -> Tuple[LemmaResult, LemmaResult, LemmaResult]:
    """
    Valuta le tre identita' del lemma per (m, n, c, p).

    Returns:
        Tripla (clausola 1, clausola 2, clausola 3); ogni voce e' un LemmaCheck
        oppure INAPPLICABLE. La clausola 3 si applica sempre.
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")

    first: LemmaResult = INAPPLICABLE
    second: LemmaResult = INAPPLICABLE

    if c % p == 0 and (c // p) % p != 0:
        c_red = c // p
        eps = (p - 1) if m % p == 0 else -1
        lhs = kloosterman(m, p * n, c)
        rhs = eps * kloosterman(mod_inverse(p, c_red) * m, n, c_red)
        first = LemmaCheck(clause=LemmaClause.P_EXACTLY_DIVIDES, lhs=lhs, rhs=rhs)

    if c % (p * p) == 0 and m % p != 0:
        second = LemmaCheck(clause=LemmaClause.P_SQUARED_DIVIDES, lhs=kloosterman(m, p * n, c), rhs=0.0)

    third = LemmaCheck(
        clause=LemmaClause.SCALING,
        lhs=kloosterman(p * m, p * n, p * p * c),
        rhs=p * kloosterman(m, n, p * c),
    )
    return first, second, third


def check_crt_multiplicativity(a: int, b: int, c1: int, c2: int) -> float:
    """
    |S(a,b;c1c2) - S(a c2bar, b c2bar; c1) S(a c1bar, b c1bar; c2)|.

    Raises:
        NotCoprime: Se gcd(c1, c2) != 1
    """
    if gcd(c1, c2) != 1:
        raise NotCoprime(f"moduli {c1}, {c2} are not coprime", c1=c1, c2=c2)
    c2_bar = mod_inverse(c2, c1)
    c1_bar = mod_inverse(c1, c2)
    whole = kloosterman(a, b, c1 * c2)
    split = kloosterman(a * c2_bar, b * c2_bar, c1) * kloosterman(a * c1_bar, b * c1_bar, c2)
    return abs(whole - split)


# ===== BOUND DI WEIL =====

@dataclass(frozen=True, kw_only=True)
class WeilCheck:
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return abs(self.value) <= self.bound + 1e-6


def weil_bound(m: int, n: int, c: int) -> float:
    """tau_0(c) * (m,n,c)^(1/2) * c^(1/2)."""
    g = gcd(gcd(int(m), int(n)), int(c))
    return divisor_count(c) * math.sqrt(g) * math.sqrt(c)


def check_weil(m: int, n: int, c: int, value: Optional[float] = None) -> WeilCheck:
    if value is None:
        value = kloosterman(m, n, c)
    return WeilCheck(value=value, bound=weil_bound(m, n, c))
