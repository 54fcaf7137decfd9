"""
Coeffs - Autovalori di Hecke esatti della forma Delta e funzioni divisore tau_w.

tau(n) e' intero esatto (int Python); il contratto a 128 bit e' un tetto
configurabile (`exact_bits`) sui prodotti controllati da verify_hecke.
"""

import math
import cmath
import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .arith import divisors, divisor_count, primes_up_to
from .errors import UnsupportedWeight, NeedsWidening

logger = logging.getLogger(__name__)

SUPPORTED_WEIGHT = 12
DEFAULT_EXACT_BITS = 127
MAX_TABLE_SIZE = 10**5


@dataclass(frozen=True, kw_only=True)
class HeckeTable:
    """
    tau(1..n_max) esatti e lambda(n) = tau(n) / n^((k-1)/2).

    tau[0] = 0 e lam[0] = 0 sono segnaposto: l'indice coincide con n.
    """
    weight: int
    n_max: int
    tau: Tuple[int, ...] = field(repr=False)
    lam: np.ndarray = field(repr=False)

    def tau_of(self, n: int) -> int:
        self._check_index(n)
        return self.tau[n]

    def lambda_of(self, n: int) -> float:
        self._check_index(n)
        return float(self.lam[n])

    def rows(self) -> Iterator[Tuple[int, int, float]]:
        """Righe (n, tau, lambda) per l'export CSV."""
        for n in range(1, self.n_max + 1):
            yield n, self.tau[n], float(self.lam[n])

    def _check_index(self, n: int) -> None:
        if not 1 <= n <= self.n_max:
            raise IndexError(f"n={n} outside HeckeTable range [1, {self.n_max}]")


def _pentagonal_series(length: int) -> np.ndarray:
    """Coefficienti di prod_{n>=1}(1 - x^n) fino a x^(length-1) (Eulero)."""
    coeffs = np.zeros(length, dtype=np.int64)
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        placed = False
        for g in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if g < length:
                coeffs[g] = sign
                placed = True
            if k == 0:
                break
        if not placed:
            return coeffs
        k += 1


def _series_power(base: np.ndarray, exponent: int, length: int) -> List[int]:
    """
    base(x)^exponent troncata, base[0] = 1, con la ricorrenza esatta
    n F_n = sum_{j=1..n} ((exponent+1) j - n) a_j F_{n-j}.
    """
    support = np.nonzero(base[1:length])[0] + 1
    weights = base[support].astype(object)
    power: List[int] = [1] + [0] * (length - 1)
    values = np.zeros(length, dtype=object)
    values[0] = 1
    for n in range(1, length):
        j = support[support <= n]
        if j.size == 0:
            continue
        factors = ((exponent + 1) * j - n).astype(object) * weights[:j.size]
        total = int(np.dot(factors, values[n - j]))
        # la divisione e' esatta per costruzione
        quotient, remainder = divmod(total, n)
        if remainder:
            raise ArithmeticError(f"inexact power-series step at n={n}")
        power[n] = quotient
        values[n] = quotient
    return power


def build_hecke_table(weight: int = SUPPORTED_WEIGHT, n_max: int = 1000) -> HeckeTable:
    """
    Costruisce la tabella espandendo Delta = x * prod(1 - x^n)^24.

    Args:
        weight: Peso della forma (solo 12)
        n_max: Ultimo indice (<= 1e5)

    Raises:
        UnsupportedWeight: Se weight != 12
    """
    if weight != SUPPORTED_WEIGHT:
        raise UnsupportedWeight(f"only weight {SUPPORTED_WEIGHT} is supported, got {weight}", weight=weight)
    if not 1 <= n_max <= MAX_TABLE_SIZE:
        raise ValueError(f"n_max must be in [1, {MAX_TABLE_SIZE}], got {n_max}")

    logger.info(f"🧮 Building HeckeTable (weight {weight}, n_max {n_max})")
    power = _series_power(_pentagonal_series(n_max), 24, n_max)
    tau = tuple([0] + power)

    exponent = (weight - 1) / 2.0
    n = np.arange(n_max + 1, dtype=np.float64)
    lam = np.zeros(n_max + 1, dtype=np.float64)
    lam[1:] = np.array([float(t) for t in tau[1:]]) / n[1:] ** exponent
    lam.setflags(write=False)

    logger.info(f"✅ HeckeTable ready: tau(2)={tau[2] if n_max >= 2 else '-'}")
    return HeckeTable(weight=weight, n_max=n_max, tau=tau, lam=lam)


def _poly_mul(a: List[int], b: List[int], length: int) -> List[int]:
    out = [0] * length
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(min(len(b), length - i)):
            if b[j]:
                out[i + j] += x * b[j]
    return out


def tau_oracle(n_max: int) -> Tuple[int, ...]:
    """
    Seconda costruzione indipendente: Delta = x * (sum (-1)^k (2k+1) x^(k(k+1)/2))^8.

    Lenta (moltiplicazione ingenua), pensata per n_max <= 30.
    """
    length = n_max
    cube = [0] * length
    k = 0
    while k * (k + 1) // 2 < length:
        cube[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    result = [1] + [0] * (length - 1)
    for _ in range(8):
        result = _poly_mul(result, cube, length)
    return tuple([0] + result)


def _checked(value: int, exact_bits: int, what: str) -> int:
    if abs(value).bit_length() > exact_bits:
        raise NeedsWidening(
            f"{what} needs {abs(value).bit_length()} bits (ceiling {exact_bits})",
            bits=abs(value).bit_length(), ceiling=exact_bits
        )
    return value


def verify_hecke(m: int, n: int, table: HeckeTable, exact_bits: int = DEFAULT_EXACT_BITS) -> bool:
    """
    tau(m) tau(n) == sum_{d | (m,n)} d^11 tau(mn/d^2), uguaglianza intera esatta.

    Raises:
        NeedsWidening: Se un termine supera il tetto di bit
        ValueError: Se m*n > n_max
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if m * n > table.n_max:
        raise ValueError(f"m*n={m * n} exceeds n_max={table.n_max}")
    power = table.weight - 1
    lhs = _checked(table.tau[m] * table.tau[n], exact_bits, "tau(m)tau(n)")
    rhs = 0
    for d in divisors(gcd(m, n)):
        term = _checked(d**power * table.tau[m * n // (d * d)], exact_bits, "d^11 tau(mn/d^2)")
        rhs = _checked(rhs + term, exact_bits, "Hecke sum")
    return lhs == rhs


@dataclass(frozen=True, kw_only=True)
class RecurrenceCheck:
    checked: int
    failures: Tuple[Tuple[int, int], ...] = ()

    @property
    def holds(self) -> bool:
        return not self.failures


def verify_tau_recurrence(table: HeckeTable) -> RecurrenceCheck:
    """tau(p^(k+1)) = tau(p) tau(p^k) - p^11 tau(p^(k-1)) per ogni p^(k+1) <= n_max."""
    power = table.weight - 1
    checked = 0
    failures = []
    for p in primes_up_to(table.n_max).tolist():
        prev, cur, k = 1, p, 1
        while cur * p <= table.n_max:
            nxt = cur * p
            expected = table.tau[p] * table.tau[cur] - p**power * table.tau[prev]
            checked += 1
            if table.tau[nxt] != expected:
                failures.append((p, k + 1))
            prev, cur, k = cur, nxt, k + 1
    if failures:
        logger.warning(f"⚠️ tau recurrence failed at {failures[:5]}")
    return RecurrenceCheck(checked=checked, failures=tuple(failures))


def deligne_ratio(table: HeckeTable, n_limit: Optional[int] = None) -> float:
    """max_n |lambda(n)| / tau_0(n); il bound di Deligne chiede <= 1."""
    limit = table.n_max if n_limit is None else min(n_limit, table.n_max)
    counts = np.array([divisor_count(n) for n in range(1, limit + 1)], dtype=np.float64)
    return float(np.max(np.abs(table.lam[1:limit + 1]) / counts))


# ===== FUNZIONI DIVISORE =====

@dataclass(frozen=True, kw_only=True)
class DivisorParams:
    order: complex
    level: Optional[int] = None

    def __post_init__(self):
        if self.level is not None and self.level < 1:
            raise ValueError(f"level restriction must be positive, got {self.level}")


def divisor_tau(w: complex, n: int, q: Optional[int] = None) -> complex:
    """
    tau_w(n) = sum_{ab=n} (a/b)^w; con q, tau_w^(q)(n) = tau_w(n / (n,q)).
    """
    params = DivisorParams(order=complex(w), level=q)
    n = abs(int(n))
    if n < 1:
        raise ValueError("divisor_tau needs n >= 1")
    if params.level is not None:
        n //= gcd(n, params.level)
    total = 0j
    for a in divisors(n):
        total += cmath.exp(params.order * math.log(a * a / n))
    return total


def verify_divisor_hecke(w: complex, m: int, n: int, q: int) -> float:
    """|tau(m) tau(n) - sum_{d|(m,n)} tau(mn/d^2)| per tau = tau_w^(q)."""
    lhs = divisor_tau(w, m, q) * divisor_tau(w, n, q)
    rhs = sum(divisor_tau(w, m * n // (d * d), q) for d in divisors(gcd(m, n)))
    return abs(lhs - rhs)


def multiplicative_defects(table: HeckeTable, limit: int) -> List[Tuple[int, int]]:
    """Coppie (m, n) coprime con mn <= limit dove tau(mn) != tau(m)tau(n)."""
    limit = min(limit, table.n_max)
    bad = []
    for m in range(2, limit + 1):
        for n in range(m + 1, limit // m + 1):
            if gcd(m, n) == 1 and table.tau[m * n] != table.tau[m] * table.tau[n]:
                bad.append((m, n))
    return bad

