"""
Arithmetic helpers - fattorizzazione, divisori, Moebius, crivelli numpy.
"""

from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np


@lru_cache(maxsize=65536)
def factorize(n: int) -> Tuple[Tuple[int, int], ...]:
    """Fattorizzazione per divisione di prova: ((p, e), ...) con p crescenti."""
    n = abs(int(n))
    if n < 2:
        return ()
    factors: Dict[int, int] = {}
    while n % 2 == 0:
        factors[2] = factors.get(2, 0) + 1
        n //= 2
    d = 3
    while d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return tuple(sorted(factors.items()))


def is_prime(n: int) -> bool:
    n = int(n)
    return n >= 2 and factorize(n) == ((n, 1),)


@lru_cache(maxsize=16384)
def divisors(n: int) -> Tuple[int, ...]:
    """Divisori positivi di |n| in ordine crescente."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("divisors(0) is undefined")
    divs: List[int] = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return tuple(sorted(divs))


def divisor_count(n: int) -> int:
    """tau_0(n), numero dei divisori."""
    count = 1
    for _, e in factorize(n):
        count *= e + 1
    return count


def mobius(n: int) -> int:
    result = 1
    for _, e in factorize(n):
        if e > 1:
            return 0
        result = -result
    return result


def euler_phi(n: int) -> int:
    result = int(n)
    for p, _ in factorize(n):
        result -= result // p
    return result


def strip_prime(n: int, q: int) -> int:
    """Parte di n coprima con il primo q."""
    n = int(n)
    while n and n % q == 0:
        n //= q
    return n


def primes_up_to(n: int) -> np.ndarray:
    """Crivello di Eratostene."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def divisor_count_table(n: int) -> np.ndarray:
    """tau_0(k) per k = 0..n (tau_0(0) := 0)."""
    counts = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        counts[d::d] += 1
    return counts


def modpow_array(base: np.ndarray, exponent: int, modulus: int) -> np.ndarray:
    """base**exponent mod modulus elemento per elemento (modulus < 3e9)."""
    result = np.ones_like(base, dtype=np.int64) % modulus
    b = np.asarray(base, dtype=np.int64) % modulus
    e = int(exponent)
    while e > 0:
        if e & 1:
            result = (result * b) % modulus
        b = (b * b) % modulus
        e >>= 1
    return result
