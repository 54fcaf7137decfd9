"""
L-functions - Twist additivi L(s, g, d/c), continuazione analitica e serie doppia D_g.

Continuazione: con S = s + (k-1)/2 e y_m = 2 pi m / c,
    Lambda(S, d/c) = (c/2pi)^S Gamma(S) L(s, g, d/c)
                   = sum tau(m) e(md/c) y_m^-S Gamma(S, y_m)
                     + (-1)^(k/2) sum tau(m) e(-m dbar/c) y_m^(S-k) Gamma(k-S, y_m).
I pesi di Gamma incompleta non dipendono da d e sono condivisi fra i twist
con lo stesso (c, s).
"""

import math
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Dict, List, Tuple

import mpmath
import numpy as np

from .arith import euler_phi
from .coeffs import HeckeTable
from .exp_sums import mod_inverse, kloosterman_table
from .errors import NotCoprime, DirectSeriesDiverges, ContinuationTail
from .reports import Estimate

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329
DIRECT_SIGMA_MIN = 1.2


@dataclass(frozen=True, kw_only=True)
class AdditiveTwist:
    """x = d/c con (d, c) = 1."""
    numerator: int
    modulus: int
    weight: int = 12

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if gcd(self.numerator, self.modulus) != 1:
            raise NotCoprime(
                f"twist {self.numerator}/{self.modulus} is not reduced",
                d=self.numerator, c=self.modulus
            )

    @property
    def inverse(self) -> int:
        return mod_inverse(self.numerator, self.modulus)

    def dual(self) -> "AdditiveTwist":
        """-dbar/c, il twist del lato destro dell'equazione funzionale."""
        return AdditiveTwist(numerator=(-self.inverse) % self.modulus, modulus=self.modulus, weight=self.weight)


@dataclass(frozen=True, kw_only=True)
class DgParams:
    a: int
    b: int
    modulus: int
    s: complex

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if gcd(self.a, self.modulus) != 1 or gcd(self.b, self.modulus) != 1:
            raise NotCoprime(
                f"residues a={self.a}, b={self.b} must be coprime to c={self.modulus}",
                a=self.a, b=self.b, c=self.modulus
            )

    def dual(self) -> "DgParams":
        c = self.modulus
        return DgParams(a=mod_inverse(self.a, c), b=mod_inverse(self.b, c), modulus=c, s=1.0 - self.s)


# ===== SERIE DIRETTA =====

def deligne_tail(M: int, sigma: float) -> float:
    """sum_{m>M} tau_0(m) m^-sigma ~ M^(1-sigma) [(log M + 2 gamma)/(sigma-1) + 1/(sigma-1)^2]."""
    if sigma <= 1.0:
        return math.inf
    d = sigma - 1.0
    return M ** (-d) * ((math.log(M) + 2.0 * EULER_GAMMA) / d + 1.0 / (d * d))


def l_additive_direct(s: complex, tw: AdditiveTwist, table: HeckeTable, M: int = None) -> Estimate:
    """
    Somma parziale sum_{m<=M} lambda(m) e(md/c) m^-s con coda di Deligne.

    Raises:
        DirectSeriesDiverges: Se Re(s) < 1.2
    """
    s = complex(s)
    if s.real < DIRECT_SIGMA_MIN:
        raise DirectSeriesDiverges(f"direct series needs Re(s) >= {DIRECT_SIGMA_MIN}, got {s.real:g}", s=s.real)
    M = table.n_max if M is None else int(M)
    if M > table.n_max:
        raise ValueError(f"cutoff M={M} exceeds HeckeTable n_max={table.n_max}")

    m = np.arange(1, M + 1, dtype=np.int64)
    c = tw.modulus
    phase = np.exp(2j * np.pi * ((m * tw.numerator) % c) / c)
    terms = table.lam[1:M + 1] * phase * np.exp(-s * np.log(m))
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    tail = deligne_tail(M, s.real)
    return Estimate(value=value, budget=tail, components={"deligne_tail": tail},
                    provenance={"M": M, "twist": f"{tw.numerator}/{c}"})


# ===== CONTINUAZIONE =====

def _working_dps(s: complex) -> int:
    # Gamma(S) ~ e^(-pi |t| / 2): cifre perse nella normalizzazione
    return 25 + int(math.ceil(math.pi * abs(s.imag) / 2.0 / math.log(10.0)))


@lru_cache(maxsize=256)
def _continuation_weights(c: int, s: complex, weight: int, tol: float):
    """
    Pesi (w_direct, w_dual) per m = 1..M e normalizzazione (c/2pi)^S Gamma(S).

    M e' il primo indice dopo il quale l'inviluppo di Deligne dei termini resta
    sotto tol rispetto alla somma assoluta accumulata.
    """
    S = mpmath.mpc(s.real + (weight - 1) / 2.0, s.imag)
    dual = weight - S
    half_weight = (weight - 1) / 2.0
    direct: List = []
    mirrored: List = []
    abs_sum = mpmath.mpf(0)
    peak_y = max(abs(complex(S)), abs(complex(dual))) + 1.0
    quiet = 0
    m = 0
    while True:
        m += 1
        y = 2 * mpmath.pi * m / c
        w1 = mpmath.power(y, -S) * mpmath.gammainc(S, y)
        w2 = mpmath.power(y, S - weight) * mpmath.gammainc(dual, y)
        direct.append(w1)
        mirrored.append(w2)
        # |tau(m)| <= tau_0(m) m^((k-1)/2) <= 2 sqrt(m) m^((k-1)/2)
        envelope = 2.0 * math.sqrt(m) * m ** half_weight * (abs(w1) + abs(w2))
        abs_sum += envelope
        if y > peak_y and envelope <= tol * abs_sum:
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
        if m > 10**6:
            break
    normalizer = mpmath.power(c / (2 * mpmath.pi), S) * mpmath.gamma(S)
    return m, tuple(direct), tuple(mirrored), normalizer, abs_sum


def l_additive_continued(s: complex, tw: AdditiveTwist, table: HeckeTable, tol: float = 1e-14) -> complex:
    """
    Valore della continuazione intera di L(s, g, d/c).

    Raises:
        ContinuationTail: Se servono piu' coefficienti di quelli in tabella
    """
    s = complex(s)
    with mpmath.workdps(_working_dps(s)):
        M, direct, mirrored, normalizer, _ = _continuation_weights(tw.modulus, s, tw.weight, tol)
        if M > table.n_max:
            raise ContinuationTail(
                f"continuation at s={s} needs {M} coefficients, table has {table.n_max}",
                needed=M, available=table.n_max
            )
        c = tw.modulus
        d, d_bar = tw.numerator % c, tw.inverse
        sign = -1 if (tw.weight // 2) % 2 else 1
        total = mpmath.mpc(0)
        for m in range(1, M + 1):
            tau = table.tau[m]
            if tau == 0:
                continue
            front = mpmath.expjpi(2 * mpmath.mpf((m * d) % c) / c)
            back = mpmath.expjpi(-2 * mpmath.mpf((m * d_bar) % c) / c)
            total += tau * (front * direct[m - 1] + sign * back * mirrored[m - 1])
        return complex(total / normalizer)


def fe_factor(s: complex, modulus: int, weight: int = 12) -> complex:
    """(-1)^(k/2) (2pi/c)^(2s-1) Gamma((k+1)/2 - s) / Gamma((k-1)/2 + s)."""
    s = complex(s)
    sign = -1 if (weight // 2) % 2 else 1
    with mpmath.workdps(_working_dps(s)):
        ratio = mpmath.gamma((weight + 1) / 2.0 - s) / mpmath.gamma((weight - 1) / 2.0 + s)
        return sign * complex(mpmath.power(2 * mpmath.pi / modulus, 2 * s - 1) * ratio)


def l_fe_sides(s: complex, tw: AdditiveTwist, table: HeckeTable) -> Tuple[complex, complex]:
    """(L(s, d/c), lato destro dell'equazione funzionale a 1-s con twist -dbar/c)."""
    s = complex(s)
    lhs = l_additive_continued(s, tw, table)
    rhs = fe_factor(s, tw.modulus, tw.weight) * l_additive_continued(1.0 - s, tw.dual(), table)
    return lhs, rhs


def l_fe_gap(s: complex, tw: AdditiveTwist, table: HeckeTable) -> float:
    lhs, rhs = l_fe_sides(s, tw, table)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


# ===== SERIE DOPPIA D_g =====

def _units(c: int) -> List[int]:
    return [d for d in range(c) if gcd(d, c) == 1] if c > 1 else [0]


def dg(params: DgParams, table: HeckeTable, evaluator: str = "continued", M: int = None) -> Estimate:
    """
    D_g(a,b,c;s) = sum*_{d mod c} L(s, a dbar/c) L(s, b d/c).

    Aprendo S(am, bn; c) = sum_d e((am dbar + bn d)/c) il secondo fattore
    porta d, non dbar. I valori di L sono memorizzati per numeratore.
    """
    if evaluator not in ("continued", "direct"):
        raise ValueError(f"evaluator must be 'continued' or 'direct', got {evaluator!r}")
    c, s = params.modulus, params.s
    values: Dict[int, Tuple[complex, float]] = {}

    def l_value(numerator: int) -> Tuple[complex, float]:
        key = numerator % c
        if key not in values:
            tw = AdditiveTwist(numerator=key if c > 1 else 0, modulus=c)
            if evaluator == "direct":
                est = l_additive_direct(s, tw, table, M)
                values[key] = (est.value, est.budget)
            else:
                values[key] = (l_additive_continued(s, tw, table), 0.0)
        return values[key]

    total_re: List[float] = []
    total_im: List[float] = []
    budget = 0.0
    for d in _units(c):
        d_bar = mod_inverse(d, c) if c > 1 else 0
        first, b1 = l_value(params.a * d_bar)
        second, b2 = l_value(params.b * d)
        product = first * second
        total_re.append(product.real)
        total_im.append(product.imag)
        budget += abs(first) * b2 + abs(second) * b1 + b1 * b2
    value = complex(math.fsum(total_re), math.fsum(total_im))
    return Estimate(value=value, budget=budget, components={"l_tail": budget},
                    provenance={"evaluator": evaluator, "residues": euler_phi(c)})


def dg_fe_sides(params: DgParams, table: HeckeTable) -> Tuple[complex, complex]:
    """D_g(a,b,c;s) e (2pi/c)^(4s-2) [Gamma ratio]^2 D_g(abar,bbar,c;1-s)."""
    s = params.s
    lhs = dg(params, table).value
    factor = fe_factor(s, params.modulus) ** 2
    rhs = factor * dg(params.dual(), table).value
    return lhs, rhs


def dg_fe_gap(params: DgParams, table: HeckeTable) -> float:
    lhs, rhs = dg_fe_sides(params, table)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def dg_brute_force(params: DgParams, table: HeckeTable, M: int) -> Estimate:
    """
    Oracolo: sum_{m,n<=M} lambda(m) lambda(n) S(am, bn; c) (mn)^-s con tabella di Kloosterman.

    Budget: |S| <= c, code di Deligne sui due indici.
    """
    c, s = params.modulus, params.s
    if s.real < DIRECT_SIGMA_MIN:
        raise DirectSeriesDiverges(f"brute force needs Re(s) >= {DIRECT_SIGMA_MIN}", s=s.real)
    if M > table.n_max:
        raise ValueError(f"cutoff M={M} exceeds HeckeTable n_max={table.n_max}")
    kt = kloosterman_table(c)
    m = np.arange(1, M + 1, dtype=np.int64)
    coeff = table.lam[1:M + 1] * np.exp(-s * np.log(m))
    # raggruppa per residui: sum_{r,t} S(r, t) A_r B_t
    A = np.zeros(c, dtype=np.complex128)
    B = np.zeros(c, dtype=np.complex128)
    np.add.at(A, (params.a * m) % c, coeff)
    np.add.at(B, (params.b * m) % c, coeff)
    value = complex(A @ kt @ B)

    absolute = float(np.sum(np.abs(coeff)))
    tail = deligne_tail(M, s.real)
    budget = c * (2.0 * absolute * tail + tail * tail)
    return Estimate(value=value, budget=budget, components={"deligne_tail": budget},
                    provenance={"M": M})
