"""
Analysis - Funzioni speciali, registry delle funzioni test e integrali su rette verticali.

Gamma e Bessel di ordine intero vengono da scipy.special; zeta e Bessel di
ordine immaginario da mpmath, a precisione di lavoro aumentata dove la serie
alterna con forte cancellazione.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np
import mpmath
from scipy import special
from scipy.integrate import quad

from .arith import factorize
from .errors import GammaPole, ZetaPole, ZetaDomain, BesselRange, MellinStrip, ContourTail, NoAdmissibleContour

logger = logging.getLogger(__name__)

BESSEL_T_MAX = 20.0
BESSEL_X_MAX = 50.0
BESSEL_INT_X_MAX = 1e4


# ===== GAMMA / ZETA =====

def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and float(z.real).is_integer()


def gamma(z: complex) -> complex:
    """
    Gamma complessa (riflessione gestita da scipy per Re z < 1/2).

    Raises:
        GammaPole: Se z e' un intero non positivo
    """
    z = complex(z)
    if _is_pole(z):
        raise GammaPole(f"Gamma has a pole at {z.real:g}", z=z.real)
    return complex(special.gamma(z))


def zeta_restricted(s: complex, N: int = 1) -> complex:
    """
    zeta_N(s) = zeta(s) * prod_{p | N} (1 - p^-s).

    Definita solo per Re(s) > 0: il motore la valuta in 2s e 2u con parte
    reale > 1, la continuazione oltre la striscia critica non serve.

    Raises:
        ZetaPole: Se s = 1
        ZetaDomain: Se Re(s) <= 0
    """
    s = complex(s)
    if s == 1:
        raise ZetaPole("zeta has a pole at s=1")
    if s.real <= 0:
        raise ZetaDomain(f"zeta_N is restricted to Re(s) > 0, got s={s}", s=s)
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    value = complex(mpmath.zeta(mpmath.mpc(s.real, s.imag)))
    for p, _ in factorize(N):
        value *= 1.0 - p ** (-s)
    return value


# ===== BESSEL =====

def bessel_j_int(ell: int, x):
    """J_ell(x) per ordine intero; accetta scalari o array."""
    if ell < 0:
        raise ValueError(f"order must be nonnegative, got {ell}")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > BESSEL_INT_X_MAX):
        raise ValueError(f"x outside [0, {BESSEL_INT_X_MAX:g}]")
    values = special.jv(ell, arr)
    return float(values) if values.ndim == 0 else values


def bessel_j_imag(t: float, x: float, tail: float = 1e-10, extra_terms: int = 0) -> complex:
    """
    J_{2it}(x) per serie di potenze.

    La precisione di lavoro cresce con x (il termine massimo e' circa e^x
    mentre la somma resta O(1)).

    Args:
        t: Parte immaginaria di meta' ordine, |t| <= 20
        x: Argomento, 0 < x <= 50
        tail: Soglia relativa di arresto
        extra_terms: Termini aggiuntivi dopo l'arresto (controllo di troncamento)

    Raises:
        BesselRange: Fuori dal dominio
    """
    if abs(t) > BESSEL_T_MAX or not 0.0 < x <= BESSEL_X_MAX:
        raise BesselRange(f"J_(2it)(x) with t={t}, x={x} outside desk range", t=t, x=x)

    digits = 20 + int(math.ceil(x / math.log(10.0)))
    with mpmath.workdps(digits):
        nu = mpmath.mpc(0, 2 * t)
        half = mpmath.mpf(x) / 2
        quarter_sq = -half * half
        term = mpmath.power(half, nu) / mpmath.gamma(nu + 1)
        total = term
        k = 0
        remaining = extra_terms
        while True:
            k += 1
            term = term * quarter_sq / (k * (nu + k))
            total += term
            if k > half and abs(term) <= tail * 1e-6 * max(abs(total), mpmath.mpf(1e-30)):
                if remaining <= 0:
                    break
                remaining -= 1
        return complex(total)


# ===== FUNZIONI TEST =====

@dataclass(frozen=True, kw_only=True)
class TestFunction:
    """
    Funzione test ammissibile con trasformata di Mellin in forma chiusa.

    vanishing_order: phi^(j)(0) = 0 per j <= vanishing_order
    mellin_strip: (sinistra, destra) della striscia di validita' di Re(u)
    support: intervallo fuori dal quale phi e' trascurabile in doppia precisione
    """
    __test__ = False

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    log_mellin: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    vanishing_order: int
    mellin_strip: Tuple[float, float]
    support: Tuple[float, float]
    description: str = ""

    def __call__(self, x):
        return self.evaluate(x)

    def mellin_closed(self, u):
        """phi~(u) in forma chiusa (vettoriale)."""
        return np.exp(self.log_mellin(u))

    def in_strip(self, re_u: float) -> bool:
        lo, hi = self.mellin_strip
        return lo < re_u < hi


def _gauss13(x):
    x = np.asarray(x, dtype=np.float64)
    return x**13 * np.exp(-x * x)


def _gauss13_log_mellin(u):
    return math.log(0.5) + special.loggamma((np.asarray(u, dtype=np.complex128) + 13.0) / 2.0)


def _exp13(x):
    x = np.asarray(x, dtype=np.float64)
    return x**13 * np.exp(-x)


def _exp13_log_mellin(u):
    return special.loggamma(np.asarray(u, dtype=np.complex128) + 13.0)


TEST_FUNCTIONS: Dict[str, TestFunction] = {
    "gauss13": TestFunction(
        name="gauss13",
        evaluate=_gauss13,
        log_mellin=_gauss13_log_mellin,
        vanishing_order=12,
        mellin_strip=(-13.0, math.inf),
        support=(1e-2, 12.0),
        description="x^13 exp(-x^2), Mellin 1/2 Gamma((u+13)/2)",
    ),
    "exp13": TestFunction(
        name="exp13",
        evaluate=_exp13,
        log_mellin=_exp13_log_mellin,
        vanishing_order=12,
        mellin_strip=(-13.0, math.inf),
        support=(1e-2, 120.0),
        description="x^13 exp(-x), Mellin Gamma(u+13)",
    ),
}


def get_test_function(name: str) -> TestFunction:
    """
    Raises:
        ValueError: Se il nome non e' registrato (elenca quelli disponibili)
    """
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise ValueError(
            f"Unknown test function '{name}'. Available: {', '.join(sorted(TEST_FUNCTIONS))}"
        ) from None


def mellin(testfn: TestFunction, u: complex) -> complex:
    """
    Trasformata di Mellin in forma chiusa.

    Raises:
        MellinStrip: Se Re(u) e' fuori dalla striscia
    """
    u = complex(u)
    if not testfn.in_strip(u.real):
        raise MellinStrip(
            f"Re(u)={u.real:g} outside strip {testfn.mellin_strip} of {testfn.name}",
            u=u.real, function=testfn.name
        )
    return complex(testfn.mellin_closed(u))


def mellin_quadrature(testfn: TestFunction, u: complex) -> complex:
    """Oracolo: integrale diretto di x^(u-1) phi(x) sul supporto effettivo."""
    u = complex(u)
    hi = testfn.support[1]

    def part(fn):
        value, _ = quad(fn, 0.0, hi, limit=400, epsabs=0.0, epsrel=1e-12)
        return value

    def integrand(x):
        return x ** (u - 1) * float(testfn.evaluate(x))

    real = part(lambda x: integrand(x).real if x > 0 else 0.0)
    imag = part(lambda x: integrand(x).imag if x > 0 else 0.0)
    return complex(real, imag)


# ===== INTEGRALI SU RETTE VERTICALI =====

@dataclass(frozen=True, kw_only=True)
class ContourSpec:
    """Retta Re(u) = xi campionata in xi + i k h, |k h| <= T."""
    xi: float
    T: float
    h: float
    tail_estimate: float = 0.0

    def __post_init__(self):
        if self.T <= 0 or self.h <= 0:
            raise ValueError(f"contour needs T > 0 and h > 0 (T={self.T}, h={self.h})")

    def nodes(self) -> np.ndarray:
        k = int(math.ceil(self.T / self.h))
        return self.xi + 1j * self.h * np.arange(-k, k + 1)

    def to_dict(self) -> Dict[str, float]:
        return {"xi": self.xi, "T": self.T, "h": self.h, "tail_estimate": self.tail_estimate}


def vertical_line_integral(f: Callable[[np.ndarray], np.ndarray], spec: ContourSpec,
                           edge_tol: float = 1e-10) -> complex:
    """
    (1/2 pi i) int_{xi-iT}^{xi+iT} f(u) du per trapezi (somma * h / 2 pi).

    Args:
        f: Integrando vettoriale sui nodi complessi
        spec: Contorno
        edge_tol: Soglia relativa sui campioni estremi

    Raises:
        ContourTail: Se l'integrando non e' decaduto agli estremi
    """
    values = np.asarray(f(spec.nodes()), dtype=np.complex128)
    if not np.all(np.isfinite(values)):
        raise ContourTail("non-finite integrand sample on the contour", xi=spec.xi)
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    edge = max(abs(values[0]), abs(values[-1]))
    if peak > 0.0 and edge > edge_tol * peak:
        raise ContourTail(
            f"integrand not decayed at |Im u|={spec.T:g}: edge/peak={edge / peak:.2e}",
            xi=spec.xi, T=spec.T
        )
    return complex(values.sum() * spec.h / (2.0 * math.pi))


def choose_contour(f: Callable[[np.ndarray], np.ndarray], xi: float, distance: float,
                   target: float = 1e-12, spread: float = 0.0,
                   t_step: float = 1.0, t_max: float = 2000.0) -> ContourSpec:
    """
    Sceglie T dalla decrescita di |f| e h dalla distanza dalla singolarita' piu' vicina.

    Args:
        f: Integrando vettoriale
        xi: Ascissa del contorno
        distance: Distanza di xi dalla singolarita' piu' vicina
        target: Soglia relativa di troncamento
        spread: Crescita di log|f| attraverso la striscia (es. d*|log(x/2)|)

    Raises:
        NoAdmissibleContour: Se |f| non decade entro t_max
    """
    if distance <= 0:
        raise NoAdmissibleContour(f"contour at xi={xi} touches a singularity", xi=xi)

    t = np.arange(0.0, t_max + t_step, t_step)
    magnitude = np.maximum(np.abs(f(xi + 1j * t)), np.abs(f(xi - 1j * t)))
    peak = float(np.max(magnitude))
    if not math.isfinite(peak) or peak == 0.0:
        raise NoAdmissibleContour(f"integrand is degenerate on Re(u)={xi}", xi=xi)

    # primo indice da cui in poi |f| resta sotto soglia
    suffix_max = np.maximum.accumulate(magnitude[::-1])[::-1]
    settled = np.nonzero(suffix_max < target * 1e-2 * peak)[0]
    if settled.size == 0:
        raise NoAdmissibleContour(f"integrand does not decay on Re(u)={xi} up to T={t_max:g}", xi=xi)
    idx = max(int(settled[0]), 2)
    T = float(t[idx])

    ratio = magnitude[idx - 1] / max(magnitude[idx], 1e-300)
    rate = max(math.log(ratio) / t_step, 1e-3) if ratio > 1.0 else 1e-3
    tail = 2.0 * float(magnitude[idx]) / rate / (2.0 * math.pi)

    # la striscia usata per il passo resta all'interno della distanza dal polo
    reach = 0.8 * distance
    h = min(0.5, 2.0 * math.pi * reach / (math.log(1.0 / target) + 8.0 + spread))
    return ContourSpec(xi=xi, T=T, h=h, tail_estimate=tail)
