"""
Engine - Somme di somme di Kloosterman e verifica delle identita'.

Ogni aggregato e' un'istanza della stessa spazzata bilineare

    sum_{m,n} lambda(m) lambda(n) (mn)^-s sum_{c<=C, (c,Z)=1} S(m ubar, n v; c) / (c sqrt r) w(4 pi sqrt(mn t) / (c sqrt r))

  S(p,q;s,w)              -> (u,v,Z,r,t) = (q, p, pq, q, p)
  sum lambda lambda K(m,Pn,N) -> (u,v,Z,r,t) = (N, P, N, N, P)

Le coppie (m,n) sono ordinate per mn; per ogni c la finestra degli argomenti
diventa un intervallo di mn trovato con searchsorted. Gli strati in c sono
sommati in ordine crescente con fsum: il risultato non dipende dal numero di worker.
"""

import cmath
import math
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import gcd
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .arith import divisor_count, divisors, euler_phi, factorize, is_prime, primes_up_to, strip_prime
from .analysis import TestFunction, zeta_restricted, gamma
from .coeffs import HeckeTable, divisor_tau
from .exp_sums import kloosterman_table, kloosterman_cusp_pair, mod_inverse, ramanujan_sum
from .errors import EqualPrimes, OutsideHalfPlane, SeriesDiverges
from .reports import Estimate, VerificationReport, create_report
from .transforms import (
    PhiTransformParams, PhiCache, WeightProfile, get_phi_cache
)
from infrastructure.table_cache import TableCache

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi
RECIPROCITY_SIGMA_MIN = 1.25


# ===== TIPI =====

@dataclass(frozen=True, kw_only=True)
class SpectralPoint:
    s: complex

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))

    @property
    def sigma(self) -> float:
        return self.s.real

    def require_half_plane(self) -> None:
        """
        Raises:
            OutsideHalfPlane: Se Re(s) <= 5/4
        """
        if self.sigma <= RECIPROCITY_SIGMA_MIN:
            raise OutsideHalfPlane(
                f"Re(s)={self.sigma:g} must exceed {RECIPROCITY_SIGMA_MIN}", sigma=self.sigma
            )


@dataclass(frozen=True, kw_only=True)
class TruncationPolicy:
    """
    Tagli della spazzata.

    window: None -> finestra dalla massa di Mellin del peso (mass_tol)
    """
    c_max: int = 300
    mn_cap: int = 100_000
    window: Optional[Tuple[float, float]] = None
    mass_tol: float = 1e-9
    workers: int = 1

    def __post_init__(self):
        if self.c_max < 1 or self.mn_cap < 1:
            raise ValueError("c_max and mn_cap must be positive")
        if self.window is not None:
            lo, hi = self.window
            if not 0 <= lo <= hi:
                raise ValueError(f"invalid argument window {self.window}")

    def doubled(self) -> "TruncationPolicy":
        return replace(self, c_max=2 * self.c_max, mn_cap=2 * self.mn_cap)

    def to_dict(self) -> Dict:
        return {"c_max": self.c_max, "mn_cap": self.mn_cap, "window": self.window,
                "mass_tol": self.mass_tol}


@dataclass(frozen=True, kw_only=True)
class SweepWeight:
    """Peso w(y) della spazzata con il suo intervallo utile e vanishing order in 0."""
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    y_range: Tuple[float, float]
    vanishing_order: int = 12
    _profiles: Dict[float, WeightProfile] = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, y):
        return self.evaluate(y)

    def profile(self, sigma: float) -> WeightProfile:
        key = round(sigma, 12)
        if key not in self._profiles:
            self._profiles[key] = WeightProfile(self.name, self.evaluate, *self.y_range, sigma)
        return self._profiles[key]

    def window(self, sigma: float, mass_tol: float) -> Tuple[float, float]:
        return self.profile(sigma).window(mass_tol)


def weight_from_test_function(testfn: TestFunction) -> SweepWeight:
    lo, hi = testfn.support
    return SweepWeight(name=testfn.name, evaluate=testfn.evaluate, y_range=(lo * 1e-2, hi),
                       vanishing_order=testfn.vanishing_order)


def weight_from_phi_cache(cache: PhiCache) -> SweepWeight:
    return SweepWeight(name=f"Phi[{cache.params.testfn.name}, s={cache.params.s}]",
                       evaluate=cache, y_range=(cache.x_min, cache.x_max),
                       vanishing_order=12)


def combine_weights(first: SweepWeight, second: SweepWeight, alpha: complex, beta: complex) -> SweepWeight:
    """alpha w1 + beta w2 sull'unione degli intervalli."""
    def evaluate(y):
        return alpha * np.asarray(first(y), dtype=np.complex128) + beta * np.asarray(second(y), dtype=np.complex128)
    lo = min(first.y_range[0], second.y_range[0])
    hi = max(first.y_range[1], second.y_range[1])
    return SweepWeight(name=f"{alpha}*{first.name}+{beta}*{second.name}", evaluate=evaluate,
                       y_range=(lo, hi), vanishing_order=min(first.vanishing_order, second.vanishing_order))


# ===== TABELLA DELLE COPPIE =====

class PairTable:
    """Coppie (m, n) con mn <= cap ordinate per mn, con pesi lambda(m) m^-s lambda(n) n^-s."""

    def __init__(self, table: HeckeTable, cap: int, s: complex):
        if cap > table.n_max:
            raise ValueError(f"mn_cap={cap} exceeds HeckeTable n_max={table.n_max}")
        first = np.arange(1, cap + 1, dtype=np.int64)
        counts = cap // first
        m = np.repeat(first, counts)
        offsets = np.repeat(np.cumsum(counts) - counts, counts)
        n = np.arange(m.size, dtype=np.int64) - offsets + 1
        N = m * n
        order = np.argsort(N, kind="stable")
        self.m = m[order]
        self.n = n[order]
        self.N = N[order]
        k = np.arange(cap + 1, dtype=np.float64)
        k[0] = 1.0
        twisted = table.lam[:cap + 1] * np.exp(-complex(s) * np.log(k))
        self.W = twisted[self.m] * twisted[self.n]
        self.cap = cap
        logger.debug(f"📋 PairTable: {self.N.size} pairs with mn <= {cap}")

    @property
    def nbytes(self) -> int:
        return int(self.m.nbytes + self.n.nbytes + self.N.nbytes + self.W.nbytes)

    def slice_for(self, lo: float, hi: float) -> slice:
        i0 = int(np.searchsorted(self.N, lo, side="left"))
        i1 = int(np.searchsorted(self.N, hi, side="right"))
        return slice(i0, max(i0, i1))


def get_pair_table(table: HeckeTable, cap: int, s: complex) -> PairTable:
    s = complex(s)
    key = ("pairs", table.n_max, cap, s.real, s.imag)
    return TableCache.get_instance().get_or_build(key, lambda: PairTable(table, cap, s))


# ===== SPAZZATA BILINEARE =====

@dataclass(frozen=True, kw_only=True)
class SweepShape:
    """(u, v, Z, r, t) della spazzata."""
    u: int
    v: int
    Z: int
    r: int
    t: int

    @property
    def scale(self) -> float:
        return FOUR_PI * math.sqrt(self.t / self.r)


def _c_tail(strata: np.ndarray, cs: np.ndarray, sigma: float, Z: int, C: int) -> float:
    """Inviluppo a segni casuali K (sum_{c>C} c^(1-4 sigma))^(1/2), K stimato su c in (C/2, C]."""
    fit = cs > C / 2
    if not np.any(fit):
        return 0.0
    k_sq = float(np.mean(np.abs(strata[fit]) ** 2 * cs[fit].astype(np.float64) ** (4 * sigma - 1)))
    density = euler_phi(Z) / Z
    return 2.0 * math.sqrt(k_sq * density * C ** (2 - 4 * sigma) / (4 * sigma - 2))


def _stratum_variance(c: int, shape: SweepShape, sigma: float, profile: WeightProfile,
                      lo: float, hi: float) -> float:
    """
    Varianza a segni casuali dello strato c ristretto agli argomenti y in [lo, hi]:
    (2 / (c r)) (c/a)^(2-4 sigma) int |w|^2 y^(1-4 sigma) dy, con |S|^2 ~ c in media.
    """
    lo = max(lo, shape.scale / c)
    mass = profile.square_mass(lo, hi)
    if mass <= 0:
        return 0.0
    return 2.0 / (c * shape.r) * (c / shape.scale) ** (2 - 4 * sigma) * mass


def bilinear_sweep(shape: SweepShape, s: complex, weight: SweepWeight, policy: TruncationPolicy,
                   table: HeckeTable, label: str = "sweep") -> Estimate:
    """
    Somma troncata con budget (c_tail, window, mn_cap, halving).

    La finestra degli argomenti viene dalla massa di Mellin del peso se la
    policy non la fissa. `halving` e' la differenza misurata con i tagli
    dimezzati (c <= C/2, mn <= cap/2), ottenuta dagli stessi strati; le altre
    componenti sono il modello a segni casuali tarato sugli strati c in (C/2, C].
    Il budget e' il maggiore fra la misura e il modello.
    """
    s = complex(s)
    sigma = s.real
    pairs = get_pair_table(table, policy.mn_cap, s)
    profile = weight.profile(sigma)
    window = policy.window if policy.window is not None else profile.window(policy.mass_tol)
    a = shape.scale
    x_lo, x_hi = window
    root_r = math.sqrt(shape.r)
    half_cap = pairs.cap // 2
    cs = np.array([c for c in range(1, policy.c_max + 1) if gcd(c, shape.Z) == 1], dtype=np.int64)

    def stratum(c: int) -> Tuple[complex, complex]:
        """(strato completo, strato con mn <= cap/2)."""
        c = int(c)
        lo = (x_lo * c / a) ** 2
        hi = min((x_hi * c / a) ** 2, float(pairs.cap))
        part = pairs.slice_for(lo, hi)
        if part.stop <= part.start:
            return 0j, 0j
        m, n, N, W = pairs.m[part], pairs.n[part], pairs.N[part], pairs.W[part]
        kt = kloosterman_table(c)
        u_bar = mod_inverse(shape.u, c)
        sums = kt[(m * u_bar) % c, (n * shape.v) % c]
        values = W * sums * weight(a * np.sqrt(N) / c)
        k = int(np.searchsorted(N, half_cap, side="right"))
        norm = c * root_r
        return complex(np.sum(values)) / norm, complex(np.sum(values[:k])) / norm

    started = time.perf_counter()
    if policy.workers > 1:
        with ThreadPoolExecutor(max_workers=policy.workers) as pool:
            results = list(pool.map(stratum, cs.tolist()))
    else:
        results = [stratum(c) for c in cs.tolist()]
    strata_arr = np.array([full for full, _ in results], dtype=np.complex128)
    halves = np.array([half for _, half in results], dtype=np.complex128)[cs <= policy.c_max // 2]
    value = complex(math.fsum(strata_arr.real), math.fsum(strata_arr.imag))
    half_value = complex(math.fsum(halves.real), math.fsum(halves.imag))

    in_window = np.array([
        _stratum_variance(c, shape, sigma, profile, x_lo, min(x_hi, a * math.sqrt(pairs.cap) / c))
        for c in cs.tolist()
    ])
    fit = (cs > policy.c_max / 2) & (in_window > 0)
    calibration = float(np.mean(np.abs(strata_arr[fit]) ** 2 / in_window[fit])) if np.any(fit) else 1.0
    window_var = 0.0
    cap_var = 0.0
    for c in cs.tolist():
        window_var += (_stratum_variance(c, shape, sigma, profile, 0.0, x_lo)
                       + _stratum_variance(c, shape, sigma, profile, x_hi, math.inf))
        cap_var += _stratum_variance(c, shape, sigma, profile, max(x_lo, a * math.sqrt(pairs.cap) / c), x_hi)
    components = {
        "c_tail": _c_tail(strata_arr, cs, sigma, shape.Z, policy.c_max),
        "window": 2.0 * math.sqrt(calibration * window_var),
        "mn_cap": 2.0 * math.sqrt(calibration * cap_var),
        "halving": abs(value - half_value),
    }
    modelled = components["c_tail"] + components["window"] + components["mn_cap"]
    budget = max(components["halving"], modelled)

    elapsed = (time.perf_counter() - started) * 1000.0
    logger.debug(f"🧮 {label}: {len(cs)} strata, value={value:.6g}, budget={budget:.2e} ({elapsed:.0f} ms)")
    return Estimate(
        value=value, budget=budget, components=components,
        provenance={"shape": (shape.u, shape.v, shape.Z, shape.r, shape.t), "window": window,
                    "c_max": policy.c_max, "mn_cap": policy.mn_cap, "weight": weight.name},
    )


# ===== AGGREGATI =====

def _check_primes(p: int, q: int) -> None:
    if p == q:
        raise EqualPrimes(f"p and q must be distinct, got p=q={p}", p=p)
    for name, value in (("p", p), ("q", q)):
        if not is_prime(value):
            raise ValueError(f"{name}={value} is not prime")


def s_sum(p: int, q: int, s: complex, weight: SweepWeight, policy: TruncationPolicy,
          table: HeckeTable) -> Estimate:
    """
    S(p,q;s,w) troncata con budget.

    Raises:
        EqualPrimes: Se p = q
        OutsideHalfPlane: Se Re(s) <= 5/4
    """
    _check_primes(p, q)
    SpectralPoint(s=s).require_half_plane()
    shape = SweepShape(u=q, v=p, Z=p * q, r=q, t=p)
    return bilinear_sweep(shape, s, weight, policy, table, label=f"S({p},{q})")


def k_sum(m: int, n: int, N: int, weight: SweepWeight, policy: TruncationPolicy,
          sigma_hint: float = 1.5) -> Estimate:
    """
    K(m,n,N;w) = sum_{(c,N)=1} S(Nbar m, n; c) / (c sqrt N) w(4 pi sqrt(mn) / (c sqrt N)).

    Budget: Weil su c in (C, 8C] piu' un resto integrale che usa l'ordine di annullamento di w in 0.
    """
    if min(m, n, N) < 1:
        raise ValueError("m, n, N must be positive")
    X = FOUR_PI * math.sqrt(m * n / N)
    root_n = math.sqrt(N)
    lo, hi = policy.window if policy.window is not None else (0.0, math.inf)

    terms_re: List[float] = []
    terms_im: List[float] = []
    budget_window = 0.0
    for c in range(1, policy.c_max + 1):
        if gcd(c, N) != 1:
            continue
        x = X / c
        weil = divisor_count(c) * math.sqrt(gcd(gcd(m, n), c)) * math.sqrt(c) / (c * root_n)
        w = complex(np.asarray(weight(np.array([x])))[0])
        if not lo <= x <= hi:
            budget_window += weil * abs(w)
            continue
        term = kloosterman_cusp_pair(m, n, c, N) / (c * root_n) * w
        terms_re.append(term.real)
        terms_im.append(term.imag)
    value = complex(math.fsum(terms_re), math.fsum(terms_im))

    C = policy.c_max
    tail = 0.0
    for c in range(C + 1, 8 * C + 1):
        if gcd(c, N) == 1:
            w = abs(complex(np.asarray(weight(np.array([X / c])))[0]))
            tail += divisor_count(c) * math.sqrt(gcd(gcd(m, n), c)) / math.sqrt(c) / root_n * w
    edge = abs(complex(np.asarray(weight(np.array([X / (8 * C)])))[0]))
    J = weight.vanishing_order + 1
    remainder = edge / root_n * math.log(8 * C + 1) * 2.0 * math.sqrt(8 * C) / (J - 0.5)
    components = {"c_tail": tail + remainder, "window": budget_window}
    return Estimate(value=value, budget=sum(components.values()), components=components,
                    provenance={"m": m, "n": n, "N": N, "c_max": C})


def hecke_weighted_k_sum(P: int, N: int, s: complex, weight: SweepWeight, policy: TruncationPolicy,
                         table: HeckeTable) -> Estimate:
    """sum_{m,n} lambda(m) lambda(n) (mn)^-s K(m, P n, N; w)."""
    shape = SweepShape(u=N, v=P, Z=N, r=N, t=P)
    return bilinear_sweep(shape, s, weight, policy, table, label=f"K(m,{P}n,{N})")


def moment_proxy(p_twist: int, N: int, s: complex, weight: SweepWeight, policy: TruncationPolicy,
                 table: HeckeTable) -> Estimate:
    """zeta_N(2s)^2 sum lambda lambda (mn)^-s K(m, p_twist n, N; w)."""
    SpectralPoint(s=s).require_half_plane()
    zeta_sq = zeta_restricted(2 * complex(s), N) ** 2
    return hecke_weighted_k_sum(p_twist, N, s, weight, policy, table).scaled(zeta_sq)


# ===== CATENA DEI MOMENTI (setaccio e Ng-S) =====

@dataclass(frozen=True, kw_only=True)
class MomentChain:
    """
    I quattro aggregati del setaccio, calcolati una volta.

    S = S(p,q), R = sum lambda lambda K(m,pn,q), B_q = sum lambda lambda K(m,n,q),
    B_pq = sum lambda lambda K(m,n,pq).
    """
    p: int
    q: int
    s: complex
    lam_p: float
    S: Estimate
    R: Estimate
    B_q: Estimate
    B_pq: Estimate

    def _power(self, exponent: complex) -> complex:
        return cmath.exp(exponent * math.log(self.p))

    def sieve_sides(self) -> Tuple[complex, complex, float]:
        """(1+p^-2s) R  contro  S - p^-1/2 B(pq) + lambda(p) p^-s B(q)."""
        p_2s = self._power(-2 * self.s)
        p_s = self._power(-self.s)
        lhs = (1 + p_2s) * self.R.value
        rhs = self.S.value - self.B_pq.value / math.sqrt(self.p) + self.lam_p * p_s * self.B_q.value
        budget = (abs(1 + p_2s) * self.R.budget + self.S.budget + self.B_pq.budget / math.sqrt(self.p)
                  + abs(self.lam_p * p_s) * self.B_q.budget)
        return lhs, rhs, budget

    def ngs_sides(self) -> Tuple[complex, complex, float]:
        """N(p,q) dalla combinazione lambda(p) p^-s N(1,q) + (1-p^-2s) zeta_q^2 R contro il lato Ng-S."""
        s, p = self.s, self.p
        z_q = zeta_restricted(2 * s, self.q) ** 2
        z_pq = zeta_restricted(2 * s, p * self.q) ** 2
        p_s = self._power(-s)
        p_2s = self._power(-2 * s)
        p_4s = self._power(-4 * s)
        n1q = z_q * self.B_q.value
        n1pq = z_pq * self.B_pq.value
        lhs = self.lam_p * p_s * n1q + (1 - p_2s) * z_q * self.R.value
        rhs = (2 * self.lam_p * p_s / (1 + p_2s) * n1q
               - n1pq / (math.sqrt(p) * (1 - p_4s))
               + z_pq * self.S.value / (1 - p_4s))
        budget = (abs(self.lam_p * p_s * z_q) * self.B_q.budget + abs((1 - p_2s) * z_q) * self.R.budget
                  + abs(2 * self.lam_p * p_s / (1 + p_2s) * z_q) * self.B_q.budget
                  + abs(z_pq / (math.sqrt(p) * (1 - p_4s))) * self.B_pq.budget
                  + abs(z_pq / (1 - p_4s)) * self.S.budget)
        return lhs, rhs, budget

    def residual_ratio(self) -> complex:
        """residuo(Ng-S) = zeta_q(2s)^2 (1-p^-2s)/(1+p^-2s) residuo(setaccio)."""
        p_2s = self._power(-2 * self.s)
        return zeta_restricted(2 * self.s, self.q) ** 2 * (1 - p_2s) / (1 + p_2s)


def moment_chain(p: int, q: int, s: complex, weight: SweepWeight, policy: TruncationPolicy,
                 table: HeckeTable) -> MomentChain:
    _check_primes(p, q)
    SpectralPoint(s=s).require_half_plane()
    s = complex(s)
    logger.info(f"🧮 Moment chain p={p}, q={q}, s={s}")
    return MomentChain(
        p=p, q=q, s=s, lam_p=table.lambda_of(p),
        S=s_sum(p, q, s, weight, policy, table),
        R=hecke_weighted_k_sum(p, q, s, weight, policy, table),
        B_q=hecke_weighted_k_sum(1, q, s, weight, policy, table),
        B_pq=hecke_weighted_k_sum(1, p * q, s, weight, policy, table),
    )


def _chain_params(chain: MomentChain, policy: TruncationPolicy, weight: SweepWeight) -> Dict:
    return {"p": chain.p, "q": chain.q, "s": str(chain.s), "weight": weight.name, **policy.to_dict()}


def verify_sieve(p: int, q: int, s: complex, weight: SweepWeight, policy: TruncationPolicy,
                 table: HeckeTable, rel_tol: float = 1e-3, chain: Optional[MomentChain] = None) -> VerificationReport:
    started = time.perf_counter()
    chain = chain or moment_chain(p, q, s, weight, policy, table)
    lhs, rhs, budget = chain.sieve_sides()
    return create_report(
        "sieve", lhs, rhs, budget, rel_tol,
        params=_chain_params(chain, policy, weight),
        notes=[f"components S={chain.S.components}", f"R={chain.R.components}"],
        started=started,
    )


def verify_ng_s(p: int, q: int, s: complex, weight: SweepWeight, policy: TruncationPolicy,
                table: HeckeTable, rel_tol: float = 1e-3, chain: Optional[MomentChain] = None) -> VerificationReport:
    started = time.perf_counter()
    chain = chain or moment_chain(p, q, s, weight, policy, table)
    lhs, rhs, budget = chain.ngs_sides()
    sieve_lhs, sieve_rhs, _ = chain.sieve_sides()
    predicted = chain.residual_ratio() * (sieve_lhs - sieve_rhs)
    return create_report(
        "ng-s", lhs, rhs, budget, rel_tol,
        params=_chain_params(chain, policy, weight),
        notes=[f"residual relation gap {abs((lhs - rhs) - predicted):.3e}"],
        started=started,
    )


# ===== RECIPROCITA' =====

def reciprocity_factor(p: int, q: int, s: complex, sabotage: bool = False) -> complex:
    """(p/q)^(2s-1) sqrt(p/q); con sabotage l'esponente diventa 2s."""
    exponent = 2 * complex(s) + (0.5 if sabotage else -0.5)
    return cmath.exp(exponent * math.log(p / q))


def verify_reciprocity(p: int, q: int, s: complex, testfn: TestFunction, policy: TruncationPolicy,
                       table: HeckeTable, rel_tol: float = 1e-3, sabotage: bool = False,
                       phi_grid: Optional[Dict] = None, validate_samples: int = 20) -> VerificationReport:
    """
    S(p,q;s,phi) contro (p/q)^(2s-1) sqrt(p/q) S(q,p;s,Phi).

    Il lato sinistro somma phi, il destro somma Phi interpolato dalla PhiCache.
    """
    started = time.perf_counter()
    _check_primes(p, q)
    SpectralPoint(s=s).require_half_plane()
    s = complex(s)

    lhs = s_sum(p, q, s, weight_from_test_function(testfn), policy, table)

    params = PhiTransformParams(testfn=testfn, weight=table.weight, s=s)
    grid = phi_grid or {}
    cache = get_phi_cache(params, **grid)
    validation = cache.validate(samples=validate_samples)
    dual = s_sum(q, p, s, weight_from_phi_cache(cache), policy, table)
    rhs = dual.scaled(reciprocity_factor(p, q, s, sabotage))
    interpolation = abs(rhs.value) * validation.max_error / max(validation.scale, 1e-300)

    notes = [
        f"lhs components {lhs.components}",
        f"rhs components {rhs.components}",
        f"Phi cache max interpolation error {validation.max_error:.2e} (scale {validation.scale:.2e})",
        f"operative Phi decay exponent {4 * s.real - 2 + params.contours['large']:g}",
    ]
    if sabotage:
        notes.append("sabotage: exponent 2s instead of 2s-1")
    return create_report(
        "reciprocity", lhs.value, rhs.value, lhs.budget + rhs.budget + interpolation, rel_tol,
        params={"p": p, "q": q, "s": str(s), "function": testfn.name, "sabotage": sabotage,
                **policy.to_dict()},
        contours={"xi": params.contours, "ladder_step": params.step,
                  "lhs_window": lhs.provenance["window"], "rhs_window": dual.provenance["window"]},
        notes=notes, started=started,
    )


def verify_linearity(p: int, q: int, s: complex, first: SweepWeight, second: SweepWeight,
                     alpha: complex, beta: complex, policy: TruncationPolicy, table: HeckeTable,
                     rel_tol: float = 1e-10) -> VerificationReport:
    """s_sum(alpha w1 + beta w2) contro alpha s_sum(w1) + beta s_sum(w2), stessa finestra."""
    started = time.perf_counter()
    sigma = complex(s).real
    w1 = first.window(sigma, policy.mass_tol)
    w2 = second.window(sigma, policy.mass_tol)
    fixed = replace(policy, window=(min(w1[0], w2[0]), max(w1[1], w2[1])))
    combined = combine_weights(first, second, alpha, beta)
    lhs = s_sum(p, q, s, combined, fixed, table).value
    rhs = alpha * s_sum(p, q, s, first, fixed, table).value + beta * s_sum(p, q, s, second, fixed, table).value
    return create_report("linearity", lhs, rhs, 0.0, rel_tol,
                         params={"p": p, "q": q, "s": str(s), "alpha": str(alpha), "beta": str(beta)},
                         started=started)


# ===== LEMMA SULLE SERIE DI DIRICHLET =====

def verify_dirichlet_lemma(p: int, s: complex, M: int, table: HeckeTable, rel_tol: float = 1e-8) -> VerificationReport:
    """
    lambda(p) sum lambda(n)^2 n^-s  contro  lambda(p) p^-s sum lambda(n)^2 n^-s + (1-p^-2s) sum lambda(n) lambda(np) n^-s.

    Con il troncamento n <= M le due parti differiscono esattamente per i termini di bordo
    lambda(p) p^-s sum_{M/p<n<=M} e p^-2s sum_{M/p^2<n<=M}: sono il budget, piu' la coda di Deligne.
    """
    started = time.perf_counter()
    s = complex(s)
    if p * M > table.n_max:
        raise ValueError(f"p*M={p * M} exceeds HeckeTable n_max={table.n_max}")
    n = np.arange(1, M + 1, dtype=np.int64)
    powers = np.exp(-s * np.log(n))
    lam = table.lam
    lam_p = table.lambda_of(p)
    square = lam[n] ** 2 * powers
    shifted = lam[n] * lam[n * p] * powers

    def fsum_c(values: np.ndarray) -> complex:
        return complex(math.fsum(values.real), math.fsum(values.imag))

    total_square = fsum_c(square)
    total_shifted = fsum_c(shifted)
    p_s = cmath.exp(-s * math.log(p))
    lhs = lam_p * total_square
    rhs = lam_p * p_s * total_square + (1 - p_s * p_s) * total_shifted

    boundary = (abs(lam_p * p_s * fsum_c(square[M // p:]))
                + abs(p_s * p_s * fsum_c(shifted[M // (p * p):])))
    sigma = s.real
    d = sigma - 1.0
    square_tail = M ** (-d) * (math.log(M) + 3.0 / d) ** 3 / (d * math.pi ** 2) if d > 0 else math.inf
    coefficient = abs(lam_p) * (1 + abs(p_s)) + 2.0 * abs(1 - p_s * p_s)
    budget = boundary + coefficient * square_tail
    return create_report(
        "dirichlet-lemma", lhs, rhs, budget, rel_tol,
        params={"p": p, "s": str(s), "M": M},
        notes=[f"boundary terms {boundary:.3e}", f"Deligne tail {coefficient * square_tail:.3e}"],
        started=started,
    )


# ===== SERIE DI RAMANUJAN / COEFFICIENTI DI EISENSTEIN =====

def ramanujan_dirichlet_series(n: int, q: int, u: complex, C: int) -> Estimate:
    """
    sum_{c<=C, (c,q)=1} c_c(n) c^-2u con coda |c_c(n)| <= sigma(n).

    Raises:
        SeriesDiverges: Se Re(u) <= 1
    """
    u = complex(u)
    if u.real <= 1.0:
        raise SeriesDiverges(f"Ramanujan series needs Re(u) > 1, got {u.real:g}", u=u.real)
    terms_re: List[float] = []
    terms_im: List[float] = []
    for c in range(1, C + 1):
        if gcd(c, q) != 1:
            continue
        value = ramanujan_sum(n, c)
        if value:
            term = value * cmath.exp(-2 * u * math.log(c))
            terms_re.append(term.real)
            terms_im.append(term.imag)
    sigma_n = 1
    for p, e in factorize(n):
        sigma_n *= (p ** (e + 1) - 1) // (p - 1)
    tail = sigma_n * C ** (1 - 2 * u.real) / (2 * u.real - 1)
    return Estimate(value=complex(math.fsum(terms_re), math.fsum(terms_im)), budget=tail,
                    components={"c_tail": tail}, provenance={"C": C})


def ramanujan_euler_product(n: int, q: int, u: complex, C: int) -> complex:
    """Oracolo: prod_{l<=C primo, l != q} sum_k c_{l^k}(n) l^-2uk (somme locali finite)."""
    u = complex(u)
    product = 1 + 0j
    for ell in primes_up_to(C).tolist():
        if ell == q:
            continue
        local = 1 + 0j
        k = 1
        while True:
            value = ramanujan_sum(n, ell ** k)
            if value == 0:
                break
            local += value * cmath.exp(-2 * u * k * math.log(ell))
            k += 1
        product *= local
    return product


def eisenstein_closed_form(n: int, q: int, u: complex) -> complex:
    """sigma_(1-2u)(n') / zeta_q(2u), n' parte di n coprima con q."""
    u = complex(u)
    n_free = strip_prime(n, q)
    sigma = sum(cmath.exp((1 - 2 * u) * math.log(d)) for d in divisors(n_free))
    return sigma / zeta_restricted(2 * u, q)


def eisenstein_coefficient(n: int, u: complex, q: int) -> complex:
    """2 pi^u tau^(q)_(u-1/2)(n) / (Gamma(u) zeta_q(2u)), riportato nelle note."""
    u = complex(u)
    return (2 * cmath.exp(u * math.log(math.pi)) * divisor_tau(u - 0.5, n, q)
            / (gamma(u) * zeta_restricted(2 * u, q)))


def verify_ramanujan(n: int, q: int, u: complex, C: int, rel_tol: float = 1e-8) -> VerificationReport:
    """Serie troncata contro il prodotto di Eulero; forma chiusa e coefficiente nelle note."""
    started = time.perf_counter()
    series = ramanujan_dirichlet_series(n, q, u, C)
    oracle = ramanujan_euler_product(n, q, u, C)
    closed = eisenstein_closed_form(n, q, u)
    primes_tail = sum(float(ell) ** (-2 * complex(u).real) for ell in range(C + 1, 40 * C + 1))
    budget = series.budget + abs(oracle) * primes_tail
    return create_report(
        "ramanujan", series.value, oracle, budget, rel_tol,
        params={"n": n, "q": q, "u": str(u), "C": C},
        notes=[f"closed form sigma_(1-2u)(n')/zeta_q(2u) = {closed:.12g}",
               f"Eisenstein coefficient (normalization not asserted) = {eisenstein_coefficient(n, u, q):.12g}"],
        started=started,
    )
