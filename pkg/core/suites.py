"""
Suites - Registry delle suite di verifica.

Ogni suite e' una funzione (SuiteContext) -> List[VerificationReport] con un
rango di dipendenza: le primitive (rango 0) girano prima delle identita'
composte che le usano.
"""

import math
import cmath
import logging
import time
from dataclasses import dataclass, field
from math import gcd
from typing import TYPE_CHECKING, Callable, Dict, List, Optional

import numpy as np
from scipy import special

from .analysis import choose_contour, gamma, get_test_function, mellin, mellin_quadrature, vertical_line_integral
from .coeffs import (
    HeckeTable, build_hecke_table, deligne_ratio, tau_oracle, verify_divisor_hecke,
    verify_hecke, verify_tau_recurrence,
)
from .engine import (
    TruncationPolicy, moment_chain, verify_dirichlet_lemma, verify_ng_s, verify_ramanujan,
    verify_reciprocity, verify_sieve, weight_from_test_function,
)
from .exp_sums import check_crt_multiplicativity, check_kloo_lemma, kloosterman_many, weil_bound, INAPPLICABLE
from .lfun import AdditiveTwist, DgParams, dg, dg_brute_force, dg_fe_sides, l_additive_continued, l_additive_direct, l_fe_sides
from .reports import VerificationReport, create_report, parse_complex
from .transforms import (
    PhiKernel, PhiTransformParams, certify_admissible, phi_h, phi_h_gauss13_closed, phi_plus_combination,
)

if TYPE_CHECKING:
    from config.config_loader import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class SuiteContext:
    """Config validata piu' la HeckeTable condivisa, costruita alla prima richiesta."""
    config: "RunConfig"
    _table: Optional[HeckeTable] = field(default=None, repr=False)
    _chains: Dict = field(default_factory=dict, repr=False)

    @property
    def table(self) -> HeckeTable:
        if self._table is None:
            self._table = build_hecke_table(self.config.weight, self.config.n_max)
        return self._table

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(c_max=self.config.c_max, mn_cap=self.config.mn_cap,
                                mass_tol=self.config.window_mass_tol, workers=self.config.workers)

    def options(self, suite: str, **defaults) -> Dict:
        merged = dict(defaults)
        merged.update(self.config.options(suite))
        return merged


@dataclass(frozen=True, kw_only=True)
class Suite:
    name: str
    rank: int
    runner: Callable[[SuiteContext], List[VerificationReport]] = field(repr=False)
    description: str = ""


SUITES: Dict[str, Suite] = {}


def suite(name: str, rank: int, description: str = ""):
    """Decoratore di registrazione."""
    def register(fn: Callable[[SuiteContext], List[VerificationReport]]):
        SUITES[name] = Suite(name=name, rank=rank, runner=fn, description=description)
        return fn
    return register


def schedule(names) -> List[Suite]:
    """Suite richieste in ordine di rango ("all" le espande tutte), senza duplicati."""
    wanted = list(SUITES) if "all" in names else list(dict.fromkeys(names))
    unknown = [n for n in wanted if n not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suites {unknown}. Available: {', '.join(SUITES)}")
    order = {name: i for i, name in enumerate(SUITES)}
    return sorted((SUITES[n] for n in wanted), key=lambda s: (s.rank, order[s.name]))


def _exact(identity: str, lhs: complex, rhs: complex, abs_tol: float, params: Dict,
           started: float, notes: Optional[List[str]] = None) -> VerificationReport:
    """Identita' esatta in floating point: il budget e' la tolleranza di arrotondamento."""
    return create_report(identity, lhs, rhs, budget=abs_tol / 3.0, rel_tol=0.0,
                         params=params, notes=notes, started=started)


# ===== PRIMITIVE =====

@suite("kloo-lemmas", rank=0, description="three Kloosterman manipulation clauses")
def run_kloo_lemmas(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("kloo-lemmas", primes=[2, 3, 5], c_max=60, m_range=6, tol=1e-9)
    span = range(-opts["m_range"], opts["m_range"] + 1)
    reports = []
    for p in opts["primes"]:
        started = time.perf_counter()
        worst = {}
        applied = {1: 0, 2: 0, 3: 0}
        for c in range(1, opts["c_max"] + 1):
            for m in span:
                for n in span:
                    for clause, check in enumerate(check_kloo_lemma(m, n, c, p), start=1):
                        if check is INAPPLICABLE:
                            continue
                        applied[clause] += 1
                        if clause not in worst or check.gap > worst[clause].gap:
                            worst[clause] = check
        for clause, check in sorted(worst.items()):
            reports.append(_exact(
                f"kloo-lemmas/{check.clause.name.lower()}", check.lhs, check.rhs,
                opts["tol"] * max(1.0, abs(check.lhs)),
                {"p": p, "c_max": opts["c_max"], "m_range": opts["m_range"], "cases": applied[clause]},
                started,
            ))
    return reports


@suite("weil", rank=0, description="Weil bound per modulus")
def run_weil(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("weil", c_max=500, samples=200, m_max=1000, seed=1, slack=1e-6)
    started = time.perf_counter()
    rng = np.random.default_rng(opts["seed"])
    m = rng.integers(1, opts["m_max"] + 1, opts["samples"])
    n = rng.integers(1, opts["m_max"] + 1, opts["samples"])
    excess = 0.0
    where = None
    for c in range(1, opts["c_max"] + 1):
        values = kloosterman_many(m, n, c)
        bounds = np.array([weil_bound(int(a), int(b), c) for a, b in zip(m, n)])
        over = float(np.max(np.abs(values) - bounds))
        if over > excess:
            excess, where = over, c
    notes = [f"worst modulus {where}"] if where is not None else []
    return [_exact("weil", excess, 0.0, opts["slack"],
                   {"c_max": opts["c_max"], "samples": opts["samples"]}, started, notes)]


@suite("crt", rank=0, description="twisted multiplicativity of Kloosterman sums")
def run_crt(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("crt", c_max=60, samples=400, seed=2, tol=1e-9)
    started = time.perf_counter()
    rng = np.random.default_rng(opts["seed"])
    worst = 0.0
    checked = 0
    while checked < opts["samples"]:
        c1, c2 = (int(v) for v in rng.integers(1, opts["c_max"] + 1, 2))
        if gcd(c1, c2) != 1:
            continue
        a, b = (int(v) for v in rng.integers(-500, 501, 2))
        worst = max(worst, check_crt_multiplicativity(a, b, c1, c2))
        checked += 1
    return [_exact("crt", worst, 0.0, opts["tol"] * opts["c_max"],
                   {"c_max": opts["c_max"], "samples": checked}, started)]


@suite("hecke", rank=0, description="exact Hecke relations, p-power recurrence, Deligne bound")
def run_hecke(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("hecke", mn_max=2000, deligne_max=10_000, oracle_max=30)
    table = ctx.table

    started = time.perf_counter()
    limit = min(opts["mn_max"], table.n_max)
    failures = [(m, n) for m in range(1, limit + 1) for n in range(m, limit // m + 1)
                if not verify_hecke(m, n, table, ctx.config.exact_bits)]
    reports = [_exact("hecke", len(failures), 0, 0.0, {"mn_max": limit}, started,
                      [f"first failures {failures[:5]}"] if failures else None)]

    started = time.perf_counter()
    recurrence = verify_tau_recurrence(table)
    reports.append(_exact("hecke/recurrence", len(recurrence.failures), 0, 0.0,
                          {"n_max": table.n_max, "checked": recurrence.checked}, started))

    started = time.perf_counter()
    ratio = deligne_ratio(table, opts["deligne_max"])
    reports.append(_exact("hecke/deligne", max(ratio - 1.0, 0.0), 0.0, 1e-12,
                          {"n_max": min(opts["deligne_max"], table.n_max)}, started,
                          [f"max |lambda(n)|/tau_0(n) = {ratio:.6f}"]))

    started = time.perf_counter()
    oracle = tau_oracle(min(opts["oracle_max"], table.n_max))
    mismatches = sum(1 for k in range(1, len(oracle)) if oracle[k] != table.tau[k])
    reports.append(_exact("hecke/oracle", mismatches, 0, 0.0, {"n_max": len(oracle) - 1}, started))
    return reports


@suite("divisor-hecke", rank=0, description="Hecke relations of tau_w^(q)")
def run_divisor_hecke(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("divisor-hecke", orders=["0.3", "0.25+1i"], levels=[3, 7], mn_max=40, tol=1e-9)
    reports = []
    for raw in opts["orders"]:
        w = parse_complex(raw)
        for q in opts["levels"]:
            started = time.perf_counter()
            worst = max(verify_divisor_hecke(w, m, n, q)
                        for m in range(1, opts["mn_max"] + 1) for n in range(1, opts["mn_max"] // m + 1))
            reports.append(_exact("divisor-hecke", worst, 0.0, opts["tol"] * opts["mn_max"],
                                  {"w": str(w), "q": q, "mn_max": opts["mn_max"]}, started))
    return reports


@suite("gamma", rank=0, description="Gamma reflection and recurrence")
def run_gamma(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("gamma", points=100, seed=3, height=30.0, tol=1e-11)
    rng = np.random.default_rng(opts["seed"])
    height = float(opts["height"])
    grid = rng.uniform(0.05, 0.95, opts["points"]) + 1j * rng.uniform(-height, height, opts["points"])
    reports = []
    for identity, pairs in (
        ("gamma/reflection", [(gamma(z) * gamma(1 - z), math.pi / cmath.sin(math.pi * z)) for z in grid]),
        ("gamma/recurrence", [(gamma(z + 1), z * gamma(z)) for z in grid + 2.0]),
    ):
        started = time.perf_counter()
        lhs, rhs = max(pairs, key=lambda pr: abs(pr[0] - pr[1]) / max(abs(pr[0]), abs(pr[1])))
        reports.append(create_report(identity, lhs, rhs, 0.0, opts["tol"],
                                     params={"points": opts["points"], "height": height}, started=started))
    return reports


@suite("mellin", rank=0, description="Mellin closed forms and the Cahen-Mellin inverse")
def run_mellin(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("mellin", functions=["gauss13", "exp13"], points=["1", "2.5+3i", "-4+1i"],
                       tol=1e-8, cahen_x=[0.5, 1.0, 2.0], cahen_xi=1.5, cahen_tol=1e-9)
    reports = []
    for name in opts["functions"]:
        testfn = get_test_function(name)
        for raw in opts["points"]:
            started = time.perf_counter()
            u = parse_complex(raw)
            reports.append(create_report("mellin", mellin(testfn, u), mellin_quadrature(testfn, u), 0.0,
                                         opts["tol"], params={"function": name, "u": str(u)}, started=started))

    for x in opts["cahen_x"]:
        started = time.perf_counter()
        xi = opts["cahen_xi"]

        def integrand(u, x=x):
            return np.exp(special.loggamma(u) - u * math.log(x))

        spec = choose_contour(integrand, xi, distance=xi, target=1e-14, spread=0.0)
        value = vertical_line_integral(integrand, spec)
        reports.append(create_report("mellin/cahen", value, math.exp(-x), 0.0, opts["cahen_tol"],
                                     params={"x": x}, contours=spec.to_dict(), started=started))
    return reports


# ===== FUNZIONI L E TRASFORMATE =====

@suite("lfe", rank=1, description="additive-twist functional equation and continuation oracle")
def run_lfe(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("lfe", moduli=[1, 5, 7, 12], numerators=None,
                       strip_points=["0.5", "0.3+2i", "0.7-1i", "0.1+5i", "0.9+0.5i"],
                       fe_tol=1e-6, direct_sigma=3.0, direct_tol=1e-8)
    table = ctx.table
    reports = []
    for c in opts["moduli"]:
        if opts["numerators"] is not None:
            numerators = [int(d) % c for d in opts["numerators"]]
        else:
            numerators = [d for d in range(c) if gcd(d, c) == 1][:3] if c > 1 else [0]
        for d in numerators:
            tw = AdditiveTwist(numerator=d, modulus=c)
            for raw in opts["strip_points"]:
                started = time.perf_counter()
                s = parse_complex(raw)
                lhs, rhs = l_fe_sides(s, tw, table)
                reports.append(create_report("lfe", lhs, rhs, 0.0, opts["fe_tol"],
                                             params={"c": c, "d": d, "s": str(s)}, started=started))
            started = time.perf_counter()
            s = complex(opts["direct_sigma"])
            direct = l_additive_direct(s, tw, table)
            reports.append(create_report("lfe/continuation", l_additive_continued(s, tw, table), direct.value,
                                         direct.budget, opts["direct_tol"],
                                         params={"c": c, "d": d, "s": str(s)}, started=started))
    return reports


@suite("dgfe", rank=1, description="D_g functional equation and brute-force oracle")
def run_dgfe(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("dgfe", cases=[[1, 1, 5], [2, 3, 7], [5, 7, 12]], s_values=["0.5+1i", "0.3"],
                       tol=1e-6, brute_s=3.0, brute_m=2000, brute_tol=1e-8)
    table = ctx.table
    reports = []
    for a, b, c in opts["cases"]:
        for raw in opts["s_values"]:
            started = time.perf_counter()
            params = DgParams(a=a, b=b, modulus=c, s=parse_complex(raw))
            lhs, rhs = dg_fe_sides(params, table)
            reports.append(create_report("dgfe", lhs, rhs, 0.0, opts["tol"],
                                         params={"a": a, "b": b, "c": c, "s": raw}, started=started))
        started = time.perf_counter()
        params = DgParams(a=a, b=b, modulus=c, s=opts["brute_s"])
        brute = dg_brute_force(params, table, min(opts["brute_m"], table.n_max))
        reports.append(create_report("dgfe/brute-force", dg(params, table).value, brute.value, brute.budget,
                                     opts["brute_tol"], params={"a": a, "b": b, "c": c, "s": opts["brute_s"]},
                                     started=started))
    return reports


def _contour_independence(testfn, weight: int, opts: Dict) -> List[VerificationReport]:
    """
    Phi(x) su ogni ascissa della griglia contro la prima: Cauchy senza poli
    attraversati. Tolleranza assoluta, in unita' del picco di |Phi|: vicino a 0
    Phi decade come una potenza alta di x e il gap relativo perde significato.
    """
    kernel = PhiKernel(PhiTransformParams(testfn=testfn, weight=weight, s=opts["contour_s"]))
    peak = float(np.max(np.abs(kernel.evaluate(np.geomspace(0.1, 1000.0, 400)))))
    reports = []
    for x in opts["contour_x"]:
        started = time.perf_counter()
        values = [kernel.direct(float(x), xi=float(xi))[0] for xi in opts["contour_xi"]]
        worst = max(values[1:], key=lambda v: abs(v - values[0]))
        reports.append(_exact("phi-admissible/contour", values[0], worst, opts["contour_tol"] * peak,
                              {"s": opts["contour_s"], "x": x, "xi": list(opts["contour_xi"])}, started,
                              [f"peak |Phi| = {peak:.6e}"]))
    return reports


@suite("phi-admissible", rank=1, description="Phi kernel admissibility and Kuznetsov weights")
def run_phi_admissible(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("phi-admissible", s_values=[0.6, 0.9, 1.2], x_max=1000.0, points=8001,
                       ells=[2, 12, 20], weight_tol=1e-8,
                       contour_s=1.5, contour_x=[0.5, 2.0, 10.0], contour_xi=[-2.0, 0.0, 2.0, 4.0, 6.0],
                       contour_tol=1e-8, plus_t=[0.5, 1.0, 3.0], real_tol=1e-10)
    testfn = get_test_function(ctx.config.test_function)
    reports = []
    for sigma in opts["s_values"]:
        started = time.perf_counter()
        kernel = PhiKernel(PhiTransformParams(testfn=testfn, weight=ctx.config.weight, s=sigma))

        def phi(x, kernel=kernel):
            x = np.asarray(x, dtype=np.float64)
            out = np.zeros(x.shape, dtype=np.complex128)
            positive = x > 0
            out[positive] = kernel.evaluate(x[positive])
            return out

        certificate = certify_admissible(phi, label=f"Phi(s={sigma})", s_strip=(sigma, sigma),
                                         x_max=opts["x_max"], points=opts["points"])
        # un certificato e' un'asserzione: lhs 0 se passa, 1 se fallisce
        reports.append(create_report(
            "phi-admissible", 0.0 if certificate.passed else 1.0, 0.0, 0.0, 0.0,
            params={"s": sigma, "function": testfn.name},
            contours={"xi": kernel.params.contours},
            notes=[f"certificate {certificate.to_dict()}"], started=started,
        ))
    reports.extend(_contour_independence(testfn, ctx.config.weight, opts))
    for t in opts["plus_t"]:
        started = time.perf_counter()
        value = phi_plus_combination(testfn, t)
        reports.append(_exact("phi-admissible/phi-plus-real", value.imag, 0.0, opts["real_tol"],
                              {"t": t, "function": testfn.name}, started, [f"phi_+ = {value.real:.17g}"]))
    if testfn.name == "gauss13":
        for ell in opts["ells"]:
            started = time.perf_counter()
            reports.append(create_report("phi-admissible/phi-h", phi_h(testfn, ell), phi_h_gauss13_closed(ell),
                                         0.0, opts["weight_tol"], params={"ell": ell}, started=started))
    return reports


@suite("dirichlet-lemma", rank=1, description="Dirichlet-series lemma with Hecke multiplicativity")
def run_dirichlet_lemma(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("dirichlet-lemma", cases=[[2, "3", 10_000], [3, "1.5+0.5i", 30_000]], rel_tol=1e-8)
    reports = []
    for p, raw_s, M in opts["cases"]:
        M = min(int(M), ctx.table.n_max // int(p))
        reports.append(verify_dirichlet_lemma(int(p), parse_complex(raw_s), M, ctx.table, opts["rel_tol"]))
    return reports


@suite("ramanujan", rank=1, description="Ramanujan-sum Dirichlet series against its Euler product")
def run_ramanujan(ctx: SuiteContext) -> List[VerificationReport]:
    opts = ctx.options("ramanujan", cases=[[1, 3, "2"], [12, 5, "1.5+1i"], [30, 7, "3"]], C=2000, tol=1e-6)
    return [verify_ramanujan(int(n), int(q), parse_complex(u), opts["C"], opts["tol"]) for n, q, u in opts["cases"]]


# ===== IDENTITA' COMPOSTE =====

def _chains(ctx: SuiteContext):
    """Catene (p, q, s) condivise fra sieve e ng-s nello stesso run."""
    cache = ctx._chains
    weight = weight_from_test_function(get_test_function(ctx.config.test_function))
    for p, q in ctx.config.primes:
        for s in ctx.config.s_values:
            key = (p, q, s)
            if key not in cache:
                cache[key] = moment_chain(p, q, s, weight, ctx.policy(), ctx.table)
            yield cache[key], weight


@suite("sieve", rank=2, description="sieving identity between the two Kloosterman aggregates")
def run_sieve(ctx: SuiteContext) -> List[VerificationReport]:
    return [verify_sieve(chain.p, chain.q, chain.s, weight, ctx.policy(), ctx.table,
                         rel_tol=ctx.config.rel_tol, chain=chain)
            for chain, weight in _chains(ctx)]


@suite("ng-s", rank=2, description="moment identity assembled from the sieve")
def run_ng_s(ctx: SuiteContext) -> List[VerificationReport]:
    return [verify_ng_s(chain.p, chain.q, chain.s, weight, ctx.policy(), ctx.table,
                        rel_tol=ctx.config.rel_tol, chain=chain)
            for chain, weight in _chains(ctx)]


@suite("reciprocity", rank=3, description="Kloosterman-sum reciprocity")
def run_reciprocity(ctx: SuiteContext) -> List[VerificationReport]:
    testfn = get_test_function(ctx.config.test_function)
    reports = []
    for p, q in ctx.config.primes:
        for s in ctx.config.s_values:
            reports.append(verify_reciprocity(
                p, q, s, testfn, ctx.policy(), ctx.table, rel_tol=ctx.config.rel_tol,
                sabotage=ctx.config.sabotage, phi_grid=ctx.config.phi_grid,
            ))
            logger.info(f"📋 {reports[-1]}")
    return reports
