"""
Transforms - Pesi di Kuznetsov phi_h, phi_+ e nucleo di reciprocita' Phi.

Phi(x) = (1/2 pi i) int_(xi) phi~(u) 2^-u [G(u)]^2 (x/2)^(u+4s-2) du,
G(u) = Gamma((k+1)/2 - s - u/2) / Gamma((k-1)/2 + s + u/2).

Fra i poli di phi~ (a sinistra) e di G (a destra) ogni retta da' lo stesso
valore. Per ogni x il nucleo sceglie, su una scala di ascisse, quella che
minimizza il picco dell'integrando: la somma sui nodi resta dello stesso
ordine del risultato invece di cancellare molte cifre.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import special
from scipy.integrate import quad, cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .analysis import (
    TestFunction, ContourSpec, choose_contour, vertical_line_integral, bessel_j_imag
)
from .errors import NoAdmissibleContour, ContourTail
from infrastructure.table_cache import TableCache

logger = logging.getLogger(__name__)

DECAY_TARGET = 8.0
CONTOUR_TARGET = 1e-13
LADDER_STEP = 0.5
PEAK_T_MAX = 400.0


# ===== PARAMETRI =====

@dataclass(frozen=True, kw_only=True)
class PhiTransformParams:
    """
    Parametri del nucleo Phi_{k,s}.

    contours: estremi della scala di ascisse, "small" (comportamento in 0,
    Phi = O(x^(xi+4 sigma-2))) e "large" (decadimento per x grande).
    step: passo della scala fra i due estremi.
    """
    testfn: TestFunction
    weight: int = 12
    s: complex = 1.5
    contours: Dict[str, float] = field(default_factory=dict)
    step: float = LADDER_STEP

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        lo, hi = self.window_bounds
        if lo >= hi:
            raise NoAdmissibleContour(
                f"empty contour window ({lo:g}, {hi:g}) for s={self.s}",
                left=lo, right=hi
            )
        if not self.contours:
            object.__setattr__(self, "contours", {
                "small": min(8.0, hi - 2.0),
                "large": max(lo + 1.0, 2.0 - 4.0 * self.s.real - DECAY_TARGET),
            })
        if set(self.contours) != {"small", "large"}:
            raise ValueError(f"contours needs exactly 'small' and 'large', got {sorted(self.contours)}")
        for regime, xi in self.contours.items():
            if not lo < xi < hi:
                raise NoAdmissibleContour(
                    f"xi={xi:g} for regime '{regime}' outside ({lo:g}, {hi:g})",
                    xi=xi, regime=regime
                )
        if self.step <= 0:
            raise ValueError(f"ladder step must be positive, got {self.step}")

    @property
    def window_bounds(self) -> Tuple[float, float]:
        """(bordo sinistro della striscia di Mellin, primo polo del numeratore)."""
        return self.testfn.mellin_strip[0], self.first_pole

    @property
    def first_pole(self) -> float:
        return self.weight + 1.0 - 2.0 * self.s.real

    def pole_abscissas(self, count: int = 4):
        """Re(u) dei poli della famiglia Gamma((k+1)/2 - s - u/2): k+1-2 sigma+2j."""
        return [self.first_pole + 2.0 * j for j in range(count)]

    def distance_to_singularity(self, xi: float) -> float:
        lo, hi = self.window_bounds
        return min(xi - lo, hi - xi)

    def ladder(self) -> np.ndarray:
        """Ascisse da "large" a "small" con passo `step` (estremi inclusi)."""
        lo, hi = sorted((self.contours["large"], self.contours["small"]))
        rungs = np.arange(lo, hi, self.step)
        return np.append(rungs, hi)

    def cache_key(self) -> Tuple:
        return (self.testfn.name, self.weight, self.s.real, self.s.imag,
                tuple(sorted(self.contours.items())), self.step)


# ===== NUCLEO Phi =====

class PhiKernel:
    """Valutazione di Phi per quadratura sul contorno (diretta e vettoriale su x)."""

    def __init__(self, params: PhiTransformParams):
        self.params = params
        k, s = params.weight, params.s
        self._a = (k + 1) / 2.0 - s
        self._b = (k - 1) / 2.0 + s
        self._shift = 4.0 * s - 2.0
        self._contour_cache: Dict[Tuple[float, int], ContourSpec] = {}
        self.ladder = params.ladder()
        t = np.linspace(0.0, PEAK_T_MAX, 1601)
        # |phi~ 2^-u G^2| e' simmetrico in Im u: basta t >= 0
        self._log_peaks = np.array([
            float(np.max(self.log_amplitude(xi + 1j * t).real)) for xi in self.ladder
        ])

    def log_amplitude(self, u):
        """log di phi~(u) 2^-u G(u)^2, parte indipendente da x."""
        u = np.asarray(u, dtype=np.complex128)
        ratio = special.loggamma(self._a - u / 2.0) - special.loggamma(self._b + u / 2.0)
        return self.params.testfn.log_mellin(u) - u * math.log(2.0) + 2.0 * ratio

    def integrand(self, x: float) -> Callable[[np.ndarray], np.ndarray]:
        log_half = math.log(x / 2.0)

        def f(u):
            u = np.asarray(u, dtype=np.complex128)
            return np.exp(self.log_amplitude(u) + (u + self._shift) * log_half)
        return f

    def rung_for(self, x) -> np.ndarray:
        """Indice nella scala dell'ascissa con il picco d'integrando minimo, per ogni x > 0."""
        log_half = np.log(np.atleast_1d(np.asarray(x, dtype=np.float64)) / 2.0)
        score = self._log_peaks[None, :] + np.outer(log_half, self.ladder + self._shift.real)
        return np.argmin(score, axis=1)

    def xi_for(self, x: float) -> float:
        return float(self.ladder[self.rung_for(x)[0]])

    def contour(self, xi: float, log_spread: float) -> ContourSpec:
        """Contorno su Re(u) = xi; log_spread = max |log(x/2)| servito dal contorno."""
        key = (round(xi, 12), int(math.ceil(log_spread)))
        spec = self._contour_cache.get(key)
        if spec is None:
            distance = self.params.distance_to_singularity(xi)
            if distance <= 0:
                raise NoAdmissibleContour(f"xi={xi:g} is not pole-free", xi=xi)
            spec = choose_contour(
                lambda u: np.exp(self.log_amplitude(u)), xi, distance,
                target=CONTOUR_TARGET, spread=0.8 * distance * key[1],
            )
            self._contour_cache[key] = spec
        return spec

    def direct(self, x: float, xi: Optional[float] = None) -> Tuple[complex, ContourSpec]:
        """Phi(x) con quadratura dedicata; ritorna anche il contorno usato."""
        if x <= 0:
            return 0j, ContourSpec(xi=self.params.contours["small"], T=1.0, h=1.0)
        xi = self.xi_for(x) if xi is None else xi
        spec = self.contour(xi, abs(math.log(x / 2.0)))
        return vertical_line_integral(self.integrand(x), spec), spec

    def evaluate(self, x, chunk: int = 256) -> np.ndarray:
        """
        Phi su un array di x (Phi(0) := 0).

        Un contorno per gradino della scala; la somma sui nodi e' un prodotto
        matrice-vettore in spazio logaritmico.

        Raises:
            ContourTail: Se l'ampiezza non e' decaduta agli estremi del contorno
        """
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.zeros(x.shape, dtype=np.complex128)
        positive = np.nonzero(x > 0)[0]
        if positive.size == 0:
            return out
        rungs = self.rung_for(x[positive])
        for rung in np.unique(rungs):
            idx = positive[rungs == rung]
            xi = float(self.ladder[rung])
            log_half = np.log(x[idx] / 2.0)
            spec = self.contour(xi, float(np.max(np.abs(log_half))))
            nodes = spec.nodes()
            log_amp = self.log_amplitude(nodes)
            edge = np.maximum(log_amp[0].real, log_amp[-1].real)
            if edge > np.max(log_amp.real) + math.log(1e-10):
                raise ContourTail(f"Phi amplitude not decayed at T={spec.T:g}", xi=xi)
            values = np.empty(log_half.shape, dtype=np.complex128)
            exponent = nodes + self._shift
            for start in range(0, log_half.size, chunk):
                block = log_half[start:start + chunk]
                terms = np.exp(log_amp[None, :] + np.outer(block, exponent))
                values[start:start + chunk] = terms.sum(axis=1) * spec.h / (2.0 * math.pi)
            out[idx] = values
        return out


def phi_cap(params: PhiTransformParams, x: float, xi: Optional[float] = None) -> complex:
    """Phi_{k,s}(x) valutato direttamente (ascissa scelta dalla scala o xi esplicito)."""
    value, _ = PhiKernel(params).direct(x, xi)
    return value


# ===== CACHE INTERPOLATA DI Phi =====

@dataclass(frozen=True, kw_only=True)
class ValidationResult:
    max_error: float
    scale: float
    samples: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance * self.scale


class PhiCache:
    """
    Phi su griglia geometrica x_k = x_min r^k con spline cubica in log x.

    Parte reale e immaginaria interpolate separatamente. Fuori dalla
    griglia Phi vale 0 (decade come potenza ai due estremi).
    """

    def __init__(self, params: PhiTransformParams, x_min: float = 1e-3, x_max: float = 1e4,
                 points_per_decade: int = 400):
        self.params = params
        self.kernel = PhiKernel(params)
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        decades = math.log10(self.x_max / self.x_min)
        count = int(math.ceil(decades * points_per_decade)) + 1
        self.log_grid = np.linspace(math.log(self.x_min), math.log(self.x_max), count)
        logger.info(f"🧮 Building Phi cache: s={params.s}, {count} nodes on [{x_min:g}, {x_max:g}]")
        values = self.kernel.evaluate(np.exp(self.log_grid))
        self.values = values
        self._real = CubicSpline(self.log_grid, values.real)
        self._imag = CubicSpline(self.log_grid, values.imag)
        logger.info(f"✅ Phi cache ready (max |Phi| = {np.max(np.abs(values)):.3e})")

    @property
    def nbytes(self) -> int:
        # griglia, valori, 4 coefficienti per intervallo per due spline
        return int(self.log_grid.nbytes + self.values.nbytes + 2 * 4 * self.log_grid.nbytes)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape, dtype=np.complex128)
        inside = (x >= self.x_min) & (x <= self.x_max)
        if np.any(inside):
            lx = np.log(x[inside])
            out[inside] = self._real(lx) + 1j * self._imag(lx)
        return out

    def validate(self, samples: int = 40, tolerance: float = 1e-7, seed: int = 0) -> ValidationResult:
        """Confronta la spline con la valutazione diretta in punti casuali (errore relativo a max|Phi|)."""
        rng = np.random.default_rng(seed)
        xs = np.exp(rng.uniform(self.log_grid[0], self.log_grid[-1], samples))
        interpolated = self(xs)
        direct = np.array([self.kernel.direct(float(x))[0] for x in xs])
        scale = float(np.max(np.abs(self.values)))
        max_error = float(np.max(np.abs(interpolated - direct)))
        result = ValidationResult(max_error=max_error, scale=scale, samples=samples, tolerance=tolerance)
        if result.passed:
            logger.debug(f"✅ Phi cache validated: max err {max_error:.2e} (scale {scale:.2e})")
        else:
            logger.warning(f"⚠️ Phi cache interpolation error {max_error:.2e} above {tolerance:g} x {scale:.2e}")
        return result


def get_phi_cache(params: PhiTransformParams, x_min: float = 1e-3, x_max: float = 1e4,
                  points_per_decade: int = 400) -> PhiCache:
    """PhiCache condivisa tramite la TableCache (una per parametri e griglia)."""
    key = ("phi_cache",) + params.cache_key() + (x_min, x_max, points_per_decade)
    return TableCache.get_instance().get_or_build(
        key, lambda: PhiCache(params, x_min=x_min, x_max=x_max, points_per_decade=points_per_decade)
    )


# ===== PROFILO DI UN PESO (finestra e massa di Mellin) =====

class WeightProfile:
    """
    Peso w(y) con tabelle cumulative delle masse
    int |w(y)| y^(1-2 sigma) dy (finestra) e int |w(y)|^2 y^(1-4 sigma) dy (varianza degli strati).
    """

    def __init__(self, name: str, weight: Callable[[np.ndarray], np.ndarray],
                 y_min: float, y_max: float, sigma: float, points: int = 6000):
        self.name = name
        self.weight = weight
        self.sigma = float(sigma)
        self.log_y = np.linspace(math.log(y_min), math.log(y_max), points)
        y = np.exp(self.log_y)
        magnitude = np.abs(weight(y))
        # dy = y d(log y)
        density = magnitude * y ** (2.0 - 2.0 * self.sigma)
        self.cumulative = np.concatenate(([0.0], cumulative_trapezoid(density, self.log_y)))
        self.total = float(self.cumulative[-1])
        square = magnitude ** 2 * y ** (2.0 - 4.0 * self.sigma)
        self.square_cumulative = np.concatenate(([0.0], cumulative_trapezoid(square, self.log_y)))

    def mass_below(self, y: float) -> float:
        return float(np.interp(math.log(y), self.log_y, self.cumulative, left=0.0, right=self.total))

    def discarded_mass(self, lo: float, hi: float) -> float:
        """Massa fuori da [lo, hi]."""
        return self.mass_below(lo) + (self.total - self.mass_below(hi))

    def square_mass(self, lo: float, hi: float) -> float:
        """int_lo^hi |w(y)|^2 y^(1-4 sigma) dy (0 se l'intervallo e' vuoto)."""
        if not hi > lo:
            return 0.0
        top = float(self.square_cumulative[-1])
        ends = [float(np.interp(math.log(y), self.log_y, self.square_cumulative, left=0.0, right=top))
                if math.isfinite(y) else top for y in (lo, hi)]
        return max(ends[1] - ends[0], 0.0)

    def window(self, mass_tol: float) -> Tuple[float, float]:
        """[lo, hi] con massa esterna <= mass_tol * totale (meta' per lato)."""
        if self.total <= 0:
            return float(np.exp(self.log_y[0])), float(np.exp(self.log_y[-1]))
        share = 0.5 * mass_tol * self.total
        lo_idx = int(np.searchsorted(self.cumulative, share, side="right")) - 1
        hi_idx = int(np.searchsorted(self.cumulative, self.total - share, side="left"))
        lo_idx = max(lo_idx, 0)
        hi_idx = min(hi_idx, len(self.log_y) - 1)
        return float(np.exp(self.log_y[lo_idx])), float(np.exp(self.log_y[hi_idx]))


# ===== PESI DI KUZNETSOV =====

def phi_h(testfn: TestFunction, ell: int) -> float:
    """phi_h(l) = int_0^inf J_(l-1)(x) phi(x) dx / x, quadratura adattiva."""
    if ell < 2 or ell % 2:
        raise ValueError(f"ell must be an even integer >= 2, got {ell}")
    hi = testfn.support[1]
    value, _ = quad(
        lambda x: special.jv(ell - 1, x) * float(testfn.evaluate(x)) / x if x > 0 else 0.0,
        0.0, hi, limit=400, epsabs=1e-14, epsrel=1e-12,
    )
    return float(value)


def phi_h_gauss13_closed(ell: int) -> float:
    """
    Forma chiusa per x^13 e^(-x^2) (integrale di Weber):
    Gamma((nu+13)/2) / (2 2^nu Gamma(nu+1)) 1F1((nu+13)/2; nu+1; -1/4), nu = l-1.
    """
    nu = ell - 1
    log_prefactor = special.gammaln((nu + 13) / 2.0) - math.log(2.0) - nu * math.log(2.0) - special.gammaln(nu + 1.0)
    return float(math.exp(log_prefactor) * special.hyp1f1((nu + 13) / 2.0, nu + 1.0, -0.25))


def _gauss_legendre(hi: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(order)
    return 0.5 * hi * (nodes + 1.0), 0.5 * hi * weights


T_ZERO_PROXY = 1e-6


def _phi_plus_at(testfn: TestFunction, t: float, order: int) -> float:
    hi = min(testfn.support[1], 50.0)
    nodes, weights = _gauss_legendre(hi, order)
    phi = testfn.evaluate(nodes)
    imag_j = np.array([bessel_j_imag(t, float(x)).imag for x in nodes])
    integral = float(np.sum(weights * imag_j * phi / nodes))
    return -integral / math.sinh(math.pi * t)


def phi_plus(testfn: TestFunction, t: float, order: int = 160) -> float:
    """
    phi_+(t) = -(1 / sinh(pi t)) int Im J_(2it)(x) phi(x) dx / x.

    Pari in t; per t = 0 usa il proxy t = 1e-6 con un passo di Richardson.
    """
    t = abs(float(t))
    if t == 0.0:
        coarse = _phi_plus_at(testfn, 2.0 * T_ZERO_PROXY, order)
        fine = _phi_plus_at(testfn, T_ZERO_PROXY, order)
        return (4.0 * fine - coarse) / 3.0
    return _phi_plus_at(testfn, t, order)


def phi_plus_combination(testfn: TestFunction, t: float, order: int = 160) -> complex:
    """
    phi_+(t) dalla combinazione i (J_(2it) - J_(-2it)) / (2 sinh(pi t)), senza
    prendere parti reali: i due ordini sono valutati separatamente e la parte
    immaginaria del risultato misura la simmetria di coniugio.
    """
    t = float(t)
    if t == 0.0:
        raise ValueError("phi_plus_combination needs t != 0")
    hi = min(testfn.support[1], 50.0)
    nodes, weights = _gauss_legendre(hi, order)
    phi = testfn.evaluate(nodes)
    difference = np.array([bessel_j_imag(t, float(x)) - bessel_j_imag(-t, float(x)) for x in nodes])
    integral = complex(np.sum(weights * difference * phi / nodes))
    return 1j * integral / (2.0 * math.sinh(math.pi * t))


def phi_plus_zero_closed(testfn: TestFunction) -> float:
    """Limite t -> 0: -int Y_0(x) phi(x) dx / x."""
    value, _ = quad(
        lambda x: special.y0(x) * float(testfn.evaluate(x)) / x if x > 0 else 0.0,
        0.0, testfn.support[1], limit=400, epsabs=1e-14, epsrel=1e-12,
    )
    return -float(value)


# ===== CERTIFICATO DI AMMISSIBILITA' =====

@dataclass(frozen=True, kw_only=True)
class AdmissibilityReport:
    label: str
    passed: bool
    value_at_zero: float
    decay_exponents: Dict[str, float]
    fitted_constants: Dict[str, float]
    offending_sample: Optional[Dict[str, float]] = None
    s_strip: Optional[Tuple[float, float]] = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "pass": self.passed,
            "value_at_zero": self.value_at_zero,
            "decay_exponents": self.decay_exponents,
            "fitted_constants": self.fitted_constants,
            "offending_sample": self.offending_sample,
            "s_strip": self.s_strip,
        }


def _decay_exponent(x: np.ndarray, g: np.ndarray, fit_from: float, floor: float) -> float:
    """Pendenza log-log dell'inviluppo |g| (massimo da destra) oltre fit_from e oltre il doppio del picco."""
    magnitude = np.abs(g)
    envelope = np.maximum.accumulate(magnitude[::-1])[::-1]
    start = max(fit_from, 2.0 * float(x[int(np.argmax(magnitude))]))
    mask = (x >= start) & (envelope > floor)
    if np.count_nonzero(mask) < 5:
        return -math.inf
    slope, _ = np.polyfit(np.log1p(x[mask]), np.log(envelope[mask]), 1)
    return float(slope)


def certify_admissible(fn: Callable[[np.ndarray], np.ndarray], label: str = "fn",
                       s_strip: Optional[Tuple[float, float]] = None,
                       x_max: float = 100.0, points: int = 4001,
                       max_exponent: float = -2.1, zero_tol: float = 1e-9,
                       fit_from: float = 10.0) -> AdmissibilityReport:
    """
    Certificato numerico: fn(0) ~ 0 e fn, fn', fn'' limitati da C (1+x)^(-2-eps).

    Le derivate sono differenze finite su griglia uniforme di [0, x_max].
    """
    x = np.linspace(0.0, x_max, points)
    values = np.asarray(fn(x))
    if not np.iscomplexobj(values):
        values = values.astype(np.float64)
    first = np.gradient(values, x)
    second = np.gradient(first, x)

    peak = float(np.max(np.abs(values))) or 1.0
    value_at_zero = float(abs(values[0]))

    exponents: Dict[str, float] = {}
    constants: Dict[str, float] = {}
    offending = None
    eps_weight = (1.0 + x) ** (-max_exponent)
    for name, g in (("fn", values), ("d1", first), ("d2", second)):
        # soglia relativa: le differenze finite amplificano il rumore di quadratura
        floor = 1e-9 * (float(np.max(np.abs(g))) or 1.0)
        exponents[name] = _decay_exponent(x, g, fit_from, floor)
        constants[name] = float(np.max(np.abs(g) * eps_weight))
        if offending is None and exponents[name] > max_exponent:
            idx = int(np.argmax(np.abs(g) * eps_weight))
            offending = {"which": name, "x": float(x[idx]), "value": float(abs(g[idx])),
                         "exponent": exponents[name]}

    if value_at_zero > zero_tol * peak:
        offending = {"which": "fn", "x": 0.0, "value": value_at_zero}

    passed = offending is None
    if passed:
        logger.debug(f"✅ {label} admissible (exponents {exponents})")
    else:
        logger.warning(f"⚠️ {label} not admissible at {offending}")
    return AdmissibilityReport(
        label=label, passed=passed, value_at_zero=value_at_zero,
        decay_exponents=exponents, fitted_constants=constants,
        offending_sample=offending, s_strip=s_strip,
    )
