"""
Solutore Energetico
===================

Minimizzazione della potenza di rete con vincoli di rate: surrogato della
norma l0, ciclo esterno l1 ripesato (majorize-minimize), oracolo interno in
forma chiusa per i piani di taglio, arrotondamento finale delle BS spente e
valutazione della potenza.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import InfeasibleDemandError
from ..models.allocation import Allocation, EnergyResult, WeightedSolution
from ..models.patterns import PatternSet
from ..models.rates import RateTensor
from ..models.scenario import Scenario
from . import cutting_plane
from .cutting_plane import Cut, OracleOutput
from .feasibility import StrictStart, energy_cut, is_feasible, rate_balance, strict_start
from .lp_core import DEFAULT_DENSE_MAX_ENTRIES, DEFAULT_FEAS_TOL, solve_direct_weighted_lp

logger = logging.getLogger(__name__)

ENGINES = ("cutplane", "direct")


@dataclass(frozen=True)
class SolverParams:
    """Parametri del solutore energetico."""
    epsilon: float = 1e-3
    outer_tol: float = 1e-4
    max_outer: int = 15
    rho_off: float = 1e-4
    tol_gap: float = 1e-6
    max_iter: Optional[int] = None
    max_iter_per_tp: int = 50
    mu_box_factor: float = 1e3
    shrink: float = 0.5
    engine: str = "cutplane"
    balance_engine: Optional[str] = None
    lp_backend: str = "auto"
    lp_feas_tol: float = DEFAULT_FEAS_TOL
    dense_max_entries: int = DEFAULT_DENSE_MAX_ENTRIES

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon deve essere positivo")
        if not 0 < self.rho_off <= 0.01:
            raise ValueError("rho_off deve essere in (0, 0.01]")
        if not self.outer_tol > 0:
            raise ValueError("outer_tol deve essere positivo")
        if self.max_outer < 1:
            raise ValueError("max_outer deve essere almeno 1")
        if self.tol_gap < 0:
            raise ValueError("tol_gap non può essere negativo")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter deve essere almeno 1")
        if self.max_iter_per_tp < 1:
            raise ValueError("max_iter_per_tp deve essere almeno 1")
        if not self.mu_box_factor > 0:
            raise ValueError("mu_box_factor deve essere positivo")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink deve essere in (0, 1)")
        if self.engine not in ENGINES:
            raise ValueError(f"motore sconosciuto: {self.engine}")
        if self.balance_engine is not None and self.balance_engine not in ("direct", "cutplane"):
            raise ValueError(f"motore di bilanciamento sconosciuto: {self.balance_engine}")

    @property
    def resolved_balance_engine(self) -> str:
        """Motore del bilanciamento dei rate: quello esplicito o il motore principale."""
        return self.balance_engine or self.engine


def _balance(rates, d: np.ndarray, params: SolverParams):
    return rate_balance(rates, d, engine=params.resolved_balance_engine, backend=params.lp_backend)


# === SURROGATO E PESI ===

def l0_surrogate(x, epsilon: float):
    """Approssimazione log(1 + x/eps) / log(1 + 1/eps) dell'indicatrice x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("l'argomento del surrogato deve essere non negativo")
    value = np.log1p(x / epsilon) / math.log1p(1.0 / epsilon)
    return float(value) if value.ndim == 0 else value


def surrogate_objective(rho: Sequence[float], scenario: Scenario, epsilon: float) -> float:
    """f(rho) = sum_b (1-q_b) P_b rho_b + q_b P_b log(eps + rho_b) / log(1 + 1/eps)."""
    rho = np.asarray(rho, dtype=float)
    P = scenario.op_power
    q = scenario.fixed_fraction
    return float(np.sum((1 - q) * P * rho + q * P * np.log(epsilon + rho) / math.log1p(1.0 / epsilon)))


def mm_weights(rho_prev: Sequence[float], scenario: Scenario, epsilon: float) -> np.ndarray:
    """Pesi w_b = (1-q_b) P_b + q_b P_b / (log(1 + 1/eps) (eps + rho_b))."""
    rho = np.asarray(rho_prev, dtype=float)
    P = scenario.op_power
    q = scenario.fixed_fraction
    return (1 - q) * P + q * P / (math.log1p(1.0 / epsilon) * (epsilon + rho))


def total_power(rho: Sequence[float], scenario: Scenario, rho_off: float) -> float:
    """Potenza di rete: parte dinamica proporzionale a rho più parte fissa delle BS accese."""
    rho = np.asarray(rho, dtype=float)
    P = scenario.op_power
    q = scenario.fixed_fraction
    on = (rho > rho_off).astype(float)
    return float(np.sum((1 - q) * rho * P + q * on * P))


# === ORACOLO INTERNO IN FORMA CHIUSA ===

def prop2_inner(mu: Sequence[float], w: Sequence[float], rates,
                demands: Optional[Sequence[float]] = None,
                chunk_elements: int = 4_000_000) -> Tuple[Allocation, int, float]:
    """
    Minimizza sum_b sum_k sum_i (w_b - r_kbi mu_k) alpha_kbi su (alpha, pi).

    Per ogni (b, i) serve solo il punto di test con costo ridotto minimo
    (indice più basso a parità); si sceglie poi il pattern con la somma più
    negativa dei costi ridotti e gli si assegna tutto lo spettro.

    Args:
        mu: Moltiplicatori mu_k >= 0
        w: Pesi w_b > 0
        rates: RateTensor o array K x B x I
        demands: d_k per il termine sum d_k mu_k (default nullo)

    Returns:
        (allocazione, pattern scelto, valore della funzione duale h(mu))
    """
    r = rates.rates if hasattr(rates, "rates") else np.asarray(rates, dtype=float)
    mu = np.asarray(mu, dtype=float)
    w = np.asarray(w, dtype=float)
    K, B, I = r.shape
    d = np.zeros(K) if demands is None else np.asarray(demands, dtype=float)

    chunk = max(1, chunk_elements // (K * B))
    i_bar, best = 0, np.inf
    for start in range(0, I, chunk):
        reduced = w[None, :, None] - r[:, :, start:start + chunk] * mu[:, None, None]
        score = np.minimum(reduced.min(axis=0), 0.0).sum(axis=0)
        local = int(np.argmin(score))
        if score[local] < best:
            i_bar, best = start + local, float(score[local])

    reduced = w[None, :] - r[:, :, i_bar] * mu[:, None]
    k_bar = np.argmin(reduced, axis=0)
    block = np.zeros((K, B))
    for b in range(B):
        if reduced[k_bar[b], b] < 0:
            block[k_bar[b], b] = 1.0
    allocation = Allocation.single_pattern(K, B, I, i_bar, block)
    return allocation, i_bar, best + float(d @ mu)


# === PROBLEMA PESATO ===

def _mu_box(r_n: np.ndarray, factor: float) -> np.ndarray:
    positive = np.where(r_n > 0, r_n, np.inf)
    per_tp = positive.min(axis=(1, 2))
    fallback = positive.min() if np.isfinite(positive.min()) else 1.0
    per_tp = np.where(np.isfinite(per_tp), per_tp, fallback)
    return factor / per_tp


def solve_weighted_lp(rates, w: Sequence[float], d: Sequence[float], params: SolverParams,
                      start: Optional[StrictStart] = None) -> WeightedSolution:
    """
    Risolve min sum_b w_b rho_b con domanda soddisfatta, con il motore scelto.

    Rate e domande sono divisi per il rate massimo, i pesi per il peso
    massimo; obiettivo, moltiplicatori e traccia sono riportati in unità
    fisiche.

    Args:
        rates: RateTensor o array K x B x I
        w: Pesi w_b > 0
        d: Domande d_k >= 0
        params: Parametri del solutore
        start: Punto strettamente ammissibile (calcolato se assente)

    Raises:
        InfeasibleDemandError: domanda non soddisfacibile
    """
    r = rates.rates if hasattr(rates, "rates") else np.asarray(rates, dtype=float)
    w = np.asarray(w, dtype=float)
    d = np.asarray(d, dtype=float)
    K, B, I = r.shape
    if np.any(w <= 0):
        raise ValueError("i pesi devono essere positivi")
    if not np.any(d > 0):
        return WeightedSolution(Allocation.zero(K, B, I), 0.0, params.engine, mu=np.zeros(K))

    r_max = float(r.max())
    w_max = float(w.max())
    if r_max <= 0:
        raise InfeasibleDemandError("nessun collegamento con rate positivo")
    r_n, d_n, w_n = r / r_max, d / r_max, w / w_max

    if params.engine == "direct":
        sol = solve_direct_weighted_lp(r_n, w_n, d_n, backend=params.lp_backend,
                                       feas_tol=params.lp_feas_tol, max_dense_entries=params.dense_max_entries)
        if sol.status == "infeasible":
            raise InfeasibleDemandError("il problema pesato non è ammissibile")
        return WeightedSolution(
            allocation=sol.allocation,
            objective=sol.allocation.objective(w),
            engine="direct",
            iterations=sol.iterations,
            mu=sol.mu * w_max / r_max,
        )

    if start is None:
        balance = _balance(r, d, params)
        if not is_feasible(balance, d):
            raise InfeasibleDemandError(f"R_sum={balance.R_sum:.6g} < sum(d)={d.sum():.6g}")
        start = strict_start(balance, d, params.shrink)

    initial_cut: Optional[Cut] = None
    if start.strict:
        initial_cut = energy_cut(start.allocation, w_n, r_n, d_n)

    def oracle(mu: np.ndarray) -> OracleOutput:
        allocation, i_bar, value = prop2_inner(mu, w_n, r_n, d_n)
        return OracleOutput(value, allocation, energy_cut(allocation, w_n, r_n, d_n, pattern=i_bar))

    result = cutting_plane.run(
        oracle, K,
        initial_cut=initial_cut,
        mu_box=_mu_box(r_n, params.mu_box_factor),
        tol_gap=params.tol_gap,
        max_iter=params.max_iter if params.max_iter is not None else params.max_iter_per_tp * K,
    )
    allocation = result.allocation.compact_spectrum()
    trace = [
        {**row, "z": row["z"] * w_max, "h": row["h"] * w_max, "gap": row["gap"] * w_max}
        for row in result.trace
    ]
    return WeightedSolution(
        allocation=allocation,
        objective=allocation.objective(w),
        engine="cutplane",
        iterations=result.iterations,
        converged=result.converged,
        mu=result.mu * w_max / r_max,
        trace=trace,
        box_active=result.box_active,
    )


def count_active_patterns(allocation: Allocation, tol: float = 1e-9) -> int:
    """Numero di pattern con frazione di spettro maggiore di tol."""
    return len(allocation.active_patterns(tol))


# === CICLO ESTERNO ===

def _repair(scenario: Scenario, patterns: PatternSet, rates: RateTensor, d: np.ndarray,
            w: np.ndarray, rho: np.ndarray, params: SolverParams,
            current: Allocation) -> Tuple[Allocation, list]:
    """
    Risolve di nuovo sui soli pattern che accendono BS sopravvissute.

    Se il problema ridotto non è ammissibile si riaccende la BS spenta con
    utilizzo maggiore e si riprova.
    """
    active = set(int(b) for b in np.flatnonzero(rho > params.rho_off))
    off = [b for b in range(scenario.B) if b not in active]
    restored = []

    while True:
        if all(set(patterns.on_set(i)) <= active for i in current.active_patterns()):
            return current, restored
        indices = patterns.indices_within(active)
        if indices.size:
            sub_rates = rates.select_patterns(indices)
            balance = _balance(sub_rates, d, params)
            if is_feasible(balance, d):
                start = strict_start(balance, d, params.shrink)
                sol = solve_weighted_lp(sub_rates, w, d, params, start=start)
                return sol.allocation.lift(indices, patterns.I), restored
        candidates = [b for b in off if b not in active]
        if not candidates:
            return current, restored
        back = min(candidates, key=lambda b: (-rho[b], b))
        active.add(back)
        restored.append(back)
        logger.info(f"Riparazione: BS {back} riaccesa (rho={rho[back]:.3g})")


def minimize_energy(scenario: Scenario, patterns: PatternSet, rates: RateTensor,
                    params: Optional[SolverParams] = None,
                    demands: Optional[Sequence[float]] = None) -> EnergyResult:
    """
    Minimizzazione della potenza con ciclo l1 ripesato.

    Args:
        scenario: Scenario (potenze operative e frazioni fisse)
        patterns: Pattern candidati
        rates: Tensore dei rate coerente con i pattern
        params: Parametri (default SolverParams())
        demands: Domande d_k (default quelle dello scenario)

    Returns:
        EnergyResult; feasible è falso se la domanda non è soddisfacibile
    """
    params = params or SolverParams()
    d = scenario.demands if demands is None else np.asarray(demands, dtype=float)
    K, B, I = rates.rates.shape
    if (K, B) != (scenario.K, scenario.B) or I != patterns.I:
        raise ValueError("tensore dei rate incoerente con scenario e pattern")

    if not np.any(d > 0):
        zero = Allocation.zero(K, B, I)
        return EnergyResult(
            feasible=True, allocation=zero, rho=np.zeros(B), active_bs=[], total_power=0.0,
            achieved_rates=np.zeros(K), demands=d, engine=params.engine, converged=True,
            pattern_labels=patterns.labels,
        )

    balance = _balance(rates, d, params)
    if not is_feasible(balance, d):
        logger.info(f"Domanda non soddisfacibile: R_sum={balance.R_sum:.6g} < sum(d)={d.sum():.6g}")
        return EnergyResult(feasible=False, demands=d, engine=params.engine, pattern_labels=patterns.labels)

    start = strict_start(balance, d, params.shrink, rates=rates)
    warnings = [] if start.strict else ["punto iniziale non strettamente ammissibile: uso del box su mu"]

    current = start.allocation
    rho_prev = np.clip(current.rho, 0.0, 1.0)
    f_prev = surrogate_objective(rho_prev, scenario, params.epsilon)
    surrogate_trace = [f_prev]
    outer_trace = []
    w = mm_weights(rho_prev, scenario, params.epsilon)
    converged = False
    t = 0

    for t in range(1, params.max_outer + 1):
        w = mm_weights(rho_prev, scenario, params.epsilon)
        sol = solve_weighted_lp(rates, w, d, params, start=start)
        rho = np.clip(sol.allocation.rho, 0.0, 1.0)
        f = surrogate_objective(rho, scenario, params.epsilon)
        if f > f_prev + 1e-9 * abs(f_prev):
            logger.warning(f"Iterazione esterna {t}: f cresce ({f_prev:.10g} -> {f:.10g}), mantengo l'iterato precedente")
            warnings.append(f"salvaguardia MM all'iterazione {t}")
            t -= 1
            break
        delta = float(np.max(np.abs(rho - rho_prev)))
        current = sol.allocation
        surrogate_trace.append(f)
        outer_trace.append({
            "t": t, "f": f, "max_delta_rho": delta, "weighted_objective": sol.objective,
            "cp_iterations": sol.iterations, "box_active": sol.box_active,
        })
        logger.info(f"Iterazione esterna {t}: f={f:.6f}, |drho|={delta:.3e}, iterazioni interne={sol.iterations}")
        rho_prev, f_prev = rho, f
        if delta <= params.outer_tol:
            converged = True
            break

    allocation, restored = _repair(scenario, patterns, rates, d, w, rho_prev, params, current)
    if restored:
        warnings.append(f"BS riaccese dalla riparazione: {restored}")
    rho_final = np.clip(allocation.rho, 0.0, 1.0)
    power = total_power(rho_final, scenario, params.rho_off)
    active = [int(b) for b in np.flatnonzero(rho_final > params.rho_off)]
    logger.info(f"Potenza totale {power:.2f} W con {len(active)} BS accese su {B}")

    return EnergyResult(
        feasible=True,
        allocation=allocation,
        rho=rho_final,
        active_bs=active,
        total_power=power,
        surrogate_trace=surrogate_trace,
        outer_trace=outer_trace,
        achieved_rates=allocation.achieved_rates(rates),
        demands=d,
        engine=params.engine,
        iterations=t,
        converged=converged,
        warnings=warnings,
        pattern_labels=patterns.labels,
    )
