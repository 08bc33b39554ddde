"""
Ammissibilità e Punto Iniziale
==============================

Bilanciamento dei rate: massimizza R_sum con beta_k R_sum <= rate_k(alpha)
e beta = d / sum(d). Serve come test di ammissibilità della domanda e per
costruire il punto strettamente ammissibile che limita il primo master.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from ..errors import LpStallError
from ..models.allocation import Allocation, BalanceResult
from . import cutting_plane
from .cutting_plane import Cut, MuConstraints, OracleOutput
from .lp_core import AllocationLayout, LinearProgram, LpStatus, solve

logger = logging.getLogger(__name__)

ENGINES = ("direct", "cutplane")


@dataclass
class StrictStart:
    """Allocazione iniziale scalata e taglio corrispondente."""
    allocation: Allocation
    cut: Optional[Cut]
    strict: bool
    slack: float
    scale: float
    achieved: np.ndarray


def _rate_array(rates) -> np.ndarray:
    return rates.rates if hasattr(rates, "rates") else np.asarray(rates, dtype=float)


def _balance_ratio(achieved: np.ndarray, beta: np.ndarray) -> float:
    served = beta > 0
    return float(np.min(achieved[served] / beta[served])) if served.any() else 0.0


def rate_upper_bound(r: np.ndarray) -> float:
    """Limite superiore su R_sum valido per ogni allocazione ammissibile."""
    if r.size == 0:
        return 0.0
    per_tp = float(r.max(axis=(1, 2)).sum())
    per_bs = float(r.max(axis=(0, 2)).sum())
    return max(per_tp, per_bs)


def _direct_balance(r: np.ndarray, beta: np.ndarray, backend: str) -> Allocation:
    layout = AllocationLayout(r, extra_vars=1)
    R_col = layout.extra_offset
    R_part = sparse.coo_matrix(
        (beta, (np.arange(layout.K), np.full(layout.K, R_col))), shape=(layout.K, layout.n_vars))
    demand = R_part.tocsr() - layout.demand_rows()
    capacity, n_cap = layout.capacity_rows()
    A = sparse.vstack([demand, capacity, layout.simplex_row()]).tocsr()
    b = np.zeros(layout.K + n_cap + 1)
    b[-1] = 1.0
    senses = ["<="] * (layout.K + n_cap) + ["="]

    c = np.zeros(layout.n_vars)
    c[R_col] = 1.0
    upper = np.full(layout.n_vars, np.inf)
    upper[R_col] = rate_upper_bound(r)
    lp = LinearProgram(c, A, b, senses, upper=upper, maximize=True)
    sol = solve(lp, backend=backend)
    if sol.status is not LpStatus.OPTIMAL:
        raise LpStallError("bilanciamento dei rate non ottimo", {"status": sol.status.value})
    return layout.to_allocation(sol.x)


def _balance_oracle(r: np.ndarray, chunk_elements: int = 4_000_000):
    K, B, I = r.shape
    chunk = max(1, chunk_elements // (K * B))

    def oracle(lam: np.ndarray) -> OracleOutput:
        i_hat, best_score = 0, -np.inf
        for start in range(0, I, chunk):
            weighted = lam[:, None, None] * r[:, :, start:start + chunk]   # (K, B, Ic)
            score = weighted.max(axis=0).sum(axis=0)                        # (Ic,)
            local = int(np.argmax(score))
            if score[local] > best_score:
                i_hat, best_score = start + local, float(score[local])
        weighted = lam[:, None] * r[:, :, i_hat]                            # (K, B)
        k_hat = np.argmax(weighted, axis=0)
        block = np.zeros((K, B))
        for b in range(B):
            if weighted[k_hat[b], b] > 0:
                block[k_hat[b], b] = 1.0
        alloc = Allocation.single_pattern(K, B, I, i_hat, block)
        achieved = (block * r[:, :, i_hat]).sum(axis=1)
        cut = Cut(0.0, -achieved, alloc, pattern=i_hat)
        return OracleOutput(-best_score, alloc, cut)

    return oracle


def rate_balance(rates, demands: Sequence[float], engine: str = "direct",
                 tol_gap: float = 1e-9, max_iter: Optional[int] = None,
                 backend: str = "auto") -> BalanceResult:
    """
    Massimizza R_sum sotto beta_k R_sum <= sum_{b,i} alpha_kbi r_kbi.

    Args:
        rates: RateTensor o array K x B x I
        demands: Domande d_k (definiscono beta)
        engine: "direct" (LP completo) o "cutplane" (duale con sum lambda beta >= 1)
        tol_gap: Tolleranza del metodo dei piani di taglio
        max_iter: Limite di iterazioni per il motore cutplane
        backend: Backend LP per il motore diretto

    Returns:
        BalanceResult in bit/s; R_sum è min_k rate_k / beta_k sull'allocazione trovata
    """
    if engine not in ENGINES:
        raise ValueError(f"motore sconosciuto: {engine}")
    r = _rate_array(rates)
    d = np.asarray(demands, dtype=float)
    K, B, I = r.shape
    total = float(d.sum())
    if total <= 0:
        zero = Allocation.zero(K, B, I)
        return BalanceResult(0.0, zero, np.zeros(K), np.zeros(K), engine=engine)

    beta = d / total
    r_max = float(r.max())
    if r_max <= 0:
        zero = Allocation.zero(K, B, I)
        return BalanceResult(0.0, zero, beta, np.zeros(K), engine=engine)
    r_n = r / r_max

    iterations = 0
    if engine == "direct":
        allocation = _direct_balance(r_n, beta, backend)
    else:
        lam0 = beta / float(beta @ beta)
        result = cutting_plane.run(
            _balance_oracle(r_n), K,
            initial_mu=lam0,
            extra=MuConstraints(beta.reshape(1, -1), [">="], np.array([1.0])),
            tol_gap=tol_gap,
            max_iter=max_iter if max_iter is not None else 100 * K + 100,
        )
        allocation = result.allocation
        iterations = result.iterations

    allocation = allocation.compact_spectrum()
    achieved = allocation.achieved_rates(r)
    R_sum = _balance_ratio(achieved, beta)
    logger.debug(f"Bilanciamento ({engine}): R_sum={R_sum:.6g} bit/s, sum(d)={total:.6g}")
    return BalanceResult(R_sum, allocation, beta, achieved, engine=engine, iterations=iterations)


def is_feasible(balance: BalanceResult, demands: Sequence[float], tol: float = 1e-9) -> bool:
    """Vero se R_sum >= sum(d): allora beta_k R_sum >= d_k per ogni k."""
    total = float(np.sum(demands))
    if total <= 0:
        return True
    return balance.R_sum >= total * (1.0 - tol)


def energy_cut(allocation: Allocation, weights: Sequence[float], rates,
               demands: Sequence[float], pattern: int = -1) -> Cut:
    """Taglio dell'oracolo energetico generato da un punto primale."""
    achieved = allocation.achieved_rates(rates)
    return Cut(
        constant=allocation.objective(weights),
        coefficients=np.asarray(demands, dtype=float) - achieved,
        generator=allocation,
        pattern=pattern,
    )


def strict_start(balance: BalanceResult, demands: Sequence[float], shrink: float = 0.5,
                 weights: Optional[Sequence[float]] = None, rates=None) -> StrictStart:
    """
    Scala l'allocazione di bilanciamento per soddisfare ogni domanda con margine.

    Con rho_r = R_sum / sum(d) > 1 le quote sono moltiplicate per
    (1 + shrink (rho_r - 1)) / rho_r; il margine minimo è almeno
    (rho_r - 1) min_k d_k shrink.

    Args:
        balance: Esito di rate_balance
        demands: Domande d_k
        shrink: Frazione del margine conservata, in (0, 1)
        weights: Pesi w_b per la costante del taglio (default tutti 1)
        rates: Tensore per ricalcolare i rate raggiunti (default quelli del bilanciamento)

    Returns:
        StrictStart; `strict` è falso e `cut` è None se non c'è margine
    """
    if not 0.0 < shrink < 1.0:
        raise ValueError("shrink deve essere in (0, 1)")
    d = np.asarray(demands, dtype=float)
    total = float(d.sum())
    w = np.ones(balance.allocation.B) if weights is None else np.asarray(weights, dtype=float)

    if total <= 0 or balance.R_sum <= total * (1.0 + 1e-9):
        if total > 0:
            logger.warning(f"Punto iniziale non strettamente ammissibile: R_sum={balance.R_sum:.6g}, sum(d)={total:.6g}")
        return StrictStart(balance.allocation, None, False, 0.0, 1.0, balance.achieved.copy())

    rho_r = balance.R_sum / total
    scale = (1.0 + shrink * (rho_r - 1.0)) / rho_r
    allocation = balance.allocation.scaled(scale)
    achieved = allocation.achieved_rates(rates) if rates is not None else balance.achieved * scale
    positive = d > 0
    slack = float(np.min(achieved[positive] - d[positive]))
    cut = Cut(constant=allocation.objective(w), coefficients=d - achieved, generator=allocation)
    return StrictStart(allocation, cut, True, slack, scale, achieved)
