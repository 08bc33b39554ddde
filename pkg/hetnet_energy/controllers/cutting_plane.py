"""
Metodo dei Piani di Taglio
==========================

Motore duale alla Kelley: alterna il problema master sui moltiplicatori mu
(massimizza z sotto i tagli accumulati) e un oracolo interno che valuta la
funzione duale h(mu); si ferma quando z - h si chiude e ricostruisce una
soluzione primale dai pesi duali kappa del master.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..errors import MasterUnboundedError, RecoveryError
from ..models.allocation import Allocation
from .lp_core import LinearProgram, LpStatus, solve_lp

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["l", "z", "h", "gap", "pattern"]


@dataclass
class Cut:
    """Taglio z <= constant + coefficients . mu generato da un punto interno."""
    constant: float
    coefficients: np.ndarray
    generator: Allocation
    pattern: int = -1

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if not (np.isfinite(self.constant) and np.all(np.isfinite(self.coefficients))):
            raise ValueError("coefficienti del taglio non finiti")

    def value(self, mu: np.ndarray) -> float:
        return float(self.constant + self.coefficients @ mu)

    @property
    def is_bounding(self) -> bool:
        """Vero se limita il master da solo (tutti i coefficienti negativi)."""
        return bool(np.all(self.coefficients < 0))


@dataclass
class MuConstraints:
    """Righe lineari aggiuntive sui moltiplicatori: G mu (sensi) g."""
    G: np.ndarray
    senses: Sequence[str]
    g: np.ndarray


@dataclass
class OracleOutput:
    """Valore della funzione duale in mu e taglio corrispondente."""
    value: float
    allocation: Allocation
    cut: Cut


@dataclass
class CutPool:
    """Stato duale del metodo: tagli, mu, z e pesi kappa del master."""
    K: int
    mu_box: np.ndarray
    extra: Optional[MuConstraints] = None
    cuts: List[Cut] = field(default_factory=list)
    mu: Optional[np.ndarray] = None
    z: float = float("inf")
    kappa: Optional[np.ndarray] = None

    def __post_init__(self):
        self.mu_box = np.broadcast_to(np.asarray(self.mu_box, dtype=float), (self.K,)).copy()
        if np.any(self.mu_box < 0):
            raise ValueError("il box su mu deve essere non negativo")

    def add(self, cut: Cut) -> None:
        if cut.coefficients.shape != (self.K,):
            raise ValueError(f"taglio con {cut.coefficients.shape[0]} coefficienti, attesi {self.K}")
        self.cuts.append(cut)

    def __len__(self) -> int:
        return len(self.cuts)


@dataclass
class MasterResult:
    mu: np.ndarray
    z: float
    kappa: np.ndarray
    degenerate: bool = False
    box_active: bool = False


@dataclass
class CutPlaneResult:
    """Esito del metodo: primale recuperato, mu finale e traccia."""
    allocation: Allocation
    mu: np.ndarray
    z: float
    h: float
    best_h: float
    best_mu: np.ndarray
    iterations: int
    converged: bool
    box_active: bool
    trace: List[Dict[str, Any]]
    pool: CutPool


def master_solve(pool: CutPool, mu_box: Optional[np.ndarray] = None) -> MasterResult:
    """
    Risolve max z su mu in [0, box] sotto i tagli del pool.

    Args:
        pool: Tagli accumulati (aggiornato con mu, z, kappa)
        mu_box: Limite superiore per mu_k (default quello del pool)

    Returns:
        MasterResult con i pesi kappa (duali delle righe dei tagli)

    Raises:
        MasterUnboundedError: nessun taglio limitante e box infinito
    """
    K = pool.K
    box = pool.mu_box if mu_box is None else np.broadcast_to(np.asarray(mu_box, dtype=float), (K,))

    if not pool.cuts:
        if not np.all(np.isfinite(box)):
            raise MasterUnboundedError(
                "master senza tagli e con box infinito: inizializzare con un punto strettamente ammissibile"
            )
        pool.mu, pool.z, pool.kappa = box.copy(), float("inf"), np.zeros(0)
        return MasterResult(box.copy(), float("inf"), np.zeros(0), degenerate=True, box_active=True)

    n_cuts = len(pool.cuts)
    rows = [np.concatenate([-cut.coefficients, [1.0]]) for cut in pool.cuts]
    rhs = [cut.constant for cut in pool.cuts]
    senses = ["<="] * n_cuts
    if pool.extra is not None:
        for g_row, sense, g in zip(pool.extra.G, pool.extra.senses, pool.extra.g):
            rows.append(np.concatenate([g_row, [0.0]]))
            rhs.append(g)
            senses.append(sense)

    c = np.zeros(K + 1)
    c[K] = 1.0
    lp = LinearProgram(
        c=c,
        A=np.vstack(rows),
        b=np.asarray(rhs, dtype=float),
        senses=senses,
        lower=np.concatenate([np.zeros(K), [-np.inf]]),
        upper=np.concatenate([box, [np.inf]]),
        maximize=True,
    )
    sol = solve_lp(lp)
    if sol.status is LpStatus.UNBOUNDED:
        raise MasterUnboundedError(
            "problema master illimitato: aggiungere un taglio limitante (punto iniziale stretto) o un box su mu finito"
        )
    if sol.status is LpStatus.INFEASIBLE:
        raise MasterUnboundedError("problema master non ammissibile: vincoli aggiuntivi su mu incoerenti")

    mu = np.clip(sol.x[:K], 0.0, box)
    z = float(sol.x[K])
    kappa = np.clip(sol.duals[:n_cuts], 0.0, None)
    finite = np.isfinite(box)
    box_active = bool(np.any(finite & (mu >= box * (1 - 1e-9)) & (box > 0)))

    pool.mu, pool.z, pool.kappa = mu, z, kappa
    return MasterResult(mu, z, kappa, degenerate=False, box_active=box_active)


def primal_recovery(pool: CutPool, tol: float = 1e-8) -> Allocation:
    """
    Combinazione convessa dei punti generatori pesata con kappa.

    Raises:
        RecoveryError: kappa assente o con somma diversa da 1
    """
    if pool.kappa is None or pool.kappa.shape[0] != len(pool.cuts):
        raise RecoveryError("pesi kappa non disponibili: risolvere prima il master")
    total = float(pool.kappa.sum())
    if abs(total - 1.0) > tol:
        raise RecoveryError(f"somma dei pesi kappa = {total:.12g}, attesa 1")
    weights = pool.kappa / total
    used = [j for j in range(len(pool.cuts)) if weights[j] > 0]
    return Allocation.combine([pool.cuts[j].generator for j in used], [weights[j] for j in used])


def run(oracle: Callable[[np.ndarray], OracleOutput], K: int,
        initial_cut: Optional[Cut] = None, initial_mu: Optional[np.ndarray] = None,
        mu_box: Union[float, np.ndarray] = np.inf, extra: Optional[MuConstraints] = None,
        tol_gap: float = 1e-6, max_iter: Optional[int] = None) -> CutPlaneResult:
    """
    Esegue il metodo dei piani di taglio.

    Args:
        oracle: Funzione mu -> OracleOutput (valore di h e nuovo taglio)
        K: Numero di moltiplicatori
        initial_cut: Taglio da un punto primale strettamente ammissibile
        initial_mu: Punto in cui valutare l'oracolo prima del primo master
        mu_box: Limite superiore per mu (scalare o vettore)
        extra: Vincoli lineari aggiuntivi sui moltiplicatori
        tol_gap: Tolleranza relativa z - h <= tol_gap (1 + |h|)
        max_iter: Numero massimo di risoluzioni del master (default 50 K)

    Returns:
        CutPlaneResult con l'allocazione recuperata
    """
    max_iter = max_iter if max_iter is not None else 50 * K
    pool = CutPool(K, mu_box, extra)
    if initial_cut is not None:
        pool.add(initial_cut)
    if initial_mu is not None:
        first = oracle(np.asarray(initial_mu, dtype=float))
        pool.add(first.cut)

    trace: List[Dict[str, Any]] = []
    best_h, best_mu = -np.inf, np.zeros(K)
    converged = False
    last: Optional[OracleOutput] = None
    master: Optional[MasterResult] = None
    l = 0

    while l < max_iter:
        master = master_solve(pool)
        last = oracle(master.mu)
        h = last.value
        if h > best_h:
            best_h, best_mu = h, master.mu.copy()
        gap = master.z - h
        trace.append({"l": l, "z": master.z, "h": h, "gap": gap, "pattern": last.cut.pattern})
        logger.debug(f"Iterazione {l}: z={master.z:.10g} h={h:.10g} gap={gap:.3e} pattern={last.cut.pattern}")
        l += 1
        if gap <= tol_gap * (1.0 + abs(h)):
            converged = True
            break
        pool.add(last.cut)

    if master is None:
        raise RecoveryError("nessuna iterazione eseguita (max_iter = 0)")

    if not converged:
        logger.warning(f"Piani di taglio: limite di {max_iter} iterazioni, gap {trace[-1]['gap']:.3e}")
        # kappa deve riferirsi ai tagli presenti nel pool
        master = master_solve(pool)

    if master.degenerate:
        allocation = last.allocation
    else:
        allocation = primal_recovery(pool)

    if master.box_active:
        logger.warning("Box su mu attivo alla terminazione: il primale recuperato può non soddisfare la domanda")

    return CutPlaneResult(
        allocation=allocation,
        mu=master.mu,
        z=master.z,
        h=trace[-1]["h"],
        best_h=best_h,
        best_mu=best_mu,
        iterations=l,
        converged=converged,
        box_active=master.box_active,
        trace=trace,
        pool=pool,
    )


# === ESPORTAZIONE DELLA TRACCIA ===

def trace_to_frame(trace: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """Traccia delle iterazioni con colonne (l, z, h, gap, pattern)."""
    return pd.DataFrame(list(trace), columns=TRACE_COLUMNS)


def export_trace(trace: Sequence[Dict[str, Any]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = trace_to_frame(trace)
    if path.suffix.lower() == ".xlsx":
        df.to_excel(path, index=False)
    else:
        df.to_csv(path, index=False)
    return path
