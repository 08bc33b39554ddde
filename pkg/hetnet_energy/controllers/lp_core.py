"""
Motore di Programmazione Lineare
================================

Simplesso primale denso a due fasi con regola di Dantzig e passaggio alla
regola di Bland in caso di stallo. Restituisce soluzione primale e prezzi
ombra delle righe (d obiettivo / d rhs), usati dal problema master e dal
recupero primale.

Per problemi troppo grandi per il tableau denso è disponibile il
simplesso duale di HiGHS tramite scipy, con la stessa convenzione sui duali.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ..errors import LpStallError
from ..models.allocation import Allocation, WeightedSolution

logger = logging.getLogger(__name__)

DEFAULT_FEAS_TOL = 1e-9
DEFAULT_DENSE_MAX_ENTRIES = 20_000_000

_PIVOT_TOL = 1e-11
_OPT_TOL = 1e-10


class LpStatus(str, Enum):
    """Esito di una risoluzione."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


_SENSES = ("<=", ">=", "=")


@dataclass
class LinearProgram:
    """
    Problema lineare in forma generale.

    min (o max) c^T x  s.t.  A x (<=, >=, =) b,  lower <= x <= upper
    """
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: Sequence[str]
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    maximize: bool = False
    names: Optional[Sequence[str]] = None
    row_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.shape[0]
        self.b = np.asarray(self.b, dtype=float).ravel()
        if sparse.issparse(self.A):
            self.A = sparse.csr_matrix(self.A, dtype=float)
            entries = self.A.data
        else:
            self.A = np.asarray(self.A, dtype=float).reshape(-1, n) if n else np.zeros((self.b.shape[0], 0))
            entries = self.A
        self.senses = list(self.senses)
        m = self.A.shape[0]
        if self.A.shape[1] != n or self.b.shape[0] != m or len(self.senses) != m:
            raise ValueError(f"dimensioni incoerenti: A {self.A.shape}, b {self.b.shape}, sensi {len(self.senses)}")
        if any(s not in _SENSES for s in self.senses):
            raise ValueError(f"senso di vincolo non valido in {self.senses}")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("coefficienti dell'obiettivo non finiti")
        if not (np.all(np.isfinite(entries)) and np.all(np.isfinite(self.b))):
            raise ValueError("matrice dei vincoli o termini noti non finiti")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.shape[0] != n or self.upper.shape[0] != n:
            raise ValueError("limiti delle variabili di dimensione errata")
        if np.any(self.lower > self.upper):
            raise ValueError("limite inferiore maggiore del superiore")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def dense_matrix(self) -> np.ndarray:
        return self.A.toarray() if sparse.issparse(self.A) else self.A

    def _var(self, j: int) -> str:
        return self.names[j] if self.names else f"x{j}"

    def to_lp_text(self) -> str:
        """Esporta il problema nel formato testuale LP di CPLEX (per il debug)."""

        def expr(coefs) -> str:
            terms = [f"{'+' if v >= 0 else '-'} {abs(v):.17g} {self._var(j)}"
                     for j, v in enumerate(coefs) if v != 0.0]
            if not terms:
                return "0 " + self._var(0) if self.n else "0"
            text = " ".join(terms)
            return text[2:] if text.startswith("+ ") else text

        lines = ["\\ Problema generato da hetnet_energy",
                 "Maximize" if self.maximize else "Minimize",
                 f" obj: {expr(self.c)}",
                 "Subject To"]
        A = self.dense_matrix()
        for r in range(self.m):
            name = self.row_names[r] if self.row_names else f"r{r}"
            lines.append(f" {name}: {expr(A[r])} {self.senses[r]} {self.b[r]:.17g}")
        lines.append("Bounds")
        for j in range(self.n):
            lo, up = self.lower[j], self.upper[j]
            if np.isinf(lo) and np.isinf(up):
                lines.append(f" {self._var(j)} free")
            elif lo == 0.0 and np.isinf(up):
                continue
            else:
                lo_txt = "-inf" if np.isinf(lo) else f"{lo:.17g}"
                up_txt = "+inf" if np.isinf(up) else f"{up:.17g}"
                lines.append(f" {lo_txt} <= {self._var(j)} <= {up_txt}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    """Soluzione primale e duale."""
    status: LpStatus
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    objective: float = float("nan")
    iterations: int = 0
    bound_duals: Optional[np.ndarray] = None
    backend: str = "dense"

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def residuals(self, lp: LinearProgram) -> np.ndarray:
        """Violazione di ogni riga (positiva se violata)."""
        lhs = lp.A @ self.x
        out = np.zeros(lp.m)
        for r, sense in enumerate(lp.senses):
            if sense == "<=":
                out[r] = lhs[r] - lp.b[r]
            elif sense == ">=":
                out[r] = lp.b[r] - lhs[r]
            else:
                out[r] = abs(lhs[r] - lp.b[r])
        return out


# === FORMA STANDARD ===

@dataclass
class _Standard:
    """Problema in forma min c^T y, M y (sensi) rhs, y >= 0 con mappa verso x."""
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: List[str]
    source: np.ndarray
    sign: np.ndarray
    offset: np.ndarray
    bound_vars: List[int]
    n_rows: int
    infeasible: bool = False
    scale: np.ndarray = field(default_factory=lambda: np.zeros(0))
    flip: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kept: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def _standardize(lp: LinearProgram, feas_tol: float) -> _Standard:
    source, sign, bound_cols, bound_caps, bound_vars = [], [], [], [], []
    offset = np.zeros(lp.n)
    for j in range(lp.n):
        lo, up = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            source.append(j)
            sign.append(1.0)
            if np.isfinite(up):
                bound_cols.append(len(source) - 1)
                bound_caps.append(up - lo)
                bound_vars.append(j)
        elif np.isfinite(up):
            offset[j] = up
            source.append(j)
            sign.append(-1.0)
        else:
            source.extend([j, j])
            sign.extend([1.0, -1.0])
    source_arr = np.asarray(source, dtype=int)
    sign_arr = np.asarray(sign, dtype=float)

    dense = lp.dense_matrix()
    A = dense[:, source_arr] * sign_arr if source else np.zeros((lp.m, 0))
    b = lp.b - dense @ offset
    c = lp.c[source_arr] * sign_arr if source else np.zeros(0)
    if lp.maximize:
        c = -c
    senses = list(lp.senses)

    if bound_cols:
        extra = np.zeros((len(bound_cols), A.shape[1]))
        extra[np.arange(len(bound_cols)), bound_cols] = 1.0
        A = np.vstack([A, extra])
        b = np.concatenate([b, bound_caps])
        senses += ["<="] * len(bound_cols)

    scale = np.abs(A).max(axis=1) if A.shape[1] else np.zeros(A.shape[0])
    kept = scale > 0
    infeasible = False
    for r in np.flatnonzero(~kept):
        s, rhs = senses[r], b[r]
        if (s == "<=" and rhs < -feas_tol) or (s == ">=" and rhs > feas_tol) or (s == "=" and abs(rhs) > feas_tol):
            infeasible = True

    scale = np.where(kept, scale, 1.0)
    A = A / scale[:, None]
    b = b / scale
    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip
    swap = {"<=": ">=", ">=": "<=", "=": "="}
    senses = [swap[s] if f < 0 else s for s, f in zip(senses, flip)]

    return _Standard(
        c=c, A=A[kept], b=b[kept], senses=[s for s, k in zip(senses, kept) if k],
        source=source_arr, sign=sign_arr, offset=offset, bound_vars=bound_vars,
        n_rows=lp.m, infeasible=infeasible, scale=scale, flip=flip, kept=kept,
    )


# === SIMPLESSO SU TABLEAU ===

class _Tableau:
    """Tableau denso B^-1 [A | slack | artificiali] con riga dei costi ridotti."""

    def __init__(self, std: _Standard):
        m, n = std.A.shape
        le = [r for r, s in enumerate(std.senses) if s == "<="]
        ge = [r for r, s in enumerate(std.senses) if s == ">="]
        art_rows = [r for r, s in enumerate(std.senses) if s != "<="]
        self.m = m
        self.n_struct = n
        n_slack = len(le) + len(ge)
        n_cols = n + n_slack + len(art_rows)
        T = np.zeros((m, n_cols))
        T[:, :n] = std.A
        self.identity_col = np.empty(m, dtype=int)
        col = n
        for r in range(m):
            if std.senses[r] == "<=":
                T[r, col] = 1.0
                self.identity_col[r] = col
                col += 1
            elif std.senses[r] == ">=":
                T[r, col] = -1.0
                col += 1
        self.artificial = np.zeros(n_cols, dtype=bool)
        for r in art_rows:
            T[r, col] = 1.0
            self.identity_col[r] = col
            self.artificial[col] = True
            col += 1
        self.T = T
        self.rhs = std.b.copy()
        self.basis = self.identity_col.copy()
        self.iterations = 0

    def pivot(self, p: int, q: int) -> None:
        T = self.T
        piv = T[p, q]
        T[p] /= piv
        self.rhs[p] /= piv
        column = T[:, q].copy()
        column[p] = 0.0
        T -= np.outer(column, T[p])
        self.rhs -= column * self.rhs[p]
        T[:, q] = 0.0
        T[p, q] = 1.0
        np.maximum(self.rhs, 0.0, out=self.rhs, where=self.rhs > -1e-13)
        self.basis[p] = q
        self.iterations += 1

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.T

    def optimize(self, cost: np.ndarray, allowed: np.ndarray, max_iter: int, phase: int) -> LpStatus:
        """Itera fino all'ottimo; UNBOUNDED se una colonna entrante non ha rapporto limitante."""
        d = self.reduced_costs(cost)
        bland = False
        stalled = 0
        while True:
            candidates = np.flatnonzero(allowed & (d < -_OPT_TOL))
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            if self.iterations >= max_iter:
                raise LpStallError(
                    "limite di iterazioni del simplesso raggiunto",
                    {"phase": phase, "iterations": self.iterations, "rows": self.m,
                     "columns": self.T.shape[1], "bland": bland,
                     "objective": float(cost[self.basis] @ self.rhs)},
                )
            q = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])

            column = self.T[:, q]
            rows = np.flatnonzero(column > _PIVOT_TOL)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = self.rhs[rows] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if bland:
                p = int(ties[np.argmin(self.basis[ties])])
            else:
                p = int(ties[np.argmax(column[ties])])

            if best <= 1e-12:
                stalled += 1
                if not bland and stalled >= 3 * max(1, self.m):
                    logger.debug(f"Fase {phase}: {stalled} pivot degeneri, passaggio alla regola di Bland")
                    bland = True
            else:
                stalled = 0

            self.pivot(p, q)
            d = d - d[q] * self.T[p]
            d[q] = 0.0

    def drive_out_artificials(self) -> None:
        """Porta fuori base le artificiali a livello zero; le righe ridondanti le mantengono."""
        for p in range(self.m):
            if not self.artificial[self.basis[p]]:
                continue
            row = np.abs(self.T[p]) * ~self.artificial
            q = int(np.argmax(row)) if row.size else 0
            if row.size and row[q] > 1e-9:
                self.pivot(p, q)


def solve_lp(lp: LinearProgram, feas_tol: float = DEFAULT_FEAS_TOL,
             max_iter: Optional[int] = None) -> LpSolution:
    """
    Risolve un LinearProgram con il simplesso denso a due fasi.

    Args:
        lp: Problema da risolvere
        feas_tol: Tolleranza di ammissibilità sulla fase 1 (dati scalati)
        max_iter: Limite sui pivot totali (default proporzionale alle dimensioni)

    Returns:
        LpSolution; i duali sono prezzi ombra d(obiettivo)/d(b) per riga

    Raises:
        LpStallError: limite di iterazioni raggiunto
    """
    std = _standardize(lp, feas_tol)
    if std.infeasible:
        return LpSolution(LpStatus.INFEASIBLE)

    tab = _Tableau(std)
    n_cols = tab.T.shape[1]
    if max_iter is None:
        max_iter = max(1000, 20 * (tab.m + n_cols))

    if tab.artificial.any():
        cost1 = tab.artificial.astype(float)
        tab.optimize(cost1, np.ones(n_cols, dtype=bool), max_iter, phase=1)
        infeasibility = float(cost1[tab.basis] @ tab.rhs)
        if infeasibility > feas_tol * max(1.0, float(np.abs(std.b).max(initial=0.0))):
            logger.debug(f"LP non ammissibile: residuo di fase 1 = {infeasibility:.3e}")
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)
        tab.drive_out_artificials()

    cost2 = np.zeros(n_cols)
    cost2[:tab.n_struct] = std.c
    status = tab.optimize(cost2, ~tab.artificial, max_iter, phase=2)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)

    values = np.zeros(n_cols)
    values[tab.basis] = tab.rhs
    x = std.offset.copy()
    np.add.at(x, std.source, std.sign * values[:tab.n_struct])

    d = tab.reduced_costs(cost2)
    y_kept = -d[tab.identity_col]
    y_all = np.zeros(std.kept.shape[0])
    y_all[std.kept] = y_kept
    y_all = y_all * std.flip / std.scale
    if lp.maximize:
        y_all = -y_all
    duals = y_all[:lp.m]
    bound_duals = np.zeros(lp.n)
    bound_duals[std.bound_vars] = y_all[lp.m:]

    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        duals=duals,
        objective=float(lp.c @ x),
        iterations=tab.iterations,
        bound_duals=bound_duals,
        backend="dense",
    )


def solve_lp_highs(lp: LinearProgram) -> LpSolution:
    """Risolve con il simplesso duale di HiGHS; stessi segni dei duali di solve_lp."""
    le = [r for r, s in enumerate(lp.senses) if s == "<="]
    ge = [r for r, s in enumerate(lp.senses) if s == ">="]
    eq = [r for r, s in enumerate(lp.senses) if s == "="]
    A = sparse.csr_matrix(lp.A)
    A_ub = sparse.vstack([A[le], -A[ge]]) if (le or ge) else None
    b_ub = np.concatenate([lp.b[le], -lp.b[ge]]) if (le or ge) else None
    A_eq = A[eq] if eq else None
    b_eq = lp.b[eq] if eq else None
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(up) else up)
              for lo, up in zip(lp.lower, lp.upper)]
    c = -lp.c if lp.maximize else lp.c

    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs-ds")
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, backend="highs")
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, backend="highs")
    if res.status != 0:
        raise LpStallError("HiGHS non ha raggiunto l'ottimo", {"status": int(res.status), "message": res.message})

    duals = np.zeros(lp.m)
    ub_marg = res.ineqlin.marginals if (le or ge) else np.zeros(0)
    duals[le] = ub_marg[:len(le)]
    duals[ge] = -ub_marg[len(le):]
    if eq:
        duals[eq] = res.eqlin.marginals
    if lp.maximize:
        duals = -duals
    iterations = int(getattr(res, "nit", 0) or 0)
    return LpSolution(LpStatus.OPTIMAL, x=np.asarray(res.x), duals=duals,
                      objective=float(lp.c @ res.x), iterations=iterations, backend="highs")


def solve(lp: LinearProgram, backend: str = "auto", feas_tol: float = DEFAULT_FEAS_TOL,
          max_dense_entries: int = DEFAULT_DENSE_MAX_ENTRIES) -> LpSolution:
    """Sceglie il backend: denso se il tableau sta nel limite, altrimenti HiGHS."""
    if backend == "dense":
        return solve_lp(lp, feas_tol)
    if backend == "highs":
        return solve_lp_highs(lp)
    if backend != "auto":
        raise ValueError(f"backend LP sconosciuto: {backend}")
    entries = lp.m * (lp.n + 2 * lp.m)
    if entries > max_dense_entries:
        logger.warning(f"Tableau denso di {entries} elementi oltre il limite {max_dense_entries}: uso HiGHS")
        return solve_lp_highs(lp)
    return solve_lp(lp, feas_tol)


# === FORMULAZIONE DIRETTA SULLE ALLOCAZIONI ===

class AllocationLayout:
    """
    Indicizzazione delle variabili alpha_kbi (solo dove r_kbi > 0) e pi_i.

    Costruisce i vincoli di capacità sum_k alpha_kbi <= pi_i e sum_i pi_i = 1
    e riconverte un vettore di soluzione in Allocation.
    """

    def __init__(self, rates: np.ndarray, extra_vars: int = 0):
        self.rates = rates
        self.K, self.B, self.I = rates.shape
        self.k_idx, self.b_idx, self.i_idx = np.nonzero(rates > 0)
        self.n_alpha = self.k_idx.size
        self.pi_offset = self.n_alpha
        self.extra_offset = self.n_alpha + self.I
        self.n_vars = self.extra_offset + extra_vars

    def capacity_rows(self) -> Tuple[sparse.csr_matrix, int]:
        """Righe sum_k alpha_kbi - pi_i <= 0 per le coppie (b, i) con variabili."""
        cell = self.b_idx * self.I + self.i_idx
        used, row_of = np.unique(cell, return_inverse=True)
        n_rows = used.size
        alpha_part = sparse.coo_matrix(
            (np.ones(self.n_alpha), (row_of, np.arange(self.n_alpha))), shape=(n_rows, self.n_vars))
        pi_part = sparse.coo_matrix(
            (-np.ones(n_rows), (np.arange(n_rows), self.pi_offset + used % self.I)), shape=(n_rows, self.n_vars))
        return (alpha_part + pi_part).tocsr(), n_rows

    def demand_rows(self) -> sparse.csr_matrix:
        """Righe sum_{b,i} r_kbi alpha_kbi (una per punto di test)."""
        values = self.rates[self.k_idx, self.b_idx, self.i_idx]
        return sparse.coo_matrix(
            (values, (self.k_idx, np.arange(self.n_alpha))), shape=(self.K, self.n_vars)).tocsr()

    def simplex_row(self) -> sparse.csr_matrix:
        row = np.zeros((1, self.n_vars))
        row[0, self.pi_offset:self.pi_offset + self.I] = 1.0
        return sparse.csr_matrix(row)

    def to_allocation(self, x: np.ndarray) -> Allocation:
        alpha = np.clip(x[:self.n_alpha], 0.0, None)
        pi = np.clip(x[self.pi_offset:self.pi_offset + self.I], 0.0, None)
        total = pi.sum()
        pi = pi / total if total > 0 else Allocation.zero(self.K, self.B, self.I).pi
        blocks: Dict[int, np.ndarray] = {}
        for k, b, i, v in zip(self.k_idx, self.b_idx, self.i_idx, alpha):
            if v > 0:
                blocks.setdefault(int(i), np.zeros((self.K, self.B)))[k, b] = v
        return Allocation(self.K, self.B, pi, blocks)


def build_direct_weighted_lp(rates: np.ndarray, weights: Sequence[float],
                             demands: Sequence[float]) -> Tuple[LinearProgram, AllocationLayout]:
    """Assembla il problema pesato completo su (alpha, pi)."""
    layout = AllocationLayout(rates)
    w = np.asarray(weights, dtype=float)
    d = np.asarray(demands, dtype=float)
    c = np.zeros(layout.n_vars)
    c[:layout.n_alpha] = w[layout.b_idx]

    capacity, n_cap = layout.capacity_rows()
    A = sparse.vstack([layout.demand_rows(), capacity, layout.simplex_row()]).tocsr()
    b = np.concatenate([d, np.zeros(n_cap), [1.0]])
    senses = [">="] * layout.K + ["<="] * n_cap + ["="]
    return LinearProgram(c, A, b, senses), layout


def solve_direct_weighted_lp(rates, weights: Sequence[float], demands: Sequence[float],
                             backend: str = "auto",
                             feas_tol: float = DEFAULT_FEAS_TOL,
                             max_dense_entries: int = DEFAULT_DENSE_MAX_ENTRIES) -> WeightedSolution:
    """
    Risolve esattamente min sum_b w_b rho_b con domanda, capacità e simplesso.

    Args:
        rates: RateTensor o array K x B x I
        weights: Pesi w_b > 0
        demands: Domande d_k >= 0
        backend: "auto", "dense" o "highs"

    Returns:
        WeightedSolution con status "optimal" o "infeasible"; i duali delle
        righe di domanda sono riportati in `mu`
    """
    r = rates.rates if hasattr(rates, "rates") else np.asarray(rates, dtype=float)
    d = np.asarray(demands, dtype=float)
    if np.any(d < 0):
        raise ValueError("le domande devono essere non negative")
    if np.any(r < 0):
        raise ValueError("il tensore dei rate contiene valori negativi")
    K, B, I = r.shape
    if not np.any(d > 0):
        return WeightedSolution(Allocation.zero(K, B, I), 0.0, "direct", mu=np.zeros(K))

    lp, layout = build_direct_weighted_lp(r, weights, d)
    sol = solve(lp, backend=backend, feas_tol=feas_tol, max_dense_entries=max_dense_entries)
    if sol.status is LpStatus.INFEASIBLE:
        return WeightedSolution(None, float("nan"), "direct", status="infeasible", iterations=sol.iterations)
    if sol.status is LpStatus.UNBOUNDED:
        raise LpStallError("problema pesato illimitato: pesi non positivi?", {"weights": list(map(float, weights))})

    allocation = layout.to_allocation(sol.x).compact_spectrum()
    return WeightedSolution(
        allocation=allocation,
        objective=allocation.objective(weights),
        engine="direct",
        iterations=sol.iterations,
        mu=np.clip(sol.duals[:K], 0.0, None),
    )
