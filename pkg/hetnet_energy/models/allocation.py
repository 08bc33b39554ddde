"""
Modello dell'Allocazione
========================

Quote di risorsa alpha_kbi, frazioni di spettro pi_i e utilizzi rho_b,
insieme ai risultati restituiti dai solutori.

Le quote sono memorizzate a blocchi: per ogni pattern con traffico una
matrice K x B, così gli insiemi con molti pattern restano leggeri.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np


def _rate_array(rates) -> np.ndarray:
    return rates.rates if hasattr(rates, "rates") else np.asarray(rates, dtype=float)


class Allocation:
    """Punto dell'insieme ammissibile: (alpha, pi) e utilizzi derivati."""

    def __init__(self, K: int, B: int, pi: Sequence[float],
                 blocks: Optional[Mapping[int, np.ndarray]] = None):
        self.K = int(K)
        self.B = int(B)
        self.pi = np.asarray(pi, dtype=float).copy()
        self.blocks: Dict[int, np.ndarray] = {}
        for i, block in sorted((blocks or {}).items()):
            block = np.asarray(block, dtype=float)
            if block.shape != (self.K, self.B):
                raise ValueError(f"blocco del pattern {i} con forma {block.shape}, attesa {(self.K, self.B)}")
            if not 0 <= i < self.I:
                raise ValueError(f"indice di pattern fuori intervallo: {i}")
            if np.any(block != 0.0):
                self.blocks[int(i)] = block.copy()

    @property
    def I(self) -> int:
        return self.pi.shape[0]

    # === COSTRUTTORI ===

    @classmethod
    def zero(cls, K: int, B: int, I: int) -> "Allocation":
        """Nessun traffico, tutto lo spettro al primo pattern."""
        pi = np.zeros(I)
        pi[0] = 1.0
        return cls(K, B, pi)

    @classmethod
    def from_dense(cls, alpha: np.ndarray, pi: Sequence[float]) -> "Allocation":
        alpha = np.asarray(alpha, dtype=float)
        K, B, I = alpha.shape
        blocks = {i: alpha[:, :, i] for i in range(I) if np.any(alpha[:, :, i] != 0.0)}
        return cls(K, B, pi, blocks)

    @classmethod
    def single_pattern(cls, K: int, B: int, I: int, i: int, block: np.ndarray) -> "Allocation":
        pi = np.zeros(I)
        pi[i] = 1.0
        return cls(K, B, pi, {i: block})

    @staticmethod
    def combine(allocations: Sequence["Allocation"], weights: Sequence[float]) -> "Allocation":
        """Combinazione lineare sum_j weights_j * allocazione_j."""
        if not allocations:
            raise ValueError("nessuna allocazione da combinare")
        first = allocations[0]
        pi = np.zeros(first.I)
        blocks: Dict[int, np.ndarray] = {}
        for alloc, weight in zip(allocations, weights):
            if weight == 0.0:
                continue
            pi += weight * alloc.pi
            for i, block in alloc.blocks.items():
                if i in blocks:
                    blocks[i] = blocks[i] + weight * block
                else:
                    blocks[i] = weight * block
        return Allocation(first.K, first.B, pi, blocks)

    # === GRANDEZZE DERIVATE ===

    def to_dense(self) -> np.ndarray:
        alpha = np.zeros((self.K, self.B, self.I))
        for i, block in self.blocks.items():
            alpha[:, :, i] = block
        return alpha

    def alpha(self, k: int, b: int, i: int) -> float:
        block = self.blocks.get(i)
        return float(block[k, b]) if block is not None else 0.0

    def items(self) -> Iterable[Tuple[int, int, int, float]]:
        """Terne (k, b, i) con quota non nulla."""
        for i, block in self.blocks.items():
            for k, b in zip(*np.nonzero(block)):
                yield int(k), int(b), i, float(block[k, b])

    @property
    def rho(self) -> np.ndarray:
        rho = np.zeros(self.B)
        for block in self.blocks.values():
            rho += block.sum(axis=0)
        return rho

    def achieved_rates(self, rates) -> np.ndarray:
        """Rate totale per punto di test: sum_{b,i} alpha_kbi r_kbi."""
        r = _rate_array(rates)
        achieved = np.zeros(self.K)
        for i, block in self.blocks.items():
            achieved += (block * r[:, :, i]).sum(axis=1)
        return achieved

    def objective(self, weights: Sequence[float]) -> float:
        return float(np.dot(np.asarray(weights, dtype=float), self.rho))

    def active_patterns(self, tol: float = 0.0) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.pi > tol)]

    def theta(self) -> Dict[int, np.ndarray]:
        """Quote per pattern theta = alpha / pi sui pattern con spettro."""
        return {i: block / self.pi[i] for i, block in self.blocks.items() if self.pi[i] > 0}

    def validate(self, rates=None, demands: Optional[Sequence[float]] = None,
                 tol: float = 1e-8) -> List[str]:
        """
        Verifica l'appartenenza all'insieme ammissibile.

        Args:
            rates: Tensore dei rate, per il controllo della domanda
            demands: Domande d_k; richiede rates
            tol: Tolleranza assoluta

        Returns:
            Lista di violazioni (vuota se valida)
        """
        problems = []
        if np.any(self.pi < -tol):
            problems.append("frazioni di spettro negative")
        if abs(self.pi.sum() - 1.0) > tol:
            problems.append(f"somma delle frazioni di spettro {self.pi.sum():.12g} diversa da 1")
        for i, block in self.blocks.items():
            if np.any(block < -tol):
                problems.append(f"quote negative nel pattern {i}")
            excess = block.sum(axis=0) - self.pi[i]
            if np.any(excess > tol):
                problems.append(f"capacità superata nel pattern {i} (eccesso {excess.max():.3g})")
        rho = self.rho
        if np.any(rho > 1.0 + tol):
            problems.append("utilizzo di BS maggiore di 1")
        if demands is not None and rates is not None:
            d = np.asarray(demands, dtype=float)
            residual = self.achieved_rates(rates) - d
            scale = max(1.0, float(d.max()) if d.size else 1.0)
            short = np.flatnonzero(residual < -tol * scale)
            if short.size:
                problems.append(f"domanda non soddisfatta per i punti di test {short.tolist()}")
        return problems

    # === TRASFORMAZIONI ===

    def scaled(self, factor: float) -> "Allocation":
        """Quote moltiplicate per factor, spettro invariato."""
        return Allocation(self.K, self.B, self.pi, {i: factor * b for i, b in self.blocks.items()})

    def compact_spectrum(self, tol: float = 0.0) -> "Allocation":
        """
        Sposta lo spettro dei pattern senza traffico sul pattern attivo più usato.

        Obiettivo e ammissibilità non cambiano; il supporto non cresce.
        """
        carrying = [i for i, block in self.blocks.items() if np.any(block > tol)]
        candidates = carrying or self.active_patterns()
        if not candidates:
            return Allocation(self.K, self.B, self.pi, self.blocks)
        target = min(candidates, key=lambda i: (-self.pi[i], i))
        pi = np.zeros(self.I)
        for i in carrying:
            pi[i] = self.pi[i]
        pi[target] += self.pi.sum() - pi.sum()
        return Allocation(self.K, self.B, pi, self.blocks)

    def lift(self, indices: Sequence[int], I_full: int) -> "Allocation":
        """Riporta un'allocazione su un sottoinsieme di pattern all'insieme completo."""
        indices = list(indices)
        pi = np.zeros(I_full)
        pi[indices] = self.pi
        return Allocation(self.K, self.B, pi, {indices[i]: block for i, block in self.blocks.items()})

    def to_dict(self, rates=None, tol: float = 0.0) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "pi": {str(i): float(self.pi[i]) for i in self.active_patterns(tol)},
            "rho": self.rho.tolist(),
            "alpha": [[k, b, i, v] for k, b, i, v in self.items()],
        }
        if rates is not None:
            data["achieved_rates"] = self.achieved_rates(rates).tolist()
        return data


@dataclass
class WeightedSolution:
    """Esito di un problema lineare pesato."""
    allocation: Optional[Allocation]
    objective: float
    engine: str
    status: str = "optimal"
    iterations: int = 0
    converged: bool = True
    mu: Optional[np.ndarray] = None
    trace: List[Dict[str, Any]] = field(default_factory=list)
    box_active: bool = False


@dataclass
class BalanceResult:
    """Esito del bilanciamento dei rate: R_sum massimo e allocazione."""
    R_sum: float
    allocation: Allocation
    beta: np.ndarray
    achieved: np.ndarray
    engine: str = "direct"
    iterations: int = 0

    def __post_init__(self):
        total = float(self.beta.sum())
        if np.any(self.beta < 0) or (total > 0 and abs(total - 1.0) > 1e-9):
            raise ValueError("beta deve essere non negativo con somma 1")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "R_sum": float(self.R_sum),
            "beta": self.beta.tolist(),
            "achieved_rates": self.achieved.tolist(),
            "engine": self.engine,
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class EnergyResult:
    """Esito della minimizzazione energetica."""
    feasible: bool
    allocation: Optional[Allocation] = None
    rho: Optional[np.ndarray] = None
    active_bs: List[int] = field(default_factory=list)
    total_power: float = float("nan")
    surrogate_trace: List[float] = field(default_factory=list)
    outer_trace: List[Dict[str, Any]] = field(default_factory=list)
    achieved_rates: Optional[np.ndarray] = None
    demands: Optional[np.ndarray] = None
    engine: str = "cutplane"
    iterations: int = 0
    converged: bool = False
    warnings: List[str] = field(default_factory=list)
    pattern_labels: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "feasible": self.feasible,
            "engine": self.engine,
            "total_power_W": None if not self.feasible else float(self.total_power),
            "active_bs": [int(b) for b in self.active_bs],
            "outer_iterations": self.iterations,
            "converged": self.converged,
            "surrogate_trace": [float(v) for v in self.surrogate_trace],
            "outer_trace": self.outer_trace,
            "warnings": list(self.warnings),
        }
        if self.demands is not None:
            data["demands_bps"] = self.demands.tolist()
        if self.allocation is not None:
            data["rho"] = self.rho.tolist() if self.rho is not None else self.allocation.rho.tolist()
            data["pi_support"] = [
                {
                    "pattern": i,
                    "fraction": float(self.allocation.pi[i]),
                    "label": self.pattern_labels[i] if i < len(self.pattern_labels) else None,
                }
                for i in self.allocation.active_patterns()
            ]
        if self.achieved_rates is not None:
            data["achieved_rates_bps"] = self.achieved_rates.tolist()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)
