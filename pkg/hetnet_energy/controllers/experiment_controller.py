"""
Controller per gli Esperimenti
==============================

Sweep di domanda (proposto contro Reuse-1), misure di tempo dei due motori
al variare del numero di pattern e suite di verifica su istanze casuali.
"""

import copy
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..database.connection import DatabaseManager
from ..errors import InfeasibleDemandError
from ..models.patterns import PatternSet, build_pattern_set, enumerate_all, sample
from ..models.rates import RateMode, RateTensor, build_rate_tensor, load_or_build, monotonicity_violations
from ..models.records import BenchRecord, SweepRecord
from ..models.scenario import Scenario, build_scenario, has_random_drop, scenario_hash, scenario_to_config
from .base_controller import BaseController
from .energy_solver import (
    SolverParams,
    count_active_patterns,
    minimize_energy,
    mm_weights,
    prop2_inner,
    solve_weighted_lp,
)
from .feasibility import is_feasible, rate_balance, strict_start
from .lp_core import solve_direct_weighted_lp

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["demand", "scheme", "total_power_W", "feasible", "iterations", "wall_ms"]
BENCH_COLUMNS = ["I", "engine", "wall_ms", "iterations"]


@dataclass
class SweepSpec:
    """Griglia di domande uniformi, schemi da confrontare e ripetizioni."""
    demands: Sequence[float]
    schemes: Sequence[str] = ("proposed", "reuse1")
    repetitions: int = 1
    proposed_patterns: str = "all"

    def __post_init__(self):
        self.demands = [float(v) for v in self.demands]
        if not self.demands:
            raise ValueError("la griglia di domande è vuota")
        if any(v < 0 for v in self.demands):
            raise ValueError("le domande devono essere non negative")
        if any(b <= a for a, b in zip(self.demands, self.demands[1:])):
            raise ValueError("la griglia di domande deve essere strettamente crescente")
        if not self.schemes:
            raise ValueError("nessuno schema da confrontare")
        for scheme in self.schemes:
            if scheme not in ("proposed", "reuse1"):
                raise ValueError(f"schema sconosciuto: {scheme}")
        if self.repetitions < 1:
            raise ValueError("servono almeno una ripetizione")


@dataclass
class VerifyReport:
    """Esito delle suite di verifica."""
    instances: int
    checks: Dict[str, int] = field(default_factory=dict)
    failures: Dict[str, List[str]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())

    def record(self, suite: str, ok: bool, detail: str = "") -> None:
        self.checks[suite] = self.checks.get(suite, 0) + 1
        self.failures.setdefault(suite, [])
        if not ok:
            self.failures[suite].append(detail)

    def to_text(self) -> str:
        lines = [f"Istanze: {self.instances}"]
        for warning in self.warnings:
            lines.append(f"ATTENZIONE: {warning}")
        for suite, count in self.checks.items():
            failed = self.failures.get(suite, [])
            state = "OK" if not failed else f"FALLITA ({len(failed)})"
            lines.append(f"{suite:<28} {count:>5} controlli  {state}")
            lines.extend(f"    - {msg}" for msg in failed[:5])
        lines.append("ESITO: " + ("superato" if self.passed else "fallito"))
        return "\n".join(lines)


# === ISTANZE CASUALI ===

def random_scenario(seed: int, B: int, K: int) -> Scenario:
    """Piccolo scenario con una macro al centro, B-1 pico e K punti di test."""
    config = {
        "network": {
            "n_macro": 1,
            "picos_per_macro": B - 1,
            "n_test_points": K,
            "cell_radius_m": 250.0,
            "min_pico_macro_distance_m": 40.0,
        },
        "seed": seed,
    }
    return build_scenario(config)


def random_instance(seed: int, max_B: int = 4, max_K: int = 6,
                    load: Optional[float] = None) -> Tuple[Scenario, PatternSet, RateTensor, np.ndarray]:
    """
    Istanza casuale ammissibile: scenario, tutti i 2^B pattern, rate e domande.

    Le domande sono una frazione `load` (casuale se assente) della massima
    domanda soddisfacibile con le stesse proporzioni.
    """
    rng = np.random.default_rng(seed)
    B = int(rng.integers(1, max_B + 1))
    K = int(rng.integers(1, max_K + 1))
    scenario = random_scenario(seed, B, K)
    patterns = enumerate_all(B)
    rates = build_rate_tensor(scenario, patterns)
    shape = rng.uniform(0.2, 1.0, size=K)
    balance = rate_balance(rates, shape)
    fraction = rng.uniform(0.2, 0.9) if load is None else load
    demands = fraction * balance.R_sum * balance.beta
    return scenario.with_demands(demands), patterns, rates, demands


def vertex_enumeration_value(mu: np.ndarray, w: np.ndarray, r: np.ndarray, d: np.ndarray) -> float:
    """Minimo dell'obiettivo interno sui vertici: un pattern, al più un punto di test per BS."""
    K, B, I = r.shape
    best = np.inf
    for i in range(I):
        for choice in itertools.product(range(K + 1), repeat=B):
            value = 0.0
            for b, k in enumerate(choice):
                if k < K:
                    value += w[b] - r[k, b, i] * mu[k]
            best = min(best, value)
    return float(best + d @ mu)


# === LAVORI DELLO SWEEP (ESEGUIBILI IN PROCESSI SEPARATI) ===

def _sweep_job(config: Dict[str, Any], scheme: str, repetition: int, demands: Sequence[float],
               params: SolverParams, mode: RateMode, proposed_patterns: str,
               cache_dir: Optional[str]) -> List[Dict[str, Any]]:
    config = copy.deepcopy(config)
    config["seed"] = int(config.get("seed", 0)) + repetition
    scenario = build_scenario(config)
    if mode.kind == "monte_carlo":
        mode = RateMode.monte_carlo(mode.samples, mode.seed + repetition)
    spec = "reuse1" if scheme == "reuse1" else proposed_patterns
    patterns = build_pattern_set(scenario, spec)
    rates = load_or_build(scenario, patterns, mode, cache_dir)

    rows = []
    for demand in demands:
        started = time.perf_counter()
        result = minimize_energy(scenario, patterns, rates, params, demands=np.full(scenario.K, demand))
        wall_ms = (time.perf_counter() - started) * 1000.0
        rows.append({
            "repetition": repetition,
            "demand": demand,
            "scheme": scheme,
            "total_power_W": result.total_power if result.feasible else float("nan"),
            "feasible": bool(result.feasible),
            "iterations": int(result.iterations),
            "wall_ms": wall_ms,
            "scenario_hash": scenario_hash(scenario),
        })
    return rows


class ExperimentController:
    """Controller per sweep, benchmark e verifiche."""

    def __init__(self, db_manager: Optional[DatabaseManager] = None,
                 cache_dir: Optional[Union[str, Path]] = None):
        """
        Inizializza il controller degli esperimenti.

        Args:
            db_manager: Gestore del database di archivio (opzionale)
            cache_dir: Directory della cache dei rate (opzionale)
        """
        self.db_manager = db_manager
        self.cache_dir = str(cache_dir) if cache_dir is not None else None
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        self.sweep_archive = BaseController(db_manager, SweepRecord) if db_manager else None
        self.bench_archive = BaseController(db_manager, BenchRecord) if db_manager else None

    # === SWEEP DI DOMANDA ===

    def sweep(self, scenario_config: Union[Scenario, Mapping[str, Any]], spec: SweepSpec,
              params: Optional[SolverParams] = None, mode: Optional[RateMode] = None,
              workers: Optional[int] = None) -> pd.DataFrame:
        """
        Esegue lo sweep: una riga per (ripetizione, domanda, schema).

        Args:
            scenario_config: Scenario o documento di configurazione; la
                ripetizione r usa il seed base + r; se il seed non cambia lo
                scenario e i rate sono deterministici si esegue una ripetizione
            spec: Griglia, schemi e ripetizioni
            params: Parametri del solutore
            mode: Modalità dei rate
            workers: Processi paralleli (None o 1 per l'esecuzione sequenziale)

        Returns:
            DataFrame con le colonne SWEEP_COLUMNS, in ordine deterministico
        """
        params = params or SolverParams()
        mode = mode or RateMode.deterministic()
        if isinstance(scenario_config, Scenario):
            config = scenario_to_config(scenario_config)
        else:
            config = copy.deepcopy(dict(scenario_config))

        repetitions = spec.repetitions
        if repetitions > 1 and mode.kind == "deterministic" and not has_random_drop(config):
            self.logger.warning(f"Scenario senza parti casuali: {repetitions} ripetizioni ridotte a 1")
            repetitions = 1

        jobs = [(config, scheme, rep, spec.demands, params, mode, spec.proposed_patterns, self.cache_dir)
                for rep in range(repetitions) for scheme in spec.schemes]
        if workers and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_sweep_job, *zip(*jobs)))
        else:
            results = [_sweep_job(*job) for job in jobs]

        order = {scheme: n for n, scheme in enumerate(spec.schemes)}
        rows = sorted(itertools.chain.from_iterable(results),
                      key=lambda row: (row["repetition"], row["demand"], order[row["scheme"]]))
        self.logger.info(f"Sweep completato: {len(rows)} righe")

        if self.sweep_archive is not None:
            self.sweep_archive.create_many([{
                "scenario_hash": row["scenario_hash"],
                "demand": row["demand"],
                "scheme": row["scheme"],
                "repetition": row["repetition"],
                "total_power_w": None if np.isnan(row["total_power_W"]) else row["total_power_W"],
                "feasible": row["feasible"],
                "iterations": row["iterations"],
                "wall_ms": row["wall_ms"],
            } for row in rows])

        return pd.DataFrame(rows, columns=SWEEP_COLUMNS)

    @staticmethod
    def max_feasible_demand(table: pd.DataFrame) -> Dict[str, float]:
        """Massima domanda ammissibile per schema (NaN se nessuna)."""
        out = {}
        for scheme, group in table.groupby("scheme", sort=False):
            feasible = group[group["feasible"]]
            out[scheme] = float(feasible["demand"].max()) if len(feasible) else float("nan")
        return out

    # === BENCHMARK DEI MOTORI ===

    def bench(self, scenario: Scenario, pattern_counts: Sequence[int],
              engines: Sequence[str] = ("cutplane", "direct"),
              params: Optional[SolverParams] = None, seed: int = 0) -> pd.DataFrame:
        """
        Misura il tempo di un problema pesato per ogni numero di pattern I.

        Il calcolo dei rate e il punto iniziale sono esclusi dalla misura.

        Returns:
            DataFrame con le colonne BENCH_COLUMNS
        """
        params = params or SolverParams()
        rows = []
        for I in pattern_counts:
            if I == 2 ** scenario.B:
                patterns = enumerate_all(scenario.B)
            else:
                patterns = sample(scenario.B, int(I), seed)
            rates = load_or_build(scenario, patterns, cache_dir=self.cache_dir)
            d = scenario.demands
            balance = rate_balance(rates, d, engine=params.resolved_balance_engine)
            if not is_feasible(balance, d):
                d = 0.5 * balance.R_sum * balance.beta
                self.logger.warning(f"I={I}: domanda non ammissibile, ridotta al 50% del massimo bilanciato")
            start = strict_start(balance, d, params.shrink)
            w = mm_weights(start.allocation.rho, scenario, params.epsilon)

            for engine in engines:
                run_params = replace(params, engine=engine)
                started = time.perf_counter()
                sol = solve_weighted_lp(rates, w, d, run_params, start=start)
                wall_ms = (time.perf_counter() - started) * 1000.0
                rows.append({"I": patterns.I, "engine": engine, "wall_ms": wall_ms, "iterations": sol.iterations})
                self.logger.info(f"Bench I={patterns.I} {engine}: {wall_ms:.1f} ms, {sol.iterations} iterazioni")

        if self.bench_archive is not None:
            digest = scenario_hash(scenario)
            self.bench_archive.create_many([{
                "scenario_hash": digest, "n_patterns": row["I"], "engine": row["engine"],
                "wall_ms": row["wall_ms"], "iterations": row["iterations"],
            } for row in rows])

        return pd.DataFrame(rows, columns=BENCH_COLUMNS)

    # === SUITE DI VERIFICA ===

    def verify(self, n_instances: int = 20, seed: int = 0, corrupt: bool = False,
               params: Optional[SolverParams] = None) -> VerifyReport:
        """
        Esegue le suite di proprietà su istanze casuali piccole.

        Suite: equivalenza cutplane/diretto, oracolo interno contro
        enumerazione dei vertici, sparsità, proprietà duali, discesa MM,
        equivalenza di ammissibilità e invarianti dei rate.

        Args:
            n_instances: Numero di istanze (0 = superamento a vuoto con avviso)
            seed: Seed di partenza
            corrupt: Inserisce un rate negativo nella prima istanza
            params: Parametri del solutore
        """
        params = params or SolverParams()
        report = VerifyReport(instances=n_instances)
        if n_instances <= 0:
            report.warnings.append("nessuna istanza richiesta: verifica superata a vuoto")
            self.logger.warning("Verifica senza istanze")
            return report

        for n in range(n_instances):
            inst_seed = seed + n
            scenario, patterns, rates, d = random_instance(inst_seed)
            if corrupt and n == 0:
                damaged = rates.rates.copy()
                damaged[tuple(np.argwhere(damaged > 0)[0])] = -1.0
                rates = rates.with_rates(damaged)
            self._verify_instance(report, inst_seed, scenario, patterns, rates, d, params)

        self.logger.info("Verifica " + ("superata" if report.passed else "fallita"))
        return report

    def _verify_instance(self, report: VerifyReport, inst_seed: int, scenario: Scenario,
                         patterns: PatternSet, rates: RateTensor, d: np.ndarray,
                         params: SolverParams) -> None:
        tag = f"seed {inst_seed}"
        problems = rates.validate(patterns)
        report.record("rate_invariants", not problems, f"{tag}: {problems}")
        if problems:
            return
        violations = monotonicity_violations(rates, patterns)
        report.record("interference_monotonicity", violations == 0, f"{tag}: {violations} violazioni")

        K, B, I = rates.rates.shape
        rng = np.random.default_rng(inst_seed)
        w = mm_weights(rng.uniform(0.0, 1.0, size=B), scenario, params.epsilon)

        # equivalenza dei motori, sparsità e proprietà duali
        direct = solve_weighted_lp(rates, w, d, replace(params, engine="direct"))
        cut = solve_weighted_lp(rates, w, d, replace(params, engine="cutplane"))
        scale = max(1.0, abs(direct.objective))
        report.record("oracle_equivalence", abs(cut.objective - direct.objective) <= 1e-6 * scale,
                      f"{tag}: cutplane {cut.objective:.10g} contro diretto {direct.objective:.10g}")
        active = count_active_patterns(direct.allocation)
        report.record("sparsity", active <= K + B + 1, f"{tag}: {active} pattern > K+B+1 = {K + B + 1}")
        zs = [row["z"] for row in cut.trace]
        monotone = all(b <= a + 1e-9 * max(1.0, abs(a)) for a, b in zip(zs, zs[1:]))
        bounded = all(row["h"] <= row["z"] + 1e-9 * max(1.0, abs(row["z"])) for row in cut.trace)
        report.record("duality", monotone and bounded, f"{tag}: z non monotono o h > z")

        # oracolo interno contro enumerazione dei vertici
        if I * B * K <= 200:
            r_n = rates.rates / rates.max_rate
            mu = rng.uniform(0.0, 2.0, size=K)
            _, _, value = prop2_inner(mu, w, r_n, d / rates.max_rate)
            oracle = vertex_enumeration_value(mu, w, r_n, d / rates.max_rate)
            report.record("prop2_vertex_enumeration", abs(value - oracle) <= 1e-12 * max(1.0, abs(oracle)),
                          f"{tag}: {value!r} contro {oracle!r}")

        # equivalenza di ammissibilità su domande casuali (anche eccessive)
        trial = d * rng.uniform(0.5, 3.0)
        balance = rate_balance(rates, trial)
        lp_status = solve_direct_weighted_lp(rates.rates / rates.max_rate, np.ones(B), trial / rates.max_rate).status
        report.record("feasibility_equivalence", is_feasible(balance, trial) == (lp_status == "optimal"),
                      f"{tag}: is_feasible={is_feasible(balance, trial)} stato LP={lp_status}")
        other = rate_balance(rates, trial, engine="cutplane")
        report.record("balance_engines", abs(other.R_sum - balance.R_sum) <= 1e-6 * max(1.0, balance.R_sum),
                      f"{tag}: R_sum {other.R_sum:.10g} contro {balance.R_sum:.10g}")

        # discesa del ciclo esterno
        try:
            result = minimize_energy(scenario, patterns, rates, params, demands=d)
        except InfeasibleDemandError as e:
            report.record("mm_descent", False, f"{tag}: {e}")
            return
        f = result.surrogate_trace
        descent = all(b <= a + 1e-9 * abs(a) for a, b in zip(f, f[1:]))
        report.record("mm_descent", result.feasible and descent, f"{tag}: traccia {f}")

    # === EXPORT ===

    def export_table(self, table: pd.DataFrame, path: Union[str, Path]) -> Path:
        """Esporta una tabella in CSV (o Excel se l'estensione è .xlsx)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix.lower() == ".xlsx":
            table.to_excel(path, index=False)
        else:
            table.to_csv(path, index=False)
        self.logger.info(f"Tabella esportata: {path} ({len(table)} righe)")
        return path
