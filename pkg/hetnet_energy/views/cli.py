"""
Interfaccia a Riga di Comando
=============================

Sottocomandi: gen, rates, solve, sweep, bench, verify.

Codici di uscita: 0 successo, 2 errore di utilizzo o di configurazione,
3 domanda non soddisfacibile, 4 errore interno del solutore.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import Config
from ..controllers.base_controller import BaseController
from ..controllers.energy_solver import minimize_energy
from ..controllers.experiment_controller import ExperimentController, SweepSpec
from ..database.connection import DatabaseManager
from ..errors import HetnetError, InfeasibleDemandError, ScenarioConfigError
from ..models.patterns import build_pattern_set
from ..models.rates import RateMode, export_rates, load_or_build, monotonicity_violations
from ..models.records import SolveRecord
from ..models.scenario import build_scenario, load_scenario, save_scenario, scenario_hash

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

logger = logging.getLogger(__name__)


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _name_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _read_json(path: str) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"File non trovato: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def build_parser() -> argparse.ArgumentParser:
    """Costruisce il parser con tutti i sottocomandi."""
    parser = argparse.ArgumentParser(
        prog="hetnet_energy",
        description="Attivazione a minima energia delle stazioni radio base in reti eterogenee",
    )
    parser.add_argument("--verbose", action="store_true", help="log a livello DEBUG")
    parser.add_argument("--data-dir", default=None, help="radice per dati, cache e log")
    parser.add_argument("--archive", action="store_true", help="archivia l'esecuzione nel database")
    parser.add_argument("--db", default=None, help="URL del database di archivio (implica --archive)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="genera uno scenario da una configurazione")
    gen.add_argument("config", help="configurazione JSON")
    gen.add_argument("--out", required=True, help="file di scenario da scrivere")
    gen.add_argument("--seed", type=int, default=None)

    solver_flags = argparse.ArgumentParser(add_help=False)
    solver_flags.add_argument("--engine", choices=["cutplane", "direct"], default=None)
    solver_flags.add_argument("--balance-engine", choices=["cutplane", "direct"], default=None,
                              help="motore del bilanciamento iniziale (default: --engine)")
    solver_flags.add_argument("--patterns", default="all", help="all, reuse1 o lista di strategie")
    solver_flags.add_argument("--epsilon", type=float, default=None)

    rate_flags = argparse.ArgumentParser(add_help=False)
    rate_flags.add_argument("--mode", choices=["deterministic", "monte_carlo"], default=None)
    rate_flags.add_argument("--samples", type=int, default=None)
    rate_flags.add_argument("--mc-seed", type=int, default=None)
    rate_flags.add_argument("--no-cache", action="store_true", help="non usare la cache dei rate")
    rate_flags.add_argument("--workers", type=int, default=None)

    rates = sub.add_parser("rates", parents=[rate_flags], help="precalcola il tensore dei rate")
    rates.add_argument("scenario")
    rates.add_argument("--patterns", default="all")
    rates.add_argument("--out", default=None, help="export CSV o xlsx del tensore")
    rates.add_argument("--nonzero-only", action="store_true")

    solve = sub.add_parser("solve", parents=[solver_flags, rate_flags], help="minimizza la potenza di rete")
    solve.add_argument("scenario")
    solve.add_argument("--demand", type=float, default=None, help="domanda uniforme in bit/s")
    solve.add_argument("--demand-file", default=None, help="mappa JSON id -> bit/s")
    solve.add_argument("--out", default=None, help="file JSON del risultato (default stdout)")
    solve.add_argument("--trace", default=None, help="CSV della traccia del ciclo esterno")

    sweep = sub.add_parser("sweep", parents=[solver_flags, rate_flags], help="sweep della domanda uniforme")
    sweep.add_argument("config", help="configurazione o scenario JSON")
    sweep.add_argument("--demands", type=_float_list, required=True, help="griglia crescente in bit/s")
    sweep.add_argument("--schemes", type=_name_list, default=["proposed", "reuse1"])
    sweep.add_argument("--repetitions", type=int, default=1)
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--out", required=True, help="CSV (o xlsx) delle righe")

    bench = sub.add_parser("bench", parents=[solver_flags], help="tempi dei motori al variare di I")
    bench.add_argument("scenario")
    bench.add_argument("--counts", type=_int_list, required=True, help="numeri di pattern, es. 64,512")
    bench.add_argument("--engines", type=_name_list, default=["cutplane", "direct"])
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", required=True)

    verify = sub.add_parser("verify", help="suite di proprietà su istanze casuali")
    verify.add_argument("--instances", type=int, default=20)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--inject-corruption", action="store_true")

    return parser


class CommandLineView:
    """Vista a riga di comando: un gestore per sottocomando."""

    def __init__(self, config: Config, db_manager: Optional[DatabaseManager] = None, out=None):
        self.config = config
        self.db_manager = db_manager
        self.out = out or sys.stdout
        self.experiments = ExperimentController(db_manager, cache_dir=config.CACHE_DIR)
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def dispatch(self, args: argparse.Namespace) -> int:
        handler: Callable[[argparse.Namespace], int] = getattr(self, f"cmd_{args.command}")
        return handler(args)

    def _echo(self, text: str) -> None:
        print(text, file=self.out)

    def _params(self, args: argparse.Namespace):
        return self.config.get_solver_settings(
            epsilon=getattr(args, "epsilon", None),
            engine=getattr(args, "engine", None),
            balance_engine=getattr(args, "balance_engine", None),
        )

    def _mode(self, args: argparse.Namespace) -> RateMode:
        defaults = self.config.get_rate_settings()
        kind = args.mode or defaults["mode"]
        if kind == "deterministic":
            return RateMode.deterministic()
        samples = args.samples if args.samples is not None else defaults["samples"]
        seed = args.mc_seed if args.mc_seed is not None else defaults["seed"]
        return RateMode.monte_carlo(samples, seed)

    def _cache_dir(self, args: argparse.Namespace) -> Optional[Path]:
        return None if getattr(args, "no_cache", False) else self.config.CACHE_DIR

    # === SOTTOCOMANDI ===

    def cmd_gen(self, args: argparse.Namespace) -> int:
        doc = _read_json(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        scenario = build_scenario(doc)
        save_scenario(scenario, args.out)
        self._echo(f"Scenario: B={scenario.B} ({len(scenario.macro_ids)} macro), K={scenario.K} -> {args.out}")
        return EXIT_OK

    def cmd_rates(self, args: argparse.Namespace) -> int:
        scenario = load_scenario(args.scenario)
        patterns = build_pattern_set(scenario, args.patterns, self.config.PATTERN_CAP)
        tensor = load_or_build(scenario, patterns, self._mode(args), self._cache_dir(args), args.workers)
        problems = tensor.validate(patterns)
        violations = monotonicity_violations(tensor, patterns)
        self._echo(f"Tensore dei rate: K={tensor.K}, B={tensor.B}, I={tensor.I}, max={tensor.max_rate:.6g} bit/s")
        for problem in problems:
            self._echo(f"ATTENZIONE: {problem}")
        if violations:
            self._echo(f"ATTENZIONE: {violations} violazioni di monotonia dell'interferenza")
        if args.out:
            export_rates(tensor, args.out, args.nonzero_only)
        return EXIT_OK if not problems else EXIT_INTERNAL

    def cmd_solve(self, args: argparse.Namespace) -> int:
        scenario = load_scenario(args.scenario)
        if args.demand is not None and args.demand_file is not None:
            raise ValueError("usare --demand oppure --demand-file, non entrambi")
        if args.demand is not None:
            scenario = scenario.with_demands(args.demand)
        elif args.demand_file is not None:
            mapping = {int(k): float(v) for k, v in _read_json(args.demand_file).items()}
            scenario = scenario.with_demands(mapping)

        params = self._params(args)
        patterns = build_pattern_set(scenario, args.patterns, self.config.PATTERN_CAP)
        rates = load_or_build(scenario, patterns, self._mode(args), self._cache_dir(args), args.workers)

        started = time.perf_counter()
        result = minimize_energy(scenario, patterns, rates, params)
        wall_ms = (time.perf_counter() - started) * 1000.0

        text = result.to_json()
        if args.out:
            path = Path(args.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + "\n", encoding="utf-8")
            self._echo(f"Risultato scritto in {path}")
        else:
            self._echo(text)
        if args.trace:
            self.experiments.export_table(pd.DataFrame(result.outer_trace), args.trace)

        if self.db_manager is not None:
            uniform = scenario.demands
            BaseController(self.db_manager, SolveRecord).create(
                scenario_hash=scenario_hash(scenario),
                pattern_hash=patterns.content_hash(),
                patterns=args.patterns,
                engine=params.engine,
                epsilon=params.epsilon,
                demand_bps=float(uniform[0]) if np.all(uniform == uniform[0]) else None,
                feasible=result.feasible,
                total_power_w=result.total_power if result.feasible else None,
                active_bs=",".join(str(b) for b in result.active_bs),
                outer_iterations=result.iterations,
                wall_ms=wall_ms,
                result_json=text,
            )

        if not result.feasible:
            self.logger.warning("Domanda non soddisfacibile con i pattern scelti")
            return EXIT_INFEASIBLE
        return EXIT_OK

    def cmd_sweep(self, args: argparse.Namespace) -> int:
        doc = _read_json(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        spec = SweepSpec(args.demands, args.schemes, args.repetitions, proposed_patterns=args.patterns)
        cache_dir = self._cache_dir(args)
        self.experiments.cache_dir = str(cache_dir) if cache_dir is not None else None
        table = self.experiments.sweep(doc, spec, self._params(args), self._mode(args), args.workers)
        self.experiments.export_table(table, args.out)
        for scheme, demand in ExperimentController.max_feasible_demand(table).items():
            self._echo(f"{scheme}: domanda massima ammissibile {demand:.6g} bit/s")
        return EXIT_OK

    def cmd_bench(self, args: argparse.Namespace) -> int:
        scenario = load_scenario(args.scenario)
        table = self.experiments.bench(scenario, args.counts, args.engines, self._params(args), args.seed)
        self.experiments.export_table(table, args.out)
        self._echo(table.to_string(index=False))
        return EXIT_OK

    def cmd_verify(self, args: argparse.Namespace) -> int:
        report = self.experiments.verify(args.instances, args.seed, args.inject_corruption)
        self._echo(report.to_text())
        return EXIT_OK if report.passed else EXIT_INTERNAL


def main(argv: Optional[Sequence[str]] = None,
         setup_logging: Optional[Callable[[Config, int], Any]] = None, out=None) -> int:
    """
    Punto d'ingresso della CLI.

    Args:
        argv: Argomenti (default sys.argv[1:])
        setup_logging: Funzione (config, livello) che configura i log
        out: Flusso di uscita dei risultati (default stdout)

    Returns:
        Codice di uscita
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    config = Config(base_dir=Path(args.data_dir) if args.data_dir else None)
    if setup_logging is not None:
        setup_logging(config, logging.DEBUG if args.verbose else logging.INFO)

    db_manager = None
    try:
        if args.archive or args.db:
            db_manager = DatabaseManager()
            db_manager.initialize(args.db or config.get_database_url())
        return CommandLineView(config, db_manager, out).dispatch(args)

    except InfeasibleDemandError as e:
        logger.error(f"Domanda non soddisfacibile: {e}")
        return EXIT_INFEASIBLE
    except ScenarioConfigError as e:
        logger.error(f"Configurazione non valida ({e.field_path}): {e}")
        return EXIT_USAGE
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        logger.error(f"Errore di utilizzo: {e}")
        return EXIT_USAGE
    except HetnetError as e:
        logger.error(f"Errore del solutore: {e}", exc_info=True)
        return EXIT_INTERNAL
    except Exception as e:
        logger.error(f"Errore interno: {e}", exc_info=True)
        return EXIT_INTERNAL
    finally:
        if db_manager is not None:
            db_manager.close()
