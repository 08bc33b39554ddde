"""
Configurazione dell'applicazione
===============================

Gestisce percorsi, database di archivio e valori predefiniti del solutore.
"""

from pathlib import Path
from typing import Dict, Any, Optional


class Config:
    """Classe per la gestione delle configurazioni dell'applicazione."""

    def __init__(self, base_dir: Optional[Path] = None):
        """
        Inizializza la configurazione con i valori predefiniti.

        Args:
            base_dir: Directory radice per dati, cache e log (default: radice del progetto)
        """
        self.APP_NAME = "HetNet Energy Planner"
        self.VERSION = "1.0.0"

        # Percorsi
        self.BASE_DIR = Path(base_dir) if base_dir else Path(__file__).parent.parent
        self.DATA_DIR = self.BASE_DIR / "data"
        self.CACHE_DIR = self.DATA_DIR / "cache"
        self.LOG_DIR = self.BASE_DIR / "logs"

        # Database di archivio delle esecuzioni
        self.DATABASE_URL = f"sqlite:///{self.DATA_DIR}/hetnet_energy.db"

        # Riformulazione l1 pesata (ciclo esterno)
        self.EPSILON = 1e-3
        self.OUTER_TOL = 1e-4
        self.MAX_OUTER = 15
        self.RHO_OFF = 1e-4

        # Piani di taglio
        self.TOL_GAP = 1e-6
        self.MAX_ITER_PER_TP = 50  # max_iter = 50 * K
        self.MU_BOX_FACTOR = 1e3
        self.SHRINK = 0.5

        # Motore LP
        self.ENGINE = "cutplane"  # cutplane, direct
        self.BALANCE_ENGINE = None  # None: segue ENGINE
        self.LP_FEAS_TOL = 1e-9
        self.DENSE_LP_MAX_ENTRIES = 20_000_000

        # Tensore dei rate
        self.RATE_MODE = "deterministic"  # deterministic, monte_carlo
        self.MC_SAMPLES = 1000
        self.MC_SEED = 0
        self.PATTERN_CAP = 20

        self._create_directories()

    def _create_directories(self) -> None:
        """Crea le directory necessarie se non esistono."""
        directories = [
            self.DATA_DIR,
            self.CACHE_DIR,
            self.LOG_DIR
        ]

        for directory in directories:
            directory.mkdir(parents=True, exist_ok=True)

    def get_database_url(self) -> str:
        """Restituisce l'URL del database."""
        return self.DATABASE_URL

    def get_solver_settings(self, **overrides):
        """
        Restituisce i parametri del solutore energetico.

        Args:
            **overrides: Valori che sostituiscono i predefiniti (es. epsilon, engine)

        Returns:
            SolverParams validato
        """
        from .controllers.energy_solver import SolverParams

        valori = {
            "epsilon": self.EPSILON,
            "outer_tol": self.OUTER_TOL,
            "max_outer": self.MAX_OUTER,
            "rho_off": self.RHO_OFF,
            "tol_gap": self.TOL_GAP,
            "max_iter": None,
            "max_iter_per_tp": self.MAX_ITER_PER_TP,
            "mu_box_factor": self.MU_BOX_FACTOR,
            "shrink": self.SHRINK,
            "engine": self.ENGINE,
            "balance_engine": self.BALANCE_ENGINE,
            "lp_feas_tol": self.LP_FEAS_TOL,
            "dense_max_entries": self.DENSE_LP_MAX_ENTRIES,
        }
        valori.update({k: v for k, v in overrides.items() if v is not None})
        return SolverParams(**valori)

    def get_rate_settings(self) -> Dict[str, Any]:
        """Restituisce le impostazioni predefinite del tensore dei rate."""
        return {
            "mode": self.RATE_MODE,
            "samples": self.MC_SAMPLES,
            "seed": self.MC_SEED,
            "pattern_cap": self.PATTERN_CAP
        }
