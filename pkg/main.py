#!/usr/bin/env python3
"""
HetNet Energy Planner - Riga di Comando
=======================================

Attivazione a minima energia delle stazioni radio base in una rete
cellulare eterogenea con pattern di interferenza.

Caratteristiche principali:
- Generazione di scenari macro/pico con modello di path loss
- Tensore dei rate ergodici con cache su disco
- Ciclo l1 ripesato con piani di taglio o LP diretto
- Sweep di domanda contro Reuse-1, benchmark dei motori, suite di verifica

Per avviare:
    python main.py solve scenario.json --demand 1e6

Requisiti:
- Python 3.10+
- NumPy, SciPy
- SQLAlchemy, Pandas, openpyxl
- Altre dipendenze in requirements.txt
"""

import sys
import os
import logging

# Aggiungi la directory del progetto al path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from hetnet_energy.config import Config
from hetnet_energy.views.cli import main as cli_main


def setup_logging(config: Config, level: int = logging.INFO) -> logging.Logger:
    """Configura il sistema di logging (file in LOG_DIR, console su stderr)."""
    config.LOG_DIR.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(config.LOG_DIR / "hetnet_energy.log"),
            logging.StreamHandler(sys.stderr)
        ]
    )

    logger = logging.getLogger("HetnetEnergy")
    logger.debug("Sistema di logging inizializzato")
    return logger


def main() -> int:
    """Funzione principale dell'applicazione."""
    return cli_main(sys.argv[1:], setup_logging=setup_logging)


if __name__ == "__main__":
    # Verifica versione Python
    if sys.version_info < (3, 10):
        print("ERRORE: Python 3.10 o superiore è richiesto", file=sys.stderr)
        print(f"Versione corrente: {sys.version}", file=sys.stderr)
        sys.exit(1)

    sys.exit(main())
