"""
HetNet Energy Planner
=====================

Minimizzazione della potenza di una rete cellulare eterogenea tramite
pattern di interferenza, l1 ripesato e piani di taglio.

Moduli principali:
- models: Scenario, pattern, rate, allocazioni e record di archivio
- controllers: Motori LP, piani di taglio, solutore energetico, esperimenti
- views: Interfaccia a riga di comando
- database: Gestione del database di archivio
"""

__version__ = "1.0.0"

# Importazioni principali
from .config import Config
from .database.connection import DatabaseManager
from .errors import HetnetError

__all__ = ["Config", "DatabaseManager", "HetnetError", "__version__"]
