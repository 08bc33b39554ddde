"""
Eccezioni
=========

Gerarchia degli errori applicativi; la CLI li traduce in codici di uscita.
"""

from typing import Any, Dict, Optional


class HetnetError(Exception):
    """Errore base dell'applicazione."""


class ScenarioConfigError(HetnetError, ValueError):
    """Documento di scenario non valido (parsing o vincoli sui campi)."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}")


class PatternCapError(HetnetError, ValueError):
    """Numero di celle oltre il limite per l'enumerazione completa."""


class RateCacheError(HetnetError):
    """File di cache dei rate illeggibile o incoerente."""


class InfeasibleDemandError(HetnetError):
    """La domanda di traffico non è soddisfacibile con i pattern dati."""


class LpStallError(HetnetError):
    """Il simplesso ha superato il limite di iterazioni."""

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        self.diagnostic = diagnostic or {}
        super().__init__(f"{message} ({self.diagnostic})")


class MasterUnboundedError(HetnetError):
    """Problema master illimitato: manca un taglio limitante o il box su mu."""


class RecoveryError(HetnetError):
    """Pesi duali del master incoerenti durante il recupero primale."""
