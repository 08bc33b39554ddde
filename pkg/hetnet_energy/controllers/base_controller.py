"""
Base Controller
===============

Repository generico per i record di archivio delle esecuzioni.
"""

import logging
from typing import Any, Dict, Generic, List, Optional, Sequence, Type, TypeVar

from sqlalchemy.exc import SQLAlchemyError

from ..database.base import Base
from ..database.connection import DatabaseManager

T = TypeVar('T', bound=Base)


class BaseController(Generic[T]):
    """Controller base per la scrittura e la lettura dell'archivio."""

    def __init__(self, db_manager: DatabaseManager, model_class: Type[T]):
        """
        Inizializza il controller base.

        Args:
            db_manager: Gestore del database
            model_class: Classe del modello SQLAlchemy
        """
        self.db_manager = db_manager
        self.model_class = model_class
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def create(self, **kwargs) -> Optional[T]:
        """
        Crea un nuovo record.

        Args:
            **kwargs: Dati del record

        Returns:
            Il record creato o None se errore
        """
        try:
            with self.db_manager.get_session_context() as session:
                record = self.model_class(**kwargs)
                session.add(record)
                session.flush()
                session.refresh(record)
                self.logger.debug(f"Record creato: {record}")
                return record

        except SQLAlchemyError as e:
            self.logger.error(f"Errore nella creazione del record: {e}")
            return None

    def create_many(self, rows: Sequence[Dict[str, Any]]) -> int:
        """
        Crea più record in un'unica transazione.

        Returns:
            Numero di record scritti (0 se errore)
        """
        try:
            with self.db_manager.get_session_context() as session:
                session.add_all([self.model_class(**row) for row in rows])
            self.logger.info(f"{len(rows)} record {self.model_class.__name__} archiviati")
            return len(rows)

        except SQLAlchemyError as e:
            self.logger.error(f"Errore nell'archiviazione di {len(rows)} record: {e}")
            return 0

    def get_by_id(self, record_id: int) -> Optional[T]:
        """Recupera un record per ID."""
        try:
            with self.db_manager.get_session_context() as session:
                return session.query(self.model_class).filter(
                    self.model_class.id == record_id
                ).first()

        except SQLAlchemyError as e:
            self.logger.error(f"Errore nel recupero del record {record_id}: {e}")
            return None

    def get_all(self) -> List[T]:
        """Recupera tutti i record in ordine di inserimento."""
        try:
            with self.db_manager.get_session_context() as session:
                return session.query(self.model_class).order_by(self.model_class.id).all()

        except SQLAlchemyError as e:
            self.logger.error(f"Errore nel recupero di tutti i record: {e}")
            return []

    def filter_by(self, **kwargs) -> List[T]:
        """
        Recupera i record che soddisfano i criteri di uguaglianza.

        Args:
            **kwargs: Coppie colonna=valore (le colonne sconosciute sono ignorate)

        Returns:
            Lista dei record trovati
        """
        try:
            with self.db_manager.get_session_context() as session:
                query = session.query(self.model_class)
                for key, value in kwargs.items():
                    if hasattr(self.model_class, key):
                        query = query.filter(getattr(self.model_class, key) == value)
                return query.order_by(self.model_class.id).all()

        except SQLAlchemyError as e:
            self.logger.error(f"Errore nella ricerca {kwargs}: {e}")
            return []

    def count(self) -> int:
        """Conta i record."""
        try:
            with self.db_manager.get_session_context() as session:
                return session.query(self.model_class).count()

        except SQLAlchemyError as e:
            self.logger.error(f"Errore nel conteggio dei record: {e}")
            return 0
