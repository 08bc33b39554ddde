"""
Test per l'archivio delle esecuzioni
====================================

Test unitari per il gestore del database, il repository generico e i
record di archivio.
"""

import pytest

from hetnet_energy.controllers.base_controller import BaseController
from hetnet_energy.database.connection import DatabaseManager
from hetnet_energy.models.records import BenchRecord, SolveRecord, SweepRecord


@pytest.fixture
def db_manager(tmp_path):
    manager = DatabaseManager()
    manager.initialize(f"sqlite:///{tmp_path}/test.db")
    yield manager
    manager.close()


def solve_row(**overrides):
    row = {
        "scenario_hash": "a" * 64,
        "patterns": "all",
        "engine": "cutplane",
        "epsilon": 1e-3,
        "demand_bps": 1e6,
        "feasible": True,
        "total_power_w": 812.5,
        "active_bs": "0,3,7",
        "outer_iterations": 4,
    }
    row.update(overrides)
    return row


class TestDatabaseManager:
    """Test per DatabaseManager."""

    def test_connection(self, db_manager):
        """Test connessione attiva dopo l'inizializzazione."""
        assert db_manager.test_connection()

    def test_not_initialized(self):
        """Test sessione senza inizializzazione."""
        manager = DatabaseManager()

        assert not manager.test_connection()
        with pytest.raises(RuntimeError):
            manager.get_session()

    def test_rollback_on_error(self, db_manager):
        """Test transazione annullata in caso di eccezione."""
        with pytest.raises(ValueError):
            with db_manager.get_session_context() as session:
                session.add(SolveRecord(**solve_row()))
                raise ValueError("interrotto")

        assert BaseController(db_manager, SolveRecord).count() == 0


class TestBaseController:
    """Test per il repository generico."""

    def test_create_and_get(self, db_manager):
        """Test creazione e lettura per id."""
        controller = BaseController(db_manager, SolveRecord)
        record = controller.create(**solve_row())

        assert record.id is not None
        assert controller.get_by_id(record.id).total_power_w == 812.5
        assert controller.get_by_id(999) is None

    def test_create_many_and_filter(self, db_manager):
        """Test scrittura in blocco e filtro per uguaglianza."""
        controller = BaseController(db_manager, SweepRecord)
        rows = [
            {"scenario_hash": "h", "demand": d, "scheme": s, "feasible": True, "iterations": 2}
            for d in (1e5, 1e6) for s in ("proposed", "reuse1")
        ]

        assert controller.create_many(rows) == 4
        assert controller.count() == 4
        assert len(controller.filter_by(scheme="reuse1")) == 2
        assert [r.demand for r in controller.get_all()] == [1e5, 1e5, 1e6, 1e6]

    def test_unknown_filter_ignored(self, db_manager):
        """Test colonne sconosciute ignorate dal filtro."""
        controller = BaseController(db_manager, BenchRecord)
        controller.create(scenario_hash="h", n_patterns=64, engine="direct", wall_ms=3.5)

        assert len(controller.filter_by(colonna="x")) == 1

    def test_missing_required_field(self, db_manager):
        """Test campo obbligatorio mancante: nessun record."""
        controller = BaseController(db_manager, BenchRecord)

        assert controller.create(scenario_hash="h", engine="direct", wall_ms=1.0) is None
        assert controller.count() == 0


class TestRecords:
    """Test per i record di archivio."""

    def test_active_bs(self, db_manager):
        """Test lista delle BS accese."""
        record = BaseController(db_manager, SolveRecord).create(**solve_row())

        assert record.get_active_bs() == [0, 3, 7]
        assert SolveRecord(**solve_row(active_bs="")).get_active_bs() == []

    def test_to_dict(self, db_manager):
        """Test conversione con colonne comuni."""
        record = BaseController(db_manager, SolveRecord).create(**solve_row())
        data = record.to_dict()

        assert data["engine"] == "cutplane"
        assert data["created_at"] is not None
        assert SolveRecord.get_table_name() == "solve_runs"
