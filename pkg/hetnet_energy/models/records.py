"""
Modelli di Archivio
===================

Record SQLAlchemy delle esecuzioni: risoluzioni singole, sweep di domanda
e benchmark dei motori.
"""

from sqlalchemy import Column, Integer, String, Text, Float, Boolean

from ..database.base import Base


class SolveRecord(Base):
    """Modello per una risoluzione archiviata."""

    __tablename__ = "solve_runs"

    # Provenienza
    scenario_hash = Column(String(64), nullable=False, index=True)
    pattern_hash = Column(String(64), nullable=True)
    patterns = Column(String(200), nullable=False)
    engine = Column(String(20), nullable=False)
    epsilon = Column(Float, nullable=False)

    # Esito
    demand_bps = Column(Float, nullable=True)
    feasible = Column(Boolean, default=False)
    total_power_w = Column(Float, nullable=True)
    active_bs = Column(String(500), nullable=True)  # id separati da virgola
    outer_iterations = Column(Integer, default=0)
    wall_ms = Column(Float, nullable=True)

    # Risultato completo in JSON
    result_json = Column(Text, nullable=True)

    def __repr__(self) -> str:
        return f"<SolveRecord(engine='{self.engine}', feasible={self.feasible}, power={self.total_power_w})>"

    def get_active_bs(self) -> list:
        """Restituisce gli id delle BS accese."""
        if not self.active_bs:
            return []
        return [int(v) for v in self.active_bs.split(",")]


class SweepRecord(Base):
    """Modello per una riga di sweep di domanda."""

    __tablename__ = "sweep_rows"

    scenario_hash = Column(String(64), nullable=False, index=True)
    demand = Column(Float, nullable=False)
    scheme = Column(String(200), nullable=False)
    repetition = Column(Integer, default=0)
    total_power_w = Column(Float, nullable=True)
    feasible = Column(Boolean, default=False)
    iterations = Column(Integer, default=0)
    wall_ms = Column(Float, nullable=True)

    def __repr__(self) -> str:
        return f"<SweepRecord(demand={self.demand}, scheme='{self.scheme}', feasible={self.feasible})>"


class BenchRecord(Base):
    """Modello per una misura di tempo di un motore."""

    __tablename__ = "bench_rows"

    scenario_hash = Column(String(64), nullable=False, index=True)
    n_patterns = Column(Integer, nullable=False)
    engine = Column(String(20), nullable=False)
    wall_ms = Column(Float, nullable=False)
    iterations = Column(Integer, default=0)

    def __repr__(self) -> str:
        return f"<BenchRecord(I={self.n_patterns}, engine='{self.engine}', wall_ms={self.wall_ms})>"
