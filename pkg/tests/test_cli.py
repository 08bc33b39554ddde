"""
Test per la riga di comando
===========================

Ogni test usa una directory dati temporanea e cattura l'uscita.
"""

import json
from io import StringIO

import pandas as pd
import pytest

from hetnet_energy.controllers.base_controller import BaseController
from hetnet_energy.database.connection import DatabaseManager
from hetnet_energy.models.records import SolveRecord
from hetnet_energy.views.cli import EXIT_INFEASIBLE, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def run(tmp_path):
    """Esegue la CLI con --data-dir temporanea; restituisce (codice, uscita)."""
    def _run(*argv):
        out = StringIO()
        code = main(["--data-dir", str(tmp_path), *argv], out=out)
        return code, out.getvalue()
    return _run


@pytest.fixture
def scenario_file(tmp_path, toy_config, run):
    config = tmp_path / "config.json"
    config.write_text(json.dumps(toy_config), encoding="utf-8")
    target = tmp_path / "scenario.json"
    code, _ = run("gen", str(config), "--out", str(target))
    assert code == EXIT_OK
    return target


class TestUsage:
    """Test per errori di utilizzo."""

    def test_help(self, run):
        """Test --help esce con successo."""
        assert run("--help")[0] == EXIT_OK

    def test_unknown_command(self, run):
        """Test sottocomando sconosciuto."""
        assert run("plot")[0] == EXIT_USAGE

    def test_missing_file(self, run, tmp_path):
        """Test scenario inesistente."""
        assert run("solve", str(tmp_path / "manca.json"))[0] == EXIT_USAGE

    def test_invalid_config(self, run, tmp_path):
        """Test configurazione con valore fuori dominio."""
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"network": {"n_test_points": -1}}), encoding="utf-8")

        assert run("gen", str(config), "--out", str(tmp_path / "s.json"))[0] == EXIT_USAGE

    def test_empty_sweep_grid(self, run, tmp_path, toy_config):
        """Test griglia di domande vuota."""
        config = tmp_path / "config.json"
        config.write_text(json.dumps(toy_config), encoding="utf-8")

        assert run("sweep", str(config), "--demands", "", "--out", str(tmp_path / "s.csv"))[0] == EXIT_USAGE


class TestGenAndRates:
    """Test per gen e rates."""

    def test_gen_writes_scenario(self, scenario_file):
        """Test file di scenario scritto."""
        doc = json.loads(scenario_file.read_text(encoding="utf-8"))

        assert len(doc["network"]["base_stations"]) == 3

    def test_rates_export(self, run, scenario_file, tmp_path):
        """Test export CSV del tensore e cache popolata."""
        out = tmp_path / "rates.csv"
        code, text = run("rates", str(scenario_file), "--out", str(out))

        assert code == EXIT_OK
        assert "I=8" in text
        assert len(pd.read_csv(out)) == 4 * 3 * 8
        assert any((tmp_path / "data" / "cache").iterdir())


class TestSolve:
    """Test per solve."""

    def test_zero_demand(self, run, scenario_file):
        """Test domanda nulla: potenza zero."""
        code, text = run("solve", str(scenario_file), "--demand", "0")
        result = json.loads(text)

        assert code == EXIT_OK
        assert result["feasible"]
        assert result["total_power_W"] == 0.0

    def test_absurd_demand(self, run, scenario_file):
        """Test domanda irraggiungibile: codice 3."""
        assert run("solve", str(scenario_file), "--demand", "1e12")[0] == EXIT_INFEASIBLE

    def test_output_and_trace(self, run, scenario_file, tmp_path):
        """Test file di risultato e traccia del ciclo esterno."""
        out, trace = tmp_path / "res.json", tmp_path / "trace.csv"
        code, _ = run("solve", str(scenario_file), "--demand", "1e5", "--engine", "direct",
                      "--out", str(out), "--trace", str(trace))

        assert code == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["engine"] == "direct"
        assert "f" in pd.read_csv(trace).columns

    def test_engines_agree(self, run, scenario_file):
        """Test stessa potenza con --engine direct e --engine cutplane."""
        powers = {}
        for engine in ("direct", "cutplane"):
            code, text = run("solve", str(scenario_file), "--demand", "1e6", "--engine", engine)
            assert code == EXIT_OK
            powers[engine] = json.loads(text)["total_power_W"]

        assert powers["cutplane"] == pytest.approx(powers["direct"], rel=1e-5)

    def test_balance_engine_flag(self, run, scenario_file):
        """Test bilanciamento iniziale diretto con il motore a piani di taglio."""
        code, text = run("solve", str(scenario_file), "--demand", "1e6", "--balance-engine", "direct")

        assert code == EXIT_OK
        assert json.loads(text)["engine"] == "cutplane"

    def test_demand_file(self, run, scenario_file, tmp_path):
        """Test domande per punto di test da file."""
        demand_file = tmp_path / "d.json"
        demand_file.write_text(json.dumps({"0": 1e5, "3": 2e5}), encoding="utf-8")
        code, text = run("solve", str(scenario_file), "--demand-file", str(demand_file))

        assert code == EXIT_OK
        assert json.loads(text)["feasible"]

    def test_archive(self, run, scenario_file, tmp_path):
        """Test esecuzione archiviata nel database."""
        url = f"sqlite:///{tmp_path}/runs.db"
        assert run("--db", url, "solve", str(scenario_file), "--demand", "1e5")[0] == EXIT_OK

        manager = DatabaseManager()
        manager.initialize(url)
        records = BaseController(manager, SolveRecord).get_all()
        manager.close()

        assert len(records) == 1
        assert records[0].feasible
        assert records[0].demand_bps == 1e5


class TestExperiments:
    """Test per sweep, bench e verify."""

    def test_sweep(self, run, tmp_path, toy_config):
        """Test CSV con una riga per (domanda, schema)."""
        config = tmp_path / "config.json"
        config.write_text(json.dumps(toy_config), encoding="utf-8")
        out = tmp_path / "sweep.csv"
        code, text = run("sweep", str(config), "--demands", "1e5,1e6", "--out", str(out))

        assert code == EXIT_OK
        assert len(pd.read_csv(out)) == 4
        assert "reuse1" in text

    def test_bench(self, run, scenario_file, tmp_path):
        """Test tabella dei tempi."""
        out = tmp_path / "bench.csv"
        code, _ = run("bench", str(scenario_file), "--counts", "4,8", "--out", str(out))

        assert code == EXIT_OK
        assert pd.read_csv(out)["I"].tolist() == [4, 4, 8, 8]

    def test_verify_empty(self, run):
        """Test zero istanze: superamento a vuoto."""
        code, text = run("verify", "--instances", "0")

        assert code == EXIT_OK
        assert "ATTENZIONE" in text

    def test_verify_corruption(self, run):
        """Test corruzione rilevata: codice 4."""
        assert run("verify", "--instances", "1", "--inject-corruption")[0] == EXIT_INTERNAL
