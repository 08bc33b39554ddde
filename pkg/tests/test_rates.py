"""
Test per il tensore dei rate
============================

Invarianti del tensore, fading Monte Carlo, cache su disco ed export.
"""

import math

import numpy as np
import pandas as pd
import pytest
from scipy import integrate

from hetnet_energy.errors import RateCacheError
from hetnet_energy.models import rates as rates_module
from hetnet_energy.models.patterns import enumerate_all, reuse1
from hetnet_energy.models.rates import (
    RateMode,
    RateTensor,
    build_rate_tensor,
    cache_path,
    ergodic_rate,
    export_rates,
    load_or_build,
    monotonicity_violations,
    rates_to_frame,
    read_rate_cache,
    sinr,
    write_rate_cache,
)
from hetnet_energy.models.scenario import build_scenario


@pytest.fixture
def single_link():
    return build_scenario({
        "network": {
            "base_stations": [{"kind": "pico", "x": 0.0, "y": 0.0}],
            "test_points": [{"x": 200.0, "y": 0.0}],
        },
    })


class TestDeterministicRates:
    """Test per i rate con fading deterministico."""

    def test_zero_where_off(self, toy_rates, toy_patterns):
        """Test r_kbi = 0 per le BS spente e nessuna violazione."""
        assert toy_rates.validate(toy_patterns) == []
        assert np.all(toy_rates.rates[:, :, 0] == 0.0)

    def test_matches_scalar_formula(self, toy_scenario, toy_patterns, toy_rates):
        """Test il calcolo vettoriale coincide con W log2(1 + SINR)."""
        A = toy_patterns.activity
        for k in range(toy_scenario.K):
            for b in range(toy_scenario.B):
                for i in (3, 5, 7):
                    expected = toy_scenario.bandwidth * math.log2(1.0 + sinr(toy_scenario, A, k, b, i))
                    assert toy_rates.rates[k, b, i] == pytest.approx(expected, rel=1e-12)
                    assert ergodic_rate(toy_scenario, A, k, b, i) == pytest.approx(expected, rel=1e-12)

    def test_interference_monotonicity(self, toy_rates, toy_patterns):
        """Test spegnere un interferente non riduce mai un rate."""
        assert monotonicity_violations(toy_rates, toy_patterns) == 0

    def test_reuse1_is_lowest(self, toy_scenario, toy_rates):
        """Test il pattern tutto acceso dà il rate minimo per ogni collegamento attivo."""
        all_on = toy_rates.rates[:, :, -1]
        for b in range(toy_scenario.B):
            on = [i for i in range(8) if (i >> b) & 1]
            assert np.all(toy_rates.rates[:, b, on].min(axis=1) == all_on[:, b])

    def test_workers_do_not_change_result(self, toy_scenario, toy_patterns, toy_rates):
        """Test risultato identico con più thread."""
        parallel = build_rate_tensor(toy_scenario, toy_patterns, workers=3)

        np.testing.assert_array_equal(parallel.rates, toy_rates.rates)

    def test_pattern_mismatch(self, toy_scenario):
        """Test pattern per un numero di celle diverso."""
        with pytest.raises(ValueError):
            build_rate_tensor(toy_scenario, reuse1(2))


class TestInvariants:
    """Test per la verifica degli invarianti."""

    def test_micro_is_monotone(self, micro_tensor, micro_patterns):
        """Test micro-istanza senza violazioni."""
        assert monotonicity_violations(micro_tensor, micro_patterns) == 0

    def test_detects_violation(self, micro_rates, micro_patterns):
        """Test rate più basso senza interferente segnalato."""
        micro_rates[0, 0, 0] = 4.0
        tensor = RateTensor.from_array(micro_rates)

        assert monotonicity_violations(tensor, micro_patterns) == 1

    def test_negative_entry_reported(self, micro_rates):
        """Test rate negativo segnalato da validate."""
        micro_rates[1, 1, 1] = -3.0
        problems = RateTensor.from_array(micro_rates).validate()

        assert any("negativi" in p for p in problems)

    def test_leak_on_off_bs(self, micro_rates, micro_patterns):
        """Test rate non nullo su una BS spenta."""
        micro_rates[0, 1, 0] = 1.0
        problems = RateTensor.from_array(micro_rates).validate(micro_patterns)

        assert any("spente" in p for p in problems)


class TestMonteCarlo:
    """Test per il fading di Rayleigh."""

    def test_matches_numerical_integral(self, single_link):
        """Test media campionaria vicina a E[log2(1 + snr h)] con h ~ Exp(1)."""
        snr = float(single_link.tx_psd[0] * single_link.gains[0, 0] / single_link.noise_psd)
        integral, _ = integrate.quad(lambda x: math.log2(1.0 + snr * x) * math.exp(-x), 0.0, np.inf)
        mode = RateMode.monte_carlo(samples=100000, seed=5)
        tensor = build_rate_tensor(single_link, reuse1(1), mode)

        assert tensor.rates[0, 0, 0] == pytest.approx(single_link.bandwidth * integral, rel=1e-2)

    def test_seed_reproducible(self, toy_scenario, toy_patterns):
        """Test stesso seed, stesso tensore; seed diverso, tensore diverso."""
        a = build_rate_tensor(toy_scenario, toy_patterns, RateMode.monte_carlo(200, 1))
        b = build_rate_tensor(toy_scenario, toy_patterns, RateMode.monte_carlo(200, 1))
        c = build_rate_tensor(toy_scenario, toy_patterns, RateMode.monte_carlo(200, 2))

        np.testing.assert_array_equal(a.rates, b.rates)
        assert not np.array_equal(a.rates, c.rates)

    def test_monte_carlo_monotone(self, toy_scenario, toy_patterns):
        """Test monotonia anche con fading (estrazioni comuni ai pattern)."""
        tensor = build_rate_tensor(toy_scenario, toy_patterns, RateMode.monte_carlo(100, 0))

        assert monotonicity_violations(tensor, toy_patterns) == 0

    def test_invalid_mode(self):
        """Test parametri non validi."""
        with pytest.raises(ValueError):
            RateMode("rician")
        with pytest.raises(ValueError):
            RateMode.monte_carlo(samples=0)


class TestRateCache:
    """Test per il file di cache."""

    def test_write_and_read(self, toy_rates, tmp_path):
        """Test contenuto e provenienza preservati."""
        path = write_rate_cache(toy_rates, tmp_path / "rates.bin")
        loaded = read_rate_cache(path)

        np.testing.assert_array_equal(loaded.rates, toy_rates.rates)
        assert loaded.scenario_hash == toy_rates.scenario_hash
        assert loaded.pattern_hash == toy_rates.pattern_hash
        assert loaded.mode == toy_rates.mode

    def test_bad_magic(self, toy_rates, tmp_path):
        """Test intestazione non riconosciuta."""
        path = write_rate_cache(toy_rates, tmp_path / "rates.bin")
        payload = bytearray(path.read_bytes())
        payload[:4] = b"XXXX"
        path.write_bytes(bytes(payload))

        with pytest.raises(RateCacheError):
            read_rate_cache(path)

    def test_truncated(self, toy_rates, tmp_path):
        """Test file troncato."""
        path = write_rate_cache(toy_rates, tmp_path / "rates.bin")
        path.write_bytes(path.read_bytes()[:-8])

        with pytest.raises(RateCacheError):
            read_rate_cache(path)

    def test_load_or_build_reuses_cache(self, toy_scenario, toy_patterns, tmp_path):
        """Test secondo accesso servito dalla cache."""
        first = load_or_build(toy_scenario, toy_patterns, cache_dir=tmp_path)
        path = cache_path(tmp_path, toy_scenario, toy_patterns, RateMode.deterministic())
        assert path.exists()

        second = load_or_build(toy_scenario, toy_patterns, cache_dir=tmp_path)
        np.testing.assert_array_equal(first.rates, second.rates)

    def test_demand_variants_share_cache(self, toy_scenario, toy_patterns, tmp_path, monkeypatch):
        """Test domande diverse sulla stessa geometria: un solo file, nessun ricalcolo."""
        first = load_or_build(toy_scenario, toy_patterns, cache_dir=tmp_path)
        other = toy_scenario.with_demands(2e6)

        def no_rebuild(*args, **kwargs):
            raise AssertionError("tensore ricalcolato")

        monkeypatch.setattr(rates_module, "build_rate_tensor", no_rebuild)
        second = load_or_build(other, toy_patterns, cache_dir=tmp_path)

        assert cache_path(tmp_path, other, toy_patterns, RateMode.deterministic()) == \
            cache_path(tmp_path, toy_scenario, toy_patterns, RateMode.deterministic())
        assert len(list(tmp_path.glob("rates_*.bin"))) == 1
        np.testing.assert_array_equal(first.rates, second.rates)

    def test_geometry_changes_key(self, toy_config, toy_patterns, tmp_path):
        """Test punto di test spostato: chiave di cache diversa."""
        moved = dict(toy_config, network=dict(toy_config["network"]))
        moved["network"]["test_points"] = [dict(tp) for tp in toy_config["network"]["test_points"]]
        moved["network"]["test_points"][0]["x"] = 35.0
        mode = RateMode.deterministic()

        assert cache_path(tmp_path, build_scenario(moved), toy_patterns, mode) != \
            cache_path(tmp_path, build_scenario(toy_config), toy_patterns, mode)

    def test_corrupt_cache_rebuilt(self, toy_scenario, toy_patterns, tmp_path):
        """Test cache illeggibile sostituita da un nuovo calcolo."""
        path = cache_path(tmp_path, toy_scenario, toy_patterns, RateMode.deterministic())
        path.write_bytes(b"rotto")

        tensor = load_or_build(toy_scenario, toy_patterns, cache_dir=tmp_path)

        assert tensor.I == 8
        np.testing.assert_array_equal(read_rate_cache(path).rates, tensor.rates)


class TestExport:
    """Test per l'export tabellare."""

    def test_frame_layout(self, micro_tensor):
        """Test colonne (k, b, i, rate) in ordine row-major."""
        df = rates_to_frame(micro_tensor)

        assert list(df.columns) == ["k", "b", "i", "rate"]
        assert len(df) == 12
        assert df.iloc[0].tolist() == [0, 0, 0, 10.0]
        assert len(rates_to_frame(micro_tensor, nonzero_only=True)) == 8

    def test_csv(self, micro_tensor, tmp_path):
        """Test scrittura CSV."""
        path = export_rates(micro_tensor, tmp_path / "rates.csv")

        assert pd.read_csv(path)["rate"].sum() == pytest.approx(53.0)


@pytest.mark.slow
class TestFullNetworkRates:
    """Invarianti sul tensore completo della rete di default."""

    def test_invariants_on_full_tensor(self):
        """Test 15 celle, 50 punti di test, 2^15 pattern: nessuna violazione."""
        scenario = build_scenario({})
        patterns = enumerate_all(scenario.B)
        tensor = build_rate_tensor(scenario, patterns)

        assert tensor.rates.shape == (50, 15, 2 ** 15)
        assert tensor.validate(patterns) == []
        assert monotonicity_violations(tensor, patterns) == 0
