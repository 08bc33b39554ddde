"""
Test per il modello di scenario
===============================

Costruzione da configurazione, guadagni di canale, potenza operativa e
serializzazione.
"""

import json
import math

import numpy as np
import pytest

from hetnet_energy.errors import ScenarioConfigError
from hetnet_energy.models.scenario import (
    BsKind,
    build_scenario,
    channel_gain,
    has_random_drop,
    load_scenario,
    operational_power,
    save_scenario,
    rate_hash,
    scenario_hash,
    scenario_to_json,
)


class TestBuildScenario:
    """Test per build_scenario."""

    def test_default_layout(self):
        """Test configurazione predefinita: 3 macro, 12 pico, 50 punti di test."""
        scenario = build_scenario({})

        assert scenario.B == 15
        assert scenario.K == 50
        assert scenario.macro_ids == [0, 1, 2]
        assert all(bs.kind is BsKind.PICO for bs in scenario.bss[3:])

    def test_picos_inside_parent_disc(self):
        """Test pico entro il raggio della macro madre e oltre la distanza minima."""
        scenario = build_scenario({"seed": 11})

        for bs in scenario.bss[3:]:
            parent = scenario.bss[bs.parent]
            distance = math.dist(bs.position, parent.position)
            assert 75.0 <= distance <= 250.0 + 1e-9

    def test_same_seed_same_scenario(self):
        """Test determinismo: stesso seed, stesso JSON."""
        a = build_scenario({"seed": 7})
        b = build_scenario({"seed": 7})

        assert scenario_to_json(a) == scenario_to_json(b)
        assert scenario_hash(a) == scenario_hash(b)

    def test_different_seed_changes_drop(self):
        """Test seed diversi producono scenari diversi."""
        assert scenario_hash(build_scenario({"seed": 1})) != scenario_hash(build_scenario({"seed": 2}))

    def test_explicit_lists(self, toy_scenario):
        """Test liste esplicite di BS e punti di test."""
        assert toy_scenario.B == 3
        assert toy_scenario.K == 4
        assert toy_scenario.bss[1].parent == 0
        np.testing.assert_allclose(toy_scenario.demands, 1e6)

    def test_negative_demand_rejected(self):
        """Test domanda negativa segnalata con il percorso del campo."""
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario({"demand": {"rate_bps": -1.0}})

        assert info.value.field_path == "demand.rate_bps"

    def test_zero_test_points_rejected(self):
        """Test K = 0 non ammesso."""
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario({"network": {"n_test_points": 0}})

        assert "n_test_points" in info.value.field_path

    def test_invalid_json_rejected(self):
        """Test documento JSON malformato."""
        with pytest.raises(ScenarioConfigError):
            build_scenario("{non json")

    def test_with_demands_mapping(self, toy_scenario):
        """Test sostituzione parziale delle domande con mappa id -> bit/s."""
        updated = toy_scenario.with_demands({1: 5e6})

        assert updated.demands[1] == 5e6
        assert updated.demands[0] == 1e6
        assert toy_scenario.demands[1] == 1e6


class TestChannelGain:
    """Test per il guadagno di canale."""

    def test_gain_matches_path_loss(self, toy_scenario):
        """Test G = 10^(-PL/10) senza shadowing."""
        d = math.dist(toy_scenario.bss[0].position, toy_scenario.tps[0].position)
        expected = 10 ** (-(128.1 + 37.6 * math.log10(d / 1000.0)) / 10.0)

        assert channel_gain(toy_scenario, 0, 0) == pytest.approx(expected, rel=1e-12)

    def test_min_distance_clamp(self):
        """Test distanza limitata inferiormente a 10 m."""
        scenario = build_scenario({
            "network": {
                "base_stations": [{"kind": "macro", "x": 0.0, "y": 0.0}],
                "test_points": [{"x": 1.0, "y": 0.0}],
            },
        })
        expected = 10 ** (-(128.1 + 37.6 * math.log10(0.01)) / 10.0)

        assert channel_gain(scenario, 0, 0) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("kind", ["macro", "pico"])
    def test_non_increasing_with_distance(self, kind):
        """Test guadagno non crescente allontanandosi dalla BS."""
        distances = [0.0, 5.0, 10.0, 50.0, 120.0, 480.0, 2000.0]
        scenario = build_scenario({
            "network": {
                "base_stations": [{"kind": kind, "x": 0.0, "y": 0.0}],
                "test_points": [{"x": d, "y": 0.0} for d in distances],
            },
        })
        gains = [channel_gain(scenario, 0, k) for k in range(scenario.K)]

        assert all(b <= a for a, b in zip(gains, gains[1:]))
        assert gains[0] == gains[2]
        assert gains[-1] < gains[3]

    def test_out_of_range(self, toy_scenario):
        """Test indici fuori intervallo."""
        with pytest.raises(IndexError):
            channel_gain(toy_scenario, 5, 0)


class TestOperationalPower:
    """Test per il modello di potenza operativa."""

    def test_linear_model(self):
        """Test P_OP = slope * P_tx + offset."""
        assert operational_power("pico", 1.0) == pytest.approx(5.5 + 32.0)
        assert operational_power(BsKind.MACRO, 40.0) == pytest.approx(22.6 / 3 * 40.0 + 412.4 / 3)

    def test_coefficient_override(self):
        """Test coefficienti personalizzati."""
        assert operational_power("pico", 2.0, {"slope": 1.0, "offset_w": 0.5}) == pytest.approx(2.5)

    def test_negative_power_rejected(self):
        """Test potenza trasmessa negativa."""
        with pytest.raises(ValueError):
            operational_power("macro", -1.0)


class TestSerialization:
    """Test per salvataggio e caricamento."""

    def test_save_and_load(self, toy_scenario, tmp_path):
        """Test il file salvato ricostruisce lo stesso scenario."""
        path = save_scenario(toy_scenario, tmp_path / "scenario.json")
        loaded = load_scenario(path)

        assert scenario_hash(loaded) == scenario_hash(toy_scenario)
        assert json.loads(path.read_text())["seed"] == 3

    def test_missing_file(self, tmp_path):
        """Test file inesistente."""
        with pytest.raises(FileNotFoundError):
            load_scenario(tmp_path / "assente.json")


class TestFieldPaths:
    """Test per i percorsi dei campi negli errori delle liste esplicite."""

    def _network(self, **bs):
        return {
            "network": {
                "base_stations": [{"kind": "macro", "x": 0.0, "y": 0.0}, {"kind": "pico", **bs}],
                "test_points": [{"x": 50.0, "y": 0.0}],
            },
        }

    def test_bs_coordinate(self):
        """Test coordinata non numerica con indice della BS."""
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario(self._network(x="a", y=0.0))

        assert info.value.field_path == "network.base_stations[1].x"

    def test_bs_tx_power(self):
        """Test potenza trasmessa non positiva con indice della BS."""
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario(self._network(x=10.0, y=0.0, tx_power_w=0.0))

        assert info.value.field_path == "network.base_stations[1].tx_power_w"
        assert info.value.message.startswith("deve essere")

    def test_zero_operational_power_explicit(self):
        """Test potenza operativa nulla su una BS esplicita."""
        config = self._network(x=10.0, y=0.0)
        config["power"] = {"pico": {"slope": 0.0, "offset_w": 0.0}}
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario(config)

        assert info.value.field_path == "network.base_stations[1]"
        assert "power.pico" in str(info.value)

    def test_zero_operational_power_generated(self):
        """Test potenza operativa nulla sulle macro generate."""
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario({"power": {"macro": {"slope": 0.0, "offset_w": 0.0}}})

        assert info.value.field_path == "power.macro"

    def test_test_point_coordinate(self):
        """Test coordinata non finita con indice del punto di test."""
        config = self._network(x=10.0, y=0.0)
        config["network"]["test_points"].append({"x": 1.0, "y": float("nan")})
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario(config)

        assert info.value.field_path == "network.test_points[1].y"

    def test_per_test_point_demand(self):
        """Test domanda per punto di test negativa."""
        with pytest.raises(ScenarioConfigError) as info:
            build_scenario({"demand": {"per_test_point": {"2": -5.0}}})

        assert info.value.field_path == "demand.per_test_point.2"


class TestRandomParts:
    """Test per le impronte e le parti casuali dello scenario."""

    def test_rate_hash_ignores_demands(self, toy_scenario):
        """Test impronta dei rate invariata cambiando le domande."""
        other = toy_scenario.with_demands(3e6)

        assert rate_hash(other) == rate_hash(toy_scenario)
        assert scenario_hash(other) != scenario_hash(toy_scenario)

    def test_rate_hash_tracks_geometry(self):
        """Test seed diverso sulla rete generata: impronta diversa."""
        assert rate_hash(build_scenario({"seed": 1})) != rate_hash(build_scenario({"seed": 2}))

    def test_has_random_drop(self, toy_config):
        """Test liste esplicite senza shadowing: il seed non conta."""
        assert has_random_drop({})
        assert not has_random_drop(toy_config)
        assert has_random_drop({**toy_config, "propagation": {"shadowing": True}})
        assert not has_random_drop(scenario_to_json(build_scenario({"propagation": {"shadowing": True}})))
