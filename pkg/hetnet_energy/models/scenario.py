"""
Modello dello Scenario
======================

Geometria della rete eterogenea, propagazione, domanda e consumo energetico.
Uno scenario è costruito da un documento JSON con le sezioni `network`,
`propagation`, `power`, `demand`, `seed` e può essere riserializzato nello
stesso schema.
"""

import copy
import enum
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ScenarioConfigError

logger = logging.getLogger(__name__)


class BsKind(str, enum.Enum):
    """Tipi di stazione radio base."""
    MACRO = "macro"
    PICO = "pico"


DEFAULT_CONFIG: Dict[str, Any] = {
    "network": {
        "n_macro": 3,
        "picos_per_macro": 4,
        "inter_site_distance_m": 500.0,
        "cell_radius_m": 250.0,
        "min_pico_macro_distance_m": 75.0,
        "n_test_points": 50,
        "bandwidth_hz": 10e6,
        "noise_psd_dbm_per_hz": -174.0,
        "noise_figure_db": 9.0,
    },
    "propagation": {
        "macro": {"intercept_db": 128.1, "slope_db": 37.6, "antenna_gain_db": 0.0},
        "pico": {"intercept_db": 140.7, "slope_db": 36.7, "antenna_gain_db": 0.0},
        "shadowing": False,
        "shadowing_std_db": 8.0,
        "min_distance_m": 10.0,
    },
    "power": {
        "macro": {"tx_power_w": 40.0, "slope": 22.6 / 3, "offset_w": 412.4 / 3, "fixed_fraction": 1.0},
        "pico": {"tx_power_w": 1.0, "slope": 5.5, "offset_w": 32.0, "fixed_fraction": 0.5},
    },
    "demand": {"rate_bps": 1e6},
    "seed": 0,
}


@dataclass(frozen=True)
class PathLossCoefficients:
    """Legge di attenuazione PL(d) = intercept + slope * log10(d_km)."""
    intercept_db: float
    slope_db: float
    antenna_gain_db: float = 0.0

    def path_loss_db(self, distance_m):
        return self.intercept_db + self.slope_db * np.log10(np.asarray(distance_m) / 1000.0)


@dataclass(frozen=True)
class PropagationConfig:
    """Parametri di propagazione per tipo di cella."""
    macro: PathLossCoefficients
    pico: PathLossCoefficients
    shadowing_std_db: float = 8.0
    min_distance_m: float = 10.0
    shadowing_enabled: bool = False

    def __post_init__(self):
        for nome, coeff in (("macro", self.macro), ("pico", self.pico)):
            if coeff.slope_db <= 0:
                raise ValueError(f"propagation.{nome}.slope_db deve essere positivo")
        if self.min_distance_m <= 0:
            raise ValueError("propagation.min_distance_m deve essere positivo")
        if self.shadowing_std_db < 0:
            raise ValueError("propagation.shadowing_std_db non può essere negativo")

    def coefficients(self, kind: BsKind) -> PathLossCoefficients:
        return self.macro if BsKind(kind) is BsKind.MACRO else self.pico


@dataclass(frozen=True)
class PowerModel:
    """Modello lineare P_OP = slope * P_tx + offset."""
    tx_power_w: float
    slope: float
    offset_w: float
    fixed_fraction: float


@dataclass(frozen=True)
class BaseStation:
    """Stazione radio base (macro o pico)."""
    id: int
    kind: BsKind
    position: Tuple[float, float]
    tx_psd: float
    op_power_max: float
    fixed_fraction: float
    tx_power: float
    parent: Optional[int] = None

    def __post_init__(self):
        if self.tx_psd <= 0:
            raise ValueError(f"BS {self.id}: tx_psd deve essere positivo")
        if self.op_power_max <= 0:
            raise ValueError(f"BS {self.id}: op_power_max deve essere positivo")
        if not 0.0 <= self.fixed_fraction <= 1.0:
            raise ValueError(f"BS {self.id}: fixed_fraction deve essere in [0, 1]")

    @property
    def is_macro(self) -> bool:
        return self.kind is BsKind.MACRO


@dataclass(frozen=True)
class TestPoint:
    """Punto di test: posizione e domanda media richiesta (bit/s)."""
    __test__ = False

    id: int
    position: Tuple[float, float]
    demand: float

    def __post_init__(self):
        if self.demand < 0:
            raise ValueError(f"TP {self.id}: la domanda non può essere negativa")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Scenario completamente numerico; immutabile dopo la costruzione."""
    bss: Tuple[BaseStation, ...]
    tps: Tuple[TestPoint, ...]
    bandwidth: float
    noise_psd: float
    gain_model: PropagationConfig
    rng_seed: int
    shadowing_db: np.ndarray
    power_models: Mapping[str, PowerModel] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.bss) < 1:
            raise ValueError("lo scenario richiede almeno una BS")
        if len(self.tps) < 1:
            raise ValueError("lo scenario richiede almeno un punto di test")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth deve essere positiva")
        if self.noise_psd <= 0:
            raise ValueError("noise_psd deve essere positiva")
        if self.shadowing_db.shape != (len(self.bss), len(self.tps)):
            raise ValueError("shadowing_db deve avere forma (B, K)")
        self.shadowing_db.setflags(write=False)

    @property
    def B(self) -> int:
        return len(self.bss)

    @property
    def K(self) -> int:
        return len(self.tps)

    @property
    def demands(self) -> np.ndarray:
        return np.array([tp.demand for tp in self.tps], dtype=float)

    @property
    def tx_psd(self) -> np.ndarray:
        return np.array([bs.tx_psd for bs in self.bss], dtype=float)

    @property
    def op_power(self) -> np.ndarray:
        return np.array([bs.op_power_max for bs in self.bss], dtype=float)

    @property
    def fixed_fraction(self) -> np.ndarray:
        return np.array([bs.fixed_fraction for bs in self.bss], dtype=float)

    @property
    def macro_ids(self) -> List[int]:
        return [bs.id for bs in self.bss if bs.is_macro]

    @cached_property
    def distances(self) -> np.ndarray:
        """Distanze BS-TP (B x K) in metri, senza clamp."""
        bs_xy = np.array([bs.position for bs in self.bss], dtype=float)
        tp_xy = np.array([tp.position for tp in self.tps], dtype=float)
        diff = bs_xy[:, None, :] - tp_xy[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    @cached_property
    def gains(self) -> np.ndarray:
        """Guadagni di larga scala lineari G_bk (B x K)."""
        d = np.maximum(self.distances, self.gain_model.min_distance_m)
        out = np.empty_like(d)
        for b, bs in enumerate(self.bss):
            coeff = self.gain_model.coefficients(bs.kind)
            exponent_db = -coeff.path_loss_db(d[b]) + coeff.antenna_gain_db
            if self.gain_model.shadowing_enabled:
                exponent_db = exponent_db + self.shadowing_db[b]
            out[b] = np.power(10.0, exponent_db / 10.0)
        out.setflags(write=False)
        return out

    def with_demands(self, demands: Union[float, Sequence[float], Mapping[int, float]]) -> "Scenario":
        """
        Restituisce una copia dello scenario con domande sostituite.

        Args:
            demands: Valore uniforme, sequenza di lunghezza K o mappa id -> bit/s
        """
        if isinstance(demands, Mapping):
            nuove = [float(demands.get(tp.id, tp.demand)) for tp in self.tps]
        elif np.isscalar(demands):
            nuove = [float(demands)] * self.K
        else:
            nuove = [float(v) for v in demands]
            if len(nuove) != self.K:
                raise ValueError(f"attese {self.K} domande, ricevute {len(nuove)}")
        tps = tuple(replace(tp, demand=d) for tp, d in zip(self.tps, nuove))
        return replace(self, tps=tps)


def operational_power(kind: Union[BsKind, str], tx_power_watts: float,
                      coefficients: Optional[Mapping[str, float]] = None) -> float:
    """
    Potenza operativa massima di una BS con il modello lineare.

    Args:
        kind: Tipo di BS (macro o pico)
        tx_power_watts: Potenza trasmessa totale in W
        coefficients: Eventuali `slope` e `offset_w` che sostituiscono i predefiniti

    Returns:
        P_OP in W
    """
    if tx_power_watts < 0:
        raise ValueError("la potenza trasmessa non può essere negativa")
    coeff = dict(DEFAULT_CONFIG["power"][BsKind(kind).value])
    if coefficients:
        coeff.update(coefficients)
    return float(coeff["slope"]) * float(tx_power_watts) + float(coeff["offset_w"])


def channel_gain(scenario: Scenario, b: int, k: int) -> float:
    """Guadagno lineare G_bk (path loss, guadagno d'antenna, shadowing congelato)."""
    if not (0 <= b < scenario.B and 0 <= k < scenario.K):
        raise IndexError(f"indici fuori intervallo: b={b}, k={k}")
    return float(scenario.gains[b, k])


# === COSTRUZIONE DA CONFIGURAZIONE ===

def _deep_merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _number(doc: Mapping[str, Any], path: str, *, minimum: Optional[float] = None,
            strict: bool = False, maximum: Optional[float] = None) -> float:
    node: Any = doc
    for part in path.split("."):
        if not isinstance(node, Mapping) or part not in node:
            raise ScenarioConfigError(path, "campo mancante")
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ScenarioConfigError(path, f"atteso un numero, trovato {node!r}")
    value = float(node)
    if not math.isfinite(value):
        raise ScenarioConfigError(path, "il valore deve essere finito")
    if minimum is not None and (value < minimum or (strict and value == minimum)):
        op = ">" if strict else ">="
        raise ScenarioConfigError(path, f"deve essere {op} {minimum}")
    if maximum is not None and value > maximum:
        raise ScenarioConfigError(path, f"deve essere <= {maximum}")
    return value


def _entry_number(entry: Mapping[str, Any], key: str, path: str, **limits) -> float:
    """Come _number su un elemento di lista, con il percorso completo nell'errore."""
    try:
        return _number(entry, key, **limits)
    except ScenarioConfigError as e:
        raise ScenarioConfigError(f"{path}.{key}", e.message) from e


def _count(doc: Mapping[str, Any], path: str, minimum: int) -> int:
    value = _number(doc, path, minimum=minimum)
    if value != int(value):
        raise ScenarioConfigError(path, "deve essere un intero")
    return int(value)


def _parse_document(config: Union[str, bytes, Path, Mapping[str, Any]]) -> Dict[str, Any]:
    if isinstance(config, Mapping):
        return dict(config)
    if isinstance(config, Path):
        config = config.read_text(encoding="utf-8")
    try:
        doc = json.loads(config)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ScenarioConfigError("<documento>", f"JSON non valido: {e}") from e
    if not isinstance(doc, dict):
        raise ScenarioConfigError("<documento>", "la radice deve essere un oggetto")
    return doc


def _macro_sites(n_macro: int, isd: float) -> List[Tuple[float, float]]:
    """Siti macro sul reticolo esagonale più vicini all'origine."""
    rings = int(math.ceil(math.sqrt(n_macro))) + 1
    sites = []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            x = isd * (q + r / 2.0)
            y = isd * (r * math.sqrt(3.0) / 2.0)
            angle = math.atan2(y, x) % (2.0 * math.pi)
            sites.append((round(math.hypot(x, y), 6), round(angle, 9), x, y))
    sites.sort()
    return [(x, y) for _, _, x, y in sites[:n_macro]]


def _uniform_in_disc(rng: np.random.Generator, center: Tuple[float, float],
                     radius: float, min_radius: float = 0.0) -> Tuple[float, float]:
    while True:
        r = radius * math.sqrt(rng.uniform())
        theta = 2.0 * math.pi * rng.uniform()
        if r >= min_radius:
            return (center[0] + r * math.cos(theta), center[1] + r * math.sin(theta))


def _power_models(doc: Mapping[str, Any]) -> Dict[str, PowerModel]:
    models = {}
    for kind in BsKind:
        base = f"power.{kind.value}"
        models[kind.value] = PowerModel(
            tx_power_w=_number(doc, f"{base}.tx_power_w", minimum=0.0, strict=True),
            slope=_number(doc, f"{base}.slope", minimum=0.0),
            offset_w=_number(doc, f"{base}.offset_w", minimum=0.0),
            fixed_fraction=_number(doc, f"{base}.fixed_fraction", minimum=0.0, maximum=1.0),
        )
    return models


def _propagation(doc: Mapping[str, Any]) -> PropagationConfig:
    coeffs = {}
    for kind in BsKind:
        base = f"propagation.{kind.value}"
        coeffs[kind.value] = PathLossCoefficients(
            intercept_db=_number(doc, f"{base}.intercept_db"),
            slope_db=_number(doc, f"{base}.slope_db", minimum=0.0, strict=True),
            antenna_gain_db=_number(doc, f"{base}.antenna_gain_db"),
        )
    return PropagationConfig(
        macro=coeffs["macro"],
        pico=coeffs["pico"],
        shadowing_std_db=_number(doc, "propagation.shadowing_std_db", minimum=0.0),
        min_distance_m=_number(doc, "propagation.min_distance_m", minimum=0.0, strict=True),
        shadowing_enabled=bool(doc["propagation"].get("shadowing", False)),
    )


def _make_bs(idx: int, kind: BsKind, position: Tuple[float, float], model: PowerModel,
             bandwidth: float, parent: Optional[int], path: str,
             tx_power: Optional[float] = None) -> BaseStation:
    tx = model.tx_power_w if tx_power is None else tx_power
    try:
        return BaseStation(
            id=idx,
            kind=kind,
            position=(float(position[0]), float(position[1])),
            tx_psd=tx / bandwidth,
            op_power_max=operational_power(kind, tx, {"slope": model.slope, "offset_w": model.offset_w}),
            fixed_fraction=model.fixed_fraction,
            tx_power=tx,
            parent=parent,
        )
    except ValueError as e:
        raise ScenarioConfigError(path, f"{e} (power.{kind.value})") from e


def _explicit_base_stations(doc, models, bandwidth) -> List[BaseStation]:
    entries = doc["network"]["base_stations"]
    if not isinstance(entries, list) or not entries:
        raise ScenarioConfigError("network.base_stations", "deve essere una lista non vuota")
    raw = []
    for idx, entry in enumerate(entries):
        path = f"network.base_stations[{idx}]"
        if not isinstance(entry, Mapping):
            raise ScenarioConfigError(path, "deve essere un oggetto")
        try:
            kind = BsKind(entry.get("kind"))
        except ValueError:
            raise ScenarioConfigError(f"{path}.kind", "deve essere 'macro' o 'pico'")
        if "x" not in entry or "y" not in entry:
            raise ScenarioConfigError(path, "coordinate x, y mancanti")
        x = _entry_number(entry, "x", path)
        y = _entry_number(entry, "y", path)
        tx = None
        if "tx_power_w" in entry:
            tx = _entry_number(entry, "tx_power_w", path, minimum=0.0, strict=True)
        raw.append((kind, (x, y), tx, entry.get("parent")))

    macros = [i for i, (kind, _, _, _) in enumerate(raw) if kind is BsKind.MACRO]
    bss = []
    for idx, (kind, pos, tx, parent) in enumerate(raw):
        if kind is BsKind.PICO and parent is None and macros:
            parent = min(macros, key=lambda m: (math.dist(raw[m][1], pos), m))
        bss.append(_make_bs(idx, kind, pos, models[kind.value], bandwidth, parent,
                            f"network.base_stations[{idx}]", tx))
    return bss


def _generated_base_stations(doc, models, bandwidth, rng) -> List[BaseStation]:
    n_macro = _count(doc, "network.n_macro", 1)
    picos = _count(doc, "network.picos_per_macro", 0)
    isd = _number(doc, "network.inter_site_distance_m", minimum=0.0, strict=True)
    radius = _number(doc, "network.cell_radius_m", minimum=0.0, strict=True)
    min_sep = _number(doc, "network.min_pico_macro_distance_m", minimum=0.0)
    if min_sep >= radius:
        raise ScenarioConfigError("network.min_pico_macro_distance_m", "deve essere minore di cell_radius_m")

    sites = _macro_sites(n_macro, isd)
    bss = [_make_bs(m, BsKind.MACRO, site, models["macro"], bandwidth, None, "power.macro")
           for m, site in enumerate(sites)]
    for m, site in enumerate(sites):
        for _ in range(picos):
            pos = _uniform_in_disc(rng, site, radius, min_sep)
            bss.append(_make_bs(len(bss), BsKind.PICO, pos, models["pico"], bandwidth, m, "power.pico"))
    return bss


def _test_points(doc, bss, rng) -> List[TestPoint]:
    demand_doc = doc.get("demand", {})
    uniform = None
    if demand_doc.get("rate_bps") is not None:
        uniform = _number(doc, "demand.rate_bps", minimum=0.0)
    per_tp = demand_doc.get("per_test_point") or {}

    def demand_for(idx: int, entry: Optional[Mapping[str, Any]] = None) -> float:
        if entry is not None and "demand_bps" in entry:
            return _entry_number(entry, "demand_bps", f"network.test_points[{idx}]", minimum=0.0)
        if str(idx) in per_tp:
            return _entry_number(per_tp, str(idx), "demand.per_test_point", minimum=0.0)
        if uniform is None:
            raise ScenarioConfigError("demand.rate_bps", "domanda non specificata")
        return uniform

    if "test_points" in doc["network"]:
        entries = doc["network"]["test_points"]
        if not isinstance(entries, list) or not entries:
            raise ScenarioConfigError("network.test_points", "deve essere una lista non vuota (K >= 1)")
        tps = []
        for idx, entry in enumerate(entries):
            path = f"network.test_points[{idx}]"
            if not isinstance(entry, Mapping):
                raise ScenarioConfigError(path, "deve essere un oggetto")
            if "x" not in entry or "y" not in entry:
                raise ScenarioConfigError(path, "coordinate x, y mancanti")
            pos = (_entry_number(entry, "x", path), _entry_number(entry, "y", path))
            tps.append(TestPoint(id=idx, position=pos, demand=demand_for(idx, entry)))
        return tps

    n_tp = _count(doc, "network.n_test_points", 0)
    if n_tp < 1:
        raise ScenarioConfigError("network.n_test_points", "deve essere almeno 1")
    radius = _number(doc, "network.cell_radius_m", minimum=0.0, strict=True)
    centers = np.array([bs.position for bs in bss if bs.is_macro] or [bss[0].position], dtype=float)
    lo = centers.min(axis=0) - radius
    hi = centers.max(axis=0) + radius
    tps = []
    while len(tps) < n_tp:
        point = rng.uniform(lo, hi)
        if np.min(np.hypot(*(centers - point).T)) <= radius:
            idx = len(tps)
            tps.append(TestPoint(id=idx, position=(float(point[0]), float(point[1])), demand=demand_for(idx)))
    return tps


def _shadowing(doc, propagation: PropagationConfig, B: int, K: int, rng) -> np.ndarray:
    if not propagation.shadowing_enabled:
        return np.zeros((B, K))
    explicit = doc["propagation"].get("shadowing_db")
    if explicit is not None:
        matrix = np.asarray(explicit, dtype=float)
        if matrix.shape != (B, K) or not np.all(np.isfinite(matrix)):
            raise ScenarioConfigError("propagation.shadowing_db", f"attesa matrice finita {B}x{K}")
        return matrix
    return rng.normal(0.0, propagation.shadowing_std_db, size=(B, K))


def has_random_drop(config: Union[str, bytes, Path, Mapping[str, Any]]) -> bool:
    """Vero se il seed influisce sullo scenario (posizioni generate o shadowing estratto)."""
    doc = _deep_merge(DEFAULT_CONFIG, _parse_document(config))
    network, propagation = doc["network"], doc["propagation"]
    if "base_stations" not in network or "test_points" not in network:
        return True
    return bool(propagation.get("shadowing")) and propagation.get("shadowing_db") is None


def build_scenario(config: Union[str, bytes, Path, Mapping[str, Any]]) -> Scenario:
    """
    Costruisce uno scenario numerico da un documento di configurazione.

    Le pico sono distribuite uniformemente nel disco della macro madre, i
    punti di test uniformemente nell'unione dei dischi macro; lo shadowing
    log-normale è estratto una volta per coppia (b, k) e congelato.

    Args:
        config: Testo JSON, percorso o dizionario già caricato

    Returns:
        Scenario deterministico dato il documento (seed incluso)
    """
    doc = _deep_merge(DEFAULT_CONFIG, _parse_document(config))
    seed = _count(doc, "seed", 0)
    bandwidth = _number(doc, "network.bandwidth_hz", minimum=0.0, strict=True)
    if doc["network"].get("noise_psd_w_per_hz") is not None:
        noise_psd = _number(doc, "network.noise_psd_w_per_hz", minimum=0.0, strict=True)
    else:
        noise_dbm = _number(doc, "network.noise_psd_dbm_per_hz") + _number(doc, "network.noise_figure_db")
        noise_psd = 10.0 ** ((noise_dbm - 30.0) / 10.0)

    models = _power_models(doc)
    propagation = _propagation(doc)
    rng = np.random.default_rng(seed)

    if "base_stations" in doc["network"]:
        bss = _explicit_base_stations(doc, models, bandwidth)
    else:
        bss = _generated_base_stations(doc, models, bandwidth, rng)
    tps = _test_points(doc, bss, rng)
    shadowing = _shadowing(doc, propagation, len(bss), len(tps), rng)

    scenario = Scenario(
        bss=tuple(bss),
        tps=tuple(tps),
        bandwidth=bandwidth,
        noise_psd=noise_psd,
        gain_model=propagation,
        rng_seed=seed,
        shadowing_db=shadowing,
        power_models=models,
    )
    logger.info(f"Scenario costruito: B={scenario.B}, K={scenario.K}, seed={seed}")
    return scenario


# === SERIALIZZAZIONE ===

def scenario_to_config(scenario: Scenario) -> Dict[str, Any]:
    """Serializza lo scenario nello schema di configurazione, con liste esplicite."""
    gm = scenario.gain_model
    propagation: Dict[str, Any] = {
        kind: {
            "intercept_db": coeff.intercept_db,
            "slope_db": coeff.slope_db,
            "antenna_gain_db": coeff.antenna_gain_db,
        }
        for kind, coeff in (("macro", gm.macro), ("pico", gm.pico))
    }
    propagation.update({
        "shadowing": gm.shadowing_enabled,
        "shadowing_std_db": gm.shadowing_std_db,
        "min_distance_m": gm.min_distance_m,
    })
    if gm.shadowing_enabled:
        propagation["shadowing_db"] = scenario.shadowing_db.tolist()

    return {
        "network": {
            "bandwidth_hz": scenario.bandwidth,
            "noise_psd_w_per_hz": scenario.noise_psd,
            "base_stations": [
                {
                    "id": bs.id,
                    "kind": bs.kind.value,
                    "x": bs.position[0],
                    "y": bs.position[1],
                    "tx_power_w": bs.tx_power,
                    "parent": bs.parent,
                }
                for bs in scenario.bss
            ],
            "test_points": [
                {"id": tp.id, "x": tp.position[0], "y": tp.position[1], "demand_bps": tp.demand}
                for tp in scenario.tps
            ],
        },
        "propagation": propagation,
        "power": {
            kind: {
                "tx_power_w": model.tx_power_w,
                "slope": model.slope,
                "offset_w": model.offset_w,
                "fixed_fraction": model.fixed_fraction,
            }
            for kind, model in scenario.power_models.items()
        },
        "demand": {},
        "seed": scenario.rng_seed,
    }


def scenario_to_json(scenario: Scenario) -> str:
    """Testo JSON canonico (chiavi ordinate) dello scenario."""
    return json.dumps(scenario_to_config(scenario), sort_keys=True, indent=2)


def scenario_hash(scenario: Scenario) -> str:
    """Impronta SHA-256 del JSON canonico."""
    return hashlib.sha256(scenario_to_json(scenario).encode("utf-8")).hexdigest()


def rate_hash(scenario: Scenario) -> str:
    """
    Impronta SHA-256 dei soli dati da cui dipendono i rate.

    Geometria, potenze di trasmissione, banda, rumore e propagazione; domande,
    modelli di potenza operativa e seed restano fuori.
    """
    config = scenario_to_config(scenario)
    network = dict(config["network"])
    network["test_points"] = [
        {key: value for key, value in tp.items() if key != "demand_bps"}
        for tp in network["test_points"]
    ]
    key = {"network": network, "propagation": config["propagation"]}
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode("utf-8")).hexdigest()


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Carica uno scenario (o una configurazione) da file JSON."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"File di scenario non trovato: {path}")
    return build_scenario(path.read_text(encoding="utf-8"))


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    """Scrive lo scenario su file JSON e restituisce il percorso."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(scenario_to_json(scenario) + "\n", encoding="utf-8")
    logger.info(f"Scenario salvato: {path}")
    return path
