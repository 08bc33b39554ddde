"""
Modello del Tensore dei Rate
============================

Rate ergodici r_kbi (bit/s) per ogni punto di test, BS e pattern, calcolati
una volta e trattati come costanti da tutta l'ottimizzazione.
"""

import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..errors import RateCacheError
from .patterns import PatternSet
from .scenario import Scenario, rate_hash

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"HNRT"
CACHE_VERSION = 1
# magic, versione, K, B, I, modo, campioni, seed, hash scenario, hash pattern
_HEADER = struct.Struct("<4sHQQQBQq64s64s")

# elementi float64 per blocco di pattern nel calcolo vettoriale
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class RateMode:
    """Modalità di fading: deterministica (|h|^2 = 1) o Monte Carlo Rayleigh."""
    kind: str = "deterministic"
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("deterministic", "monte_carlo"):
            raise ValueError(f"modalità di rate sconosciuta: {self.kind}")
        if self.kind == "monte_carlo":
            if self.samples < 1:
                raise ValueError("il numero di campioni deve essere almeno 1")
            if self.seed < 0:
                raise ValueError("il seed deve essere non negativo")

    @classmethod
    def deterministic(cls) -> "RateMode":
        return cls("deterministic", 0, 0)

    @classmethod
    def monte_carlo(cls, samples: int = 1000, seed: int = 0) -> "RateMode":
        return cls("monte_carlo", samples, seed)

    @property
    def code(self) -> int:
        return 0 if self.kind == "deterministic" else 1

    @classmethod
    def from_code(cls, code: int, samples: int, seed: int) -> "RateMode":
        if code == 0:
            return cls.deterministic()
        if code == 1:
            return cls.monte_carlo(samples, seed)
        raise RateCacheError(f"codice di modalità non valido: {code}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "samples": self.samples, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class RateTensor:
    """Tensore K x B x I dei rate con la sua provenienza."""
    rates: np.ndarray
    mode: RateMode = field(default_factory=RateMode.deterministic)
    scenario_hash: str = ""  # rate_hash dello scenario: esclude domande e potenza operativa
    pattern_hash: str = ""

    def __post_init__(self):
        if self.rates.ndim != 3:
            raise ValueError("il tensore dei rate deve avere forma (K, B, I)")
        self.rates.setflags(write=False)

    @classmethod
    def from_array(cls, rates, **provenance) -> "RateTensor":
        return cls(np.array(rates, dtype=float), **provenance)

    @property
    def K(self) -> int:
        return self.rates.shape[0]

    @property
    def B(self) -> int:
        return self.rates.shape[1]

    @property
    def I(self) -> int:
        return self.rates.shape[2]

    @property
    def max_rate(self) -> float:
        return float(self.rates.max()) if self.rates.size else 0.0

    def validate(self, patterns: Optional[PatternSet] = None) -> List[str]:
        """
        Controlla gli invarianti del tensore.

        Args:
            patterns: Se fornito, verifica anche r_kbi = 0 dove a_ib = 0

        Returns:
            Lista di violazioni (vuota se il tensore è valido)
        """
        problems = []
        if not np.all(np.isfinite(self.rates)):
            problems.append("valori non finiti nel tensore dei rate")
        negative = int(np.count_nonzero(self.rates < 0))
        if negative:
            problems.append(f"{negative} rate negativi")
        if patterns is not None:
            if patterns.I != self.I or patterns.B != self.B:
                problems.append("dimensioni incoerenti con l'insieme di pattern")
            else:
                off = patterns.activity.T[None, :, :] == 0
                leaks = int(np.count_nonzero(self.rates[np.broadcast_to(off, self.rates.shape)]))
                if leaks:
                    problems.append(f"{leaks} rate non nulli su BS spente")
        return problems

    def select_patterns(self, indices: Sequence[int], pattern_hash: str = "") -> "RateTensor":
        return RateTensor(
            self.rates[:, :, list(indices)].copy(),
            mode=self.mode,
            scenario_hash=self.scenario_hash,
            pattern_hash=pattern_hash,
        )

    def with_rates(self, rates: np.ndarray) -> "RateTensor":
        return RateTensor(np.array(rates, dtype=float), self.mode, self.scenario_hash, self.pattern_hash)


# === SINR E RATE ERGODICO (VALUTAZIONE SCALARE) ===

def sinr(scenario: Scenario, A: np.ndarray, k: int, b: int, i: int,
         fading: Optional[Sequence[float]] = None) -> float:
    """
    SINR del collegamento b -> k sotto il pattern i, per unità di banda.

    Args:
        scenario: Scenario
        A: Matrice di attività (I x B)
        fading: |h_lk|^2 per ogni BS l (default tutti 1)
    """
    a = np.asarray(A)[i]
    if not a[b]:
        return 0.0
    h = np.ones(scenario.B) if fading is None else np.asarray(fading, dtype=float)
    received = scenario.tx_psd * scenario.gains[:, k] * h
    interference = 0.0
    for l in range(scenario.B):
        if l != b and a[l]:
            interference += received[l]
    return float(received[b] / (scenario.noise_psd + interference))


def link_fading(mode: RateMode, k: int, b: int) -> np.ndarray:
    """Estrazioni |h_bk|^2 ~ Exp(1), identiche per tutti i pattern."""
    return np.random.default_rng([mode.seed, k, b]).standard_exponential(mode.samples)


def ergodic_rate(scenario: Scenario, A: np.ndarray, k: int, b: int, i: int,
                 mode: Optional[RateMode] = None) -> float:
    """Rate ergodico W E[log2(1 + SINR)] in bit/s."""
    mode = mode or RateMode.deterministic()
    if not np.asarray(A)[i][b]:
        return 0.0
    if mode.kind == "deterministic":
        return float(scenario.bandwidth * np.log2(1.0 + sinr(scenario, A, k, b, i)))
    draws = np.stack([link_fading(mode, k, l) for l in range(scenario.B)])
    values = [np.log2(1.0 + sinr(scenario, A, k, b, i, draws[:, n])) for n in range(mode.samples)]
    return float(scenario.bandwidth * np.mean(values))


# === COSTRUZIONE VETTORIALE DEL TENSORE ===

def _rates_for_tp(scenario: Scenario, activity: np.ndarray, k: int, mode: RateMode) -> np.ndarray:
    """Riga k del tensore (B x I). L'interferenza è accumulata per l crescente."""
    B, I = scenario.B, activity.shape[0]
    received = scenario.tx_psd * scenario.gains[:, k]
    on = activity.astype(bool)
    out = np.zeros((B, I))

    if mode.kind == "deterministic":
        h = np.ones((B, 1))
    else:
        h = np.stack([link_fading(mode, k, l) for l in range(B)])
    N = h.shape[1]
    signal = received[:, None] * h  # (B, N)

    chunk = max(1, _CHUNK_ELEMENTS // (B * N))
    for start in range(0, I, chunk):
        act = on[start:start + chunk]
        interference = np.zeros((act.shape[0], B, N))
        for l in range(B):
            term = np.where(act[:, l, None], signal[l][None, :], 0.0)  # (Ic, N)
            others = np.arange(B) != l
            interference[:, others, :] += term[:, None, :]
        ratio = signal[None, :, :] / (scenario.noise_psd + interference)
        rate = scenario.bandwidth * np.mean(np.log2(1.0 + ratio), axis=-1)  # (Ic, B)
        out[:, start:start + chunk] = np.where(act, rate, 0.0).T
    return out


def build_rate_tensor(scenario: Scenario, patterns: PatternSet,
                      mode: Optional[RateMode] = None,
                      workers: Optional[int] = None) -> RateTensor:
    """
    Calcola il tensore completo K x B x I.

    Le estrazioni di fading dipendono solo da (seed, k, b), quindi il
    risultato non dipende dall'ordine né dal numero di thread.

    Args:
        scenario: Scenario
        patterns: Insieme di pattern candidati
        mode: Modalità di fading (default deterministica)
        workers: Thread per il calcolo parallelo sui punti di test

    Returns:
        RateTensor con la provenienza (hash di scenario e pattern)
    """
    mode = mode or RateMode.deterministic()
    if patterns.B != scenario.B:
        raise ValueError(f"pattern per {patterns.B} celle, scenario con {scenario.B}")

    rates = np.empty((scenario.K, scenario.B, patterns.I))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda k: _rates_for_tp(scenario, patterns.activity, k, mode),
                                 range(scenario.K)))
    else:
        rows = [_rates_for_tp(scenario, patterns.activity, k, mode) for k in range(scenario.K)]
    for k, row in enumerate(rows):
        rates[k] = row

    tensor = RateTensor(rates, mode, rate_hash(scenario), patterns.content_hash())
    logger.info(f"Tensore dei rate calcolato: K={tensor.K}, B={tensor.B}, I={tensor.I}, modo={mode.kind}")
    return tensor


# === CACHE SU DISCO ===

def write_rate_cache(tensor: RateTensor, path: Union[str, Path]) -> Path:
    """Scrive header + array row-major di float64 little-endian."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(
        CACHE_MAGIC, CACHE_VERSION, tensor.K, tensor.B, tensor.I,
        tensor.mode.code, tensor.mode.samples, tensor.mode.seed,
        tensor.scenario_hash.encode("ascii").ljust(64, b"\0"),
        tensor.pattern_hash.encode("ascii").ljust(64, b"\0"),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(tensor.rates, dtype="<f8").tobytes(order="C"))
    logger.debug(f"Cache dei rate scritta: {path}")
    return path


def read_rate_cache(path: Union[str, Path]) -> RateTensor:
    """Legge un file di cache; RateCacheError se malformato."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise RateCacheError(f"impossibile leggere {path}: {e}") from e
    if len(payload) < _HEADER.size:
        raise RateCacheError(f"file di cache troncato: {path}")
    magic, version, K, B, I, code, samples, seed, s_hash, p_hash = _HEADER.unpack_from(payload)
    if magic != CACHE_MAGIC or version != CACHE_VERSION:
        raise RateCacheError(f"formato di cache non riconosciuto: {path}")
    expected = _HEADER.size + 8 * K * B * I
    if len(payload) != expected:
        raise RateCacheError(f"dimensione inattesa ({len(payload)} invece di {expected} byte)")
    rates = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size).reshape(K, B, I).astype(float)
    return RateTensor(
        rates,
        RateMode.from_code(code, samples, seed),
        s_hash.rstrip(b"\0").decode("ascii"),
        p_hash.rstrip(b"\0").decode("ascii"),
    )


def cache_path(cache_dir: Union[str, Path], scenario: Scenario, patterns: PatternSet, mode: RateMode) -> Path:
    key = f"{rate_hash(scenario)[:12]}_{patterns.content_hash()[:12]}_{mode.code}_{mode.samples}_{mode.seed}"
    return Path(cache_dir) / f"rates_{key}.bin"


def load_or_build(scenario: Scenario, patterns: PatternSet, mode: Optional[RateMode] = None,
                  cache_dir: Optional[Union[str, Path]] = None, workers: Optional[int] = None) -> RateTensor:
    """
    Restituisce il tensore dalla cache se la provenienza coincide, altrimenti lo ricalcola.
    """
    mode = mode or RateMode.deterministic()
    if cache_dir is None:
        return build_rate_tensor(scenario, patterns, mode, workers)

    path = cache_path(cache_dir, scenario, patterns, mode)
    if path.exists():
        try:
            cached = read_rate_cache(path)
            if (cached.scenario_hash == rate_hash(scenario)
                    and cached.pattern_hash == patterns.content_hash()
                    and cached.mode == mode):
                logger.info(f"Tensore dei rate letto dalla cache: {path}")
                return cached
            logger.warning(f"Provenienza della cache diversa, ricalcolo: {path}")
        except RateCacheError as e:
            logger.warning(f"Cache dei rate non utilizzabile ({e}), ricalcolo")

    tensor = build_rate_tensor(scenario, patterns, mode, workers)
    write_rate_cache(tensor, path)
    return tensor


# === INVARIANTI ===

def monotonicity_violations(tensor: RateTensor, patterns: PatternSet, tol: float = 0.0) -> int:
    """
    Conta le coppie in cui spegnere un interferente riduce un rate.

    Per ogni pattern i e ogni BS l != b accesa in i, se il pattern con l
    spento è presente nell'insieme deve valere r_kbj >= r_kbi - tol.
    """
    if patterns.I != tensor.I or patterns.B != tensor.B:
        raise ValueError("dimensioni incoerenti con l'insieme di pattern")
    index = {tuple(row): i for i, row in enumerate(patterns.activity.tolist())}
    violations = 0
    for i, row in enumerate(patterns.activity.tolist()):
        on = [b for b, bit in enumerate(row) if bit]
        for l in on:
            reduced = list(row)
            reduced[l] = 0
            j = index.get(tuple(reduced))
            if j is None:
                continue
            for b in on:
                if b == l:
                    continue
                worse = tensor.rates[:, b, j] < tensor.rates[:, b, i] - tol
                violations += int(np.count_nonzero(worse))
    return violations


# === ESPORTAZIONE ===

def rates_to_frame(tensor: RateTensor, nonzero_only: bool = False) -> pd.DataFrame:
    """Tabella (k, b, i, rate) in ordine row-major."""
    k, b, i = np.indices(tensor.rates.shape)
    df = pd.DataFrame({
        "k": k.ravel(),
        "b": b.ravel(),
        "i": i.ravel(),
        "rate": tensor.rates.ravel(),
    })
    if nonzero_only:
        df = df[df["rate"] > 0].reset_index(drop=True)
    return df


def export_rates(tensor: RateTensor, path: Union[str, Path], nonzero_only: bool = False) -> Path:
    """Esporta il tensore in CSV (o Excel se l'estensione è .xlsx)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = rates_to_frame(tensor, nonzero_only)
    if path.suffix.lower() == ".xlsx":
        df.to_excel(path, index=False)
    else:
        df.to_csv(path, index=False)
    logger.info(f"Rate esportati: {path} ({len(df)} righe)")
    return path
