"""
Modello dei Pattern di Interferenza
===================================

Matrice di attività A (I pattern x B celle) e famiglie di pattern candidati.
"""

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import PatternCapError
from .scenario import Scenario

logger = logging.getLogger(__name__)

DEFAULT_PATTERN_CAP = 20

STRATEGIES = (
    "all_on",
    "leave_one_out",
    "macros_only",
    "single_bs",
    "macro_plus_local_picos",
    "random",
)

_RANDOM_RE = re.compile(r"^random\(\s*(\d+)\s*(?:,\s*(-?\d+)\s*)?\)$")


@dataclass(frozen=True, eq=False)
class PatternSet:
    """Insieme di pattern ON/OFF senza righe duplicate."""
    activity: np.ndarray
    labels: Tuple[str, ...]

    def __post_init__(self):
        act = self.activity
        if act.ndim != 2 or act.shape[0] < 1 or act.shape[1] < 1:
            raise ValueError("la matrice di attività deve avere forma (I >= 1, B >= 1)")
        if not np.isin(act, (0, 1)).all():
            raise ValueError("la matrice di attività deve contenere solo 0 e 1")
        if len(self.labels) != act.shape[0]:
            raise ValueError("serve un'etichetta di provenienza per ogni pattern")
        if len(np.unique(act, axis=0)) != act.shape[0]:
            raise ValueError("pattern duplicati nella matrice di attività")
        act.setflags(write=False)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], labels: Iterable[str]) -> "PatternSet":
        """Costruisce l'insieme eliminando i duplicati (vince la prima occorrenza)."""
        seen = {}
        for row, label in zip(rows, labels):
            arr = np.asarray(row, dtype=np.uint8)
            key = arr.tobytes()
            if key not in seen:
                seen[key] = (arr, label)
        if not seen:
            raise ValueError("insieme di pattern vuoto")
        kept = list(seen.values())
        return cls(np.vstack([r for r, _ in kept]), tuple(label for _, label in kept))

    @property
    def I(self) -> int:
        return self.activity.shape[0]

    @property
    def B(self) -> int:
        return self.activity.shape[1]

    def __len__(self) -> int:
        return self.I

    def on_set(self, i: int) -> List[int]:
        """Indici delle BS accese nel pattern i."""
        return [int(b) for b in np.flatnonzero(self.activity[i])]

    def index_of(self, row: Sequence[int]) -> Optional[int]:
        matches = np.flatnonzero((self.activity == np.asarray(row, dtype=np.uint8)).all(axis=1))
        return int(matches[0]) if matches.size else None

    def row_set(self) -> set:
        return {self.bitstring(i) for i in range(self.I)}

    def union(self, other: "PatternSet") -> "PatternSet":
        if other.B != self.B:
            raise ValueError(f"numero di celle diverso: {self.B} contro {other.B}")
        return PatternSet.from_rows(
            list(self.activity) + list(other.activity),
            self.labels + other.labels,
        )

    def indices_within(self, active_bs: Iterable[int]) -> np.ndarray:
        """Indici dei pattern che accendono solo BS dell'insieme dato."""
        allowed = np.zeros(self.B, dtype=bool)
        allowed[list(active_bs)] = True
        return np.flatnonzero(~(self.activity.astype(bool) & ~allowed).any(axis=1))

    def take(self, indices: Sequence[int]) -> "PatternSet":
        indices = list(indices)
        if not indices:
            raise ValueError("selezione di pattern vuota")
        return PatternSet(self.activity[indices].copy(), tuple(self.labels[i] for i in indices))

    def restrict_to(self, active_bs: Iterable[int]) -> "PatternSet":
        return self.take(self.indices_within(active_bs))

    # === SERIALIZZAZIONE ===

    def bitstring(self, i: int) -> str:
        return "".join("1" if v else "0" for v in self.activity[i])

    def to_json(self) -> str:
        return json.dumps([self.bitstring(i) for i in range(self.I)])

    @classmethod
    def from_json(cls, data: Union[str, Sequence[str]], label: str = "loaded") -> "PatternSet":
        rows = json.loads(data) if isinstance(data, str) else list(data)
        if not rows:
            raise ValueError("lista di pattern vuota")
        width = len(rows[0])
        parsed = []
        for n, text in enumerate(rows):
            if len(text) != width or set(text) - {"0", "1"}:
                raise ValueError(f"pattern {n} non valido: {text!r}")
            parsed.append([int(c) for c in text])
        return cls.from_rows(parsed, [label] * len(parsed))

    def content_hash(self) -> str:
        text = "\n".join(self.bitstring(i) for i in range(self.I))
        return hashlib.sha256(text.encode("ascii")).hexdigest()


def _code_rows(codes: Iterable[int], B: int) -> np.ndarray:
    codes = np.asarray(list(codes), dtype=np.int64)
    bits = np.arange(B, dtype=np.int64)
    return ((codes[:, None] >> bits[None, :]) & 1).astype(np.uint8)


def enumerate_all(B: int, cap: int = DEFAULT_PATTERN_CAP) -> PatternSet:
    """
    Tutte le 2^B combinazioni ON/OFF, riga di tutti zeri inclusa.

    Args:
        B: Numero di celle
        cap: Limite massimo di celle per l'enumerazione completa

    Returns:
        PatternSet con I = 2^B
    """
    if B < 1:
        raise ValueError("B deve essere almeno 1")
    if B > cap:
        raise PatternCapError(
            f"enumerazione completa di 2^{B} pattern oltre il limite di {cap} celle; "
            f"usare preselect con una lista di strategie"
        )
    act = _code_rows(range(2 ** B), B)
    return PatternSet(act, ("enumerated",) * act.shape[0])


def reuse1(B: int) -> PatternSet:
    """Un solo pattern con tutte le celle accese."""
    if B < 1:
        raise ValueError("B deve essere almeno 1")
    return PatternSet(np.ones((1, B), dtype=np.uint8), ("reuse1",))


def sample(B: int, I: int, seed: int = 0) -> PatternSet:
    """Pattern all-on più I-1 pattern distinti e non vuoti estratti a caso."""
    if I < 1:
        raise ValueError("I deve essere almeno 1")
    if B > 62:
        raise PatternCapError("campionamento supportato fino a 62 celle")
    full = (1 << B) - 1
    if I > full:
        raise ValueError(f"al massimo {full} pattern non vuoti con B={B}")
    rng = np.random.default_rng(seed)
    if B <= DEFAULT_PATTERN_CAP:
        codes = rng.choice(np.arange(1, full, dtype=np.int64), size=I - 1, replace=False)
    else:
        chosen: dict = {}
        while len(chosen) < I - 1:
            code = int(rng.integers(1, full))
            chosen.setdefault(code, None)
        codes = list(chosen)
    rows = [np.ones(B, dtype=np.uint8)] + list(_code_rows(codes, B))
    return PatternSet.from_rows(rows, ["all_on"] + ["random"] * (len(rows) - 1))


def parse_strategies(text: Union[str, Sequence]) -> List[Union[str, Tuple[str, int, int]]]:
    """
    Interpreta una lista di strategie, es. "all_on,leave_one_out,random(20,1)".

    Returns:
        Lista di nomi, con le strategie casuali come tuple ("random", n, seed)
    """
    items = text if not isinstance(text, str) else _split_top_level(text)
    parsed: List[Union[str, Tuple[str, int, int]]] = []
    for item in items:
        if isinstance(item, tuple):
            parsed.append(item)
            continue
        name = item.strip()
        match = _RANDOM_RE.match(name)
        if match:
            parsed.append(("random", int(match.group(1)), int(match.group(2) or 0)))
        elif name in STRATEGIES and name != "random":
            parsed.append(name)
        else:
            raise ValueError(f"strategia di pattern sconosciuta: {name!r}")
    return parsed


def _split_top_level(text: str) -> List[str]:
    parts, depth, current = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += ch
    if current.strip():
        parts.append(current)
    return [p for p in parts if p.strip()]


def preselect(scenario: Scenario, strategies: Union[str, Sequence]) -> PatternSet:
    """
    Unione deduplicata delle famiglie di pattern richieste.

    Il pattern all-on è sempre presente (ed è il primo), così il Reuse-1
    resta rappresentabile.

    Args:
        scenario: Scenario di riferimento (tipi di cella e macro madri)
        strategies: Nomi delle famiglie o stringa separata da virgole
    """
    B = scenario.B
    rows: List[np.ndarray] = [np.ones(B, dtype=np.uint8)]
    labels: List[str] = ["all_on"]

    for strategy in parse_strategies(strategies):
        if strategy == "all_on":
            continue
        if strategy == "leave_one_out":
            for b in range(B):
                row = np.ones(B, dtype=np.uint8)
                row[b] = 0
                rows.append(row)
                labels.append(strategy)
        elif strategy == "macros_only":
            rows.append(np.array([1 if bs.is_macro else 0 for bs in scenario.bss], dtype=np.uint8))
            labels.append(strategy)
        elif strategy == "single_bs":
            for b in range(B):
                row = np.zeros(B, dtype=np.uint8)
                row[b] = 1
                rows.append(row)
                labels.append(strategy)
        elif strategy == "macro_plus_local_picos":
            for m in scenario.macro_ids:
                row = np.array(
                    [1 if (bs.id == m or bs.parent == m) else 0 for bs in scenario.bss],
                    dtype=np.uint8,
                )
                rows.append(row)
                labels.append(strategy)
        else:
            _, n, seed = strategy
            extra = sample(B, min(n + 1, (1 << B) - 1), seed)
            rows.extend(extra.activity[1:])
            labels.extend(["random"] * (extra.I - 1))

    patterns = PatternSet.from_rows(rows, labels)
    logger.debug(f"Preselezione {strategies!r}: I={patterns.I}")
    return patterns


def build_pattern_set(scenario: Scenario, spec: str, cap: int = DEFAULT_PATTERN_CAP) -> PatternSet:
    """Traduce l'opzione --patterns (all, reuse1 o lista di strategie)."""
    spec = spec.strip()
    if spec == "all":
        return enumerate_all(scenario.B, cap)
    if spec == "reuse1":
        return reuse1(scenario.B)
    return preselect(scenario, spec)
