"""Declarative analysis configs: JSON in, validated dataclasses out."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .expr import ParseError
from .space import PhaseSpace
from .semigroup import DEFAULT_WORD_CAP, GeneratorSystem

KINDS = (
    "orbit",
    "fix",
    "orbit-points",
    "omega",
    "recurrent",
    "nonwandering",
    "snw",
    "chain-graph",
    "chain-recurrent",
    "chain-equivalent",
    "no-chain-cert",
    "conjugacy",
)

DEFAULT_MAX_CELLS = 10_000


class ConfigError(ValueError):
    pass


@dataclass
class SystemConfig:
    space: dict
    generators: Any
    claimed_abelian: bool = False

    def build(self) -> GeneratorSystem:
        try:
            if self.space.get("kind") == "circle":
                space = PhaseSpace.circle()
            else:
                space = PhaseSpace(self.space.get("kind", "box"), tuple(tuple(b) for b in self.space["bounds"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad space: {exc}") from exc
        try:
            return GeneratorSystem.from_strings(space, self.generators, self.claimed_abelian)
        except ParseError as exc:
            raise ConfigError(f"bad generator: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad generators: {exc}") from exc


# ---------------------------------------------------------------- per-kind parameters


@dataclass
class OrbitParams:
    x: Any
    max_len: int = 12
    tol_dedup: float = 1e-9


@dataclass
class FixParams:
    resolution: int = 10_000
    tol_fix: float = 1e-9


@dataclass
class OrbitPointsParams:
    max_len: int = 4
    resolution: int = 10_000
    tol_fix: float = 1e-9


@dataclass
class OmegaParams:
    x: Any
    pivot: str
    max_len: int | None = None
    schedule: list = field(default_factory=lambda: [3, 5, 8])
    tol_cluster: float = 1e-4
    block_cap: int = 2
    min_hits: int | None = None


@dataclass
class RecurrentParams:
    points: list
    pivot: str | None = None
    max_len: int = 40
    schedule: list = field(default_factory=lambda: [3, 5, 8])
    count_floor: int = 3
    tol_cluster: float = 1e-4


@dataclass
class NonwanderingParams:
    x: Any = None
    radius: float = 0.1
    cells: Any = None
    max_len: int = 4
    certificate_sets: list | None = None


@dataclass
class SnwParams:
    x: Any = None
    radius: float = 0.1
    cells: Any = None
    lead_max_len: int = 2
    helper_max_len: int = 2
    certificate_sets: list | None = None


@dataclass
class ChainGraphParams:
    cells: Any
    lead: Any
    eps: float
    helper_max_len: int = 3
    queries: list = field(default_factory=list)
    certificate_sets: list | None = None
    include_edges: bool = True


@dataclass
class ChainRecurrentParams:
    cells: Any
    lead_max_len: int = 2
    eps_schedule: list = field(default_factory=lambda: [0.1, 0.05])
    helper_max_len: int = 3


@dataclass
class ChainEquivalentParams:
    cells: Any
    a: Any
    b: Any
    lead_max_len: int = 2
    eps_schedule: list = field(default_factory=lambda: [0.1, 0.05])
    helper_max_len: int = 3
    certificate_sets: list | None = None


@dataclass
class NoChainParams:
    a: Any
    lead: Any
    eps: float
    S: list | None = None


@dataclass
class ConjugacyParams:
    target: dict
    rho: Any
    rho_inv: Any
    pairing: dict | None = None
    samples: int = 1000
    boundary_samples: int = 100
    tol: float = 1e-8
    transport: dict | None = None


PARAMS = {
    "orbit": OrbitParams,
    "fix": FixParams,
    "orbit-points": OrbitPointsParams,
    "omega": OmegaParams,
    "recurrent": RecurrentParams,
    "nonwandering": NonwanderingParams,
    "snw": SnwParams,
    "chain-graph": ChainGraphParams,
    "chain-recurrent": ChainRecurrentParams,
    "chain-equivalent": ChainEquivalentParams,
    "no-chain-cert": NoChainParams,
    "conjugacy": ConjugacyParams,
}


@dataclass
class AnalysisSpec:
    id: str
    kind: str
    params: Any

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind, **dataclasses.asdict(self.params)}


@dataclass
class AnalysisConfig:
    system: SystemConfig
    analyses: list = field(default_factory=list)
    seed: int = 0
    max_cells: int = DEFAULT_MAX_CELLS
    word_cap: int = DEFAULT_WORD_CAP
    output: dict = field(default_factory=dict)
    name: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "max_cells": self.max_cells,
            "word_cap": self.word_cap,
            "system": dataclasses.asdict(self.system),
            "analyses": [a.to_json() for a in self.analyses],
            "output": self.output,
        }


def _analysis(entry: dict, n: int) -> AnalysisSpec:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError(f"analysis #{n} needs a 'kind'")
    entry = dict(entry)
    kind = entry.pop("kind")
    if kind not in PARAMS:
        raise ConfigError(f"unknown analysis kind {kind!r}; expected one of {', '.join(KINDS)}")
    ident = str(entry.pop("id", f"{kind}-{n}"))
    try:
        params = PARAMS[kind](**entry)
    except TypeError as exc:
        raise ConfigError(f"analysis {ident!r}: {exc}") from exc
    return AnalysisSpec(ident, kind, params)


def from_dict(data: dict) -> AnalysisConfig:
    if not isinstance(data, dict):
        raise ConfigError("the config must be a JSON object")
    known = {"system", "analyses", "seed", "max_cells", "word_cap", "output", "name"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    if "system" not in data:
        raise ConfigError("the config needs a 'system'")
    try:
        system = SystemConfig(**data["system"])
    except TypeError as exc:
        raise ConfigError(f"system: {exc}") from exc
    analyses = [_analysis(e, i) for i, e in enumerate(data.get("analyses", []))]
    ids = [a.id for a in analyses]
    if len(set(ids)) != len(ids):
        raise ConfigError("analysis ids must be unique")
    cfg = AnalysisConfig(
        system,
        analyses,
        int(data.get("seed", 0)),
        int(data.get("max_cells", DEFAULT_MAX_CELLS)),
        int(data.get("word_cap", DEFAULT_WORD_CAP)),
        dict(data.get("output", {})),
        str(data.get("name", "")),
    )
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    return cfg


def load(path: str | Path) -> AnalysisConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return from_dict(data)


def validate(cfg: AnalysisConfig) -> GeneratorSystem:
    """Build the system and check that every referenced generator exists."""
    sys = cfg.system.build()
    for a in cfg.analyses:
        p = a.params
        for attr in ("pivot", "lead"):
            v = getattr(p, attr, None)
            if v is None:
                continue
            try:
                if attr == "pivot":
                    sys.index(v)
                else:
                    w = sys.parse_word(v)
                    if not w:
                        raise ConfigError(f"analysis {a.id!r}: the lead word must be nonempty")
            except (KeyError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"analysis {a.id!r}: {exc}") from exc
        if a.kind == "conjugacy":
            SystemConfig(**p.target).build()
    return sys
