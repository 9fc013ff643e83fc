"""Run configuration for scripted flows.

Every piece of randomness in a scripted run flows from the single seed
through named sub-streams (card entropy, sensor noise, verifier
nonces), so identical configs produce byte-identical transcripts. The
clock is part of the config too: scripted runs never read wall time.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .authority import AuthorityPolicy
from .biometrics import MatchConfig, SensorModel
from .crypto import derive_seed_bytes
from .verifier import DEFAULT_MAX_CRL_AGE_SECONDS

DEFAULT_NOW = 1_735_689_600  # 2025-01-01T00:00:00Z


@dataclass
class ScenarioConfig:
    seed: int = 0
    now: int = DEFAULT_NOW
    authority_id: str = "AUTH-SIM"
    finger_minutiae: int = 30
    max_crl_age_seconds: int = DEFAULT_MAX_CRL_AGE_SECONDS
    sensor: SensorModel = field(default_factory=SensorModel)
    match: MatchConfig = field(default_factory=MatchConfig)
    policy: AuthorityPolicy = field(default_factory=AuthorityPolicy)
    ledger_path: str | None = None
    trust_store_path: str | None = None
    card_path: str | None = None
    scenario: str | None = None

    def ca_seed(self) -> bytes:
        return derive_seed_bytes(self.seed, "authority-entropy")

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        doc = dict(doc)
        kwargs = {}
        for key in (
            "seed",
            "now",
            "authority_id",
            "finger_minutiae",
            "max_crl_age_seconds",
            "scenario",
        ):
            if key in doc:
                kwargs[key] = doc.pop(key)
        for key, factory in (
            ("sensor", SensorModel),
            ("match", MatchConfig),
            ("policy", AuthorityPolicy),
        ):
            if key in doc:
                kwargs[key] = _sub_config(factory, doc.pop(key), key)
        paths = doc.pop("paths", {})
        if not isinstance(paths, dict):
            raise ValueError("config field 'paths' must be an object")
        for src, dst in (
            ("ledger", "ledger_path"),
            ("trust_store", "trust_store_path"),
            ("card", "card_path"),
        ):
            if src in paths:
                kwargs[dst] = paths.pop(src)
        if paths:
            raise ValueError(f"unknown path keys: {sorted(paths)}")
        if doc:
            raise ValueError(f"unknown config keys: {sorted(doc)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "now": self.now,
            "authority_id": self.authority_id,
            "finger_minutiae": self.finger_minutiae,
            "max_crl_age_seconds": self.max_crl_age_seconds,
            "sensor": dataclasses.asdict(self.sensor),
            "match": dataclasses.asdict(self.match),
            "policy": dataclasses.asdict(self.policy),
            "paths": {
                "ledger": self.ledger_path,
                "trust_store": self.trust_store_path,
                "card": self.card_path,
            },
            "scenario": self.scenario,
        }


def _sub_config(factory, doc: dict, what: str):
    if not isinstance(doc, dict):
        raise ValueError(f"config field {what!r} must be an object")
    names = {f.name for f in dataclasses.fields(factory)}
    unknown = set(doc) - names
    if unknown:
        raise ValueError(f"unknown {what} keys: {sorted(unknown)}")
    return factory(**doc)
