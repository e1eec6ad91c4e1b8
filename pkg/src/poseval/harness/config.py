"""Evaluation configuration: every threshold in one place, echoed into reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError
from ..metrics.chains import IDENTITY_FLOOR
from ..metrics.lddt import PLI_CROSS_RADIUS, LddtParams
from ..metrics.pocket import POCKET_CUTOFF
from ..molgraph import AUTOMORPHISM_CAP, BOND_TOLERANCE
from ..plif.detect import InteractionParams
from ..validity import DISABLED_CHECKS, ValidityParams


@dataclass(frozen=True)
class SuccessCriteria:
    rmsd_cutoff: float = 2.0
    centroid_cutoff: float = 1.0
    require_pb_valid: bool = True  # for the combined RMSD & PB-Valid rate

    def __post_init__(self):
        if self.rmsd_cutoff <= 0 or self.centroid_cutoff <= 0:
            raise ConfigError("success cutoffs must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PosevalConfig:
    lddt: LddtParams = field(default_factory=LddtParams)
    interactions: InteractionParams = field(default_factory=InteractionParams)
    validity: ValidityParams = field(default_factory=ValidityParams)
    criteria: SuccessCriteria = field(default_factory=SuccessCriteria)
    pocket_cutoff: float = POCKET_CUTOFF
    pli_cross_radius: float = PLI_CROSS_RADIUS
    identity_floor: float = IDENTITY_FLOOR
    bond_tolerance: float = BOND_TOLERANCE
    automorphism_cap: int = AUTOMORPHISM_CAP
    match_charges: bool = False
    match_bond_orders: bool = False
    pre_align_ligand: bool = False
    raw_count_emd: bool = False
    per_complex_wm: bool = False
    permutation_p: bool = False
    permutations: int = 10_000
    seed: int = 0
    site_link_distance: float = 25.0
    site_box_size: float = 25.0

    _SECTIONS = {"lddt": LddtParams, "interactions": InteractionParams, "validity": ValidityParams, "criteria": SuccessCriteria}

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = v.to_dict() if hasattr(v, "to_dict") else v
        d["disabled_checks"] = list(DISABLED_CHECKS)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "PosevalConfig":
        known = {f.name for f in fields(cls)}
        kw = {}
        for key, value in data.items():
            if key == "disabled_checks":
                continue  # echo-only
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            section = cls._SECTIONS.get(key)
            if section is not None:
                if not isinstance(value, dict):
                    raise ConfigError(f"section {key!r} must be an object")
                names = {f.name for f in fields(section)}
                bad = sorted(set(value) - names)
                if bad:
                    raise ConfigError(f"unknown key(s) in {key!r}: {', '.join(bad)}")
                if "thresholds" in value:
                    value = {**value, "thresholds": tuple(value["thresholds"])}
                try:
                    kw[key] = section(**value)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"invalid {key!r} section: {exc}") from exc
            else:
                kw[key] = value
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "PosevalConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def updated(self, **changes) -> "PosevalConfig":
        return replace(self, **changes)
