"""Interaction records, fingerprint keys and histograms."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

from ..elements import AMINO_ACIDS, parent_residue


class InteractionType(str, Enum):
    HBondDonor = "HBondDonor"
    HBondAcceptor = "HBondAcceptor"
    Hydrophobic = "Hydrophobic"
    PiStacking = "PiStacking"
    PiCation = "PiCation"
    SaltBridgeCationic = "SaltBridgeCationic"
    SaltBridgeAnionic = "SaltBridgeAnionic"
    VdWContact = "VdWContact"
    MetalCoordination = "MetalCoordination"

    def __str__(self) -> str:
        return self.value


class InteractionKey(NamedTuple):
    ligand_id: str
    residue_type: str
    interaction_type: InteractionType

    def sort_key(self) -> tuple[str, str, str]:
        """Histogram bin order: interaction type, then residue type, then ligand."""
        return (self.interaction_type.value, self.residue_type, self.ligand_id)

    def to_str(self) -> str:
        return f"{self.ligand_id}|{self.residue_type}|{self.interaction_type.value}"

    @classmethod
    def from_str(cls, s: str) -> "InteractionKey":
        # ligand ids may contain '|', so split from the right
        ligand_id, residue_type, itype = s.rsplit("|", 2)
        return cls(ligand_id, residue_type, InteractionType(itype))


def residue_type(resname: str) -> str:
    """Standard three-letter amino-acid code, with modified residues mapped to the parent."""
    parent = parent_residue(resname)
    return parent if parent in AMINO_ACIDS else "UNK"


@dataclass(frozen=True)
class InteractionRecord:
    ligand_id: str
    residue_type: str
    interaction_type: InteractionType
    residue: tuple = ()  # (chain, seq, icode) of the residue instance
    distance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "interaction_type", InteractionType(self.interaction_type))
        if self.residue_type != "UNK" and self.residue_type not in AMINO_ACIDS:
            raise ValueError(f"residue type {self.residue_type!r} is not a standard amino acid")

    @property
    def key(self) -> InteractionKey:
        return InteractionKey(self.ligand_id, self.residue_type, self.interaction_type)


class Fingerprint:
    """Histogram of interaction keys. Missing keys count zero."""

    def __init__(self, counts=None):
        c = Counter()
        for k, v in dict(counts or {}).items():
            if not isinstance(k, InteractionKey):
                k = InteractionKey(k[0], k[1], InteractionType(k[2]))
            v = int(v)
            if v < 0:
                raise ValueError(f"negative count for {k.to_str()}")
            if v:
                c[k] = v
        self._counts = c

    @classmethod
    def from_records(cls, records: Iterable[InteractionRecord]) -> "Fingerprint":
        return cls(Counter(r.key for r in records))

    @property
    def counts(self) -> dict[InteractionKey, int]:
        return dict(self._counts)

    def __getitem__(self, key) -> int:
        return self._counts.get(key, 0)

    def __len__(self) -> int:
        return len(self._counts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Fingerprint) and self._counts == other._counts

    def __repr__(self) -> str:
        return f"Fingerprint({self.to_json()})"

    def total(self) -> int:
        return sum(self._counts.values())

    def keys(self) -> list[InteractionKey]:
        return sorted(self._counts, key=InteractionKey.sort_key)

    def __add__(self, other: "Fingerprint") -> "Fingerprint":
        return Fingerprint(self._counts + other._counts)

    def by_type(self) -> dict[str, int]:
        out: Counter = Counter()
        for k, v in self._counts.items():
            out[k.interaction_type.value] += v
        return dict(out)

    def to_json(self) -> list[dict]:
        return [{"key": k.to_str(), "count": self._counts[k]} for k in self.keys()]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Fingerprint":
        if isinstance(data, str):
            data = json.loads(data)
        if isinstance(data, dict):
            items = data.items()
        else:
            items = ((d["key"], d["count"]) for d in data)
        return cls({InteractionKey.from_str(k): int(v) for k, v in items})


def fingerprint(records: Iterable[InteractionRecord]) -> Fingerprint:
    """Count records per (ligand id, residue type, interaction type)."""
    return Fingerprint.from_records(records)
