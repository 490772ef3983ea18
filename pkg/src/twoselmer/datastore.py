"""Ingestion of externally computed 2-Selmer ranks, for curves whose descent
is out of internal reach (irreducible 2-division cubic).

Record format, one per line:  curve-label : twist-d : selmer2-rank
'#' starts a comment.  Conflicting duplicates are rejected at load time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


class DatastoreError(ValueError):
    pass


@dataclass
class Datastore:
    source: str = "<memory>"
    records: dict = field(default_factory=dict)

    @staticmethod
    def parse(text: str, source: str = "<memory>",
              known_labels: Optional[set] = None) -> "Datastore":
        store = Datastore(source)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [t.strip() for t in line.split(":")]
            if len(parts) != 3:
                raise DatastoreError(
                    f"{source}:{lineno}: expected 'label : d : rank', got {raw!r}")
            label, d_str, rank_str = parts
            try:
                d, rank = int(d_str), int(rank_str)
            except ValueError as exc:
                raise DatastoreError(f"{source}:{lineno}: {exc}") from exc
            if rank < 0:
                raise DatastoreError(f"{source}:{lineno}: negative rank")
            if known_labels is not None and label not in known_labels:
                raise DatastoreError(f"{source}:{lineno}: unknown label {label!r}")
            key = (label, d)
            if key in store.records and store.records[key] != rank:
                raise DatastoreError(
                    f"{source}:{lineno}: conflicting rank for {key}: "
                    f"{store.records[key]} vs {rank}")
            store.records[key] = rank
        return store

    @staticmethod
    def load(path: str, known_labels: Optional[set] = None) -> "Datastore":
        with open(path) as fh:
            return Datastore.parse(fh.read(), source=path, known_labels=known_labels)

    def lookup(self, label: str, d: int) -> Optional[int]:
        return self.records.get((label, d))

    def dump(self) -> str:
        lines = [f"{label} : {d} : {rank}"
                 for (label, d), rank in sorted(self.records.items())]
        return "\n".join(lines) + ("\n" if lines else "")
