"""Line-oriented report emission: a report is an ordered mapping rendered
either as a human table or as machine-readable 'key = value' records.
Identical invocations must produce byte-identical machine output, so every
value is formatted deterministically and the configuration is embedded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from . import __version__


@dataclass
class Report:
    title: str
    entries: list = field(default_factory=list)

    def add(self, key: str, value) -> None:
        self.entries.append((key, value))

    def extend(self, pairs: Iterable) -> None:
        for k, v in pairs:
            self.add(k, v)

    def records(self) -> str:
        lines = [f"report = {self.title}", f"version = {__version__}"]
        for k, v in self.entries:
            lines.append(f"{k} = {_fmt(v)}")
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        width = max([len(k) for k, _ in self.entries] + [6])
        lines = [f"== {self.title} (twoselmer {__version__}) =="]
        for k, v in self.entries:
            lines.append(f"  {k.ljust(width)}  {_fmt(v)}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.records() if fmt == "records" else self.table()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v) if v else "-"
    return str(v)
