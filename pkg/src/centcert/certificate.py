"""Shared certificate records and their JSON form.

A certificate is a list of named checks, each carrying the computed value,
the bound it was compared against, the relation, and the outcome.  Values
are exact strings: rationals as "a/b", scalars in canonical form, integers
bare.  The overall verdict is the conjunction of the items.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from gmpy2 import mpq

from .exact import ExactScalar

__all__ = ["CertItem", "Certificate", "format_value", "RELATIONS"]

RELATIONS = ("<=", ">=", "==", "!=", "in", "true")


def format_value(value) -> str:
    """Canonical string for a certificate field."""
    if isinstance(value, ExactScalar):
        return value.canonical_str()
    if isinstance(value, (Fraction, type(mpq(1)))):
        q = Fraction(value.numerator, value.denominator)
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    raise TypeError(f"no canonical form for {type(value).__name__}")


@dataclass(frozen=True)
class CertItem:
    name: str
    value: str
    bound: str
    relation: str
    passed: bool
    note: str = ""

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @classmethod
    def check(cls, name, value, relation, bound, passed, note="") -> "CertItem":
        return cls(
            name=name,
            value=format_value(value),
            bound=format_value(bound),
            relation=relation,
            passed=bool(passed),
            note=note,
        )

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "value": self.value,
            "bound": self.bound,
            "relation": self.relation,
            "pass": self.passed,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Certificate:
    theorem: str
    params: dict
    items: list = field(default_factory=list)
    engine: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def add(self, name, value, relation, bound, passed, note="") -> CertItem:
        item = CertItem.check(name, value, relation, bound, passed, note)
        self.items.append(item)
        return item

    def item(self, name: str) -> CertItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def as_dict(self, timestamp: bool = True) -> dict:
        out = {
            "theorem": self.theorem,
            "params": {k: _param_value(v) for k, v in self.params.items()},
            "items": [item.as_dict() for item in self.items],
            "pass": self.passed,
            "engine": dict(self.engine),
        }
        if timestamp:
            out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return out

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.as_dict(timestamp=timestamp), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        data = json.loads(text)
        cert = cls(
            theorem=data["theorem"],
            params=data["params"],
            engine=data.get("engine", {}),
        )
        for row in data["items"]:
            cert.items.append(
                CertItem(
                    name=row["name"],
                    value=row["value"],
                    bound=row["bound"],
                    relation=row["relation"],
                    passed=row["pass"],
                    note=row.get("note", ""),
                )
            )
        if cert.passed != data["pass"]:
            raise ValueError("stored verdict disagrees with items")
        return cert


def _param_value(v):
    if isinstance(v, Fraction):
        return format_value(v)
    if isinstance(v, (list, tuple)):
        return [_param_value(x) for x in v]
    if isinstance(v, ExactScalar):
        return v.canonical_str()
    return v
