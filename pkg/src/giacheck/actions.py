"""Communication action labels shared by pomsets and automata."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

OUT = "!"
IN = "?"
INTERNAL = "!?"


@dataclass(frozen=True, order=True)
class ActionLabel:
    """``AB!m``, ``AB?m`` or ``AB!?m`` on the channel from ``sender`` to ``receiver``."""

    sender: str
    receiver: str
    polarity: str
    message: str

    def __post_init__(self):
        if self.polarity not in (OUT, IN, INTERNAL):
            raise ValueError(f"bad polarity {self.polarity!r}")
        if self.sender == self.receiver:
            raise ValueError(f"label {self} has identical endpoints")

    @property
    def is_output(self) -> bool:
        return self.polarity == OUT

    @property
    def is_input(self) -> bool:
        return self.polarity == IN

    @property
    def is_internal(self) -> bool:
        return self.polarity == INTERNAL

    @property
    def subject(self) -> str:
        return self.receiver if self.polarity == IN else self.sender

    @property
    def object(self) -> str:
        return self.sender if self.polarity == IN else self.receiver

    @property
    def sobj(self) -> frozenset[str]:
        return frozenset((self.sender, self.receiver))

    def with_polarity(self, polarity: str) -> "ActionLabel":
        return ActionLabel(self.sender, self.receiver, polarity, self.message)

    def __str__(self):
        if len(self.sender) == 1 and len(self.receiver) == 1:
            return f"{self.sender}{self.receiver}{self.polarity}{self.message}"
        return f"{self.sender}-{self.receiver}{self.polarity}{self.message}"


class _Tau:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TAU"

    def __str__(self):
        return "τ"

    def __reduce__(self):
        return (_Tau, ())


TAU = _Tau()

Label = Union[ActionLabel, _Tau]


def out(a: str, b: str, m: str) -> ActionLabel:
    return ActionLabel(a, b, OUT, m)


def inp(a: str, b: str, m: str) -> ActionLabel:
    return ActionLabel(a, b, IN, m)


def internal(a: str, b: str, m: str) -> ActionLabel:
    return ActionLabel(a, b, INTERNAL, m)


_LABEL_RE = re.compile(r"^(?:(\w+)-(\w+)|(\w)(\w))(!\?|!|\?)(\w+)$")


def parse_label(text: str) -> Label:
    """Inverse of ``str`` on labels: ``AB!m``, ``A-B?m``, ``AB!?m`` or ``τ``/``tau``."""
    if text in ("τ", "tau"):
        return TAU
    m = _LABEL_RE.match(text)
    if m is None:
        raise ValueError(f"cannot parse label {text!r}")
    a = m.group(1) or m.group(3)
    b = m.group(2) or m.group(4)
    return ActionLabel(a, b, m.group(5), m.group(6))


def dual(x: ActionLabel) -> ActionLabel:
    """Swap ``!`` and ``?``; internal labels are self-dual."""
    if x is TAU:
        raise ValueError("τ has no dual")
    if x.polarity == OUT:
        return x.with_polarity(IN)
    if x.polarity == IN:
        return x.with_polarity(OUT)
    return x


def label_key(x: Label) -> tuple:
    """Total order on labels (τ first) for stable output."""
    if x is TAU:
        return ("",)
    return (x.sender, x.receiver, x.message, x.polarity)
