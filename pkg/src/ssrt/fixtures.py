"""Builtin machines paired with the oracles they implement."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .analysis import Transduction, builtin
from .machine import Ssrt, parse_machine

KINDS = ("machine", "oracle", "pair")


@dataclass(frozen=True)
class Fixture:
    name: str
    kind: str
    machine: Ssrt | None
    oracle: Transduction | None
    note: str

    @property
    def payload(self):
        if self.kind == "pair":
            return (self.machine, self.oracle)
        return self.machine if self.kind == "machine" else self.oracle


# name -> (machine file, oracle alphabet, note)
_REGISTRY: dict[str, tuple[str, tuple[str, ...] | None, str]] = {
    "identity_or_reverse": (
        "identity_or_reverse.ssrt",
        ("a", "b", "c"),
        "two variables, one register: identity if the first and last values agree, else reverse",
    ),
    "name_reversal": ("name_reversal.ssrt", None, "drops the title and lists names in reverse"),
    "double_gate": ("double_gate.ssrt", None, "concatenation of the first-value and second-value gated copies"),
    "third_or_fourth": ("third_or_fourth.ssrt", None, "value needed later although it is not memorable"),
    "identity": ("identity.ssrt", None, "copies the input"),
    "reverse": ("reverse.ssrt", None, "reverses the input"),
}


class UnknownFixture(KeyError):
    pass


def names() -> list[str]:
    return list(_REGISTRY)


def machine_text(name: str) -> str:
    if name not in _REGISTRY:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(_REGISTRY)}")
    return resources.files("ssrt.data").joinpath(_REGISTRY[name][0]).read_text()


@lru_cache(maxsize=None)
def load_fixture(name: str) -> Fixture:
    text = machine_text(name)
    _, alphabet, note = _REGISTRY[name]
    return Fixture(name, "pair", parse_machine(text), builtin(name, alphabet), note)


def all_fixtures() -> list[Fixture]:
    return [load_fixture(n) for n in _REGISTRY]
