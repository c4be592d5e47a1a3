"""Example programs shipped with the package."""

from __future__ import annotations

from importlib.resources import files

from ..lang import Program, parse_program


def names() -> list[str]:
    return sorted(p.name[:-4] for p in files(__name__).iterdir() if p.name.endswith(".fun"))


def source(name: str) -> str:
    return (files(__name__) / f"{name}.fun").read_text(encoding="utf-8")


def load_program(name: str) -> Program:
    return parse_program(source(name))
