"""Workspace files: a tower declaration plus named expressions and operators.

Example::

    [vars]
    x, y, z

    [generators]
    t = x: t, y: -y*t      # unlisted partials are 0

    [exprs]
    theta = x^2

    [operators]
    X1 = x^2*Dy + x*y*Dz + 1
    X2 = Dx + 2/theta*x    # earlier names may be referenced

Names are unique across sections.
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

from .errors import NameCollision, WorkspaceError
from .field import FieldTower, RationalExpr
from .operators import Lpdo
from .text import parse_expr, parse_operator

__all__ = ["Workspace", "parse_generator_spec"]

_SECTIONS = ("vars", "generators", "exprs", "operators")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _split_names(text: str) -> list[str]:
    return [s for s in re.split(r"[,\s]+", text.strip()) if s]


def parse_generator_spec(text: str) -> dict[str, str]:
    """``"x: t, y: -y*t"`` -> ``{"x": "t", "y": "-y*t"}``."""
    partials = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        var, sep, value = part.partition(":")
        if not sep:
            raise WorkspaceError(f"generator partial {part!r} must look like 'var: expr'")
        partials[var.strip()] = value.strip()
    return partials


class Workspace:
    def __init__(self, tower: FieldTower):
        self.tower = tower
        self.exprs: dict[str, RationalExpr] = {}
        self.operators: dict[str, Lpdo] = {}
        self.sources: dict[str, str] = {}

    @property
    def bindings(self) -> dict[str, object]:
        return {**self.exprs, **self.operators}

    def _claim(self, name: str, source: str):
        if not _NAME_RE.match(name):
            raise WorkspaceError(f"invalid name {name!r}")
        if name in self.sources or name in self.tower.names:
            raise NameCollision(f"name {name!r} is already defined")
        if name.startswith("D") and name[1:] in self.tower.vars:
            raise NameCollision(f"name {name!r} shadows a derivation")
        self.sources[name] = source

    def define_expr(self, name: str, text: str) -> RationalExpr:
        self._claim(name, text)
        value = self.exprs[name] = parse_expr(text, self.tower, self.bindings)
        return value

    def define_operator(self, name: str, text: str) -> Lpdo:
        self._claim(name, text)
        value = self.operators[name] = parse_operator(text, self.tower, self.bindings)
        return value

    def operator(self, text: str) -> Lpdo:
        """A stored operator by name, or operator text parsed in this workspace."""
        return parse_operator(text, self.tower, self.bindings)

    def expr(self, text: str) -> RationalExpr:
        return parse_expr(text, self.tower, self.bindings)

    @classmethod
    def from_text(cls, text: str) -> "Workspace":
        cp = configparser.ConfigParser(
            delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
            allow_no_value=True, interpolation=None, strict=True, empty_lines_in_values=False,
        )
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.DuplicateOptionError as e:
            raise NameCollision(f"name {e.option!r} is defined twice") from e
        except configparser.Error as e:
            raise WorkspaceError(str(e).splitlines()[0]) from e
        unknown = [s for s in cp.sections() if s not in _SECTIONS]
        if unknown:
            raise WorkspaceError(f"unknown section(s): {', '.join(unknown)}")
        if not cp.has_section("vars"):
            raise WorkspaceError("missing [vars] section")
        names = []
        for key, value in cp.items("vars"):
            names += _split_names(key if value is None else value)
        tower = FieldTower(names)
        if cp.has_section("generators"):
            for gen, spec in cp.items("generators"):
                if spec is None:
                    raise WorkspaceError(f"generator {gen!r} needs its partial derivatives")
                tower = tower.declare_generator(gen, parse_generator_spec(spec))
        ws = cls(tower)
        for section, define in (("exprs", ws.define_expr), ("operators", ws.define_operator)):
            if cp.has_section(section):
                for name, value in cp.items(section):
                    if value is None:
                        raise WorkspaceError(f"{name!r} in [{section}] has no value")
                    define(name, value)
        return ws

    @classmethod
    def load(cls, path: str | Path) -> "Workspace":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise WorkspaceError(f"cannot read workspace {path}: {e.strerror}") from e
        return cls.from_text(text)
