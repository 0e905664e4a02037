"""Named parameter sets and flat key=value config files.

Parameters are referenced by name (matching the published model symbols
transliterated to ASCII: ``alpha``, ``gamma_y``, ...) when a model is built,
then compiled down to positional access for the integration inner loop.
Lookup of an unknown name is always a hard error, never a silent default.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Mapping


class UnknownParameterError(KeyError):
    """Raised when a parameter name is not present in a :class:`ParamSet`."""

    def __init__(self, name: str, known: Iterable[str]):
        super().__init__(name)
        self.name = name
        self.known = tuple(known)

    def __str__(self) -> str:
        return f"unknown parameter {self.name!r}; known: {', '.join(self.known)}"


class ParamSet(Mapping[str, float]):
    """Immutable ordered mapping of parameter name -> value.

    Safe to share across threads; all "mutating" operations return a new set.
    """

    __slots__ = ("_data",)

    def __init__(self, values: Mapping[str, float] | Iterable[tuple[str, float]] = ()):
        data = dict(values)
        for k, v in data.items():
            if not isinstance(k, str) or not k:
                raise TypeError(f"parameter names must be non-empty strings, got {k!r}")
            data[k] = float(v)
        object.__setattr__(self, "_data", data)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("ParamSet is immutable")

    def __getitem__(self, name: str) -> float:
        try:
            return self._data[name]
        except KeyError:
            raise UnknownParameterError(name, self._data) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self._data.items())
        return f"ParamSet({inner})"

    def __eq__(self, other) -> bool:
        if isinstance(other, ParamSet):
            return self._data == other._data
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._data.items()))

    def updated(self, overrides: Mapping[str, float]) -> "ParamSet":
        """Return a copy with ``overrides`` applied.

        Every override key must already exist: overriding an unknown
        parameter is a hard error.
        """
        for k in overrides:
            if k not in self._data:
                raise UnknownParameterError(k, self._data)
        merged = dict(self._data)
        merged.update({k: float(v) for k, v in overrides.items()})
        return ParamSet(merged)

    def subset(self, names: Iterable[str]) -> tuple[float, ...]:
        """Extract values positionally, erroring on any missing name."""
        return tuple(self[n] for n in names)


def parse_config_text(text: str) -> dict[str, float]:
    """Parse a flat ``key=value`` config (one pair per line).

    Blank lines and ``#`` comments are ignored.  Values must parse as floats.
    """
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        try:
            out[key] = float(val.strip())
        except ValueError:
            raise ValueError(f"line {lineno}: bad numeric value {val.strip()!r}") from None
        if not key:
            raise ValueError(f"line {lineno}: empty key")
    return out


def load_config(path) -> dict[str, float]:
    """Read a key=value config file; see :func:`parse_config_text`."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
