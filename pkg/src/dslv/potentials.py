"""Reproducible coefficient families and their one-token spec strings.

Grammar::

    zero | const:<c> | decay:<c> | random:<seed>,<lo>,<hi> | file:<path>

``decay:c`` means ``q(n) = c / (n + 1)**2``. ``random`` draws uniformly from
``[lo, hi)`` with a seeded generator; the value at index n does not depend on
the range requested, so ``q`` on ``[0, N]`` and on ``[1, N - 1]`` agree.
``file`` reads a flat list of numbers (JSON array or whitespace/comma
separated) whose first entry is the value at the first requested index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dslv.errors import DomainError
from dslv.lattice import LatticeFunction

RANDOM_FIRST_INDEX = -1


class PotentialSpecError(DomainError):
    pass


@dataclass(frozen=True)
class Potential:
    kind: str
    params: tuple = ()

    @classmethod
    def zero(cls) -> "Potential":
        return cls("const", (0.0,))

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Values on ``[lo, hi]`` (inclusive)."""
        if hi < lo:
            raise DomainError(f"empty range [{lo}, {hi}]")
        size = hi - lo + 1
        if self.kind == "const":
            return np.full(size, float(self.params[0]))
        if self.kind == "decay":
            n = np.arange(lo, hi + 1, dtype=float)
            return float(self.params[0]) / (n + 1.0) ** 2
        if self.kind == "random":
            seed, low, high = self.params
            if lo < RANDOM_FIRST_INDEX:
                raise DomainError(f"random potentials start at index {RANDOM_FIRST_INDEX}")
            rng = np.random.default_rng(seed)
            draw = rng.uniform(low, high, hi - RANDOM_FIRST_INDEX + 1)
            return draw[lo - RANDOM_FIRST_INDEX :]
        if self.kind == "file":
            data = _read_numbers(self.params[0])
            if data.size < size:
                raise PotentialSpecError(
                    f"{self.params[0]} holds {data.size} values, [{lo}, {hi}] needs {size}"
                )
            return data[:size].copy()
        raise DomainError(f"unknown potential kind {self.kind!r}")

    def lattice(self, lo: int, hi: int) -> LatticeFunction:
        return LatticeFunction(lo, self.values(lo, hi))

    def __str__(self) -> str:
        if self.kind == "random":
            seed, lo, hi = self.params
            return f"random:{seed},{lo!r},{hi!r}"
        if self.kind == "file":
            return f"file:{self.params[0]}"
        return f"{self.kind}:{float(self.params[0])!r}"


def _read_numbers(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PotentialSpecError(f"cannot read potential file {path}: {exc}") from None
    try:
        if text.lstrip().startswith("["):
            data = np.asarray(json.loads(text), dtype=float)
        else:
            data = np.asarray(text.replace(",", " ").split(), dtype=float)
    except (ValueError, TypeError):
        raise PotentialSpecError(f"{path} is not a flat numeric array") from None
    if data.ndim != 1 or not np.all(np.isfinite(data)):
        raise PotentialSpecError(f"{path} is not a flat finite numeric array")
    return data


def _number(text: str, spec: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise PotentialSpecError(f"bad number {text!r} in {spec!r}") from None
    if not np.isfinite(val):
        raise PotentialSpecError(f"non-finite number in {spec!r}")
    return val


def parse_potential(spec: str) -> Potential:
    """Parse a potential spec string.

    >>> parse_potential("decay:1")
    Potential(kind='decay', params=(1.0,))
    """
    spec = spec.strip()
    if spec == "zero":
        return Potential.zero()
    kind, sep, payload = spec.partition(":")
    if not sep or not payload:
        raise PotentialSpecError(f"expected <kind>:<payload>, got {spec!r}")
    if kind in ("const", "decay"):
        return Potential(kind, (_number(payload, spec),))
    if kind == "random":
        parts = payload.split(",")
        if len(parts) != 3:
            raise PotentialSpecError(f"random needs <seed>,<lo>,<hi>, got {spec!r}")
        try:
            seed = int(parts[0])
        except ValueError:
            raise PotentialSpecError(f"seed must be an integer in {spec!r}") from None
        if seed < 0:
            raise PotentialSpecError(f"seed must be non-negative in {spec!r}")
        lo, hi = _number(parts[1], spec), _number(parts[2], spec)
        if lo > hi:
            raise PotentialSpecError(f"random range has lo > hi in {spec!r}")
        return Potential("random", (seed, lo, hi))
    if kind == "file":
        return Potential("file", (payload,))
    raise PotentialSpecError(f"unknown potential kind {kind!r} in {spec!r}")
