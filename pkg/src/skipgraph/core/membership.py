"""Membership vectors: lazily extended random words over a finite alphabet."""
from __future__ import annotations

from typing import Iterable, Sequence

from ..seeding import derive_seed


class MembershipVector:
    """An effectively infinite word whose digits are generated on demand.

    Digit i, once read, is fixed forever; extension is a pure function of
    (generator_seed, position), so two vectors with the same seed agree at
    every index. Explicit digits may be supplied up front to pin a prefix,
    with the seeded stream taking over beyond them.
    """

    __slots__ = ("alphabet_size", "generator_seed", "_digits")

    def __init__(
        self,
        generator_seed: int = 0,
        alphabet_size: int = 2,
        digits: Sequence[int] | Iterable[int] = (),
    ) -> None:
        if alphabet_size < 2:
            raise ValueError("alphabet_size must be at least 2")
        self.alphabet_size = alphabet_size
        self.generator_seed = generator_seed
        self._digits: list[int] = []
        for d in digits:
            if not 0 <= d < alphabet_size:
                raise ValueError(f"digit {d} outside alphabet of size {alphabet_size}")
            self._digits.append(d)

    def digit(self, i: int) -> int:
        """Return digit i, extending the vector deterministically if needed."""
        if i < 0:
            raise IndexError("digit index must be non-negative")
        digits = self._digits
        while len(digits) <= i:
            nxt = derive_seed(self.generator_seed, "mv-digit", len(digits))
            digits.append(nxt % self.alphabet_size)
        return digits[i]

    def prefix(self, length: int) -> tuple[int, ...]:
        if length > 0:
            self.digit(length - 1)
        return tuple(self._digits[:length])

    def known_length(self) -> int:
        return len(self._digits)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        shown = "".join(str(d) for d in self._digits[:12])
        return f"MembershipVector({shown}..., seed={self.generator_seed:#x})"


def mv_digit(m: MembershipVector, i: int) -> int:
    return m.digit(i)


def common_prefix_len(a: MembershipVector, b: MembershipVector, cap: int) -> int:
    """Length of the longest common prefix of a and b, truncated at cap."""
    n = 0
    while n < cap and a.digit(n) == b.digit(n):
        n += 1
    return n
