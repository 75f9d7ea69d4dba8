"""Exact multiset combinatorics over finite ordered alphabets.

Multisets are stored as count vectors aligned with a fixed symbol order, so
they double as canonical matrix indices everywhere else in the package.  All
counts and multinomial coefficients are arbitrary-precision integers; the
chain and square checks built on top require exact arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial


@dataclass(frozen=True)
class Alphabet:
    """Finite ordered alphabet; the order is total and fixed at construction."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"alphabet symbols must be distinct: {self.symbols}")

    @classmethod
    def of(cls, *symbols: str) -> "Alphabet":
        return cls(tuple(symbols))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise KeyError(f"symbol {symbol!r} not in alphabet {self.symbols}") from None

    def pad(self, pad_symbol: str = "*") -> "Alphabet":
        """Alphabet extended with a fresh padding symbol (appended last)."""
        if pad_symbol in self.symbols:
            raise ValueError(f"padding symbol {pad_symbol!r} already present")
        return Alphabet(self.symbols + (pad_symbol,))


BOOL = Alphabet.of("t", "f")


@dataclass(frozen=True)
class Multiset:
    """A multiset over an alphabet, as a count vector in alphabet order."""

    alphabet: Alphabet
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.alphabet):
            raise ValueError("count vector length must match alphabet size")
        if any((not isinstance(c, int)) or c < 0 for c in self.counts):
            raise ValueError(f"counts must be nonnegative integers: {self.counts}")

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, symbols) -> "Multiset":
        counts = [0] * len(alphabet)
        for s in symbols:
            counts[alphabet.index(s)] += 1
        return cls(alphabet, tuple(counts))

    @classmethod
    def empty(cls, alphabet: Alphabet) -> "Multiset":
        return cls(alphabet, (0,) * len(alphabet))

    @property
    def size(self) -> int:
        return sum(self.counts)

    def count(self, symbol: str) -> int:
        return self.counts[self.alphabet.index(symbol)]

    def add(self, position: int) -> "Multiset":
        """New multiset with one extra copy of the symbol at `position`."""
        c = list(self.counts)
        c[position] += 1
        return Multiset(self.alphabet, tuple(c))

    def contains(self, other: "Multiset") -> bool:
        """Componentwise inclusion other <= self."""
        return all(a <= b for a, b in zip(other.counts, self.counts))

    def __str__(self) -> str:
        inner = ",".join(
            itertools.chain.from_iterable(
                [s] * c for s, c in zip(self.alphabet.symbols, self.counts)
            )
        )
        return f"[{inner}]"


def _compositions_desc(n: int, k: int):
    # all k-part compositions of n, in descending lexicographic order
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions_desc(n - first, k - 1):
            yield (first,) + rest


def enumerate_multisets(alphabet: Alphabet, n: int) -> list[Multiset]:
    """All multisets of size exactly n, in descending lexicographic count order.

    The list has length C(n+k-1, k-1); its order is the canonical matrix
    index order used by every kernel and web in the package.

    >>> [str(m) for m in enumerate_multisets(BOOL, 2)]
    ['[t,t]', '[t,f]', '[f,f]']
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return [Multiset(alphabet, c) for c in _compositions_desc(n, len(alphabet))]


def enumerate_bounded_multisets(alphabet: Alphabet, n: int) -> list[Multiset]:
    """All multisets of size <= n: sizes 0..n concatenated, canonical order within each size."""
    out: list[Multiset] = []
    for m in range(n + 1):
        out.extend(enumerate_multisets(alphabet, m))
    return out


def multinomial(mu: Multiset) -> int:
    """Number of distinct tuples enumerating mu: size! / prod(counts!).

    Exact integer arithmetic; Python integers are unbounded so the value can
    never overflow or silently degrade.

    >>> multinomial(Multiset.from_symbols(BOOL, "tf"))
    2
    """
    num = factorial(mu.size)
    for c in mu.counts:
        num //= factorial(c)
    return num


def multiset_of(alphabet: Alphabet, entries: tuple[int, ...]) -> Multiset:
    """Tally a tuple of alphabet positions into a multiset."""
    counts = [0] * len(alphabet)
    for e in entries:
        if not 0 <= e < len(alphabet):
            raise IndexError(f"tuple entry {e} out of range for alphabet of size {len(alphabet)}")
        counts[e] += 1
    return Multiset(alphabet, tuple(counts))


def difference(mu: Multiset, nu: Multiset) -> Multiset | None:
    """Componentwise mu - nu when nu is included in mu, else None."""
    if not mu.contains(nu):
        return None
    return Multiset(mu.alphabet, tuple(a - b for a, b in zip(mu.counts, nu.counts)))


def enumerations(mu: Multiset) -> list[tuple[int, ...]]:
    """All distinct position tuples whose tally is mu; exactly multinomial(mu) of them."""
    seq = tuple(
        itertools.chain.from_iterable([i] * c for i, c in enumerate(mu.counts))
    )
    return sorted(set(itertools.permutations(seq)))


def canonical_enumeration(mu: Multiset) -> tuple[int, ...]:
    """The nondecreasing enumeration of mu (the fixed section of the tally map)."""
    return tuple(
        itertools.chain.from_iterable([i] * c for i, c in enumerate(mu.counts))
    )


def multiset_count(k: int, n: int) -> int:
    """Number of size-n multisets over k symbols (stars and bars)."""
    return comb(n + k - 1, k - 1)
