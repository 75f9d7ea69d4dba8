"""Finite-web probabilistic coherence spaces.

A space is a finite web plus a list of nonnegative generator vectors; the
clique it denotes is the biorthogonal closure of the generators.  Membership
in that closure is decided by a linear program over the dual polytope
(maximise the pairing against the candidate subject to every generator
pairing at most 1).  Structural matrices (equalisers of the symmetry action
in delta coordinates, restriction and inclusion steps, the multinomial
embedding) are exact rationals; only the LP may run in float mode.

Two coordinate systems for multiset-indexed objects coexist on purpose: the
uniform-enumeration presentation used by the kernel side of the package and
the delta presentation used here.  They differ by the diagonal matrix of
multinomial coefficients (see `chains.multinomial_diagonal`); mixing them
silently is the main correctness hazard in this corner of the code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

from ._linalg import ONE, ZERO, as_matrix, frac, identity, matmul, kron, max_abs_diff
from .multiset import (
    Alphabet,
    Multiset,
    canonical_enumeration,
    difference,
    enumerations,
    multinomial,
)
from .optim import LinearProgram, solve
from .spaces import (
    IndexSet,
    bounded_multiset_space,
    multiset_space,
    product_space,
    symbol_space,
    tuple_space,
    unit_space,
)

FLOAT_TOL = 1e-9


class WebConditionError(Exception):
    """A coordinate of the web is unsupported by the generators."""


@dataclass(frozen=True)
class PcsVector:
    web: IndexSet
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.web):
            raise ValueError("coefficient vector length must match web size")
        if any(v < 0 for v in self.coeffs):
            raise ValueError("coefficients must be nonnegative")

    @classmethod
    def of(cls, web: IndexSet, *coeffs) -> "PcsVector":
        return cls(web, tuple(frac(v) for v in coeffs))

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.coeffs)

    def at(self, label):
        return self.coeffs[self.web.index(label)]


@dataclass(frozen=True)
class PcsMatrix:
    """Nonnegative matrix indexed (source web, target web)."""

    source: IndexSet
    target: IndexSet
    entries: tuple
    morphism_checked: bool = False

    def __post_init__(self):
        if len(self.entries) != len(self.source):
            raise ValueError("entry row count must match source web")
        for row in self.entries:
            if len(row) != len(self.target):
                raise ValueError("entry row width must match target web")
            if any(v < 0 for v in row):
                raise ValueError("matrix entries must be nonnegative")

    @classmethod
    def from_entries(cls, source: IndexSet, target: IndexSet, entries) -> "PcsMatrix":
        return cls(source, target, as_matrix(entries))

    def entry(self, src_label, tgt_label):
        return self.entries[self.source.index(src_label)][self.target.index(tgt_label)]

    def push(self, x: PcsVector) -> PcsVector:
        """Apply to a vector over the source web: (f.x)_b = sum_a f[a][b] x_a."""
        if x.web.labels != self.source.labels:
            raise ValueError("vector web does not match matrix source")
        out = [ZERO] * len(self.target)
        for a, xa in enumerate(x.coeffs):
            if xa:
                row = self.entries[a]
                for b, v in enumerate(row):
                    if v:
                        out[b] += xa * v
        return PcsVector(self.target, tuple(out))

    def deviation(self, other: "PcsMatrix") -> Fraction:
        if self.source.labels != other.source.labels or self.target.labels != other.target.labels:
            raise ValueError("matrices must share webs")
        return max_abs_diff(self.entries, other.entries)


def compose(f: PcsMatrix, g: PcsMatrix) -> PcsMatrix:
    """Matrix composition, f then g."""
    if f.target.labels != g.source.labels:
        raise ValueError("cannot compose: webs do not match")
    return PcsMatrix(f.source, g.target, matmul(f.entries, g.entries))


def tensor_matrix(f: PcsMatrix, g: PcsMatrix) -> PcsMatrix:
    return PcsMatrix(
        product_space(f.source, g.source),
        product_space(f.target, g.target),
        kron(f.entries, g.entries),
    )


def identity_matrix(web: IndexSet) -> PcsMatrix:
    return PcsMatrix(web, web, identity(len(web)))


# -- pairing and (bi)orthogonality ----------------------------------------

def pairing(x: PcsVector, u: PcsVector):
    if x.web.labels != u.web.labels:
        raise ValueError("pairing requires a shared web")
    return sum((a * b for a, b in zip(x.coeffs, u.coeffs)), start=ZERO)


def dual_membership(generators, u: PcsVector, tol=None) -> bool:
    """Whether u pairs at most 1 with every generator."""
    if tol is None:
        tol = ZERO if u.exact and all(g.exact for g in generators) else FLOAT_TOL
    return all(pairing(g, u) <= 1 + tol for g in generators)


@dataclass(frozen=True)
class Membership:
    inside: bool
    optimum: object
    witness: PcsVector | None  # separating dual point when outside


def biorthogonal_membership(generators, x: PcsVector, mode: str | None = None) -> Membership:
    """Decide x in (generators)^{perp perp} by solving the dual-polytope LP.

    Maximises <x, u> over u >= 0 with <g, u> <= 1 for every generator; x is
    in the closure exactly when the optimum is at most 1.  An unbounded LP
    means some coordinate of x is unsupported by every generator, which
    violates the web condition.
    """
    if not generators:
        raise ValueError("need at least one generator")
    if mode is None:
        mode = "exact" if x.exact and all(g.exact for g in generators) else "float"
    web = x.web
    for g in generators:
        if g.web.labels != web.labels:
            raise ValueError("generators and candidate must share a web")
    lp = LinearProgram(
        objective=tuple(x.coeffs),
        a_ub=tuple(tuple(g.coeffs) for g in generators),
        b_ub=(1,) * len(generators),
        mode=mode,
    )
    sol = solve(lp)
    if sol.status == "unbounded":
        raise WebConditionError(
            "dual polytope unbounded: some web coordinate has no generator support"
        )
    tol = ZERO if mode == "exact" else FLOAT_TOL
    inside = sol.value <= 1 + tol
    witness = None if inside else PcsVector(web, tuple(sol.x))
    return Membership(inside, sol.value, witness)


# -- spaces ----------------------------------------------------------------

@dataclass(frozen=True)
class Pcs:
    """Finite web plus generators; the clique is their biorthogonal closure."""

    web: IndexSet
    generators: tuple
    name: str = "pcs"

    def __post_init__(self):
        for g in self.generators:
            if g.web.labels != self.web.labels:
                raise ValueError("generator web does not match space web")
        for i, label in enumerate(self.web.labels):
            if not any(g.coeffs[i] > 0 for g in self.generators):
                raise WebConditionError(
                    f"web coordinate {label!r} unsupported by every generator"
                )

    def contains(self, x: PcsVector, mode: str | None = None) -> Membership:
        return biorthogonal_membership(self.generators, x, mode=mode)

    @property
    def alphabet(self) -> Alphabet:
        """The alphabet of a symbol-labelled web (fails on structured webs)."""
        if not all(isinstance(s, str) for s in self.web.labels):
            raise TypeError(f"web of {self.name} is not symbol-labelled")
        return Alphabet(self.web.labels)


def unit_pcs() -> Pcs:
    web = unit_space()
    return Pcs(web, (PcsVector.of(web, 1),), "unit")


def ground_pcs(alphabet: Alphabet) -> Pcs:
    """Subdistributions over the alphabet: unit-vector generators."""
    web = symbol_space(alphabet)
    gens = []
    for i in range(len(alphabet)):
        coeffs = [ZERO] * len(alphabet)
        coeffs[i] = ONE
        gens.append(PcsVector(web, tuple(coeffs)))
    return Pcs(web, tuple(gens), "ground")


def bool_pcs() -> Pcs:
    return ground_pcs(Alphabet.of("t", "f"))


def tensor_pcs(a: Pcs, b: Pcs) -> Pcs:
    web = product_space(a.web, b.web)
    gens = tuple(
        PcsVector(web, tuple(x * y for x in ga.coeffs for y in gb.coeffs))
        for ga in a.generators
        for gb in b.generators
    )
    return Pcs(web, gens, f"tensor({a.name},{b.name})")


def with_unit_pcs(a: Pcs, pad_symbol: str = "*") -> Pcs:
    """The cartesian product a & 1 over the padded symbol web.

    Elements are pairs (element of a, scalar in [0,1]); the generators pad
    each generator of a with a unit coordinate, and their biorthogonal
    closure is exactly that product.
    """
    padded = a.alphabet.pad(pad_symbol)
    web = symbol_space(padded)
    gens = tuple(
        PcsVector(web, tuple(g.coeffs) + (ONE,)) for g in a.generators
    )
    return Pcs(web, gens, f"with-unit({a.name})")


def multiset_pcs(a: Pcs, n: int) -> Pcs:
    """Symmetric power over size-n multisets, uniform-enumeration coordinates.

    Generators are the tally-map images of n-fold tensor products of the
    generators of a (mixed products included, or middle coordinates of the
    web would go unsupported): the image of g1 (x) ... (x) gn has
    coefficient sum over enumerations t of mu of prod_j gj(t_j) at mu.
    These suffice to reproduce the clique by biorthogonal closure at the
    web sizes handled here.
    """
    alphabet = a.alphabet
    web = multiset_space(alphabet, n)
    gens = []
    for combo in itertools.combinations_with_replacement(a.generators, n):
        coeffs = []
        for counts in web.labels:
            v = ZERO
            for t in enumerations(Multiset(alphabet, counts)):
                term = ONE
                for g, pos in zip(combo, t):
                    term *= frac(g.coeffs[pos])
                    if not term:
                        break
                v += term
            coeffs.append(v)
        gens.append(PcsVector(web, tuple(coeffs)))
    if n == 0:
        gens = [PcsVector(web, (ONE,))]
    return Pcs(web, tuple(gens), f"M{n}({a.name})")


def _grid_points(k: int, resolution: int):
    # all rational subdistribution points with denominator `resolution`
    for total in range(resolution + 1):
        for cuts in itertools.combinations(range(total + k - 1), k - 1):
            parts = []
            prev = -1
            for c in cuts:
                parts.append(c - prev - 1)
                prev = c
            parts.append(total + k - 2 - prev)
            yield tuple(Fraction(p, resolution) for p in parts)


def bang_pcs(alphabet: Alphabet, depth: int, grid_resolution: int = 4) -> Pcs:
    """Depth-truncated exponential: promotions at grid points as generators.

    The true clique is generated by all promotions, an uncountable family;
    this finite under-approximation makes "inside" verdicts sound, while an
    "outside" verdict is only as strong as the grid resolution used.
    """
    web = bounded_multiset_space(alphabet, depth)
    gens = []
    for point in _grid_points(len(alphabet), grid_resolution):
        coeffs = []
        for counts in web.labels:
            v = ONE
            for p, c in zip(point, counts):
                if c:
                    v *= p**c
            coeffs.append(v)
        gens.append(PcsVector(web, tuple(coeffs)))
    return Pcs(web, tuple(gens), f"bang-truncation(depth={depth},grid={grid_resolution})")


# -- structural matrices ----------------------------------------------------

def _alphabet_of(space) -> Alphabet:
    if isinstance(space, Pcs):
        return space.alphabet
    if isinstance(space, Alphabet):
        return space
    raise TypeError("expected a Pcs or an Alphabet")


def eq_delta(space, n: int) -> PcsMatrix:
    """Delta-coordinate equaliser: spreads the coefficient at mu to every
    enumeration of mu.  Equalises all n! coordinate symmetries exactly."""
    alphabet = _alphabet_of(space)
    src = multiset_space(alphabet, n)
    tgt = tuple_space(alphabet, n)
    rows = []
    for counts in src.labels:
        row = [ZERO] * len(tgt)
        for t in enumerations(Multiset(alphabet, counts)):
            row[tgt.index(t)] = ONE
        rows.append(tuple(row))
    return PcsMatrix(src, tgt, tuple(rows))


def canonical_section(space, n: int) -> PcsMatrix:
    """Right inverse of eq_delta: reads one fixed enumeration per multiset."""
    alphabet = _alphabet_of(space)
    src = tuple_space(alphabet, n)
    tgt = multiset_space(alphabet, n)
    rows = []
    canon = {
        canonical_enumeration(Multiset(alphabet, counts)): tgt.index(counts)
        for counts in tgt.labels
    }
    for t in src.labels:
        row = [ZERO] * len(tgt)
        if t in canon:
            row[canon[t]] = ONE
        rows.append(tuple(row))
    return PcsMatrix(src, tgt, tuple(rows))


def dd_inclusion(alphabet: Alphabet, n: int) -> PcsMatrix:
    """Delta form of the draw-and-delete step: entry 1 exactly when nu is
    included in mu (|mu| = n+1, |nu| = n).  Conjugate to the uniform kernel
    by the multinomial diagonal."""
    src = multiset_space(alphabet, n + 1)
    tgt = multiset_space(alphabet, n)
    rows = []
    for mu in src.labels:
        row = [ZERO] * len(tgt)
        for x in range(len(alphabet)):
            if mu[x]:
                nu = list(mu)
                nu[x] -= 1
                row[tgt.index(tuple(nu))] = ONE
        rows.append(tuple(row))
    return PcsMatrix(src, tgt, tuple(rows))


def dd_restriction(alphabet: Alphabet, n: int) -> PcsMatrix:
    """Chain step for the truncated exponential: keep multisets of size <= n,
    drop those of size n+1."""
    src = bounded_multiset_space(alphabet, n + 1)
    tgt = bounded_multiset_space(alphabet, n)
    rows = []
    for mu in src.labels:
        row = [ZERO] * len(tgt)
        if sum(mu) <= n:
            row[tgt.index(mu)] = ONE
        rows.append(tuple(row))
    return PcsMatrix(src, tgt, tuple(rows))


def multinomial_embedding(alphabet: Alphabet, n: int) -> PcsMatrix:
    """Canonical chain map from exact-size to bounded multiset coordinates:
    entry(mu, nu) = multinomial(mu - nu) when nu is included in mu, else 0."""
    src = multiset_space(alphabet, n)
    tgt = bounded_multiset_space(alphabet, n)
    rows = []
    for mc in src.labels:
        mu = Multiset(alphabet, mc)
        row = []
        for nc in tgt.labels:
            d = difference(mu, Multiset(alphabet, nc))
            row.append(Fraction(multinomial(d)) if d is not None else ZERO)
        rows.append(tuple(row))
    return PcsMatrix(src, tgt, tuple(rows))


# -- truncated exponential elements -----------------------------------------

@dataclass(frozen=True)
class BangElement:
    """Depth-truncated element of the exponential: a full coefficient table
    on multisets of size <= depth."""

    alphabet: Alphabet
    depth: int
    coeffs: tuple  # aligned with bounded_multiset_space(alphabet, depth)

    def __post_init__(self):
        expected = len(bounded_multiset_space(self.alphabet, self.depth))
        if len(self.coeffs) != expected:
            raise ValueError(
                f"need {expected} coefficients for depth {self.depth}, got {len(self.coeffs)}"
            )
        if any(v < 0 for v in self.coeffs):
            raise ValueError("coefficients must be nonnegative")

    @cached_property
    def web(self) -> IndexSet:
        return bounded_multiset_space(self.alphabet, self.depth)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.coeffs)

    @classmethod
    def from_table(cls, alphabet: Alphabet, depth: int, table: dict) -> "BangElement":
        web = bounded_multiset_space(alphabet, depth)
        coeffs = tuple(frac(table.get(counts, 0)) for counts in web.labels)
        return cls(alphabet, depth, coeffs)

    def at(self, counts: tuple[int, ...]):
        return self.coeffs[self.web.index(counts)]

    def scale(self, factor) -> "BangElement":
        f = frac(factor)
        return BangElement(self.alphabet, self.depth, tuple(f * v for v in self.coeffs))

    def add(self, other: "BangElement") -> "BangElement":
        if other.alphabet != self.alphabet or other.depth != self.depth:
            raise ValueError("can only add elements with equal alphabet and depth")
        return BangElement(
            self.alphabet,
            self.depth,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )


def promotion(x: PcsVector, depth: int) -> BangElement:
    """Promotion of a subdistribution: coefficient prod_a x_a^mu(a) at mu.

    The coefficient at the empty multiset is 1 and the table is
    multiplicative: the coefficient at mu+nu is the product of those at mu
    and nu.
    """
    total = sum(x.coeffs, start=ZERO)
    tol = ZERO if x.exact else FLOAT_TOL
    if total > 1 + tol:
        raise ValueError("promotion requires a subdistribution (coefficients sum <= 1)")
    alphabet = Alphabet(x.web.labels)
    web = bounded_multiset_space(alphabet, depth)
    coeffs = []
    for counts in web.labels:
        v = ONE
        for xa, c in zip(x.coeffs, counts):
            if c:
                v *= frac(xa) ** c if isinstance(xa, (int, Fraction)) else xa**c
        coeffs.append(v)
    return BangElement(alphabet, depth, tuple(coeffs))


def restrict_to_depth(b: BangElement, n: int) -> PcsVector:
    """Limit-cone leg: the coefficient table cut down to multisets of size <= n."""
    if n > b.depth:
        raise ValueError(f"cannot restrict to depth {n}: element has depth {b.depth}")
    web = bounded_multiset_space(b.alphabet, n)
    src = b.web
    return PcsVector(web, tuple(b.coeffs[src.index(lab)] for lab in web.labels))


# -- morphism certification --------------------------------------------------

@dataclass(frozen=True)
class CertificationReport:
    ok: bool
    witness_generator: PcsVector | None
    membership: Membership | None


def certify_morphism(
    m: PcsMatrix, source: Pcs, target: Pcs, mode: str | None = None
) -> tuple[PcsMatrix, CertificationReport]:
    """Check that m maps every source generator into the target clique."""
    for g in source.generators:
        result = target.contains(m.push(g), mode=mode)
        if not result.inside:
            return m, CertificationReport(False, g, result)
    return replace(m, morphism_checked=True), CertificationReport(True, None, None)
