"""Generic draw-and-delete chains over a copointed object.

A copointed object is a carrier together with a weakening map into the unit.
Over it, level n of the chain is the equaliser of the n! coordinate
symmetries on the n-fold power of the carrier, and the chain step is the
unique map making the square

    DD_n . eq_n  =  eq_{n+1} . (id^n (x) weaken)

commute (composition written source-to-target).  Both backends supply a
closed form for the step and a split section of the equaliser; the builder
constructs the closed form, checks the square exactly, and cross-checks the
step against the exact linear solve of the square, so a wrong closed form in
either backend cannot survive construction.

Chain limits are represented at a finite truncation as coherent families of
legs, not as new objects: for the truncated-exponential chain the coherent
families are exactly the depth-N BangElements, and for the urn chain over a
probability carrier they are the exchangeable urn laws.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from . import pcoh as _pcoh
from . import stoch as _stoch
from ._linalg import ONE, ZERO, LinearSolveError, identity, kron, matmul, max_abs_diff, solve_right
from .multiset import Alphabet, Multiset, multinomial
from .pcoh import Pcs, PcsMatrix, ground_pcs, with_unit_pcs
from .spaces import IndexSet, multiset_space, symbol_space, tuple_space, unit_space
from .stoch import FinKernel, all_perms, permute_tuple_columns


class ChainError(Exception):
    pass


class StochBackend:
    """Kernel-side backend: uniform-enumeration equaliser coordinates."""

    name = "stoch"

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.carrier = symbol_space(alphabet)

    def level(self, n: int) -> IndexSet:
        return multiset_space(self.alphabet, n)

    def power(self, n: int) -> IndexSet:
        return tuple_space(self.alphabet, n)

    def make(self, source, target, rows) -> FinKernel:
        return FinKernel(source, target, tuple(tuple(row) for row in rows))

    def compose(self, f, g):
        return _stoch.compose(f, g)

    def tensor(self, f, g):
        return _stoch.tensor(f, g)

    def identity_on(self, space):
        return _stoch.identity_kernel(space)

    def eq(self, n: int) -> FinKernel:
        return _stoch.eq_kernel(self.alphabet, n)

    def section(self, n: int) -> FinKernel:
        return _stoch.coeq_kernel(self.alphabet, n)

    def delete_map(self, weaken, n: int) -> FinKernel:
        """id^n (x) weaken on flat tuple spaces."""
        src = self.power(n + 1)
        tgt = self.power(n)
        wcol = [row[0] for row in weaken.rows]
        rows = []
        for t in src.labels:
            row = [ZERO] * len(tgt)
            w = wcol[t[n]]
            if w:
                row[tgt.index(t[:n])] = w
            rows.append(tuple(row))
        return FinKernel(src, tgt, tuple(rows))

    def dd_closed_form(self, weaken, n: int) -> FinKernel:
        """Weighted remove-one step: entry(mu, mu - [b]) = w_b mu(b)/(n+1)."""
        src = self.level(n + 1)
        tgt = self.level(n)
        wcol = [row[0] for row in weaken.rows]
        rows = []
        for mu in src.labels:
            row = [ZERO] * len(tgt)
            for b, c in enumerate(mu):
                if c and wcol[b]:
                    nu = list(mu)
                    nu[b] -= 1
                    row[tgt.index(tuple(nu))] = wcol[b] * Fraction(c, n + 1)
            rows.append(tuple(row))
        return FinKernel(src, tgt, tuple(rows))

    def validate_weaken(self, weaken) -> None:
        if weaken.source.labels != self.carrier.labels or len(weaken.target) != 1:
            raise ChainError("weakening must map the carrier to the unit")


class PcohBackend:
    """Coherence-space backend: delta equaliser coordinates."""

    name = "pcoh"

    def __init__(self, carrier_pcs: Pcs):
        self.pcs = carrier_pcs
        self.alphabet = carrier_pcs.alphabet
        self.carrier = carrier_pcs.web

    def level(self, n: int) -> IndexSet:
        return multiset_space(self.alphabet, n)

    def power(self, n: int) -> IndexSet:
        return tuple_space(self.alphabet, n)

    def make(self, source, target, rows) -> PcsMatrix:
        return PcsMatrix(source, target, tuple(tuple(row) for row in rows))

    def compose(self, f, g):
        return _pcoh.compose(f, g)

    def tensor(self, f, g):
        return _pcoh.tensor_matrix(f, g)

    def identity_on(self, space):
        return _pcoh.identity_matrix(space)

    def eq(self, n: int) -> PcsMatrix:
        return _pcoh.eq_delta(self.alphabet, n)

    def section(self, n: int) -> PcsMatrix:
        return _pcoh.canonical_section(self.alphabet, n)

    def delete_map(self, weaken, n: int) -> PcsMatrix:
        src = self.power(n + 1)
        tgt = self.power(n)
        wcol = [row[0] for row in weaken.entries]
        rows = []
        for t in src.labels:
            row = [ZERO] * len(tgt)
            w = wcol[t[n]]
            if w:
                row[tgt.index(t[:n])] = w
            rows.append(tuple(row))
        return PcsMatrix(src, tgt, tuple(rows))

    def dd_closed_form(self, weaken, n: int) -> PcsMatrix:
        """Delta-coordinate step: entry(mu, nu) = w_b when mu = nu + [b]."""
        src = self.level(n + 1)
        tgt = self.level(n)
        wcol = [row[0] for row in weaken.entries]
        rows = []
        for mu in src.labels:
            row = [ZERO] * len(tgt)
            for b, c in enumerate(mu):
                if c and wcol[b]:
                    nu = list(mu)
                    nu[b] -= 1
                    row[tgt.index(tuple(nu))] = wcol[b]
            rows.append(tuple(row))
        return PcsMatrix(src, tgt, tuple(rows))

    def validate_weaken(self, weaken) -> None:
        if weaken.source.labels != self.carrier.labels or len(weaken.target) != 1:
            raise ChainError("weakening must map the carrier to the unit")
        for g in self.pcs.generators:
            if weaken.push(g).coeffs[0] > 1:
                raise ChainError("weakening is not clique-preserving")


def _raw(m):
    return m.rows if isinstance(m, FinKernel) else m.entries


@dataclass(frozen=True)
class CopointedObject:
    backend: object
    weaken: object

    def __post_init__(self):
        self.backend.validate_weaken(self.weaken)

    @property
    def weaken_column(self) -> tuple:
        return tuple(row[0] for row in _raw(self.weaken))


def stoch_copointed(alphabet: Alphabet) -> CopointedObject:
    """The free copointed object on the kernel side: the carrier itself with
    its unique (all-ones) weakening into the terminal unit."""
    backend = StochBackend(alphabet)
    return CopointedObject(backend, _stoch.discard_kernel(backend.carrier))


def substoch_copointed(alphabet: Alphabet, weaken_column) -> CopointedObject:
    """A carrier with an arbitrary substochastic weakening."""
    backend = StochBackend(alphabet)
    weaken = FinKernel(
        backend.carrier, unit_space(), tuple((v,) for v in weaken_column)
    )
    return CopointedObject(backend, weaken)


def pcoh_free_copointed(a: Pcs, pad_symbol: str = "*") -> CopointedObject:
    """The free copointed object a & 1 with the second projection as
    weakening; built concretely over the padded symbol web."""
    carrier = with_unit_pcs(a, pad_symbol)
    backend = PcohBackend(carrier)
    col = [ZERO] * len(carrier.web)
    col[-1] = ONE
    weaken = PcsMatrix(carrier.web, unit_space(), tuple((v,) for v in col))
    return CopointedObject(backend, weaken)


def pcoh_ground_copointed(alphabet: Alphabet) -> CopointedObject:
    """The image of the kernel-side copointed structure: ground space with
    the all-ones weakening column."""
    backend = PcohBackend(ground_pcs(alphabet))
    weaken = PcsMatrix(
        backend.carrier, unit_space(), tuple((ONE,) for _ in backend.carrier.labels)
    )
    return CopointedObject(backend, weaken)


def copointed_pairing(eta, u):
    """Rows of the mediating map <eta, u> into carrier & 1 given by the
    universal property of the free copointed object."""
    rows = []
    for row_eta, row_u in zip(_raw(eta), _raw(u)):
        rows.append(tuple(row_eta) + (row_u[0],))
    return rows


# -- chain construction -------------------------------------------------------

@dataclass(frozen=True)
class SquareCheck:
    level: int
    law: str
    deviation: Fraction

    @property
    def holds(self) -> bool:
        return self.deviation == 0


@dataclass
class DDChain:
    copointed: CopointedObject
    depth: int
    eqs: list
    deletes: list
    dds: list

    @property
    def backend(self):
        return self.copointed.backend

    def level_space(self, n: int) -> IndexSet:
        return self.backend.level(n)

    def validate(self) -> list[SquareCheck]:
        """Exact defining-square deviations at every level."""
        checks = []
        for n in range(self.depth):
            lhs = matmul(_raw(self.dds[n]), _raw(self.eqs[n]))
            rhs = matmul(_raw(self.eqs[n + 1]), _raw(self.deletes[n]))
            checks.append(
                SquareCheck(n, "DD_n . eq_n = eq_{n+1} . (id^n (x) w)", max_abs_diff(lhs, rhs))
            )
        return checks


def build_dd_chain(copointed: CopointedObject, depth: int, cross_check: bool = True) -> DDChain:
    """Build levels 0..depth with their equalisers and chain steps.

    The steps come from the backend closed form; each defining square is
    checked exactly and, when cross_check is set, the step is compared
    entrywise against the unique solution of the square obtained by exact
    linear solving.  Any mismatch is a backend bug and raises ChainError.
    """
    if depth < 0:
        raise ChainError("depth must be nonnegative")
    backend = copointed.backend
    eqs = [backend.eq(n) for n in range(depth + 1)]
    deletes = [backend.delete_map(copointed.weaken, n) for n in range(depth)]
    dds = [backend.dd_closed_form(copointed.weaken, n) for n in range(depth)]
    for n in range(depth):
        lhs = matmul(_raw(dds[n]), _raw(eqs[n]))
        rhs = matmul(_raw(eqs[n + 1]), _raw(deletes[n]))
        if max_abs_diff(lhs, rhs) != 0:
            raise ChainError(f"defining square fails at level {n} (backend bug)")
        if cross_check:
            try:
                solved = solve_right(_raw(eqs[n]), rhs)
            except LinearSolveError as exc:
                raise ChainError(f"square unsolvable at level {n}: {exc}") from exc
            if max_abs_diff(solved, _raw(dds[n])) != 0:
                raise ChainError(
                    f"closed form disagrees with the universal-property solve at level {n}"
                )
    return DDChain(copointed, depth, eqs, deletes, dds)


# -- chain morphisms -----------------------------------------------------------

@dataclass
class ChainMorphism:
    source: DDChain
    target: DDChain
    components: list

    def validate(self) -> list[SquareCheck]:
        checks = []
        for n in range(min(self.source.depth, self.target.depth)):
            lhs = matmul(_raw(self.components[n + 1]), _raw(self.target.dds[n]))
            rhs = matmul(_raw(self.source.dds[n]), _raw(self.components[n]))
            checks.append(
                SquareCheck(
                    n,
                    "DD_n^target . component_{n+1} = component_n . DD_n^source",
                    max_abs_diff(lhs, rhs),
                )
            )
        return checks


def _power_rows(rows, n: int):
    if n == 0:
        return identity(1)
    return reduce(kron, [rows] * n)


def lift_copointed_morphism(alpha, chain1: DDChain, chain2: DDChain) -> ChainMorphism:
    """Lift a copointed-object morphism to the unique chain morphism with
    eq_n^target . M_n = alpha^n . eq_n^source at every level.

    Rejects alpha unless weaken_target . alpha = weaken_source, naming the
    first carrier label where the two weakening columns differ.
    """
    b1, b2 = chain1.backend, chain2.backend
    w1 = chain1.copointed.weaken_column
    w2_of_alpha = tuple(
        row[0] for row in matmul(_raw(alpha), _raw(chain2.copointed.weaken))
    )
    for i, (x, y) in enumerate(zip(w2_of_alpha, w1)):
        if x != y:
            label = b1.carrier.labels[i]
            raise ChainError(
                f"not a copointed morphism: weakenings disagree at carrier label {label!r}"
                f" ({x} vs {y})"
            )
    depth = min(chain1.depth, chain2.depth)
    components = []
    for n in range(depth + 1):
        target_rows = matmul(_raw(chain1.eqs[n]), _power_rows(_raw(alpha), n))
        m_rows = matmul(target_rows, _raw(b2.section(n)))
        if max_abs_diff(matmul(m_rows, _raw(chain2.eqs[n])), target_rows) != 0:
            raise ChainError(f"equaliser factorisation fails at level {n}")
        components.append(b2.make(b1.level(n), b2.level(n), m_rows))
    morphism = ChainMorphism(chain1, chain2, components)
    for check in morphism.validate():
        if not check.holds:
            raise ChainError(f"chain square fails at level {check.level}")
    return morphism


def multinomial_diagonal(alphabet: Alphabet, n: int) -> PcsMatrix:
    """Coordinate change between the two equaliser presentations:
    diag(multinomial(mu)) over size-n multisets.  Conjugating the uniform
    kernel chain by these diagonals gives the delta-coordinate chain."""
    space = multiset_space(alphabet, n)
    rows = []
    for i, counts in enumerate(space.labels):
        row = [ZERO] * len(space)
        row[i] = Fraction(multinomial(Multiset(alphabet, counts)))
        rows.append(tuple(row))
    return PcsMatrix(space, space, tuple(rows))


# -- cones and the two De Finetti formulations at finite truncation ------------

@dataclass
class Cone:
    """A compatible family of legs from an apex into the chain.

    kind "dd": legs target the multiset levels, DD_n . leg_{n+1} = leg_n.
    kind "delete": legs target the tuple powers, d_n . leg_{n+1} = leg_n.
    """

    chain: DDChain
    apex: IndexSet
    legs: list
    kind: str

    def validate(self) -> list[SquareCheck]:
        steps = self.chain.dds if self.kind == "dd" else self.chain.deletes
        law = (
            "DD_n . leg_{n+1} = leg_n"
            if self.kind == "dd"
            else "(id^n (x) w) . leg_{n+1} = leg_n"
        )
        return [
            SquareCheck(n, law, max_abs_diff(matmul(_raw(self.legs[n + 1]), _raw(steps[n])), _raw(self.legs[n])))
            for n in range(len(self.legs) - 1)
        ]

    def deviation(self) -> Fraction:
        return max((c.deviation for c in self.validate()), default=ZERO)


def dd_cone_from_top(chain: DDChain, top) -> Cone:
    """The DD-cone generated by an arbitrary top leg, closing downwards."""
    legs = [top]
    for n in reversed(range(chain.depth)):
        legs.insert(0, chain.backend.make(
            top.source, chain.level_space(n), matmul(_raw(legs[0]), _raw(chain.dds[n]))
        ))
    return Cone(chain, top.source, legs, "dd")


def delete_cone_from_top(chain: DDChain, top) -> Cone:
    legs = [top]
    for n in reversed(range(chain.depth)):
        legs.insert(0, chain.backend.make(
            top.source, chain.backend.power(n), matmul(_raw(legs[0]), _raw(chain.deletes[n]))
        ))
    return Cone(chain, top.source, legs, "delete")


def factor_delete_cone(cone: Cone) -> Cone:
    """Factor a symmetric delete-cone through the equalisers, leg by leg.

    Every leg must equalise all coordinate symmetries at its level; the
    factorisation eq_n . leg_n' = leg_n is unique because the equalisers are
    split monos, and the factored family is a DD-cone.
    """
    if cone.kind != "delete":
        raise ChainError("expected a delete-cone")
    chain = cone.chain
    for n, leg in enumerate(cone.legs):
        for perm in all_perms(n):
            permuted = permute_tuple_columns(_raw(leg), chain.backend.power(n), perm)
            if max_abs_diff(permuted, _raw(leg)) != 0:
                raise ChainError(
                    f"leg at level {n} does not equalise the symmetry {perm}"
                )
    legs = []
    for n, leg in enumerate(cone.legs):
        rows = matmul(_raw(leg), _raw(chain.backend.section(n)))
        if max_abs_diff(matmul(rows, _raw(chain.eqs[n])), _raw(leg)) != 0:
            raise ChainError(f"factorisation through the equaliser fails at level {n}")
        legs.append(chain.backend.make(cone.apex, chain.level_space(n), rows))
    out = Cone(chain, cone.apex, legs, "dd")
    if out.deviation() != 0:
        raise ChainError("factored family is not a DD-cone")
    return out


def expand_dd_cone(cone: Cone) -> Cone:
    """Compose a DD-cone with the equalisers to get the symmetric delete-cone
    it presents on the tuple powers; inverse to factor_delete_cone."""
    if cone.kind != "dd":
        raise ChainError("expected a DD-cone")
    chain = cone.chain
    legs = [
        chain.backend.make(
            cone.apex, chain.backend.power(n), matmul(_raw(leg), _raw(chain.eqs[n]))
        )
        for n, leg in enumerate(cone.legs)
    ]
    out = Cone(chain, cone.apex, legs, "delete")
    if out.deviation() != 0:
        raise ChainError("expanded family is not a delete-cone")
    return out


# -- parametrized variants ----------------------------------------------------

@dataclass(frozen=True)
class TensorCheck:
    level: int
    sample: int
    deviation: Fraction


@dataclass
class TensorReport:
    samples: int
    checks: list

    @property
    def max_deviation(self) -> Fraction:
        return max((c.deviation for c in self.checks), default=ZERO)


def factor_parametrized(f_rows, chain: DDChain, y_space: IndexSet, n: int):
    """Factor a symmetric map into power(n) (x) Y through eq_n (x) id_Y.

    Returns (factor rows, round-trip deviation); the deviation is zero
    exactly when f equalises all sigma (x) id_Y.
    """
    backend = chain.backend
    eq_y = kron(_raw(chain.eqs[n]), identity(len(y_space)))
    sec_y = kron(_raw(backend.section(n)), identity(len(y_space)))
    factor = matmul(f_rows, sec_y)
    return factor, max_abs_diff(matmul(factor, eq_y), f_rows)


def verify_tensor_parametrized(chain: DDChain, y_space: IndexSet, samples: int, seed: int) -> TensorReport:
    """Randomized check that equalisers and cone factorisations commute with
    tensoring by Y: symmetric maps into power(n) (x) Y factor uniquely
    through eq_n (x) id_Y, and the parametrized cone round trips are exact."""
    rng = random.Random(seed)
    backend = chain.backend
    checks = []
    for s in range(samples):
        n = 1 + (s % chain.depth) if chain.depth else 0
        level = chain.level_space(n)
        apex_size = rng.choice((1, 2))
        apex = IndexSet(f"Z{apex_size}", tuple(range(apex_size)))
        h_rows = _random_stochastic_rows(rng, apex_size, len(level) * len(y_space))
        eq_y = kron(_raw(chain.eqs[n]), identity(len(y_space)))
        f_rows = matmul(h_rows, eq_y)
        factor, dev = factor_parametrized(f_rows, chain, y_space, n)
        dev = max(dev, max_abs_diff(factor, h_rows))
        checks.append(TensorCheck(n, s, dev))
        # parametrized cone round trip from a random top leg
        top_rows = _random_stochastic_rows(
            rng, apex_size, len(chain.level_space(chain.depth)) * len(y_space)
        )
        dd_y = [kron(_raw(chain.dds[m]), identity(len(y_space))) for m in range(chain.depth)]
        legs = [top_rows]
        for m in reversed(range(chain.depth)):
            legs.insert(0, matmul(legs[0], dd_y[m]))
        eq_ys = [kron(_raw(chain.eqs[m]), identity(len(y_space))) for m in range(chain.depth + 1)]
        sec_ys = [kron(_raw(backend.section(m)), identity(len(y_space))) for m in range(chain.depth + 1)]
        expanded = [matmul(leg, eq_ys[m]) for m, leg in enumerate(legs)]
        refactored = [matmul(g, sec_ys[m]) for m, g in enumerate(expanded)]
        dev2 = max(
            max_abs_diff(a, b) for a, b in zip(refactored, legs)
        )
        checks.append(TensorCheck(chain.depth, s, dev2))
    return TensorReport(samples, checks)


def _random_stochastic_rows(rng: random.Random, nrows: int, ncols: int):
    rows = []
    for _ in range(nrows):
        raw = [Fraction(rng.randint(0, 6)) for _ in range(ncols)]
        total = sum(raw)
        if total == 0:
            raw[rng.randrange(ncols)] = Fraction(1)
            total = Fraction(1)
        rows.append(tuple(v / total for v in raw))
    return tuple(rows)


# -- reified truncation limits --------------------------------------------------

def pad_index_bijection(alphabet: Alphabet, n: int, pad_symbol: str = "*"):
    """Index map from multisets of size <= n over the alphabet to size-n
    multisets over the padded alphabet (append stars up to size n)."""
    padded = alphabet.pad(pad_symbol)
    bounded = _pcoh.bounded_multiset_space(alphabet, n)
    full = multiset_space(padded, n)
    mapping = []
    for counts in bounded.labels:
        padded_counts = counts + (n - sum(counts),)
        mapping.append(full.index(padded_counts))
    return bounded, full, tuple(mapping)


def bang_cone(b, chain: DDChain) -> Cone:
    """The coherent family presented by a truncated exponential element on
    the chain over the free copointed object of its ground space."""
    alphabet = b.alphabet
    if chain.depth > b.depth:
        raise ChainError("chain deeper than the element's truncation")
    legs = []
    for n in range(chain.depth + 1):
        bounded, full, mapping = pad_index_bijection(alphabet, n)
        row = [ZERO] * len(full)
        for i, counts in enumerate(bounded.labels):
            row[mapping[i]] = b.at(counts)
        legs.append(chain.backend.make(unit_space(), full, (tuple(row),)))
    cone = Cone(chain, unit_space(), legs, "dd")
    if cone.deviation() != 0:
        raise ChainError("element table is not restriction-coherent")
    return cone


def bang_from_cone(cone: Cone):
    """Rebuild the truncated exponential element from a coherent family on
    the free-copointed chain; inverse to bang_cone at equal depth."""
    chain = cone.chain
    padded = chain.backend.alphabet
    alphabet = Alphabet(padded.symbols[:-1])
    depth = chain.depth
    bounded, full, mapping = pad_index_bijection(alphabet, depth)
    top = _raw(cone.legs[depth])[0]
    table = {counts: top[mapping[i]] for i, counts in enumerate(bounded.labels)}
    return _pcoh.BangElement.from_table(alphabet, depth, table)


def multinomial_cone(r, chain: DDChain) -> Cone:
    """The exchangeable urn-law family of an i.i.d. source, as a DD-cone."""
    legs = [_stoch.multinomial_law(r, n) for n in range(chain.depth + 1)]
    cone = Cone(chain, unit_space(), legs, "dd")
    if cone.deviation() != 0:
        raise ChainError("urn laws fail chain compatibility")
    return cone
