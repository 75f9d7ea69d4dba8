"""Property suite: every structural law of the package checked at desk scale.

Each check records the equation it verifies (as a self-describing law
string), the sizes it ran at, and the worst deviation found; exact-mode
checks must come out at deviation zero.  The CLI command `verify-all` runs
this suite and exits nonzero when any check fails.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from ._linalg import ZERO, matmul, max_abs_diff
from ._linalg import identity as _identity
from .chains import (
    build_dd_chain,
    dd_cone_from_top,
    delete_cone_from_top,
    expand_dd_cone,
    factor_delete_cone,
    lift_copointed_morphism,
    multinomial_cone,
    multinomial_diagonal,
    pad_index_bijection,
    pcoh_free_copointed,
    pcoh_ground_copointed,
    stoch_copointed,
    verify_tensor_parametrized,
)
from .moments import (
    bang_from_moments,
    check_totality,
    damp,
    embed_mixing_measure,
    moment_sequence,
    recover_measure,
    verify_embedding_squares,
)
from .multiset import Alphabet, enumerate_multisets, multinomial
from .optim import LinearProgram, solve
from .pcoh import (
    PcsMatrix,
    PcsVector,
    bool_pcs,
    eq_delta,
    canonical_section,
    ground_pcs,
    multiset_pcs,
)
from .spaces import symbol_space, unit_space
from .stoch import (
    AtomicMeasure,
    FinKernel,
    ProbVector,
    all_perms,
    compose,
    coeq_kernel,
    eq_kernel,
    identity_kernel,
    multinomial_law,
    permute_tuple_columns,
    symmetrization_average,
    verify_equalises,
)


@dataclass
class Config:
    alphabet: Alphabet = field(default_factory=lambda: Alphabet.of("t", "f"))
    depth: int = 4
    eq_depth: int = 5
    cone_samples: int = 20
    tensor_samples: int = 6
    grid: int = 16
    recovery_tol: float = 1e-6
    totality_tol: float = 1e-9
    seed: int = 0
    inject_fault: bool = False


@dataclass
class CheckResult:
    name: str
    law: str
    params: dict
    deviation: object
    passed: bool
    witness: str | None = None

    def to_json(self) -> dict:
        data = {
            "check": self.name,
            "law": self.law,
            "params": self.params,
            "deviation": str(self.deviation),
            "passed": self.passed,
        }
        if self.witness is not None:
            data["witness"] = self.witness
        return data


@dataclass
class Report:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def _exact_check(name, law, params, deviation, witness=None) -> CheckResult:
    return CheckResult(name, law, params, deviation, deviation == 0, witness)


def _bounded_check(name, law, params, deviation, tol, witness=None) -> CheckResult:
    return CheckResult(name, law, params, deviation, deviation <= tol, witness)


# -- combinatorics -------------------------------------------------------------

def multiset_checks(config: Config) -> list[CheckResult]:
    out = []
    k = len(config.alphabet)
    for n in range(config.eq_depth + 1):
        msets = enumerate_multisets(config.alphabet, n)
        total = sum(multinomial(m) for m in msets)
        out.append(
            _exact_check(
                "multiset-partition",
                "sum over size-n multisets of multinomial(mu) = k^n",
                {"n": n, "k": k},
                abs(total - k**n),
            )
        )
        sorted_ok = all(
            msets[i].counts > msets[i + 1].counts for i in range(len(msets) - 1)
        )
        out.append(
            CheckResult(
                "multiset-order",
                "enumeration is strictly descending and duplicate-free",
                {"n": n, "k": k},
                0 if sorted_ok else 1,
                sorted_ok,
            )
        )
    return out


# -- equaliser laws -------------------------------------------------------------

def equaliser_checks(config: Config) -> list[CheckResult]:
    out = []
    alphabet = config.alphabet
    for n in range(config.eq_depth + 1):
        eq = eq_kernel(alphabet, n)
        coeq = coeq_kernel(alphabet, n)
        rep = verify_equalises(eq, n)
        out.append(
            _exact_check(
                "eq-sigma-invariance",
                "sigma . eq_n = eq_n for every coordinate symmetry",
                {"n": n, "backend": "stoch"},
                rep.max_deviation,
                witness=str(rep.witness_perm) if rep.witness_perm else None,
            )
        )
        out.append(
            _exact_check(
                "eq-coeq-identity",
                "coeq_n . eq_n = id on multisets",
                {"n": n},
                compose(eq, coeq).deviation(identity_kernel(eq.source)),
            )
        )
        out.append(
            _exact_check(
                "symmetrization-average",
                "eq_n . coeq_n = (1/n!) sum_sigma sigma",
                {"n": n},
                compose(coeq, eq).deviation(symmetrization_average(alphabet, n)),
            )
        )
        delta = eq_delta(alphabet, n)
        worst = ZERO
        wit = None
        for perm in all_perms(n):
            dev = max_abs_diff(
                permute_tuple_columns(delta.entries, delta.target, perm), delta.entries
            )
            if dev > worst:
                worst, wit = dev, perm
        out.append(
            _exact_check(
                "eq-sigma-invariance",
                "sigma . eq_n = eq_n for every coordinate symmetry",
                {"n": n, "backend": "pcoh"},
                worst,
                witness=str(wit) if wit else None,
            )
        )
        section = canonical_section(alphabet, n)
        out.append(
            _exact_check(
                "delta-eq-split",
                "section_n . eq_n = id on multisets (delta coordinates)",
                {"n": n},
                max_abs_diff(
                    matmul(delta.entries, section.entries), _identity(len(delta.source))
                ),
            )
        )
    return out


# -- chains ----------------------------------------------------------------------

def _tamper(chain) -> None:
    # reverse the first row of the level-1 step so exactly one square breaks
    level = min(1, chain.depth - 1)
    dd = chain.dds[level]
    rows = [list(r) for r in dd.rows]
    rows[0] = list(reversed(rows[0]))
    chain.dds[level] = FinKernel(dd.source, dd.target, tuple(tuple(r) for r in rows))


def chain_checks(config: Config):
    out = []
    alphabet = config.alphabet
    chains = {}
    for label, copointed in (
        ("stoch", stoch_copointed(alphabet)),
        ("pcoh-definetti", pcoh_ground_copointed(alphabet)),
        ("pcoh-bang", pcoh_free_copointed(ground_pcs(alphabet))),
    ):
        try:
            chain = build_dd_chain(copointed, config.depth, cross_check=True)
            built = True
        except Exception as exc:  # construction itself is a check
            out.append(
                CheckResult(
                    "dd-universal-solve",
                    "closed-form DD equals the unique solution of the defining square",
                    {"backend": label, "depth": config.depth},
                    str(exc),
                    False,
                )
            )
            continue
        out.append(
            CheckResult(
                "dd-universal-solve",
                "closed-form DD equals the unique solution of the defining square",
                {"backend": label, "depth": config.depth},
                ZERO,
                built,
            )
        )
        if label == "stoch" and config.inject_fault:
            _tamper(chain)
        for check in chain.validate():
            out.append(
                _exact_check(
                    "defining-square",
                    check.law,
                    {"backend": label, "level": check.level},
                    check.deviation,
                )
            )
        chains[label] = chain
    return out, chains


def morphism_checks(config: Config, chains) -> list[CheckResult]:
    out = []
    alphabet = config.alphabet
    if "pcoh-definetti" not in chains or "pcoh-bang" not in chains:
        return out
    chg, chb = chains["pcoh-definetti"], chains["pcoh-bang"]
    k = len(alphabet)
    alpha_rows = []
    for i in range(k):
        row = [ZERO] * (k + 1)
        row[i] = Fraction(1)
        row[k] = Fraction(1)
        alpha_rows.append(tuple(row))
    alpha = PcsMatrix(chg.backend.carrier, chb.backend.carrier, tuple(alpha_rows))
    lift = lift_copointed_morphism(alpha, chg, chb)
    for check in lift.validate():
        out.append(
            _exact_check(
                "chain-morphism-square",
                check.law,
                {"level": check.level, "morphism": "pairing of identity and weakening"},
                check.deviation,
            )
        )
    from .pcoh import multinomial_embedding

    for n in range(config.depth + 1):
        emb = multinomial_embedding(alphabet, n)
        bounded, full, mapping = pad_index_bijection(alphabet, n)
        dev = ZERO
        comp = lift.components[n]
        for i in range(len(emb.source)):
            for j in range(len(bounded)):
                d = abs(emb.entries[i][j] - comp.entries[i][mapping[j]])
                if d > dev:
                    dev = d
        out.append(
            _exact_check(
                "multinomial-embedding",
                "lifted component equals multinomial(mu - nu) on included nu",
                {"n": n},
                dev,
            )
        )
    if "stoch" in chains and not config.inject_fault:
        chs = chains["stoch"]
        for n in range(config.depth):
            diag_n = multinomial_diagonal(alphabet, n)
            diag_n1 = multinomial_diagonal(alphabet, n + 1)
            inv = tuple(
                tuple(Fraction(1, v) if v else ZERO for v in row)
                for row in diag_n1.entries
            )
            conj = matmul(matmul(inv, chg.dds[n].entries), diag_n.entries)
            out.append(
                _exact_check(
                    "coordinate-conjugation",
                    "DD_stoch = diag(1/multinomial) . DD_delta . diag(multinomial)",
                    {"n": n},
                    max_abs_diff(conj, chs.dds[n].rows),
                )
            )
    return out


def cone_checks(config: Config, chains) -> list[CheckResult]:
    out = []
    rng = random.Random(config.seed)
    alphabet = config.alphabet
    k = len(alphabet)
    weights = [Fraction(i + 1, k * (k + 1) // 2) for i in range(k)]
    r = ProbVector(alphabet, tuple(weights))
    if "stoch" in chains and not config.inject_fault:
        chain = chains["stoch"]
        cone = multinomial_cone(r, chain)
        out.append(
            _exact_check(
                "iid-urn-cone",
                "multinomial_law(r, n) = DD_n . multinomial_law(r, n+1)",
                {"depth": chain.depth, "r": str(r.weights)},
                cone.deviation(),
            )
        )
        for backend_label in ("stoch", "pcoh-definetti"):
            chainb = chains[backend_label]
            worst = ZERO
            for s in range(config.cone_samples):
                top = _random_leg(rng, chainb, config)
                dd_cone = dd_cone_from_top(chainb, top)
                expanded = expand_dd_cone(dd_cone)
                back = factor_delete_cone(expanded)
                dev = max(
                    a.deviation(b) if hasattr(a, "deviation") else ZERO
                    for a, b in zip(back.legs, dd_cone.legs)
                )
                worst = max(worst, dev)
                # opposite direction: random symmetric delete-cone
                sym_top = chainb.backend.make(
                    top.source,
                    chainb.backend.power(chainb.depth),
                    matmul(_rows(top), _rows(chainb.eqs[chainb.depth])),
                )
                del_cone = delete_cone_from_top(chainb, sym_top)
                dd2 = factor_delete_cone(del_cone)
                expanded2 = expand_dd_cone(dd2)
                dev2 = max(
                    max_abs_diff(_rows(a), _rows(b))
                    for a, b in zip(expanded2.legs, del_cone.legs)
                )
                worst = max(worst, dev2)
            out.append(
                _exact_check(
                    "cone-round-trip",
                    "factor and expand are mutually inverse on cones",
                    {"backend": backend_label, "samples": config.cone_samples},
                    worst,
                )
            )
        y_space = symbol_space(Alphabet.of("t", "f"))
        for backend_label in ("stoch", "pcoh-definetti"):
            report = verify_tensor_parametrized(
                chains[backend_label], y_space, config.tensor_samples, config.seed
            )
            out.append(
                _exact_check(
                    "tensor-parametrized",
                    "equaliser factorisation and cone round trips commute with (x) Y",
                    {"backend": backend_label, "samples": config.tensor_samples},
                    report.max_deviation,
                )
            )
    return out


def _rows(m):
    return m.rows if isinstance(m, FinKernel) else m.entries


def _random_leg(rng, chain, config):
    apex = unit_space()
    level = chain.level_space(chain.depth)
    raw = [Fraction(rng.randint(0, 9)) for _ in range(len(level))]
    total = sum(raw) or Fraction(1)
    row = tuple(v / total for v in raw)
    return chain.backend.make(apex, level, (row,))


# -- moments ------------------------------------------------------------------------

def moment_checks(config: Config) -> list[CheckResult]:
    out = []
    alphabet = config.alphabet
    rng = random.Random(config.seed + 1)
    k = len(alphabet)

    def rational_point():
        cuts = sorted(rng.randint(0, 12) for _ in range(k - 1))
        parts = []
        prev = 0
        for c in cuts:
            parts.append(Fraction(c - prev, 12))
            prev = c
        parts.append(Fraction(12 - prev, 12))
        return ProbVector(alphabet, tuple(parts))

    mixing = AtomicMeasure.of((rational_point(), Fraction(1, 3)), (rational_point(), Fraction(2, 3)))
    checks = verify_embedding_squares(mixing, config.depth)
    out.append(
        _exact_check(
            "embedding-square",
            "restrict(embed(mixing), n) = level law . multinomial embedding",
            {"depth": config.depth, "atoms": 2},
            max(c.deviation for c in checks),
        )
    )
    b = embed_mixing_measure(mixing, config.depth)
    rep = check_totality(b)
    out.append(
        CheckResult(
            "embed-total",
            "embeddings of probability mixings satisfy the totality recurrence",
            {"depth": config.depth},
            rep.defect,
            rep.total,
        )
    )
    p = Fraction(1, 2)
    damped = damp(b, p)
    rep2 = check_totality(damped)
    expected = (1 - p) * 1  # worst defect is at the empty multiset
    out.append(
        CheckResult(
            "damped-defect",
            "damping by p breaks totality with defect (1-p) at the empty multiset",
            {"p": str(p)},
            rep2.defect,
            (not rep2.total) and rep2.defect == expected and rep2.witness == (0,) * k,
            witness=str(rep2.witness),
        )
    )
    if k == 2:
        mt = moment_sequence(b)
        rt = bang_from_moments(mt, alphabet)
        out.append(
            _exact_check(
                "moment-round-trip",
                "rebuilding the table from pure moments is the identity on total elements",
                {"depth": config.depth},
                max_abs_diff((rt.coeffs,), (b.coeffs,)),
            )
        )
    vertex_mixing = AtomicMeasure.of(
        (ProbVector(alphabet, tuple(Fraction(1) if i == 0 else ZERO for i in range(k))), Fraction(1, 3)),
        (ProbVector(alphabet, tuple(Fraction(1) if i == k - 1 else ZERO for i in range(k))), Fraction(2, 3)),
    )
    bv = embed_mixing_measure(vertex_mixing, config.depth)
    rec = recover_measure(bv, max(config.grid, 2), tol=config.recovery_tol, mode="exact")
    out.append(
        _exact_check(
            "vertex-recovery",
            "vertex-atom mixings are recovered with zero residual in exact mode",
            {"grid": max(config.grid, 2)},
            rec.residual,
        )
    )
    g = config.grid
    base, rem = divmod(g, k)
    on_grid = ProbVector(
        alphabet,
        tuple(Fraction(base + (1 if i < rem else 0), g) for i in range(k)),
    )
    bh = embed_mixing_measure(AtomicMeasure.dirac(on_grid), config.depth)
    rec2 = recover_measure(bh, config.grid, tol=config.recovery_tol, mode="float")
    out.append(
        _bounded_check(
            "grid-recovery",
            "recovery of an on-grid mixing meets the residual tolerance",
            {"grid": config.grid, "tol": config.recovery_tol},
            rec2.residual,
            config.recovery_tol,
        )
    )
    return out


# -- membership -----------------------------------------------------------------------

def membership_checks(config: Config) -> list[CheckResult]:
    out = []
    ground = bool_pcs()
    inside = ground.contains(PcsVector.of(ground.web, "1/2", "1/4"))
    over = ground.contains(PcsVector.of(ground.web, 1, "1/2"))
    ok = (
        inside.inside
        and not over.inside
        and over.optimum == Fraction(3, 2)
        and over.witness is not None
        and all(v == 1 for v in over.witness.coeffs)
    )
    out.append(
        CheckResult(
            "ground-membership",
            "subdistributions are inside; witness for mass 3/2 is the all-ones dual",
            {},
            ZERO if ok else 1,
            ok,
        )
    )
    m2 = multiset_pcs(ground, 2)
    binom = m2.contains(PcsVector.of(m2.web, "1/4", "1/2", "1/4"))
    out.append(
        CheckResult(
            "symmetric-power-membership",
            "the tally image of a product square lies in the symmetric power",
            {"n": 2},
            ZERO if binom.inside else binom.optimum,
            binom.inside,
        )
    )
    rng = random.Random(config.seed + 2)
    worst = 0.0
    for _ in range(10):
        n = 3
        c = [Fraction(rng.randint(0, 8), 8) for _ in range(n)]
        rows = [[Fraction(rng.randint(0, 4), 4) for _ in range(n)] for _ in range(4)]
        rows.append([Fraction(1)] * n)  # keep it bounded
        b = [Fraction(rng.randint(1, 4), 2) for _ in range(5)]
        exact = solve(LinearProgram(tuple(c), tuple(map(tuple, rows)), tuple(b), mode="exact"))
        approx = solve(
            LinearProgram(
                tuple(float(v) for v in c),
                tuple(tuple(float(v) for v in row) for row in rows),
                tuple(float(v) for v in b),
                mode="float",
            )
        )
        if exact.optimal and approx.optimal:
            worst = max(worst, abs(float(exact.value) - approx.value))
    out.append(
        _bounded_check(
            "lp-mode-agreement",
            "exact and float simplex agree on randomized instances",
            {"instances": 10},
            worst,
            1e-7,
        )
    )
    return out


def run_all_checks(config: Config | None = None) -> Report:
    config = config or Config()
    checks = []
    checks.extend(multiset_checks(config))
    checks.extend(equaliser_checks(config))
    chain_results, chains = chain_checks(config)
    checks.extend(chain_results)
    checks.extend(morphism_checks(config, chains))
    checks.extend(cone_checks(config, chains))
    checks.extend(moment_checks(config))
    checks.extend(membership_checks(config))
    return Report(checks)
