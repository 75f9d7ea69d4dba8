import random
from fractions import Fraction

import pytest

from helpers import mm
from urnchains._linalg import max_abs_diff
from urnchains.chains import (
    ChainError,
    Cone,
    build_dd_chain,
    bang_cone,
    bang_from_cone,
    copointed_pairing,
    dd_cone_from_top,
    delete_cone_from_top,
    expand_dd_cone,
    factor_delete_cone,
    factor_parametrized,
    lift_copointed_morphism,
    multinomial_cone,
    multinomial_diagonal,
    pad_index_bijection,
    pcoh_free_copointed,
    pcoh_ground_copointed,
    stoch_copointed,
    substoch_copointed,
    verify_tensor_parametrized,
)
from urnchains.multiset import BOOL, Alphabet
from urnchains.pcoh import PcsMatrix, PcsVector, bool_pcs, dd_restriction, promotion
from urnchains.spaces import multiset_space, symbol_space, unit_space
from urnchains.stoch import FinKernel, ProbVector, dd_kernel, multinomial_law

F = Fraction
ABC = Alphabet.of("a", "b", "c")


# -- construction ----------------------------------------------------------------

@pytest.mark.parametrize("alphabet", [BOOL, ABC])
def test_stoch_chain_steps_equal_uniform_kernel(alphabet):
    chain = build_dd_chain(stoch_copointed(alphabet), 3)
    for n in range(3):
        assert chain.dds[n].rows == dd_kernel(alphabet, n).rows
    assert all(c.deviation == 0 for c in chain.validate())


def test_bang_chain_steps_equal_restrictions():
    chain = build_dd_chain(pcoh_free_copointed(bool_pcs()), 3)
    for n in range(3):
        restriction = dd_restriction(BOOL, n)
        b_src, full_src, map_src = pad_index_bijection(BOOL, n + 1)
        b_tgt, full_tgt, map_tgt = pad_index_bijection(BOOL, n)
        dd = chain.dds[n]
        for i, mu in enumerate(b_src.labels):
            for j, nu in enumerate(b_tgt.labels):
                assert restriction.entries[i][j] == dd.entries[map_src[i]][map_tgt[j]]


def test_depth_zero_chain():
    chain = build_dd_chain(stoch_copointed(BOOL), 0)
    assert chain.dds == [] and len(chain.eqs) == 1
    assert chain.validate() == []


def test_substochastic_weakening_chain():
    cop = substoch_copointed(BOOL, (F(1, 2), F(1, 3)))
    chain = build_dd_chain(cop, 3)
    assert all(c.deviation == 0 for c in chain.validate())
    # step mass reflects the weakening: remove-one weighted by w
    dd0 = chain.dds[0]
    assert dd0.entry((1, 0), (0, 0)) == F(1, 2)
    assert dd0.entry((0, 1), (0, 0)) == F(1, 3)


def test_square_unsatisfiable_signals_backend_bug(monkeypatch):
    cop = stoch_copointed(BOOL)

    def broken(weaken, n):
        good = cop.backend.__class__.dd_closed_form(cop.backend, weaken, n)
        rows = [list(r) for r in good.rows]
        rows[0] = list(reversed(rows[0]))
        return FinKernel(good.source, good.target, tuple(map(tuple, rows)))

    monkeypatch.setattr(cop.backend, "dd_closed_form", broken)
    with pytest.raises(ChainError):
        build_dd_chain(cop, 2)


# -- copointed structure ------------------------------------------------------------

def test_free_copointed_pairing_universal_property():
    cop = pcoh_free_copointed(bool_pcs())
    apex = symbol_space(ABC)
    rng = random.Random(1)
    eta = tuple(
        tuple(F(rng.randint(0, 3), 6) for _ in range(2)) for _ in range(3)
    )
    u = tuple((F(rng.randint(0, 5), 5),) for _ in range(3))
    paired = copointed_pairing(_mat(apex, symbol_space(BOOL), eta), _mat(apex, unit_space(), u))
    # the pairing projects back onto both components
    for i in range(3):
        assert paired[i][:2] == eta[i]
        assert paired[i][2] == u[i][0]
    # and the weakening of the pairing is u (copointed-morphism condition)
    weaken_col = [row[0] for row in cop.weaken.entries]
    recovered = [sum(p * w for p, w in zip(row, weaken_col)) for row in paired]
    assert recovered == [row[0] for row in u]


def _mat(src, tgt, rows):
    return PcsMatrix(src, tgt, tuple(tuple(row) for row in rows))


def test_lift_identity_gives_identity_components():
    chain = build_dd_chain(pcoh_ground_copointed(BOOL), 3)
    ident = PcsMatrix(
        chain.backend.carrier,
        chain.backend.carrier,
        ((F(1), F(0)), (F(0), F(1))),
    )
    lift = lift_copointed_morphism(ident, chain, chain)
    for n, comp in enumerate(lift.components):
        size = len(multiset_space(BOOL, n))
        assert comp.entries == tuple(
            tuple(F(1) if i == j else F(0) for j in range(size)) for i in range(size)
        )


def test_lift_rejects_non_copointed_morphism():
    chg = build_dd_chain(pcoh_ground_copointed(BOOL), 2)
    chb = build_dd_chain(pcoh_free_copointed(bool_pcs()), 2)
    # alpha with a zero weakening column: weakenings disagree at 't'
    bad = PcsMatrix(
        chg.backend.carrier,
        chb.backend.carrier,
        ((F(1), F(0), F(0)), (F(0), F(1), F(0))),
    )
    with pytest.raises(ChainError, match="'t'"):
        lift_copointed_morphism(bad, chg, chb)


# -- coordinate change -----------------------------------------------------------------

def test_multinomial_diagonal_values():
    assert multinomial_diagonal(BOOL, 1).entries == ((F(1), F(0)), (F(0), F(1)))
    d2 = multinomial_diagonal(BOOL, 2)
    assert [d2.entries[i][i] for i in range(3)] == [F(1), F(2), F(1)]


@pytest.mark.parametrize("alphabet", [BOOL, ABC])
def test_conjugation_intertwines_the_two_chains(alphabet):
    stoch_chain = build_dd_chain(stoch_copointed(alphabet), 4)
    delta_chain = build_dd_chain(pcoh_ground_copointed(alphabet), 4)
    for n in range(4):
        d_n = multinomial_diagonal(alphabet, n).entries
        d_n1 = multinomial_diagonal(alphabet, n + 1).entries
        inv = tuple(
            tuple(F(1, v) if v else F(0) for v in row) for row in d_n1
        )
        conj = mm(mm(inv, delta_chain.dds[n].entries), d_n)
        assert conj == stoch_chain.dds[n].rows


# -- cones ---------------------------------------------------------------------------------

def test_multinomial_cone_and_round_trip():
    chain = build_dd_chain(stoch_copointed(BOOL), 4)
    r = ProbVector.of(BOOL, F(1, 3), F(2, 3))
    cone = multinomial_cone(r, chain)
    assert cone.deviation() == 0
    expanded = expand_dd_cone(cone)
    assert expanded.deviation() == 0
    back = factor_delete_cone(expanded)
    for a, b in zip(back.legs, cone.legs):
        assert a.rows == b.rows


def test_factor_returns_original_when_legs_factor_through_eq():
    chain = build_dd_chain(stoch_copointed(BOOL), 3)
    r = ProbVector.of(BOOL, F(1, 4), F(3, 4))
    cone = multinomial_cone(r, chain)
    # delete-cone legs defined as multinomial law then equaliser
    legs = [
        FinKernel(
            unit_space(),
            chain.backend.power(n),
            mm(multinomial_law(r, n).rows, chain.eqs[n].rows),
        )
        for n in range(4)
    ]
    delete_cone = Cone(chain, unit_space(), legs, "delete")
    assert delete_cone.deviation() == 0
    dagger = factor_delete_cone(delete_cone)
    for a, b in zip(dagger.legs, cone.legs):
        assert a.rows == b.rows


def test_factor_rejects_asymmetric_leg_naming_the_swap():
    chain = build_dd_chain(stoch_copointed(BOOL), 2)
    tsp = chain.backend.power(2)
    point = FinKernel(unit_space(), tsp, ((F(0), F(1), F(0), F(0)),))
    legs = [
        FinKernel(unit_space(), chain.backend.power(0), ((F(1),),)),
        FinKernel(unit_space(), chain.backend.power(1), ((F(1), F(0)),)),
        point,
    ]
    cone = Cone(chain, unit_space(), legs, "delete")
    with pytest.raises(ChainError, match=r"\(1, 0\)"):
        factor_delete_cone(cone)


def test_trivial_unit_cone_is_fixed_by_both_maps():
    chain = build_dd_chain(stoch_copointed(BOOL), 3)
    # all legs through the point urn [t^n]
    legs = []
    for n in range(4):
        space = chain.level_space(n)
        row = [F(0)] * len(space)
        row[space.index((n, 0))] = F(1)
        legs.append(FinKernel(unit_space(), space, (tuple(row),)))
    cone = Cone(chain, unit_space(), legs, "dd")
    assert cone.deviation() == 0
    back = factor_delete_cone(expand_dd_cone(cone))
    for a, b in zip(back.legs, cone.legs):
        assert a.rows == b.rows


@pytest.mark.parametrize("backend", ["stoch", "pcoh"])
def test_randomized_round_trips_both_directions(backend):
    if backend == "stoch":
        chain = build_dd_chain(stoch_copointed(BOOL), 4)
    else:
        chain = build_dd_chain(pcoh_ground_copointed(BOOL), 4)
    rng = random.Random(17)
    raw = lambda m: m.rows if hasattr(m, "rows") else m.entries
    for _ in range(25):
        top_len = len(chain.level_space(4))
        vals = [F(rng.randint(0, 9)) for _ in range(top_len)]
        total = sum(vals) or F(1)
        top = chain.backend.make(
            unit_space(), chain.level_space(4), (tuple(v / total for v in vals),)
        )
        cone = dd_cone_from_top(chain, top)
        assert cone.deviation() == 0
        back = factor_delete_cone(expand_dd_cone(cone))
        assert all(
            max_abs_diff(raw(a), raw(b)) == 0 for a, b in zip(back.legs, cone.legs)
        )
        sym_top = chain.backend.make(
            unit_space(),
            chain.backend.power(4),
            mm(raw(top), raw(chain.eqs[4])),
        )
        delete_cone = delete_cone_from_top(chain, sym_top)
        expanded = expand_dd_cone(factor_delete_cone(delete_cone))
        assert all(
            max_abs_diff(raw(a), raw(b)) == 0
            for a, b in zip(expanded.legs, delete_cone.legs)
        )


# -- parametrized variants ---------------------------------------------------------------------

def test_tensor_parametrized_unit_reduces_to_plain():
    chain = build_dd_chain(stoch_copointed(BOOL), 3)
    report = verify_tensor_parametrized(chain, unit_space(), samples=4, seed=0)
    assert report.max_deviation == 0


def test_tensor_parametrized_with_bool():
    chain = build_dd_chain(stoch_copointed(BOOL), 3)
    report = verify_tensor_parametrized(chain, symbol_space(BOOL), samples=6, seed=1)
    assert report.max_deviation == 0


def test_tensor_parametrized_broken_map_reports_deviation():
    chain = build_dd_chain(stoch_copointed(BOOL), 2)
    y = symbol_space(BOOL)
    n = 2
    level_y = len(chain.level_space(n)) * len(y)
    # symmetric map, then a deliberate asymmetry
    h = ((F(1, level_y),) * level_y,)
    from urnchains._linalg import kron, identity, matmul

    f_rows = matmul(h, kron(chain.eqs[n].rows, identity(len(y))))
    broken = [list(r) for r in f_rows]
    # bump the ((t,f), t) column; its swap image ((f,t), t) stays put
    broken[0][2] += F(1, 7)
    _, dev = factor_parametrized(tuple(map(tuple, broken)), chain, y, n)
    assert dev > 0


# -- reified truncation limits ----------------------------------------------------------------------

def test_bang_cone_round_trip():
    chain = build_dd_chain(pcoh_free_copointed(bool_pcs()), 3)
    b = promotion(PcsVector.of(symbol_space(BOOL), "1/3", "1/3"), 3)
    cone = bang_cone(b, chain)
    assert cone.deviation() == 0
    assert bang_from_cone(cone).coeffs == b.coeffs


def test_every_depth_table_is_a_coherent_family():
    # coherent families on the restriction chain are exactly the depth-N
    # tables: any complete table already satisfies the compatibility squares
    from urnchains.pcoh import BangElement

    from urnchains.spaces import bounded_multiset_space

    chain = build_dd_chain(pcoh_free_copointed(bool_pcs()), 2)
    rng = random.Random(23)
    for _ in range(5):
        table = {
            counts: F(rng.randint(0, 9), 9)
            for counts in bounded_multiset_space(BOOL, 2).labels
        }
        b = BangElement.from_table(BOOL, 2, table)
        cone = bang_cone(b, chain)
        assert cone.deviation() == 0
        assert bang_from_cone(cone).coeffs == b.coeffs
