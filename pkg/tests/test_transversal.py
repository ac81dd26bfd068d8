"""Transversality predicate, oriented fibered products, generic perturbation."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from chaincalc.chains import (
    Cell,
    Chain,
    TargetSpace,
    apply_domain_iso,
    boundary,
)
from chaincalc.errors import (
    ArityMismatchError,
    DimensionMismatchError,
    PerturbationError,
    TransversalityError,
)
from chaincalc.linalg import AffineMap, matrix, vector
from chaincalc.polytope import Polytope
from chaincalc.transversal import (
    EvaluationTuple,
    fibered_product,
    fibered_product_chain,
    is_transversal,
    perturb,
    slice_polytope,
    transversality_witness,
)

E1 = TargetSpace.euclidean(1)
E2 = TargetSpace.euclidean(2)
T1 = TargetSpace.flat_torus(1)

I = Polytope.interval(0, 1)
SQ = Polytope.from_vertices([(0, 0), (1, 0), (0, 1), (1, 1)])


def one_cell(poly, rows, trans, target, coeff=1):
    return Chain.of_cell(poly, AffineMap.make(rows, trans), target, coeff)


def const_point(values, target, coeff=1):
    return Chain.of_cell(Polytope.point([]), AffineMap.constant(0, values), target, coeff)


def tuple_of(chains, target):
    cells = [c for ch in chains for c in ch.cells]
    return EvaluationTuple.of_cells(cells, target)


# --- predicate, frozen examples -------------------------------------------


def test_two_equal_constants_not_transversal():
    x = const_point([0], E1)
    y = const_point([0], E1)
    assert not is_transversal(tuple_of([x, y], E1))
    w = transversality_witness(tuple_of([x, y], E1))
    assert w["rank"] == 0 and w["needed"] == 1


def test_opposite_segments_transversal():
    x = one_cell(I, [[1]], [0], E1)
    y = one_cell(I, [[-1]], [1], E1)
    assert is_transversal(tuple_of([x, y], E1))


def test_parallel_horizontal_segments_not_transversal():
    x = one_cell(I, [[1], [0]], [0, 0], E2)
    y = one_cell(I, [[1], [0]], [0, 0], E2)
    w = transversality_witness(tuple_of([x, y], E2))
    assert w is not None
    assert w["rank"] == 1 and w["needed"] == 2


def test_distinct_constants_transversal_with_empty_fiber():
    x = const_point([0], E1)
    y = const_point([1], E1)
    assert is_transversal(tuple_of([x, y], E1))
    assert fibered_product(x, y).is_zero()


def test_single_cell_always_transversal():
    x = one_cell(SQ, [[0, 0]], [5], E1)
    assert is_transversal(tuple_of([x], E1))


def test_torus_constants_identified_by_translation():
    x = const_point([Fraction(1, 3)], T1)
    y = const_point([Fraction(7, 3)], T1)
    assert not is_transversal(tuple_of([x, y], T1))


def test_arity_must_match_entries():
    x = one_cell(I, [[1]], [0], E1)
    with pytest.raises(ArityMismatchError):
        EvaluationTuple(tuple((c, c.map) for c in x.cells), E1, 2)


# --- binary fibered product, frozen examples --------------------------------


def test_fiber_of_opposite_segments_is_antidiagonal():
    x = one_cell(I, [[1]], [0], E1)
    y = one_cell(I, [[-1]], [1], E1)
    f = fibered_product(x, y)
    dom = Polytope.from_vertices([(0, 1), (1, 0)])
    expected = Chain.of_cell(dom, AffineMap.make([[1, 0]], [0]), E1)
    assert f == expected
    assert f.degree() == 1


def test_fiber_of_point_against_segment():
    x = const_point([0], E1)
    y = one_cell(I, [[1]], [Fraction(-1, 2)], E1)
    f = fibered_product(x, y)
    expected = Chain.of_cell(
        Polytope.point([Fraction(1, 2)]), AffineMap.constant(1, [0]), E1, -1
    )
    assert f == expected


def test_fiber_of_disjoint_constants_is_zero():
    x = const_point([0], E1)
    y = const_point([1], E1)
    assert fibered_product(x, y).is_zero()


def test_non_transversal_product_raises_with_witness():
    x = one_cell(I, [[1], [0]], [0, 0], E2)
    y = one_cell(I, [[1], [0]], [0, 0], E2)
    with pytest.raises(TransversalityError) as err:
        fibered_product(x, y)
    assert err.value.payload["needed"] == 2
    assert "fiber_point" in err.value.payload


def test_corner_only_touch_is_refused():
    x = one_cell(I, [[1]], [0], E1)
    y = one_cell(I, [[-1]], [0], E1)
    with pytest.raises(TransversalityError):
        fibered_product(x, y)


def test_fiber_dimension_law_on_square_times_line():
    x = one_cell(SQ, [[1, 0], [0, 1]], [0, 0], E2)
    y = one_cell(I, [[1], [Fraction(1, 2)]], [Fraction(1, 8), Fraction(1, 8)], E2)
    f = fibered_product(x, y)
    assert f.degree() == 2 + 1 - 2


def test_wrapping_torus_segment_against_point():
    x = one_cell(I, [[1]], [0], T1)
    y = const_point([0], T1)
    f = fibered_product(x, y)
    assert len(f.cells) == 2
    assert {c.domain.base_vertex for c in f.cells} == {vector([0]), vector([1])}
    assert f.degrees() == {0}


def test_product_needs_common_target():
    x = one_cell(I, [[1]], [0], E1)
    y = one_cell(I, [[1]], [0], T1)
    with pytest.raises(DimensionMismatchError):
        fibered_product(x, y)


# --- n-ary product, frozen examples ----------------------------------------


def test_unary_product_is_identity():
    x = one_cell(SQ, [[1, 1]], [0], E1)
    assert fibered_product_chain([x], 1) == x


def test_triple_of_segments_gives_codimension_two_fiber():
    a = one_cell(I, [[1]], [0], E1)
    b = one_cell(I, [[-1]], [1], E1)
    c = one_cell(I, [[1]], [0], E1)
    f = fibered_product_chain([a, b, c], 3)
    assert f.degree() == 3 - 2
    (cell,) = f.cells
    assert set(cell.domain.vertices) == {vector([1, 0, 1]), vector([0, 1, 0])}
    assert cell.map(vector([1, 0, 1])) == vector([1])
    assert cell.map(vector([0, 1, 0])) == vector([0])


def test_tuple_with_zero_chain_gives_zero():
    a = one_cell(I, [[1]], [0], E1)
    z = Chain.zero(E1)
    assert fibered_product_chain([a, z], 2).is_zero()


def test_arity_mismatch_rejected():
    a = one_cell(I, [[1]], [0], E1)
    with pytest.raises(ArityMismatchError):
        fibered_product_chain([a, a], 3)


# --- slicing engine ---------------------------------------------------------


def test_slice_with_no_constraints_is_identity():
    assert slice_polytope(SQ, (), ()) == SQ


def test_slice_square_by_diagonal():
    f = slice_polytope(SQ, matrix([[1, -1]]), vector([0]))
    assert set(f.vertices) == {vector([0, 0]), vector([1, 1])}
    assert f.dim == 1


def test_slice_misses_polytope():
    assert slice_polytope(SQ, matrix([[1, 0]]), vector([5])) is None


# --- properties -------------------------------------------------------------

small = st.fractions(min_value=-2, max_value=2, max_denominator=5)
slopes = st.fractions(min_value=-3, max_value=3, max_denominator=7).filter(bool)


def segment_chains(target_dim):
    # generic 1-cells: nonzero slopes keep corner coincidences rare
    return st.builds(
        lambda ss, ts, c: one_cell(
            I, [[s] for s in ss], ts, TargetSpace.euclidean(target_dim), c
        ),
        st.lists(slopes, min_size=target_dim, max_size=target_dim),
        st.lists(small, min_size=target_dim, max_size=target_dim),
        st.sampled_from([1, -1, 2]),
    )


def square_chains(target_dim):
    return st.builds(
        lambda rows, ts, c: one_cell(
            SQ, rows, ts, TargetSpace.euclidean(target_dim), c
        ),
        st.lists(
            st.lists(slopes, min_size=2, max_size=2),
            min_size=target_dim,
            max_size=target_dim,
        ),
        st.lists(small, min_size=target_dim, max_size=target_dim),
        st.sampled_from([1, -1]),
    )


def _try_product(*chains):
    try:
        out = chains[0]
        for nxt in chains[1:]:
            out = fibered_product(out, nxt)
        return out
    except TransversalityError:
        assume(False)


@settings(max_examples=60, deadline=None)
@given(segment_chains(1), segment_chains(1), segment_chains(1))
def test_associativity_on_generic_triples(x, y, z):
    assume(is_transversal(tuple_of([x, y, z], E1)))
    lhs = _try_product(_try_product(x, y), z)
    rhs = _try_product(x, _try_product(y, z))
    assert lhs == rhs
    assert fibered_product_chain([x, y, z], 3) == lhs


@settings(max_examples=60, deadline=None)
@given(segment_chains(2), square_chains(2))
def test_koszul_swap_sign(x, y):
    assume(is_transversal(tuple_of([x, y], E2)))
    f_xy = _try_product(x, y)
    f_yx = _try_product(y, x)
    assume(not f_xy.is_zero())
    sign = (-1) ** ((x.degree() + 2) * (y.degree() + 2) % 2)
    # f_yx lives on K_y x K_x; move its blocks back to K_x x K_y order
    n, k = 1, 2  # ambient dims of dom x and dom y
    rows = [[0] * k + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    rows += [[1 if j == i else 0 for j in range(k)] + [0] * n for i in range(k)]
    swap = AffineMap.make(rows, [0] * (n + k))
    assert f_xy == apply_domain_iso(f_yx, swap).scale(sign)
    assert apply_domain_iso(apply_domain_iso(f_yx, swap), swap.inverse()) == f_yx


def _avoids_corner_strata(x, y, target):
    # Leibniz needs the fiber to miss all strata of depth >= 2
    for cx in x.cells:
        for cy in y.cells:
            for fx, _ in cx.domain.facet_pairs:
                for fy, _ in cy.domain.facet_pairs:
                    probe = EvaluationTuple(
                        ((Cell(fx, cx.map, 1), cx.map), (Cell(fy, cy.map, 1), cy.map)),
                        target,
                        2,
                    )
                    w = transversality_witness(probe)
                    if w is not None:
                        return False
    return True


@settings(max_examples=40, deadline=None)
@given(square_chains(1), segment_chains(1))
def test_leibniz_rule_m1(x, y):
    assume(is_transversal(tuple_of([x, y], E1)))
    assume(_avoids_corner_strata(x, y, E1))
    f = _try_product(x, y)
    sign = (-1) ** ((x.degree() + 1) % 2)
    lhs = boundary(f)
    rhs = _try_product(boundary(x), y) + _try_product(x, boundary(y)).scale(sign)
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(segment_chains(2), square_chains(2))
def test_leibniz_rule_m2(x, y):
    assume(is_transversal(tuple_of([x, y], E2)))
    assume(_avoids_corner_strata(x, y, E2))
    f = _try_product(x, y)
    sign = (-1) ** ((x.degree() + 2) % 2)
    lhs = boundary(f)
    rhs = _try_product(boundary(x), y) + _try_product(x, boundary(y)).scale(sign)
    assert lhs == rhs


@settings(max_examples=50, deadline=None)
@given(segment_chains(2), square_chains(2))
def test_dimension_law(x, y):
    assume(is_transversal(tuple_of([x, y], E2)))
    f = _try_product(x, y)
    if not f.is_zero():
        assert f.degree() == x.degree() + y.degree() - 2


@settings(max_examples=40, deadline=None)
@given(segment_chains(1), segment_chains(1))
def test_subtuples_of_generic_transversal_pairs(x, y):
    assume(is_transversal(tuple_of([x, y], E1)))
    for sub in ([x], [y]):
        assert is_transversal(tuple_of(sub, E1))


# --- perturbation -----------------------------------------------------------


def test_perturb_keeps_transversal_input_with_zero_budget():
    x = one_cell(I, [[1]], [0], E1)
    y = one_cell(I, [[-1]], [1], E1)
    out = perturb([x, y], 0)
    assert out == (x, y)


def test_perturb_separates_equal_constants():
    x = const_point([0], E1)
    y = const_point([0], E1)
    ox, oy = perturb([x, y], Fraction(1, 10))
    assert is_transversal(tuple_of([ox, oy], E1))
    vx = ox.cells[0].map(vector([]))
    vy = oy.cells[0].map(vector([]))
    assert vx != vy
    assert abs(vx[0]) <= Fraction(1, 10) and abs(vy[0]) <= Fraction(1, 10)


def test_perturb_separates_parallel_segments():
    x = one_cell(I, [[1], [0]], [0, 0], E2)
    y = one_cell(I, [[1], [0]], [0, 0], E2)
    moved = perturb([x, y], Fraction(1, 16))
    assert is_transversal(tuple_of(list(moved), E2))
    for before, after in zip((x, y), moved):
        d = [
            after.cells[0].map.translation[i] - before.cells[0].map.translation[i]
            for i in range(2)
        ]
        assert all(abs(v) <= Fraction(1, 16) for v in d)


def test_perturb_zero_budget_cannot_fix_and_errors():
    x = const_point([0], E1)
    y = const_point([0], E1)
    with pytest.raises(PerturbationError):
        perturb([x, y], 0)


def test_perturb_is_deterministic():
    x = one_cell(I, [[1], [0]], [0, 0], E2)
    y = one_cell(I, [[1], [0]], [0, 0], E2)
    assert perturb([x, y], Fraction(1, 8), seed=7) == perturb(
        [x, y], Fraction(1, 8), seed=7
    )
    assert perturb([x, y], Fraction(1, 8), seed=7) != perturb(
        [x, y], Fraction(1, 8), seed=8
    )


@settings(max_examples=25, deadline=None)
@given(
    st.lists(small, min_size=2, max_size=2),
    st.lists(small, min_size=2, max_size=2),
)
def test_perturb_output_transversal_within_budget(t1, t2):
    x = one_cell(I, [[1], [0]], t1, E2)
    y = one_cell(I, [[1], [0]], t2, E2)
    budget = Fraction(1, 12)
    try:
        moved = perturb([x, y], budget, seed=3)
    except PerturbationError:
        return
    assert is_transversal(tuple_of(list(moved), E2))
    for before, after in zip((x, y), moved):
        for b, a in zip(before.cells, after.cells):
            diff = [
                a.map.translation[i] - b.map.translation[i]
                for i in range(2)
            ]
            assert all(abs(v) <= budget for v in diff)
            assert a.map.matrix == b.map.matrix
