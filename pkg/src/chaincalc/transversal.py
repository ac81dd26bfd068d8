"""Transversality predicate and oriented fibered products of chains.

Everything here reduces to one primitive: slicing an oriented polytope by an
affine constraint system of full row rank on its span.  The slice is oriented
by the normal-first rule: pick lifts w_1..w_c inside the span whose constraint
images are the standard basis of R^c; a basis F of the slice is positive when
(w_1, ..., w_c, F) is a positive basis of the sliced polytope's span.

The binary fibered product of cells x, y over an m-dimensional target is the
slice of K_x x K_y along the difference of the evaluation maps, times the
correction sign (-1)^(m * dim K_x).  With that correction the product is
associative on the nose and satisfies the Koszul commutation rule with sign
(-1)^((dim K_x + m)(dim K_y + m)); n-ary fibered products are defined as the
left-nested fold.  Transversality of a tuple is an exact rank test on the
stacked consecutive differences of the evaluation maps, required only when
the joint fiber over the diagonal is nonempty (checked by exact feasibility,
over every integer translate on the torus).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Sequence

from .chains import Cell, Chain, TargetSpace
from .errors import (
    ArityMismatchError,
    DimensionMismatchError,
    PerturbationError,
    TransversalityError,
)
from .linalg import (
    AffineMap,
    Matrix,
    Vector,
    basis_vector,
    det,
    dot,
    feasible_point,
    frac,
    from_columns,
    mat_mul,
    mat_vec,
    matrix,
    precompose_block,
    rank,
    rank_of_vectors,
    solve_and_rank,
    transpose,
    vadd,
    vector,
    vscale,
    vsub,
    zero_vector,
)
from .polytope import Polytope, vertices_from_inequalities


@dataclass(frozen=True)
class EvaluationTuple:
    """Cells with marked evaluation maps into a common target space.

    The tuple is measured against the diagonal of the ``diagonal_arity``-fold
    product of the target.
    """

    entries: tuple[tuple[Cell, AffineMap], ...]
    target: TargetSpace
    diagonal_arity: int

    def __post_init__(self) -> None:
        if self.diagonal_arity < 1 or self.diagonal_arity != len(self.entries):
            raise ArityMismatchError(
                "diagonal arity must match the number of marked cells"
            )
        for cell, ev in self.entries:
            if ev.domain_dim != cell.domain.ambient_dim:
                raise DimensionMismatchError("evaluation map does not read the cell domain")
            if ev.codomain_dim != self.target.dim:
                raise DimensionMismatchError("evaluation map does not land in the target")

    @classmethod
    def of_cells(cls, cells: Sequence[Cell], target: TargetSpace) -> "EvaluationTuple":
        return cls(tuple((c, c.map) for c in cells), target, len(cells))


def _image_box(ev: AffineMap, dom: Polytope) -> tuple[tuple[Fraction, Fraction], ...]:
    values = [ev(v) for v in dom.vertices]
    return tuple(
        (min(v[i] for v in values), max(v[i] for v in values))
        for i in range(ev.codomain_dim)
    )


def _integer_translates(
    ex: AffineMap, dx: Polytope, ey: AffineMap, dy: Polytope
) -> list[Vector]:
    """Integer vectors k that e_x - e_y can attain on the domain product."""
    bx = _image_box(ex, dx)
    by = _image_box(ey, dy)
    ranges = []
    for (lo_x, hi_x), (lo_y, hi_y) in zip(bx, by):
        lo = lo_x - hi_y
        hi = hi_x - lo_y
        lo_i = -((-lo.numerator) // lo.denominator)  # ceil
        hi_i = hi.numerator // hi.denominator        # floor
        if lo_i > hi_i:
            return []
        ranges.append([Fraction(k) for k in range(lo_i, hi_i + 1)])
    return [tuple(combo) for combo in iter_product(*ranges)]


def _difference_system(
    ex: AffineMap, ey: AffineMap, total_dim: int, offset_y: int
) -> tuple[Matrix, Vector]:
    """Rows and base translation of g(a, b) = e_x(a) - e_y(b) on the product."""
    gx = precompose_block(ex, 0, total_dim)
    gy = precompose_block(ey, offset_y, total_dim)
    rows = tuple(vsub(rx, ry) for rx, ry in zip(gx.matrix, gy.matrix))
    base = vsub(gx.translation, gy.translation)
    return rows, base


def slice_polytope(
    p: Polytope, rows: Matrix, rhs: Sequence[Fraction]
) -> Polytope | None:
    """Oriented {x in p : rows x = rhs}, or None when empty.

    Requires the constraint to have full row rank on the span of ``p``
    (transversality of the top stratum); raises TransversalityError otherwise
    when the slice would be nonempty.
    """
    c = len(rows)
    if c == 0:
        return p
    k = p.dim
    v0 = p.base_vertex
    bcols = from_columns(p.canonical_basis)
    # constraint in span parameters t: R t = s, with x = v0 + B t
    r_mat = mat_mul(rows, bcols) if k else tuple(() for _ in range(c))
    s = vsub(tuple(rhs), mat_vec(rows, v0))
    sol, rk = solve_and_rank(matrix(r_mat), vector(s))
    if rk < c:
        if sol is None:
            return None
        raise TransversalityError(
            "constraint system is rank deficient on the polytope span",
            payload={"rank": rk, "needed": c},
        )
    if sol is None:
        return None
    t0, kernel = sol
    # inequalities of p in the fiber parameters u, where t = t0 + K u
    bt = transpose(bcols)
    kt = transpose(from_columns(kernel))
    rows_u: list[Vector] = []
    rhs_u: list[Fraction] = []
    for n_amb, d in p.inequalities:
        n_t = mat_vec(bt, n_amb) if k else ()
        n_u = mat_vec(kt, n_t) if kernel else ()
        rows_u.append(tuple(n_u))
        rhs_u.append(d - dot(n_amb, v0) - dot(n_t, t0))
    verts_u = vertices_from_inequalities(rows_u, rhs_u)
    if not verts_u:
        return None
    def unparam(u: Vector) -> Vector:
        t = t0
        for coeff, kb in zip(u, kernel):
            t = vadd(t, vscale(coeff, kb))
        x = v0
        for coeff, b in zip(t, p.canonical_basis):
            x = vadd(x, vscale(coeff, b))
        return x
    verts = [unparam(u) for u in verts_u]
    if rank_of_vectors([vsub(v, verts[0]) for v in verts[1:]]) != k - c:
        raise TransversalityError(
            "slice degenerates to a lower-dimensional face touch",
            payload={"expected_dim": k - c, "vertices": [list(map(str, v)) for v in verts]},
        )
    # orientation: lifts y_j with R y_j = f_j, then fiber directions
    lift_cols = []
    for j in range(c):
        sol_j, _ = solve_and_rank(matrix(r_mat), basis_vector(c, j))
        assert sol_j is not None
        lift_cols.append(sol_j[0])
    sign_mat = from_columns(lift_cols + list(kernel))
    sigma = p.orientation * _sign(det(sign_mat))
    if sigma == 0:
        raise TransversalityError("degenerate orientation frame in slice")
    fiber_dirs = [
        tuple(sum(kb[i] * p.canonical_basis[i][j] for i in range(k)) for j in range(p.ambient_dim))
        for kb in kernel
    ]
    out = Polytope.with_positive_basis(verts, fiber_dirs, trusted=True)
    return out if sigma > 0 else out.reversed()


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


# --- transversality predicate -------------------------------------------


def transversality_witness(t: EvaluationTuple) -> dict | None:
    """None when transversal; otherwise a witness payload.

    The tuple fails when the stacked consecutive-difference constraint is
    rank deficient on the cell tangent directions while the joint fiber over
    the diagonal is nonempty (for some integer translate on the torus).  The
    witness carries the cell domains, the deficient rank, and a fiber point.
    """
    n = t.diagonal_arity
    if n <= 1:
        return None
    m = t.target.dim
    needed = (n - 1) * m
    domains = [cell.domain for cell, _ in t.entries]
    evs = [ev for _, ev in t.entries]
    total = sum(d.ambient_dim for d in domains)
    block_offsets = []
    offset = 0
    for d in domains:
        block_offsets.append(offset)
        offset += d.ambient_dim
    rows_all: list[Vector] = []
    base_all: list[Fraction] = []
    for i in range(n - 1):
        gx = precompose_block(evs[i], block_offsets[i], total)
        gy = precompose_block(evs[i + 1], block_offsets[i + 1], total)
        for rx, ry in zip(gx.matrix, gy.matrix):
            rows_all.append(vsub(rx, ry))
        base_all.extend(vsub(gx.translation, gy.translation))
    dirs: list[Vector] = []
    for d, off in zip(domains, block_offsets):
        for b in d.canonical_basis:
            dirs.append(zero_vector(off) + b + zero_vector(total - off - d.ambient_dim))
    rk = rank(tuple(mat_vec(tuple(rows_all), v) for v in dirs)) if dirs else 0
    if rk >= needed:
        return None
    point = _joint_fiber_point(domains, evs, t.target, tuple(rows_all), tuple(base_all))
    if point is None:
        return None
    return {
        "faces": [[list(map(str, v)) for v in d.vertices] for d in domains],
        "rank": rk,
        "needed": needed,
        "fiber_point": list(map(str, point)),
    }


def _joint_fiber_point(
    domains: Sequence[Polytope],
    evs: Sequence[AffineMap],
    target: TargetSpace,
    rows: Matrix,
    base: Vector,
) -> Vector | None:
    """A point of the diagonal fiber over the closed cells, or None if empty."""
    m = target.dim
    n = len(domains)
    if target.is_torus:
        per_block = []
        for i in range(n - 1):
            ks = _integer_translates(evs[i], domains[i], evs[i + 1], domains[i + 1])
            if not ks:
                return None
            per_block.append(ks)
        candidates = [sum(combo, ()) for combo in iter_product(*per_block)]
    else:
        candidates = [zero_vector((n - 1) * m)]
    # convex multipliers per domain: sum_j lam_ij v_ij, sum_j lam_ij = 1, lam >= 0
    nvars = sum(len(d.vertices) for d in domains)
    conv_rows = []
    start = 0
    for d in domains:
        row = [Fraction(0)] * nvars
        for j in range(len(d.vertices)):
            row[start + j] = Fraction(1)
        conv_rows.append(tuple(row))
        start += len(d.vertices)
    # constraint rows in terms of the multipliers
    base_rows = []
    for r in rows:
        row = []
        idx = 0
        for d in domains:
            dim_d = d.ambient_dim
            seg = r[idx: idx + dim_d] if dim_d else ()
            for v in d.vertices:
                row.append(dot(seg, v))
            idx += dim_d
        base_rows.append(tuple(row))
    for k in candidates:
        rhs = [kk - bb for kk, bb in zip(k, base)] + [Fraction(1)] * n
        lam = feasible_point(matrix(list(base_rows) + conv_rows), vector(rhs))
        if lam is not None:
            point: list[Fraction] = []
            idx = 0
            for d in domains:
                coords = [Fraction(0)] * d.ambient_dim
                for v in d.vertices:
                    for j in range(d.ambient_dim):
                        coords[j] += lam[idx] * v[j]
                    idx += 1
                point.extend(coords)
            return tuple(point)
    return None


def is_transversal(t: EvaluationTuple) -> bool:
    return transversality_witness(t) is None


def require_transversal(t: EvaluationTuple) -> None:
    w = transversality_witness(t)
    if w is not None:
        raise TransversalityError(
            "evaluation tuple is not transversal to the diagonal", payload=w
        )


# --- fibered products -----------------------------------------------------


def _binary_fiber_cells(
    dom_x: Polytope,
    ex: AffineMap,
    coeff_x: int,
    dom_y: Polytope,
    ey: AffineMap,
    coeff_y: int,
    target: TargetSpace,
) -> list[Cell]:
    """All fiber cells of one transversal cell pair, Koszul-corrected."""
    m = target.dim
    q = dom_x.product(dom_y)
    total = q.ambient_dim
    rows, base = _difference_system(ex, ey, total, dom_x.ambient_dim)
    if target.is_torus:
        translates = _integer_translates(ex, dom_x, ey, dom_y)
    else:
        translates = [zero_vector(m)]
    correction = 1 if (m * dom_x.dim) % 2 == 0 else -1
    out: list[Cell] = []
    inherited = precompose_block(ex, 0, total)
    for k in translates:
        rhs = vsub(k, base)
        fiber = slice_polytope(q, rows, rhs)
        if fiber is None:
            continue
        out.append(Cell(fiber, inherited, correction * coeff_x * coeff_y))
    return out


def fibered_product(x: Chain, y: Chain) -> Chain:
    """Oriented fibered product over the common target's diagonal.

    The resulting cells live on {(a, b) : x(a) = y(b)} inside the domain
    products, mapped into the target by the common evaluation.
    """
    if x.target != y.target:
        raise DimensionMismatchError("fibered product requires a common target space")
    pairs = [
        (cx, cy) for cx in x.cells for cy in y.cells
    ]
    for cx, cy in pairs:
        require_transversal(EvaluationTuple.of_cells([cx, cy], x.target))
    cells: list[Cell] = []
    for cx, cy in pairs:
        cells.extend(
            _binary_fiber_cells(
                cx.domain, cx.map, cx.coefficient,
                cy.domain, cy.map, cy.coefficient,
                x.target,
            )
        )
    return Chain.build(x.target, cells, x.shift + y.shift)


def fibered_product_chain(xs: Sequence[Chain], diagonal_arity: int) -> Chain:
    """Left-nested fold of binary fibered products over the diagonal."""
    if diagonal_arity != len(xs):
        raise ArityMismatchError("diagonal arity must match the number of chains")
    if not xs:
        raise ArityMismatchError("fibered product of an empty tuple")
    targets = {x.target for x in xs}
    if len(targets) != 1:
        raise DimensionMismatchError("fibered product requires a common target space")
    target = xs[0].target
    # full-tuple transversality up front, so the fold cannot surprise us
    for combo in iter_product(*[x.cells for x in xs]):
        require_transversal(EvaluationTuple.of_cells(list(combo), target))
    out = xs[0]
    for nxt in xs[1:]:
        out = fibered_product(out, nxt)
    return out


# --- deterministic generic perturbation ------------------------------------


def _stable_seed(chains: Sequence[Chain], budget: Fraction, seed: int) -> int:
    h = hashlib.sha256()
    h.update(str(seed).encode())
    h.update(str(budget).encode())
    for ch in chains:
        h.update(ch.target.kind.encode())
        h.update(str(ch.target.dim).encode())
        for cell in ch.cells:
            h.update(repr(cell.domain.vertices).encode())
            h.update(repr((cell.map.matrix, cell.map.translation)).encode())
            h.update(str(cell.coefficient).encode())
    return int.from_bytes(h.digest()[:8], "big")


GRAIN = 16


def perturb(
    chains: Sequence[Chain],
    budget,
    *,
    diagonal_arity: int | None = None,
    seed: int = 0,
    max_retries: int = 64,
) -> tuple[Chain, ...]:
    """Translate each cell map by a deterministic rational offset (every
    coordinate bounded by ``budget``) until every cell tuple passes the
    transversality test.  Already-transversal input is returned unchanged."""
    budget = frac(budget)
    if budget < 0:
        raise ValueError("perturbation budget must be nonnegative")
    target = chains[0].target
    arity = len(chains) if diagonal_arity is None else diagonal_arity
    if any(ch.target != target for ch in chains):
        raise DimensionMismatchError("perturbation needs a common target space")

    def all_transversal(cs: Sequence[Chain]) -> bool:
        for combo in iter_product(*[c.cells for c in cs]):
            if not is_transversal(EvaluationTuple.of_cells(list(combo), target)):
                return False
        return True

    if all_transversal(chains):
        return tuple(chains)
    rng = random.Random(_stable_seed(chains, budget, seed))
    for _ in range(max_retries):
        moved = []
        for ch in chains:
            cells = []
            for cell in ch.cells:
                offset = [
                    budget * Fraction(rng.randint(-GRAIN, GRAIN), GRAIN)
                    for _ in range(target.dim)
                ]
                cells.append(Cell(cell.domain, cell.map.translate(offset), cell.coefficient))
            moved.append(Chain.build(ch.target, cells, ch.shift))
        if all_transversal(moved):
            return tuple(moved)
    raise PerturbationError(
        "no transversal perturbation found within the retry cap",
        payload={"budget": str(budget), "retries": max_retries},
    )
