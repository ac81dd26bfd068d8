"""Oriented rational convex polytopes with exact facet enumeration.

A polytope is stored as its extreme points (lexicographically sorted) plus an
orientation sign.  The sign is interpreted relative to the *canonical ordered
basis* of the affine span: take the lexicographically smallest vertex as base
point, scan the remaining vertices in lexicographic order, and greedily keep
the difference vectors that are linearly independent.  All orientation
comparisons reduce to determinant signs against that basis, which keeps every
orientation question decidable.

Facets are enumerated by brute-force hyperplane fitting in span coordinates.
That is exponential in the intrinsic dimension but exact, and the package
keeps cell dimensions small.  Product polytopes remember their factors so
facet/face/inequality queries use the product rules instead of re-running the
hull machinery in higher dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .errors import UnsupportedDimensionError
from .linalg import (
    AffineMap,
    Matrix,
    Rationalish,
    Vector,
    basis_vector,
    det,
    dot,
    feasible_point,
    from_columns,
    kernel_basis,
    mat_mul,
    mat_vec,
    matrix,
    rank,
    solve_and_rank,
    solve_unique,
    vadd,
    vector,
    vscale,
    vsub,
    zero_vector,
)

MAX_AMBIENT_DIM = 4


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _greedy_independent(dirs: Sequence[Vector]) -> tuple[Vector, ...]:
    chosen: list[Vector] = []
    current_rank = 0
    for d in dirs:
        if any(x != 0 for x in d):
            r = rank(tuple(chosen) + (d,))
            if r > current_rank:
                chosen.append(d)
                current_rank = r
    return tuple(chosen)


@dataclass(frozen=True)
class Polytope:
    """Extreme points plus an orientation sign against the canonical basis."""

    vertices: tuple[Vector, ...]
    orientation: int = 1

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ValueError("a polytope needs at least one vertex")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.vertices != tuple(sorted(self.vertices)):
            raise ValueError("vertices must be lexicographically sorted")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_vertices(
        cls,
        points: Iterable[Sequence[Rationalish]],
        orientation: int = 1,
    ) -> "Polytope":
        """Canonical polytope on the extreme points of the hull of ``points``.

        Interior and otherwise redundant points are dropped by an exact
        linear-programming membership test.
        """
        pts = sorted(set(vector(p) for p in points))
        if not pts:
            raise ValueError("a polytope needs at least one vertex")
        ambient = len(pts[0])
        if any(len(p) != ambient for p in pts):
            raise ValueError("vertices of mixed ambient dimension")
        if ambient > MAX_AMBIENT_DIM:
            raise UnsupportedDimensionError(
                f"ambient dimension {ambient} exceeds the supported maximum "
                f"{MAX_AMBIENT_DIM}",
                payload={"ambient_dim": ambient},
            )
        extreme = [p for p in pts if not _in_hull(p, [q for q in pts if q != p])]
        return cls(tuple(extreme), orientation)

    @classmethod
    def _canonical(cls, sorted_extreme: tuple[Vector, ...], orientation: int) -> "Polytope":
        """Internal constructor: trusts that the vertex set is extreme."""
        return cls(sorted_extreme, orientation)

    @classmethod
    def point(cls, coords: Sequence[Rationalish], orientation: int = 1) -> "Polytope":
        return cls((vector(coords),), orientation)

    @classmethod
    def segment(
        cls, a: Sequence[Rationalish], b: Sequence[Rationalish], orientation: int = 1
    ) -> "Polytope":
        return cls.from_vertices([a, b], orientation)

    @classmethod
    def interval(cls, lo: Rationalish, hi: Rationalish, orientation: int = 1) -> "Polytope":
        return cls.from_vertices([[lo], [hi]], orientation)

    @classmethod
    def with_positive_basis(
        cls,
        vertices: Iterable[Vector],
        positive_basis: Sequence[Vector],
        trusted: bool = True,
    ) -> "Polytope":
        """Polytope oriented so that ``positive_basis`` is positively oriented.

        ``positive_basis`` must be an ordered basis of the affine span's
        direction space.  With ``trusted`` the vertex set is taken to be
        extreme already.
        """
        vs = tuple(sorted(set(vertices)))
        base = cls._canonical(vs, 1) if trusted else cls.from_vertices(vs, 1)
        if len(positive_basis) != base.dim:
            raise ValueError("positive basis has wrong length for the span")
        sigma = base.sign_of_basis(positive_basis)
        if sigma == 0:
            raise ValueError("positive basis is degenerate for this polytope")
        return base if sigma > 0 else cls._canonical(base.vertices, -1)

    # -- basic geometry ----------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])

    @property
    def base_vertex(self) -> Vector:
        return self.vertices[0]

    @cached_property
    def canonical_basis(self) -> tuple[Vector, ...]:
        v0 = self.base_vertex
        return _greedy_independent([vsub(v, v0) for v in self.vertices[1:]])

    @property
    def dim(self) -> int:
        return len(self.canonical_basis)

    @cached_property
    def _span_solver(self) -> Matrix:
        """Left inverse of the canonical basis matrix (columns = basis)."""
        b = from_columns(self.canonical_basis)
        if not self.canonical_basis:
            return ()
        bt = tuple(zip(*b))
        gram = matrix([[dot(r, c) for c in self.canonical_basis] for r in self.canonical_basis])
        # (B^T B)^{-1} B^T, computed column by column
        cols = []
        for i in range(len(bt[0]) if bt else 0):
            col = tuple(row[i] for row in bt)
            cols.append(solve_unique(gram, col))
        return from_columns(cols) if cols else ()

    def direction_coords(self, direction: Sequence[Fraction]) -> Vector:
        """Coordinates of a span direction in the canonical basis."""
        if not self.canonical_basis:
            if any(x != 0 for x in direction):
                raise ValueError("direction not in the span of a point")
            return ()
        t = mat_vec(self._span_solver, tuple(direction))
        # verify membership exactly (solver is only a left inverse)
        rebuilt = zero_vector(self.ambient_dim)
        for c, b in zip(t, self.canonical_basis):
            rebuilt = vadd(rebuilt, vscale(c, b))
        if rebuilt != tuple(direction):
            raise ValueError("direction not in the affine span")
        return t

    def span_coords(self, point: Sequence[Fraction]) -> Vector:
        return self.direction_coords(vsub(tuple(point), self.base_vertex))

    def span_contains(self, point: Sequence[Fraction]) -> bool:
        try:
            self.span_coords(point)
            return True
        except ValueError:
            return False

    def sign_of_basis(self, dirs: Sequence[Sequence[Fraction]]) -> int:
        """+1 / −1 if ``dirs`` is a positively / negatively oriented basis of
        the span, 0 if degenerate."""
        if len(dirs) != self.dim:
            raise ValueError("basis has wrong length")
        if self.dim == 0:
            return self.orientation
        cols = [self.direction_coords(d) for d in dirs]
        return self.orientation * _sign(det(from_columns(cols)))

    def reversed(self) -> "Polytope":
        return Polytope._canonical(self.vertices, -self.orientation)

    def with_orientation(self, orientation: int) -> "Polytope":
        return Polytope._canonical(self.vertices, orientation)

    @cached_property
    def bounding_box(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(
            (min(v[i] for v in self.vertices), max(v[i] for v in self.vertices))
            for i in range(self.ambient_dim)
        )

    # -- products ----------------------------------------------------------

    def product(self, other: "Polytope") -> "Polytope":
        """Cartesian product with the product orientation (self block first)."""
        verts = tuple(sorted(a + b for a in self.vertices for b in other.vertices))
        n, m = self.ambient_dim, other.ambient_dim
        pos = [b + zero_vector(m) for b in self.canonical_basis] + [
            zero_vector(n) + b for b in other.canonical_basis
        ]
        out = Polytope.with_positive_basis(verts, pos)
        if self.orientation * other.orientation < 0:
            out = out.reversed()
        out.__dict__["_factors"] = (self, other)
        return out

    # -- inequality description ---------------------------------------------

    @cached_property
    def inequalities(self) -> tuple[tuple[Vector, Fraction], ...]:
        """Ambient-coordinate inequalities (n, c) with <n, x> <= c cutting the
        polytope out of its affine span."""
        factors = self.__dict__.get("_factors")
        if factors is not None:
            a, b = factors
            n, m = a.ambient_dim, b.ambient_dim
            lifted = [(row + zero_vector(m), c) for row, c in a.inequalities]
            lifted += [(zero_vector(n) + row, c) for row, c in b.inequalities]
            return tuple(lifted)
        if self.dim == 0:
            return ()
        out = []
        for normal_span, offset in self._span_halfspaces:
            n_amb = (
                mat_vec(tuple(zip(*self._span_solver)), normal_span)
                if self._span_solver
                else zero_vector(self.ambient_dim)
            )
            c_amb = offset + dot(n_amb, self.base_vertex)
            out.append((n_amb, c_amb))
        return tuple(sorted(out))

    @cached_property
    def _span_halfspaces(self) -> tuple[tuple[Vector, Fraction], ...]:
        """Facet-supporting halfspaces in span coordinates, outward normals."""
        k = self.dim
        if k == 0:
            return ()
        pts = [self.span_coords(v) for v in self.vertices]
        found: dict[tuple, tuple[Vector, Fraction]] = {}
        for subset in combinations(range(len(pts)), k):
            base = pts[subset[0]]
            diffs = tuple(vsub(pts[i], base) for i in subset[1:])
            if k == 1:
                normals = (basis_vector(1, 0),)
            else:
                if rank(diffs) != k - 1:
                    continue
                normals = kernel_basis(diffs)
                if len(normals) != 1:
                    continue
            n = normals[0]
            c = dot(n, base)
            values = [dot(n, p) - c for p in pts]
            if all(v <= 0 for v in values):
                pass
            elif all(v >= 0 for v in values):
                n, c = vscale(Fraction(-1), n), -c
            else:
                continue
            lead = next(x for x in n if x != 0)
            scale = 1 / abs(lead)
            key = (vscale(scale, n), c * scale)
            found[key] = key
        return tuple(sorted(found.values()))

    def contains(self, point: Sequence[Fraction]) -> bool:
        p = vector(point)
        if not self.span_contains(p):
            return False
        return all(dot(n, p) <= c for n, c in self.inequalities)

    # -- faces --------------------------------------------------------------

    @cached_property
    def facet_pairs(self) -> tuple[tuple["Polytope", int], ...]:
        """Facets with the outward-normal-first induced orientation sign.

        Each entry is (facet polytope stored with +1 orientation, sign), so
        the induced oriented facet is sign * facet.
        """
        if self.dim == 0:
            return ()
        factors = self.__dict__.get("_factors")
        if factors is not None:
            return self._product_facets(*factors)
        out = []
        pts_span = [self.span_coords(v) for v in self.vertices]
        for normal_span, offset in self._span_halfspaces:
            tight = tuple(
                v
                for v, w in zip(self.vertices, pts_span)
                if dot(normal_span, w) == offset
            )
            facet = Polytope._canonical(tight, 1)
            cols = [normal_span] + [
                self.direction_coords(d) for d in facet.canonical_basis
            ]
            sign = self.orientation * _sign(det(from_columns(cols)))
            out.append((facet, sign))
        return tuple(sorted(out, key=lambda fs: fs[0].vertices))

    def _product_facets(self, a: "Polytope", b: "Polytope") -> tuple[tuple["Polytope", int], ...]:
        # boundary-of-product rule; signs verified against the generic
        # enumeration by the test suite
        out = []
        for f, s in a.facet_pairs:
            piece = f.product(b)
            out.append((piece.with_orientation(1), s * piece.orientation))
        sign_a = 1 if a.dim % 2 == 0 else -1
        for f, s in b.facet_pairs:
            piece = a.product(f)
            out.append((piece.with_orientation(1), sign_a * s * piece.orientation))
        return tuple(sorted(out, key=lambda fs: fs[0].vertices))

    @cached_property
    def all_faces(self) -> tuple["Polytope", ...]:
        """Every face of every dimension, self included, +1 orientations."""
        factors = self.__dict__.get("_factors")
        if factors is not None:
            a, b = factors
            faces = set()
            for fa in a.all_faces:
                for fb in b.all_faces:
                    fab = fa.product(fb).with_orientation(1)
                    faces.add(fab)
            return tuple(sorted(faces, key=lambda f: (f.dim, f.vertices)))
        seen: dict[tuple[Vector, ...], Polytope] = {}
        stack = [self.with_orientation(1)]
        while stack:
            f = stack.pop()
            if f.vertices in seen:
                continue
            seen[f.vertices] = f
            for sub, _ in f.facet_pairs:
                if sub.vertices not in seen:
                    stack.append(sub)
        return tuple(sorted(seen.values(), key=lambda f: (f.dim, f.vertices)))

    @cached_property
    def span_projection(self) -> AffineMap:
        """Affine retraction of the ambient space onto the affine span.

        Restriction-to-span is the identity; composing a cell map with this
        retraction gives a canonical representative of the map's restriction
        to the polytope.
        """
        n = self.ambient_dim
        if self.dim == 0:
            return AffineMap.constant(n, self.base_vertex)
        b = from_columns(self.canonical_basis)
        bs = mat_mul(b, self._span_solver)
        v0 = self.base_vertex
        shift = vsub(v0, mat_vec(bs, v0))
        return AffineMap(bs, shift)

    def apply_affine_iso(self, iso: AffineMap) -> "Polytope":
        """Pushforward along an affine map injective on the span; orientation
        is transported along the map."""
        new_vertices = [iso(v) for v in self.vertices]
        if len(set(new_vertices)) != len(new_vertices):
            raise ValueError("affine map is not injective on the polytope")
        new_basis = [iso.linear_image(b) for b in self.canonical_basis]
        out = Polytope.with_positive_basis(new_vertices, new_basis)
        return out if self.orientation > 0 else out.reversed()


def _in_hull(point: Vector, candidates: Sequence[Vector]) -> bool:
    if not candidates:
        return False
    ambient = len(point)
    rows = [[c[i] for c in candidates] for i in range(ambient)]
    rows.append([Fraction(1)] * len(candidates))
    rhs = list(point) + [Fraction(1)]
    return feasible_point(matrix(rows), vector(rhs)) is not None


def vertices_from_inequalities(
    rows: Sequence[Vector], rhs: Sequence[Fraction]
) -> tuple[Vector, ...]:
    """All vertices of the bounded region {u : rows·u <= rhs}.

    Brute force: each vertex is the unique solution of some maximal
    independent tight subset.  The caller guarantees boundedness.
    """
    p = len(rows[0]) if rows else 0
    if p == 0:
        ok = all(c >= 0 for c in rhs)
        return ((),) if ok else ()
    verts: set[Vector] = set()
    idx = range(len(rows))
    for subset in combinations(idx, p):
        sub = tuple(rows[i] for i in subset)
        sol, rk = solve_and_rank(sub, tuple(rhs[i] for i in subset))
        if rk != p or sol is None:
            continue
        u, basis = sol
        if basis:
            continue
        if all(dot(rows[i], u) <= rhs[i] for i in idx):
            verts.add(u)
    return tuple(sorted(verts))
