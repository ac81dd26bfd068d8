"""Exact linear algebra over the rationals.

Everything in this package reduces to small dense systems, so the
implementation favours clarity and exactness over asymptotics: vectors are
tuples of ``fractions.Fraction``, matrices are tuples of row tuples, and all
eliminations are plain fraction-pivoting Gauss-Jordan.  No floating point
anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rationalish = Union[int, str, Fraction]
Vector = tuple[Fraction, ...]
Matrix = tuple[tuple[Fraction, ...], ...]


def frac(x: Rationalish) -> Fraction:
    """Coerce ints, ``"num/den"`` strings and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational scalar")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def vector(entries: Iterable[Rationalish]) -> Vector:
    return tuple(frac(x) for x in entries)


def matrix(rows: Iterable[Iterable[Rationalish]]) -> Matrix:
    out = tuple(vector(r) for r in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def zero_vector(n: int) -> Vector:
    return (Fraction(0),) * n


def basis_vector(n: int, i: int) -> Vector:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def identity_matrix(n: int) -> Matrix:
    return tuple(basis_vector(n, i) for i in range(n))


def vadd(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vsub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vscale(c: Fraction, v: Sequence[Fraction]) -> Vector:
    return tuple(c * a for a in v)


def vneg(v: Sequence[Fraction]) -> Vector:
    return tuple(-a for a in v)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v, strict=True)), Fraction(0))


def norm_squared(v: Sequence[Fraction]) -> Fraction:
    return dot(v, v)


def mat_vec(m: Matrix, v: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, v) for row in m)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def from_columns(cols: Sequence[Sequence[Fraction]]) -> Matrix:
    if not cols:
        return ()
    return tuple(tuple(col[i] for col in cols) for i in range(len(cols[0])))


def columns(m: Matrix) -> tuple[Vector, ...]:
    return tuple(transpose(m))


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form and the pivot column indices."""
    rows = [list(r) for r in m]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in rows), tuple(pivots)


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def rank_of_vectors(vectors: Sequence[Sequence[Fraction]]) -> int:
    vs = [v for v in vectors if any(x != 0 for x in v)]
    return rank(tuple(tuple(v) for v in vs)) if vs else 0


def det(m: Matrix) -> Fraction:
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    rows = [list(r) for r in m]
    sign = Fraction(1)
    result = Fraction(1)
    for c in range(n):
        pivot_row = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != c:
            rows[c], rows[pivot_row] = rows[pivot_row], rows[c]
            sign = -sign
        result *= rows[c][c]
        inv = 1 / rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return sign * result


def kernel_basis(m: Matrix) -> tuple[Vector, ...]:
    """Basis of the right null space {v : m v = 0}."""
    if not m:
        return ()
    ncols = len(m[0])
    r, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -r[i][f]
        basis.append(tuple(v))
    return tuple(basis)


def solve_and_rank(
    m: Matrix, b: Sequence[Fraction]
) -> tuple[tuple[Vector, tuple[Vector, ...]] | None, int]:
    """Full solution set of m x = b, plus the rank of m.

    Returns ``((particular, kernel_basis), rank)`` when consistent and
    ``(None, rank)`` when not.  The solution set is exact: every solution is
    particular + an integer-free rational combination of the kernel basis.
    """
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    if len(b) != nrows:
        raise ValueError("right-hand side length mismatch")
    if nrows == 0:
        return (zero_vector(ncols), tuple(identity_matrix(ncols))), 0
    aug = tuple(tuple(row) + (rhs,) for row, rhs in zip(m, b))
    raug, pivots_aug = rref(aug)
    rk = rank(m)
    if ncols in pivots_aug:
        return None, rk
    particular = [Fraction(0)] * ncols
    # pivots of the augmented rref coincide with pivots of m when consistent
    for i, p in enumerate(pivots_aug):
        particular[p] = raug[i][ncols]
    return (tuple(particular), kernel_basis(m)), rk


def solve_unique(m: Matrix, b: Sequence[Fraction]) -> Vector:
    sol, _ = solve_and_rank(m, b)
    if sol is None:
        raise ValueError("inconsistent linear system")
    particular, basis = sol
    if basis:
        raise ValueError("underdetermined linear system")
    return particular


def feasible_point(m: Matrix, b: Sequence[Fraction]) -> Vector | None:
    """Exact phase-1 simplex: some x >= 0 with m x = b, or None.

    Bland's rule on both the entering and leaving choices, so termination is
    guaranteed.  Used for extreme-point tests and fiber nonemptiness.
    """
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    if nrows == 0:
        return zero_vector(ncols)
    width = ncols + nrows + 1
    rows: list[list[Fraction]] = []
    for i in range(nrows):
        r = [frac(x) for x in m[i]] + [Fraction(0)] * nrows + [frac(b[i])]
        if r[-1] < 0:
            r = [-x for x in r]
        r[ncols + i] = Fraction(1)
        rows.append(r)
    basis = [ncols + i for i in range(nrows)]
    # reduced-cost row for "minimise the sum of artificials"
    w = [sum(rows[i][j] for i in range(nrows)) for j in range(width)]
    for i in range(nrows):
        w[ncols + i] = Fraction(0)
    while True:
        enter = next((j for j in range(ncols + nrows) if w[j] > 0), None)
        if enter is None:
            break
        leave = None
        best: Fraction | None = None
        for i in range(nrows):
            if rows[i][enter] > 0:
                ratio = rows[i][-1] / rows[i][enter]
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]  # type: ignore[index]
                ):
                    best = ratio
                    leave = i
        if leave is None:
            # phase-1 objective is bounded below by 0, so this cannot happen
            raise RuntimeError("unbounded phase-1 objective")
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        for i in range(nrows):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[leave])]
        if w[enter] != 0:
            f = w[enter]
            w = [x - f * y for x, y in zip(w, rows[leave])]
        basis[leave] = enter
    if w[-1] != 0:
        return None
    point = [Fraction(0)] * ncols
    for i, bi in enumerate(basis):
        if bi < ncols:
            point[bi] = rows[i][-1]
    return tuple(point)


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + translation, all entries exact rationals."""

    matrix: Matrix
    translation: Vector

    def __post_init__(self) -> None:
        if any(len(row) != self.domain_dim for row in self.matrix):
            raise ValueError("ragged affine map matrix")
        if len(self.matrix) != len(self.translation):
            raise ValueError("affine map matrix/translation shape mismatch")

    @classmethod
    def make(
        cls,
        rows: Iterable[Iterable[Rationalish]],
        translation: Iterable[Rationalish],
    ) -> "AffineMap":
        return cls(matrix(rows), vector(translation))

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(identity_matrix(n), zero_vector(n))

    @classmethod
    def constant(cls, domain_dim: int, value: Iterable[Rationalish]) -> "AffineMap":
        v = vector(value)
        return cls(tuple((Fraction(0),) * domain_dim for _ in v), v)

    @property
    def domain_dim(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    @property
    def codomain_dim(self) -> int:
        return len(self.translation)

    def __call__(self, point: Sequence[Rationalish]) -> Vector:
        v = vector(point)
        if len(v) != self.domain_dim and self.matrix:
            raise ValueError("point dimension mismatch")
        return vadd(mat_vec(self.matrix, v), self.translation)

    def linear_image(self, direction: Sequence[Fraction]) -> Vector:
        return mat_vec(self.matrix, tuple(direction))

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner."""
        if inner.codomain_dim != self.domain_dim:
            raise ValueError("affine map composition dimension mismatch")
        return AffineMap(
            mat_mul(self.matrix, inner.matrix),
            vadd(mat_vec(self.matrix, inner.translation), self.translation),
        )

    def translate(self, offset: Sequence[Rationalish]) -> "AffineMap":
        return AffineMap(self.matrix, vadd(self.translation, vector(offset)))

    def inverse(self) -> "AffineMap":
        n = self.domain_dim
        if self.codomain_dim != n:
            raise ValueError("only square affine maps can be inverted")
        cols = [solve_unique(self.matrix, basis_vector(n, j)) for j in range(n)]
        inv = from_columns(cols)
        return AffineMap(inv, vneg(mat_vec(inv, self.translation)))

    def stack(self, other: "AffineMap") -> "AffineMap":
        """Same domain, concatenated outputs."""
        if other.domain_dim != self.domain_dim:
            raise ValueError("affine map stack domain mismatch")
        return AffineMap(self.matrix + other.matrix, self.translation + other.translation)


def affine_add(a: AffineMap, b: AffineMap) -> AffineMap:
    """Pointwise sum of two maps with matching shapes."""
    if a.domain_dim != b.domain_dim or a.codomain_dim != b.codomain_dim:
        raise ValueError("affine map sum shape mismatch")
    return AffineMap(
        tuple(vadd(ra, rb) for ra, rb in zip(a.matrix, b.matrix)),
        vadd(a.translation, b.translation),
    )


def affine_scale(c: Rationalish, a: AffineMap) -> AffineMap:
    f = frac(c)
    return AffineMap(
        tuple(vscale(f, row) for row in a.matrix), vscale(f, a.translation)
    )


def block_map(maps: Sequence[AffineMap]) -> AffineMap:
    """Product map: acts as maps[i] on the i-th coordinate block."""
    total_in = sum(m.domain_dim for m in maps)
    rows: list[Vector] = []
    trans: list[Fraction] = []
    offset = 0
    for m in maps:
        left = offset
        right = total_in - offset - m.domain_dim
        for row, t in zip(m.matrix, m.translation):
            rows.append(zero_vector(left) + row + zero_vector(right))
            trans.append(t)
        offset += m.domain_dim
    return AffineMap(tuple(rows), tuple(trans))


def precompose_block(m: AffineMap, offset: int, total_dim: int) -> AffineMap:
    """View ``m`` as a map on a ``total_dim``-dimensional product domain.

    The map reads only the coordinates [offset, offset + m.domain_dim).
    """
    rows = tuple(
        zero_vector(offset) + row + zero_vector(total_dim - offset - m.domain_dim)
        for row in m.matrix
    )
    return AffineMap(rows, m.translation)


@dataclass(frozen=True)
class GaussianRational:
    """a + b*i with exact rational a, b; supports field arithmetic."""

    re: Fraction
    im: Fraction = Fraction(0)

    @classmethod
    def make(cls, re: Rationalish, im: Rationalish = 0) -> "GaussianRational":
        return cls(frac(re), frac(im))

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @classmethod
    def zero(cls) -> "GaussianRational":
        return cls(Fraction(0), Fraction(0))

    @classmethod
    def one(cls) -> "GaussianRational":
        return cls(Fraction(1), Fraction(0))
