"""Chain complexes of oriented polytope cells with affine maps into a target.

A chain is a finite integer combination of cells (polytope domain, affine
map).  Two normalizations are applied eagerly so that chain equality is plain
storage equality:

* reversing a domain's orientation negates the coefficient, so stored domains
  always carry orientation +1;
* cell maps are replaced by a canonical representative of their restriction
  to the domain (composition with the span retraction), and for flat-torus
  targets the value at the base vertex is reduced into [0,1)^m.

The grading is dim(domain) − shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionMismatchError, InvalidChainError
from .linalg import AffineMap, Vector, vadd, vector, vsub, mat_vec
from .polytope import Polytope


@dataclass(frozen=True)
class TargetSpace:
    kind: str  # "euclidean" | "flat_torus"
    dim: int

    def __post_init__(self) -> None:
        if self.kind not in ("euclidean", "flat_torus"):
            raise ValueError(f"unknown target space kind {self.kind!r}")
        if self.dim < 0:
            raise ValueError("target dimension must be nonnegative")

    @classmethod
    def euclidean(cls, dim: int) -> "TargetSpace":
        return cls("euclidean", dim)

    @classmethod
    def flat_torus(cls, dim: int) -> "TargetSpace":
        return cls("flat_torus", dim)

    @property
    def is_torus(self) -> bool:
        return self.kind == "flat_torus"

    def reduce_point(self, p: Sequence[Fraction]) -> Vector:
        if not self.is_torus:
            return tuple(p)
        return tuple(x - (x.numerator // x.denominator) for x in p)


@dataclass(frozen=True)
class Cell:
    """One oriented cell: polytope domain, affine map, integer coefficient."""

    domain: Polytope
    map: AffineMap
    coefficient: int = 1

    def __post_init__(self) -> None:
        if self.map.domain_dim != self.domain.ambient_dim:
            raise DimensionMismatchError(
                "cell map domain does not match polytope ambient dimension"
            )

    @property
    def dim(self) -> int:
        return self.domain.dim

    def canonical(self, target: TargetSpace) -> "Cell":
        if self.map.codomain_dim != target.dim:
            raise DimensionMismatchError("cell map does not land in the target space")
        domain = self.domain
        coeff = self.coefficient
        if domain.orientation < 0:
            domain = domain.with_orientation(1)
            coeff = -coeff
        restricted = self.map.compose(domain.span_projection)
        if target.is_torus:
            v0 = domain.base_vertex
            value = restricted(v0)
            reduced = target.reduce_point(value)
            correction = vsub(reduced, value)
            restricted = restricted.translate(correction)
        return Cell(domain, restricted, coeff)


@dataclass(frozen=True)
class Chain:
    """Formal integer combination of cells into a common target space."""

    target: TargetSpace
    cells: tuple[Cell, ...] = ()
    shift: int = 0

    @classmethod
    def build(
        cls,
        target: TargetSpace,
        cells: Iterable[Cell] = (),
        shift: int = 0,
    ) -> "Chain":
        acc: dict[tuple, tuple[Polytope, AffineMap, int]] = {}
        for cell in cells:
            c = cell.canonical(target)
            key = (c.domain.vertices, c.map)
            if key in acc:
                dom, m, coeff = acc[key]
                acc[key] = (dom, m, coeff + c.coefficient)
            else:
                acc[key] = (c.domain, c.map, c.coefficient)
        kept = tuple(
            Cell(dom, m, coeff)
            for (dom, m, coeff) in (acc[k] for k in sorted(acc, key=_cell_sort_key))
            if coeff != 0
        )
        return cls(target, kept, shift)

    @classmethod
    def zero(cls, target: TargetSpace, shift: int = 0) -> "Chain":
        return cls(target, (), shift)

    @classmethod
    def of_cell(
        cls,
        domain: Polytope,
        map_: AffineMap,
        target: TargetSpace,
        coefficient: int = 1,
        shift: int = 0,
    ) -> "Chain":
        return cls.build(target, [Cell(domain, map_, coefficient)], shift)

    def is_zero(self) -> bool:
        return not self.cells

    def degrees(self) -> set[int]:
        return {c.dim - self.shift for c in self.cells}

    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) != 1:
            raise InvalidChainError(
                "chain is not homogeneous" if ds else "zero chain has no degree"
            )
        return ds.pop()

    def __add__(self, other: "Chain") -> "Chain":
        if self.target != other.target or self.shift != other.shift:
            raise DimensionMismatchError("cannot add chains of different target or shift")
        return Chain.build(self.target, self.cells + other.cells, self.shift)

    def __neg__(self) -> "Chain":
        return self.scale(-1)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def scale(self, n: int) -> "Chain":
        if n == 0:
            return Chain.zero(self.target, self.shift)
        return Chain(
            self.target,
            tuple(Cell(c.domain, c.map, n * c.coefficient) for c in self.cells),
            self.shift,
        )


def _cell_sort_key(key: tuple) -> tuple:
    vertices, m = key
    return (len(vertices[0]) if vertices else 0, vertices, m.matrix, m.translation)


def boundary(x: Chain) -> Chain:
    """Sum of map restrictions to facets with induced orientations."""
    pieces: list[Cell] = []
    for cell in x.cells:
        for facet, sign in cell.domain.facet_pairs:
            pieces.append(Cell(facet, cell.map, sign * cell.coefficient))
    return Chain.build(x.target, pieces, x.shift)


def shift_degree(x: Chain, n: int) -> Chain:
    return Chain(x.target, x.cells, x.shift + n)


def is_cycle(x: Chain) -> bool:
    return boundary(x).is_zero()


def apply_domain_iso(x: Chain, iso: AffineMap) -> Chain:
    """Pushforward along an invertible affine change of domain coordinates.

    Domains are carried with their orientations; maps are precomposed with
    the inverse, so the chain represents the same family of maps.
    """
    inv = iso.inverse()
    cells = [
        Cell(c.domain.apply_affine_iso(iso), c.map.compose(inv), c.coefficient)
        for c in x.cells
    ]
    return Chain.build(x.target, cells, x.shift)
