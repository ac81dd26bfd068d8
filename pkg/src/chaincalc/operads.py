"""Little-disc configurations, framed variants, circle arcs, and their
composition laws, plus polytope-parametrized configuration chains.

A little disc is the affine contraction x -> r x + a of the closed unit
d-ball; configurations keep the closures of distinct discs disjoint (strict
inequality on squared distances, so every predicate is decidable over the
rationals).  The unit disc r = 1 is admitted — containment then forces the
center to the origin — because the composition unit laws need it.

Circle configurations live on the circumference-2 circle obtained from
[-1, 1] by identifying the endpoints; arc offsets are canonicalized into
[-1, 1).  Frames are exact rotations: trivial in dimension one, rational
points on the unit circle under complex multiplication in dimension two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Iterable, Sequence

from .errors import (
    ArityMismatchError,
    DimensionMismatchError,
    InvalidChainError,
    InvalidConfigurationError,
    UnsupportedDimensionError,
)
from .linalg import (
    AffineMap,
    Rationalish,
    Vector,
    affine_add,
    affine_scale,
    dot,
    frac,
    precompose_block,
    vector,
    vsub,
)
from .polytope import Polytope


def _norm2(v: Sequence[Fraction]) -> Fraction:
    return dot(v, v)


@dataclass(frozen=True)
class Disc:
    """The map x -> radius * x + center on the closed unit ball."""

    center: Vector
    radius: Fraction

    def __post_init__(self) -> None:
        if not (0 < self.radius <= 1):
            raise InvalidConfigurationError(
                "disc radius must lie in (0, 1]", payload={"radius": str(self.radius)}
            )

    @classmethod
    def make(cls, center: Iterable[Rationalish], radius: Rationalish) -> "Disc":
        return cls(vector(center), frac(radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    def as_map(self) -> AffineMap:
        d = self.dim
        rows = tuple(
            tuple(self.radius if i == j else Fraction(0) for j in range(d))
            for i in range(d)
        )
        return AffineMap(rows, self.center)

    def compose(self, inner: "Disc") -> "Disc":
        """The disc of as_map() . inner.as_map()."""
        if inner.dim != self.dim:
            raise DimensionMismatchError("disc composition dimension mismatch")
        center = tuple(a + self.radius * b for a, b in zip(self.center, inner.center))
        return Disc(center, self.radius * inner.radius)


def unit_disc(d: int) -> Disc:
    return Disc.make([0] * d, 1)


@dataclass(frozen=True)
class DiscConfiguration:
    """Ordered little discs with disjoint closures inside the unit ball."""

    d: int
    discs: tuple[Disc, ...]

    def __post_init__(self) -> None:
        for i, disc in enumerate(self.discs):
            if disc.dim != self.d:
                raise DimensionMismatchError(
                    "disc dimension disagrees with the configuration"
                )
            if _norm2(disc.center) > (1 - disc.radius) ** 2:
                raise InvalidConfigurationError(
                    "disc escapes the unit ball",
                    payload={"constraint": "containment", "disc": i},
                )
        for i in range(len(self.discs)):
            for j in range(i + 1, len(self.discs)):
                a, b = self.discs[i], self.discs[j]
                if _norm2(vsub(a.center, b.center)) <= (a.radius + b.radius) ** 2:
                    raise InvalidConfigurationError(
                        "disc closures intersect",
                        payload={"constraint": "disjointness", "discs": [i, j]},
                    )

    @classmethod
    def make(
        cls, d: int, discs: Iterable[tuple[Iterable[Rationalish], Rationalish]]
    ) -> "DiscConfiguration":
        return cls(d, tuple(Disc.make(c, r) for c, r in discs))

    @property
    def arity(self) -> int:
        return len(self.discs)


def identity_configuration(d: int) -> DiscConfiguration:
    return DiscConfiguration(d, (unit_disc(d),))


def gamma(
    outer: DiscConfiguration, inners: Sequence[DiscConfiguration]
) -> DiscConfiguration:
    """Operad composition: substitute inner configuration i into disc i."""
    if len(inners) != outer.arity:
        raise ArityMismatchError(
            "gamma needs one inner configuration per outer disc",
            payload={"expected": outer.arity, "got": len(inners)},
        )
    if any(inner.d != outer.d for inner in inners):
        raise DimensionMismatchError("gamma requires equal disc dimensions")
    discs: list[Disc] = []
    for slot, inner in zip(outer.discs, inners):
        discs.extend(slot.compose(b) for b in inner.discs)
    return DiscConfiguration(outer.d, tuple(discs))


def symmetric_action(perm: Sequence[int], c: DiscConfiguration) -> DiscConfiguration:
    """Right action: disc i of the result is disc perm[i] of the input."""
    if sorted(perm) != list(range(c.arity)):
        raise ArityMismatchError("not a permutation of the disc indices")
    return DiscConfiguration(c.d, tuple(c.discs[p] for p in perm))


# --- frames ----------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    """Exact rotation: trivial for d = 1, a rational circle point for d = 2."""

    d: int
    cos: Fraction = Fraction(1)
    sin: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.d == 1:
            if (self.cos, self.sin) != (1, 0):
                raise InvalidConfigurationError("dimension-one frames are trivial")
        elif self.d == 2:
            if self.cos**2 + self.sin**2 != 1:
                raise InvalidConfigurationError(
                    "frame must be an exact unit circle point",
                    payload={"cos": str(self.cos), "sin": str(self.sin)},
                )
        else:
            raise UnsupportedDimensionError(
                "frames exist only in dimensions one and two", payload={"d": self.d}
            )

    @classmethod
    def make(cls, d: int, cos: Rationalish = 1, sin: Rationalish = 0) -> "Frame":
        return cls(d, frac(cos), frac(sin))

    @classmethod
    def identity(cls, d: int) -> "Frame":
        return cls.make(d)

    def compose(self, other: "Frame") -> "Frame":
        if other.d != self.d:
            raise DimensionMismatchError("frame composition dimension mismatch")
        return Frame(
            self.d,
            self.cos * other.cos - self.sin * other.sin,
            self.cos * other.sin + self.sin * other.cos,
        )

    def inverse(self) -> "Frame":
        return Frame(self.d, self.cos, -self.sin)

    def rotate(self, point: Sequence[Fraction]) -> Vector:
        if self.d == 1:
            return tuple(point)
        x, y = point
        return (self.cos * x - self.sin * y, self.sin * x + self.cos * y)

    def as_map(self) -> AffineMap:
        if self.d == 1:
            return AffineMap.identity(1)
        return AffineMap.make(
            [[self.cos, -self.sin], [self.sin, self.cos]], [0, 0]
        )


@dataclass(frozen=True)
class FramedConfiguration:
    base: DiscConfiguration
    frames: tuple[Frame, ...]

    def __post_init__(self) -> None:
        if len(self.frames) != self.base.arity:
            raise ArityMismatchError("one frame per disc required")
        if any(f.d != self.base.d for f in self.frames):
            raise DimensionMismatchError("frame dimension disagrees with discs")

    @property
    def arity(self) -> int:
        return self.base.arity


def rotate_configuration(c: DiscConfiguration, g: Frame) -> DiscConfiguration:
    """Rotate all centers; radii are untouched, so validity is preserved."""
    if g.d != c.d:
        raise DimensionMismatchError("rotation dimension mismatch")
    return DiscConfiguration(
        c.d, tuple(Disc(g.rotate(b.center), b.radius) for b in c.discs)
    )


def framed_gamma(
    outer: FramedConfiguration, inners: Sequence[FramedConfiguration]
) -> FramedConfiguration:
    """Substitute with each inner rotated by its slot frame; frames multiply."""
    if len(inners) != outer.arity:
        raise ArityMismatchError(
            "framed_gamma needs one inner configuration per outer disc",
            payload={"expected": outer.arity, "got": len(inners)},
        )
    rotated = [
        rotate_configuration(inner.base, g)
        for g, inner in zip(outer.frames, inners)
    ]
    base = gamma(outer.base, rotated)
    frames: list[Frame] = []
    for g, inner in zip(outer.frames, inners):
        frames.extend(g.compose(h) for h in inner.frames)
    return FramedConfiguration(base, tuple(frames))


# --- circle configurations --------------------------------------------------


def circle_offset(a: Rationalish) -> Fraction:
    """Canonical representative in [-1, 1) on the circumference-2 circle."""
    x = frac(a)
    return ((x + 1) % 2) - 1


def _circle_distance(a: Fraction, b: Fraction) -> Fraction:
    delta = (a - b) % 2
    return min(delta, 2 - delta)


@dataclass(frozen=True)
class CircleConfiguration:
    """Disjoint little arcs t -> r t + a on [-1, 1] with endpoints glued."""

    arcs: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        for i, (offset, radius) in enumerate(self.arcs):
            if not (0 < radius <= 1):
                raise InvalidConfigurationError(
                    "arc radius must lie in (0, 1]", payload={"arc": i}
                )
            if not (-1 <= offset < 1):
                raise InvalidConfigurationError(
                    "arc offset must be canonical in [-1, 1)", payload={"arc": i}
                )
        for i in range(len(self.arcs)):
            for j in range(i + 1, len(self.arcs)):
                (a, ra), (b, rb) = self.arcs[i], self.arcs[j]
                if _circle_distance(a, b) <= ra + rb:
                    raise InvalidConfigurationError(
                        "arc closures intersect",
                        payload={"constraint": "disjointness", "arcs": [i, j]},
                    )

    @classmethod
    def make(
        cls, arcs: Iterable[tuple[Rationalish, Rationalish]]
    ) -> "CircleConfiguration":
        return cls(tuple((circle_offset(a), frac(r)) for a, r in arcs))

    @property
    def arity(self) -> int:
        return len(self.arcs)


def circle_module_action(
    m: CircleConfiguration, inners: Sequence[DiscConfiguration]
) -> CircleConfiguration:
    """Substitute interval configurations into arcs, modulo the circle."""
    if len(inners) != m.arity:
        raise ArityMismatchError(
            "one interval configuration per arc required",
            payload={"expected": m.arity, "got": len(inners)},
        )
    if any(inner.d != 1 for inner in inners):
        raise DimensionMismatchError("circle arcs take dimension-one configurations")
    arcs: list[tuple[Fraction, Fraction]] = []
    for (a, r), inner in zip(m.arcs, inners):
        for b in inner.discs:
            arcs.append((circle_offset(a + r * b.center[0]), r * b.radius))
    return CircleConfiguration(tuple(arcs))


# --- polytope-parametrized configuration chains ------------------------------


@dataclass(frozen=True)
class ConfigurationChain:
    """A family of configurations: affine center/radius maps over a polytope.

    Frames, when present, are constant over the domain; exact affine families
    of unit circle points do not exist, so this is not a restriction at desk
    scale.  Validity is certified at every vertex and at the certificate
    points; disjointness between sample points is a semidecision.
    """

    domain: Polytope
    d: int
    center_maps: tuple[AffineMap, ...]
    radius_maps: tuple[AffineMap, ...]
    frames: tuple[Frame, ...] | None = None
    certificate: tuple[Vector, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.center_maps)
        if len(self.radius_maps) != n:
            raise ArityMismatchError("one radius map per center map required")
        if self.frames is not None and len(self.frames) != n:
            raise ArityMismatchError("one frame per disc required")
        amb = self.domain.ambient_dim
        for cm, rm in zip(self.center_maps, self.radius_maps):
            if cm.domain_dim != amb or rm.domain_dim != amb:
                raise DimensionMismatchError("coordinate map does not read the domain")
            if cm.codomain_dim != self.d or rm.codomain_dim != 1:
                raise DimensionMismatchError("coordinate map has the wrong target")
        for p in self.certificate:
            if not self.domain.contains(p):
                raise InvalidChainError(
                    "certificate point outside the domain",
                    payload={"point": list(map(str, p))},
                )
        for p in self.domain.vertices + self.certificate:
            self.configuration_at(p)  # raises when invalid

    @property
    def arity(self) -> int:
        return len(self.center_maps)

    def configuration_at(self, point: Sequence[Fraction]):
        base = DiscConfiguration(
            self.d,
            tuple(
                Disc(cm(point), rm(point)[0])
                for cm, rm in zip(self.center_maps, self.radius_maps)
            ),
        )
        if self.frames is None:
            return base
        return FramedConfiguration(base, self.frames)

    @classmethod
    def constant(
        cls, domain: Polytope, c: DiscConfiguration | FramedConfiguration
    ) -> "ConfigurationChain":
        base = c.base if isinstance(c, FramedConfiguration) else c
        frames = c.frames if isinstance(c, FramedConfiguration) else None
        amb = domain.ambient_dim
        return cls(
            domain,
            base.d,
            tuple(AffineMap.constant(amb, b.center) for b in base.discs),
            tuple(AffineMap.constant(amb, (b.radius,)) for b in base.discs),
            frames,
        )


def _is_constant(m: AffineMap) -> bool:
    return all(all(x == 0 for x in row) for row in m.matrix)


def _times_vector(scalar_map: AffineMap, vec: Sequence[Fraction]) -> AffineMap:
    """The map p -> scalar_map(p) * vec."""
    row = scalar_map.matrix[0]
    t = scalar_map.translation[0]
    return AffineMap(
        tuple(tuple(v * x for x in row) for v in vec),
        tuple(v * t for v in vec),
    )


def _bilinear(
    scalar: AffineMap, vec_map: AffineMap, off_s: int, off_v: int, total: int
) -> AffineMap:
    """Affine realization of p, q -> scalar(p) * vec_map(q), when one factor
    is constant; the genuinely bilinear case has no affine model."""
    if _is_constant(scalar):
        lifted = precompose_block(vec_map, off_v, total)
        return affine_scale(scalar.translation[0], lifted)
    if _is_constant(vec_map):
        lifted = precompose_block(scalar, off_s, total)
        return _times_vector(lifted, vec_map.translation)
    raise InvalidChainError(
        "substitution would need a non-affine coordinate "
        "(both the slot radius and the inner coordinates vary)"
    )


def chain_gamma(
    outer: ConfigurationChain, inners: Sequence[ConfigurationChain]
) -> ConfigurationChain:
    """Operadic substitution of configuration chains over product domains."""
    if len(inners) != outer.arity:
        raise ArityMismatchError(
            "one inner chain per outer disc required",
            payload={"expected": outer.arity, "got": len(inners)},
        )
    if any(inner.d != outer.d for inner in inners):
        raise DimensionMismatchError("chain substitution requires equal dimensions")
    framed = outer.frames is not None
    if framed != all(inner.frames is not None for inner in inners) and inners:
        if any((inner.frames is not None) != framed for inner in inners):
            raise DimensionMismatchError("cannot mix framed and unframed chains")
    domain = outer.domain
    offsets = [0]
    for inner in inners:
        domain = domain.product(inner.domain)
        offsets.append(offsets[-1] + inner.domain.ambient_dim)
    total = domain.ambient_dim
    outer_off = 0
    inner_offs = [outer.domain.ambient_dim + off for off in offsets[:-1]]
    center_maps: list[AffineMap] = []
    radius_maps: list[AffineMap] = []
    frames: list[Frame] = []
    for i, inner in enumerate(inners):
        slot_center = precompose_block(outer.center_maps[i], outer_off, total)
        slot_radius = outer.radius_maps[i]
        g = outer.frames[i] if framed else Frame.identity(outer.d) if outer.d <= 2 else None
        for j in range(inner.arity):
            inner_center = inner.center_maps[j]
            if framed or (outer.d <= 2 and g is not None):
                if g is not None:
                    inner_center = g.as_map().compose(inner_center)
            term = _bilinear(slot_radius, inner_center, outer_off, inner_offs[i], total)
            center_maps.append(affine_add(slot_center, term))
            radius_maps.append(
                _bilinear(slot_radius, inner.radius_maps[j], outer_off, inner_offs[i], total)
            )
            if framed:
                frames.append(g.compose(inner.frames[j]))
    cert = _grid_certificate(outer, inners, total)
    return ConfigurationChain(
        domain,
        outer.d,
        tuple(center_maps),
        tuple(radius_maps),
        tuple(frames) if framed else None,
        cert,
    )


def _grid_certificate(
    outer: ConfigurationChain, inners: Sequence[ConfigurationChain], total: int
) -> tuple[Vector, ...]:
    factors = [outer, *inners]
    if all(not f.certificate for f in factors):
        return ()
    pools = [
        f.certificate if f.certificate else (f.domain.base_vertex,) for f in factors
    ]
    return tuple(sum(combo, ()) for combo in iter_product(*pools))
