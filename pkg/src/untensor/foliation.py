"""Foliation structure of the rank-one cone.

For a nonzero simple vector v the cone S contains exactly two maximal
linear subspaces through v (its "sheets"), one per foliation; sheets of
the same foliation are disjoint, sheets of different foliations meet in a
ray.  None of that structure is visible in the raw coordinates, but it can
be dug out of S alone:

* `tangent_space(v)` linearizes the quadrics at v; it has dimension
  m + n - 1 and equals the span of the two sheets through v.
* `cross_rays(v, s)` intersects the tangent spaces of two generic simple
  vectors.  The intersection is a plane whose trace on S is exactly two
  rational rays, one in each sheet through v.
* `sheets_through(v)` harvests cross rays from random samples and clusters
  them into the two sheets, certifying the result with `subspace_in_S`.
* `transport` carries vectors between two sheets of one foliation along
  the ray correspondence, normalized by a chosen pair of reference
  vectors; it is realized by square completion.

Degenerate samples are always detected exactly (this is the payoff of
rational arithmetic) and answered by resampling, never by tolerance
tuning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Sequence

from untensor.errors import (
    Degenerate,
    MalformedSheets,
    NotSimpleVector,
    PreconditionViolated,
    RetryExhausted,
    TrivialShape,
    ZeroVector,
)
from untensor.linalg import (
    Subspace,
    Vector,
    fraction_sqrt_exact,
    is_zero_vector,
    kernel,
    proportionality_ratio,
    ray_generator,
    vadd,
    vscale,
)
from untensor.tensor_space import TensorSpace


@dataclass(frozen=True)
class Ray:
    """A one-dimensional subspace, named by its canonical generator."""

    subspace: Subspace

    @property
    def generator(self) -> Vector:
        return ray_generator(self.subspace)

    @classmethod
    def through(cls, v: Sequence, ambient_dim: int) -> "Ray":
        sub = Subspace([v], ambient_dim)
        if sub.dim != 1:
            raise ZeroVector("a ray needs a nonzero vector")
        return cls(sub)


@dataclass(frozen=True)
class Sheet:
    """A maximal linear subspace of S, plus its certification flag."""

    subspace: Subspace
    certified: bool = True
    label: int | None = None

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def contains(self, v: Sequence) -> bool:
        return self.subspace.contains(v)


@dataclass(frozen=True)
class SheetPair:
    """The two sheets through one simple vector, canonically ordered."""

    first: Sheet
    second: Sheet
    through: Vector

    @property
    def dims(self) -> tuple[int, int]:
        return (self.first.dim, self.second.dim)

    def subspaces(self) -> tuple[Subspace, Subspace]:
        return (self.first.subspace, self.second.subspace)


def subspace_in_S(inst: TensorSpace, sub: Subspace) -> bool:
    """Complete test that a subspace lies inside S.

    A quadric vanishes identically on a subspace iff it vanishes on every
    basis vector and every polarized basis pair, so the check is exact.
    """
    if sub.ambient_dim != inst.dim:
        raise PreconditionViolated("ambient dimensions differ")
    basis = sub.basis.rows
    for i, b in enumerate(basis):
        if any(x != 0 for x in inst.minor_values(b)):
            return False
        for a in basis[:i]:
            if any(x != 0 for x in inst.polar2_values(a, b)):
                return False
    return True


def tangent_space(inst: TensorSpace, v: Sequence, cache: dict | None = None) -> Subspace:
    """Kernel of the quadric linearizations w -> B_k(v, w) at a simple v.

    Contains both sheets through v; dimension m + n - 1 (for a trivial
    shape the quadric list is empty and the tangent space is all of V,
    which agrees with the formula).
    """
    key = tuple(v)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    if is_zero_vector(key):
        raise ZeroVector("tangent space needs a nonzero vector")
    if not inst.is_simple(key):
        raise NotSimpleVector("tangent space is defined at simple vectors only")
    out = kernel(inst.polar2_rows(key))
    if cache is not None:
        cache[key] = out
    return out


def same_sheet(inst: TensorSpace, x: Sequence, y: Sequence) -> bool:
    """Generically correct test that two simple vectors share a sheet.

    Two simple vectors sharing a sheet always have a simple sum; the
    converse fails only on a measure-zero set, which downstream users
    guard against with full subspace certification.
    """
    return inst.is_simple(vadd(tuple(x), tuple(y)))


def _binary_form_roots(a, b2, c) -> tuple[tuple, tuple] | None:
    """Distinct projective rational roots of A x^2 + B2 xy + C y^2.

    Returns a pair of (x, y) tuples or None when the roots are absent,
    coincident, or irrational.
    """
    if a == 0:
        if b2 == 0:
            return None
        return ((1, 0), (-c, b2))
    disc = b2 * b2 - 4 * a * c
    if disc <= 0:
        return None
    root = fraction_sqrt_exact(Fraction(disc))
    if root is None:
        return None
    return (((-b2 + root) / (2 * a), 1), ((-b2 - root) / (2 * a), 1))


def cross_rays(inst: TensorSpace, v: Sequence, s: Sequence, cache: dict | None = None) -> tuple[Ray, Ray]:
    """The two rays where the tangent planes of v and s pierce S.

    For generic simple v and s the intersection D of their tangent spaces
    is a plane, every quadric restricted to D is a multiple of one binary
    quadratic, and that quadratic splits into two distinct rational rays.
    Any other outcome raises Degenerate and the caller resamples.
    """
    v = tuple(v)
    s = tuple(s)
    plane = tangent_space(inst, v, cache).intersect(tangent_space(inst, s, cache))
    if plane.dim != 2:
        raise Degenerate(f"tangent intersection has dimension {plane.dim}, need 2")
    d1, d2 = plane.basis.rows
    forms = [f for f in inst.binary_restriction(d1, d2) if any(x != 0 for x in f)]
    if not forms:
        raise Degenerate("every quadric vanishes on the intersection plane")
    a0, b0, c0 = forms[0]
    for a1, b1, c1 in forms[1:]:
        if a0 * b1 != a1 * b0 or a0 * c1 != a1 * c0 or b0 * c1 != b1 * c0:
            raise Degenerate("restricted quadrics are not proportional")
    roots = _binary_form_roots(a0, b0, c0)
    if roots is None:
        raise Degenerate("restricted quadric does not split over the rationals")
    rays = []
    for x, y in roots:
        g = vadd(vscale(x, d1), vscale(y, d2))
        rays.append(Ray.through(g, inst.dim))
    rays.sort(key=lambda r: r.generator)
    return (rays[0], rays[1])


def sheets_through(
    inst: TensorSpace,
    v: Sequence,
    rng: Random,
    *,
    max_samples: int | None = None,
    cache: dict | None = None,
) -> SheetPair:
    """Both maximal linear subspaces of S through the simple vector v.

    Random samples feed `cross_rays`; each successful sample donates one
    new ray to each sheet.  Rays are clustered by `same_sheet` votes
    against the rays accepted so far, and a (dim1 * dim2 == dim V) stop
    rule plus full `subspace_in_S` certification make acceptance sound:
    a clustering corrupted by a measure-zero coincidence cannot certify,
    and triggers a restart instead.
    """
    v = tuple(v)
    if inst.shape.trivial:
        raise TrivialShape("foliation discovery needs both factors of dimension >= 2")
    if is_zero_vector(v):
        raise ZeroVector("sheets are anchored at a nonzero vector")
    if not inst.is_simple(v):
        raise NotSimpleVector("sheets exist through simple vectors only")
    if cache is None:
        cache = {}
    budget = max_samples if max_samples is not None else 64 * (inst.shape.m + inst.shape.n)
    tangent_dim = tangent_space(inst, v, cache).dim

    gens: tuple[list[Vector], list[Vector]] = ([], [])
    spans: list[Subspace | None] = [None, None]

    def reset() -> None:
        gens[0].clear()
        gens[1].clear()
        spans[0] = spans[1] = None

    def span_of(side: int) -> Subspace:
        if spans[side] is None:
            spans[side] = Subspace([v, *gens[side]], inst.dim)
        return spans[side]

    def try_accept(g: Vector) -> None:
        if span_of(0).contains(g) or span_of(1).contains(g):
            return
        in_first = all(same_sheet(inst, g, u) for u in gens[0])
        in_second = all(same_sheet(inst, g, u) for u in gens[1])
        if in_first == in_second:
            return  # ambiguous vote; leave it to a later sample
        side = 0 if in_first else 1
        gens[side].append(g)
        spans[side] = None

    for _ in range(budget):
        sample = inst.sample_simple(rng)
        try:
            r1, r2 = cross_rays(inst, v, sample, cache)
        except Degenerate:
            continue
        g1, g2 = r1.generator, r2.generator
        if not gens[0] and not gens[1]:
            if same_sheet(inst, g1, g2):
                continue  # the seeding pair must straddle the two sheets
            ratio1 = proportionality_ratio(v, g1)
            ratio2 = proportionality_ratio(v, g2)
            if ratio1 is not None or ratio2 is not None:
                continue
            gens[0].append(g1)
            gens[1].append(g2)
            spans[0] = spans[1] = None
        else:
            try_accept(g1)
            try_accept(g2)
        d1, d2 = span_of(0).dim, span_of(1).dim
        if d1 * d2 == inst.dim and d1 + d2 == tangent_dim + 1:
            first, second = span_of(0), span_of(1)
            if (
                subspace_in_S(inst, first)
                and subspace_in_S(inst, second)
                and first.intersect(second).dim == 1
            ):
                ordered = sorted((first, second), key=lambda s: (-s.dim, s.basis.rows))
                return SheetPair(
                    first=Sheet(ordered[0], certified=True, label=0),
                    second=Sheet(ordered[1], certified=True, label=1),
                    through=v,
                )
            reset()
    raise RetryExhausted(f"no certified sheet pair within {budget} samples")


def same_foliation(inst: TensorSpace, m: Sheet, n: Sheet) -> bool:
    """Sheets of one foliation are equal or disjoint; across foliations they
    meet in a ray.  Any larger intersection means the inputs are not sheets."""
    if m.subspace == n.subspace:
        return True
    overlap = m.subspace.intersect(n.subspace).dim
    if overlap == 0:
        return True
    if overlap == 1:
        return False
    raise MalformedSheets(f"sheets overlap in dimension {overlap}")


def transport(
    inst: TensorSpace,
    m: Sheet,
    m_prime: Sheet,
    v0: Sequence,
    v0_prime: Sequence,
    v: Sequence,
    cache: dict | None = None,
) -> Vector:
    """Carry v from sheet m to sheet m_prime along the ray correspondence.

    The correspondence maps each ray of m to the ray of m_prime met by the
    common transversal sheet; the linear lift is pinned by sending v0 to
    v0_prime.  Requires m and m_prime in one foliation, v0, v in m,
    v0_prime in m_prime, and v0_prime in the cross sheet of v0.
    """
    v0 = tuple(v0)
    v0_prime = tuple(v0_prime)
    v = tuple(v)
    if is_zero_vector(v0) or is_zero_vector(v0_prime):
        raise PreconditionViolated("reference vectors must be nonzero")
    if not same_foliation(inst, m, m_prime):
        raise PreconditionViolated("target sheet is not in the source sheet's foliation")
    if not (m.contains(v0) and m.contains(v)):
        raise PreconditionViolated("v0 and v must lie in the source sheet")
    if not m_prime.contains(v0_prime):
        raise PreconditionViolated("v0' must lie in the target sheet")
    if not same_sheet(inst, v0, v0_prime):
        raise PreconditionViolated("v0' must lie in the cross sheet of v0")
    if is_zero_vector(v):
        return v
    from untensor.squares import complete_square

    return complete_square(inst, v0, v0_prime, v, cache=cache)
