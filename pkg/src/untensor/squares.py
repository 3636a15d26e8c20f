"""Simple squares: validation and completion.

A square is a 2x2 array ((a, b), (c, d)) of simple vectors whose rows,
columns, and total sum are simple, with the row pairs sharing sheets in
one foliation and the column pairs in the other.  Three corners pin the
fourth uniquely: the missing corner's ray is the crossing of the sheet
through b (in the foliation of {a, c}) with the sheet through c (in the
foliation of {a, b}), and the scale along that ray is fixed by demanding
the total sum stay on the cone, which is a linear condition because the
quadratic term of every quadric dies on the ray.

Completion dispatches the proportional special cases first, since for
those the total-sum condition is vacuous and the answer is forced by
scaling instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from untensor.errors import Degenerate, InconsistentSquare, PreconditionViolated
from untensor.foliation import cross_rays, same_sheet
from untensor.linalg import Vector, is_zero_vector, proportionality_ratio, vadd, vscale
from untensor.tensor_space import TensorSpace


@dataclass(frozen=True)
class Square:
    """Rows (a, b) and (c, d)."""

    a: Vector
    b: Vector
    c: Vector
    d: Vector

    @classmethod
    def of(cls, a: Sequence, b: Sequence, c: Sequence, d: Sequence) -> "Square":
        return cls(tuple(a), tuple(b), tuple(c), tuple(d))


@dataclass(frozen=True)
class Completion:
    """Result of completing three corners: the vector, plus how it was found."""

    d: Vector
    case: str  # "generic", "column-proportional", "row-proportional", "both-proportional"
    scale: Fraction


def _symmetrize_nonzero_corner(sq: Square) -> Square | None:
    """Rotate the square so corner a is nonzero; the conditions are invariant
    under swapping rows, swapping columns, or both."""
    if not is_zero_vector(sq.a):
        return sq
    if not is_zero_vector(sq.c):
        return Square(sq.c, sq.d, sq.a, sq.b)
    if not is_zero_vector(sq.b):
        return Square(sq.b, sq.a, sq.d, sq.c)
    if not is_zero_vector(sq.d):
        return Square(sq.d, sq.c, sq.b, sq.a)
    return None


def is_square(inst: TensorSpace, sq: Square) -> bool:
    """Validate the square conditions exactly.

    The proportional forms are checked first; in the generic case the
    sheet pattern is checked through sum-simplicity of the four adjacent
    pairs, non-simplicity of both diagonals (which pins the two foliations
    as genuinely distinct), and simplicity of the total sum.
    """
    for corner in (sq.a, sq.b, sq.c, sq.d):
        if len(corner) != inst.dim:
            raise PreconditionViolated("corner has the wrong ambient length")
        if not inst.is_simple(corner):
            return False
    oriented = _symmetrize_nonzero_corner(sq)
    if oriented is None:
        return True  # the all-zero square
    a, b, c, d = oriented.a, oriented.b, oriented.c, oriented.d
    mu = proportionality_ratio(a, b)
    lam = proportionality_ratio(a, c)
    if mu is not None and lam is not None:
        return d == vscale(lam * mu, a)
    if mu is not None:
        return d == vscale(mu, c) and same_sheet(inst, a, c)
    if lam is not None:
        return d == vscale(lam, b) and same_sheet(inst, a, b)
    if is_zero_vector(d):
        return False  # d = 0 in the generic branch forces b or c to vanish
    return (
        same_sheet(inst, a, b)
        and same_sheet(inst, a, c)
        and same_sheet(inst, b, d)
        and same_sheet(inst, c, d)
        and not same_sheet(inst, a, d)
        and not same_sheet(inst, b, c)
        and inst.is_simple(vadd(vadd(a, b), vadd(c, d)))
    )


def complete_square_details(
    inst: TensorSpace, a: Sequence, b: Sequence, c: Sequence, *, cache: dict | None = None
) -> Completion:
    """The unique d making ((a, b), (c, d)) a square, with diagnostics.

    Generic path: `cross_rays(b, c)` yields exactly two rays, one of which
    must be the ray of a; the other carries d.  With u the canonical
    generator of that ray and s = a + b + c, every quadric imposes
    Q_k(s) + t * 2 B_k(s, u) = 0 on d = t u, and the system must have one
    consistent solution.
    """
    a = tuple(a)
    b = tuple(b)
    c = tuple(c)
    for corner in (a, b, c):
        if len(corner) != inst.dim:
            raise PreconditionViolated("corner has the wrong ambient length")
        if is_zero_vector(corner):
            raise PreconditionViolated("corners must be nonzero")
        if not inst.is_simple(corner):
            raise PreconditionViolated("corners must be simple")
    mu = proportionality_ratio(a, b)
    lam = proportionality_ratio(a, c)
    if mu is not None and lam is not None:
        return Completion(vscale(lam * mu, a), "both-proportional", lam * mu)
    if mu is not None:
        if not same_sheet(inst, a, c):
            raise PreconditionViolated("a and c do not share a sheet")
        return Completion(vscale(mu, c), "column-proportional", mu)
    if lam is not None:
        if not same_sheet(inst, a, b):
            raise PreconditionViolated("a and b do not share a sheet")
        return Completion(vscale(lam, b), "row-proportional", lam)
    if not same_sheet(inst, a, b) or not same_sheet(inst, a, c):
        raise PreconditionViolated("a must share a sheet with b and with c")
    if same_sheet(inst, b, c):
        raise PreconditionViolated("b and c lie across the square and must not share a sheet")
    ray1, ray2 = cross_rays(inst, b, c, cache)
    candidates = [
        r.generator
        for r in (ray1, ray2)
        if proportionality_ratio(a, r.generator) is None
    ]
    if len(candidates) != 1:
        raise PreconditionViolated("the corner rays do not brace the square; got %d candidates" % len(candidates))
    u = candidates[0]
    s = vadd(vadd(a, b), c)
    constants = inst.minor_values(s)
    slopes = inst.polar2_values(s, u)
    t: Fraction | None = None
    for q, p in zip(constants, slopes):
        if p == 0:
            if q != 0:
                raise InconsistentSquare("a quadric forbids every scale on the candidate ray")
            continue
        cand = -q / p
        if t is None:
            t = cand
        elif t != cand:
            raise InconsistentSquare("quadrics disagree on the completion scale")
    if t is None:
        raise Degenerate("every quadric is indifferent to the scale; cannot pin d")
    return Completion(vscale(t, u), "generic", t)


def complete_square(
    inst: TensorSpace, a: Sequence, b: Sequence, c: Sequence, *, cache: dict | None = None
) -> Vector:
    """The unique fourth corner; see `complete_square_details`."""
    return complete_square_details(inst, a, b, c, cache=cache).d
