"""Factor recovery, the derived product, and the round-trip verdict.

`recover_factors` picks a base point w0 on the cone and takes the two
sheets through it as the recovered factor pair (W1, W2).  The derived
product W1 x W2 -> V is defined by square completion against w0 (with the
stipulations w0 * w0 = w0, w0 * w2 = w2, w1 * w0 = w1 fixing the
proportional cases), is bilinear, and induces a linear isomorphism from
the coefficient space of the two canonical bases onto V.  Simple vectors
are exactly the images of rank-one coefficient grids, which gives exact
factorization and a tensor-rank function.

`verify_round_trip` is the only place that deliberately looks behind the
scramble: it checks the recovered sheets against the hidden ones and
extracts the single rational scale relating the derived product to the
hidden product, which is precisely the one-parameter freedom a factor
recovery can never remove.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Sequence

from untensor.errors import (
    MembershipViolated,
    NotSimpleVector,
    RankDeficient,
    RankViolation,
    ZeroVector,
)
from untensor.foliation import Sheet, SheetPair, sheets_through
from untensor.linalg import (
    Matrix,
    Subspace,
    Vector,
    factor_rank_one,
    format_scalar,
    is_zero_vector,
    linear_combination,
    proportionality_ratio,
    rank_one_gauge,
    vscale,
    vzero,
)
from untensor.squares import complete_square
from untensor.tensor_space import TensorSpace


class Reconstruction:
    """A recovered factor pair anchored at a base point.

    `basis_e` and `basis_f` default to the canonical echelon bases of the
    two sheets; `with_bases` swaps in other bases of the same sheets, which
    is how the joint-rescaling invariance gets exercised.
    """

    def __init__(
        self,
        inst: TensorSpace,
        w0: Vector,
        pair: SheetPair,
        *,
        basis_e: tuple[Vector, ...] | None = None,
        basis_f: tuple[Vector, ...] | None = None,
        tangent_cache: dict | None = None,
    ):
        self.inst = inst
        self.w0 = tuple(w0)
        self.pair = pair
        self.basis_e = tuple(tuple(v) for v in basis_e) if basis_e else pair.first.subspace.basis.rows
        self.basis_f = tuple(tuple(v) for v in basis_f) if basis_f else pair.second.subspace.basis.rows
        self._cache = tangent_cache if tangent_cache is not None else {}
        self._phi: Matrix | None = None
        self._phi_inv: Matrix | None = None

    @property
    def sheet_w1(self) -> Sheet:
        return self.pair.first

    @property
    def sheet_w2(self) -> Sheet:
        return self.pair.second

    @property
    def dims(self) -> tuple[int, int]:
        return self.pair.dims

    def with_bases(self, basis_e: Sequence[Sequence], basis_f: Sequence[Sequence]) -> "Reconstruction":
        basis_e = tuple(tuple(Fraction(x) for x in v) for v in basis_e)
        basis_f = tuple(tuple(Fraction(x) for x in v) for v in basis_f)
        if Subspace(basis_e, self.inst.dim) != self.sheet_w1.subspace or len(basis_e) != self.dims[0]:
            raise MembershipViolated("basis_e must be a basis of the first sheet")
        if Subspace(basis_f, self.inst.dim) != self.sheet_w2.subspace or len(basis_f) != self.dims[1]:
            raise MembershipViolated("basis_f must be a basis of the second sheet")
        return Reconstruction(
            self.inst, self.w0, self.pair, basis_e=basis_e, basis_f=basis_f, tangent_cache=self._cache
        )

    # -- the derived product -------------------------------------------------

    def derived_product(self, w1: Sequence, w2: Sequence) -> Vector:
        """Bilinear product of the recovered factors, valued in V.

        Proportional-to-base arguments scale the other argument; otherwise
        the value is the square completion of (w0, w2 / w1, ?).
        """
        w1 = tuple(w1)
        w2 = tuple(w2)
        if not self.sheet_w1.contains(w1):
            raise MembershipViolated("first argument is outside the first sheet")
        if not self.sheet_w2.contains(w2):
            raise MembershipViolated("second argument is outside the second sheet")
        lam = proportionality_ratio(self.w0, w1)
        if lam is not None:
            return vscale(lam, w2)
        mu = proportionality_ratio(self.w0, w2)
        if mu is not None:
            return vscale(mu, w1)
        return complete_square(self.inst, self.w0, w2, w1, cache=self._cache)

    @property
    def product_matrix(self) -> Matrix:
        """Matrix of the induced map from coefficient grids to V.

        Column (j, k) (row-major over basis_e then basis_f) is the derived
        product of the j-th and k-th basis vectors.
        """
        if self._phi is None:
            columns = [self.derived_product(e, f) for e in self.basis_e for f in self.basis_f]
            phi = Matrix.from_columns(columns)
            try:
                inv = phi.inverse()
            except ValueError:
                raise RankDeficient("derived products of the basis pairs do not span V") from None
            self._phi = phi
            self._phi_inv = inv
        return self._phi

    @property
    def product_matrix_inverse(self) -> Matrix:
        self.product_matrix
        assert self._phi_inv is not None
        return self._phi_inv

    def coefficient_grid(self, v: Sequence) -> Matrix:
        """v pulled back through the product map, as a dims[0] x dims[1] grid."""
        coeffs = self.product_matrix_inverse.apply(tuple(v))
        d1, d2 = self.dims
        return Matrix(tuple(tuple(coeffs[j * d2 : (j + 1) * d2]) for j in range(d1)), d2)

    def factorize_simple(self, v: Sequence) -> tuple[Vector, Vector]:
        """Split a simple vector as a derived product of factor members.

        The coefficient grid of a simple vector has rank at most one; it is
        split with the first factor's leading coefficient normalized to 1,
        and the zero vector factors as (0, 0).
        """
        v = tuple(v)
        if not self.inst.is_simple(v):
            raise NotSimpleVector("only members of the cone factor")
        grid = self.coefficient_grid(v)
        split = factor_rank_one(grid)
        if split is None:
            raise RankViolation("coefficient grid of a simple vector has rank >= 2")
        cvec, rvec = split
        if is_zero_vector(cvec):
            return (vzero(self.inst.dim), vzero(self.inst.dim))
        return (linear_combination(self.basis_e, cvec), linear_combination(self.basis_f, rvec))

    def tensor_rank(self, v: Sequence) -> int:
        """Minimum number of simple summands: the rank of the coefficient grid."""
        return self.coefficient_grid(v).rank()


def recover_factors(inst: TensorSpace, rng: Random, w0: Sequence | None = None) -> Reconstruction:
    """Recover the factor pair through a base point.

    A missing w0 falls back to the instance's base point, then to a fresh
    sample.  Shapes with a one-dimensional factor have no quadrics at all
    (the cone is the whole space); there the first factor is V itself and
    the second is the ray of w0.
    """
    if w0 is None:
        w0 = inst.base_point if inst.base_point is not None else inst.sample_simple(rng)
    w0 = tuple(w0)
    if is_zero_vector(w0):
        raise ZeroVector("the base point must be nonzero")
    if not inst.is_simple(w0):
        raise NotSimpleVector("the base point must be simple")
    if inst.shape.trivial:
        full = Subspace.full(inst.dim)
        ray = Subspace([w0], inst.dim)
        pair = SheetPair(
            first=Sheet(full, certified=True, label=0),
            second=Sheet(ray, certified=True, label=1),
            through=w0,
        )
        return Reconstruction(inst, w0, pair)
    cache: dict = {}
    pair = sheets_through(inst, w0, rng, cache=cache)
    return Reconstruction(inst, w0, pair, tangent_cache=cache)


# -- round-trip verification --------------------------------------------------


@dataclass
class RoundTripReport:
    success: bool
    m: int
    n: int
    swap: bool
    lam: Fraction | None
    oracle_calls: int
    samples_used: int
    sheet_dims: tuple[int, int]
    reason: str | None = None

    def to_payload(self) -> dict:
        payload = {
            "success": self.success,
            "m": self.m,
            "n": self.n,
            "swap": self.swap,
            "lambda": format_scalar(self.lam) if self.lam is not None else None,
            "oracle_calls": self.oracle_calls,
            "samples_used": self.samples_used,
            "sheet_dims": list(self.sheet_dims),
        }
        if self.reason is not None:
            payload["reason"] = self.reason
        return payload


def _row_side_vector(grid: Matrix, beta_hat: Vector) -> Vector | None:
    """p with grid == outer(p, beta_hat), if it exists."""
    lead = next(i for i, x in enumerate(beta_hat) if x != 0)
    p = tuple(grid.column(lead))
    for i in range(grid.nrows):
        for j in range(grid.ncols):
            if grid.rows[i][j] != p[i] * beta_hat[j]:
                return None
    return p


def _col_side_vector(grid: Matrix, alpha_hat: Vector) -> Vector | None:
    """q with grid == outer(alpha_hat, q), if it exists."""
    lead = next(i for i, x in enumerate(alpha_hat) if x != 0)
    q = tuple(grid.rows[lead])
    for i in range(grid.nrows):
        for j in range(grid.ncols):
            if grid.rows[i][j] != alpha_hat[i] * q[j]:
                return None
    return q


def verify_round_trip(inst: TensorSpace, recon: Reconstruction) -> RoundTripReport:
    """Compare a reconstruction against the hidden factorization.

    The recovered sheets must equal the hidden sheets through w0 as
    canonical subspaces; when the factor dimensions coincide the pairing
    may be swapped.  On top of that, the derived products of all basis
    pairs must reproduce the hidden products up to one global rational
    scale, reported as lambda: the gauge of w0's own hidden factorization
    against canonical sheet generators.
    """
    m, n = inst.shape.m, inst.shape.n

    def report(success, swap=False, lam=None, reason=None):
        return RoundTripReport(
            success=success,
            m=m,
            n=n,
            swap=swap,
            lam=lam,
            oracle_calls=inst.stats.oracle_calls,
            samples_used=inst.stats.samples,
            sheet_dims=recon.dims,
            reason=reason,
        )

    gauge = rank_one_gauge(inst.hidden_coordinates(recon.w0))
    if gauge is None:
        return report(False, reason="base point is not rank one behind the scramble")
    alpha_hat, beta_hat, scale = gauge

    unit_rows = Matrix.identity(m).rows
    unit_cols = Matrix.identity(n).rows
    hidden_row_sheet = Subspace([inst.embed_simple(e, beta_hat) for e in unit_rows], inst.dim)
    hidden_col_sheet = Subspace([inst.embed_simple(alpha_hat, f) for f in unit_cols], inst.dim)

    recovered = (recon.sheet_w1.subspace, recon.sheet_w2.subspace)
    if recovered == (hidden_row_sheet, hidden_col_sheet):
        swap = False
    elif recovered == (hidden_col_sheet, hidden_row_sheet):
        swap = True
    else:
        return report(False, reason="recovered sheets differ from the hidden sheets")

    # Decompose every recovered basis vector against the canonical hidden
    # generator of its sheet.
    first_parts = []
    for e in recon.basis_e:
        grid = inst.hidden_coordinates(e)
        part = _col_side_vector(grid, alpha_hat) if swap else _row_side_vector(grid, beta_hat)
        if part is None:
            return report(False, swap=swap, reason="a basis vector fails to decompose in its sheet")
        first_parts.append(part)
    second_parts = []
    for f in recon.basis_f:
        grid = inst.hidden_coordinates(f)
        part = _row_side_vector(grid, beta_hat) if swap else _col_side_vector(grid, alpha_hat)
        if part is None:
            return report(False, swap=swap, reason="a basis vector fails to decompose in its sheet")
        second_parts.append(part)

    phi = recon.product_matrix
    d2 = recon.dims[1]
    lam: Fraction | None = None
    for j, pj in enumerate(first_parts):
        for k, qk in enumerate(second_parts):
            derived = phi.column(j * d2 + k)
            # In the swapped orientation the first sheet holds the column
            # side, so the hidden product pairs qk (rows) with pj (columns).
            predicted = inst.embed_simple(qk, pj) if swap else inst.embed_simple(pj, qk)
            for x, y in zip(predicted, derived):
                if lam is None and y != 0:
                    lam = x / y
            if lam is not None and predicted != vscale(lam, derived):
                return report(False, swap=swap, reason="hidden products are not a single scale of the derived ones")
    if lam is None or lam == 0:
        return report(False, swap=swap, reason="could not extract a product scale")
    if lam != scale:
        return report(False, swap=swap, lam=lam, reason="product scale disagrees with the base-point gauge")
    return report(True, swap=swap, lam=lam)
