from fractions import Fraction as F
from random import Random

import pytest

from untensor.errors import MembershipViolated, NotSimpleVector
from untensor.linalg import Matrix, Subspace, is_zero_vector, linear_combination, vadd, vscale
from untensor.reconstruct import recover_factors, verify_round_trip
from untensor.tensor_space import build_instance, generate_instance


@pytest.fixture
def ident22_recon():
    inst = build_instance((2, 2))
    return inst, recover_factors(inst, Random(0), w0=(1, 0, 0, 0))


class TestRecoverFactors:
    def test_one_by_one(self):
        inst = generate_instance((1, 1), 1, pointed=True)
        recon = recover_factors(inst, Random(0))
        assert recon.dims == (1, 1)
        report = verify_round_trip(inst, recon)
        assert report.success

    def test_five_by_one(self):
        inst = generate_instance((5, 1), 2, pointed=True)
        recon = recover_factors(inst, Random(0))
        assert recon.sheet_w1.subspace == Subspace.full(5)
        assert recon.sheet_w2.subspace == Subspace([recon.w0], 5)
        assert recon.dims == (5, 1)

    def test_pointed_instance_uses_base_point(self):
        inst = generate_instance((3, 4), 3, pointed=True)
        recon = recover_factors(inst, Random(1))
        assert recon.w0 == inst.base_point
        assert sorted(recon.dims, reverse=True) == [4, 3]
        assert recon.sheet_w1.contains(recon.w0)
        assert recon.sheet_w2.contains(recon.w0)

    def test_rejects_bad_base_point(self):
        inst = build_instance((2, 2))
        with pytest.raises(NotSimpleVector):
            recover_factors(inst, Random(0), w0=(1, 0, 0, 1))

    def test_determinism(self):
        inst = generate_instance((3, 3), 4, pointed=True)
        a = recover_factors(inst, Random(9))
        b = recover_factors(inst, Random(9))
        assert a.pair.subspaces() == b.pair.subspaces()
        assert a.basis_e == b.basis_e and a.basis_f == b.basis_f
        assert a.product_matrix == b.product_matrix


class TestDerivedProduct:
    def test_base_point_stipulations(self):
        inst = generate_instance((3, 3), 5, pointed=True)
        recon = recover_factors(inst, Random(2))
        w0 = recon.w0
        assert recon.derived_product(w0, w0) == w0
        f = recon.basis_f[0]
        e = recon.basis_e[1]
        assert recon.derived_product(w0, f) == f
        assert recon.derived_product(e, w0) == e

    def test_hidden_product(self):
        inst = generate_instance((3, 4), 6)
        alpha0, beta0 = (1, 2, 0), (1, 0, 1, 1)
        alpha, beta = (0, 1, 1), (2, 1, 0, 1)
        w0 = inst.embed_simple(alpha0, beta0)
        recon = recover_factors(inst, Random(3), w0=w0)
        w1 = inst.embed_simple(alpha, beta0)
        w2 = inst.embed_simple(alpha0, beta)
        if not recon.sheet_w1.contains(w1):
            w1, w2 = w2, w1  # sheet order may be swapped relative to the hidden labels
        assert recon.derived_product(w1, w2) == inst.embed_simple(alpha, beta)

    def test_membership_enforced(self):
        inst = generate_instance((2, 3), 7, pointed=True)
        recon = recover_factors(inst, Random(4))
        outside = inst.sample_simple(Random(5))
        if not recon.sheet_w1.contains(outside):
            with pytest.raises(MembershipViolated):
                recon.derived_product(outside, recon.basis_f[0])


class TestProductMatrix:
    def test_identity_instance_unit_matrix(self, ident22_recon):
        inst, recon = ident22_recon
        assert recon.product_matrix == Matrix.identity(4)

    def test_invertible_across_shapes(self):
        for seed, shape in [(8, (2, 2)), (9, (2, 3)), (10, (3, 3))]:
            inst = generate_instance(shape, seed, pointed=True)
            recon = recover_factors(inst, Random(seed))
            assert recon.product_matrix.det() != 0

    def test_rank_one_grids_land_on_cone(self):
        inst = generate_instance((3, 3), 11, pointed=True)
        recon = recover_factors(inst, Random(6))
        rng = Random(7)
        for _ in range(100):
            c = [rng.randint(-4, 4) for _ in range(3)]
            r = [rng.randint(-4, 4) for _ in range(3)]
            flat = tuple(F(a * b) for a in c for b in r)
            assert inst.is_simple(recon.product_matrix.apply(flat))

    def test_special_basis_is_simple(self):
        inst = generate_instance((2, 3), 12, pointed=True)
        recon = recover_factors(inst, Random(8))
        for col in recon.product_matrix.columns():
            assert inst.is_simple(col)


class TestFactorize:
    def test_round_trip_samples(self):
        inst = generate_instance((3, 3), 13, pointed=True)
        recon = recover_factors(inst, Random(9))
        rng = Random(10)
        for _ in range(50):
            s = inst.sample_simple(rng)
            w1, w2 = recon.factorize_simple(s)
            assert recon.derived_product(w1, w2) == s

    def test_base_point_round_trips(self):
        inst = generate_instance((3, 3), 13, pointed=True)
        recon = recover_factors(inst, Random(9))
        w1, w2 = recon.factorize_simple(recon.w0)
        assert recon.derived_product(w1, w2) == recon.w0

    def test_zero_factors_to_zero(self):
        inst = generate_instance((2, 2), 14, pointed=True)
        recon = recover_factors(inst, Random(11))
        w1, w2 = recon.factorize_simple((0, 0, 0, 0))
        assert is_zero_vector(w1) and is_zero_vector(w2)

    def test_first_factor_normalized(self):
        inst = generate_instance((2, 3), 15, pointed=True)
        recon = recover_factors(inst, Random(12))
        s = inst.sample_simple(Random(13))
        w1, _ = recon.factorize_simple(s)
        coords = recon.sheet_w1.subspace.coordinates(w1)
        lead = next(x for x in coords if x != 0)
        assert lead == 1

    def test_rejects_nonsimple(self):
        inst = build_instance((2, 2))
        recon = recover_factors(inst, Random(0), w0=(1, 0, 0, 0))
        with pytest.raises(NotSimpleVector):
            recon.factorize_simple((1, 0, 0, 1))


class TestTensorRank:
    def test_simple_is_at_most_one(self):
        inst = generate_instance((3, 3), 16, pointed=True)
        recon = recover_factors(inst, Random(14))
        s = inst.sample_simple(Random(15))
        assert recon.tensor_rank(s) <= 1

    def test_two_generic_summands(self):
        inst = generate_instance((3, 3), 16, pointed=True)
        recon = recover_factors(inst, Random(14))
        rng = Random(16)
        u, v = inst.sample_simple(rng), inst.sample_simple(rng)
        assert recon.tensor_rank(vadd(u, v)) == 2

    def test_rank_bounded_by_min_dim(self):
        inst = generate_instance((3, 3), 16, pointed=True)
        recon = recover_factors(inst, Random(14))
        rng = Random(17)
        total = (F(0),) * 9
        for _ in range(4):  # min(m, n) + 1 summands
            total = vadd(total, inst.sample_simple(rng))
        assert recon.tensor_rank(total) <= 3


class TestRoundTripReport:
    def test_identity_no_swap_unit_scale(self, ident22_recon):
        inst, recon = ident22_recon
        report = verify_round_trip(inst, recon)
        assert report.success and report.lam == 1 and report.swap is False
        payload = report.to_payload()
        assert payload["lambda"] == "1"
        assert payload["sheet_dims"] == [2, 2]

    def test_square_shape_may_swap(self):
        swaps = set()
        for seed in range(6):
            inst = generate_instance((3, 3), 100 + seed, pointed=True)
            recon = recover_factors(inst, Random(seed))
            report = verify_round_trip(inst, recon)
            assert report.success
            swaps.add(report.swap)
        assert swaps <= {False, True}

    def test_rectangular_swap_matches_dims(self):
        inst = generate_instance((3, 4), 17, pointed=True)
        recon = recover_factors(inst, Random(18))
        report = verify_round_trip(inst, recon)
        assert report.success and report.swap is True  # the larger factor sorts first

    def test_pointed_base_point_is_kept(self):
        inst = generate_instance((2, 3), 18, pointed=True)
        recon = recover_factors(inst, Random(19))
        assert recon.w0 == inst.base_point
        assert verify_round_trip(inst, recon).success


class TestJointRescale:
    def test_rescaled_bases_fix_product_values(self):
        inst = generate_instance((3, 3), 19, pointed=True)
        recon = recover_factors(inst, Random(20))
        lam = F(5, 3)
        scaled = recon.with_bases(
            [vscale(lam, e) for e in recon.basis_e],
            [vscale(1 / lam, f) for f in recon.basis_f],
        )
        rng = Random(21)
        for _ in range(20):
            c = [rng.randint(-3, 3) for _ in range(3)]
            r = [rng.randint(-3, 3) for _ in range(3)]
            flat = tuple(F(a * b) for a in c for b in r)
            assert recon.product_matrix.apply(flat) == scaled.product_matrix.apply(flat)

    def test_with_bases_validates_span(self):
        inst = generate_instance((2, 2), 20, pointed=True)
        recon = recover_factors(inst, Random(22))
        with pytest.raises(MembershipViolated):
            recon.with_bases(recon.basis_f, recon.basis_e)
