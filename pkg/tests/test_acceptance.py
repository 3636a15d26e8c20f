"""Acceptance gate: every criterion at its stated count and tolerance.

All comparisons are exact (rational arithmetic); the only approximate
quantities are the wall-clock bounds, which are asserted where stated.
Each test prints one PASS/FAIL line.
"""

import time
from fractions import Fraction as F
from itertools import product
from random import Random

from untensor.cli import main
from untensor.foliation import tangent_space
from untensor.functors import VecPairMorphism, gl1_demo, product_commutation_scale, tensor_morphism
from untensor.linalg import Matrix, vector, vscale
from untensor.reconstruct import recover_factors
from untensor.suites import (
    suite_bilinearity,
    suite_lemmas,
    suite_naturality,
    suite_recovery,
    suite_squares,
)
from untensor.tensor_space import TensorSpace, build_instance, generate_instance


def _report(number, ok, description):
    print(f"ACCEPTANCE {number:02d} {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {number} failed: {description}"


def _all_pass(outcomes):
    return all(o.passed for o in outcomes), {
        o.name: (o.trials - o.failures, o.trials, o.counterexample) for o in outcomes
    }


def test_criterion_01_spin_diagnostic():
    start = time.monotonic()
    ok = True
    for shape, expected in [((4, 3), 6), ((2, 6), 7)]:
        inst = generate_instance(shape, 101)
        rng = Random(201)
        for _ in range(20):
            ok = ok and tangent_space(inst, inst.sample_simple(rng)).dim == expected
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 5.0
    _report(1, ok, f"4x3 vs 2x6 cone dimensions are 6 vs 7 at 20 points each ({elapsed:.2f}s < 5s)")


def test_criterion_02_tangent_dimension_law():
    start = time.monotonic()
    ok = True
    for m, n in product(range(1, 6), range(1, 6)):
        if m * n > 25:
            continue
        inst = generate_instance((m, n), 102)
        rng = Random(202)
        for _ in range(10):
            ok = ok and tangent_space(inst, inst.sample_simple(rng)).dim == m + n - 1
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 30.0
    _report(2, ok, f"tangent dimension m+n-1 on all shapes up to 5x5 ({elapsed:.2f}s < 30s)")


def test_criterion_03_factor_recovery():
    start = time.monotonic()
    outcomes = suite_recovery(20, seed=103)
    elapsed = time.monotonic() - start
    ok, detail = _all_pass(outcomes)
    ok = ok and elapsed < 120.0
    _report(3, ok, f"20 seeded recoveries per shape round-trip exactly ({elapsed:.1f}s < 120s) {detail if not ok else ''}")


def test_criterion_04_square_completion():
    outcomes = suite_squares(100, seed=104)
    ok, detail = _all_pass(outcomes)
    _report(4, ok, f"square completion matches hidden products, 100 triples per shape {detail if not ok else ''}")


def test_criterion_05_brute_force_membership():
    inst = build_instance((2, 2))
    ok = True
    for entries in product(range(-2, 3), repeat=4):
        v = vector(entries)
        reshaped = Matrix([entries[:2], entries[2:]])
        ok = ok and inst.is_simple(v) == (reshaped.rank() <= 1)
    _report(5, ok, "membership oracle agrees with matrix rank on all 625 small vectors")


def test_criterion_06_bilinearity_and_image():
    outcomes = suite_bilinearity(200, seed=106)
    ok, detail = _all_pass(outcomes)
    _report(6, ok, f"derived product bilinear, image on cone, factorization round-trips at 200 trials per shape {detail if not ok else ''}")


def test_criterion_07_naturality():
    outcomes = suite_naturality(50, seed=107)
    by_name = {o.name: o for o in outcomes}
    ok = (
        by_name["pair-side-naturality"].passed
        and by_name["product-side-naturality"].passed
        and by_name["functor-laws"].passed
        and by_name["morphism-certification"].passed
    )
    counts = {o.name: (o.trials - o.failures, o.trials) for o in outcomes}
    _report(7, ok, f"both naturality squares and the functor laws hold exactly, 50 pairs per shape {counts if not ok else ''}")


def test_criterion_08_gl1_obstruction():
    rng = Random(108)
    ok = True
    inst_a = generate_instance((2, 3), 108, pointed=True)
    for _ in range(20):
        while True:
            g = Matrix([[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)])
            h = Matrix([[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)])
            if g.det() != 0 and h.det() != 0:
                break
        lam = F(rng.randint(1, 9), rng.randint(1, 9)) * rng.choice([1, -1])
        alpha, beta = inst_a.base_factors
        inst_b = TensorSpace(
            inst_a.shape,
            generate_instance((2, 3), 109).scramble,
            base_factors=(g.apply(alpha), h.apply(beta)),
        )
        ok = ok and gl1_demo(inst_a, inst_b, VecPairMorphism(g, h), lam)

    # one constructed unpointed example must report a nontrivial scalar
    inst_a2 = generate_instance((2, 2), 110, pointed=True)
    gg = Matrix([[1, 1], [0, 1]])
    hh = Matrix([[2, 0], [1, 1]])
    alpha, beta = inst_a2.base_factors
    inst_b2 = TensorSpace(
        inst_a2.shape,
        generate_instance((2, 2), 111).scramble,
        base_factors=(gg.apply(alpha), hh.apply(beta)),
    )
    morphism = tensor_morphism(inst_a2, inst_b2, VecPairMorphism(gg, hh))
    recon_a = recover_factors(inst_a2, Random(112))
    recon_b = recover_factors(inst_b2, Random(113), w0=vscale(F(5), morphism.apply(recon_a.w0)))
    scale = product_commutation_scale(morphism, recon_a, recon_b)
    ok = ok and scale == 5 and scale != 1
    _report(8, ok, "scalar exchange collapses the product functor; unpointed commutation shows a nontrivial scale")


def test_criterion_09_lemma_suites():
    outcomes = suite_lemmas(500, seed=109)
    ok, detail = _all_pass(outcomes)
    ok = ok and all(o.trials >= 500 for o in outcomes)
    _report(9, ok, f"rule and factor lemma properties hold at 500 trials per shape {detail if not ok else ''}")


def test_criterion_10_determinism(tmp_path):
    def run_twice(argv, outname):
        paths = []
        for tag in ("a", "b"):
            out = tmp_path / f"{outname}-{tag}"
            code = main(argv + ["--out", str(out), "--quiet"])
            assert code == 0
            paths.append(out.read_bytes())
        return paths[0] == paths[1]

    inst_path = tmp_path / "instance.json"
    assert main(["gen", "--m", "3", "--n", "2", "--seed", "77", "--pointed", "--out", str(inst_path), "--quiet"]) == 0
    ok = run_twice(["gen", "--m", "3", "--n", "2", "--seed", "77", "--pointed"], "gen")
    ok = ok and run_twice(["recover", str(inst_path), "--seed", "78"], "recover")
    ok = ok and run_twice(["spin-demo", "--dims", "4x3,2x6,1x12", "--seed", "79"], "spin")
    ok = ok and run_twice(["props", "--suite", "lemmas", "--trials", "5", "--seed", "80"], "props")
    ok = ok and run_twice(["naturality", "--trials", "2", "--seed", "81"], "naturality")
    _report(10, ok, "gen, recover, spin-demo, props, and naturality reruns are byte-identical")
