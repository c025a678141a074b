"""The nine acceptance criteria, each at its stated tolerance and time budget."""

import random
import time

import pytest

from totalfol import braidlink as bl
from totalfol import folblocks as fb
from totalfol import invariants as inv
from totalfol import planner, sl2z
from totalfol.braidlink import BraidWord
from totalfol.geomcheck import (
    ReebChart,
    ShearModel,
    StdModel,
    boundary_gluing_check,
    frobenius_check,
    model_for,
    resolve_pending,
    rotation_oracle,
    transversality_check,
)
from totalfol.planner import KirbyInput
from totalfol.sl2z import A1, A2, A_STAR, A_XY, IDENTITY, MINUS_IDENTITY


@pytest.mark.criterion(1, "matrix identities and decompose round trips")
def test_matrix_identities():
    start = time.perf_counter()
    assert A_XY @ A_XY == IDENTITY
    assert A_XY @ A1 @ A_XY == A2
    assert sl2z.inv(A2) @ A1 == A_STAR
    assert sl2z.power(A_STAR, 3) == MINUS_IDENTITY
    rng = random.Random(1)
    letters = list(sl2z.GENERATORS)
    for _ in range(1000):
        A = sl2z.evaluate_word(rng.choice(letters) for _ in range(rng.randint(0, 25)))
        word, sign = sl2z.decompose(A)
        W = sl2z.evaluate_word(word)
        assert (W if sign == 1 else -W) == A
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(2, "parity lemma on random braids, close() vs crossing oracle")
def test_parity_lemma():
    start = time.perf_counter()
    rng = random.Random(2)
    for _ in range(1000):
        n = rng.randint(1, 8)
        letters = [] if n == 1 else [rng.choice([1, -1]) * rng.randint(1, n - 1)
                                     for _ in range(rng.randint(0, 40))]
        word = BraidWord.from_signed(n, letters)
        link = bl.close(word)
        for c in link.components:
            assert (c.writhe + c.strand_count) % 2 == 1
        owner = {s: link.component_of(s) for s in range(n)}
        pos, neg, pair = {}, {}, {}
        for x in bl.crossing_oracle(word):
            K, L = owner[x.strands[0]], owner[x.strands[1]]
            if K == L:
                d = pos if x.sign > 0 else neg
                d[K] = d.get(K, 0) + 1
            else:
                key = (min(K, L), max(K, L))
                pair[key] = pair.get(key, 0) + x.sign
        for c in link.components:
            assert (c.positive, c.negative) == (pos.get(c.label, 0), neg.get(c.label, 0))
        for (K, L), t in pair.items():
            assert link.linking_number(K, L) * 2 == t
    assert time.perf_counter() - start < 2.0


@pytest.mark.criterion(3, "framing arithmetic over framings in [-20, 20]")
def test_framing_arithmetic():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 6)
        letters = [] if n == 1 else [rng.choice([1, -1]) * rng.randint(1, n - 1) for _ in range(rng.randint(0, 20))]
        link = bl.close(BraidWord.from_signed(n, letters))
        for c in link.components:
            for m in range(-5, 5):
                step = bl.framing_from_braid(link, c.label, m + 1) - bl.framing_from_braid(link, c.label, m)
                assert step == c.strand_count
    for base in range(-21, 22, 2):  # omega + n is always odd
        for target in range(-20, 21, 2):
            plugs = inv.plug_plan(base, target - 1)
            assert inv.surgery_coefficient(base + 2 * plugs) == target


@pytest.mark.criterion(4, "Hopf ledger: reverse involution, G_-1, G_n, total offsets")
def test_hopf_ledger():
    for h in range(-20, 21):
        assert inv.hopf_reverse(inv.hopf_reverse(h)) == inv.HopfValue(h)
    assert planner.build_gn(-1).certificate["hopf"] == -1
    for n in range(-20, 21):
        assert planner.build_gn(n).certificate["hopf"] == n
    kirby = KirbyInput.with_aux(BraidWord(1, ()), {0: 0})
    for n in range(-20, 21):
        plan = planner.total_plan(kirby, n)
        assert plan.certificate["hopf"] == n == plan.hopf_offset


@pytest.mark.criterion(5, "rotation ledger against the stated constants")
def test_rotation_ledger():
    tol = 1e-9
    F1, F2 = fb.catalog("F1"), fb.catalog("F2")
    assert F1.theta(0) == pytest.approx((1 / 8, 0), abs=tol)
    assert F2.theta(0) == pytest.approx((0, -1 / 8), abs=tol)
    G = fb.compose(F1, fb.catalog("F2inv"))
    G3 = fb.compose(fb.compose(G, G), G)
    assert G3.twist == MINUS_IDENTITY and G3.theta(0) == pytest.approx((1 / 2, 1 / 2), abs=tol)
    G6 = fb.compose(G3, G3)
    assert G6.twist == IDENTITY and G6.theta(0) == pytest.approx((1, 1), abs=tol)


@pytest.mark.criterion(6, "transversality, Frobenius and boundary gluing of the models")
def test_geometric_checks():
    start = time.perf_counter()
    for n in (1, 2, 3, 4):
        rep = transversality_check(StdModel(n), 64)
        assert rep.passed and rep.value >= 0.5
    assert transversality_check(ReebChart(), 64).value >= 0.5
    for m in (StdModel(1), StdModel(4), ReebChart()):
        rep = frobenius_check(m, 24, h=1e-3, coarse_h=1e-2, tol=1e-5)
        assert rep.passed and rep.value <= 1e-5
        assert rep.details["observed_order"] == "exact" or rep.details["observed_order"] >= 1.8
    rep = boundary_gluing_check(ShearModel(1), collar=1 / 8, tol=1e-9)
    assert rep.details["top"] <= 1e-9 and rep.passed
    assert time.perf_counter() - start < 30.0


@pytest.mark.criterion(7, "rotation oracle concordance and pending values")
def test_oracle_concordance():
    assert rotation_oracle(ShearModel(1)) == pytest.approx((1 / 8, 0), abs=1e-3)
    G3 = fb.composite_power(fb.catalog("G"), 3)
    assert rotation_oracle(model_for(G3)) == pytest.approx((1 / 2, 1 / 2), abs=1e-3)
    rng = random.Random(7)
    names = ["F1", "F2", "F1inv", "F2inv"]
    for _ in range(20):
        C = fb.compose_all(fb.catalog(rng.choice(names)) for _ in range(rng.randint(1, 6)))
        assert rotation_oracle(model_for(C)) == pytest.approx(C.theta(0), abs=1e-3)
    verdict = resolve_pending()
    assert all(v["agree"] for v in verdict.values())


@pytest.mark.criterion(8, "end-to-end plans for the 0-framed unknot")
def test_end_to_end():
    for hopf in range(-5, 6):
        certs = set()
        for m_star in range(-5, 6):
            start = time.perf_counter()
            plan = planner.total_plan(KirbyInput.with_aux(BraidWord(1, ()), {0: 0}, m_star), hopf)
            assert planner.verify_certificate(plan) == []
            assert time.perf_counter() - start < 1.0
            cert = plan.certificate
            assert cert["r_plus"]["framing"] == 1 and cert["r_plus"]["unknotted"]
            assert cert["r_minus"]["framing"] == -1 and cert["r_minus"]["unknotted"]
            assert cert["coefficients"] == {"0": 0}
            certs.add(repr(sorted(cert.items())))
        assert len(certs) == 1


@pytest.mark.criterion(9, "Bennequin witness")
def test_bennequin():
    assert inv.bennequin_check(tb=1, euler_char=1, rot=0)
