import pytest

from totalfol import invariants as inv
from totalfol.invariants import HopfValue


def test_surgery_coefficient():
    assert inv.surgery_coefficient(-1) == 0
    assert inv.surgery_coefficient(1) == 2
    for n in range(-20, 21):
        assert inv.surgery_coefficient(n - 1) == n
    with pytest.raises(inv.NotNullHomotopic):
        inv.surgery_coefficient(3, null_homotopic=False)


def test_plug_plan():
    assert inv.plug_plan(3, 1) == -1
    assert inv.plug_plan(1, 1) == 0
    assert inv.plug_plan(3, -1) == -2
    with pytest.raises(inv.ParityMismatch):
        inv.plug_plan(2, 1)


def test_coefficient_round_trip_exhaustive():
    # odd base framing omega + n, even Kirby target n(K): plugs reach n(K) - 1,
    # surgery adds one
    for base in range(-21, 22, 2):
        for target in range(-20, 21, 2):
            plugs = inv.plug_plan(base, target - 1)
            assert inv.surgery_coefficient(base + 2 * plugs) == target


def test_evenness():
    assert inv.evenness_check({0: 0}).valid
    assert inv.evenness_check({0: 2, 1: -4}).valid
    with pytest.raises(inv.OddFraming) as info:
        inv.evenness_check({0: 2, 5: 3})
    assert info.value.components == [5]
    assert inv.evenness_check({}).to_json()["valid"]


def test_hopf_arithmetic():
    assert inv.hopf_concat(3, 4) == HopfValue(7)
    assert inv.hopf_concat(5, 0) == HopfValue(5)
    assert inv.hopf_concat(5, -5) == HopfValue(0)
    assert inv.hopf_reverse(0) == HopfValue(-1)
    assert inv.hopf_reverse(-1) == HopfValue(0)
    for h in range(-20, 21):
        assert inv.hopf_reverse(inv.hopf_reverse(h)) == HopfValue(h)


def test_hopf_glue():
    assert inv.hopf_glue(4, 0) == HopfValue(4)
    assert inv.hopf_glue(0, -1) == HopfValue(-1)
    for n in range(-10, 10):
        assert inv.hopf_glue(n, -1) == HopfValue(n - 1)
        assert inv.hopf_glue(inv.hopf_glue(n, 3), -7) == inv.hopf_glue(n, -4)
    with pytest.raises(inv.FlagMissing):
        inv.hopf_glue(0, -1, base_null_homotopic=False)
    with pytest.raises(inv.FlagMissing):
        inv.hopf_glue(0, -1, block_minus_one_unknot=False)


def test_reference_unknown_cancels():
    # an S^3 Hardorp copy carries one unknown reference h; reverse then glue cancels it
    copy = HopfValue(0, 1)
    total = inv.hopf_glue(copy, inv.hopf_reverse(copy))
    assert total.concrete and total.value == -1
    assert HopfValue.from_json(total.to_json()) == total


def test_gluing_validation():
    ident = inv.GluingData(((1, 0), (0, 1)), (1, 0), (1, 0))
    assert inv.validate_gluing(ident)
    shear = inv.GluingData(((1, 0), (1, 1)), (1, 0), (1, 0))
    assert not inv.validate_gluing(shear)
    for a_r, mu in [((1, 0), (0, 1)), ((2, 1), (1, 1)), ((0, 1), (-1, 3))]:
        g = inv.standard_surgery_map(a_r, mu)
        assert inv.validate_gluing(g)
        assert g.image(mu) == (mu[0] + a_r[0], mu[1] + a_r[1])
    with pytest.raises(ValueError):
        inv.GluingData(((1, 0), (0, 1)), (2, 0), (2, 0))


def test_trefoil_transport():
    for m in range(-5, 6):
        assert inv.trefoil_transport(1 - m, m, inv.PSI_K0_TO_PSI0) == 1
        for n in range(-5, 6):
            there = inv.trefoil_transport(n, m, inv.PSI0_TO_PSI_K0)
            assert inv.trefoil_transport(there, m, inv.PSI_K0_TO_PSI0) == n
    with pytest.raises(ValueError):
        inv.trefoil_transport(0, 0, "sideways")


def test_bennequin_witness():
    assert inv.bennequin_check(1, 1, 0)
    assert not inv.bennequin_check(-1, 1, 0)
    assert inv.bennequin_check(0, 1, 0)
