import numpy as np
import pytest

from totalfol import folblocks as fb
from totalfol import sl2z
from totalfol.geomcheck import (
    BumpSpec,
    FunctionTriple,
    HolonomyModel,
    NoModel,
    ReebChart,
    SamplingTooCoarse,
    ShearModel,
    StdModel,
    almost_horizontal_check,
    boundary_gluing_check,
    bumps,
    degenerate_triple,
    eval_forms,
    frobenius_check,
    frobenius_convergence_check,
    model_for,
    resolve_pending,
    rotation_oracle,
    run_model_suite,
    transversality_check,
)


# --- bumps ---------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 4])
def test_chi_bar_1_support_and_bound(n):
    lo, hi = 1 / (16 * n), 1 / (8 * n)
    x = np.linspace(0, 1 / n, 20001)
    v = bumps.chi_bar_1(x, n)
    inside = (x > lo) & (x < hi)
    assert np.all(v[inside] > 0) and np.all(v[~inside] == 0)
    assert v.max() < bumps.eta(n)


def test_chi_r_shape():
    x = np.linspace(-2, 2, 40001)
    v = bumps.chi_R(x)
    assert np.allclose(v, -bumps.chi_R(-x))
    pos = (x > 0.5) & (x < 1.5)
    # exp(-1/s) underflows to 0.0 within ~2e-4 of the support edges
    deep = (x > 0.5 + 1e-3) & (x < 1.5 - 1e-3)
    assert np.all(v[deep] > 0) and np.all(v[pos] < 1) and np.all(v[pos] >= 0)
    assert np.all(v[(x >= 0) & ~pos] == 0)


def test_chi_1_vanishes_on_lattice():
    for n in (1, 3):
        q = np.arange(n) / n
        assert np.all(bumps.chi_1(q, n) == 0)
        assert np.abs(bumps.chi_1(np.linspace(0, 1, 5001), n)).max() <= bumps.eta(n) / 2 + 1e-15


def test_chi_3_slope_bound():
    for n in (1, 2, 4):
        x = np.linspace(0, 1, 20001)
        s = bumps.chi_3_slope(x, n)
        assert s.min() >= 0 and s.max() <= 1 / bumps.eta(n)


def test_bump_spec():
    assert BumpSpec("chi_R")(np.array([1.0]))[0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        BumpSpec("chi_9")


# --- forms ---------------------------------------------------------------------

def test_std_on_string():
    f = eval_forms(StdModel(1), (0.1, 0.0, 0.0))
    assert np.array_equal(f, np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=float))


def test_std_bounds_everywhere():
    m = StdModel(2)
    g = np.linspace(0, 1, 40, endpoint=False)
    T, X, Y = np.meshgrid(g, g, g, indexing="ij")
    f = m.forms(T.ravel(), X.ravel(), Y.ravel())
    assert np.all(np.isfinite(f)) and np.abs(f).max() <= 1 + bumps.eta(2)


def test_reeb_at_zero():
    f = eval_forms(ReebChart(), (0.3, 0.7, 0.0))
    assert np.array_equal(f[0], [0.0, 0.0, 1.0])


# --- transversality ----------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_std_transversality(n):
    rep = transversality_check(StdModel(n), 64)
    assert rep.passed and rep.value >= 0.9


def test_degenerate_and_reeb_transversality():
    assert transversality_check(degenerate_triple(), 16).value == 0
    assert not transversality_check(degenerate_triple(), 16).passed
    assert transversality_check(ReebChart(), 64).passed


def test_threaded_evaluation_is_deterministic():
    a = transversality_check(ShearModel(2), 32, workers=1).value
    b = transversality_check(ShearModel(2), 32, workers=4).value
    assert a == b


# --- integrability ------------------------------------------------------------

def test_frobenius_std_and_reeb():
    for m in (StdModel(1), StdModel(3), ReebChart()):
        rep = frobenius_check(m, 24, h=1e-3)
        assert rep.passed and rep.value <= 1e-5


def test_frobenius_detects_non_integrable():
    bad = FunctionTriple([lambda t, x, y: (1, 0, x)] * 3, name="dt+x dy")
    rep = frobenius_check(bad, 12)
    assert rep.value == pytest.approx(1.0, abs=1e-9) and not rep.passed


@pytest.mark.parametrize("name", ["F1", "F2", "F1inv", "F2inv", "G"])
@pytest.mark.parametrize("n", [1, 2])
def test_frobenius_sheared_models_converge(name, n):
    rep = frobenius_convergence_check(model_for(fb.catalog(name, n)))
    assert rep.passed, rep.details


def test_sheared_residual_reaches_tolerance_at_fine_spacing():
    rep = frobenius_check(ShearModel(1), 16, h=3e-6, coarse_h=3e-5)
    assert rep.passed, rep.details


def test_holonomy_model_is_integrable_and_transverse():
    tags = [(fb.REEB_TAG, fb.REEB_TAG), (fb.IDENTITY_TAG, fb.IDENTITY_TAG)]
    m = model_for(fb.catalog("holonomy", 2, tags=tags))
    assert isinstance(m, HolonomyModel)
    assert transversality_check(m, 32).passed
    assert frobenius_convergence_check(m).passed
    assert rotation_oracle(m, 0) == pytest.approx((0, 0), abs=1e-9)


# --- slope bound and collars ---------------------------------------------------

def test_almost_horizontal():
    assert almost_horizontal_check(StdModel(1), "W0").passed
    assert almost_horizontal_check(ShearModel(1), "W0").passed
    vertical = FunctionTriple([lambda t, x, y: (0, 1, 0)] * 3, name="dx")
    assert not almost_horizontal_check(vertical, "W0", n=1).passed
    with pytest.raises(ValueError):
        almost_horizontal_check(StdModel(1), "W7")


def test_boundary_gluing():
    assert boundary_gluing_check(StdModel(1), sl2z.IDENTITY).value == 0
    for n in (1, 2):
        rep = boundary_gluing_check(ShearModel(n), collar=1 / 8)
        assert rep.passed and rep.value <= 1e-9
    assert not boundary_gluing_check(ShearModel(1), sl2z.A2, collar=1 / 8).passed


def test_composite_collars():
    G = model_for(fb.catalog("G"))
    assert boundary_gluing_check(G, collar=1 / 16).passed


# --- rotation oracle --------------------------------------------------------------

def test_oracle_values():
    assert rotation_oracle(StdModel(1)) == (0, 0)
    assert rotation_oracle(ShearModel(1)) == pytest.approx((1 / 8, 0), abs=1e-3)
    G3 = fb.composite_power(fb.catalog("G"), 3)
    assert rotation_oracle(model_for(G3)) == pytest.approx((1 / 2, 1 / 2), abs=1e-3)


@pytest.mark.parametrize("n", [1, 3])
def test_oracle_every_string(n):
    for name in ("F1", "F2", "F1inv", "F2inv", "G"):
        block = fb.catalog(name, n)
        m = model_for(block)
        for j in range(n):
            assert rotation_oracle(m, j) == pytest.approx(block.theta(j), abs=1e-3)


def test_oracle_rotation_block():
    m = model_for(fb.catalog("rotation", m=1))
    assert rotation_oracle(m, 0, 200) == pytest.approx((1, 1), abs=1e-3)
    m = model_for(fb.catalog("rotation", m=-1))
    assert rotation_oracle(m, 0, 200) == pytest.approx((-1, -1), abs=1e-3)


def test_oracle_refinement_invariance():
    m = model_for(fb.composite_power(fb.catalog("G"), 3))
    a = rotation_oracle(m, 0, 200)
    b = rotation_oracle(m, 0, 400)
    assert a == pytest.approx(b, abs=1e-6)


def test_oracle_too_coarse():
    with pytest.raises(SamplingTooCoarse):
        rotation_oracle(ShearModel(1), 0, 2)


def test_braid_generator_has_no_model():
    with pytest.raises(NoModel):
        model_for(fb.catalog("braid_gen", 2, gen=("sigma", 0, 1)))


def test_pending_values_resolved():
    verdict = resolve_pending(1)
    assert verdict["F1inv"]["agree"] and verdict["F2inv"]["agree"]
    assert verdict["F2inv"]["oracle"] == pytest.approx([0, 1 / 8], abs=1e-3)
    # the alternative candidate (1/8, 1/8) is ruled out
    assert abs(verdict["F2inv"]["oracle"][0] - 1 / 8) > 0.1
    plan = fb.realize_target(1, sl2z.A_STAR)
    plan.validate({k: v["oracle"] for k, v in verdict.items()})


def test_model_suite_complete():
    reports = run_model_suite(32, 1)
    names = {r.name for r in reports}
    assert {"transversality", "frobenius", "frobenius_convergence", "almost_horizontal",
            "boundary_gluing", "rotation_concordance"} <= names
    assert all(r.passed for r in reports)
    for r in reports:
        data = r.to_json()
        assert set(data) == {"name", "grid", "tolerance", "value", "passed", "details"}
