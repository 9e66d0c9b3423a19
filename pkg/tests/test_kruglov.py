import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from scipy import stats

from kruglab.dist import (
    DiscreteDistribution,
    bernoulli,
    charfn,
    delta,
    kolmogorov_distance,
    mixture,
    quantile_step,
    symmetric_two_point,
)
from kruglab.kruglov import (
    KruglovConfig,
    apply_to_step,
    charfn_identity_residual,
    finite_poissonization,
    indicator_top_mass,
    transform,
)
from kruglab.harness import fixture_laws
from kruglab.spaces import Lp
from kruglab.stepfn import StepFunction

from conftest import float_laws

T_GRID = np.linspace(-10, 10, 64)
INV_E = math.exp(-1)


def test_config_auto_raises_n_max():
    cfg = KruglovConfig(n_max=3, tail_tol=1e-12)
    assert cfg.n_max == 14
    assert cfg.dropped_mass <= 1e-12
    assert KruglovConfig(n_max=20).n_max == 20
    assert stats.poisson.sf(cfg.n_max, 1.0) == pytest.approx(cfg.dropped_mass, rel=1e-6)


@pytest.mark.parametrize("kw", [{"tail_tol": 0}, {"n_max": 0}, {"n_max": 200}])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        KruglovConfig(**kw)


def test_transform_of_zero():
    k = transform(delta(0))
    assert k.atoms == ((0, pytest.approx(1.0, abs=1e-12)),)
    assert k.deficit <= 1e-12


def test_transform_of_unit_is_poisson():
    k = transform(delta(1))
    for j in range(15):
        assert k.mass_at(j) == pytest.approx(stats.poisson.pmf(j, 1.0), rel=1e-12)
    assert float(k.mean()) == pytest.approx(1.0, abs=1e-10)
    assert k.moment(2) == pytest.approx(2.0, abs=1e-9)


def test_transform_of_half_indicator():
    k = transform(bernoulli(0.5))
    assert k.mass_at(0) == pytest.approx(math.exp(-0.5), rel=1e-12)
    for j in range(1, 10):
        assert k.mass_at(j) == pytest.approx(stats.poisson.pmf(j, 0.5), rel=1e-10)


def test_transform_rejects_deficient_law():
    with pytest.raises(ValueError):
        transform(DiscreteDistribution(((0, 0.5),), 0.5))


def test_apply_to_step_unit_indicator():
    f = apply_to_step(StepFunction.indicator(1))
    assert f.values == tuple(range(14, 0, -1))
    for k in range(1, 15):
        assert f.measure_above(k - 0.5) == pytest.approx(stats.poisson.sf(k - 1, 1.0), abs=1e-12)
    assert float(f.integral()) == pytest.approx(1.0, abs=1e-10)
    assert Lp(2).norm(f) == pytest.approx(math.sqrt(2), abs=1e-9)


def test_upper_mode_brackets_exact_norm():
    k = transform(delta(1), KruglovConfig(n_max=6, tail_tol=1e-3))
    lo = Lp(2).norm(quantile_step(k))
    hi = Lp(2).norm(quantile_step(k, deficit_at="max"))
    assert lo < math.sqrt(2) and lo < hi


def test_finite_poissonization_examples():
    d = DiscreteDistribution(((-1, 0.3), (2, 0.7)))
    assert finite_poissonization(d, 1) == d
    assert finite_poissonization(delta(Fr(1)), 2).atoms == ((0, Fr(1, 4)), (1, Fr(1, 2)), (2, Fr(1, 4)))
    with pytest.raises(ValueError):
        finite_poissonization(d, 0)


def test_finite_poissonization_charfn():
    d = DiscreteDistribution(((-1, 0.2), (0, 0.5), (3, 0.3)))
    for n in (1, 3, 7):
        h = finite_poissonization(d, n)
        for t in T_GRID:
            assert abs(charfn(h, t) - (1 + (charfn(d, t) - 1) / n) ** n) < 1e-12


def test_weak_convergence_of_poissonization():
    k = transform(delta(1))
    dists = [kolmogorov_distance(finite_poissonization(delta(1), n), k) for n in (1, 2, 4, 8, 16, 32)]
    assert all(a >= b for a, b in zip(dists, dists[1:]))
    assert dists[3] < 0.1
    # n = 1 is delta_1 against Poisson(1): the gap is P(N = 0) + P(N = 1) - 1 at x = 1-
    assert dists[0] == pytest.approx(INV_E, abs=1e-12)


def test_charfn_residual_examples():
    assert charfn_identity_residual(delta(0), T_GRID) <= 1e-12
    assert charfn_identity_residual(delta(1), T_GRID) < 1e-10
    sym = symmetric_two_point(1.0)
    assert charfn_identity_residual(sym, T_GRID) < 1e-10
    for t in T_GRID:
        assert abs(charfn(transform(sym), t).imag) < 1e-15


def test_indicator_top_mass():
    a, p = 3.0, 0.25
    k = transform(bernoulli(p, a))
    assert k.mass_at(a) == pytest.approx(indicator_top_mass(p), rel=1e-12)
    assert indicator_top_mass(p) >= p / math.e
    assert indicator_top_mass(1.0) == pytest.approx(1 / math.e)


def test_fixture_laws_mass_at_zero():
    for name, d in fixture_laws().items():
        assert transform(d).mass_at(0) >= INV_E - 1e-12, name


@given(float_laws(max_atoms=3, integer=True))
def test_mass_at_zero_invariant(d):
    assert transform(d).mass_at(0) >= INV_E - 1e-12


@given(float_laws(max_atoms=3, integer=True))
def test_charfn_identity_property(d):
    assert charfn_identity_residual(d, T_GRID[::4]) < 1e-10


@given(float_laws(max_atoms=2, integer=True), float_laws(max_atoms=2, integer=True))
def test_transform_of_mixture_characteristic(a, b):
    # K is not linear on laws, but exp(phi - 1) of the mixture is what K must produce
    m = mixture([(0.5, a), (0.5, b)])
    km = transform(m)
    for t in T_GRID[::8]:
        target = np.exp(0.5 * (charfn(a, t) + charfn(b, t)) - 1)
        assert abs(charfn(km, t) - target) < 1e-10


def test_l1_isometry_on_nonnegative():
    for u in (1.0, 0.5, 0.125, 2 ** -10):
        f = StepFunction.indicator(u, 2.0)
        kf = apply_to_step(f)
        assert abs(float(kf.integral()) - float(f.integral())) < 1e-9
