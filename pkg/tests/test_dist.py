import cmath
import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st
from scipy import stats

from kruglab.dist import (
    DiscreteDistribution,
    as_fraction_law,
    bernoulli,
    binomial,
    charfn,
    convolve,
    convolve_power,
    delta,
    kolmogorov_distance,
    mixture,
    poisson,
    quantile_step,
    sample,
    step_to_dist,
    symmetric_two_point,
)

from conftest import exact_laws, float_laws

T_GRID = np.linspace(-10, 10, 64)


def law(*atoms, deficit=0):
    return DiscreteDistribution(tuple(atoms), deficit)


def test_storage_is_sorted_and_merged():
    d = law((2, 0.25), (0, 0.5), (2, 0.25))
    assert d.atoms == ((0, 0.5), (2, 0.5))


@pytest.mark.parametrize("atoms,deficit", [(((0, 0.5),), 0), (((0, -0.1), (1, 1.1)), 0),
                                           (((0, 1.0),), -0.1)])
def test_invalid_laws(atoms, deficit):
    with pytest.raises(ValueError):
        DiscreteDistribution(atoms, deficit)


def test_convolve_examples():
    d = law((-1, 0.3), (2, 0.7))
    assert convolve(delta(0), d) == d
    assert convolve(delta(1), delta(1)).atoms == ((2, 1.0),)
    fair = bernoulli(Fr(1, 2))
    assert convolve(fair, fair).atoms == ((0, Fr(1, 4)), (1, Fr(1, 2)), (2, Fr(1, 4)))


def test_convolve_combines_deficits():
    a = law((0, 0.9), deficit=0.1)
    b = law((1, 0.8), deficit=0.2)
    c = convolve(a, b)
    assert c.deficit == pytest.approx(1 - 0.9 * 0.8)
    assert c.atoms == ((1, pytest.approx(0.72)),)


def test_off_lattice_convolution_merges_close_values():
    a = law((0.1, 0.5), (0.2, 0.5))
    c = convolve(a, a)
    # 0.1 + 0.2 and 0.2 + 0.1 coincide; 0.3 stays one atom
    assert len(c) == 3
    assert c.mass_at(c.values[1]) == pytest.approx(0.5)


def test_mixture_examples():
    d = law((1, 0.5), (3, 0.5))
    assert mixture([(1, d)]) == d
    assert mixture([(Fr(1, 2), delta(0)), (Fr(1, 2), delta(1))]) == bernoulli(Fr(1, 2))
    m = mixture([(math.exp(-1), delta(0))])
    assert m.atoms == ((0, math.exp(-1)),)
    assert m.deficit == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert m.deficit == pytest.approx(0.632121, abs=1e-6)


def test_mixture_rejects():
    with pytest.raises(ValueError):
        mixture([(-0.1, delta(0)), (1.1, delta(1))])
    with pytest.raises(ValueError):
        mixture([(0.7, delta(0)), (0.7, delta(1))])


def test_quantile_step_examples():
    assert quantile_step(delta(3)).segments == ((1, 3),)
    assert quantile_step(law((0, 0.75), (2, 0.25))).segments == ((0.25, 2),)
    assert quantile_step(law((-2, 0.25), (0, 0.5), (1, 0.25))).segments == ((0.25, 2), (0.25, 1))


def test_quantile_step_of_truncated_poisson():
    d = poisson(1.0, 10)
    f = quantile_step(d)
    # plateau at value k has length P(N = k); the deficit sits at 0
    for k in range(1, 11):
        assert f.measure_above(k - 0.5) == pytest.approx(math.fsum(math.exp(-1) / math.factorial(j)
                                                           for j in range(k, 11)), abs=1e-15)
    assert d.deficit == pytest.approx(1 - stats.poisson.cdf(10, 1.0), rel=1e-9)


def test_quantile_step_deficit_at_max():
    d = law((0, 0.5), (2, 0.25), deficit=0.25)
    assert quantile_step(d, deficit_at="max").segments == ((0.5, 2),)


def test_charfn_examples():
    for t in T_GRID:
        assert charfn(delta(0), t) == 1
        assert charfn(delta(1), t) == pytest.approx(cmath.exp(1j * t), abs=1e-15)
        assert charfn(bernoulli(0.5), t) == pytest.approx((1 + cmath.exp(1j * t)) / 2, abs=1e-15)


def test_kolmogorov_examples():
    d = law((0, 0.2), (1, 0.8))
    assert kolmogorov_distance(d, d) == 0
    assert kolmogorov_distance(delta(0), delta(1)) == 1
    got = kolmogorov_distance(binomial(2, 0.5), poisson(1.0, 30))
    xs = np.arange(0, 31)
    oracle = np.max(np.abs(stats.binom.cdf(xs, 2, 0.5) - stats.poisson.cdf(xs, 1.0)))
    assert got == pytest.approx(oracle, abs=1e-12)


def test_binomial_matches_scipy():
    d = binomial(7, 0.3)
    for k in range(8):
        assert d.mass_at(k) == pytest.approx(stats.binom.pmf(k, 7, 0.3), rel=1e-12)


def test_sample_examples():
    assert np.all(sample(delta(2.5), 1, 100) == 2.5)
    x = sample(bernoulli(0.5), 3, 100_000)
    assert abs(x.mean() - 0.5) < 0.01
    assert np.array_equal(sample(bernoulli(0.3), 9, 1000), sample(bernoulli(0.3), 9, 1000))
    assert not np.array_equal(sample(bernoulli(0.3), 9, 1000, stream=1), sample(bernoulli(0.3), 9, 1000))


def test_sample_rejects_deficit():
    with pytest.raises(ValueError):
        sample(law((0, 0.9), deficit=0.1), 0, 10)


def test_sample_converges_in_kolmogorov_distance():
    d = law((-1, 0.2), (0, 0.5), (3, 0.3))
    x = sample(d, 5, 200_000)
    vals, counts = np.unique(x, return_counts=True)
    emp = DiscreteDistribution(tuple(zip(vals.tolist(), (counts / x.size).tolist())))
    assert kolmogorov_distance(emp, d) < 0.01


def test_json_round_trip():
    d = law((-1.5, 0.25), (2.0, 0.75))
    assert DiscreteDistribution.from_json(d.dumps()) == d
    assert d.to_json() == {"atoms": [[-1.5, 0.25], [2.0, 0.75]], "deficit": 0}


def test_symmetric_two_point():
    d = symmetric_two_point(0.4, 2)
    assert d.is_symmetric() and d.mean() == 0 and d.prob_nonzero() == pytest.approx(0.4)


@given(float_laws(), float_laws())
def test_convolve_commutes(a, b):
    x, y = convolve(a, b), convolve(b, a)
    assert x.values == pytest.approx(y.values, abs=1e-12)
    assert x.masses == pytest.approx(y.masses, abs=1e-12)


@given(exact_laws(), exact_laws(), exact_laws())
def test_convolve_associative_exact(a, b, c):
    assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))


@given(float_laws(integer=True), float_laws(integer=True), float_laws(integer=True))
def test_convolve_associative_float(a, b, c):
    x, y = convolve(convolve(a, b), c), convolve(a, convolve(b, c))
    assert x.values == y.values
    assert x.masses == pytest.approx(y.masses, abs=1e-12)


@given(float_laws(), float_laws())
def test_mean_is_additive(a, b):
    assert float(convolve(a, b).mean()) == pytest.approx(float(a.mean() + b.mean()), abs=1e-12)


@given(float_laws(max_atoms=3), float_laws(max_atoms=3))
def test_charfn_of_convolution_is_product(a, b):
    c = convolve(a, b)
    for t in T_GRID:
        assert abs(charfn(c, t) - charfn(a, t) * charfn(b, t)) < 1e-12


@given(exact_laws())
def test_quantile_round_trip_exact(d):
    assert step_to_dist(quantile_step(d)) == d.abs()


@given(float_laws(integer=True), st.integers(0, 4))
def test_convolve_power_matches_repeated(d, n):
    acc = delta(0)
    for _ in range(n):
        acc = convolve(acc, d)
    got = convolve_power(d, n)
    assert got.values == acc.values
    assert got.masses == pytest.approx(acc.masses, abs=1e-12)


@given(exact_laws(), exact_laws())
def test_float_and_exact_backends_agree(a, b):
    exact = convolve(a, b)
    fa = DiscreteDistribution(tuple((float(v), float(m)) for v, m in a.atoms))
    fb = DiscreteDistribution(tuple((float(v), float(m)) for v, m in b.atoms))
    approx = convolve(fa, fb)
    assert [float(v) for v in exact.values] == list(approx.values)
    assert [float(m) for m in exact.masses] == pytest.approx(list(approx.masses), abs=1e-14)
    assert as_fraction_law(approx).exact
