import numpy as np
import pytest

from errors import DomainError, InsufficientDataError
from synth import GENERATORS, KINDS, GenSpec, fgn_autocovariance, gen_series, stable_variates


def generate(kind, length=None, seed=1, **params):
    return gen_series(GenSpec(kind, length, seed, params))


class TestGenSpec:
    def test_unknown_kind(self):
        with pytest.raises(DomainError, match="unknown generator"):
            GenSpec("pink_noise", 100, 1)

    def test_seed_is_mandatory(self):
        with pytest.raises(DomainError, match="seed"):
            GenSpec("gaussian_noise", 100, None)

    @pytest.mark.parametrize("kind,params", [
        ("fgn", {"hurst": 1.0}),
        ("fgn", {"hurst": 0.0}),
        ("stable_flight", {"mu": 2.5}),
        ("stable_flight", {"gamma": -1.0}),
        ("binomial_cascade", {"a": 0.4}),
        ("binomial_cascade", {"levels": 9}),
    ])
    def test_parameter_ranges(self, kind, params):
        with pytest.raises(DomainError):
            GenSpec(kind, 1024, 1, params)

    def test_cascade_length_follows_levels(self):
        assert GenSpec("binomial_cascade", None, 1, {"levels": 12}).length == 4096
        with pytest.raises(DomainError, match="2\\^levels"):
            GenSpec("binomial_cascade", 1000, 1, {"levels": 12})

    @pytest.mark.parametrize("params", [
        {"hurst": "abc"},
        {"hurst": True},
        {"hurst": None},
    ])
    def test_parameter_types(self, params):
        with pytest.raises(DomainError, match="hurst"):
            GenSpec("fgn", 1024, 1, params)

    def test_levels_must_be_whole(self):
        with pytest.raises(DomainError, match="integer"):
            GenSpec("binomial_cascade", None, 1, {"levels": 10.5})

    def test_numeric_strings_are_cast(self):
        assert GenSpec("fgn", 1024, 1, {"hurst": "0.7"}).params["hurst"] == 0.7

    def test_unknown_parameter(self):
        with pytest.raises(DomainError, match="unknown parameter"):
            GenSpec("gaussian_noise", 1024, 1, {"hurst": 0.7})

    def test_length_is_mandatory(self):
        with pytest.raises(DomainError, match="length"):
            GenSpec("fgn", None, 1)

    def test_defaults_are_merged(self):
        spec = GenSpec("stable_flight", 100, 3, {"mu": 1.2})
        assert spec.params == {"mu": 1.2, "gamma": 1.0}
        assert spec.as_dict()["seed"] == 3

    def test_every_kind_has_a_generator(self):
        assert set(GENERATORS) == set(KINDS)


class TestDeterminism:
    @pytest.mark.parametrize("kind", KINDS)
    def test_same_seed_same_bits(self, kind):
        length = None if kind == "binomial_cascade" else 4096
        params = {"shuffle": True} if kind == "binomial_cascade" else {}
        a = generate(kind, length, 42, **params)
        b = generate(kind, length, 42, **params)
        assert a.values.tobytes() == b.values.tobytes()

    def test_different_seeds_differ(self):
        assert not np.array_equal(generate("fgn", 1024, 1).values, generate("fgn", 1024, 2).values)


class TestGaussianNoise:
    def test_moments(self):
        x = generate("gaussian_noise", 200_000, 9).values
        assert abs(np.mean(x)) < 0.01
        assert np.var(x) == pytest.approx(1.0, abs=0.02)

    def test_consecutive_index(self):
        s = generate("gaussian_noise", 10, 9)
        assert list(s.timestamps) == list(range(10))


class TestFgn:
    def test_autocovariance(self):
        assert fgn_autocovariance(0.7, 0) == pytest.approx(1.0)
        assert fgn_autocovariance(0.5, [1, 2, 5]) == pytest.approx([0.0, 0.0, 0.0])
        assert fgn_autocovariance(0.7, 1) == pytest.approx(2 ** 0.4 - 1)

    def test_unit_variance_and_correlation(self):
        x = generate("fgn", 2 ** 16, 4, hurst=0.7).values
        assert np.var(x) == pytest.approx(1.0, abs=0.1)
        lag1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert lag1 == pytest.approx(2 ** 0.4 - 1, abs=0.03)

    def test_needs_64_samples(self):
        with pytest.raises(InsufficientDataError):
            generate("fgn", 63, 1)


class TestStable:
    def test_gaussian_limit_has_variance_two(self):
        x = stable_variates(np.random.default_rng(1), 200_000, 2.0)
        assert np.var(x) == pytest.approx(2.0, abs=0.05)

    def test_cauchy_median_absolute(self):
        x = stable_variates(np.random.default_rng(2), 200_000, 1.0)
        assert np.median(np.abs(x)) == pytest.approx(1.0, abs=0.02)

    def test_symmetric(self):
        x = stable_variates(np.random.default_rng(3), 200_000, 1.5)
        assert np.median(x) == pytest.approx(0.0, abs=0.02)

    def test_flight_scale(self):
        steps = np.diff(generate("stable_flight", 200_001, 5, mu=2.0, gamma=4.0).values)
        # gamma^(1/mu) = 2 scales the variance-2 steps to variance 8
        assert np.var(steps) == pytest.approx(8.0, rel=0.03)


class TestCascade:
    def test_mass_is_conserved(self):
        mass = generate("binomial_cascade", levels=12).values
        assert mass.size == 4096
        assert mass.sum() == pytest.approx(1.0, abs=1e-12)

    def test_extremes(self):
        mass = generate("binomial_cascade", a=0.7, levels=10).values
        assert mass.max() == pytest.approx(0.7 ** 10)
        assert mass.min() == pytest.approx(0.3 ** 10)
        assert mass[0] == mass.max()

    def test_shuffle_permutes_the_same_masses(self):
        plain = generate("binomial_cascade", levels=12).values
        shuffled = generate("binomial_cascade", seed=8, levels=12, shuffle=True).values
        assert not np.array_equal(plain, shuffled)
        assert np.allclose(np.sort(plain), np.sort(shuffled), rtol=1e-12)
