#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "chorate/choquet.hpp"
#include "chorate/errors.hpp"
#include "test_support.hpp"

using namespace chorate;
using namespace chorate::testing;

TEST_CASE("distortion families evaluate their formulas")
{
    CHECK(DistortionFunction::es_wedge(0.9)(0.05) == doctest::Approx(0.5));
    CHECK(DistortionFunction::es_wedge(0.9)(0.2) == 1.0);
    CHECK(DistortionFunction::maxvar_power(0.5)(0.25) == doctest::Approx(0.5));
    CHECK(DistortionFunction::var_indicator(0.8)(0.2) == 0.0);
    CHECK(DistortionFunction::var_indicator(0.8)(0.21) == 1.0);
    CHECK(DistortionFunction::var_indicator(0.8)(1.0) == 1.0);
    CHECK(DistortionFunction::essinf_indicator()(0.999) == 0.0);
    CHECK(DistortionFunction::essinf_indicator()(1.0) == 1.0);
    CHECK(DistortionFunction::essup_indicator()(0.0) == 0.0);
    CHECK(DistortionFunction::essup_indicator()(1e-9) == 1.0);
    const auto t = DistortionFunction::tabulated({{0.0, 0.0}, {0.5, 0.8}, {1.0, 1.0}});
    CHECK(t(0.25) == doctest::Approx(0.4));
    CHECK(t(0.75) == doctest::Approx(0.9));
}

TEST_CASE("distortion parameters are validated")
{
    CHECK_THROWS_AS(DistortionFunction::es_wedge(1.0), ValidationError);
    CHECK_THROWS_AS(DistortionFunction::maxvar_power(0.0), ValidationError);
    CHECK_THROWS_AS(DistortionFunction::maxvar_power(1.5), ValidationError);
    CHECK_THROWS_AS(DistortionFunction::tabulated({{0.0, 0.0}, {0.5, 0.9}, {1.0, 0.8}}), ValidationError);
    CHECK_THROWS_AS(DistortionFunction::tabulated({{0.0, 0.1}, {1.0, 1.0}}), ValidationError);
}

TEST_CASE("choquet_distortion: closed-form examples")
{
    for (double c : {0.0, 0.4, 1.0}) {
        CHECK(choquet_distortion(DiscreteLoss::delta(c), DistortionFunction::maxvar_power(0.3)) ==
              doctest::Approx(c));
    }
    CHECK(choquet_distortion(DiscreteLoss::bernoulli(0.05), DistortionFunction::es_wedge(0.9)) ==
          doctest::Approx(0.5));
    CHECK(choquet_distortion(DiscreteLoss::bernoulli(0.05), DistortionFunction::essinf_indicator()) == 0.0);
    CHECK(choquet_distortion(DiscreteLoss::bernoulli(0.05), DistortionFunction::essup_indicator()) == 1.0);
    CHECK(choquet_distortion(DiscreteLoss::bernoulli(0.3), DistortionFunction::var_indicator(0.8)) == 1.0);
    CHECK(choquet_distortion(DiscreteLoss::bernoulli(0.3), DistortionFunction::var_indicator(0.6)) == 0.0);
}

TEST_CASE("finite capacity oracle: squared distortion on three atoms")
{
    // nu(A) = P(A)^2 on three equiprobable atoms.
    std::vector<double> nu(8);
    for (std::uint32_t s = 0; s < 8; ++s) {
        const double p = std::popcount(s) / 3.0;
        nu[s] = p * p;
    }
    const FiniteCapacity cap(3, nu);
    const std::vector<double> values{0.2, 0.5, 0.9};
    CHECK(std::abs(choquet_oracle(cap, values) - (0.2 + 0.3 * 4.0 / 9.0 + 0.4 / 9.0)) <= 1e-12);
    const std::vector<double> constant{0.7, 0.7, 0.7};
    CHECK(choquet_oracle(cap, constant) == doctest::Approx(0.7));
}

TEST_CASE("finite capacity validation")
{
    CHECK_THROWS_AS(FiniteCapacity(2, {0.0, 0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(FiniteCapacity(2, {0.1, 0.5, 0.5, 1.0}), ValidationError);
    CHECK_THROWS_AS(FiniteCapacity(2, {0.0, 0.6, 0.5, 0.5}), ValidationError);
}

TEST_CASE("survival-partition integral matches the capacity oracle on random laws")
{
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 1 + rng.below(8);
        const auto values = random_atom_values(rng, m);
        const auto h = random_distortion(rng);
        const std::vector<double> probs(m, 1.0 / static_cast<double>(m));
        const double oracle = choquet_oracle(FiniteCapacity::distorted(h, probs), values);
        const double fast = choquet_distortion(equiprobable_law(values), h);
        CHECK(std::abs(fast - oracle) <= 1e-12);
    }
}

TEST_CASE("comonotonic additivity")
{
    SplitMix64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 2 + rng.below(6);
        const auto base = random_atom_values(rng, m);
        // X = f(base), Y = k(base) with f, k increasing.
        std::vector<double> x(m), y(m), sum(m);
        for (std::size_t i = 0; i < m; ++i) {
            x[i] = 0.5 * base[i] * base[i];
            y[i] = 0.5 * std::sqrt(base[i]);
            sum[i] = x[i] + y[i];
        }
        const auto h = random_concave_distortion(rng);
        const std::vector<double> probs(m, 1.0 / static_cast<double>(m));
        const auto cap = FiniteCapacity::distorted(h, probs);
        CHECK(std::abs(choquet_oracle(cap, sum) - choquet_oracle(cap, x) - choquet_oracle(cap, y)) <= 1e-12);
    }
}

TEST_CASE("choquet_sdistortion: scenario examples")
{
    const ScenarioLoss sl({DiscreteLoss::bernoulli(0.2), DiscreteLoss::bernoulli(0.4)}, {0.5, 0.5});
    const auto g_sep = SDistortionFunction::separable(
        {{0.5, DistortionFunction::identity()}, {0.5, DistortionFunction::identity()}});
    CHECK(choquet_sdistortion(sl, g_sep) == doctest::Approx(0.3));
    const auto g_mix = g_from_h(DistortionFunction::identity(), {0.5, 0.5});
    CHECK(choquet_sdistortion(sl, g_mix) == doctest::Approx(0.3));

    const ScenarioLoss deltas({DiscreteLoss::delta(0.35), DiscreteLoss::delta(0.35)}, {0.3, 0.7});
    CHECK(choquet_sdistortion(deltas, SDistortionFunction::max_of_indicators(0.8, 2)) == doctest::Approx(0.35));

    const ScenarioLoss maxvar({DiscreteLoss::bernoulli(0.3), DiscreteLoss::bernoulli(0.1)}, {0.5, 0.5});
    CHECK(choquet_sdistortion(maxvar, SDistortionFunction::max_of_indicators(0.8, 2)) == 1.0);

    const std::vector<double> corner{1.0, 0.0};
    CHECK(g_mix(corner) == doctest::Approx(0.5));
    const std::vector<double> quarter{0.25};
    CHECK(g_from_h(DistortionFunction::maxvar_power(0.5), {1.0})(quarter) == doctest::Approx(0.5));
}

TEST_CASE("measure_value closed forms")
{
    const ScenarioLoss el({DiscreteLoss::bernoulli(0.2), DiscreteLoss::bernoulli(0.4)}, {0.5, 0.5});
    CHECK(measure_value(Measure::avg_el(), el) == doctest::Approx(0.3));
    const ScenarioLoss es({DiscreteLoss::bernoulli(0.05), DiscreteLoss::bernoulli(0.2)}, {0.5, 0.5});
    CHECK(measure_value(Measure::avg_es(0.9), es) == doctest::Approx(0.75));
    const ScenarioLoss pd({DiscreteLoss::bernoulli(0.05), DiscreteLoss::bernoulli(0.25)}, {0.5, 0.5});
    CHECK(measure_value(Measure::avg_pd(), pd) == doctest::Approx(0.15));
    const ScenarioLoss var({DiscreteLoss::bernoulli(0.3), DiscreteLoss::bernoulli(0.1)}, {0.5, 0.5});
    CHECK(measure_value(Measure::max_var(0.8), var) == 1.0);
    CHECK(measure_value(Measure::avg_var(0.8), var) == doctest::Approx(0.5));
    CHECK_FALSE(Measure::avg_pd().s_distortion(std::vector<double>{0.5, 0.5}).has_value());
    CHECK_THROWS_AS(Measure::avg_es(1.0).validate(), ValidationError);
    CHECK_THROWS_AS(Measure::parse("avg_foo", 0.0), ValidationError);
}

TEST_CASE("every Choquet measure agrees with its S-distortion integral")
{
    SplitMix64 rng(5);
    const std::vector<Measure> measures{Measure::avg_el(), Measure::avg_es(0.9), Measure::avg_es(0.35),
                                        Measure::avg_maxvar(0.3), Measure::avg_var(0.8), Measure::max_var(0.8),
                                        Measure::avg_var(0.5)};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t s = 1 + rng.below(3);
        std::vector<DiscreteLoss> laws;
        std::vector<double> weights(s);
        double total = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            laws.push_back(equiprobable_law(random_atom_values(rng, 1 + rng.below(6))));
            weights[j] = 0.1 + rng.uniform();
            total += weights[j];
        }
        for (auto& w : weights) {
            w /= total;
        }
        const ScenarioLoss sl(laws, weights);
        for (const auto& m : measures) {
            const auto g = m.s_distortion(weights);
            REQUIRE(g.has_value());
            CHECK(std::abs(choquet_sdistortion(sl, *g) - measure_value(m, sl)) <= 1e-12);
        }
    }
}

TEST_CASE("risk functional dispatches to measure or S-distortion")
{
    const ScenarioLoss sl({DiscreteLoss::bernoulli(0.2), DiscreteLoss::bernoulli(0.4)}, {0.5, 0.5});
    const RiskFunctional by_measure(Measure::avg_el());
    const RiskFunctional by_g(g_from_h(DistortionFunction::identity(), {0.5, 0.5}));
    CHECK(by_measure(sl) == doctest::Approx(by_g(sl)));
    CHECK(by_measure.measure() != nullptr);
    CHECK(by_g.s_distortion() != nullptr);
}
