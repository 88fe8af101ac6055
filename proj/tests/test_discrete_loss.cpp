#include <doctest.h>

#include <cmath>
#include <vector>

#include "chorate/discrete_loss.hpp"
#include "chorate/errors.hpp"
#include "chorate/random.hpp"

using namespace chorate;

namespace {

// Binomial(n, p) probabilities, computed independently of the convolution code.
std::vector<double> binomial_pmf(int n, double p)
{
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        out[static_cast<std::size_t>(k)] =
            std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * std::pow(p, k) *
            std::pow(1.0 - p, n - k);
    }
    return out;
}

DiscreteLoss random_loss(SplitMix64& rng, int max_atoms)
{
    const auto n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms)));
    std::vector<Atom> atoms;
    for (int i = 0; i < n; ++i) {
        atoms.push_back({static_cast<double>(rng.below(11)) / 10.0, 1.0 / n});
    }
    return DiscreteLoss::from_unsorted(atoms);
}

} // namespace

TEST_CASE("construction validates atoms")
{
    CHECK_NOTHROW(DiscreteLoss({{0.0, 0.5}, {1.0, 0.5}}));
    CHECK_THROWS_AS(DiscreteLoss({{0.0, 0.6}, {1.0, 0.5}}), ValidationError);
    CHECK_THROWS_AS(DiscreteLoss({{1.0, 0.5}, {0.0, 0.5}}), ValidationError);
    CHECK_THROWS_AS(DiscreteLoss({{0.0, 0.5}, {1.5, 0.5}}), ValidationError);
    CHECK_THROWS_AS(DiscreteLoss({{0.0, 0.0}, {1.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(DiscreteLoss::from_unsorted({{0.2, -0.1}, {0.5, 1.1}}), ValidationError);
}

TEST_CASE("from_unsorted merges and sorts")
{
    const auto d = DiscreteLoss::from_unsorted({{0.5, 0.25}, {0.1, 0.25}, {0.5, 0.5}, {0.3, 0.0}});
    REQUIRE(d.size() == 2);
    CHECK(d.atoms()[0].value == 0.1);
    CHECK(d.atoms()[1].weight == doctest::Approx(0.75));
}

TEST_CASE("survival, quantile and stop-loss on a three-point law")
{
    const DiscreteLoss d({{0.0, 0.5}, {0.4, 0.3}, {1.0, 0.2}});
    CHECK(survival(d, -0.1) == 1.0);
    CHECK(survival(d, 0.0) == doctest::Approx(0.5));
    CHECK(survival(d, 0.4) == doctest::Approx(0.2));
    CHECK(survival(d, 1.0) == 0.0);
    CHECK(quantile_left(d, 0.0) == 0.0);
    CHECK(quantile_left(d, 0.5) == 0.0);
    CHECK(quantile_left(d, 0.5000001) == 0.4);
    CHECK(quantile_left(d, 0.8) == 0.4);
    CHECK(quantile_left(d, 0.81) == 1.0);
    CHECK_THROWS_AS(quantile_left(d, 1.0), ValidationError);
    CHECK(mean(d) == doctest::Approx(0.32));
    CHECK(stop_loss(d, 0.2) == doctest::Approx(0.3 * 0.2 + 0.2 * 0.8));
}

TEST_CASE("tranche maps (X - K)+ / (1 - K)")
{
    const DiscreteLoss d({{0.0, 0.5}, {0.4, 0.3}, {1.0, 0.2}});
    const auto t = tranche(d, 0.5);
    REQUIRE(t.size() == 2);
    CHECK(t.atoms()[0].weight == doctest::Approx(0.8));
    CHECK(t.atoms()[1].value == 1.0);
    CHECK_THROWS_AS(tranche(d, 1.0), ValidationError);
    CHECK_THROWS_AS(tranche(d, -0.1), ValidationError);
}

TEST_CASE("pool average of Bernoulli draws is a scaled binomial")
{
    for (int n : {1, 2, 5, 12}) {
        for (double p : {0.05, 0.3, 0.9}) {
            const auto pooled = pool_average_exact(DiscreteLoss::bernoulli(p), n);
            const auto pmf = binomial_pmf(n, p);
            REQUIRE(pooled.size() == pmf.size());
            for (std::size_t k = 0; k < pmf.size(); ++k) {
                CHECK(pooled.atoms()[k].value == doctest::Approx(static_cast<double>(k) / n).epsilon(1e-14));
                CHECK(std::abs(pooled.atoms()[k].weight - pmf[k]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("pool average enforces the explosion limit")
{
    std::vector<Atom> atoms;
    for (int i = 0; i < 100; ++i) {
        atoms.push_back({std::sqrt(2.0) * i / 200.0 + 1e-3 * std::sin(i), 0.01});
    }
    const auto d = DiscreteLoss::from_unsorted(atoms);
    CHECK_THROWS_AS(pool_average_exact(d, 4, 50'000), ExplosionLimitError);
}

TEST_CASE("empirical laws keep total mass within tolerance")
{
    std::vector<double> samples(1'000'000);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = counter_uniform(7, i);
    }
    const auto d = DiscreteLoss::empirical(samples);
    CHECK(d.size() > 999'000);  // draws within the merge tolerance collapse
    CHECK(survival(d, 0.5) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("mixture weights its components")
{
    const std::vector<std::pair<DiscreteLoss, double>> parts{{DiscreteLoss::bernoulli(0.2), 0.5},
                                                             {DiscreteLoss::delta(0.5), 0.5}};
    const auto m = mixture(parts);
    CHECK(mean(m) == doctest::Approx(0.35));
    CHECK(survival(m, 0.0) == doctest::Approx(0.6));
}

TEST_CASE("icx order: a mean-preserving spread dominates")
{
    const auto point = DiscreteLoss::delta(0.3);
    const DiscreteLoss spread({{0.0, 0.7}, {1.0, 0.3}});
    CHECK(icx_leq(point, spread, 1e-12));
    CHECK_FALSE(icx_leq(spread, point, 1e-12));
    CHECK(cx_leq(point, spread, 1e-12));
    CHECK_FALSE(cx_leq(DiscreteLoss::delta(0.2), spread, 1e-12));
    CHECK(icx_leq(DiscreteLoss::delta(0.2), spread, 1e-12));
}

TEST_CASE("icx order agrees with a dense stop-loss scan on random laws")
{
    SplitMix64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto x = random_loss(rng, 6);
        const auto y = random_loss(rng, 6);
        bool dense = true;
        for (int k = 0; k <= 1000; ++k) {
            const double t = k / 1000.0;
            if (stop_loss(x, t) > stop_loss(y, t) + 1e-12) {
                dense = false;
            }
        }
        CHECK(icx_leq(x, y, 1e-12) == dense);
    }
}

TEST_CASE("scenario loss validates weights and mixes")
{
    const ScenarioLoss sl({DiscreteLoss::bernoulli(0.1), DiscreteLoss::bernoulli(0.3)}, {0.5, 0.5});
    CHECK(mean(sl.mixed()) == doctest::Approx(0.2));
    CHECK_THROWS_AS(ScenarioLoss({DiscreteLoss::bernoulli(0.1)}, {0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(ScenarioLoss({DiscreteLoss::bernoulli(0.1), DiscreteLoss::bernoulli(0.1)}, {0.7, 0.5}),
                    ValidationError);
}
