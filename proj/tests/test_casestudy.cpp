#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chorate/casestudy.hpp"
#include "chorate/errors.hpp"

using namespace chorate;

namespace {

LognormalFit kansas() { return LognormalFit{-0.69, 1.03, 2, 0.0, 1.0}; }

SimConfig small_config(std::size_t paths)
{
    SimConfig cfg;
    cfg.paths = paths;
    return cfg;
}

} // namespace

TEST_CASE("lognormal MLE on exact logs")
{
    const std::vector<double> samples{1.0, std::exp(1.0), std::exp(2.0)};
    const auto fit = fit_lognormal(samples);
    CHECK(fit.mu == doctest::Approx(1.0));
    CHECK(fit.sigma == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(fit.n == 3);
    CHECK_THROWS_AS(fit_lognormal(std::vector<double>{2.0, 2.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(fit_lognormal(std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(fit_lognormal(std::vector<double>{1.0, -1.0}), ValidationError);
}

TEST_CASE("lognormal MLE recovers generating parameters")
{
    std::mt19937_64 gen(20240601);
    std::lognormal_distribution<double> dist(-0.69, 1.03);
    std::vector<double> samples(10'000);
    for (auto& x : samples) {
        x = dist(gen);
    }
    const auto fit = fit_lognormal(samples);
    CHECK(std::abs(fit.mu + 0.69) < 0.03);
    CHECK(std::abs(fit.sigma - 1.03) < 0.03);
}

TEST_CASE("limited expected value matches numerical integration of the survival function")
{
    const boost::math::lognormal_distribution<double> dist(-0.69, 1.03);
    for (double x : {0.1, 1.0, 1.88, 7.42, 50.0}) {
        const auto survival = [&](double t) { return t <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, t)); };
        const double numeric = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(survival, 0.0, x, 15, 1e-12);
        CHECK(lognormal_lev(-0.69, 1.03, x) == doctest::Approx(numeric).epsilon(1e-9));
    }
}

TEST_CASE("cat bond calibration reproduces the reported layer")
{
    const auto spec = calibrate_catbond(kansas());
    CHECK(spec.attach == doctest::Approx(1.88).epsilon(0.01));
    CHECK(spec.detach == doctest::Approx(7.42).epsilon(0.05));
    // The calibrated layer's expected loss equals the target by construction.
    const double el = (lognormal_lev(-0.69, 1.03, spec.detach) - lognormal_lev(-0.69, 1.03, spec.attach)) /
                      (spec.detach - spec.attach);
    CHECK(el == doctest::Approx(0.025).epsilon(1e-6));

    const auto thin = calibrate_catbond(kansas(), 0.10, 0.0999);
    CHECK(thin.detach / thin.attach < 1.01);
    CHECK_THROWS_AS(calibrate_catbond(kansas(), 0.1, 0.2), ValidationError);
    CHECK_THROWS_AS(calibrate_catbond(kansas(), 1.0, 0.02), ValidationError);
}

TEST_CASE("calibration is scale-equivariant")
{
    std::mt19937_64 gen(7);
    std::lognormal_distribution<double> dist(-1.0, 1.4);
    std::vector<double> samples(2'000);
    for (auto& x : samples) {
        x = dist(gen);
    }
    std::vector<double> scaled = samples;
    for (auto& x : scaled) {
        x *= 3.5;
    }
    const auto a = calibrate_catbond(fit_lognormal(samples));
    const auto b = calibrate_catbond(fit_lognormal(scaled));
    CHECK(b.attach == doctest::Approx(3.5 * a.attach).epsilon(1e-9));
    CHECK(b.detach == doctest::Approx(3.5 * a.detach).epsilon(1e-7));
}

TEST_CASE("simulated layer losses hit the calibration targets")
{
    const auto cfg = small_config(200'000);
    for (const auto& state : builtin_cat_fits()) {
        const auto spec = calibrate_catbond(state.fit);
        const auto paths = catbond_paths(state.fit, spec, cfg);
        const auto d = DiscreteLoss::empirical(paths);
        double var = 0.0;
        const double m = mean(d);
        for (double v : paths) {
            var += (v - m) * (v - m);
        }
        const double se_mean = std::sqrt(var / static_cast<double>(paths.size() - 1) / static_cast<double>(paths.size()));
        const double se_pd = std::sqrt(0.1 * 0.9 / static_cast<double>(paths.size()));
        CHECK(std::abs(m - 0.025) <= 3.0 * se_mean);
        CHECK(std::abs(survival(d, 0.0) - 0.10) <= 3.0 * se_pd);
        CHECK(quantile_left(d, 0.99999) == 1.0);
    }
}

TEST_CASE("cat study pools states with common random numbers")
{
    const auto fits = builtin_cat_fits();
    const auto cfg = small_config(100'000);
    const auto result = cat_study(fits, cfg);
    REQUIRE(result.rows.size() == 4 * fits.size());
    std::vector<double> single_el;
    for (std::size_t s = 0; s < fits.size(); ++s) {
        const auto spec = calibrate_catbond(fits[s].fit);
        single_el.push_back(mean(DiscreteLoss::empirical(catbond_paths(fits[s].fit, spec, cfg, s))));
    }
    double running = 0.0;
    double previous_pd = 0.0;
    for (std::size_t m = 1; m <= fits.size(); ++m) {
        running += single_el[m - 1];
        const auto& el_row = result.rows[(m - 1) * 4];
        const auto& pd_row = result.rows[(m - 1) * 4 + 3];
        CHECK(el_row.criterion == "el");
        CHECK(el_row.key == static_cast<int>(m));
        CHECK(el_row.value == doctest::Approx(running / static_cast<double>(m)).epsilon(1e-12));
        CHECK(pd_row.value > previous_pd);
        previous_pd = pd_row.value;
    }
    CHECK(result.rows[0].rating == "B");
}

TEST_CASE("CSV ingestion")
{
    std::istringstream in("state,year,loss\nKansas,2001,2500000\nKansas,2002,-20000\n\nIowa,2001,100\nKansas,2003,0\n");
    std::ostringstream warnings;
    const auto data = read_cat_csv(in, &warnings);
    REQUIRE(data.states.size() == 2);
    CHECK(data.states[0].state == "Kansas");
    CHECK(data.states[0].losses.size() == 2);
    CHECK(data.states[0].losses[0] == doctest::Approx(2.51));
    CHECK(data.states[1].losses[0] == doctest::Approx(0.0101));
    CHECK(data.dropped == 1);
    CHECK(warnings.str().find("line 3") != std::string::npos);

    std::istringstream bad_header("region,year,loss\nA,1,2\n");
    CHECK_THROWS_AS(read_cat_csv(bad_header), ValidationError);
    std::istringstream bad_number("state,year,loss\nA,1,abc\n");
    CHECK_THROWS_AS(read_cat_csv(bad_number), ValidationError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_cat_csv(empty), ValidationError);
}

TEST_CASE("shipped synthetic loss file fits near its generating parameters")
{
    std::ifstream in(std::string(CHORATE_DATA_DIR) + "/cat/synthetic_state_losses.csv");
    REQUIRE(in.good());
    const auto data = read_cat_csv(in);
    const std::vector<std::string> order{"Kansas", "Michigan", "Indiana", "Minnesota", "Kentucky"};
    const auto fits = fit_states(data, order);
    const auto reference = builtin_cat_fits();
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(std::abs(fits[i].fit.mu - reference[i].fit.mu) < 0.35);
        CHECK(std::abs(fits[i].fit.sigma - reference[i].fit.sigma) < 0.35);
    }
}

TEST_CASE("CLO study emits six rated criteria per pool size")
{
    const auto rows = clo_study(small_config(20'000), 5);
    REQUIRE(rows.size() == 30);
    CHECK(rows[0].criterion == "avg_el");
    CHECK(rows[5].criterion == "avg_pd");
    CHECK(rows[29].key == 5);
    for (const auto& r : rows) {
        CHECK_FALSE(r.rating.empty());
    }
}
