#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "chorate/discrete_loss.hpp"
#include "chorate/distortion.hpp"
#include "chorate/random.hpp"

namespace chorate::testing {

/// Values of m equiprobable atoms on a coarse grid (ties allowed).
inline std::vector<double> random_atom_values(SplitMix64& rng, std::size_t m, int levels = 21)
{
    std::vector<double> v(m);
    for (auto& x : v) {
        x = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels))) / (levels - 1);
    }
    return v;
}

inline DiscreteLoss equiprobable_law(const std::vector<double>& values)
{
    std::vector<Atom> atoms;
    for (double v : values) {
        atoms.push_back({v, 1.0 / static_cast<double>(values.size())});
    }
    return DiscreteLoss::from_unsorted(std::move(atoms));
}

/// Concave piecewise-linear h through (0,0) and (1,1) with random decreasing slopes.
inline DistortionFunction random_concave_tabulated(SplitMix64& rng, int pieces)
{
    std::vector<double> slopes(static_cast<std::size_t>(pieces));
    for (auto& s : slopes) {
        s = rng.uniform();
    }
    std::sort(slopes.begin(), slopes.end(), [](double a, double b) { return a > b; });
    double total = 0.0;
    for (double s : slopes) {
        total += s;
    }
    std::vector<Knot> knots{{0.0, 0.0}};
    double y = 0.0;
    for (int i = 0; i < pieces; ++i) {
        y += slopes[static_cast<std::size_t>(i)] / total;
        const double x = static_cast<double>(i + 1) / pieces;
        knots.push_back({x, i + 1 == pieces ? 1.0 : std::min(y, 1.0)});
    }
    return DistortionFunction::tabulated(std::move(knots));
}

/// A distortion function from any family with random parameters.
inline DistortionFunction random_distortion(SplitMix64& rng)
{
    const double p = 0.05 + 0.9 * rng.uniform();
    switch (rng.below(7)) {
    case 0:
        return DistortionFunction::identity();
    case 1:
        return DistortionFunction::es_wedge(p);
    case 2:
        return DistortionFunction::maxvar_power(p);
    case 3:
        return DistortionFunction::var_indicator(p);
    case 4:
        return DistortionFunction::essinf_indicator();
    case 5:
        return DistortionFunction::essup_indicator();
    default:
        return random_concave_tabulated(rng, 2 + static_cast<int>(rng.below(6)));
    }
}

/// A random concave distortion (identity, ES, power or concave tabulated).
inline DistortionFunction random_concave_distortion(SplitMix64& rng)
{
    const double p = 0.05 + 0.9 * rng.uniform();
    switch (rng.below(4)) {
    case 0:
        return DistortionFunction::identity();
    case 1:
        return DistortionFunction::es_wedge(p);
    case 2:
        return DistortionFunction::maxvar_power(p);
    default:
        return random_concave_tabulated(rng, 2 + static_cast<int>(rng.below(6)));
    }
}

} // namespace chorate::testing

#include "chorate/pooling.hpp"

namespace chorate::testing {

/// Bernoulli(Y) conditionals with P(Y = 1) = x, P(Y = lambda) = y - x, P(Y = 0) = 1 - y.
inline PoolModel three_point_bernoulli_model(double x, double y, double lambda)
{
    std::vector<MixingLaw::Node> nodes{{1.0, x}, {lambda, y - x}, {0.0, 1.0 - y}};
    return PoolModel{ConditionalLaw::bernoulli(), {MixingLaw::discrete(std::move(nodes))}, {1.0}};
}

/// Single-scenario Bernoulli pool with a random discrete mixing law.
inline PoolModel random_bernoulli_model(SplitMix64& rng, std::size_t scenarios = 1)
{
    std::vector<MixingLaw> mixing;
    std::vector<double> weights;
    for (std::size_t s = 0; s < scenarios; ++s) {
        const std::size_t k = 1 + rng.below(3);
        std::vector<MixingLaw::Node> nodes;
        for (std::size_t i = 0; i < k; ++i) {
            nodes.push_back({static_cast<double>(rng.below(11)) / 10.0, 1.0 / static_cast<double>(k)});
        }
        mixing.push_back(MixingLaw::discrete(std::move(nodes)));
        weights.push_back(1.0 / static_cast<double>(scenarios));
    }
    return PoolModel{ConditionalLaw::bernoulli(), std::move(mixing), std::move(weights)};
}

/// Random table-family pool: per node a random law on a coarse grid.
inline PoolModel random_table_model(SplitMix64& rng)
{
    const std::size_t k = 1 + rng.below(3);
    std::vector<std::pair<double, DiscreteLoss>> table;
    std::vector<MixingLaw::Node> nodes;
    for (std::size_t i = 0; i < k; ++i) {
        const double z = static_cast<double>(i);
        table.emplace_back(z, equiprobable_law(random_atom_values(rng, 1 + rng.below(3), 5)));
        nodes.push_back({z, 1.0 / static_cast<double>(k)});
    }
    return PoolModel{ConditionalLaw::table(std::move(table)), {MixingLaw::discrete(std::move(nodes))}, {1.0}};
}

} // namespace chorate::testing
