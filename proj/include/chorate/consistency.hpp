#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chorate/choquet.hpp"
#include "chorate/distortion.hpp"
#include "chorate/random.hpp"

namespace chorate {

/// Discretization of [0,1] used by the grid checks: points i/(n-1).
struct GridSpec {
    int n = 101;
    bool half_open = false;  // drop the right endpoint 1 on every axis

    void validate() const;
};

/// Slack absorbed by every grid inequality.
inline constexpr double kCheckSlack = 1e-10;

struct Witness {
    std::vector<double> point;  // layout documented per check
    double slack;               // amount by which the inequality fails
};

/// Result of a grid check. Witnesses are exact counterexamples (sorted
/// lexicographically, capped); a pass is evidence at grid resolution only.
struct CheckReport {
    std::string condition;
    std::size_t violations = 0;
    std::vector<Witness> witnesses;
    std::vector<std::string> notes;
    std::vector<CheckReport> auxiliary;

    bool passed() const noexcept { return violations == 0; }
};

inline constexpr std::size_t kMaxWitnesses = 16;

/// Midpoint concavity h((x+y)/2) >= (h(x)+h(y))/2 over grid pairs; witness point (x, y).
CheckReport check_concave(const DistortionFunction& h, const GridSpec& grid = {});

/// g(x) + g(x + eps e_i + delta e_j) <= g(x + eps e_i) + g(x + delta e_j) for grid x and
/// grid steps; i == j probes componentwise concavity, i != j submodularity.
/// Witness point: (x_1..x_s, eps, delta, i, j). The weaker second-difference form
/// g(x - eps e_i) + g(x + eps e_i + delta e_j) <= g(x) + g(x + delta e_j) is reported
/// as auxiliary[0] so the gap between the two on discontinuous g stays visible.
CheckReport check_cc_submodular(const SDistortionFunction& g, const GridSpec& grid = {});

/// Necessary pooling condition g(x) >= integral_0^1 g(1{x_1>z}, ..., 1{x_s>z}) dz at
/// interior grid points; auxiliary[0] reports the weaker bound g(x) >= min(x).
/// Witness point: (x_1..x_s).
CheckReport check_specon(const SDistortionFunction& g, const GridSpec& grid = {});

/// Right side of the pooling condition, computed exactly as a finite sum.
double specon_bound(const SDistortionFunction& g, std::span<const double> x);

/// Two losses X, Y on a shared finite sample space with per-scenario probabilities.
struct CoupledPair {
    std::vector<std::vector<double>> probs;  // [scenario][state]; zeros allowed
    std::vector<double> scenario_weights;
    std::vector<double> x;
    std::vector<double> y;
};

/// Law under each scenario of a function of the shared sample space.
ScenarioLoss pushforward(const CoupledPair& pair, std::span<const double> values);

/// Random coupled pairs: up to `max_states` states, values on a coarse grid in
/// [0,1], scenario probabilities with randomly zeroed states.
struct CoupledSampler {
    std::size_t scenarios = 2;
    std::size_t max_states = 4;
    int value_levels = 5;          // values drawn from {0, 1/(L-1), ..., 1}
    double zero_probability = 0.3; // chance a state is null under a scenario

    CoupledPair operator()(SplitMix64& rng) const;
};

struct QcWitness {
    CoupledPair pair;
    double lambda;
    double mixed_value;
    double x_value;
    double y_value;
};

/// Randomized search for rho(l X + (1-l) Y) > max(rho(X), rho(Y)) + 1e-9 with
/// l in {0.1, ..., 0.9}. Deterministic given the seed.
std::optional<QcWitness> find_qc_violation(const RiskFunctional& criterion,
                                           const CoupledSampler& sampler, int trials,
                                           std::uint64_t seed);

/// Two-scenario indicator criteria: 1{x1 v x2 > 0}, 1{x1 ^ x2 > 0}, 1{x1 v x2 = 1},
/// 1{x1 ^ x2 = 1}.
enum class IndicatorG { max_positive, min_positive, max_full, min_full };

SDistortionFunction indicator_g(IndicatorG kind);
std::string_view indicator_g_name(IndicatorG kind) noexcept;

} // namespace chorate
