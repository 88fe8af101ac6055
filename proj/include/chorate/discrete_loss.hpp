#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "chorate/errors.hpp"

namespace chorate {

/// Values closer than this are treated as the same atom.
inline constexpr double kMergeTolerance = 1e-12;
/// Allowed drift of a probability vector's total from 1.
inline constexpr double kMassTolerance = 1e-12;

struct Atom {
    double value;
    double weight;
};

/// A finite loss distribution: strictly increasing atom values with strictly
/// positive weights summing to one, all inside the declared bounds [lo, hi].
/// Immutable once built.
class DiscreteLoss {
public:
    /// Validating constructor. Atoms must already be sorted and distinct.
    explicit DiscreteLoss(std::vector<Atom> atoms, double lo = 0.0, double hi = 1.0);

    /// Sorts, drops zero-weight atoms and merges values within kMergeTolerance.
    static DiscreteLoss from_unsorted(std::vector<Atom> atoms, double lo = 0.0, double hi = 1.0);
    static DiscreteLoss delta(double c);
    static DiscreteLoss bernoulli(double p);
    /// Equal-weight empirical law of the samples, bounds [0, 1].
    static DiscreteLoss empirical(std::span<const double> samples);
    static DiscreteLoss empirical_sorted(std::span<const double> sorted_samples);

    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double min_value() const noexcept { return atoms_.front().value; }
    double max_value() const noexcept { return atoms_.back().value; }
    bool in_unit_interval() const noexcept;

    /// P(X > atoms()[i].value); exactly 0 for the top atom.
    double tail_above(std::size_t i) const noexcept { return tail_[i + 1]; }
    /// P(X <= atoms()[i].value); exactly 1 for the top atom.
    double cdf_at(std::size_t i) const noexcept { return i + 1 == atoms_.size() ? 1.0 : cdf_[i]; }

private:
    std::vector<Atom> atoms_;
    std::vector<double> tail_;  // tail_[k] = total weight of atoms k.. (tail_[0] = 1)
    std::vector<double> cdf_;   // prefix sums of weights
    double lo_;
    double hi_;
};

/// One DiscreteLoss per scenario together with the scenario probabilities.
class ScenarioLoss {
public:
    ScenarioLoss(std::vector<DiscreteLoss> scenarios, std::vector<double> weights);
    /// Single-scenario wrapper (law-invariant case).
    explicit ScenarioLoss(DiscreteLoss single);

    std::size_t size() const noexcept { return scenarios_.size(); }
    const DiscreteLoss& scenario(std::size_t j) const { return scenarios_.at(j); }
    std::span<const DiscreteLoss> scenarios() const noexcept { return scenarios_; }
    std::span<const double> weights() const noexcept { return weights_; }
    /// Law of the loss under the scenario-weighted probability.
    DiscreteLoss mixed() const;

private:
    std::vector<DiscreteLoss> scenarios_;
    std::vector<double> weights_;
};

void validate_probability_vector(std::span<const double> weights, const char* what);

double mean(const DiscreteLoss& d) noexcept;
/// P(X > x); right-continuous step function.
double survival(const DiscreteLoss& d, double x) noexcept;
/// Left-continuous inverse inf{x : F(x) >= q} for q in [0, 1).
double quantile_left(const DiscreteLoss& d, double q);
/// E[(X - t)+].
double stop_loss(const DiscreteLoss& d, double t) noexcept;

/// Law of (X - K)+ / (1 - K); requires support in [0, 1] and K in [0, 1).
DiscreteLoss tranche(const DiscreteLoss& d, double attachment);

inline constexpr std::size_t kDefaultExplosionLimit = 1'000'000;

/// Exact law of the mean of `copies` iid draws of d. Throws ExplosionLimitError
/// when a convolution step would form more than `explosion_limit` composite terms.
DiscreteLoss pool_average_exact(const DiscreteLoss& d, int copies,
                                std::size_t explosion_limit = kDefaultExplosionLimit);

DiscreteLoss mixture(std::span<const std::pair<DiscreteLoss, double>> parts);

/// Increasing convex order test via stop-loss transforms. Stop-loss transforms of
/// discrete laws are piecewise linear with kinks only at atoms, so checking the
/// merged atom set is complete.
bool icx_leq(const DiscreteLoss& x, const DiscreteLoss& y, double tol);
/// Convex order: icx plus equal means.
bool cx_leq(const DiscreteLoss& x, const DiscreteLoss& y, double tol);
/// Scenario-wise increasing convex order.
bool icx_leq(const ScenarioLoss& x, const ScenarioLoss& y, double tol);

} // namespace chorate
