#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chorate {

/// Tolerance used by indicator-type distortions at their jump point, so that
/// exact probability ties (e.g. survival 0.3 against 1 - 0.7) resolve the same
/// way as the left quantile.
inline constexpr double kJumpTolerance = 1e-12;

enum class DistortionFamily {
    identity,
    es_wedge,          // min(x / (1 - p), 1)
    maxvar_power,      // x^gamma
    var_indicator,     // 1{x > 1 - p}
    essinf_indicator,  // 1{x = 1}
    essup_indicator,   // 1{x > 0}
    tabulated,         // piecewise linear through knots
};

enum class Continuity { continuous, discontinuous, unknown };

struct Knot {
    double x;
    double y;
};

/// An increasing h : [0,1] -> [0,1] with h(0) = 0 and h(1) = 1.
/// Validated on a 1001-point grid (knots only for tabulated) at construction.
class DistortionFunction {
public:
    static DistortionFunction identity();
    static DistortionFunction es_wedge(double p);
    static DistortionFunction maxvar_power(double gamma);
    static DistortionFunction var_indicator(double p);
    static DistortionFunction essinf_indicator();
    static DistortionFunction essup_indicator();
    static DistortionFunction tabulated(std::vector<Knot> knots);

    double operator()(double x) const noexcept;

    DistortionFamily family() const noexcept { return family_; }
    double param() const noexcept { return param_; }
    std::span<const Knot> knots() const noexcept { return knots_; }
    Continuity continuity() const noexcept;
    std::string name() const;

private:
    DistortionFunction(DistortionFamily family, double param, std::vector<Knot> knots = {});
    void validate() const;

    DistortionFamily family_;
    double param_;
    std::vector<Knot> knots_;
};

struct WeightedDistortion {
    double weight;
    DistortionFunction h;
};

/// A componentwise increasing g : [0,1]^s -> [0,1] with g(0,...,0) = 0 and g(1,...,1) = 1.
class SDistortionFunction {
public:
    using Evaluator = std::function<double(std::span<const double>)>;

    /// g(x) = sum_j a_j h_j(x_j); a_j >= 0 summing to one.
    static SDistortionFunction separable(std::vector<WeightedDistortion> parts);
    /// g(x) = h(sum_j w_j x_j).
    static SDistortionFunction from_h(DistortionFunction h, std::vector<double> weights);
    /// g(x) = max_j 1{x_j > 1 - p}.
    static SDistortionFunction max_of_indicators(double p, std::size_t dims);
    /// Arbitrary evaluator. Validated on a grid with at most 1e6 evaluations.
    static SDistortionFunction custom(Evaluator g, std::size_t dims, std::string label,
                                      Continuity continuity = Continuity::unknown);

    double operator()(std::span<const double> x) const;
    std::size_t dims() const noexcept { return dims_; }
    const std::string& name() const noexcept { return label_; }
    Continuity continuity() const noexcept { return continuity_; }

    /// Components of a separable g (empty for other forms).
    std::span<const WeightedDistortion> separable_parts() const noexcept { return parts_; }

private:
    SDistortionFunction(Evaluator g, std::size_t dims, std::string label, Continuity continuity,
                        std::vector<WeightedDistortion> parts = {});

    Evaluator eval_;
    std::size_t dims_;
    std::string label_;
    Continuity continuity_;
    std::vector<WeightedDistortion> parts_;
};

/// The S-distortion function of the law-invariant measure with distortion h
/// under scenario probabilities `weights`.
SDistortionFunction g_from_h(const DistortionFunction& h, std::vector<double> weights);

} // namespace chorate
