#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chorate/discrete_loss.hpp"
#include "chorate/distortion.hpp"

namespace chorate {

/// Exact Choquet integral of d against h o P: min(d) + sum_i h(S_i) (x_{i+1} - x_i).
/// For d supported in [0,1] this is the integral of h(P(X > x)) over [0,1]; for
/// other supports it is the two-sided form.
double choquet_distortion(const DiscreteLoss& d, const DistortionFunction& h);

/// Exact integral of g(S_1(x), ..., S_s(x)) over the merged breakpoints of all scenarios.
double choquet_sdistortion(const ScenarioLoss& sl, const SDistortionFunction& g);

/// A set function on the subsets of m atoms, stored by bitmask.
class FiniteCapacity {
public:
    FiniteCapacity(std::size_t atoms, std::vector<double> nu);

    /// nu(A) = h(sum_{i in A} probs_i).
    static FiniteCapacity distorted(const DistortionFunction& h, std::span<const double> probs);

    std::size_t atoms() const noexcept { return atoms_; }
    double operator()(std::uint32_t subset) const { return nu_.at(subset); }

private:
    std::size_t atoms_;
    std::vector<double> nu_;
};

/// Definition-level Choquet integral of `values` against `cap`, accumulated over
/// descending upper level sets. Independent of the survival-partition route.
double choquet_oracle(const FiniteCapacity& cap, std::span<const double> values);

enum class MeasureKind { avg_el, avg_es, avg_maxvar, avg_var, max_var, avg_pd };

/// One of the scenario-based rating measures: averages of EL, ES_p, MAXVAR_gamma,
/// VaR_p over scenarios, the scenario maximum of VaR_p, and average PD.
struct Measure {
    MeasureKind kind;
    double param = 0.0;  // p for es/var kinds, gamma for maxvar; unused otherwise

    static Measure avg_el() { return {MeasureKind::avg_el, 0.0}; }
    static Measure avg_es(double p) { return {MeasureKind::avg_es, p}; }
    static Measure avg_maxvar(double gamma) { return {MeasureKind::avg_maxvar, gamma}; }
    static Measure avg_var(double p) { return {MeasureKind::avg_var, p}; }
    static Measure max_var(double p) { return {MeasureKind::max_var, p}; }
    static Measure avg_pd() { return {MeasureKind::avg_pd, 0.0}; }

    /// Parses "avg_el", "avg_es", ... (param supplied separately).
    static Measure parse(std::string_view kind, double param);

    void validate() const;
    bool is_choquet() const noexcept { return kind != MeasureKind::avg_pd; }
    std::string name() const;
    std::string_view kind_name() const noexcept;

    /// The S-distortion function representing this measure under the given scenario
    /// weights; std::nullopt for average PD, which is not a Choquet functional.
    std::optional<SDistortionFunction> s_distortion(std::span<const double> weights) const;
};

/// Direct evaluation of the measure's closed form on each scenario (no distortion).
double measure_value(const Measure& m, const ScenarioLoss& sl);

/// Average ES closed form for one scenario: (1/(1-p)) * integral_p^1 VaR_q dq.
double expected_shortfall(const DiscreteLoss& d, double p);
/// integral_0^1 S(x)^gamma dx for d supported in [0,1].
double power_distortion_value(const DiscreteLoss& d, double gamma);

/// A rating functional: a named measure or an arbitrary S-distortion function.
class RiskFunctional {
public:
    RiskFunctional(Measure m);                  // NOLINT(google-explicit-constructor)
    RiskFunctional(SDistortionFunction g);      // NOLINT(google-explicit-constructor)

    double operator()(const ScenarioLoss& sl) const;
    std::string name() const;
    const Measure* measure() const noexcept { return std::get_if<Measure>(&impl_); }
    const SDistortionFunction* s_distortion() const noexcept
    {
        return std::get_if<SDistortionFunction>(&impl_);
    }

private:
    std::variant<Measure, SDistortionFunction> impl_;
};

} // namespace chorate
