#include "chorate/choquet.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "chorate/errors.hpp"

namespace chorate {

double choquet_distortion(const DiscreteLoss& d, const DistortionFunction& h)
{
    const auto atoms = d.atoms();
    double value = atoms.front().value;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        value += h(d.tail_above(i)) * (atoms[i + 1].value - atoms[i].value);
    }
    return value;
}

double choquet_sdistortion(const ScenarioLoss& sl, const SDistortionFunction& g)
{
    if (sl.size() != g.dims()) {
        throw ValidationError(fmt::format("choquet_sdistortion: {} scenarios but g has {} arguments",
                                          sl.size(), g.dims()));
    }
    std::vector<double> breaks;
    for (const DiscreteLoss& d : sl.scenarios()) {
        for (const Atom& a : d.atoms()) {
            breaks.push_back(a.value);
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    // Walk each scenario's atoms alongside the merged breakpoints.
    const std::size_t s = sl.size();
    std::vector<std::size_t> cursor(s, 0);
    std::vector<double> surv(s);
    double value = breaks.front();
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double b = breaks[k];
        for (std::size_t j = 0; j < s; ++j) {
            const DiscreteLoss& d = sl.scenario(j);
            const auto atoms = d.atoms();
            while (cursor[j] < atoms.size() && atoms[cursor[j]].value <= b) {
                ++cursor[j];
            }
            surv[j] = cursor[j] == 0 ? 1.0 : d.tail_above(cursor[j] - 1);
        }
        value += g(surv) * (breaks[k + 1] - b);
    }
    return value;
}

FiniteCapacity::FiniteCapacity(std::size_t atoms, std::vector<double> nu)
    : atoms_(atoms), nu_(std::move(nu))
{
    if (atoms_ == 0 || atoms_ > 24) {
        throw ValidationError(fmt::format("FiniteCapacity: {} atoms outside [1, 24]", atoms_));
    }
    const std::uint32_t full = (std::uint32_t{1} << atoms_) - 1;
    if (nu_.size() != std::size_t{full} + 1) {
        throw ValidationError("FiniteCapacity: table size must be 2^m");
    }
    if (nu_[0] != 0.0 || nu_[full] != 1.0) {
        throw ValidationError("FiniteCapacity: requires nu(empty) = 0 and nu(all) = 1");
    }
    for (std::uint32_t set = 0; set <= full; ++set) {
        for (std::size_t i = 0; i < atoms_; ++i) {
            const std::uint32_t bigger = set | (std::uint32_t{1} << i);
            if (nu_[bigger] < nu_[set]) {
                throw ValidationError("FiniteCapacity: not monotone under inclusion");
            }
        }
    }
}

FiniteCapacity FiniteCapacity::distorted(const DistortionFunction& h, std::span<const double> probs)
{
    const std::size_t m = probs.size();
    if (m == 0 || m > 24) {
        throw ValidationError("FiniteCapacity::distorted: atom count outside [1, 24]");
    }
    const std::uint32_t full = (std::uint32_t{1} << m) - 1;
    std::vector<double> nu(std::size_t{full} + 1);
    for (std::uint32_t set = 0; set <= full; ++set) {
        double p = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (set & (std::uint32_t{1} << i)) {
                p += probs[i];
            }
        }
        nu[set] = set == full ? 1.0 : h(std::min(p, 1.0));
    }
    return FiniteCapacity(m, std::move(nu));
}

double choquet_oracle(const FiniteCapacity& cap, std::span<const double> values)
{
    if (values.size() != cap.atoms()) {
        throw ValidationError("choquet_oracle: value count differs from capacity atom count");
    }
    std::vector<double> levels(values.begin(), values.end());
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    double result = 0.0;
    double previous = 0.0;
    for (double level : levels) {
        std::uint32_t upper = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] >= level) {
                upper |= std::uint32_t{1} << i;
            }
        }
        const double current = cap(upper);
        result += level * (current - previous);
        previous = current;
    }
    return result;
}

Measure Measure::parse(std::string_view kind, double param)
{
    Measure m{MeasureKind::avg_el, 0.0};
    if (kind == "avg_el") {
        m = avg_el();
    } else if (kind == "avg_es") {
        m = avg_es(param);
    } else if (kind == "avg_maxvar") {
        m = avg_maxvar(param);
    } else if (kind == "avg_var") {
        m = avg_var(param);
    } else if (kind == "max_var") {
        m = max_var(param);
    } else if (kind == "avg_pd") {
        m = avg_pd();
    } else {
        throw ValidationError(fmt::format("unknown criterion '{}'", kind));
    }
    m.validate();
    return m;
}

void Measure::validate() const
{
    switch (kind) {
    case MeasureKind::avg_es:
    case MeasureKind::avg_var:
    case MeasureKind::max_var:
        if (!(param >= 0.0 && param < 1.0)) {
            throw ValidationError(fmt::format("{}: p = {} outside [0, 1)", kind_name(), param));
        }
        break;
    case MeasureKind::avg_maxvar:
        if (!(param > 0.0 && param <= 1.0)) {
            throw ValidationError(fmt::format("avg_maxvar: gamma = {} outside (0, 1]", param));
        }
        break;
    case MeasureKind::avg_el:
    case MeasureKind::avg_pd:
        break;
    }
}

std::string_view Measure::kind_name() const noexcept
{
    switch (kind) {
    case MeasureKind::avg_el:
        return "avg_el";
    case MeasureKind::avg_es:
        return "avg_es";
    case MeasureKind::avg_maxvar:
        return "avg_maxvar";
    case MeasureKind::avg_var:
        return "avg_var";
    case MeasureKind::max_var:
        return "max_var";
    case MeasureKind::avg_pd:
        return "avg_pd";
    }
    return "unknown";
}

std::string Measure::name() const
{
    switch (kind) {
    case MeasureKind::avg_es:
    case MeasureKind::avg_var:
    case MeasureKind::max_var:
        return fmt::format("{}(p={})", kind_name(), param);
    case MeasureKind::avg_maxvar:
        return fmt::format("{}(gamma={})", kind_name(), param);
    case MeasureKind::avg_el:
    case MeasureKind::avg_pd:
        break;
    }
    return std::string(kind_name());
}

std::optional<SDistortionFunction> Measure::s_distortion(std::span<const double> weights) const
{
    validate();
    auto separable = [&](const DistortionFunction& h) {
        std::vector<WeightedDistortion> parts;
        for (double a : weights) {
            parts.push_back({a, h});
        }
        return SDistortionFunction::separable(std::move(parts));
    };
    switch (kind) {
    case MeasureKind::avg_el:
        return separable(DistortionFunction::identity());
    case MeasureKind::avg_es:
        return separable(DistortionFunction::es_wedge(param));
    case MeasureKind::avg_maxvar:
        return separable(DistortionFunction::maxvar_power(param));
    case MeasureKind::avg_var:
        return separable(DistortionFunction::var_indicator(param));
    case MeasureKind::max_var:
        return SDistortionFunction::max_of_indicators(param, weights.size());
    case MeasureKind::avg_pd:
        return std::nullopt;
    }
    return std::nullopt;
}

double expected_shortfall(const DiscreteLoss& d, double p)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw ValidationError(fmt::format("expected_shortfall: p = {} outside [0, 1)", p));
    }
    // VaR_q equals atom i for q in (F_{i-1}, F_i]; weight each atom by the part of
    // that interval lying above p.
    double tail = 0.0;
    double lower = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double upper = d.cdf_at(i);
        const double overlap = upper - std::max(lower, p);
        if (overlap > 0.0) {
            tail += d.atoms()[i].value * overlap;
        }
        lower = upper;
    }
    return tail / (1.0 - p);
}

double power_distortion_value(const DiscreteLoss& d, double gamma)
{
    const auto atoms = d.atoms();
    double value = atoms.front().value;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        value += std::pow(d.tail_above(i), gamma) * (atoms[i + 1].value - atoms[i].value);
    }
    return value;
}

double measure_value(const Measure& m, const ScenarioLoss& sl)
{
    m.validate();
    const auto weights = sl.weights();
    double value = 0.0;
    for (std::size_t j = 0; j < sl.size(); ++j) {
        const DiscreteLoss& d = sl.scenario(j);
        switch (m.kind) {
        case MeasureKind::avg_el:
            value += weights[j] * mean(d);
            break;
        case MeasureKind::avg_es:
            value += weights[j] * expected_shortfall(d, m.param);
            break;
        case MeasureKind::avg_maxvar:
            value += weights[j] * power_distortion_value(d, m.param);
            break;
        case MeasureKind::avg_var:
            value += weights[j] * quantile_left(d, m.param);
            break;
        case MeasureKind::max_var:
            value = j == 0 ? quantile_left(d, m.param) : std::max(value, quantile_left(d, m.param));
            break;
        case MeasureKind::avg_pd:
            value += weights[j] * survival(d, 0.0);
            break;
        }
    }
    return value;
}

RiskFunctional::RiskFunctional(Measure m) : impl_(m)
{
    m.validate();
}

RiskFunctional::RiskFunctional(SDistortionFunction g) : impl_(std::move(g)) {}

double RiskFunctional::operator()(const ScenarioLoss& sl) const
{
    if (const auto* m = measure()) {
        return measure_value(*m, sl);
    }
    return choquet_sdistortion(sl, *s_distortion());
}

std::string RiskFunctional::name() const
{
    if (const auto* m = measure()) {
        return m->name();
    }
    return s_distortion()->name();
}

} // namespace chorate
