#include "chorate/distortion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "chorate/discrete_loss.hpp"
#include "chorate/errors.hpp"

namespace chorate {

namespace {

constexpr int kValidationGrid = 1001;
constexpr std::size_t kMaxCustomGridEvaluations = 1'000'000;
constexpr double kValidationSlack = 1e-12;

double var_indicator_value(double x, double p) noexcept
{
    if (x >= 1.0) {
        return 1.0;
    }
    return x + p > 1.0 + kJumpTolerance ? 1.0 : 0.0;
}

} // namespace

DistortionFunction::DistortionFunction(DistortionFamily family, double param, std::vector<Knot> knots)
    : family_(family), param_(param), knots_(std::move(knots))
{
    validate();
}

DistortionFunction DistortionFunction::identity()
{
    return DistortionFunction(DistortionFamily::identity, 0.0);
}

DistortionFunction DistortionFunction::es_wedge(double p)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw ValidationError(fmt::format("es_wedge: p = {} outside [0, 1)", p));
    }
    return DistortionFunction(DistortionFamily::es_wedge, p);
}

DistortionFunction DistortionFunction::maxvar_power(double gamma)
{
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ValidationError(fmt::format("maxvar_power: gamma = {} outside (0, 1]", gamma));
    }
    return DistortionFunction(DistortionFamily::maxvar_power, gamma);
}

DistortionFunction DistortionFunction::var_indicator(double p)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw ValidationError(fmt::format("var_indicator: p = {} outside [0, 1)", p));
    }
    return DistortionFunction(DistortionFamily::var_indicator, p);
}

DistortionFunction DistortionFunction::essinf_indicator()
{
    return DistortionFunction(DistortionFamily::essinf_indicator, 0.0);
}

DistortionFunction DistortionFunction::essup_indicator()
{
    return DistortionFunction(DistortionFamily::essup_indicator, 0.0);
}

DistortionFunction DistortionFunction::tabulated(std::vector<Knot> knots)
{
    if (knots.size() < 2) {
        throw ValidationError("tabulated: at least two knots required");
    }
    if (knots.front().x != 0.0 || knots.back().x != 1.0) {
        throw ValidationError("tabulated: knots must start at x = 0 and end at x = 1");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i].x > knots[i - 1].x)) {
            throw ValidationError("tabulated: knot abscissae must be strictly increasing");
        }
    }
    return DistortionFunction(DistortionFamily::tabulated, 0.0, std::move(knots));
}

double DistortionFunction::operator()(double x) const noexcept
{
    switch (family_) {
    case DistortionFamily::identity:
        return x;
    case DistortionFamily::es_wedge:
        return std::min(x / (1.0 - param_), 1.0);
    case DistortionFamily::maxvar_power:
        return x <= 0.0 ? 0.0 : std::pow(x, param_);
    case DistortionFamily::var_indicator:
        return var_indicator_value(x, param_);
    case DistortionFamily::essinf_indicator:
        return x >= 1.0 - kJumpTolerance ? 1.0 : 0.0;
    case DistortionFamily::essup_indicator:
        return x > 0.0 ? 1.0 : 0.0;
    case DistortionFamily::tabulated: {
        if (x <= 0.0) {
            return knots_.front().y;
        }
        if (x >= 1.0) {
            return knots_.back().y;
        }
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                         [](double v, const Knot& k) { return v < k.x; });
        const Knot& right = *it;
        const Knot& left = *(it - 1);
        const double t = (x - left.x) / (right.x - left.x);
        return left.y + t * (right.y - left.y);
    }
    }
    return 0.0;
}

Continuity DistortionFunction::continuity() const noexcept
{
    switch (family_) {
    case DistortionFamily::var_indicator:
    case DistortionFamily::essinf_indicator:
    case DistortionFamily::essup_indicator:
        return Continuity::discontinuous;
    case DistortionFamily::es_wedge:
    case DistortionFamily::identity:
    case DistortionFamily::maxvar_power:
    case DistortionFamily::tabulated:
        return Continuity::continuous;
    }
    return Continuity::unknown;
}

std::string DistortionFunction::name() const
{
    switch (family_) {
    case DistortionFamily::identity:
        return "identity";
    case DistortionFamily::es_wedge:
        return fmt::format("es_wedge(p={})", param_);
    case DistortionFamily::maxvar_power:
        return fmt::format("maxvar_power(gamma={})", param_);
    case DistortionFamily::var_indicator:
        return fmt::format("var_indicator(p={})", param_);
    case DistortionFamily::essinf_indicator:
        return "essinf_indicator";
    case DistortionFamily::essup_indicator:
        return "essup_indicator";
    case DistortionFamily::tabulated:
        return fmt::format("tabulated({} knots)", knots_.size());
    }
    return "unknown";
}

void DistortionFunction::validate() const
{
    const DistortionFunction& h = *this;
    if (h(0.0) != 0.0 || h(1.0) != 1.0) {
        throw ValidationError(fmt::format("{}: requires h(0) = 0 and h(1) = 1", name()));
    }
    if (family_ == DistortionFamily::tabulated) {
        for (std::size_t i = 1; i < knots_.size(); ++i) {
            if (knots_[i].y < knots_[i - 1].y) {
                throw ValidationError(fmt::format("tabulated: decreasing at knot x = {}", knots_[i].x));
            }
        }
        return;
    }
    double prev = h(0.0);
    for (int i = 1; i < kValidationGrid; ++i) {
        const double cur = h(static_cast<double>(i) / (kValidationGrid - 1));
        if (cur < prev - kValidationSlack || cur > 1.0 + kValidationSlack) {
            throw ValidationError(fmt::format("{}: not an increasing map into [0, 1]", name()));
        }
        prev = cur;
    }
}

SDistortionFunction::SDistortionFunction(Evaluator g, std::size_t dims, std::string label,
                                         Continuity continuity, std::vector<WeightedDistortion> parts)
    : eval_(std::move(g)), dims_(dims), label_(std::move(label)), continuity_(continuity),
      parts_(std::move(parts))
{
    if (dims_ == 0) {
        throw ValidationError("S-distortion: dimension must be positive");
    }
}

SDistortionFunction SDistortionFunction::separable(std::vector<WeightedDistortion> parts)
{
    if (parts.empty()) {
        throw ValidationError("separable: no components");
    }
    double total = 0.0;
    Continuity continuity = Continuity::continuous;
    std::string label = "separable[";
    for (std::size_t j = 0; j < parts.size(); ++j) {
        if (!(parts[j].weight >= 0.0)) {
            throw ValidationError("separable: weights must be nonnegative");
        }
        total += parts[j].weight;
        if (parts[j].weight > 0.0 && parts[j].h.continuity() != Continuity::continuous) {
            continuity = Continuity::discontinuous;
        }
        label += fmt::format("{}{}*{}", j ? ", " : "", parts[j].weight, parts[j].h.name());
    }
    label += "]";
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw ValidationError(fmt::format("separable: weights sum to {:.17g}", total));
    }
    auto shared = std::make_shared<const std::vector<WeightedDistortion>>(parts);
    Evaluator eval = [shared](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t j = 0; j < shared->size(); ++j) {
            const auto& part = (*shared)[j];
            v += part.weight * part.h(x[j]);
        }
        return v;
    };
    const std::size_t dims = parts.size();
    return SDistortionFunction(std::move(eval), dims, std::move(label), continuity, std::move(parts));
}

SDistortionFunction SDistortionFunction::from_h(DistortionFunction h, std::vector<double> weights)
{
    validate_probability_vector(weights, "from_h");
    const std::size_t dims = weights.size();
    std::string label = fmt::format("from_h[{}]", h.name());
    const Continuity continuity = h.continuity();
    Evaluator eval = [h = std::move(h), w = std::move(weights)](std::span<const double> x) {
        double mixed = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            mixed += w[j] * x[j];
        }
        return h(std::clamp(mixed, 0.0, 1.0));
    };
    return SDistortionFunction(std::move(eval), dims, std::move(label), continuity);
}

SDistortionFunction SDistortionFunction::max_of_indicators(double p, std::size_t dims)
{
    if (!(p >= 0.0 && p < 1.0)) {
        throw ValidationError(fmt::format("max_of_indicators: p = {} outside [0, 1)", p));
    }
    Evaluator eval = [p](std::span<const double> x) {
        double v = 0.0;
        for (double xj : x) {
            v = std::max(v, var_indicator_value(xj, p));
        }
        return v;
    };
    return SDistortionFunction(std::move(eval), dims, fmt::format("max_of_indicators(p={})", p),
                               Continuity::discontinuous);
}

SDistortionFunction SDistortionFunction::custom(Evaluator g, std::size_t dims, std::string label,
                                                Continuity continuity)
{
    if (dims == 0) {
        throw ValidationError("custom: dimension must be positive");
    }
    // Points per axis so that the full grid stays within the evaluation cap.
    std::size_t per_axis = kValidationGrid;
    while (per_axis > 2) {
        double total = 1.0;
        for (std::size_t d = 0; d < dims; ++d) {
            total *= static_cast<double>(per_axis);
        }
        if (total <= static_cast<double>(kMaxCustomGridEvaluations)) {
            break;
        }
        --per_axis;
    }
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        total *= per_axis;
    }
    std::vector<double> values(total);
    std::vector<double> point(dims);
    std::vector<std::size_t> index(dims, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t d = 0; d < dims; ++d) {
            index[d] = rem % per_axis;
            rem /= per_axis;
            point[d] = static_cast<double>(index[d]) / static_cast<double>(per_axis - 1);
        }
        values[flat] = g(point);
    }
    if (values.front() != 0.0 || values.back() != 1.0) {
        throw ValidationError(fmt::format("{}: requires g(0,...,0) = 0 and g(1,...,1) = 1", label));
    }
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        for (std::size_t flat = 0; flat < total; ++flat) {
            if ((flat / stride) % per_axis + 1 < per_axis &&
                values[flat + stride] < values[flat] - kValidationSlack) {
                throw ValidationError(fmt::format("{}: not increasing along axis {}", label, d));
            }
        }
        stride *= per_axis;
    }
    return SDistortionFunction(std::move(g), dims, std::move(label), continuity);
}

double SDistortionFunction::operator()(std::span<const double> x) const
{
    if (x.size() != dims_) {
        throw ValidationError(fmt::format("{}: expected {} coordinates, got {}", label_, dims_, x.size()));
    }
    return eval_(x);
}

SDistortionFunction g_from_h(const DistortionFunction& h, std::vector<double> weights)
{
    return SDistortionFunction::from_h(h, std::move(weights));
}

} // namespace chorate
