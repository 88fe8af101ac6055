#include "chorate/discrete_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

namespace chorate {

namespace {

// Neumaier-compensated running sum; empirical laws carry up to ~1e6 equal weights.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Sorts by value and merges neighbours within kMergeTolerance of the group's first value.
std::vector<Atom> sort_and_merge(std::vector<Atom> atoms)
{
    std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.value < b.value; });
    std::vector<Atom> merged;
    merged.reserve(atoms.size());
    for (const Atom& a : atoms) {
        if (!merged.empty() && a.value - merged.back().value <= kMergeTolerance) {
            merged.back().weight += a.weight;
        } else {
            merged.push_back(a);
        }
    }
    return merged;
}

} // namespace

void validate_probability_vector(std::span<const double> weights, const char* what)
{
    if (weights.empty()) {
        throw ValidationError(fmt::format("{}: empty weight vector", what));
    }
    CompensatedSum total;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ValidationError(fmt::format("{}: weights must be strictly positive, got {}", what, w));
        }
        total.add(w);
    }
    if (std::abs(total.value() - 1.0) > kMassTolerance) {
        throw ValidationError(fmt::format("{}: weights sum to {:.17g}, expected 1", what, total.value()));
    }
}

DiscreteLoss::DiscreteLoss(std::vector<Atom> atoms, double lo, double hi)
    : atoms_(std::move(atoms)), lo_(lo), hi_(hi)
{
    if (atoms_.empty()) {
        throw ValidationError("DiscreteLoss: no atoms");
    }
    if (!(lo <= hi)) {
        throw ValidationError(fmt::format("DiscreteLoss: bounds [{}, {}] are empty", lo, hi));
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        if (!std::isfinite(a.value) || a.value < lo || a.value > hi) {
            throw ValidationError(
                fmt::format("DiscreteLoss: atom value {} outside bounds [{}, {}]", a.value, lo, hi));
        }
        if (!(a.weight > 0.0)) {
            throw ValidationError(fmt::format("DiscreteLoss: non-positive weight {}", a.weight));
        }
        if (i > 0 && !(a.value > atoms_[i - 1].value)) {
            throw ValidationError("DiscreteLoss: atom values must be strictly increasing");
        }
        total.add(a.weight);
    }
    if (std::abs(total.value() - 1.0) > kMassTolerance) {
        throw ValidationError(fmt::format("DiscreteLoss: weights sum to {:.17g}", total.value()));
    }

    const std::size_t n = atoms_.size();
    tail_.assign(n + 1, 0.0);
    for (std::size_t k = n; k-- > 1;) {
        tail_[k] = tail_[k + 1] + atoms_[k].weight;
    }
    tail_[0] = 1.0;
    cdf_.resize(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += atoms_[k].weight;
        cdf_[k] = acc;
    }
    cdf_[n - 1] = 1.0;
}

DiscreteLoss DiscreteLoss::from_unsorted(std::vector<Atom> atoms, double lo, double hi)
{
    for (const Atom& a : atoms) {
        if (a.weight < 0.0) {
            throw ValidationError(fmt::format("DiscreteLoss: negative weight {}", a.weight));
        }
    }
    return DiscreteLoss(sort_and_merge(std::move(atoms)), lo, hi);
}

DiscreteLoss DiscreteLoss::delta(double c)
{
    return DiscreteLoss({{c, 1.0}}, std::min(0.0, c), std::max(1.0, c));
}

DiscreteLoss DiscreteLoss::bernoulli(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(fmt::format("bernoulli: p = {} outside [0, 1]", p));
    }
    if (p == 0.0) {
        return delta(0.0);
    }
    if (p == 1.0) {
        return delta(1.0);
    }
    return DiscreteLoss({{0.0, 1.0 - p}, {1.0, p}});
}

DiscreteLoss DiscreteLoss::empirical(std::span<const double> samples)
{
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return empirical_sorted(sorted);
}

DiscreteLoss DiscreteLoss::empirical_sorted(std::span<const double> sorted)
{
    if (sorted.empty()) {
        throw ValidationError("empirical: no samples");
    }
    const double n = static_cast<double>(sorted.size());
    std::vector<Atom> atoms;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i == sorted.size() || sorted[i] - sorted[run_start] > kMergeTolerance) {
            atoms.push_back({sorted[run_start], static_cast<double>(i - run_start) / n});
            run_start = i;
        }
    }
    return DiscreteLoss(std::move(atoms), 0.0, 1.0);
}

bool DiscreteLoss::in_unit_interval() const noexcept
{
    return min_value() >= 0.0 && max_value() <= 1.0;
}

ScenarioLoss::ScenarioLoss(std::vector<DiscreteLoss> scenarios, std::vector<double> weights)
    : scenarios_(std::move(scenarios)), weights_(std::move(weights))
{
    if (scenarios_.empty()) {
        throw ValidationError("ScenarioLoss: at least one scenario required");
    }
    if (scenarios_.size() != weights_.size()) {
        throw ValidationError(fmt::format("ScenarioLoss: {} scenarios but {} weights",
                                          scenarios_.size(), weights_.size()));
    }
    validate_probability_vector(weights_, "ScenarioLoss");
}

ScenarioLoss::ScenarioLoss(DiscreteLoss single)
    : ScenarioLoss(std::vector<DiscreteLoss>{std::move(single)}, std::vector<double>{1.0})
{
}

DiscreteLoss ScenarioLoss::mixed() const
{
    std::vector<std::pair<DiscreteLoss, double>> parts;
    parts.reserve(size());
    for (std::size_t j = 0; j < size(); ++j) {
        parts.emplace_back(scenarios_[j], weights_[j]);
    }
    return mixture(parts);
}

double mean(const DiscreteLoss& d) noexcept
{
    double m = 0.0;
    for (const Atom& a : d.atoms()) {
        m += a.value * a.weight;
    }
    return m;
}

double survival(const DiscreteLoss& d, double x) noexcept
{
    const auto atoms = d.atoms();
    // number of atoms with value <= x
    const auto k = static_cast<std::size_t>(
        std::upper_bound(atoms.begin(), atoms.end(), x,
                         [](double v, const Atom& a) { return v < a.value; }) -
        atoms.begin());
    if (k == 0) {
        return 1.0;
    }
    return d.tail_above(k - 1);
}

double quantile_left(const DiscreteLoss& d, double q)
{
    if (!(q >= 0.0 && q < 1.0)) {
        throw ValidationError(fmt::format("quantile_left: level {} outside [0, 1)", q));
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.cdf_at(i) >= q - kMassTolerance) {
            return d.atoms()[i].value;
        }
    }
    return d.max_value();
}

double stop_loss(const DiscreteLoss& d, double t) noexcept
{
    double s = 0.0;
    for (const Atom& a : d.atoms()) {
        if (a.value > t) {
            s += a.weight * (a.value - t);
        }
    }
    return s;
}

DiscreteLoss tranche(const DiscreteLoss& d, double attachment)
{
    if (!(attachment >= 0.0 && attachment < 1.0)) {
        throw ValidationError(fmt::format("tranche: attachment {} outside [0, 1)", attachment));
    }
    if (!d.in_unit_interval()) {
        throw ValidationError("tranche: support must lie in [0, 1]");
    }
    if (attachment == 0.0) {
        return d;
    }
    std::vector<Atom> out;
    out.reserve(d.size());
    for (const Atom& a : d.atoms()) {
        const double v = std::max(a.value - attachment, 0.0) / (1.0 - attachment);
        out.push_back({std::min(v, 1.0), a.weight});
    }
    return DiscreteLoss::from_unsorted(std::move(out), 0.0, 1.0);
}

DiscreteLoss pool_average_exact(const DiscreteLoss& d, int copies, std::size_t explosion_limit)
{
    if (copies < 1) {
        throw ValidationError(fmt::format("pool_average_exact: copies = {} < 1", copies));
    }
    if (copies == 1) {
        return d;
    }
    // Convolve sums, merging after each step.
    std::vector<Atom> sums(d.atoms().begin(), d.atoms().end());
    std::vector<Atom> next;
    for (int step = 1; step < copies; ++step) {
        const std::size_t terms = sums.size() * d.size();
        if (terms > explosion_limit) {
            throw ExplosionLimitError(fmt::format(
                "pool_average_exact: {} composite terms at copy {} exceed limit {}; use Monte Carlo",
                terms, step + 1, explosion_limit));
        }
        next.clear();
        next.reserve(terms);
        for (const Atom& s : sums) {
            for (const Atom& a : d.atoms()) {
                next.push_back({s.value + a.value, s.weight * a.weight});
            }
        }
        sums = sort_and_merge(std::move(next));
        next = {};
    }
    const double n = static_cast<double>(copies);
    for (Atom& a : sums) {
        a.value /= n;
    }
    // Averaging can land a hair outside the original bounds through rounding.
    for (Atom& a : sums) {
        a.value = std::clamp(a.value, d.min_value(), d.max_value());
    }
    return DiscreteLoss::from_unsorted(std::move(sums), d.lo(), d.hi());
}

DiscreteLoss mixture(std::span<const std::pair<DiscreteLoss, double>> parts)
{
    if (parts.empty()) {
        throw ValidationError("mixture: no parts");
    }
    std::vector<double> weights;
    weights.reserve(parts.size());
    double lo = parts.front().first.lo();
    double hi = parts.front().first.hi();
    std::size_t total_atoms = 0;
    for (const auto& [dist, w] : parts) {
        weights.push_back(w);
        lo = std::min(lo, dist.lo());
        hi = std::max(hi, dist.hi());
        total_atoms += dist.size();
    }
    validate_probability_vector(weights, "mixture");
    std::vector<Atom> atoms;
    atoms.reserve(total_atoms);
    for (const auto& [dist, w] : parts) {
        for (const Atom& a : dist.atoms()) {
            atoms.push_back({a.value, a.weight * w});
        }
    }
    return DiscreteLoss::from_unsorted(std::move(atoms), lo, hi);
}

bool icx_leq(const DiscreteLoss& x, const DiscreteLoss& y, double tol)
{
    std::vector<double> points;
    points.reserve(x.size() + y.size());
    for (const Atom& a : x.atoms()) {
        points.push_back(a.value);
    }
    for (const Atom& a : y.atoms()) {
        points.push_back(a.value);
    }
    return std::all_of(points.begin(), points.end(), [&](double t) {
        return stop_loss(x, t) <= stop_loss(y, t) + tol;
    });
}

bool cx_leq(const DiscreteLoss& x, const DiscreteLoss& y, double tol)
{
    return std::abs(mean(x) - mean(y)) <= tol && icx_leq(x, y, tol);
}

bool icx_leq(const ScenarioLoss& x, const ScenarioLoss& y, double tol)
{
    if (x.size() != y.size()) {
        throw ValidationError("icx_leq: scenario counts differ");
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!icx_leq(x.scenario(j), y.scenario(j), tol)) {
            return false;
        }
    }
    return true;
}

} // namespace chorate
