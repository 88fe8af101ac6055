#include "chorate/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "chorate/errors.hpp"

namespace chorate {

namespace {

constexpr std::size_t kMaxGridTable = 1'000'000;
constexpr double kQcSlack = 1e-9;

// Keeps the lexicographically smallest witnesses while counting all violations.
class WitnessSink {
public:
    void add(std::vector<double> point, double slack)
    {
        ++count_;
        kept_.push_back({std::move(point), slack});
        if (kept_.size() >= 8 * kMaxWitnesses) {
            compact();
        }
    }

    void finish(CheckReport& report)
    {
        compact();
        report.violations = count_;
        report.witnesses = std::move(kept_);
    }

private:
    void compact()
    {
        std::sort(kept_.begin(), kept_.end(),
                  [](const Witness& a, const Witness& b) { return a.point < b.point; });
        if (kept_.size() > kMaxWitnesses) {
            kept_.resize(kMaxWitnesses);
        }
    }

    std::size_t count_ = 0;
    std::vector<Witness> kept_;
};

// g tabulated on the full grid {0, 1/(n-1), ..., 1}^s (minus the right end when half-open).
struct GridTable {
    std::size_t dims;
    std::size_t per_axis;
    double step;
    std::vector<std::size_t> stride;
    std::vector<double> values;

    GridTable(const SDistortionFunction& g, const GridSpec& grid)
        : dims(g.dims()),
          per_axis(static_cast<std::size_t>(grid.half_open ? grid.n - 1 : grid.n)),
          step(1.0 / (grid.n - 1)), stride(dims)
    {
        std::size_t total = 1;
        for (std::size_t d = 0; d < dims; ++d) {
            stride[d] = total;
            if (static_cast<double>(total) * static_cast<double>(per_axis) >
                static_cast<double>(kMaxGridTable)) {
                throw ValidationError(fmt::format(
                    "grid check: {}^{} points exceed the {} evaluation cap", per_axis, dims, kMaxGridTable));
            }
            total *= per_axis;
        }
        values.resize(total);
        std::vector<double> point(dims);
        for (std::size_t flat = 0; flat < total; ++flat) {
            decode(flat, point);
            values[flat] = g(point);
        }
    }

    std::size_t size() const noexcept { return values.size(); }

    std::size_t coord(std::size_t flat, std::size_t d) const noexcept
    {
        return (flat / stride[d]) % per_axis;
    }

    void decode(std::size_t flat, std::vector<double>& point) const
    {
        for (std::size_t d = 0; d < dims; ++d) {
            point[d] = static_cast<double>(coord(flat, d)) * step;
        }
    }
};

} // namespace

void GridSpec::validate() const
{
    if (n < 3) {
        throw ValidationError(fmt::format("GridSpec: n = {} < 3", n));
    }
}

CheckReport check_concave(const DistortionFunction& h, const GridSpec& grid)
{
    grid.validate();
    CheckReport report;
    report.condition = grid.half_open ? "midpoint concavity on [0,1)" : "midpoint concavity on [0,1]";
    const int points = grid.half_open ? grid.n - 1 : grid.n;
    std::vector<double> xs(static_cast<std::size_t>(points));
    std::vector<double> hs(xs.size());
    for (int i = 0; i < points; ++i) {
        xs[i] = static_cast<double>(i) / (grid.n - 1);
        hs[i] = h(xs[i]);
    }
    WitnessSink sink;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double slack = 0.5 * (hs[i] + hs[j]) - h(0.5 * (xs[i] + xs[j]));
            if (slack > kCheckSlack) {
                sink.add({xs[i], xs[j]}, slack);
            }
        }
    }
    sink.finish(report);
    return report;
}

CheckReport check_cc_submodular(const SDistortionFunction& g, const GridSpec& grid)
{
    grid.validate();
    const GridTable table(g, grid);
    const std::size_t s = table.dims;
    const std::size_t last = table.per_axis - 1;
    const auto& G = table.values;

    auto witness = [&](std::size_t flat, std::size_t a, std::size_t b, std::size_t i, std::size_t j) {
        std::vector<double> point(s);
        table.decode(flat, point);
        point.push_back(static_cast<double>(a) * table.step);
        point.push_back(static_cast<double>(b) * table.step);
        point.push_back(static_cast<double>(i));
        point.push_back(static_cast<double>(j));
        return point;
    };

    // Increment form: g(x) + g(x + a e_i + b e_j) <= g(x + a e_i) + g(x + b e_j).
    WitnessSink main;
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
        for (std::size_t i = 0; i < s; ++i) {
            const std::size_t ci = table.coord(flat, i);
            const std::size_t si = table.stride[i];
            for (std::size_t j = i; j < s; ++j) {
                const std::size_t sj = table.stride[j];
                if (i == j) {
                    for (std::size_t a = 1; ci + 2 * a <= last; ++a) {
                        for (std::size_t b = a; ci + a + b <= last; ++b) {
                            const double slack = G[flat] + G[flat + (a + b) * si] - G[flat + a * si] -
                                                 G[flat + b * si];
                            if (slack > kCheckSlack) {
                                main.add(witness(flat, a, b, i, j), slack);
                            }
                        }
                    }
                } else {
                    const std::size_t cj = table.coord(flat, j);
                    for (std::size_t a = 1; ci + a <= last; ++a) {
                        for (std::size_t b = 1; cj + b <= last; ++b) {
                            const double slack = G[flat] + G[flat + a * si + b * sj] - G[flat + a * si] -
                                                 G[flat + b * sj];
                            if (slack > kCheckSlack) {
                                main.add(witness(flat, a, b, i, j), slack);
                            }
                        }
                    }
                }
            }
        }
    }

    // Centred form: g(x - a e_i) + g(x + a e_i + b e_j) <= g(x) + g(x + b e_j).
    WitnessSink centred;
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
        for (std::size_t i = 0; i < s; ++i) {
            const std::size_t ci = table.coord(flat, i);
            const std::size_t si = table.stride[i];
            for (std::size_t j = 0; j < s; ++j) {
                const std::size_t sj = table.stride[j];
                const std::size_t cj = table.coord(flat, j);
                for (std::size_t a = 1; a <= ci && ci + a <= last; ++a) {
                    for (std::size_t b = 0;; ++b) {
                        const bool inside = i == j ? ci + a + b <= last : cj + b <= last;
                        if (!inside) {
                            break;
                        }
                        const double slack = G[flat - a * si] + G[flat + a * si + b * sj] - G[flat] -
                                             G[flat + b * sj];
                        if (slack > kCheckSlack) {
                            centred.add(witness(flat, a, b, i, j), slack);
                        }
                    }
                }
            }
        }
    }

    CheckReport report;
    report.condition = "componentwise concave and submodular (increment form)";
    main.finish(report);
    CheckReport aux;
    aux.condition = "centred second-difference form";
    centred.finish(aux);
    report.auxiliary.push_back(std::move(aux));
    if (g.continuity() != Continuity::continuous) {
        report.notes.push_back(
            "g is not known to be upper semi-continuous; the centred form alone does not imply the "
            "increment form");
    }
    return report;
}

double specon_bound(const SDistortionFunction& g, std::span<const double> x)
{
    const std::size_t s = x.size();
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> indicator(s);
    double integral = 0.0;
    double previous = 0.0;
    for (std::size_t k : order) {
        const double level = x[k];
        if (level > previous) {
            // on [previous, level) exactly the coordinates >= level exceed z
            for (std::size_t j = 0; j < s; ++j) {
                indicator[j] = x[j] >= level ? 1.0 : 0.0;
            }
            integral += g(indicator) * (level - previous);
            previous = level;
        }
    }
    return integral;
}

CheckReport check_specon(const SDistortionFunction& g, const GridSpec& grid)
{
    grid.validate();
    const std::size_t s = g.dims();
    const std::size_t interior = static_cast<std::size_t>(grid.n - 2);
    const double step = 1.0 / (grid.n - 1);
    std::size_t total = 1;
    for (std::size_t d = 0; d < s; ++d) {
        total *= interior;
        if (total > kMaxGridTable) {
            throw ValidationError("check_specon: grid exceeds the evaluation cap");
        }
    }
    WitnessSink main;
    WitnessSink weak;
    std::vector<double> x(s);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t d = 0; d < s; ++d) {
            x[d] = static_cast<double>(rem % interior + 1) * step;
            rem /= interior;
        }
        const double gx = g(x);
        const double bound_slack = specon_bound(g, x) - gx;
        if (bound_slack > kCheckSlack) {
            main.add(x, bound_slack);
        }
        const double min_slack = *std::min_element(x.begin(), x.end()) - gx;
        if (min_slack > kCheckSlack) {
            weak.add(x, min_slack);
        }
    }
    CheckReport report;
    report.condition = "g(x) >= integral of g(1{x > z}) dz on the open cube";
    main.finish(report);
    CheckReport aux;
    aux.condition = "g(x) >= min(x) on the open cube";
    weak.finish(aux);
    report.auxiliary.push_back(std::move(aux));
    if (g.continuity() != Continuity::continuous) {
        report.notes.push_back(
            "hypothesis unverified: the condition is necessary only when g is lower semi-continuous "
            "at the corners {0,1}^s, which a grid cannot establish");
    }
    return report;
}

ScenarioLoss pushforward(const CoupledPair& pair, std::span<const double> values)
{
    std::vector<DiscreteLoss> laws;
    laws.reserve(pair.probs.size());
    for (const auto& probs : pair.probs) {
        if (probs.size() != values.size()) {
            throw ValidationError("pushforward: probability and value vectors differ in length");
        }
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < values.size(); ++i) {
            atoms.push_back({values[i], probs[i]});
        }
        laws.push_back(DiscreteLoss::from_unsorted(std::move(atoms)));
    }
    return ScenarioLoss(std::move(laws), pair.scenario_weights);
}

CoupledPair CoupledSampler::operator()(SplitMix64& rng) const
{
    CoupledPair pair;
    const std::size_t states = 2 + rng.below(max_states - 1);
    double weight_total = 0.0;
    for (std::size_t j = 0; j < scenarios; ++j) {
        std::vector<double> probs(states, 0.0);
        double total = 0.0;
        while (total == 0.0) {
            for (double& p : probs) {
                p = rng.uniform() < zero_probability ? 0.0 : rng.uniform();
                total += p;
            }
        }
        for (double& p : probs) {
            p /= total;
        }
        pair.probs.push_back(std::move(probs));
        pair.scenario_weights.push_back(rng.uniform());
        weight_total += pair.scenario_weights.back();
    }
    for (double& w : pair.scenario_weights) {
        w /= weight_total;
    }
    const auto levels = static_cast<std::uint64_t>(value_levels);
    for (std::size_t i = 0; i < states; ++i) {
        pair.x.push_back(static_cast<double>(rng.below(levels)) / static_cast<double>(levels - 1));
        pair.y.push_back(static_cast<double>(rng.below(levels)) / static_cast<double>(levels - 1));
    }
    return pair;
}

std::optional<QcWitness> find_qc_violation(const RiskFunctional& criterion, const CoupledSampler& sampler,
                                           int trials, std::uint64_t seed)
{
    if (trials < 1) {
        throw ValidationError("find_qc_violation: trials must be >= 1");
    }
    SplitMix64 rng(seed);
    std::vector<double> mixed;
    for (int t = 0; t < trials; ++t) {
        CoupledPair pair = sampler(rng);
        const double rx = criterion(pushforward(pair, pair.x));
        const double ry = criterion(pushforward(pair, pair.y));
        for (int k = 1; k <= 9; ++k) {
            const double lambda = k / 10.0;
            mixed.resize(pair.x.size());
            for (std::size_t i = 0; i < mixed.size(); ++i) {
                mixed[i] = lambda * pair.x[i] + (1.0 - lambda) * pair.y[i];
            }
            const double rm = criterion(pushforward(pair, mixed));
            if (rm - std::max(rx, ry) > kQcSlack) {
                return QcWitness{std::move(pair), lambda, rm, rx, ry};
            }
        }
    }
    return std::nullopt;
}

std::string_view indicator_g_name(IndicatorG kind) noexcept
{
    switch (kind) {
    case IndicatorG::max_positive:
        return "max-positive";
    case IndicatorG::min_positive:
        return "min-positive";
    case IndicatorG::max_full:
        return "max-full";
    case IndicatorG::min_full:
        return "min-full";
    }
    return "";
}

SDistortionFunction indicator_g(IndicatorG kind)
{
    const auto full = [](double v) { return v >= 1.0 - kJumpTolerance; };
    SDistortionFunction::Evaluator eval;
    switch (kind) {
    case IndicatorG::max_positive:
        eval = [](std::span<const double> x) { return (x[0] > 0.0 || x[1] > 0.0) ? 1.0 : 0.0; };
        break;
    case IndicatorG::min_positive:
        eval = [](std::span<const double> x) { return (x[0] > 0.0 && x[1] > 0.0) ? 1.0 : 0.0; };
        break;
    case IndicatorG::max_full:
        eval = [full](std::span<const double> x) { return (full(x[0]) || full(x[1])) ? 1.0 : 0.0; };
        break;
    case IndicatorG::min_full:
        eval = [full](std::span<const double> x) { return (full(x[0]) && full(x[1])) ? 1.0 : 0.0; };
        break;
    }
    return SDistortionFunction::custom(std::move(eval), 2, std::string(indicator_g_name(kind)),
                                       Continuity::discontinuous);
}

} // namespace chorate
