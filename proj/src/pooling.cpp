#include "chorate/pooling.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "chorate/errors.hpp"
#include "chorate/parallel.hpp"
#include "chorate/random.hpp"

namespace chorate {

namespace {

void check_attachment(double attachment)
{
    if (!(attachment >= 0.0 && attachment < 1.0)) {
        throw ValidationError(fmt::format("attachment {} outside [0, 1)", attachment));
    }
}

void check_ell(int ell, const char* what)
{
    if (ell < 1) {
        throw ValidationError(fmt::format("{} must be at least 1, got {}", what, ell));
    }
}

double tranche_value(double average, double attachment) noexcept
{
    const double excess = average - attachment;
    if (!(excess > 0.0)) {
        return 0.0;
    }
    return std::min(1.0, excess / (1.0 - attachment));
}

} // namespace

MixingLaw MixingLaw::discrete(std::vector<Node> nodes)
{
    if (nodes.empty()) {
        throw ValidationError("mixing law: at least one node required");
    }
    std::vector<double> weights;
    weights.reserve(nodes.size());
    for (const auto& n : nodes) {
        if (!std::isfinite(n.z)) {
            throw ValidationError("mixing law: non-finite node");
        }
        weights.push_back(n.weight);
    }
    validate_probability_vector(weights, "mixing law weights");
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.z < b.z; });
    MixingLaw law;
    for (const auto& n : nodes) {
        if (n.weight == 0.0) {
            continue;
        }
        if (!law.nodes_.empty() && n.z - law.nodes_.back().z <= kMergeTolerance) {
            law.nodes_.back().weight += n.weight;
        } else {
            law.nodes_.push_back(n);
        }
    }
    law.lo_ = law.nodes_.front().z;
    law.hi_ = law.nodes_.back().z;
    return law;
}

MixingLaw MixingLaw::uniform(double lo, double hi)
{
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        throw ValidationError(fmt::format("mixing law: uniform needs lo < hi, got [{}, {}]", lo, hi));
    }
    MixingLaw law;
    law.uniform_ = true;
    law.lo_ = lo;
    law.hi_ = hi;
    return law;
}

double MixingLaw::lo() const noexcept { return lo_; }
double MixingLaw::hi() const noexcept { return hi_; }

std::vector<MixingLaw::Node> MixingLaw::nodes(int count) const
{
    if (!uniform_) {
        return nodes_;
    }
    if (count < 1) {
        throw ValidationError(fmt::format("z_nodes must be positive, got {}", count));
    }
    std::vector<Node> out;
    out.reserve(static_cast<std::size_t>(count));
    const double w = 1.0 / count;
    for (int k = 0; k < count; ++k) {
        out.push_back({lo_ + (hi_ - lo_) * (k + 0.5) / count, w});
    }
    return out;
}

double MixingLaw::sample(double u) const noexcept
{
    if (uniform_) {
        return lo_ + (hi_ - lo_) * u;
    }
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        cum += nodes_[i].weight;
        if (u <= cum) {
            return nodes_[i].z;
        }
    }
    return nodes_.back().z;
}

ConditionalLaw ConditionalLaw::beta_one() { return ConditionalLaw(ConditionalFamily::beta_one); }
ConditionalLaw ConditionalLaw::bernoulli() { return ConditionalLaw(ConditionalFamily::bernoulli); }

ConditionalLaw ConditionalLaw::table(std::vector<std::pair<double, DiscreteLoss>> by_z)
{
    if (by_z.empty()) {
        throw ValidationError("conditional table: at least one entry required");
    }
    std::sort(by_z.begin(), by_z.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < by_z.size(); ++i) {
        if (!by_z[i].second.in_unit_interval()) {
            throw ValidationError("conditional table: losses must lie in [0, 1]");
        }
        if (i > 0 && by_z[i].first - by_z[i - 1].first <= kMergeTolerance) {
            throw ValidationError(fmt::format("conditional table: duplicate z {}", by_z[i].first));
        }
    }
    ConditionalLaw law(ConditionalFamily::table);
    law.table_ = std::move(by_z);
    return law;
}

const DiscreteLoss& ConditionalLaw::lookup(double z) const
{
    const auto it = std::lower_bound(table_.begin(), table_.end(), z - kMergeTolerance,
                                     [](const auto& entry, double v) { return entry.first < v; });
    if (it == table_.end() || std::abs(it->first - z) > kMergeTolerance) {
        throw ValidationError(fmt::format("conditional table has no entry for z = {}", z));
    }
    return it->second;
}

void ConditionalLaw::check_parameter(double z) const
{
    switch (family_) {
    case ConditionalFamily::beta_one:
        if (!(z > 0.0 && std::isfinite(z))) {
            throw ValidationError(fmt::format("beta_one conditional needs z > 0, got {}", z));
        }
        break;
    case ConditionalFamily::bernoulli:
        if (!(z >= 0.0 && z <= 1.0)) {
            throw ValidationError(fmt::format("bernoulli conditional needs z in [0, 1], got {}", z));
        }
        break;
    case ConditionalFamily::table:
        (void)lookup(z);
        break;
    }
}

DiscreteLoss ConditionalLaw::exact(double z) const
{
    check_parameter(z);
    switch (family_) {
    case ConditionalFamily::bernoulli:
        return DiscreteLoss::bernoulli(z);
    case ConditionalFamily::table:
        return lookup(z);
    case ConditionalFamily::beta_one:
        break;
    }
    throw ValidationError("exact mode requires a discrete conditional family");
}

double ConditionalLaw::sample(double z, double u) const
{
    switch (family_) {
    case ConditionalFamily::beta_one:
        return std::pow(u, 1.0 / z);
    case ConditionalFamily::bernoulli:
        return u > 1.0 - z ? 1.0 : 0.0;
    case ConditionalFamily::table: {
        const DiscreteLoss& d = lookup(z);
        for (std::size_t i = 0; i + 1 < d.size(); ++i) {
            if (u <= d.cdf_at(i)) {
                return d.atoms()[i].value;
            }
        }
        return d.max_value();
    }
    }
    return 0.0;
}

void PoolModel::validate() const
{
    if (mixing.empty()) {
        throw ValidationError("pool model: at least one scenario required");
    }
    if (scenario_weights.size() != mixing.size()) {
        throw ValidationError(fmt::format("pool model: {} scenarios but {} weights", mixing.size(),
                                          scenario_weights.size()));
    }
    validate_probability_vector(scenario_weights, "scenario weights");
    for (const auto& m : mixing) {
        if (m.is_discrete()) {
            for (const auto& n : m.discrete_nodes()) {
                conditional.check_parameter(n.z);
            }
        } else {
            if (conditional.family() == ConditionalFamily::table) {
                throw ValidationError("pool model: a tabulated conditional needs a discrete mixing law");
            }
            conditional.check_parameter(m.lo() > 0.0 ? m.lo() : m.hi());
            conditional.check_parameter(m.hi());
            if (conditional.family() == ConditionalFamily::beta_one && !(m.lo() >= 0.0)) {
                throw ValidationError("pool model: beta_one mixing range must be non-negative");
            }
        }
    }
}

void SimConfig::validate() const
{
    if (paths < 2) {
        throw ValidationError(fmt::format("paths must be at least 2, got {}", paths));
    }
    if (paths > 0xffffffffULL) {
        throw ValidationError("paths exceeds 2^32 - 1");
    }
    if (z_nodes < 1) {
        throw ValidationError(fmt::format("z_nodes must be positive, got {}", z_nodes));
    }
    if (batches < 2 || static_cast<std::size_t>(batches) > paths) {
        throw ValidationError(fmt::format("batches must lie in [2, paths], got {}", batches));
    }
}

ScenarioLoss pool_dist(const PoolModel& model, int ell, double attachment, const SimConfig& cfg,
                       PoolMode mode)
{
    model.validate();
    cfg.validate();
    check_ell(ell, "pool size");
    check_attachment(attachment);
    if (mode == PoolMode::mc) {
        return PoolSimulation(model, ell, attachment, cfg).law(ell);
    }
    if (!model.conditional.is_discrete()) {
        throw ValidationError("exact mode requires a discrete conditional family");
    }
    std::vector<DiscreteLoss> laws;
    laws.reserve(model.scenarios());
    for (const auto& m : model.mixing) {
        std::vector<std::pair<DiscreteLoss, double>> parts;
        for (const auto& n : m.nodes(cfg.z_nodes)) {
            const DiscreteLoss pooled =
                pool_average_exact(model.conditional.exact(n.z), ell, cfg.explosion_limit);
            parts.emplace_back(tranche(pooled, attachment), n.weight);
        }
        laws.push_back(mixture(parts));
    }
    return ScenarioLoss(std::move(laws), model.scenario_weights);
}

PoolSimulation::PoolSimulation(const PoolModel& model, int ell_max, double attachment, const SimConfig& cfg)
    : ell_max_(ell_max), paths_(cfg.paths), batches_(cfg.batches), scenario_weights_(model.scenario_weights)
{
    model.validate();
    cfg.validate();
    check_ell(ell_max, "ell_max");
    check_attachment(attachment);
    const auto ell_count = static_cast<std::size_t>(ell_max);
    values_.resize(model.scenarios());
    for (std::size_t s = 0; s < model.scenarios(); ++s) {
        const StratifiedUniforms u(paths_, ell_count + 1, stream_key(cfg.seed, s));
        const MixingLaw& mixing = model.mixing[s];
        auto& out = values_[s];
        out.assign(ell_count * paths_, 0.0);
        parallel_for(
            paths_,
            [&](std::size_t begin, std::size_t end) {
                for (std::size_t path = begin; path < end; ++path) {
                    const double z = mixing.sample(u(0, path));
                    double sum = 0.0;
                    for (std::size_t k = 1; k <= ell_count; ++k) {
                        sum += model.conditional.sample(z, u(k, path));
                        out[(k - 1) * paths_ + path] = tranche_value(sum / static_cast<double>(k), attachment);
                    }
                }
            },
            cfg.threads);
    }
}

ScenarioLoss PoolSimulation::law_of_range(int ell, std::size_t begin, std::size_t end) const
{
    if (ell < 1 || ell > ell_max_) {
        throw ValidationError(fmt::format("pool size {} outside [1, {}]", ell, ell_max_));
    }
    std::vector<DiscreteLoss> laws;
    laws.reserve(values_.size());
    const std::size_t offset = static_cast<std::size_t>(ell - 1) * paths_;
    for (const auto& v : values_) {
        laws.push_back(DiscreteLoss::empirical(std::span<const double>(v.data() + offset + begin, end - begin)));
    }
    return ScenarioLoss(std::move(laws), scenario_weights_);
}

ScenarioLoss PoolSimulation::law(int ell) const { return law_of_range(ell, 0, paths_); }

ScenarioLoss PoolSimulation::batch_law(int ell, int batch) const
{
    if (batch < 0 || batch >= batches_) {
        throw ValidationError(fmt::format("batch {} outside [0, {})", batch, batches_));
    }
    const auto b = static_cast<std::size_t>(batch);
    const auto n = static_cast<std::size_t>(batches_);
    return law_of_range(ell, b * paths_ / n, (b + 1) * paths_ / n);
}

std::vector<std::vector<CurvePoint>> pe_curves(std::span<const RiskFunctional> criteria,
                                               std::span<const RatingLadder* const> ladders,
                                               const PoolModel& model, int ell_max, double attachment,
                                               const SimConfig& cfg, PoolMode mode)
{
    if (!ladders.empty() && ladders.size() != criteria.size()) {
        throw ValidationError("pe_curves: one ladder slot per criterion required");
    }
    model.validate();
    cfg.validate();
    check_ell(ell_max, "ell_max");
    check_attachment(attachment);

    std::vector<std::vector<CurvePoint>> curves(criteria.size());
    auto record = [&](std::size_t c, int ell, double value, double se) {
        const RatingLadder* ladder = ladders.empty() ? nullptr : ladders[c];
        curves[c].push_back({ell, value, se, ladder != nullptr ? ladder->rate(value) : std::string{}});
    };

    if (mode == PoolMode::exact) {
        for (int ell = 1; ell <= ell_max; ++ell) {
            const ScenarioLoss sl = pool_dist(model, ell, attachment, cfg, PoolMode::exact);
            for (std::size_t c = 0; c < criteria.size(); ++c) {
                record(c, ell, criteria[c](sl), 0.0);
            }
        }
        return curves;
    }

    const PoolSimulation sim(model, ell_max, attachment, cfg);
    const int nb = sim.batches();
    std::vector<double> batch_values(static_cast<std::size_t>(nb) * criteria.size());
    for (int ell = 1; ell <= ell_max; ++ell) {
        const ScenarioLoss sl = sim.law(ell);
        for (int b = 0; b < nb; ++b) {
            const ScenarioLoss bl = sim.batch_law(ell, b);
            for (std::size_t c = 0; c < criteria.size(); ++c) {
                batch_values[c * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b)] = criteria[c](bl);
            }
        }
        for (std::size_t c = 0; c < criteria.size(); ++c) {
            const double* bv = batch_values.data() + c * static_cast<std::size_t>(nb);
            double m = 0.0;
            for (int b = 0; b < nb; ++b) {
                m += bv[b];
            }
            m /= nb;
            double ss = 0.0;
            for (int b = 0; b < nb; ++b) {
                ss += (bv[b] - m) * (bv[b] - m);
            }
            const double se = std::sqrt(ss / (nb - 1) / nb);
            record(c, ell, criteria[c](sl), se);
        }
    }
    return curves;
}

std::vector<CurvePoint> pe_curve(const RiskFunctional& criterion, const PoolModel& model, int ell_max,
                                 double attachment, const SimConfig& cfg, PoolMode mode,
                                 const RatingLadder* ladder)
{
    const RatingLadder* ladders[] = {ladder};
    return pe_curves(std::span<const RiskFunctional>(&criterion, 1), ladders, model, ell_max, attachment,
                     cfg, mode)
        .front();
}

std::vector<CurvePoint> pe_curve(const RatingCriterion& criterion, const PoolModel& model, int ell_max,
                                 double attachment, const SimConfig& cfg, PoolMode mode)
{
    return pe_curve(RiskFunctional(criterion.measure), model, ell_max, attachment, cfg, mode,
                    &criterion.ladder);
}

bool is_monotone_decreasing(std::span<const double> seq, double tol)
{
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i] > seq[i - 1] + tol) {
            return false;
        }
    }
    return true;
}

} // namespace chorate
