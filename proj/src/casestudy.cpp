#include "chorate/casestudy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "chorate/errors.hpp"
#include "chorate/parallel.hpp"
#include "chorate/random.hpp"

namespace chorate {

namespace {

constexpr std::uint64_t kCatStreamTag = 0x6361742d626f6e64ULL;
constexpr int kMaxBracketExpansions = 30;

const boost::math::normal& standard_normal()
{
    static const boost::math::normal n(0.0, 1.0);
    return n;
}

struct Estimate {
    double value;
    double std_error;
};

// Full-sample value plus a batch-means standard error over contiguous blocks.
template <typename Fn>
Estimate batch_estimate(std::span<const double> paths, int batches, Fn&& fn)
{
    const double value = fn(DiscreteLoss::empirical(paths));
    const auto n = paths.size();
    const auto nb = static_cast<std::size_t>(batches);
    std::vector<double> bv(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * n / nb;
        const std::size_t hi = (b + 1) * n / nb;
        bv[b] = fn(DiscreteLoss::empirical(paths.subspan(lo, hi - lo)));
    }
    double m = 0.0;
    for (double v : bv) {
        m += v;
    }
    m /= static_cast<double>(nb);
    double ss = 0.0;
    for (double v : bv) {
        ss += (v - m) * (v - m);
    }
    return {value, std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb))};
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view s, std::size_t line_no)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError(fmt::format("line {}: cannot parse number '{}'", line_no, s));
    }
    return v;
}

} // namespace

void LognormalFit::validate() const
{
    if (!(sigma > 0.0 && std::isfinite(sigma)) || !std::isfinite(mu)) {
        throw ValidationError(fmt::format("lognormal fit: need finite mu and sigma > 0, got ({}, {})", mu, sigma));
    }
    if (n < 2) {
        throw ValidationError(fmt::format("lognormal fit: at least two samples required, got {}", n));
    }
}

LognormalFit fit_lognormal(std::span<const double> samples)
{
    if (samples.size() < 2) {
        throw ValidationError(fmt::format("fit_lognormal: at least two samples required, got {}", samples.size()));
    }
    double sum = 0.0;
    for (double x : samples) {
        if (!(x > 0.0 && std::isfinite(x))) {
            throw ValidationError(fmt::format("fit_lognormal: sample {} is not a positive finite value", x));
        }
        sum += std::log(x);
    }
    const double n = static_cast<double>(samples.size());
    const double mu = sum / n;
    double ss = 0.0;
    for (double x : samples) {
        const double d = std::log(x) - mu;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / n);
    if (!(sigma > 0.0)) {
        throw ValidationError("fit_lognormal: degenerate sample (all values equal)");
    }
    return {mu, sigma, samples.size(), 0.0, 1.0};
}

void CatBondSpec::validate() const
{
    if (!(attach > 0.0 && detach > attach && std::isfinite(detach))) {
        throw ValidationError(
            fmt::format("cat bond '{}': need 0 < attach < detach, got ({}, {})", state, attach, detach));
    }
}

double lognormal_lev(double mu, double sigma, double x)
{
    if (!(x > 0.0)) {
        return 0.0;
    }
    const auto& phi = standard_normal();
    const double lx = std::log(x);
    return std::exp(mu + 0.5 * sigma * sigma) * boost::math::cdf(phi, (lx - mu - sigma * sigma) / sigma) +
           x * boost::math::cdf(boost::math::complement(phi, (lx - mu) / sigma));
}

CatBondSpec calibrate_catbond(const LognormalFit& fit, double pd_target, double el_target, std::string state)
{
    fit.validate();
    if (!(el_target > 0.0 && el_target < pd_target && pd_target < 1.0)) {
        throw ValidationError(fmt::format("calibrate_catbond: need 0 < el_target < pd_target < 1, got el={} pd={}",
                                          el_target, pd_target));
    }
    const double z = boost::math::quantile(standard_normal(), 1.0 - pd_target);
    const double attach = std::exp(fit.mu + z * fit.sigma);
    const double lev_attach = lognormal_lev(fit.mu, fit.sigma, attach);
    const auto excess = [&](double d) {
        return (lognormal_lev(fit.mu, fit.sigma, d) - lev_attach) / (d - attach) - el_target;
    };

    const double lo = attach * (1.0 + 1e-6);
    double hi = attach * 1e3;
    int expansions = 0;
    while (excess(hi) > 0.0) {
        if (++expansions > kMaxBracketExpansions) {
            throw ValidationError("calibrate_catbond: no sign change found for the detachment point");
        }
        hi *= 10.0;
    }
    if (!(excess(lo) > 0.0)) {
        throw ValidationError("calibrate_catbond: no sign change found for the detachment point");
    }
    const auto [a, b] = boost::math::tools::bisect(
        excess, lo, hi, [](double x, double y) { return std::abs(y - x) <= 1e-8 * std::abs(x); });
    return {std::move(state), attach, 0.5 * (a + b)};
}

std::vector<double> catbond_paths(const LognormalFit& fit, const CatBondSpec& spec, const SimConfig& cfg,
                                  std::uint64_t stream)
{
    fit.validate();
    spec.validate();
    cfg.validate();
    const StratifiedUniforms u(cfg.paths, 1, stream_key(cfg.seed, kCatStreamTag, stream));
    const double width = spec.detach - spec.attach;
    std::vector<double> out(cfg.paths);
    parallel_for(
        cfg.paths,
        [&](std::size_t begin, std::size_t end) {
            const auto& phi = standard_normal();
            for (std::size_t i = begin; i < end; ++i) {
                const double loss = std::exp(fit.mu + fit.sigma * boost::math::quantile(phi, u(0, i)));
                out[i] = std::clamp((loss - spec.attach) / width, 0.0, 1.0);
            }
        },
        cfg.threads);
    return out;
}

DiscreteLoss catbond_loss(const LognormalFit& fit, const CatBondSpec& spec, const SimConfig& cfg,
                          std::uint64_t stream)
{
    return DiscreteLoss::empirical(catbond_paths(fit, spec, cfg, stream));
}

const StateSamples& CatData::find(const std::string& state) const
{
    for (const auto& s : states) {
        if (s.state == state) {
            return s;
        }
    }
    throw ValidationError(fmt::format("state '{}' not present in the data", state));
}

CatData read_cat_csv(std::istream& in, std::ostream* warnings, double scale, double shift)
{
    if (!(scale > 0.0 && std::isfinite(scale) && std::isfinite(shift))) {
        throw ValidationError("read_cat_csv: scale must be positive and shift finite");
    }
    CatData data;
    data.scale = scale;
    data.shift = shift;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "state" || fields[1] != "year" || fields[2] != "loss") {
                throw ValidationError(fmt::format("line {}: expected header 'state,year,loss'", line_no));
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3 || fields[0].empty()) {
            throw ValidationError(fmt::format("line {}: expected 3 fields 'state,year,loss'", line_no));
        }
        (void)parse_double(fields[1], line_no);
        const double value = parse_double(fields[2], line_no) * scale + shift;
        if (!(value > 0.0)) {
            ++data.dropped;
            if (warnings != nullptr) {
                *warnings << fmt::format("warning: line {}: non-positive loss after shift dropped\n", line_no);
            }
            continue;
        }
        const std::string state(fields[0]);
        auto it = std::find_if(data.states.begin(), data.states.end(),
                               [&](const StateSamples& s) { return s.state == state; });
        if (it == data.states.end()) {
            data.states.push_back({state, {}});
            it = data.states.end() - 1;
        }
        it->losses.push_back(value);
    }
    if (!header_seen) {
        throw ValidationError("cat data: empty input, header 'state,year,loss' required");
    }
    return data;
}

std::vector<StateFit> builtin_cat_fits()
{
    const auto fit = [](double mu, double sigma) { return LognormalFit{mu, sigma, 2, 0.01, 1e-6}; };
    return {
        {"Kansas", fit(-0.69, 1.03)},    {"Michigan", fit(-0.51, 1.48)}, {"Indiana", fit(-1.02, 1.67)},
        {"Minnesota", fit(-1.26, 1.60)}, {"Kentucky", fit(-2.04, 1.65)},
    };
}

std::vector<StateFit> fit_states(const CatData& data, std::span<const std::string> order)
{
    std::vector<StateFit> fits;
    for (const auto& state : order) {
        const auto& samples = data.find(state);
        LognormalFit f = fit_lognormal(samples.losses);
        f.shift = data.shift;
        f.scale = data.scale;
        fits.push_back({state, f});
    }
    return fits;
}

CatStudyResult cat_study(std::span<const StateFit> states, const SimConfig& cfg, const CatStudyOptions& opts)
{
    if (states.empty()) {
        throw ValidationError("cat_study: at least one state required");
    }
    cfg.validate();
    const Measure es = Measure::avg_es(opts.es_p);
    const Measure maxvar = Measure::avg_maxvar(opts.maxvar_gamma);
    es.validate();
    maxvar.validate();

    const RatingLadder el_ladder = builtin_ladder("cat_el");
    const RatingLadder es_ladder = builtin_ladder("cat_es");
    const RatingLadder maxvar_ladder = builtin_ladder("cat_maxvar");
    const RatingLadder pd_ladder = builtin_ladder("cat_pd");

    CatStudyResult result;
    result.fits.assign(states.begin(), states.end());
    std::vector<double> pooled(cfg.paths, 0.0);
    std::vector<double> average(cfg.paths);
    for (std::size_t s = 0; s < states.size(); ++s) {
        const CatBondSpec spec =
            calibrate_catbond(states[s].fit, opts.pd_target, opts.el_target, states[s].state);
        result.specs.push_back(spec);
        const auto paths = catbond_paths(states[s].fit, spec, cfg, s);
        const double m = static_cast<double>(s + 1);
        for (std::size_t i = 0; i < cfg.paths; ++i) {
            pooled[i] += paths[i];
            average[i] = pooled[i] / m;
        }
        const int key = static_cast<int>(s + 1);
        const auto add = [&](std::string name, const RatingLadder& ladder, auto&& fn) {
            const Estimate e = batch_estimate(average, cfg.batches, fn);
            result.rows.push_back({key, std::move(name), e.value, e.std_error, ladder.rate(e.value)});
        };
        add("el", el_ladder, [](const DiscreteLoss& d) { return mean(d); });
        add(fmt::format("es(p={})", opts.es_p), es_ladder,
            [&](const DiscreteLoss& d) { return expected_shortfall(d, opts.es_p); });
        add(fmt::format("maxvar(gamma={})", opts.maxvar_gamma), maxvar_ladder,
            [&](const DiscreteLoss& d) { return power_distortion_value(d, opts.maxvar_gamma); });
        add("pd", pd_ladder, [](const DiscreteLoss& d) { return survival(d, 0.0); });
    }
    return result;
}

PoolModel clo_model()
{
    return PoolModel{ConditionalLaw::beta_one(),
                     {MixingLaw::uniform(0.007, 0.009), MixingLaw::uniform(0.1, 0.15)},
                     {0.5, 0.5}};
}

std::vector<StudyRow> clo_study(const SimConfig& cfg, int ell_max)
{
    const std::vector<RiskFunctional> criteria{Measure::avg_el(),      Measure::avg_es(0.9),
                                               Measure::avg_maxvar(0.3), Measure::avg_var(0.8),
                                               Measure::max_var(0.8),  Measure::avg_pd()};
    std::vector<RatingLadder> ladders;
    for (const auto& c : criteria) {
        ladders.push_back(builtin_ladder(fmt::format("clo_{}", c.measure()->kind_name())));
    }
    std::vector<const RatingLadder*> ladder_ptrs;
    for (const auto& l : ladders) {
        ladder_ptrs.push_back(&l);
    }
    const auto curves =
        pe_curves(criteria, ladder_ptrs, clo_model(), ell_max, kCloAttachment, cfg, PoolMode::mc);
    std::vector<StudyRow> rows;
    for (int ell = 1; ell <= ell_max; ++ell) {
        for (std::size_t c = 0; c < criteria.size(); ++c) {
            const auto& p = curves[c][static_cast<std::size_t>(ell - 1)];
            rows.push_back({ell, criteria[c].name(), p.value, p.std_error, p.label});
        }
    }
    return rows;
}

} // namespace chorate
