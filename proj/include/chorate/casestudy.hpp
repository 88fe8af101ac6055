#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chorate/discrete_loss.hpp"
#include "chorate/pooling.hpp"
#include "chorate/rating.hpp"

namespace chorate {

/// Lognormal fitted to (x * scale + shift); mu and sigma are the MLE on logs.
struct LognormalFit {
    double mu = 0.0;
    double sigma = 1.0;
    std::size_t n = 0;
    double shift = 0.0;
    double scale = 1.0;

    void validate() const;
};

/// Maximum-likelihood fit (1/n variance) to positive samples.
LognormalFit fit_lognormal(std::span<const double> samples);

struct CatBondSpec {
    std::string state;
    double attach = 0.0;
    double detach = 0.0;

    void validate() const;
};

/// Lognormal limited expected value E[min(L, x)].
double lognormal_lev(double mu, double sigma, double x);

/// Attachment at the (1 - pd_target) quantile; detachment solving
/// E[min((L - A)+, D - A)] / (D - A) = el_target.
CatBondSpec calibrate_catbond(const LognormalFit& fit, double pd_target = 0.10, double el_target = 0.025,
                              std::string state = {});

/// Normalized layer losses min((L - A)+, D - A) / (D - A) for cfg.paths stratified
/// draws of the fitted lognormal, in path order. `stream` selects the random stream.
std::vector<double> catbond_paths(const LognormalFit& fit, const CatBondSpec& spec, const SimConfig& cfg,
                                  std::uint64_t stream = 0);
DiscreteLoss catbond_loss(const LognormalFit& fit, const CatBondSpec& spec, const SimConfig& cfg,
                          std::uint64_t stream = 0);

/// Raw per-state losses as read from a `state,year,loss` CSV, after the unit
/// rescale and shift; states appear in order of first occurrence.
struct StateSamples {
    std::string state;
    std::vector<double> losses;
};

struct CatData {
    std::vector<StateSamples> states;
    double scale = 1e-6;
    double shift = 0.01;
    std::size_t dropped = 0;

    const StateSamples& find(const std::string& state) const;
};

/// Parses the CSV; rows whose transformed loss is not positive are dropped with a
/// note on `warnings` (if given).
CatData read_cat_csv(std::istream& in, std::ostream* warnings = nullptr, double scale = 1e-6,
                     double shift = 0.01);

struct StateFit {
    std::string state;
    LognormalFit fit;
};

/// Fitted parameters reported for Kansas, Michigan, Indiana, Minnesota, Kentucky.
std::vector<StateFit> builtin_cat_fits();
std::vector<StateFit> fit_states(const CatData& data, std::span<const std::string> order);

struct StudyRow {
    int key;  // ell for the CLO study, m for the CAT study
    std::string criterion;
    double value;
    double std_error;
    std::string rating;
};

struct CatStudyOptions {
    double pd_target = 0.10;
    double el_target = 0.025;
    double es_p = 0.9;
    double maxvar_gamma = 0.8;
};

struct CatStudyResult {
    std::vector<StateFit> fits;
    std::vector<CatBondSpec> specs;
    std::vector<StudyRow> rows;  // m-major; criteria el, es, maxvar, pd
};

/// Pools the first m states (m = 1..n) with attachment 0: the pooled loss is the
/// path-wise average of the states' layer losses, each state on its own stream and
/// reused across m.
CatStudyResult cat_study(std::span<const StateFit> states, const SimConfig& cfg,
                         const CatStudyOptions& opts = {});

/// The two-scenario CLO pool: Beta(Z, 1) assets with Z ~ U(0.007, 0.009) or
/// U(0.1, 0.15), equally weighted.
PoolModel clo_model();
inline constexpr double kCloAttachment = 0.1;

/// Six criteria (avg_el, avg_es 0.9, avg_maxvar 0.3, avg_var 0.8, max_var 0.8,
/// avg_pd) rated under the clo_* ladders for ell = 1..ell_max; ell-major rows.
std::vector<StudyRow> clo_study(const SimConfig& cfg, int ell_max = 50);

} // namespace chorate
