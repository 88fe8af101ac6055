#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chorate/choquet.hpp"
#include "chorate/discrete_loss.hpp"
#include "chorate/rating.hpp"

namespace chorate {

/// Law of the common factor Z within one scenario.
class MixingLaw {
public:
    struct Node {
        double z;
        double weight;
    };

    static MixingLaw discrete(std::vector<Node> nodes);
    static MixingLaw uniform(double lo, double hi);

    bool is_discrete() const noexcept { return !uniform_; }
    double lo() const noexcept;
    double hi() const noexcept;
    /// Discrete nodes as given, or `count` equal-weight midpoints for a uniform law.
    std::vector<Node> nodes(int count) const;
    /// Inverse-CDF draw from u in (0, 1).
    double sample(double u) const noexcept;
    std::span<const Node> discrete_nodes() const noexcept { return nodes_; }

private:
    std::vector<Node> nodes_;  // sorted by z
    bool uniform_ = false;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

enum class ConditionalFamily { beta_one, bernoulli, table };

/// Law of one asset's loss given Z = z.
class ConditionalLaw {
public:
    /// L = U^{1/z}, i.e. Beta(z, 1); z > 0.
    static ConditionalLaw beta_one();
    /// L ~ Bernoulli(z); z in [0, 1].
    static ConditionalLaw bernoulli();
    /// Explicit law per z value.
    static ConditionalLaw table(std::vector<std::pair<double, DiscreteLoss>> by_z);

    ConditionalFamily family() const noexcept { return family_; }
    bool is_discrete() const noexcept { return family_ != ConditionalFamily::beta_one; }
    void check_parameter(double z) const;
    DiscreteLoss exact(double z) const;
    double sample(double z, double u) const;
    std::span<const std::pair<double, DiscreteLoss>> table_entries() const noexcept { return table_; }

private:
    explicit ConditionalLaw(ConditionalFamily family) : family_(family) {}
    const DiscreteLoss& lookup(double z) const;

    ConditionalFamily family_;
    std::vector<std::pair<double, DiscreteLoss>> table_;
};

/// A conditionally iid pool under each scenario.
struct PoolModel {
    ConditionalLaw conditional;
    std::vector<MixingLaw> mixing;  // one per scenario
    std::vector<double> scenario_weights;

    void validate() const;
    std::size_t scenarios() const noexcept { return mixing.size(); }
};

struct SimConfig {
    std::size_t paths = 100'000;
    std::uint64_t seed = 42;
    int z_nodes = 64;
    std::size_t threads = 0;  // 0: CHORATE_THREADS or hardware concurrency
    int batches = 20;         // batch-means blocks for standard errors
    std::size_t explosion_limit = kDefaultExplosionLimit;

    void validate() const;
};

enum class PoolMode { exact, mc };

/// Pooled senior-tranche law (L^(ell) - K)+ / (1 - K) under every scenario.
ScenarioLoss pool_dist(const PoolModel& model, int ell, double attachment, const SimConfig& cfg,
                       PoolMode mode);

/// Monte Carlo pool paths for ell = 1..ell_max with common random numbers: pool
/// size ell uses the first ell asset draws of every path. Inputs are Latin-hypercube
/// stratified per (scenario, dimension).
class PoolSimulation {
public:
    PoolSimulation(const PoolModel& model, int ell_max, double attachment, const SimConfig& cfg);

    int ell_max() const noexcept { return ell_max_; }
    std::size_t paths() const noexcept { return paths_; }
    int batches() const noexcept { return batches_; }
    ScenarioLoss law(int ell) const;
    /// Law of the paths in block `batch` of `batches()` contiguous blocks.
    ScenarioLoss batch_law(int ell, int batch) const;

private:
    ScenarioLoss law_of_range(int ell, std::size_t begin, std::size_t end) const;

    int ell_max_;
    std::size_t paths_;
    int batches_;
    std::vector<double> scenario_weights_;
    std::vector<std::vector<double>> values_;  // [scenario][(ell - 1) * paths + path]
};

struct CurvePoint {
    int ell;
    double value;
    double std_error;  // batch-means estimate; 0 in exact mode
    std::string label; // empty when no ladder is attached
};

/// Value of the criterion on the pooled tranche for ell = 1..ell_max.
std::vector<CurvePoint> pe_curve(const RiskFunctional& criterion, const PoolModel& model, int ell_max,
                                 double attachment, const SimConfig& cfg, PoolMode mode,
                                 const RatingLadder* ladder = nullptr);
std::vector<CurvePoint> pe_curve(const RatingCriterion& criterion, const PoolModel& model, int ell_max,
                                 double attachment, const SimConfig& cfg, PoolMode mode);

/// Curves for several criteria over one shared simulation (mc) or exact laws.
std::vector<std::vector<CurvePoint>> pe_curves(std::span<const RiskFunctional> criteria,
                                               std::span<const RatingLadder* const> ladders,
                                               const PoolModel& model, int ell_max, double attachment,
                                               const SimConfig& cfg, PoolMode mode);

/// True iff every value is at most the previous one plus tol.
bool is_monotone_decreasing(std::span<const double> seq, double tol);

} // namespace chorate
