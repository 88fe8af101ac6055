#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chorate/choquet.hpp"

namespace chorate {

/// The step function from risk values in [0,1] to ordered rating labels.
/// uppers[i] is the inclusive upper bound of labels[i]; the last label catches
/// everything above the last bound.
class RatingLadder {
public:
    RatingLadder(std::string name, std::vector<std::string> labels, std::vector<double> uppers);

    const std::string& name() const noexcept { return name_; }
    std::span<const std::string> labels() const noexcept { return labels_; }
    std::span<const double> uppers() const noexcept { return uppers_; }
    const std::string& best() const noexcept { return labels_.front(); }
    const std::string& worst() const noexcept { return labels_.back(); }

    /// 0 for the best category, labels().size() - 1 for the catch-all.
    std::size_t category(double value) const;
    const std::string& rate(double value) const { return labels_[category(value)]; }

    friend bool operator==(const RatingLadder&, const RatingLadder&) = default;

private:
    std::string name_;
    std::vector<std::string> labels_;
    std::vector<double> uppers_;
};

inline const std::string& rate(double value, const RatingLadder& ladder)
{
    return ladder.rate(value);
}

/// Embedded threshold tables: clo_avg_el, clo_avg_es, clo_avg_maxvar, clo_avg_var,
/// clo_max_var, clo_avg_pd (Aaa..B3 plus Caa catch-all) and cat_el, cat_es,
/// cat_maxvar, cat_pd (Baa, Ba, B plus Caa catch-all).
RatingLadder builtin_ladder(std::string_view name);
std::vector<std::string> builtin_ladder_names();

/// Scales every bound by crit_value / el_value, keeping labels.
RatingLadder calibrate_ladder(const RatingLadder& el_ladder, double crit_value, double el_value,
                              std::string name = {});

/// A measure paired with the ladder that turns its values into ratings.
struct RatingCriterion {
    Measure measure;
    RatingLadder ladder;

    const std::string& rate(const ScenarioLoss& sl) const { return ladder.rate(measure_value(measure, sl)); }
};

} // namespace chorate
