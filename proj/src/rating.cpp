#include "chorate/rating.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "chorate/errors.hpp"

namespace chorate {

namespace {

const std::vector<std::string>& clo_labels()
{
    static const std::vector<std::string> labels{"Aaa", "Aa1", "Aa2", "Aa3", "A1",  "A2",
                                                 "A3",  "Baa1", "Baa2", "Baa3", "Ba1", "Ba2",
                                                 "Ba3", "B1",  "B2",  "B3",  "Caa"};
    return labels;
}

const std::vector<std::string>& cat_labels()
{
    static const std::vector<std::string> labels{"Baa", "Ba", "B", "Caa"};
    return labels;
}

struct LadderColumn {
    std::string_view name;
    bool clo;
    std::vector<double> uppers;
};

// Upper bounds per rating category. CLO columns: Average EL from the idealized
// loss-rate table, the others scaled to give a single-asset Ba2.
const std::vector<LadderColumn>& columns()
{
    static const std::vector<LadderColumn> table{
        {"clo_avg_el", true,
         {0.000016, 0.000171, 0.000374, 0.000781, 0.001436, 0.002569, 0.004015, 0.006050, 0.008690,
          0.016775, 0.029040, 0.046255, 0.065230, 0.088660, 0.113905, 0.148775}},
        {"clo_avg_es", true,
         {0.000102, 0.001092, 0.002389, 0.004988, 0.009172, 0.016408, 0.025644, 0.038642, 0.055504,
          0.107144, 0.185482, 0.295436, 0.416631, 0.566281, 0.727523, 0.950242}},
        {"clo_avg_maxvar", true,
         {0.000092, 0.000978, 0.002139, 0.004467, 0.008214, 0.014694, 0.022965, 0.034605, 0.049706,
          0.095952, 0.166106, 0.264574, 0.373110, 0.507127, 0.651526, 0.850980}},
        {"clo_avg_var", true,
         {0.000023, 0.000241, 0.000528, 0.001102, 0.002026, 0.003624, 0.005665, 0.008536, 0.012260,
          0.023667, 0.040971, 0.065259, 0.092030, 0.125087, 0.160704, 0.209901}},
        {"clo_max_var", true,
         {0.000045, 0.000482, 0.001055, 0.002202, 0.004050, 0.007245, 0.011322, 0.017061, 0.024506,
          0.047306, 0.081894, 0.130441, 0.183951, 0.250024, 0.321216, 0.419551}},
        {"clo_avg_pd", true,
         {0.000101, 0.001082, 0.002366, 0.004940, 0.009084, 0.016251, 0.025398, 0.038270, 0.054970,
          0.106113, 0.183697, 0.292593, 0.412623, 0.560833, 0.720524, 0.941100}},
        {"cat_el", false, {0.0016, 0.0181, 0.0375}},
        {"cat_es", false, {0.0160, 0.1810, 0.3750}},
        {"cat_maxvar", false, {0.0195, 0.2207, 0.4572}},
        {"cat_pd", false, {0.0064, 0.0724, 0.1500}},
    };
    return table;
}

} // namespace

RatingLadder::RatingLadder(std::string name, std::vector<std::string> labels, std::vector<double> uppers)
    : name_(std::move(name)), labels_(std::move(labels)), uppers_(std::move(uppers))
{
    if (labels_.size() < 2) {
        throw ValidationError(fmt::format("ladder '{}': at least two categories required", name_));
    }
    if (uppers_.size() + 1 != labels_.size()) {
        throw ValidationError(fmt::format("ladder '{}': {} labels need {} upper bounds, got {}", name_,
                                          labels_.size(), labels_.size() - 1, uppers_.size()));
    }
    for (std::size_t i = 0; i < uppers_.size(); ++i) {
        if (!(uppers_[i] > 0.0 && uppers_[i] < 1.0)) {
            throw ValidationError(
                fmt::format("ladder '{}': bound {} for {} outside (0, 1)", name_, uppers_[i], labels_[i]));
        }
        if (i > 0 && !(uppers_[i] > uppers_[i - 1])) {
            throw ValidationError(fmt::format("ladder '{}': bounds must be strictly increasing", name_));
        }
    }
}

std::size_t RatingLadder::category(double value) const
{
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError(fmt::format("rate: value {} outside [0, 1]", value));
    }
    const auto it = std::lower_bound(uppers_.begin(), uppers_.end(), value);
    return static_cast<std::size_t>(it - uppers_.begin());
}

RatingLadder builtin_ladder(std::string_view name)
{
    for (const auto& column : columns()) {
        if (column.name == name) {
            return RatingLadder(std::string(name), column.clo ? clo_labels() : cat_labels(), column.uppers);
        }
    }
    throw ValidationError(fmt::format("unknown ladder '{}'", name));
}

std::vector<std::string> builtin_ladder_names()
{
    std::vector<std::string> names;
    for (const auto& column : columns()) {
        names.emplace_back(column.name);
    }
    return names;
}

RatingLadder calibrate_ladder(const RatingLadder& el_ladder, double crit_value, double el_value,
                              std::string name)
{
    if (!(el_value > 0.0) || !(crit_value > 0.0)) {
        throw ValidationError("calibrate_ladder: criterion and EL values must be positive");
    }
    const double ratio = crit_value / el_value;
    std::vector<double> uppers(el_ladder.uppers().begin(), el_ladder.uppers().end());
    for (double& u : uppers) {
        u *= ratio;
    }
    if (name.empty()) {
        name = fmt::format("{}*{:.6g}", el_ladder.name(), ratio);
    }
    std::vector<std::string> labels(el_ladder.labels().begin(), el_ladder.labels().end());
    return RatingLadder(std::move(name), std::move(labels), std::move(uppers));
}

} // namespace chorate
