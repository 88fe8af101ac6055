#include "chorate/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "chorate/errors.hpp"

namespace chorate {

using nlohmann::json;

namespace {

template <typename T>
T get_field(const json& j, const char* key, const char* what)
{
    if (!j.is_object() || !j.contains(key)) {
        throw ValidationError(fmt::format("{}: missing field '{}'", what, key));
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(fmt::format("{}: field '{}' has the wrong type", what, key));
    }
}

DiscreteLoss loss_from_arrays(const json& j, const char* what)
{
    const auto values = get_field<std::vector<double>>(j, "values", what);
    const auto probs = get_field<std::vector<double>>(j, "probabilities", what);
    if (values.size() != probs.size() || values.empty()) {
        throw ValidationError(fmt::format("{}: 'values' and 'probabilities' must be non-empty and equal length", what));
    }
    validate_probability_vector(probs, what);
    std::vector<Atom> atoms;
    atoms.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        atoms.push_back({values[i], probs[i]});
    }
    return DiscreteLoss::from_unsorted(std::move(atoms));
}

json loss_to_arrays(const DiscreteLoss& d)
{
    json values = json::array();
    json probs = json::array();
    for (const auto& a : d.atoms()) {
        values.push_back(a.value);
        probs.push_back(a.weight);
    }
    return json{{"values", values}, {"probabilities", probs}};
}

} // namespace

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot read '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw InputError(fmt::format("cannot read '{}'", path.string()));
    }
    return buf.str();
}

json read_json_file(const std::filesystem::path& path)
{
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

void check_schema(const json& j, const char* expected)
{
    if (!j.is_object()) {
        throw ValidationError(fmt::format("expected a JSON object with schema '{}'", expected));
    }
    if (j.contains("schema")) {
        const auto& s = j.at("schema");
        if (!s.is_string() || s.get<std::string>() != expected) {
            throw ValidationError(fmt::format("schema mismatch: expected '{}', got {}", expected, s.dump()));
        }
    }
}

json ladder_to_json(const RatingLadder& ladder)
{
    return json{{"schema", kLadderSchema},
                {"name", ladder.name()},
                {"labels", std::vector<std::string>(ladder.labels().begin(), ladder.labels().end())},
                {"uppers", std::vector<double>(ladder.uppers().begin(), ladder.uppers().end())}};
}

RatingLadder ladder_from_json(const json& j)
{
    check_schema(j, kLadderSchema);
    return RatingLadder(get_field<std::string>(j, "name", "ladder"),
                        get_field<std::vector<std::string>>(j, "labels", "ladder"),
                        get_field<std::vector<double>>(j, "uppers", "ladder"));
}

RatingLadder resolve_ladder(const std::string& name_or_path)
{
    for (const auto& name : builtin_ladder_names()) {
        if (name == name_or_path) {
            return builtin_ladder(name);
        }
    }
    if (!std::filesystem::exists(name_or_path)) {
        throw InputError(fmt::format("'{}' is neither a built-in ladder nor a readable file", name_or_path));
    }
    return ladder_from_json(read_json_file(name_or_path));
}

json scenario_loss_to_json(const ScenarioLoss& sl)
{
    json scenarios = json::array();
    for (const auto& d : sl.scenarios()) {
        scenarios.push_back(loss_to_arrays(d));
    }
    return json{{"schema", kScenarioLossSchema},
                {"weights", std::vector<double>(sl.weights().begin(), sl.weights().end())},
                {"scenarios", scenarios}};
}

ScenarioLoss scenario_loss_from_json(const json& j)
{
    check_schema(j, kScenarioLossSchema);
    if (!j.contains("scenarios")) {
        return ScenarioLoss(loss_from_arrays(j, "scenario loss"));
    }
    const auto& arr = j.at("scenarios");
    if (!arr.is_array() || arr.empty()) {
        throw ValidationError("scenario loss: 'scenarios' must be a non-empty array");
    }
    std::vector<DiscreteLoss> laws;
    for (const auto& s : arr) {
        laws.push_back(loss_from_arrays(s, "scenario"));
    }
    std::vector<double> weights;
    if (j.contains("weights")) {
        weights = get_field<std::vector<double>>(j, "weights", "scenario loss");
    } else {
        weights.assign(laws.size(), 1.0 / static_cast<double>(laws.size()));
    }
    return ScenarioLoss(std::move(laws), std::move(weights));
}

json pool_model_to_json(const PoolModel& model)
{
    json conditional;
    switch (model.conditional.family()) {
    case ConditionalFamily::beta_one:
        conditional = json{{"family", "beta_one"}};
        break;
    case ConditionalFamily::bernoulli:
        conditional = json{{"family", "bernoulli"}};
        break;
    case ConditionalFamily::table: {
        json table = json::array();
        for (const auto& [z, d] : model.conditional.table_entries()) {
            json entry = loss_to_arrays(d);
            entry["z"] = z;
            table.push_back(entry);
        }
        conditional = json{{"family", "table"}, {"table", table}};
        break;
    }
    }
    json scenarios = json::array();
    for (std::size_t s = 0; s < model.scenarios(); ++s) {
        const auto& m = model.mixing[s];
        json mixing;
        if (m.is_discrete()) {
            json nodes = json::array();
            for (const auto& n : m.discrete_nodes()) {
                nodes.push_back(json{{"z", n.z}, {"weight", n.weight}});
            }
            mixing = json{{"type", "discrete"}, {"nodes", nodes}};
        } else {
            mixing = json{{"type", "uniform"}, {"lo", m.lo()}, {"hi", m.hi()}};
        }
        scenarios.push_back(json{{"weight", model.scenario_weights[s]}, {"mixing", mixing}});
    }
    return json{{"schema", kPoolModelSchema}, {"conditional", conditional}, {"scenarios", scenarios}};
}

PoolModel pool_model_from_json(const json& j)
{
    check_schema(j, kPoolModelSchema);
    const auto conditional_json = get_field<json>(j, "conditional", "pool model");
    const auto family = get_field<std::string>(conditional_json, "family", "conditional");
    std::optional<ConditionalLaw> conditional;
    if (family == "beta_one") {
        conditional = ConditionalLaw::beta_one();
    } else if (family == "bernoulli") {
        conditional = ConditionalLaw::bernoulli();
    } else if (family == "table") {
        std::vector<std::pair<double, DiscreteLoss>> table;
        for (const auto& entry : get_field<json>(conditional_json, "table", "conditional")) {
            table.emplace_back(get_field<double>(entry, "z", "table entry"), loss_from_arrays(entry, "table entry"));
        }
        conditional = ConditionalLaw::table(std::move(table));
    } else {
        throw ValidationError(fmt::format("unknown conditional family '{}'", family));
    }

    std::vector<MixingLaw> mixing;
    std::vector<double> weights;
    const auto scenarios = get_field<json>(j, "scenarios", "pool model");
    if (!scenarios.is_array() || scenarios.empty()) {
        throw ValidationError("pool model: 'scenarios' must be a non-empty array");
    }
    for (const auto& s : scenarios) {
        weights.push_back(get_field<double>(s, "weight", "scenario"));
        const auto m = get_field<json>(s, "mixing", "scenario");
        const auto type = get_field<std::string>(m, "type", "mixing");
        if (type == "uniform") {
            mixing.push_back(MixingLaw::uniform(get_field<double>(m, "lo", "mixing"), get_field<double>(m, "hi", "mixing")));
        } else if (type == "discrete") {
            std::vector<MixingLaw::Node> nodes;
            for (const auto& n : get_field<json>(m, "nodes", "mixing")) {
                nodes.push_back({get_field<double>(n, "z", "node"), get_field<double>(n, "weight", "node")});
            }
            mixing.push_back(MixingLaw::discrete(std::move(nodes)));
        } else {
            throw ValidationError(fmt::format("unknown mixing type '{}'", type));
        }
    }
    PoolModel model{*conditional, std::move(mixing), std::move(weights)};
    model.validate();
    return model;
}

std::string format_number(double v)
{
    return fmt::format("{}", v);
}

void write_rows_csv(std::ostream& out, std::span<const StudyRow> rows)
{
    out << "key,criterion,value,rating\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{}\n", r.key, r.criterion, format_number(r.value), r.rating);
    }
}

} // namespace chorate
