#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "chorate/casestudy.hpp"
#include "chorate/discrete_loss.hpp"
#include "chorate/pooling.hpp"
#include "chorate/rating.hpp"

namespace chorate {

inline constexpr const char* kLadderSchema = "chorate.ladder/1";
inline constexpr const char* kScenarioLossSchema = "chorate.scenario_loss/1";
inline constexpr const char* kPoolModelSchema = "chorate.pool_model/1";

/// Reads and parses a JSON document. Throws InputError if the file cannot be
/// read and ValidationError if it is not valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Reads a whole text file; throws InputError if it cannot be read.
std::string read_text_file(const std::filesystem::path& path);

/// {"schema", "name", "labels", "uppers"}; doubles round-trip bit-exactly.
nlohmann::json ladder_to_json(const RatingLadder& ladder);
RatingLadder ladder_from_json(const nlohmann::json& j);
/// A built-in ladder name or a path to a ladder JSON file.
RatingLadder resolve_ladder(const std::string& name_or_path);

/// {"schema", "weights", "scenarios": [{"values", "probabilities"}]}; a document
/// with top-level "values"/"probabilities" is a single-scenario law.
nlohmann::json scenario_loss_to_json(const ScenarioLoss& sl);
ScenarioLoss scenario_loss_from_json(const nlohmann::json& j);

/// {"schema", "conditional": {"family", ["table"]}, "scenarios": [{"weight", "mixing"}]}.
nlohmann::json pool_model_to_json(const PoolModel& model);
PoolModel pool_model_from_json(const nlohmann::json& j);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// CSV `key,criterion,value,rating`.
void write_rows_csv(std::ostream& out, std::span<const StudyRow> rows);

/// Fails unless j["schema"] is absent or equals `expected`.
void check_schema(const nlohmann::json& j, const char* expected);

} // namespace chorate
