#pragma once

// Canonical JSON forms: "cascadia-instance/1" and "cascadia-sequence/1".

#include <filesystem>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "cascadia/model.hpp"

namespace cascadia {

inline constexpr const char* kInstanceVersion = "cascadia-instance/1";
inline constexpr const char* kSequenceVersion = "cascadia-sequence/1";

/// Parses and maps external question/attribute ids onto dense indices.
/// Throws ConfigError on schema problems; does not run validate_instance.
Instance instance_from_json(const nlohmann::json& j);
nlohmann::ordered_json instance_to_json(const Instance& inst);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& inst);

/// Sequence file: external ids in slot order, optionally a per-question PNA
/// decision keyed by external id.
nlohmann::ordered_json sequence_to_json(
    const Sequence& seq, const Instance& inst,
    const std::optional<std::map<QuestionId, bool>>& offer_pna = std::nullopt);
Sequence sequence_from_json(const nlohmann::json& j, const Instance& inst);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace cascadia
