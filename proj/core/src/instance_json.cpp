#include "cascadia/instance_json.hpp"

#include <fstream>
#include <unordered_map>

#include "cascadia/error.hpp"

namespace cascadia {

namespace {

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad field '") + key + "': " + e.what());
  }
}

template <class T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

}  // namespace

Instance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("instance must be a JSON object");
  const auto version = field_or<std::string>(j, "version", kInstanceVersion);
  if (version != kInstanceVersion) {
    throw ConfigError("unsupported instance version '" + version + "'");
  }

  Instance inst;
  const auto budget = field<std::int64_t>(j, "budget");
  if (budget < 1) throw ConfigError("budget must be >= 1");
  inst.budget = static_cast<std::size_t>(budget);
  inst.utility = parse_utility_kind(field_or<std::string>(j, "utility", "entropy"));

  std::unordered_map<std::int64_t, AttributeId> attribute_index;
  for (const auto& a : j.value("attributes", nlohmann::json::array())) {
    Attribute attr;
    attr.external_id = field<std::int64_t>(a, "id");
    attr.distribution = field<std::vector<double>>(a, "distribution");
    if (!attribute_index.emplace(attr.external_id, inst.attributes.size()).second) {
      throw ConfigError("duplicate attribute id " + std::to_string(attr.external_id));
    }
    inst.attributes.push_back(std::move(attr));
  }

  for (const auto& qj : field<nlohmann::json>(j, "questions")) {
    Question q;
    q.external_id = field<std::int64_t>(qj, "id");
    q.p_answer = field<double>(qj, "p_answer");
    q.p_pna = field_or<double>(qj, "p_pna", 0.0);
    q.c_answer = field<double>(qj, "c_answer");
    q.c_pna = field_or<double>(qj, "c_pna", 0.0);
    q.weight = field_or<double>(qj, "weight", 1.0);
    q.revenue = field_or<double>(qj, "revenue", 1.0);
    for (auto ext : field_or<std::vector<std::int64_t>>(qj, "attributes", {})) {
      const auto it = attribute_index.find(ext);
      if (it == attribute_index.end()) {
        throw ConfigError("question " + std::to_string(q.external_id) +
                          " references unknown attribute " + std::to_string(ext));
      }
      q.attributes.push_back(it->second);
    }
    inst.questions.push_back(std::move(q));
  }

  if (j.contains("slot_decay") && !j.at("slot_decay").is_null()) {
    inst.slot_decay = field<std::vector<double>>(j, "slot_decay");
  }
  if (j.contains("position_rates") && !j.at("position_rates").is_null()) {
    inst.position_rates = field<std::vector<std::vector<double>>>(j, "position_rates");
  }
  return inst;
}

nlohmann::ordered_json instance_to_json(const Instance& inst) {
  if (inst.utility == UtilityKind::callback) {
    throw ConfigError("callback utilities cannot be serialized");
  }
  nlohmann::ordered_json j;
  j["version"] = kInstanceVersion;
  j["budget"] = inst.budget;
  j["utility"] = to_string(inst.utility);
  auto questions = nlohmann::ordered_json::array();
  for (const Question& q : inst.questions) {
    nlohmann::ordered_json qj;
    qj["id"] = q.external_id;
    qj["p_answer"] = q.p_answer;
    qj["p_pna"] = q.p_pna;
    qj["c_answer"] = q.c_answer;
    qj["c_pna"] = q.c_pna;
    auto attrs = nlohmann::ordered_json::array();
    for (AttributeId a : q.attributes) attrs.push_back(inst.attributes.at(a).external_id);
    qj["attributes"] = std::move(attrs);
    qj["weight"] = q.weight;
    qj["revenue"] = q.revenue;
    questions.push_back(std::move(qj));
  }
  j["questions"] = std::move(questions);
  auto attributes = nlohmann::ordered_json::array();
  for (const Attribute& a : inst.attributes) {
    attributes.push_back({{"id", a.external_id}, {"distribution", a.distribution}});
  }
  j["attributes"] = std::move(attributes);
  if (inst.slot_decay) j["slot_decay"] = *inst.slot_decay;
  if (inst.position_rates) j["position_rates"] = *inst.position_rates;
  return j;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

void save_instance(const std::filesystem::path& path, const Instance& inst) {
  write_json_file(path, instance_to_json(inst));
}

nlohmann::ordered_json sequence_to_json(
    const Sequence& seq, const Instance& inst,
    const std::optional<std::map<QuestionId, bool>>& offer_pna) {
  nlohmann::ordered_json j;
  j["version"] = kSequenceVersion;
  auto ids = nlohmann::ordered_json::array();
  for (QuestionId q : seq) ids.push_back(inst.questions.at(q).external_id);
  j["sequence"] = std::move(ids);
  if (offer_pna) {
    auto pna = nlohmann::ordered_json::array();
    for (const auto& [q, offered] : *offer_pna) {
      pna.push_back({{"id", inst.questions.at(q).external_id}, {"offer_pna", offered}});
    }
    j["pna"] = std::move(pna);
  }
  return j;
}

Sequence sequence_from_json(const nlohmann::json& j, const Instance& inst) {
  std::unordered_map<std::int64_t, QuestionId> index;
  for (QuestionId q = 0; q < inst.size(); ++q) index.emplace(inst.questions[q].external_id, q);
  const nlohmann::json& ids = j.is_array() ? j : field<nlohmann::json>(j, "sequence");
  Sequence seq;
  for (const auto& id : ids) {
    const auto it = index.find(id.get<std::int64_t>());
    if (it == index.end()) {
      throw ConfigError("sequence references unknown question " + id.dump());
    }
    seq.push_back(it->second);
  }
  check_sequence(seq, inst);
  return seq;
}

}  // namespace cascadia
