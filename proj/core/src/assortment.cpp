#include "cascadia/assortment.hpp"

#include "cascadia/error.hpp"
#include "cascadia/evaluator.hpp"
#include "cascadia/instance_json.hpp"

namespace cascadia {

namespace {

template <class T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

Catalog catalog_from_json(const nlohmann::json& j) {
  try {
    Catalog cat;
    cat.display_slots = j.at("display_slots").get<std::size_t>();
    for (const auto& p : j.at("products")) {
      Product prod;
      prod.id = p.at("id").get<std::int64_t>();
      prod.consider_rate = p.at("consider_rate").get<double>();
      prod.c_consider = field_or(p, "c_consider", 1.0);
      prod.c_skip = field_or(p, "c_skip", 1.0);
      prod.weight = field_or(p, "weight", 1.0);
      prod.revenue = field_or(p, "revenue", 1.0);
      cat.products.push_back(prod);
    }
    if (j.contains("slot_decay")) cat.slot_decay = j.at("slot_decay").get<std::vector<double>>();
    if (j.contains("position_rates")) {
      cat.position_rates = j.at("position_rates").get<std::vector<std::vector<double>>>();
    }
    return cat;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad catalog: ") + e.what());
  }
}

nlohmann::ordered_json catalog_to_json(const Catalog& cat) {
  nlohmann::ordered_json j;
  j["display_slots"] = cat.display_slots;
  j["products"] = nlohmann::ordered_json::array();
  for (const Product& p : cat.products) {
    j["products"].push_back({{"id", p.id},
                             {"consider_rate", p.consider_rate},
                             {"c_consider", p.c_consider},
                             {"c_skip", p.c_skip},
                             {"weight", p.weight},
                             {"revenue", p.revenue}});
  }
  if (cat.slot_decay) j["slot_decay"] = *cat.slot_decay;
  if (cat.position_rates) j["position_rates"] = *cat.position_rates;
  return j;
}

Catalog load_catalog(const std::filesystem::path& path) {
  return catalog_from_json(read_json_file(path));
}

Instance catalog_to_instance(const Catalog& cat) {
  Instance inst;
  inst.budget = cat.display_slots;
  inst.utility = UtilityKind::mnl;
  inst.slot_decay = cat.slot_decay;
  inst.position_rates = cat.position_rates;
  for (const Product& p : cat.products) {
    Question q;
    q.external_id = p.id;
    q.p_answer = p.consider_rate;
    q.p_pna = 1.0 - p.consider_rate;
    q.c_answer = p.c_consider;
    q.c_pna = p.c_skip;
    q.weight = p.weight;
    q.revenue = p.revenue;
    inst.questions.push_back(q);
  }
  ensure_valid(inst);
  return inst;
}

bool revenue_is_submodular(const Catalog& cat) noexcept {
  for (const Product& p : cat.products) {
    if (p.revenue != cat.products.front().revenue) return false;
  }
  return true;
}

AssortmentResult optimize_assortment(const Catalog& cat, const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::alg2_general:
    case PolicyKind::alg4_decay_pna:
    case PolicyKind::alg6_scrolling:
    case PolicyKind::exact_optimal:
    case PolicyKind::random:
      break;
    default:
      throw ConfigError(std::string("policy ") + to_string(spec.kind) +
                        " is not available for assortments");
  }
  AssortmentResult result;
  const Instance inst = catalog_to_instance(cat);
  result.submodular = revenue_is_submodular(cat);
  if (!result.submodular) {
    result.warnings.push_back(
        "revenues differ: expected revenue is not submodular and no approximation "
        "guarantee applies");
  }
  result.output = run_policy(inst, spec);
  const Variant variant =
      spec.kind == PolicyKind::exact_optimal ? spec.variant : scoring_variant(spec.kind, inst);
  result.expected_revenue = eval_exact(result.output.sequence, inst, variant).value;
  return result;
}

}  // namespace cascadia
