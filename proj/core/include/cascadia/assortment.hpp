#pragma once

// Assortment view of the cascade model: a shopper scans displayed products,
// considers each with some rate, and picks from the consideration set by
// multinomial logit.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadia/model.hpp"
#include "cascadia/policies.hpp"

namespace cascadia {

struct Product {
  std::int64_t id = 0;
  double consider_rate = 0.0;  // p+; the skip probability is 1 - p+
  double c_consider = 1.0;     // continuation after considering
  double c_skip = 1.0;         // continuation after skipping
  double weight = 1.0;         // MNL preference weight
  double revenue = 1.0;
};

struct Catalog {
  std::size_t display_slots = 1;
  std::vector<Product> products;
  std::optional<std::vector<double>> slot_decay;
  /// Scrolling shoppers: per-product row of view rates by slot.
  std::optional<std::vector<std::vector<double>>> position_rates;
};

Catalog catalog_from_json(const nlohmann::json& j);
nlohmann::ordered_json catalog_to_json(const Catalog& cat);
Catalog load_catalog(const std::filesystem::path& path);

/// MNL-revenue instance with p_pna = 1 - consider_rate. Throws
/// ValidationError for rates outside [0, 1] or negative weights.
Instance catalog_to_instance(const Catalog& cat);

/// True iff all revenues are equal, the case where expected MNL revenue is
/// monotone submodular.
bool revenue_is_submodular(const Catalog& cat) noexcept;

struct AssortmentResult {
  PolicyOutput output;
  double expected_revenue = 0.0;
  bool submodular = true;
  std::vector<std::string> warnings;
};

/// Runs `spec` on the converted instance and scores the display exactly.
/// Supported kinds: alg2, alg4, alg6, exact_optimal, random.
AssortmentResult optimize_assortment(const Catalog& cat, const PolicySpec& spec);

}  // namespace cascadia
