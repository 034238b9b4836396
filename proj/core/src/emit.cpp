#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascadia/error.hpp"
#include "cascadia/harness.hpp"

namespace cascadia {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

nlohmann::ordered_json opt_json(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.suite << ',' << num(r.cell.p_plus) << ',' << num(r.cell.c_plus) << ','
        << num(r.cell.p_minus) << ',' << num(r.cell.c_minus) << ',' << num(r.kappa) << ','
        << r.seed << ',' << r.policy << ',' << num(r.f_value) << ',' << r.method << ','
        << num(r.ratio) << ',' << num(r.runtime_ms) << '\n';
  }
  return out.str();
}

std::string aggregates_to_csv(const std::vector<Aggregate>& aggregates) {
  std::ostringstream out;
  out << kAggregatesHeader << '\n';
  for (const Aggregate& a : aggregates) {
    out << a.suite << ',' << num(a.p_plus) << ',' << num(a.c_plus) << ',' << num(a.p_minus)
        << ',' << num(a.c_minus) << ',' << num(a.kappa) << ',' << a.policy << ',' << a.metric
        << ',' << a.count << ',' << num(a.min) << ',' << num(a.mean) << ',' << num(a.max)
        << '\n';
  }
  return out.str();
}

nlohmann::ordered_json result_to_json(const SuiteResult& result) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const ResultRow& r : result.rows) {
    nlohmann::ordered_json row;
    row["suite"] = r.suite;
    row["cell_p_plus"] = r.cell.p_plus;
    row["cell_c_plus"] = r.cell.c_plus;
    row["cell_p_minus"] = r.cell.p_minus;
    row["cell_c_minus"] = r.cell.c_minus;
    row["kappa"] = opt_json(r.kappa);
    row["seed"] = r.seed;
    row["policy"] = r.policy;
    row["f_value"] = r.f_value;
    row["method"] = r.method;
    row["ratio"] = opt_json(r.ratio);
    row["runtime_ms"] = opt_json(r.runtime_ms);
    j["rows"].push_back(std::move(row));
  }
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const Aggregate& a : result.aggregates) {
    nlohmann::ordered_json agg;
    agg["suite"] = a.suite;
    agg["cell_p_plus"] = opt_json(a.p_plus);
    agg["cell_c_plus"] = opt_json(a.c_plus);
    agg["cell_p_minus"] = opt_json(a.p_minus);
    agg["cell_c_minus"] = opt_json(a.c_minus);
    agg["kappa"] = opt_json(a.kappa);
    agg["policy"] = a.policy;
    agg["metric"] = a.metric;
    agg["count"] = a.count;
    agg["min"] = a.min;
    agg["mean"] = a.mean;
    agg["max"] = a.max;
    j["aggregates"].push_back(std::move(agg));
  }
  return j;
}

std::vector<ResultRow> rows_from_json(const nlohmann::json& j) {
  try {
    std::vector<ResultRow> rows;
    for (const auto& row : j.at("rows")) {
      ResultRow r;
      r.suite = row.at("suite").get<std::string>();
      r.cell = {row.at("cell_p_plus").get<double>(), row.at("cell_c_plus").get<double>(),
                row.at("cell_p_minus").get<double>(), row.at("cell_c_minus").get<double>()};
      r.kappa = opt_double(row, "kappa");
      r.seed = row.at("seed").get<std::uint64_t>();
      r.policy = row.at("policy").get<std::string>();
      r.f_value = row.at("f_value").get<double>();
      r.method = row.at("method").get<std::string>();
      r.ratio = opt_double(row, "ratio");
      r.runtime_ms = opt_double(row, "runtime_ms");
      rows.push_back(std::move(r));
    }
    return rows;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad results file: ") + e.what());
  }
}

std::vector<std::filesystem::path> emit(const SuiteResult& result,
                                        const std::filesystem::path& dir,
                                        const std::vector<EmitFormat>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (EmitFormat f : formats) {
    if (f == EmitFormat::csv) {
      write_text(dir / "results.csv", rows_to_csv(result.rows));
      write_text(dir / "aggregates.csv", aggregates_to_csv(result.aggregates));
      written.push_back(dir / "results.csv");
      written.push_back(dir / "aggregates.csv");
    } else {
      write_text(dir / "results.json", result_to_json(result).dump(2) + "\n");
      written.push_back(dir / "results.json");
    }
  }
  return written;
}

}  // namespace cascadia
