#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "subdim/csv.hpp"
#include "subdim/report_json.hpp"
#include "subdim/simlab.hpp"

namespace {

using subdim::Json;

struct CommonOptions {
  std::string input;
  std::string columns;
  std::string species;
  double level = 0.05;
  int reps = 1000;
  std::uint64_t seed = 0;
  int q0 = 0;  // 0 = unset
  unsigned threads = 1;
  std::string out;
  std::string table;
};

struct TheoryOptions {
  std::string family;
  int p = 0;
  double nu = std::numeric_limits<double>::quiet_NaN();
  std::string lambda;
  std::string alpha;
  std::string omega;
  std::string out;
};

struct SimulateOptions {
  std::string configPath;
  unsigned threads = 1;
  std::string out;
  std::string table;
};

struct CommandOutput {
  std::string command;
  Json config;
  Json result;
  std::string outPath;
};

[[nodiscard]] std::uint64_t resolve_seed(std::uint64_t requested) {
  if (requested != 0) {
    return requested;
  }
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return v != 0 ? v : 0x9E3779B97F4A7C15ULL;
}

void validate_run_config(double level, int reps) {
  if (!(level > 0.0 && level < 1.0)) {
    throw subdim::ConfigError("level must lie strictly inside (0, 1)");
  }
  if (reps < 100) {
    throw subdim::ConfigError("reps must be at least 100");
  }
  if (reps < 1000) {
    std::cerr << "warning: reps = " << reps
              << " is below 1000; p-value resolution will be coarse\n";
  }
}

[[nodiscard]] std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(subdim::detail::trim(text.substr(start)));
      break;
    }
    out.push_back(subdim::detail::trim(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

[[nodiscard]] double parse_double_token(const std::string& token,
                                        const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw subdim::ConfigError(what + ": '" + token + "' is not a number");
  }
  return v;
}

[[nodiscard]] int parse_int_token(const std::string& token,
                                  const std::string& what) {
  int v = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw subdim::ConfigError(what + ": '" + token + "' is not an integer");
  }
  return v;
}

[[nodiscard]] std::vector<double> parse_double_list(const std::string& text,
                                                    const std::string& what) {
  std::vector<double> out;
  for (const std::string& token : split_list(text)) {
    out.push_back(parse_double_token(token, what));
  }
  return out;
}

[[nodiscard]] std::vector<int> parse_int_list(const std::string& text,
                                              const std::string& what) {
  std::vector<int> out;
  for (const std::string& token : split_list(text)) {
    out.push_back(parse_int_token(token, what));
  }
  return out;
}

[[nodiscard]] std::vector<int> parse_columns(const std::string& text,
                                             int available) {
  if (text.empty()) {
    return {};
  }
  std::vector<int> cols = parse_int_list(text, "--columns");
  for (int c : cols) {
    if (c < 1 || c > available) {
      throw subdim::ConfigError("--columns: index " + std::to_string(c) +
                                " outside [1, " + std::to_string(available) +
                                "]");
    }
  }
  std::sort(cols.begin(), cols.end());
  if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) {
    throw subdim::ConfigError("--columns: duplicate column index");
  }
  return cols;
}

/// Loads the CSV, applies species and column selection, and documents the
/// resolved source in `sourceEcho`.
[[nodiscard]] subdim::Dataset load_dataset(const CommonOptions& o,
                                           Json* sourceEcho) {
  const subdim::CsvData csv = subdim::read_csv(o.input, o.species);
  const std::vector<int> cols =
      parse_columns(o.columns, static_cast<int>(csv.values.cols()));
  Eigen::MatrixXd values;
  std::vector<std::string> usedNames;
  if (cols.empty()) {
    values = csv.values;
    usedNames = csv.numericNames;
  } else {
    values.resize(csv.values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      values.col(static_cast<Eigen::Index>(j)) = csv.values.col(cols[j] - 1);
      usedNames.push_back(
          csv.numericNames[static_cast<std::size_t>(cols[j] - 1)]);
    }
  }
  if (values.cols() > subdim::kMaxEnumerationP) {
    throw subdim::InvalidDimensionError(
        "p = " + std::to_string(values.cols()) +
        " exceeds the subset-enumeration cap of " +
        std::to_string(subdim::kMaxEnumerationP) +
        "; restrict the analysis with --columns");
  }
  if (sourceEcho != nullptr) {
    Json j;
    j["input"] = o.input;
    j["hadHeader"] = csv.hadHeader;
    j["columns"] = usedNames;
    j["species"] = o.species.empty() ? Json(nullptr) : Json(o.species);
    j["n"] = values.rows();
    j["p"] = values.cols();
    *sourceEcho = std::move(j);
  }
  return subdim::Dataset(std::move(values));
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) {
    throw subdim::ConfigError("cannot write file: " + path);
  }
  f << text;
}

[[nodiscard]] std::string csv_number(double v) {
  return std::isfinite(v) ? Json(v).dump() : std::string{};
}

[[nodiscard]] std::string joined_indices(const subdim::Subset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.indices().size(); ++i) {
    if (i > 0) {
      out += ':';
    }
    out += std::to_string(s.indices()[i]);
  }
  return out;
}

void write_measure_table(const subdim::MeasureReport& r,
                         const std::string& path) {
  const subdim::SubsetCatalog catalog = subdim::enumerate_subsets(r.p);
  std::string text = "index,indices,q,b1,b2,tildeB1,tildeB2\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const subdim::Subset& s = catalog.entries()[i];
    text += std::to_string(i + 1) + ',' + joined_indices(s) + ',' +
            std::to_string(s.q()) + ',' +
            csv_number(r.pairs[i].b1) + ',' + csv_number(r.pairs[i].b2) +
            ',' + csv_number(r.standardized[i].tildeB1) + ',' +
            csv_number(r.standardized[i].tildeB2) + '\n';
  }
  write_text_file(path, text);
}

[[nodiscard]] CommandOutput cmd_measures(const CommonOptions& o) {
  Json source;
  const subdim::Dataset d = load_dataset(o, &source);
  const subdim::MeasureReport report = subdim::measure_report(
      d, subdim::DegeneratePolicy::MarkNull, o.threads);
  if (!o.table.empty()) {
    write_measure_table(report, o.table);
  }
  CommandOutput out;
  out.command = "measures";
  out.config = Json{{"source", std::move(source)}, {"threads", o.threads}};
  out.result = subdim::measure_report_json(report);
  out.outPath = o.out;
  return out;
}

[[nodiscard]] CommandOutput cmd_test(const std::string& name,
                                     const CommonOptions& o) {
  validate_run_config(o.level, o.reps);
  const std::uint64_t seed = resolve_seed(o.seed);
  Json source;
  const subdim::Dataset d = load_dataset(o, &source);
  const int p = static_cast<int>(d.p());

  const bool fixedQ = name == "maxs-q" || name == "maxk-q" || name == "maxsk-q";
  if (fixedQ && o.q0 == 0) {
    throw subdim::ConfigError("test '" + name + "' requires --q0");
  }
  if (!fixedQ && o.q0 != 0) {
    throw subdim::ConfigError("--q0 is only valid with the fixed-cardinality "
                              "tests maxs-q, maxk-q, maxsk-q");
  }

  subdim::TestReport report;
  if (name == "maxs") {
    report = subdim::max_s_test(d, o.reps, seed, o.level, o.threads);
  } else if (name == "maxk") {
    report = subdim::max_k_test(d, o.reps, seed, o.level, o.threads);
  } else if (name == "maxsk") {
    report = subdim::max_sk_test(d, o.reps, seed, o.level, o.threads);
  } else if (name == "maxs-q") {
    report = subdim::max_s_q_test(d, o.q0, o.reps, seed, o.level, o.threads);
  } else if (name == "maxk-q") {
    report = subdim::max_k_q_test(d, o.q0, o.reps, seed, o.level, o.threads);
  } else if (name == "maxsk-q") {
    report = subdim::max_sk_q_test(d, o.q0, o.reps, seed, o.level, o.threads);
  } else if (name == "mardia-s") {
    report = subdim::mardia_skewness_test(d, o.level);
  } else if (name == "mardia-k") {
    report = subdim::mardia_kurtosis_test(d, o.level);
  } else {
    throw subdim::ConfigError(
        "unknown test '" + name +
        "' (expected maxs, maxk, maxsk, maxs-q, maxk-q, maxsk-q, mardia-s, "
        "mardia-k)");
  }

  CommandOutput out;
  out.command = "test";
  out.config = Json{{"test", name},
                    {"source", std::move(source)},
                    {"level", o.level},
                    {"reps", o.reps},
                    {"seed", seed},
                    {"q0", o.q0 != 0 ? Json(o.q0) : Json(nullptr)},
                    {"threads", o.threads}};
  out.result = subdim::test_report_json(report, p);
  out.outPath = o.out;
  return out;
}

[[nodiscard]] CommandOutput cmd_detect(const CommonOptions& o) {
  validate_run_config(o.level, o.reps);
  const std::uint64_t seed = resolve_seed(o.seed);
  Json source;
  const subdim::Dataset d = load_dataset(o, &source);
  const subdim::DetectionReport report =
      subdim::detect_subdimension(d, o.reps, seed, o.level, o.threads);
  CommandOutput out;
  out.command = "detect";
  out.config = Json{{"source", std::move(source)},
                    {"level", o.level},
                    {"reps", o.reps},
                    {"seed", seed},
                    {"threads", o.threads}};
  out.result =
      subdim::detection_report_json(report, static_cast<int>(d.p()));
  out.outPath = o.out;
  return out;
}

[[nodiscard]] Eigen::MatrixXd parse_omega(const std::string& text, int p) {
  if (text.empty() || text == "identity") {
    return Eigen::MatrixXd::Identity(p, p);
  }
  const std::string prefix = "equicorr:";
  if (text.rfind(prefix, 0) == 0) {
    const double rho =
        parse_double_token(text.substr(prefix.size()), "--omega equicorr rho");
    return subdim::equicorrelation(p, rho);
  }
  const std::vector<double> entries = parse_double_list(text, "--omega");
  if (static_cast<int>(entries.size()) != p * p) {
    throw subdim::ConfigError("--omega: expected " + std::to_string(p * p) +
                              " row-major entries for p = " +
                              std::to_string(p) + ", found " +
                              std::to_string(entries.size()));
  }
  Eigen::MatrixXd omega(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      omega(i, j) = entries[static_cast<std::size_t>(i * p + j)];
    }
  }
  const double scale = std::max(1.0, omega.cwiseAbs().maxCoeff());
  if ((omega - omega.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw subdim::ConfigError("--omega: matrix is not symmetric");
  }
  return 0.5 * (omega + omega.transpose());
}

[[nodiscard]] CommandOutput cmd_theory(const TheoryOptions& t) {
  subdim::TheoryFamily family;
  int p = 0;
  Json params;
  params["family"] = t.family;
  const auto need_nu = [&]() {
    if (std::isnan(t.nu)) {
      throw subdim::ConfigError("family '" + t.family + "' requires --nu");
    }
    return t.nu;
  };
  if (t.family == "gaussian" || t.family == "t" || t.family == "ep") {
    if (t.p < 1) {
      throw subdim::ConfigError("family '" + t.family + "' requires --p >= 1");
    }
    p = t.p;
    params["p"] = p;
    if (t.family == "gaussian") {
      family = subdim::GaussianTheory{p};
    } else if (t.family == "t") {
      family = subdim::SphericalTTheory{p, need_nu()};
      params["nu"] = t.nu;
    } else {
      family = subdim::ExponentialPowerTheory{p, need_nu()};
      params["nu"] = t.nu;
    }
  } else if (t.family == "sn") {
    if (t.lambda.empty()) {
      throw subdim::ConfigError("family 'sn' requires --lambda");
    }
    const std::vector<double> slant = parse_double_list(t.lambda, "--lambda");
    p = static_cast<int>(slant.size());
    const Eigen::VectorXd lambda =
        Eigen::Map<const Eigen::VectorXd>(slant.data(), p);
    const Eigen::MatrixXd omega = parse_omega(t.omega, p);
    family = subdim::SkewNormalSpec{omega, lambda, Eigen::VectorXd::Zero(p)};
    params["p"] = p;
    params["lambda"] = slant;
    params["omega"] = t.omega.empty() ? "identity" : t.omega;
  } else if (t.family == "st") {
    if (t.alpha.empty()) {
      throw subdim::ConfigError("family 'st' requires --alpha");
    }
    const std::vector<double> slant = parse_double_list(t.alpha, "--alpha");
    p = static_cast<int>(slant.size());
    const Eigen::VectorXd alpha =
        Eigen::Map<const Eigen::VectorXd>(slant.data(), p);
    const Eigen::MatrixXd omega = parse_omega(t.omega, p);
    family =
        subdim::SkewTSpec{omega, alpha, need_nu(), Eigen::VectorXd::Zero(p)};
    params["p"] = p;
    params["alpha"] = slant;
    params["nu"] = t.nu;
    params["omega"] = t.omega.empty() ? "identity" : t.omega;
  } else {
    throw subdim::ConfigError("unknown family '" + t.family +
                              "' (expected gaussian, t, ep, sn, st)");
  }
  if (p > subdim::kMaxEnumerationP) {
    throw subdim::InvalidDimensionError(
        "p exceeds the subset-enumeration cap of " +
        std::to_string(subdim::kMaxEnumerationP));
  }
  const std::vector<subdim::TheoreticalMeasures> rows =
      subdim::subdimensional_theory(family, subdim::enumerate_subsets(p));
  CommandOutput out;
  out.command = "theory";
  out.config = std::move(params);
  out.result = subdim::theory_json(rows, p);
  out.outPath = t.out;
  return out;
}

[[nodiscard]] std::map<std::string, std::string> read_experiment_config(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw subdim::ConfigError("cannot open config file: " + path);
  }
  std::map<std::string, std::string> kv;
  std::string line;
  long lineNumber = 0;
  while (std::getline(in, line)) {
    ++lineNumber;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    const std::string trimmed = subdim::detail::trim(line);
    if (trimmed.empty()) {
      continue;
    }
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw subdim::ConfigError("config line " + std::to_string(lineNumber) +
                                ": expected 'key = value'");
    }
    const std::string key = subdim::detail::trim(trimmed.substr(0, eq));
    const std::string value = subdim::detail::trim(trimmed.substr(eq + 1));
    if (key.empty()) {
      throw subdim::ConfigError("config line " + std::to_string(lineNumber) +
                                ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw subdim::ConfigError("config line " + std::to_string(lineNumber) +
                                ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

[[nodiscard]] std::string config_value(
    const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw subdim::ConfigError("config key '" + key + "' is required");
  }
  return it->second;
}

[[nodiscard]] std::string config_value_or(
    const std::map<std::string, std::string>& kv, const std::string& key,
    const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

void write_rates_csv(
    const std::string& path, const std::vector<std::string>& testNames,
    const std::vector<std::tuple<int, double, std::vector<double>>>& rows) {
  std::string text = "n,param";
  for (const std::string& name : testNames) {
    text += ',' + name;
  }
  text += '\n';
  for (const auto& [n, param, rates] : rows) {
    text += std::to_string(n) + ',' + csv_number(param);
    for (double r : rates) {
      text += ',' + csv_number(r);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_detection_csv(const std::string& path,
                         const subdim::ExperimentResult& r) {
  std::string text = "kind,key,proportion\n";
  for (const auto& [index, proportion] : r.detectionHistogram) {
    text += "index," + std::to_string(index) + ',' + csv_number(proportion) +
            '\n';
  }
  for (const auto& [q, proportion] : r.qHistogram) {
    text += "q," + std::to_string(q) + ',' + csv_number(proportion) + '\n';
  }
  write_text_file(path, text);
}

[[nodiscard]] CommandOutput cmd_simulate(const SimulateOptions& o) {
  const std::map<std::string, std::string> kv =
      read_experiment_config(o.configPath);
  static const std::vector<std::string> known = {
      "kind",  "model", "p",     "q",          "rho",  "n",
      "param", "tests", "level", "replicates", "reps", "seed"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw subdim::ConfigError("unknown config key '" + key + "'");
    }
  }
  const std::string kind = config_value(kv, "kind");
  const int p = parse_int_token(config_value(kv, "p"), "config key 'p'");
  const double rho =
      parse_double_token(config_value_or(kv, "rho", "0.5"), "config key 'rho'");
  const double level = parse_double_token(config_value_or(kv, "level", "0.05"),
                                          "config key 'level'");
  const int replicates = parse_int_token(config_value(kv, "replicates"),
                                         "config key 'replicates'");
  const int reps = parse_int_token(config_value_or(kv, "reps", "1000"),
                                   "config key 'reps'");
  const std::uint64_t requestedSeed = static_cast<std::uint64_t>(
      std::stoull(config_value_or(kv, "seed", "0")));
  const std::uint64_t seed = resolve_seed(requestedSeed);
  if (replicates < 1) {
    throw subdim::ConfigError("config key 'replicates' must be >= 1");
  }
  validate_run_config(level, reps);
  const std::vector<int> ns = parse_int_list(config_value(kv, "n"),
                                             "config key 'n'");

  Json config;
  for (const auto& [key, value] : kv) {
    config[key] = value;
  }
  config["seed"] = seed;
  config["configPath"] = o.configPath;
  config["threads"] = o.threads;

  CommandOutput out;
  out.command = "simulate";
  out.outPath = o.out;

  if (kind == "detection") {
    const int model =
        parse_int_token(config_value(kv, "model"), "config key 'model'");
    const int q = parse_int_token(config_value(kv, "q"), "config key 'q'");
    const std::vector<double> params =
        parse_double_list(config_value(kv, "param"), "config key 'param'");
    if (ns.size() != 1 || params.size() != 1) {
      throw subdim::ConfigError(
          "detection runs take a single n and a single param");
    }
    const subdim::CompositeModel composite{model, p, q, params[0], rho};
    const subdim::ExperimentResult study = subdim::detection_study(
        composite, ns[0], replicates, seed, reps, level, o.threads);
    if (!o.table.empty()) {
      write_detection_csv(o.table, study);
    }
    out.result = Json{{"kind", kind},
                      {"model", model},
                      {"n", ns[0]},
                      {"param", params[0]},
                      {"study", subdim::experiment_result_json(study)}};
  } else if (kind == "size" || kind == "power") {
    std::vector<subdim::TestSelector> selectors;
    std::vector<std::string> names;
    for (const std::string& token :
         split_list(config_value(kv, "tests"))) {
      selectors.push_back(subdim::parse_test_selector(token));
      names.push_back(token);
    }
    std::vector<std::tuple<int, double, std::vector<double>>> tableRows;
    Json grid = Json::array();
    std::uint64_t cell = 0;
    std::vector<double> params{0.0};
    int model = 0;
    int q = 0;
    if (kind == "power") {
      model = parse_int_token(config_value(kv, "model"), "config key 'model'");
      q = parse_int_token(config_value(kv, "q"), "config key 'q'");
      params = parse_double_list(config_value(kv, "param"),
                                 "config key 'param'");
    }
    for (int n : ns) {
      for (double param : params) {
        const std::uint64_t cellSeed = subdim::derive_seed(seed, cell++);
        std::vector<subdim::ExperimentResult> results;
        if (kind == "size") {
          const subdim::GaussianFamily family{
              Eigen::VectorXd::Zero(p), subdim::equicorrelation(p, rho)};
          results = subdim::estimate_size(selectors, family, n, replicates,
                                          cellSeed, reps, level, o.threads);
        } else {
          const subdim::CompositeModel composite{model, p, q, param, rho};
          results = subdim::estimate_power(selectors, composite, n,
                                           replicates, cellSeed, reps, level,
                                           o.threads);
        }
        Json cellJson;
        cellJson["n"] = n;
        cellJson["param"] = kind == "size" ? Json(nullptr) : Json(param);
        cellJson["seed"] = cellSeed;
        Json tests = Json::array();
        std::vector<double> rates;
        for (const subdim::ExperimentResult& r : results) {
          tests.push_back(subdim::experiment_result_json(r));
          rates.push_back(r.rejectionRate);
        }
        cellJson["tests"] = std::move(tests);
        grid.push_back(std::move(cellJson));
        tableRows.emplace_back(n, kind == "size" ? 0.0 : param,
                               std::move(rates));
      }
    }
    if (!o.table.empty()) {
      write_rates_csv(o.table, names, tableRows);
    }
    out.result = Json{{"kind", kind}, {"grid", std::move(grid)}};
  } else {
    throw subdim::ConfigError(
        "config key 'kind' must be size, power, or detection");
  }
  out.config = std::move(config);
  return out;
}

void emit(const Json& report, const std::string& outPath) {
  const std::string text = report.dump(2) + "\n";
  if (outPath.empty()) {
    std::cout << text;
  } else {
    write_text_file(outPath, text);
  }
}

void add_data_options(CLI::App* cmd, CommonOptions* o, bool withTest) {
  cmd->add_option("input", o->input, "CSV input file")->required();
  cmd->add_option("--columns", o->columns,
                  "1-based comma-separated numeric column selection");
  cmd->add_option("--species", o->species,
                  "keep only rows whose categorical column matches");
  cmd->add_option("--threads", o->threads, "worker thread cap (0 = auto)");
  cmd->add_option("--out", o->out, "write the JSON report to a file");
  if (withTest) {
    cmd->add_option("--level", o->level, "nominal test level");
    cmd->add_option("--reps", o->reps, "Monte Carlo null draws");
    cmd->add_option("--seed", o->seed, "RNG seed (0 = derive from entropy)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-dimensional multivariate skewness/kurtosis analysis"};
  app.require_subcommand(1);

  CommonOptions measuresOpts;
  CLI::App* measures = app.add_subcommand(
      "measures", "b1/b2 and standardized measures for every subset");
  add_data_options(measures, &measuresOpts, false);
  measures->add_option("--table", measuresOpts.table,
                       "also write the per-subset table as CSV");

  CommonOptions testOpts;
  std::string testName;
  CLI::App* test =
      app.add_subcommand("test", "run one hypothesis test against the data");
  test->add_option("name", testName,
                   "maxs|maxk|maxsk|maxs-q|maxk-q|maxsk-q|mardia-s|mardia-k")
      ->required();
  add_data_options(test, &testOpts, true);
  test->add_option("--q0", testOpts.q0,
                   "subset cardinality for the fixed-q tests");

  CommonOptions detectOpts;
  CLI::App* detect = app.add_subcommand(
      "detect", "flag the coordinate subset carrying non-Gaussianity");
  add_data_options(detect, &detectOpts, true);

  TheoryOptions theoryOpts;
  CLI::App* theory = app.add_subcommand(
      "theory", "closed-form sub-dimensional measures for a known family");
  theory->add_option("family", theoryOpts.family, "gaussian|t|ep|sn|st")
      ->required();
  theory->add_option("--p", theoryOpts.p, "dimension (gaussian, t, ep)");
  theory->add_option("--nu", theoryOpts.nu, "tail parameter (t, ep, st)");
  theory->add_option("--lambda", theoryOpts.lambda,
                     "comma-separated slant vector (sn)");
  theory->add_option("--alpha", theoryOpts.alpha,
                     "comma-separated slant vector (st)");
  theory->add_option(
      "--omega", theoryOpts.omega,
      "dispersion: identity, equicorr:<rho>, or p*p row-major entries");
  theory->add_option("--out", theoryOpts.out,
                     "write the JSON report to a file");

  SimulateOptions simulateOpts;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "size/power/detection study from a config file");
  simulate->add_option("config", simulateOpts.configPath,
                       "key = value experiment description")
      ->required();
  simulate->add_option("--threads", simulateOpts.threads,
                       "worker thread cap (0 = auto)");
  simulate->add_option("--out", simulateOpts.out,
                       "write the JSON report to a file");
  simulate->add_option("--table", simulateOpts.table,
                       "also write rates/histograms as CSV");

  try {
    app.parse(argc, argv);
    const auto start = std::chrono::steady_clock::now();
    CommandOutput out;
    if (app.got_subcommand(measures)) {
      out = cmd_measures(measuresOpts);
    } else if (app.got_subcommand(test)) {
      out = cmd_test(testName, testOpts);
    } else if (app.got_subcommand(detect)) {
      out = cmd_detect(detectOpts);
    } else if (app.got_subcommand(theory)) {
      out = cmd_theory(theoryOpts);
    } else {
      out = cmd_simulate(simulateOpts);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    emit(subdim::make_report(out.command, std::move(out.config),
                             std::move(out.result), seconds),
         out.outPath);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const subdim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
