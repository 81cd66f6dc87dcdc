#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "subdim/core.hpp"
#include "subdim/hypotests.hpp"
#include "subdim/measures.hpp"
#include "subdim/simlab.hpp"
#include "subdim/theory.hpp"
#include "subdim/version.hpp"

namespace subdim {

using Json = nlohmann::json;

namespace detail {

template <typename T>
[[nodiscard]] Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

/// NaN marks "not available" (degenerate subsets); report it as JSON null so
/// the in-memory document matches its serialized form.
[[nodiscard]] inline Json finite_json(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

}  // namespace detail

[[nodiscard]] inline Json subset_json(const Subset& s, int p) {
  Json j;
  j["q"] = s.q();
  j["indices"] = s.indices();
  j["index"] = p <= kMaxEnumerationP ? Json(subset_index(s, p)) : Json(nullptr);
  return j;
}

[[nodiscard]] inline Json max_stat_json(const MaxStat& m, int p) {
  Json j;
  j["value"] = detail::finite_json(m.value);
  j["index"] = m.catalogIndex > 0 ? Json(m.catalogIndex) : Json(nullptr);
  j["subset"] = m.argmax ? subset_json(*m.argmax, p) : Json(nullptr);
  return j;
}

[[nodiscard]] inline Json measure_report_json(const MeasureReport& r) {
  const int p = r.p;
  const SubsetCatalog catalog = enumerate_subsets(p);
  Json rows = Json::array();
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const Subset& s = catalog.entries()[i];
    Json row;
    row["index"] = static_cast<int>(i) + 1;
    row["indices"] = s.indices();
    row["q"] = s.q();
    row["b1"] = detail::finite_json(r.pairs[i].b1);
    row["b2"] = detail::finite_json(r.pairs[i].b2);
    row["tildeB1"] = detail::finite_json(r.standardized[i].tildeB1);
    row["tildeB2"] = detail::finite_json(r.standardized[i].tildeB2);
    rows.push_back(std::move(row));
  }
  Json perQ = Json::array();
  for (int q = 1; q <= p; ++q) {
    Json row;
    row["q"] = q;
    row["maxS"] = max_stat_json(r.perQMaxS[static_cast<std::size_t>(q - 1)], p);
    row["maxKAbs"] =
        max_stat_json(r.perQMaxKAbs[static_cast<std::size_t>(q - 1)], p);
    perQ.push_back(std::move(row));
  }
  Json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["subsets"] = std::move(rows);
  j["degenerateIndices"] = r.degenerateIndices;
  j["maxS"] = max_stat_json(r.maxS, p);
  j["maxKAbs"] = max_stat_json(r.maxKAbs, p);
  j["perQ"] = std::move(perQ);
  return j;
}

[[nodiscard]] inline Json test_report_json(const TestReport& r, int p) {
  Json j;
  j["test"] = r.testName;
  j["statistic"] = r.statistic;
  j["pValue"] = r.pValue;
  j["reps"] = r.reps;
  j["mcStandardError"] =
      r.reps > 0
          ? Json(std::sqrt(r.pValue * (1.0 - r.pValue) /
                           static_cast<double>(r.reps)))
          : Json(nullptr);
  j["level"] = r.level;
  j["rejected"] = r.rejected;
  j["argmaxIndex"] = r.argmaxIndex > 0 ? Json(r.argmaxIndex) : Json(nullptr);
  j["argmaxSubset"] =
      r.argmaxSubset ? subset_json(*r.argmaxSubset, p) : Json(nullptr);
  j["subPValueS"] = detail::opt_json(r.subPValueS);
  j["subPValueK"] = detail::opt_json(r.subPValueK);
  j["q0"] = detail::opt_json(r.q0);
  j["seed"] = r.seed;
  return j;
}

[[nodiscard]] inline Json detection_report_json(const DetectionReport& r,
                                                int p) {
  Json j;
  j["triggered"] = r.triggered;
  j["pS"] = r.pS;
  j["pK"] = r.pK;
  j["skewSubset"] =
      r.skewSubset ? subset_json(*r.skewSubset, p) : Json(nullptr);
  j["kurtSubset"] =
      r.kurtSubset ? subset_json(*r.kurtSubset, p) : Json(nullptr);
  j["unionSubset"] =
      r.unionSubset ? subset_json(*r.unionSubset, p) : Json(nullptr);
  return j;
}

[[nodiscard]] inline Json theory_json(
    const std::vector<TheoreticalMeasures>& rows, int p) {
  Json out = Json::array();
  for (const TheoreticalMeasures& t : rows) {
    Json row;
    row["subset"] = subset_json(t.subset, p);
    row["beta1"] = t.beta1;
    row["beta2"] = detail::opt_json(t.beta2);
    out.push_back(std::move(row));
  }
  return out;
}

[[nodiscard]] inline Json experiment_result_json(const ExperimentResult& r) {
  Json j;
  j["test"] = r.testName;
  j["nominalLevel"] = r.nominalLevel;
  j["rejectionRate"] = r.rejectionRate;
  j["replicates"] = r.replicates;
  j["mcStandardError"] = r.mcStandardError;
  if (!r.detectionHistogram.empty()) {
    Json hist = Json::array();
    for (const auto& [index, proportion] : r.detectionHistogram) {
      hist.push_back(Json{{"index", index}, {"proportion", proportion}});
    }
    j["indexHistogram"] = std::move(hist);
    Json qHist = Json::array();
    for (const auto& [q, proportion] : r.qHistogram) {
      qHist.push_back(Json{{"q", q}, {"proportion", proportion}});
    }
    j["qHistogram"] = std::move(qHist);
  }
  return j;
}

/// Assembles the uniform top-level report envelope.
[[nodiscard]] inline Json make_report(const std::string& command,
                                      Json config, Json result,
                                      double timingSeconds) {
  Json j;
  j["schemaVersion"] = 1;
  j["toolVersion"] = kVersion;
  j["command"] = command;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  j["timingSeconds"] = timingSeconds;
  return j;
}

}  // namespace subdim
