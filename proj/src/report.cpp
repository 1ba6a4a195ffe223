#include "json.hpp"
#include "stc/ecic.hpp"

namespace stc {

using json = nlohmann::ordered_json;

namespace {

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string report_to_json(const EnhanceReport& report, const std::string& final_labeling_path) {
  json history = json::array();
  for (const auto& rec : report.history) {
    json r;
    r["iteration"] = rec.iteration;
    r["p_sampled"] = rec.p_sampled;
    r["delta"] = rec.delta;
    r["cluster_sizes"] = rec.cluster_sizes;
    r["train_size"] = rec.train_size;
    r["test_size"] = rec.test_size;
    r["outliers"] = rec.outliers;
    r["accuracy"] = optional_value(rec.accuracy);
    r["nmi"] = optional_value(rec.nmi);
    if (!rec.warnings.empty()) r["warnings"] = rec.warnings;
    history.push_back(std::move(r));
  }
  json out;
  out["format"] = "stc-enhance-report/1";
  out["seed"] = report.seed;
  out["n"] = report.initial.size();
  out["k"] = report.initial.k;
  out["initial"] = {{"accuracy", optional_value(report.initial_accuracy)}, {"nmi", optional_value(report.initial_nmi)}};
  out["history"] = std::move(history);
  out["stop_reason"] = std::string(to_string(report.stop_reason));
  out["selected_iteration"] = report.selected_iteration;
  out["final"] = {{"accuracy", optional_value(report.final_accuracy)}, {"nmi", optional_value(report.final_nmi)}};
  out["final_labeling"] = final_labeling_path;
  if (!report.error.empty()) out["error"] = report.error;
  return out.dump(2) + "\n";
}

}  // namespace stc
