#include "satad/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "satad/errors.hpp"

namespace satad {

double precision_from_counts(std::size_t tp, std::size_t fp) {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall_from_counts(std::size_t tp, std::size_t fn) {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double f1_from_pr(double precision, double recall) {
  double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

namespace {

ClassMetrics one_vs_rest(const std::vector<int>& predicted, const std::vector<int>& truth,
                         int positive) {
  ClassMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool p = predicted[i] == positive;
    bool t = truth[i] == positive;
    if (p && t) ++m.tp;
    else if (p && !t) ++m.fp;
    else if (!p && t) ++m.fn;
    else ++m.tn;
  }
  m.precision = precision_from_counts(m.tp, m.fp);
  m.recall = recall_from_counts(m.tp, m.fn);
  m.f1 = f1_from_pr(m.precision, m.recall);
  return m;
}

}  // namespace

EvalReport evaluate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw ContractError("evaluate: length mismatch");
  if (truth.empty()) throw ContractError("evaluate: empty inputs");

  EvalReport report;
  ClassMetrics binary = one_vs_rest(predicted, truth, 0);
  report.tp = binary.tp;
  report.fp = binary.fp;
  report.fn = binary.fn;
  report.tn = binary.tn;
  report.precision = binary.precision;
  report.recall = binary.recall;
  report.f1 = binary.f1;

  std::set<int> labels(truth.begin(), truth.end());
  labels.insert(predicted.begin(), predicted.end());
  for (int lab : labels) report.per_class[lab] = one_vs_rest(predicted, truth, lab);
  return report;
}

SweepResult threshold_sweep(const std::vector<double>& scores, const std::vector<int>& truth,
                            std::size_t n_points) {
  if (n_points < 2) throw ConfigError("threshold_sweep: n_points must be >= 2");
  if (scores.size() != truth.size()) throw ContractError("threshold_sweep: length mismatch");
  if (scores.empty()) throw ContractError("threshold_sweep: empty inputs");

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> thresholds;
  for (std::size_t i = 0; i < n_points; ++i) {
    double q = static_cast<double>(i) / static_cast<double>(n_points - 1);
    std::size_t idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
    thresholds.push_back(sorted[idx]);
  }
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  SweepResult result;
  result.best_f1 = -1.0;
  for (double th : thresholds) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      bool pred_anom = scores[i] > th;
      bool true_anom = truth[i] == 0;
      if (pred_anom && true_anom) ++tp;
      else if (pred_anom && !true_anom) ++fp;
      else if (!pred_anom && true_anom) ++fn;
    }
    SweepPoint pt;
    pt.threshold = th;
    pt.precision = precision_from_counts(tp, fp);
    pt.recall = recall_from_counts(tp, fn);
    pt.f1 = f1_from_pr(pt.precision, pt.recall);
    result.curve.push_back(pt);
    if (pt.f1 > result.best_f1) {
      result.best_f1 = pt.f1;
      result.best_threshold = th;
    }
  }
  return result;
}

void SweepResult::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "threshold,precision,recall,f1\n";
  char buf[160];
  for (const SweepPoint& pt : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", pt.threshold, pt.precision,
                  pt.recall, pt.f1);
    out << buf;
  }
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["tp"] = tp;
  j["fp"] = fp;
  j["fn"] = fn;
  j["tn"] = tn;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  nlohmann::json pc = nlohmann::json::object();
  for (const auto& [lab, m] : per_class) {
    nlohmann::json cm;
    cm["tp"] = m.tp;
    cm["fp"] = m.fp;
    cm["fn"] = m.fn;
    cm["tn"] = m.tn;
    cm["precision"] = m.precision;
    cm["recall"] = m.recall;
    cm["f1"] = m.f1;
    pc[std::to_string(lab)] = cm;
  }
  j["per_class"] = pc;
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  char buf[160];
  os << "class      P        R        F1       tp       fp       fn\n";
  std::snprintf(buf, sizeof buf, "binary   %8.4f %8.4f %8.4f %8zu %8zu %8zu\n", precision, recall,
                f1, tp, fp, fn);
  os << buf;
  for (const auto& [lab, m] : per_class) {
    std::snprintf(buf, sizeof buf, "%-8d %8.4f %8.4f %8.4f %8zu %8zu %8zu\n", lab, m.precision,
                  m.recall, m.f1, m.tp, m.fp, m.fn);
    os << buf;
  }
  return os.str();
}

}  // namespace satad
