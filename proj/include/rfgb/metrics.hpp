/*
 * Copyright 2026 The RFGB Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Classification metrics: confusion counts at a threshold, the rate summary
// (FPR, FNR, precision, recall, accuracy), rank-based AUC-ROC, and report
// tables for cost sweeps.

#ifndef RFGB_METRICS_HPP_
#define RFGB_METRICS_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rfgb/boost.hpp"
#include "rfgb/error.hpp"
#include "rfgb/text.hpp"

namespace rfgb {

struct ScoredExample {
  GroundAtom target;
  int label = kMisMatch;
  double score = 0;
};

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Predicts Match iff score >= threshold.
inline ConfusionMatrix confusion(const std::vector<ScoredExample>& scored, double threshold) {
  if (scored.empty()) throw EvaluationError("no scored examples");
  if (!(threshold >= 0 && threshold <= 1)) throw EvaluationError("threshold must be in [0, 1]");
  ConfusionMatrix cm;
  for (const auto& s : scored) {
    const bool predicted = s.score >= threshold;
    if (s.label == kMatch) {
      ++(predicted ? cm.tp : cm.fn);
    } else {
      ++(predicted ? cm.fp : cm.tn);
    }
  }
  return cm;
}

// Ratios with a zero denominator are empty.
struct Summary {
  std::optional<double> fpr, fnr, precision, recall, accuracy;
};

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline Summary summary(const ConfusionMatrix& cm) {
  Summary s;
  s.fpr = ratio(cm.fp, cm.fp + cm.tn);
  s.fnr = ratio(cm.fn, cm.fn + cm.tp);
  s.precision = ratio(cm.tp, cm.tp + cm.fp);
  s.recall = ratio(cm.tp, cm.tp + cm.fn);
  s.accuracy = ratio(cm.tp + cm.tn, cm.total());
  return s;
}

// Mann-Whitney statistic from average ranks; ties count one half.
inline double auc_roc(const std::vector<ScoredExample>& scored) {
  std::vector<std::pair<double, int>> v;
  v.reserve(scored.size());
  std::uint64_t n_pos = 0;
  for (const auto& s : scored) {
    v.emplace_back(s.score, s.label);
    n_pos += s.label == kMatch;
  }
  const std::uint64_t n_neg = v.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw EvaluationError("AUC-ROC needs both positive and negative examples");
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Sum of positive ranks, doubled to stay in integers.
  std::uint64_t rank_sum2 = 0;
  for (std::size_t lo = 0; lo < v.size();) {
    std::size_t hi = lo;
    std::uint64_t pos_here = 0;
    while (hi < v.size() && v[hi].first == v[lo].first) pos_here += v[hi++].second == kMatch;
    // ranks lo+1 .. hi, average (lo + 1 + hi) / 2
    rank_sum2 += pos_here * (lo + 1 + hi);
    lo = hi;
  }
  const double u = static_cast<double>(rank_sum2) / 2.0 -
                   static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline std::vector<ScoredExample> score_examples(const BoostedModel& model, const FactBase& fb,
                                                 const std::vector<LabeledExample>& pos,
                                                 const std::vector<LabeledExample>& neg) {
  std::vector<ScoredExample> out;
  out.reserve(pos.size() + neg.size());
  for (const auto* set : {&pos, &neg}) {
    for (const auto& e : *set) out.push_back({e.target, e.label, model.predict_prob(fb, e.target)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct EvalRow {
  double alpha = 0, beta = 0;
  ConfusionMatrix cm;
  Summary s;
  double auc = 0;

  friend bool operator==(const EvalRow& a, const EvalRow& b) {
    return a.alpha == b.alpha && a.beta == b.beta && a.cm == b.cm && a.auc == b.auc;
  }
};

inline EvalRow evaluate(const std::vector<ScoredExample>& scored, double threshold, double alpha = 0,
                        double beta = 0) {
  EvalRow r;
  r.alpha = alpha;
  r.beta = beta;
  r.cm = confusion(scored, threshold);
  r.s = summary(r.cm);
  r.auc = auc_roc(scored);
  return r;
}

// Trains and evaluates one model per (alpha, beta), alphas outermost.
inline std::vector<EvalRow> sweep(
    const std::function<std::vector<ScoredExample>(const CostParams&)>& train_and_score,
    const std::vector<double>& alphas, const std::vector<double>& betas, double threshold) {
  if (alphas.empty() || betas.empty()) throw ConfigError("sweep grids must be nonempty");
  std::vector<EvalRow> rows;
  for (double a : alphas) {
    for (double b : betas) rows.push_back(evaluate(train_and_score({a, b}), threshold, a, b));
  }
  return rows;
}

inline std::string format_rate(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

inline std::string format_rate_exact(const std::optional<double>& v) {
  return v ? text::format_double(*v) : "n/a";
}

inline void write_table(std::ostream& out, const std::vector<EvalRow>& rows) {
  char line[160];
  std::snprintf(line, sizeof line, "%8s %8s %8s %8s %9s %8s %8s %8s\n", "alpha", "beta", "FPR",
                "FNR", "Precision", "Recall", "Accuracy", "AUC-ROC");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%8s %8s %8s %8s %9s %8s %8s %8.3f\n",
                  text::format_double(r.alpha).c_str(), text::format_double(r.beta).c_str(),
                  format_rate(r.s.fpr).c_str(), format_rate(r.s.fnr).c_str(),
                  format_rate(r.s.precision).c_str(), format_rate(r.s.recall).c_str(),
                  format_rate(r.s.accuracy).c_str(), r.auc);
    out << line;
  }
}

inline constexpr std::string_view kCsvHeader =
    "alpha,beta,tp,fp,tn,fn,fpr,fnr,precision,recall,accuracy,auc_roc";

inline void write_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << text::format_double(r.alpha) << ',' << text::format_double(r.beta) << ',' << r.cm.tp
        << ',' << r.cm.fp << ',' << r.cm.tn << ',' << r.cm.fn << ',' << format_rate_exact(r.s.fpr)
        << ',' << format_rate_exact(r.s.fnr) << ',' << format_rate_exact(r.s.precision) << ','
        << format_rate_exact(r.s.recall) << ',' << format_rate_exact(r.s.accuracy) << ','
        << text::format_double(r.auc) << '\n';
  }
}

inline std::vector<EvalRow> parse_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || text::trim(line) != kCsvHeader) {
    throw ParseError("missing report header", lineno);
  }
  std::vector<EvalRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != 12) throw ParseError("expected 12 fields", lineno);
    const auto real = [&](std::string_view s) {
      auto v = text::parse_double(s);
      if (!v) throw ParseError("bad number '" + std::string(s) + "'", lineno);
      return *v;
    };
    const auto count = [&](std::string_view s) {
      auto v = text::parse_int<std::uint64_t>(s);
      if (!v) throw ParseError("bad count '" + std::string(s) + "'", lineno);
      return *v;
    };
    const auto rate = [&](std::string_view s) -> std::optional<double> {
      if (s == "n/a") return std::nullopt;
      return real(s);
    };
    EvalRow r;
    r.alpha = real(f[0]);
    r.beta = real(f[1]);
    r.cm = {count(f[2]), count(f[3]), count(f[4]), count(f[5])};
    r.s = {rate(f[6]), rate(f[7]), rate(f[8]), rate(f[9]), rate(f[10])};
    r.auc = real(f[11]);
    rows.push_back(r);
  }
  return rows;
}

// Scores as `atom<TAB>label<TAB>probability` lines.
inline void write_scores(std::ostream& out, const Vocabulary& vocab,
                         const std::vector<ScoredExample>& scored) {
  for (const auto& s : scored) {
    out << format_atom(vocab, s.target) << '\t' << s.label << '\t' << text::format_double(s.score)
        << '\n';
  }
}

}  // namespace rfgb

#endif  // RFGB_METRICS_HPP_
