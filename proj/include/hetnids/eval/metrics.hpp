#pragma once

#include <stdexcept>
#include <vector>

namespace hetnids {

// Binary classification metrics with the attack class (1) as positive.
// When a denominator is zero the metric is reported as 0 and flagged.
struct Metrics {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

inline Metrics evaluate(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument("evaluate: prediction/label length mismatch");
  Metrics m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i];
    const int y = labels[i];
    if (p == 1 && y == 1) ++m.tp;
    else if (p == 1 && y == 0) ++m.fp;
    else if (p == 0 && y == 0) ++m.tn;
    else ++m.fn;
  }
  const double total = static_cast<double>(preds.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / total;
  if (m.tp + m.fp > 0) {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  } else {
    m.precision_defined = false;
  }
  if (m.tp + m.fn > 0) {
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  } else {
    m.recall_defined = false;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_defined = false;
  }
  return m;
}

}  // namespace hetnids
