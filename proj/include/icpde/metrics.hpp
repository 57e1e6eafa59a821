#pragma once

// Error metrics over test queries and the report structure the experiment
// runners fill in. Absolute error is RMS; relative error is the norm ratio.

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "icpde/core.hpp"

namespace icpde {

struct ErrorPair {
  double abs = 0.0;
  double rel = 0.0;  // NaN when the truth has zero norm
};

inline ErrorPair l2_errors(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& truth) {
  if (pred.size() != truth.size() || pred.size() == 0)
    throw Error("shape_mismatch", "prediction and truth must have equal nonzero length");
  ErrorPair e;
  const double diff = (pred - truth).norm();
  e.abs = diff / std::sqrt(double(pred.size()));
  const double tn = truth.norm();
  e.rel = tn > 0.0 ? diff / tn : std::numeric_limits<double>::quiet_NaN();
  return e;
}

struct ReportRow {
  CdrParams params;
  ErrorPair err;
  bool extrapolated = false;  // outside the trained coefficient range
  std::string label;          // optional grouping tag (noise kind, pure term, ...)
};

struct ExperimentReport {
  std::string id;
  std::vector<ReportRow> rows;
  double mean_abs = 0.0, mean_rel = 0.0;
  double std_abs = 0.0, std_rel = 0.0;  // population standard deviation
  double wall_seconds = 0.0;
  std::string config_note;
};

// Mean/std over the rows; rows with undefined relative error poison the
// aggregate deliberately (they indicate a degenerate truth).
inline void finalize_report(ExperimentReport& r) {
  const double n = double(r.rows.size());
  if (r.rows.empty()) {
    r.mean_abs = r.mean_rel = r.std_abs = r.std_rel = 0.0;
    return;
  }
  double sa = 0.0, sr = 0.0;
  for (const auto& row : r.rows) {
    sa += row.err.abs;
    sr += row.err.rel;
  }
  r.mean_abs = sa / n;
  r.mean_rel = sr / n;
  double va = 0.0, vr = 0.0;
  for (const auto& row : r.rows) {
    va += (row.err.abs - r.mean_abs) * (row.err.abs - r.mean_abs);
    vr += (row.err.rel - r.mean_rel) * (row.err.rel - r.mean_rel);
  }
  r.std_abs = std::sqrt(va / n);
  r.std_rel = std::sqrt(vr / n);
}

}  // namespace icpde
