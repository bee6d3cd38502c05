#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bans/graph_model.hpp"
#include "bans/inference.hpp"

namespace bans {

/// Counts over the candidate universe of a layout.
struct Confusion {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const { return tp + tn + fp + fn; }
};

// Estimated directed edges pointing from a later to an earlier layer (only
// possible for edge lists produced elsewhere) are counted as false positives
// without occupying a candidate slot; the true edge they reverse remains a
// false negative.  Anything else outside the universe is rejected.
Confusion confusion(std::span<const Edge> estimated, std::span<const Edge> truth, const ChainGraph& layout);

/// 0 when any factor of the denominator vanishes.
double mcc(const Confusion& c);
double sensitivity(const Confusion& c);
double specificity(const Confusion& c);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
  double pauc = 0.0;  // over FPR in [0, 1 - spec_min], divided by its width
};

/// Scores for candidate edges; candidates without a score count as 0.
RocCurve roc(std::span<const EdgeScore> scores, std::span<const Edge> truth, const ChainGraph& layout,
             double spec_min = 0.8);

struct MccPoint {
  long discoveries = 0;
  double threshold = 0.0;
  double mcc = 0.0;
};

/// MCC at every distinct score threshold, preceded by the empty selection.
std::vector<MccPoint> mcc_curve(std::span<const EdgeScore> scores, std::span<const Edge> truth,
                                const ChainGraph& layout);

}  // namespace bans

namespace bans {

/// Area under the ROC curve of `score` for the binary labels, ties counted
/// as one half (the Mann-Whitney statistic).  DegenerateTruth unless both
/// labels occur.
double binary_auc(std::span<const double> score, std::span<const std::uint8_t> positive);

}  // namespace bans
