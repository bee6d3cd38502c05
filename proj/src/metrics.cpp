#include "bans/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "bans/errors.hpp"

namespace bans {

namespace {

bool reversed_directed(const Edge& e, const ChainGraph& layout) {
  return e.kind == EdgeKind::Directed && e.src >= 0 && e.dst >= 0 && e.src < layout.p() && e.dst < layout.p() &&
         layout.layer_of(e.src) > layout.layer_of(e.dst);
}

std::string describe(const Edge& e) {
  return std::to_string(e.src) + (e.kind == EdgeKind::Directed ? "->" : "-") + std::to_string(e.dst);
}

// Full candidate scores in universe order together with truth labels.
struct Labelled {
  std::vector<double> score;
  std::vector<bool> positive;
  long positives = 0;
};

Labelled label(std::span<const EdgeScore> scores, std::span<const Edge> truth, const ChainGraph& layout) {
  const std::vector<Edge> universe = layout.candidate_universe();
  std::set<Edge> truth_set;
  for (const Edge& e : truth) {
    if (!layout.in_universe(e)) fail(ErrorCode::EdgeOutsideUniverse, "true edge " + describe(e));
    truth_set.insert(e);
  }
  std::map<Edge, double> given;
  for (const EdgeScore& s : scores) {
    if (!layout.in_universe(s.edge)) fail(ErrorCode::EdgeOutsideUniverse, "scored edge " + describe(s.edge));
    given[s.edge] = s.g;
  }
  Labelled out;
  for (const Edge& e : universe) {
    auto it = given.find(e);
    out.score.push_back(it == given.end() ? 0.0 : it->second);
    const bool pos = truth_set.count(e) > 0;
    out.positive.push_back(pos);
    out.positives += pos;
  }
  const long negatives = static_cast<long>(universe.size()) - out.positives;
  if (out.positives == 0 || negatives == 0)
    fail(ErrorCode::DegenerateTruth, "truth must contain both edges and non-edges");
  return out;
}

// Indices sorted by decreasing score; consecutive equal scores form one step.
std::vector<std::size_t> by_score(const std::vector<double>& score) {
  std::vector<std::size_t> idx(score.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return idx;
}

}  // namespace

Confusion confusion(std::span<const Edge> estimated, std::span<const Edge> truth, const ChainGraph& layout) {
  std::set<Edge> truth_set;
  for (const Edge& e : truth) {
    if (!layout.in_universe(e)) fail(ErrorCode::EdgeOutsideUniverse, "true edge " + describe(e));
    truth_set.insert(e);
  }
  std::set<Edge> inside;
  long reversed = 0;
  for (const Edge& e : estimated) {
    if (layout.in_universe(e))
      inside.insert(e);
    else if (reversed_directed(e, layout))
      ++reversed;
    else
      fail(ErrorCode::EdgeOutsideUniverse, "estimated edge " + describe(e));
  }
  Confusion c;
  for (const Edge& e : inside) c.tp += truth_set.count(e);
  const long universe = static_cast<long>(layout.candidate_universe().size());
  const long fp_inside = static_cast<long>(inside.size()) - c.tp;
  c.fn = static_cast<long>(truth_set.size()) - c.tp;
  c.fp = fp_inside + reversed;
  c.tn = universe - c.tp - c.fn - fp_inside;
  return c;
}

double mcc(const Confusion& c) {
  const long double tp = c.tp, tn = c.tn, fp = c.fp, fn = c.fn;
  const long double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0) return 0.0;
  return static_cast<double>((tp * tn - fp * fn) / std::sqrt(den));
}

double sensitivity(const Confusion& c) {
  return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double specificity(const Confusion& c) {
  return c.tn + c.fp == 0 ? 0.0 : static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

RocCurve roc(std::span<const EdgeScore> scores, std::span<const Edge> truth, const ChainGraph& layout,
             double spec_min) {
  if (!(spec_min >= 0.0 && spec_min < 1.0)) fail(ErrorCode::ConfigInvalid, "spec_min must lie in [0, 1)");
  const Labelled lab = label(scores, truth, layout);
  const double P = static_cast<double>(lab.positives);
  const double N = static_cast<double>(lab.score.size()) - P;
  const std::vector<std::size_t> idx = by_score(lab.score);

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0, fp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (lab.positive[idx[k]] ? tp : fp) += 1.0;
    if (k + 1 < idx.size() && lab.score[idx[k + 1]] == lab.score[idx[k]]) continue;
    curve.points.push_back({lab.score[idx[k]], fp / N, tp / P});
  }

  const double width = 1.0 - spec_min;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    const double lo = std::min(a.fpr, width);
    const double hi = std::min(b.fpr, width);
    if (hi > lo) {
      const double slope = (b.tpr - a.tpr) / (b.fpr - a.fpr);
      const double t_lo = a.tpr + slope * (lo - a.fpr);
      const double t_hi = a.tpr + slope * (hi - a.fpr);
      curve.pauc += (hi - lo) * (t_lo + t_hi) / 2.0;
    }
  }
  curve.pauc /= width;
  return curve;
}

std::vector<MccPoint> mcc_curve(std::span<const EdgeScore> scores, std::span<const Edge> truth,
                                const ChainGraph& layout) {
  const Labelled lab = label(scores, truth, layout);
  const long total = static_cast<long>(lab.score.size());
  const std::vector<std::size_t> idx = by_score(lab.score);
  std::vector<MccPoint> out{{0, std::numeric_limits<double>::infinity(), 0.0}};
  long tp = 0, fp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (lab.positive[idx[k]] ? tp : fp) += 1;
    if (k + 1 < idx.size() && lab.score[idx[k + 1]] == lab.score[idx[k]]) continue;
    Confusion c{tp, total - lab.positives - fp, fp, lab.positives - tp};
    out.push_back({tp + fp, lab.score[idx[k]], mcc(c)});
  }
  return out;
}

}  // namespace bans

namespace bans {

double binary_auc(std::span<const double> score, std::span<const std::uint8_t> positive) {
  if (score.size() != positive.size()) fail(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  std::vector<std::size_t> idx(score.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double rank_sum = 0.0;
  double npos = 0.0;
  for (std::size_t k = 0; k < idx.size();) {
    std::size_t end = k;
    while (end < idx.size() && score[idx[end]] == score[idx[k]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t t = k; t < end; ++t)
      if (positive[idx[t]]) {
        rank_sum += mid_rank;
        npos += 1.0;
      }
    k = end;
  }
  const double nneg = static_cast<double>(score.size()) - npos;
  if (npos == 0.0 || nneg == 0.0) fail(ErrorCode::DegenerateTruth, "both label classes are required");
  return (rank_sum - npos * (npos + 1.0) / 2.0) / (npos * nneg);
}

}  // namespace bans
