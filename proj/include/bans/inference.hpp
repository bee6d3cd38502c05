#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bans/graph_model.hpp"
#include "bans/sampler.hpp"

namespace bans {

struct EdgeScore {
  Edge edge;
  double g = 0.0;
};

/// Posterior inclusion frequencies as a p x p matrix: entry (v, w) holds
/// P(w -> v) for w in an earlier layer and the within-layer probability of
/// v - w (symmetric; BANS-parallel traces are symmetrized by min or max
/// according to the trace's Symmetrize setting).
Eigen::MatrixXd ppi(const ChainTrace& trace);

/// One score per candidate edge of the layout, in candidate-universe order.
std::vector<EdgeScore> edge_probabilities(const Eigen::MatrixXd& g, const ChainGraph& layout);

struct FdrSelection {
  double phi = 1.0;
  int xi = 0;
  std::vector<EdgeScore> selected;  // in decreasing g order
};

/// Decreasing order of g, ties by edge.
std::vector<EdgeScore> ranked(std::span<const EdgeScore> scores);

/// Largest prefix of the ranking (ending at a tie boundary) whose mean of
/// 1 - g is below alpha; phi is the smallest selected g.  With no discovery the
/// selection is empty and phi = 1.
FdrSelection fdr_select(std::span<const EdgeScore> scores, double alpha);

/// Mean of 1 - g over scores strictly above phi.  Throws EmptySelection when
/// none is.
double expected_fdr(std::span<const EdgeScore> scores, double phi);

/// Mean of 1 - g over the selected edges (0 for an empty selection).
double selection_fdr(const FdrSelection& selection);

struct SignedEdge {
  Edge edge;
  int sign = 1;
  double prob_positive = 0.5;
};

/// Positive iff P(coefficient > 0) > xi.
std::vector<SignedEdge> call_signs(std::span<const SignPosterior> signs, double xi = 0.5);

/// W_i = sum of g over the given edges incident to i.
Eigen::VectorXd weighted_degree(std::span<const EdgeScore> edges, int p);

/// Vertices reachable from `seed` along edges of either kind, sorted.
std::vector<Vertex> connected_component(std::span<const Edge> edges, int p, Vertex seed);

/// Observed over possible edges within layer `from` (from == to) or from
/// layer `from` to a later layer `to`.  0 when no edge is possible.
double connectivity_score(std::span<const Edge> edges, const ChainGraph& layout, int from, int to);

struct ConnectivityRow {
  int from = 0;
  int to = 0;
  double mean = 0.0;
  double sd = 0.0;  // across runs, n - 1 denominator; 0 for a single run
  std::vector<double> per_run;
};

/// Every within-layer block and every ordered layer pair, summarised across runs.
std::vector<ConnectivityRow> connectivity_table(std::span<const std::vector<Edge>> runs, const ChainGraph& layout);

struct IntersectionRow {
  std::vector<int> runs;  // the exact set of runs containing the edges
  long count = 0;
};

/// Edges present in exactly the runs of each nonempty subset; one row per
/// subset, ordered by subset bitmask.
std::vector<IntersectionRow> intersection_counts(std::span<const std::vector<Edge>> runs);

}  // namespace bans
