#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bans/graph_model.hpp"
#include "bans/random.hpp"
#include "bans/sampler.hpp"

namespace bans {

/// Per-layer summaries of one state, summed over the layer's vertices.
struct LayerStats {
  double edges = 0.0;
  double kappa_sum = 0.0;
  double log_likelihood = 0.0;
};

/// Gibbs kernels for one layer of the chain graph.  All data enter through
/// the Gram matrix G = Y^T Y (columns in layer order) and the sample size.
///
/// BANS sweep (`sweep`):
///   1. every unordered pair {i, j} of the layer, lexicographically, draws the
///      shared eta_ij = eta_ji with alpha and kappa of both nodes integrated out;
///   2. every vertex draws kappa_v, then alpha_v;
///   3. every vertex v in label order draws gamma_v single-site and b_v jointly
///      with b integrated out, pooling all node likelihoods that contain b_v,
///      then kappa_v from its full conditional.
///
/// BANS-parallel sweep (`prepare_parallel` once, then `vertex_step` for each
/// vertex in any order or concurrently): each vertex uses only its own node
/// likelihood and the coefficient rows of the other vertices as they were at
/// the start of the sweep.
///
/// Random streams are per vertex (and one per layer for pair updates), so the
/// draws do not depend on how vertices are scheduled across threads.
class LayerSampler {
 public:
  LayerSampler(const ChainGraph& layout, int layer, const PriorConfig& prior, std::uint64_t seed);

  /// The Gram matrix must outlive the sampler or the next bind().
  void bind(const Eigen::MatrixXd& gram, int n);

  int layer() const { return layer_; }
  Vertex begin() const { return lo_; }
  Vertex end() const { return hi_; }

  /// kappa_v = n / G_vv for the layer's vertices.
  void initialise(SamplerState& state) const;

  void sweep(SamplerState& state, const SweepPlan& plan);

  void prepare_parallel(const SamplerState& state);
  void vertex_step(Vertex v, SamplerState& state, const SweepPlan& plan);

  /// eta_ij = eta_ji = eta_ij AND eta_ji within the layer; alpha follows.
  void symmetrize(SamplerState& state) const;

  /// Undirected edges are counted once per pair when `eta_and` holds the
  /// pair's two indicators jointly (AND), otherwise when either is set (OR).
  LayerStats stats(const SamplerState& state, bool eta_and = true) const;

  /// Number of violated invariants (support consistency, kappa > 0 and,
  /// when `symmetric`, eta_ij == eta_ji) among the layer's vertices.
  int invariant_violations(const SamplerState& state, bool symmetric) const;

  /// Layer-local Gram of the parent-adjusted responses y_i - Y_P b_i.
  Eigen::MatrixXd residual_gram(const SamplerState& state) const;

 private:
  struct Hyper {
    double lambda, c2, a0, log_lambda;
  };

  double undirected_increment(int i, const std::vector<int>& base, int j, double a, double b) const;
  void draw_alpha_kappa(Vertex v, SamplerState& state, rng::Stream& rng) const;
  void directed_update(Vertex v, SamplerState& state, const SweepPlan& plan, const Eigen::MatrixXd& b_other,
                       bool pooled, rng::Stream& rng) const;
  double residual_norm(Vertex v, const SamplerState& state, const Eigen::MatrixXd& b_other) const;
  void draw_kappa(Vertex v, SamplerState& state, const Eigen::MatrixXd& b_other, rng::Stream& rng) const;
  double kappa_shape_base(Vertex v, const SamplerState& state) const;
  double kappa_rate_base(Vertex v, const SamplerState& state) const;

  const ChainGraph* layout_;
  int layer_;
  Vertex lo_, hi_;
  Hyper hyper_;
  Eigen::MatrixXd log_odds_dir_;    // (v - lo, w) prior log odds of w -> v
  Eigen::MatrixXd log_odds_undir_;  // layer-local, symmetric
  const Eigen::MatrixXd* gram_ = nullptr;
  int n_ = 0;
  std::vector<rng::Stream> vertex_rng_;
  rng::Stream pair_rng_;
  Eigen::MatrixXd S_;
  Eigen::MatrixXd b_snapshot_;
};

}  // namespace bans
