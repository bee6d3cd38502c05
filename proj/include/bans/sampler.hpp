#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "bans/datagen.hpp"
#include "bans/graph_model.hpp"

namespace bans {

/// Spike-and-slab hyperparameters.  Per-layer vectors may hold a single value,
/// which then applies to every layer.
struct PriorConfig {
  std::vector<double> lambda{2.0};
  std::vector<double> delta{2.0};
  std::vector<double> c2;  // empty: 1 / lambda per layer
  double p_dir = 0.1;
  double q_undir = 0.1;
  /// Edge-specific inclusion probabilities; 0 or 1 pin the indicator.
  std::map<Edge, double> overrides;

  double lambda_at(int layer) const;
  double delta_at(int layer) const;
  double c2_at(int layer) const;
  double inclusion(const Edge& e) const;

  void validate(int num_layers) const;
};

struct RunConfig {
  int n_iter = 30000;  // including burn-in
  int burn_in = 10000;
  int thin = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool store_indicators = false;
  bool check_invariants = true;
  /// Leading burn-in sweeps of a BANS run that use the node-wise kernel
  /// before switching to the symmetric one; negative means burn_in / 2.
  int warm_start = -1;

  int warm_sweeps() const { return warm_start < 0 ? burn_in / 2 : std::min(warm_start, burn_in); }
  int retained() const { return n_iter > burn_in && thin > 0 ? (n_iter - burn_in) / thin : 0; }
  void validate() const;
};

enum class Mode { Bans, BansParallel };
enum class Symmetrize { And, Or };

/// Current values of every indicator and coefficient, stored as p x p
/// matrices indexed (v, w):
///   gamma(v,w), b(v,w)  for the directed edge w -> v
///   eta(v,w), alpha(v,w) for v's regression on w in the same layer
struct SamplerState {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> gamma;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> eta;
  Eigen::MatrixXd b;
  Eigen::MatrixXd alpha;
  Eigen::VectorXd kappa;

  static SamplerState empty(int p);
  /// The state implied by generating parameters: b = B, alpha_v = -K_{C_v,v} / k_vv.
  static SamplerState from_parameters(const MlggmParameters& params, const ChainGraph& layout);
};

/// Which blocks a sweep refreshes.  The default is the full sampler; the
/// structured sign run fixes both indicator sets.
struct SweepPlan {
  bool eta = true;
  bool alpha_kappa = true;
  bool gamma = true;
  bool b = true;
  bool kappa = true;
};

/// Retained draws of one chain.  Count matrices use the SamplerState (v, w)
/// convention.
struct ChainTrace {
  int p = 0;
  Mode mode = Mode::Bans;
  Symmetrize symmetrize = Symmetrize::And;
  int n_iter = 0;
  int burn_in = 0;
  int thin = 1;
  int n_retained = 0;

  Eigen::MatrixXd directed_count;
  Eigen::MatrixXd undirected_count;
  Eigen::MatrixXd b_positive;
  Eigen::MatrixXd alpha_positive;
  Eigen::MatrixXd b_sum;
  Eigen::MatrixXd alpha_sum;

  std::vector<double> edge_count;  // per retained iteration
  std::vector<double> mean_kappa;
  std::vector<double> log_likelihood;
  /// Active edges per retained iteration (only with store_indicators).
  std::vector<std::vector<Edge>> indicators;
  long invariant_violations = 0;
  double seconds = 0.0;

  static ChainTrace zeros(int p);
};

/// Layered BANS sampler with the symmetric within-layer constraint.
ChainTrace run_bans(const Dataset& data, const PriorConfig& prior, const RunConfig& run);

/// Node-wise sampler without the symmetric constraint; within-layer
/// probabilities are symmetrized afterwards by min (And) or max (Or).
ChainTrace run_bans_parallel(const Dataset& data, const PriorConfig& prior, const RunConfig& run,
                             Symmetrize symmetrize = Symmetrize::And);

struct SignPosterior {
  Edge edge;
  double prob_positive = 0.5;
  double posterior_mean = 0.0;
};

/// Coefficient and precision updates only, with the indicator structure
/// pinned to `structure`.  Undirected edges report the average of
/// P(alpha_vw > 0) and P(alpha_wv > 0).
std::vector<SignPosterior> structured_sign_run(const Dataset& data, std::span<const Edge> structure,
                                               const PriorConfig& prior, const RunConfig& run);

/// Column-centres Y in place.
void center_columns(Dataset& data);

/// Centres and scales every column to unit sample variance; throws
/// DegenerateColumn for a constant column.
void standardize_columns(Dataset& data);

}  // namespace bans
