#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bans/graph_model.hpp"
#include "bans/random.hpp"

namespace bans {

struct GenConfig {
  int p = 20;
  int n = 200;
  int q = 6;
  double edge_prob = 0.3;
  double magnitude_low = 0.5;
  double magnitude_high = 1.5;
  double diag_pad = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Coefficients B (b_vu != 0 iff u -> v) and residual precision K.
struct MlggmParameters {
  Eigen::MatrixXd B;
  Eigen::MatrixXd K;
};

/// Observations (n x p, column v is vertex v) with vertex names and the layer
/// layout the columns follow.
struct Dataset {
  Eigen::MatrixXd Y;
  std::vector<std::string> names;
  ChainGraph layout;

  int n() const { return static_cast<int>(Y.rows()); }
  int p() const { return static_cast<int>(Y.cols()); }
};

std::vector<std::string> default_names(int p);

/// Layer sizes differing by at most one; the first p mod q layers are larger.
std::vector<int> balanced_layer_sizes(int p, int q);

// The generator draws every edge indicator and magnitude from a keyed uniform
// addressed by the endpoint labels.  `stream_keys[v]` is the label used for
// vertex v (identity when empty); relabeling vertices within a layer and
// permuting the keys the same way permutes the output exactly.

ChainGraph random_chain_graph(const GenConfig& cfg, std::span<const std::uint64_t> stream_keys = {});

MlggmParameters sample_parameters(const ChainGraph& graph, const GenConfig& cfg,
                                  std::span<const std::uint64_t> stream_keys = {});

/// Throws ConfigInvalid unless B and K respect the layer structure and K is
/// symmetric positive definite.
void check_parameters(const MlggmParameters& params, const ChainGraph& layout);

/// Omega = (I - B)^T K (I - B).
Eigen::MatrixXd precision_from_parameters(const MlggmParameters& params);

/// n draws by ancestral sampling through the layers.
Dataset sample_data(const MlggmParameters& params, const ChainGraph& layout, int n, rng::Stream& rng);

/// log N(y; 0, Omega^{-1}) for a single observation.
double joint_log_density(const Eigen::MatrixXd& omega, const Eigen::VectorXd& y);

/// Sum over layers of log N(y_tau; B_{tau,pa} y_pa, K_tau^{-1}).
double layerwise_log_density(const MlggmParameters& params, const ChainGraph& layout, const Eigen::VectorXd& y);

}  // namespace bans
