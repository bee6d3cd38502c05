#include "bans/datagen.hpp"

#include <cmath>
#include <numbers>

#include "bans/errors.hpp"

namespace bans {

namespace {

std::uint64_t key_of(std::span<const std::uint64_t> keys, Vertex v) {
  return keys.empty() ? static_cast<std::uint64_t>(v) : keys[static_cast<std::size_t>(v)];
}

void check_keys(std::span<const std::uint64_t> keys, int p) {
  if (!keys.empty() && static_cast<int>(keys.size()) != p)
    fail(ErrorCode::DimensionMismatch, "stream key count differs from p");
}

// Nonzero entries are uniform on (-high, -low) U (low, high).
double signed_magnitude(const GenConfig& cfg, double u_magnitude, double u_sign) {
  const double m = cfg.magnitude_low + (cfg.magnitude_high - cfg.magnitude_low) * u_magnitude;
  return u_sign < 0.5 ? -m : m;
}

}  // namespace

void GenConfig::validate() const {
  if (p < 1) fail(ErrorCode::ConfigInvalid, "p must be positive");
  if (q < 1 || q > p) fail(ErrorCode::ConfigInvalid, "q must lie in 1..p");
  if (n < 1) fail(ErrorCode::ConfigInvalid, "n must be positive");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) fail(ErrorCode::ConfigInvalid, "edge probability outside [0,1]");
  if (!(magnitude_low > 0.0 && magnitude_low < magnitude_high))
    fail(ErrorCode::ConfigInvalid, "magnitude bounds must satisfy 0 < low < high");
  if (!(diag_pad > 0.0)) fail(ErrorCode::ConfigInvalid, "diag_pad must be positive");
}

std::vector<std::string> default_names(int p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int v = 1; v <= p; ++v) names.push_back("Y" + std::to_string(v));
  return names;
}

std::vector<int> balanced_layer_sizes(int p, int q) {
  if (q < 1 || q > p) fail(ErrorCode::ConfigInvalid, "q must lie in 1..p");
  std::vector<int> sizes(static_cast<std::size_t>(q), p / q);
  for (int k = 0; k < p % q; ++k) ++sizes[static_cast<std::size_t>(k)];
  return sizes;
}

ChainGraph random_chain_graph(const GenConfig& cfg, std::span<const std::uint64_t> keys) {
  cfg.validate();
  check_keys(keys, cfg.p);
  const auto sizes = balanced_layer_sizes(cfg.p, cfg.q);
  ChainGraphSpec spec = layered_spec(sizes);
  const ChainGraph layout = validate(spec);

  for (int k = 0; k < layout.num_layers(); ++k) {
    for (Vertex a = layout.layer_begin(k); a < layout.layer_end(k); ++a) {
      for (Vertex b = a + 1; b < layout.layer_end(k); ++b) {
        const auto ka = key_of(keys, a), kb = key_of(keys, b);
        const double u = rng::keyed_uniform(cfg.seed, {rng::tag(rng::Tag::GraphUndirected), std::min(ka, kb),
                                                       std::max(ka, kb)});
        if (u < cfg.edge_prob) spec.add_undirected(a, b);
      }
    }
    if (k == 0) continue;
    // Directed edges only between consecutive layers, with probability p_E / 2.
    for (Vertex w = layout.layer_begin(k - 1); w < layout.layer_end(k - 1); ++w) {
      for (Vertex v = layout.layer_begin(k); v < layout.layer_end(k); ++v) {
        const double u =
            rng::keyed_uniform(cfg.seed, {rng::tag(rng::Tag::GraphDirected), key_of(keys, w), key_of(keys, v)});
        if (u < 0.5 * cfg.edge_prob) spec.add_directed(w, v);
      }
    }
  }
  return validate(std::move(spec));
}

MlggmParameters sample_parameters(const ChainGraph& graph, const GenConfig& cfg,
                                  std::span<const std::uint64_t> keys) {
  cfg.validate();
  check_keys(keys, graph.p());
  const int p = graph.p();
  MlggmParameters params{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};

  for (auto [w, v] : graph.spec().directed) {
    const auto kw = key_of(keys, w), kv = key_of(keys, v);
    const auto t = rng::tag(rng::Tag::ParamB);
    params.B(v, w) = signed_magnitude(cfg, rng::keyed_uniform(cfg.seed, {t, kw, kv, 0}),
                                      rng::keyed_uniform(cfg.seed, {t, kw, kv, 1}));
  }
  for (auto [a, b] : graph.spec().undirected) {
    const auto ka = key_of(keys, a), kb = key_of(keys, b);
    const auto lo = std::min(ka, kb), hi = std::max(ka, kb);
    const auto t = rng::tag(rng::Tag::ParamK);
    const double value = signed_magnitude(cfg, rng::keyed_uniform(cfg.seed, {t, lo, hi, 0}),
                                          rng::keyed_uniform(cfg.seed, {t, lo, hi, 1}));
    params.K(a, b) = value;
    params.K(b, a) = value;
  }
  // Diagonal dominance: column sums of absolute off-diagonal values plus a pad.
  for (int v = 0; v < p; ++v) params.K(v, v) = params.K.col(v).cwiseAbs().sum() + cfg.diag_pad;
  return params;
}

void check_parameters(const MlggmParameters& params, const ChainGraph& layout) {
  const int p = layout.p();
  if (params.B.rows() != p || params.B.cols() != p || params.K.rows() != p || params.K.cols() != p)
    fail(ErrorCode::DimensionMismatch, "parameter matrices must be p x p");
  for (int v = 0; v < p; ++v) {
    for (int u = 0; u < p; ++u) {
      if (layout.layer_of(u) >= layout.layer_of(v) && params.B(v, u) != 0.0)
        fail(ErrorCode::ConfigInvalid, "B has an entry that does not point to a later layer");
      if (layout.layer_of(u) != layout.layer_of(v) && params.K(v, u) != 0.0)
        fail(ErrorCode::ConfigInvalid, "K has an entry across layers");
      if (params.K(v, u) != params.K(u, v)) fail(ErrorCode::ConfigInvalid, "K is not symmetric");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(params.K);
  if (llt.info() != Eigen::Success) fail(ErrorCode::FactorizationFailure, "K is not positive definite");
}

Eigen::MatrixXd precision_from_parameters(const MlggmParameters& params) {
  const Eigen::MatrixXd I_minus_B = Eigen::MatrixXd::Identity(params.B.rows(), params.B.cols()) - params.B;
  return I_minus_B.transpose() * params.K * I_minus_B;
}

Dataset sample_data(const MlggmParameters& params, const ChainGraph& layout, int n, rng::Stream& rng) {
  if (n < 1) fail(ErrorCode::ConfigInvalid, "n must be positive");
  const int p = layout.p();
  if (params.B.rows() != p || params.K.rows() != p)
    fail(ErrorCode::DimensionMismatch, "parameters do not match the layout");

  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, p);
  for (int k = 0; k < layout.num_layers(); ++k) {
    const Vertex begin = layout.layer_begin(k);
    const int size = layout.layer_size(k);
    Eigen::LLT<Eigen::MatrixXd> llt(params.K.block(begin, begin, size, size));
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::FactorizationFailure, "K block of layer " + std::to_string(k + 1) + " is not positive definite");

    // eps = L^{-T} z has covariance (L L^T)^{-1} = K_tau^{-1}.
    Eigen::MatrixXd z(size, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < size; ++j) z(j, i) = rng.normal();
    const Eigen::MatrixXd eps = llt.matrixU().solve(z);

    auto Y_tau = Y.middleCols(begin, size);
    Y_tau = eps.transpose();
    if (begin > 0) Y_tau += Y.leftCols(begin) * params.B.block(begin, 0, size, begin).transpose();
  }
  return Dataset{std::move(Y), default_names(p), layout};
}

double joint_log_density(const Eigen::MatrixXd& omega, const Eigen::VectorXd& y) {
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success) fail(ErrorCode::FactorizationFailure, "precision is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double quad = y.dot(omega * y);
  return 0.5 * log_det - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * quad;
}

double layerwise_log_density(const MlggmParameters& params, const ChainGraph& layout, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (int k = 0; k < layout.num_layers(); ++k) {
    const Vertex begin = layout.layer_begin(k);
    const int size = layout.layer_size(k);
    Eigen::VectorXd resid = y.segment(begin, size);
    if (begin > 0) resid -= params.B.block(begin, 0, size, begin) * y.head(begin);
    total += joint_log_density(params.K.block(begin, begin, size, size), resid);
  }
  return total;
}

}  // namespace bans
