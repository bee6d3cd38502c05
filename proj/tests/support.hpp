#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bans/datagen.hpp"
#include "bans/graph_model.hpp"
#include "bans/layer_sampler.hpp"
#include "bans/sampler.hpp"

namespace testing {

using namespace bans;

inline ChainGraph make_graph(std::vector<int> sizes, std::vector<Edge> edges = {}) {
  ChainGraphSpec spec = layered_spec(sizes);
  for (const Edge& e : edges) spec.add(e);
  return validate(std::move(spec));
}

/// Layers {Y1, Y2} and {Y3, Y4} with Y1 -> Y3, Y2 -> Y4, Y3 - Y4.
inline ChainGraph toy_graph() {
  return make_graph({2, 2}, {Edge::directed(0, 2), Edge::directed(1, 3), Edge::undirected(2, 3)});
}

inline MlggmParameters toy_params() {
  MlggmParameters p{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4)};
  p.B(2, 0) = 0.8;
  p.B(3, 1) = -1.1;
  p.K << 1.2, 0, 0, 0,  //
      0, 0.9, 0, 0,     //
      0, 0, 1.5, 0.6,   //
      0, 0, 0.6, 1.3;
  return p;
}

/// A random layered spec with every candidate edge present with probability
/// `density`, directed edges from any earlier layer.
inline ChainGraph random_spec(std::mt19937_64& rng, int max_p, double density) {
  std::uniform_int_distribution<int> pick_p(2, max_p);
  const int p = pick_p(rng);
  std::uniform_int_distribution<int> pick_q(1, p);
  const int q = pick_q(rng);
  std::vector<int> sizes(static_cast<std::size_t>(q), 1);
  std::uniform_int_distribution<int> pick_layer(0, q - 1);
  for (int extra = p - q; extra > 0; --extra) ++sizes[static_cast<std::size_t>(pick_layer(rng))];
  const ChainGraph layout = make_graph(sizes);
  std::bernoulli_distribution keep(density);
  std::vector<Edge> edges;
  for (const Edge& e : layout.candidate_universe())
    if (keep(rng)) edges.push_back(e);
  return layout.with_edges(edges);
}

/// log N(y; 0, omega^{-1}) written out from the definition.
inline double gaussian_log_density(const Eigen::MatrixXd& precision, const Eigen::VectorXd& y) {
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  const Eigen::MatrixXd L = llt.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
  return -0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) + 0.5 * log_det -
         0.5 * y.dot(precision * y);
}

/// log of the normal-gamma marginal likelihood of y regressed on X with
/// coefficient prior N(0, prior_var / kappa) and kappa ~ Gamma(a0, rate b0).
inline double ng_log_marginal(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double prior_var, double a0,
                              double b0) {
  const double n = static_cast<double>(y.size());
  const int k = static_cast<int>(X.cols());
  double quad = y.squaredNorm();
  double log_det = 0.0;
  if (k > 0) {
    const Eigen::MatrixXd A =
        X.transpose() * X + Eigen::MatrixXd::Identity(k, k) / prior_var;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd xty = X.transpose() * y;
    quad -= xty.dot(ldlt.solve(xty));
    log_det = ldlt.vectorD().array().log().sum();
  }
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * k * std::log(prior_var) - 0.5 * log_det +
         a0 * std::log(b0) - std::lgamma(a0) + std::lgamma(a0 + 0.5 * n) - (a0 + 0.5 * n) * std::log(b0 + 0.5 * quad);
}

/// Mean and batch-means standard error of a (possibly autocorrelated) series.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe batch_mean_se(std::span<const double> x, int batches = 50) {
  const std::size_t n = x.size();
  const std::size_t len = n / static_cast<std::size_t>(batches);
  double total = 0.0;
  for (double v : x) total += v;
  MeanSe out;
  out.mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (int b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = 0; i < len; ++i) m += x[b * len + i];
    m /= static_cast<double>(len);
    ss += (m - out.mean) * (m - out.mean);
  }
  out.se = std::sqrt(ss / (batches - 1) / batches);
  return out;
}

// Joint-distribution check on a four-vertex, two-layer model with undirected
// edges pinned off, so that the node likelihoods form a proper joint density.
// Marginal-conditional draws (theta from the prior, y | theta) are compared to
// successive-conditional draws (alternating one sweep of theta | y with a
// fresh y | theta) on the edge count and the mean precision.
struct GewekeResult {
  MeanSe forward_edges, chain_edges, forward_kappa, chain_kappa, forward_b, chain_b;
  double z_edges = 0.0, z_kappa = 0.0, z_b = 0.0;
};

inline GewekeResult geweke_test(int rounds, int n, std::uint64_t seed) {
  const ChainGraph layout = make_graph({2, 2});
  PriorConfig prior;
  prior.p_dir = 0.4;
  prior.q_undir = 0.5;
  prior.overrides[Edge::undirected(0, 1)] = 0.0;
  prior.overrides[Edge::undirected(2, 3)] = 0.0;
  const double lambda = prior.lambda_at(0), c2 = prior.c2_at(0);
  const double a0 = (prior.delta_at(0) + 2 - 1) / 2.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution inc(prior.p_dir);
  std::gamma_distribution<double> kap(a0, 2.0 / lambda);

  auto draw_theta = [&](SamplerState& s) {
    s = SamplerState::empty(4);
    for (int v = 0; v < 4; ++v) s.kappa(v) = kap(rng);
    for (int v = 2; v < 4; ++v)
      for (int w = 0; w < 2; ++w)
        if (inc(rng)) {
          s.gamma(v, w) = 1;
          s.b(v, w) = z(rng) * std::sqrt(c2 / s.kappa(v));
        }
  };
  auto draw_y = [&](const SamplerState& s) {
    Eigen::MatrixXd Y(n, 4);
    for (int i = 0; i < n; ++i) {
      for (int v = 0; v < 2; ++v) Y(i, v) = z(rng) / std::sqrt(s.kappa(v));
      for (int v = 2; v < 4; ++v)
        Y(i, v) = s.b(v, 0) * Y(i, 0) + s.b(v, 1) * Y(i, 1) + z(rng) / std::sqrt(s.kappa(v));
    }
    return Y;
  };
  auto edges = [](const SamplerState& s) { return static_cast<double>(s.gamma.cast<int>().sum()); };
  // sum of kappa_v b_vw^2: c^2 chi^2_1 per active edge under the prior
  auto scaled_b = [](const SamplerState& s) { return (s.kappa.asDiagonal() * s.b.cwiseAbs2()).sum(); };

  std::vector<double> fe, fk, fb, ce, ck, cb;
  SamplerState s;
  for (int r = 0; r < rounds; ++r) {
    draw_theta(s);
    fe.push_back(edges(s));
    fk.push_back(s.kappa.mean());
    fb.push_back(scaled_b(s));
  }

  LayerSampler l0(layout, 0, prior, rng::derive_seed(seed, {rng::tag(rng::Tag::Geweke), 0}));
  LayerSampler l1(layout, 1, prior, rng::derive_seed(seed, {rng::tag(rng::Tag::Geweke), 1}));
  draw_theta(s);
  Eigen::MatrixXd Y = draw_y(s);
  Eigen::MatrixXd G;
  const SweepPlan plan;
  for (int r = 0; r < rounds; ++r) {
    G = Y.transpose() * Y;
    l0.bind(G, n);
    l1.bind(G, n);
    l0.sweep(s, plan);
    l1.sweep(s, plan);
    ce.push_back(edges(s));
    ck.push_back(s.kappa.mean());
    cb.push_back(scaled_b(s));
    Y = draw_y(s);
  }

  GewekeResult out;
  out.forward_edges = batch_mean_se(fe);
  out.forward_kappa = batch_mean_se(fk);
  out.chain_edges = batch_mean_se(ce);
  out.chain_kappa = batch_mean_se(ck);
  out.forward_b = batch_mean_se(fb);
  out.chain_b = batch_mean_se(cb);
  auto zscore = [](MeanSe a, MeanSe b) { return (a.mean - b.mean) / std::sqrt(a.se * a.se + b.se * b.se); };
  out.z_edges = zscore(out.forward_edges, out.chain_edges);
  out.z_kappa = zscore(out.forward_kappa, out.chain_kappa);
  out.z_b = zscore(out.forward_b, out.chain_b);
  return out;
}

}  // namespace testing
