#include "bans/layer_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bans/errors.hpp"

namespace bans {

namespace {

constexpr double kPivotFloor = 1e-12;

double logit(double prob) {
  if (prob <= 0.0) return -std::numeric_limits<double>::infinity();
  if (prob >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log(prob) - std::log1p(-prob);
}

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success || (m.size() > 0 && llt.matrixLLT().diagonal().minCoeff() < kPivotFloor))
    fail(ErrorCode::FactorizationFailure, "conditional precision is not positive definite");
  return llt;
}

// Draws x ~ N(llt^{-1} h, llt^{-1} / scale).
Eigen::VectorXd draw_gaussian(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& h, double scale,
                              rng::Stream& rng) {
  Eigen::VectorXd z(h.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  Eigen::VectorXd x = llt.solve(h);
  x += llt.matrixU().solve(z) / std::sqrt(scale);
  return x;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Eigen::VectorXd sub(const Eigen::MatrixXd& m, const std::vector<int>& rows, int col) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out(i) = m(rows[i], col);
  return out;
}

Eigen::VectorXd sub(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

std::vector<int> without(const std::vector<int>& set, int x) {
  std::vector<int> out;
  out.reserve(set.size());
  for (int y : set)
    if (y != x) out.push_back(y);
  return out;
}

}  // namespace

LayerSampler::LayerSampler(const ChainGraph& layout, int layer, const PriorConfig& prior, std::uint64_t seed)
    : layout_(&layout),
      layer_(layer),
      lo_(layout.layer_begin(layer)),
      hi_(layout.layer_end(layer)),
      pair_rng_(rng::derive_seed(seed, {rng::tag(rng::Tag::Layer), static_cast<std::uint64_t>(layer),
                                        rng::tag(rng::Tag::Pair)})) {
  const int m = hi_ - lo_;
  hyper_.lambda = prior.lambda_at(layer);
  hyper_.c2 = prior.c2_at(layer);
  hyper_.a0 = 0.5 * (prior.delta_at(layer) + m - 1);
  hyper_.log_lambda = std::log(hyper_.lambda);

  log_odds_dir_.resize(m, lo_);
  log_odds_undir_ = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (Vertex w = 0; w < lo_; ++w) log_odds_dir_(i, w) = logit(prior.inclusion(Edge::directed(w, lo_ + i)));
    for (int j = i + 1; j < m; ++j)
      log_odds_undir_(i, j) = log_odds_undir_(j, i) = logit(prior.inclusion(Edge::undirected(lo_ + i, lo_ + j)));
  }

  vertex_rng_.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    vertex_rng_.emplace_back(rng::derive_seed(seed, {rng::tag(rng::Tag::Layer), static_cast<std::uint64_t>(layer),
                                                     rng::tag(rng::Tag::Vertex), static_cast<std::uint64_t>(i)}));
  b_snapshot_ = Eigen::MatrixXd::Zero(layout.p(), layout.p());
}

void LayerSampler::bind(const Eigen::MatrixXd& gram, int n) {
  if (gram.rows() != layout_->p() || gram.cols() != layout_->p())
    fail(ErrorCode::DimensionMismatch, "Gram matrix does not match the layout");
  gram_ = &gram;
  n_ = n;
}

void LayerSampler::initialise(SamplerState& state) const {
  for (Vertex v = lo_; v < hi_; ++v) state.kappa(v) = (*gram_)(v, v) > 0.0 ? n_ / (*gram_)(v, v) : 1.0;
}

Eigen::MatrixXd LayerSampler::residual_gram(const SamplerState& state) const {
  const Eigen::MatrixXd& G = *gram_;
  const int m = hi_ - lo_;
  Eigen::MatrixXd S = G.block(lo_, lo_, m, m);
  if (lo_ == 0) return S;
  const auto Bt = state.b.block(lo_, 0, m, lo_);
  const Eigen::MatrixXd cross = Bt * G.block(0, lo_, lo_, m);
  S -= cross + cross.transpose();
  S.noalias() += Bt * G.topLeftCorner(lo_, lo_) * Bt.transpose();
  return S;
}

double LayerSampler::kappa_shape_base(Vertex v, const SamplerState& state) const {
  double active = 0;
  for (Vertex w = 0; w < lo_; ++w) active += state.gamma(v, w);
  return hyper_.a0 + 0.5 * active;
}

double LayerSampler::kappa_rate_base(Vertex v, const SamplerState& state) const {
  const double bb = lo_ > 0 ? state.b.row(v).head(lo_).squaredNorm() : 0.0;
  return 0.5 * hyper_.lambda + bb / (2.0 * hyper_.c2);
}

// Change in node i's log marginal (alpha_i and kappa_i integrated out) when j
// joins the neighbour set `base`; all indices layer-local.
double LayerSampler::undirected_increment(int i, const std::vector<int>& base, int j, double a, double b) const {
  double q0 = S_(i, i);
  double d = S_(j, j) + hyper_.lambda;
  double r = S_(j, i);
  if (!base.empty()) {
    Eigen::MatrixXd M = sub(S_, base, base);
    M.diagonal().array() += hyper_.lambda;
    const auto llt = factorize(M);
    const Eigen::VectorXd si = sub(S_, base, i);
    const Eigen::VectorXd sj = sub(S_, base, j);
    q0 -= si.dot(llt.solve(si));
    const Eigen::VectorXd t = llt.solve(sj);
    d -= sj.dot(t);
    r -= t.dot(si);
  }
  if (!(d > kPivotFloor)) fail(ErrorCode::NumericalUnderflow, "undirected increment lost positivity");
  q0 = std::max(q0, 0.0);
  const double drop = std::min(r * r / d, q0);
  const double shape = a + 0.5 * n_;
  return 0.5 * hyper_.log_lambda - 0.5 * std::log(d) - shape * std::log1p(-drop / (2.0 * b + q0));
}

void LayerSampler::draw_alpha_kappa(Vertex v, SamplerState& state, rng::Stream& rng) const {
  const int i = v - lo_;
  const int m = hi_ - lo_;
  std::vector<int> active;
  for (int j = 0; j < m; ++j)
    if (j != i && state.eta(v, lo_ + j)) active.push_back(j);

  const double a = kappa_shape_base(v, state);
  const double b = kappa_rate_base(v, state);
  double q = S_(i, i);
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd si;
  if (!active.empty()) {
    Eigen::MatrixXd M = sub(S_, active, active);
    M.diagonal().array() += hyper_.lambda;
    llt = factorize(M);
    si = sub(S_, active, i);
    q -= si.dot(llt.solve(si));
  }
  const double kappa = rng.gamma(a + 0.5 * n_, b + 0.5 * std::max(q, 0.0));
  if (!(kappa > 0.0) || !std::isfinite(kappa)) fail(ErrorCode::NumericalUnderflow, "precision draw underflowed");
  state.kappa(v) = kappa;

  for (int j = 0; j < m; ++j) state.alpha(v, lo_ + j) = 0.0;
  if (active.empty()) return;
  const Eigen::VectorXd alpha = draw_gaussian(llt, si, kappa, rng);
  for (std::size_t k = 0; k < active.size(); ++k) state.alpha(v, lo_ + active[k]) = alpha(static_cast<Eigen::Index>(k));
}

void LayerSampler::directed_update(Vertex v, SamplerState& state, const SweepPlan& plan,
                                   const Eigen::MatrixXd& b_other, bool pooled, rng::Stream& rng) const {
  if (lo_ == 0 || (!plan.gamma && !plan.b)) return;
  const Eigen::MatrixXd& G = *gram_;
  const auto G_PP = G.topLeftCorner(lo_, lo_);
  const int i = v - lo_;

  // Nodes whose likelihood contains b_v, with the coefficient of Y_P b_v in
  // their residual (1 for v itself, -alpha_uv for u that regress on v).
  std::vector<std::pair<Vertex, double>> nodes{{v, 1.0}};
  if (pooled)
    for (Vertex u = lo_; u < hi_; ++u)
      if (u != v && state.alpha(u, v) != 0.0) nodes.emplace_back(u, -state.alpha(u, v));

  double s = 0.0;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(lo_);
  Eigen::VectorXd beta(lo_);
  for (const auto& [u, coef] : nodes) {
    Eigen::VectorXd r = G.col(u).head(lo_);
    beta.setZero();
    if (u != v) beta = b_other.row(u).head(lo_).transpose();
    for (Vertex j = lo_; j < hi_; ++j) {
      const double a = state.alpha(u, j);
      if (a == 0.0) continue;
      r -= a * G.col(j).head(lo_);
      if (j != v) beta -= a * b_other.row(j).head(lo_).transpose();
    }
    r.noalias() -= G_PP * beta;
    s += state.kappa(u) * coef * coef;
    h += (state.kappa(u) * coef) * r;
  }
  const double rho = state.kappa(v) / hyper_.c2;
  const double half_log_rho = 0.5 * std::log(rho);

  std::vector<int> active;
  for (Vertex w = 0; w < lo_; ++w)
    if (state.gamma(v, w)) active.push_back(w);

  if (plan.gamma) {
    for (Vertex w = 0; w < lo_; ++w) {
      double log_odds = log_odds_dir_(i, w);
      if (std::isfinite(log_odds)) {
        const std::vector<int> base = without(active, w);
        double d = s * G(w, w) + rho;
        double r = h(w);
        if (!base.empty()) {
          Eigen::MatrixXd Q = s * sub(G, base, base);
          Q.diagonal().array() += rho;
          const auto llt = factorize(Q);
          const Eigen::VectorXd gw = s * sub(G, base, w);
          const Eigen::VectorXd t = llt.solve(gw);
          d -= gw.dot(t);
          r -= t.dot(sub(h, base));
        }
        if (!(d > kPivotFloor)) fail(ErrorCode::NumericalUnderflow, "directed increment lost positivity");
        log_odds += half_log_rho - 0.5 * std::log(d) + r * r / (2.0 * d);
      }
      const bool on = rng.bernoulli_logit(log_odds);
      const bool was = state.gamma(v, w) != 0;
      state.gamma(v, w) = on ? 1 : 0;
      if (on && !was) active.insert(std::upper_bound(active.begin(), active.end(), w), w);
      if (!on && was) active = without(active, w);
    }
  }

  if (!plan.b) return;
  state.b.row(v).head(lo_).setZero();
  if (active.empty()) return;
  Eigen::MatrixXd Q = s * sub(G, active, active);
  Q.diagonal().array() += rho;
  const auto llt = factorize(Q);
  const Eigen::VectorXd coef = draw_gaussian(llt, sub(h, active), 1.0, rng);
  for (std::size_t k = 0; k < active.size(); ++k) state.b(v, active[k]) = coef(static_cast<Eigen::Index>(k));
}

// ||y_v - sum_j alpha_vj y_j - Y_P (b_v - sum_j alpha_vj b_j)||^2 through G.
double LayerSampler::residual_norm(Vertex v, const SamplerState& state, const Eigen::MatrixXd& b_other) const {
  const Eigen::MatrixXd& G = *gram_;
  const int m = hi_ - lo_;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  c(v - lo_) = 1.0;
  for (Vertex j = lo_; j < hi_; ++j)
    if (j != v) c(j - lo_) = -state.alpha(v, j);
  double e = c.dot(G.block(lo_, lo_, m, m) * c);
  if (lo_ > 0) {
    Eigen::VectorXd beta = state.b.row(v).head(lo_).transpose();
    for (Vertex j = lo_; j < hi_; ++j)
      if (j != v && state.alpha(v, j) != 0.0) beta -= state.alpha(v, j) * b_other.row(j).head(lo_).transpose();
    e += -2.0 * c.dot(G.block(lo_, 0, m, lo_) * beta) + beta.dot(G.topLeftCorner(lo_, lo_) * beta);
  }
  return std::max(e, 0.0);
}

void LayerSampler::draw_kappa(Vertex v, SamplerState& state, const Eigen::MatrixXd& b_other, rng::Stream& rng) const {
  double eta_active = 0.0;
  double alpha_sq = 0.0;
  for (Vertex j = lo_; j < hi_; ++j) {
    eta_active += state.eta(v, j);
    alpha_sq += state.alpha(v, j) * state.alpha(v, j);
  }
  const double shape = kappa_shape_base(v, state) + 0.5 * n_ + 0.5 * eta_active;
  const double rate = kappa_rate_base(v, state) + 0.5 * residual_norm(v, state, b_other) + 0.5 * hyper_.lambda * alpha_sq;
  const double kappa = rng.gamma(shape, rate);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) fail(ErrorCode::NumericalUnderflow, "precision draw underflowed");
  state.kappa(v) = kappa;
}

void LayerSampler::sweep(SamplerState& state, const SweepPlan& plan) {
  if (gram_ == nullptr) fail(ErrorCode::ConfigInvalid, "layer sampler has no data bound");
  const int m = hi_ - lo_;
  if (plan.eta || plan.alpha_kappa) S_ = residual_gram(state);

  if (plan.eta && m > 1) {
    std::vector<double> a(m), b(m);
    for (int i = 0; i < m; ++i) {
      a[i] = kappa_shape_base(lo_ + i, state);
      b[i] = kappa_rate_base(lo_ + i, state);
    }
    std::vector<std::vector<int>> active(m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (j != i && state.eta(lo_ + i, lo_ + j)) active[i].push_back(j);

    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        double log_odds = log_odds_undir_(i, j);
        if (std::isfinite(log_odds)) {
          log_odds += undirected_increment(i, without(active[i], j), j, a[i], b[i]);
          log_odds += undirected_increment(j, without(active[j], i), i, a[j], b[j]);
        }
        const bool on = pair_rng_.bernoulli_logit(log_odds);
        const bool was = state.eta(lo_ + i, lo_ + j) != 0;
        state.eta(lo_ + i, lo_ + j) = state.eta(lo_ + j, lo_ + i) = on ? 1 : 0;
        if (!on) state.alpha(lo_ + i, lo_ + j) = state.alpha(lo_ + j, lo_ + i) = 0.0;
        if (on != was) {
          for (auto [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
            auto& set = active[x];
            if (on)
              set.insert(std::upper_bound(set.begin(), set.end(), y), y);
            else
              set = without(set, y);
          }
        }
      }
    }
  }

  if (plan.alpha_kappa)
    for (Vertex v = lo_; v < hi_; ++v) draw_alpha_kappa(v, state, vertex_rng_[v - lo_]);

  if (lo_ == 0) return;
  for (Vertex v = lo_; v < hi_; ++v) {
    auto& rng = vertex_rng_[v - lo_];
    directed_update(v, state, plan, state.b, true, rng);
    if (plan.kappa) draw_kappa(v, state, state.b, rng);
  }
}

void LayerSampler::prepare_parallel(const SamplerState& state) {
  if (gram_ == nullptr) fail(ErrorCode::ConfigInvalid, "layer sampler has no data bound");
  const int m = hi_ - lo_;
  if (lo_ > 0) b_snapshot_.block(lo_, 0, m, lo_) = state.b.block(lo_, 0, m, lo_);
  S_ = residual_gram(state);
}

void LayerSampler::vertex_step(Vertex v, SamplerState& state, const SweepPlan& plan) {
  const int i = v - lo_;
  const int m = hi_ - lo_;
  auto& rng = vertex_rng_[i];

  if (plan.eta && m > 1) {
    const double a = kappa_shape_base(v, state);
    const double b = kappa_rate_base(v, state);
    std::vector<int> active;
    for (int j = 0; j < m; ++j)
      if (j != i && state.eta(v, lo_ + j)) active.push_back(j);
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      double log_odds = log_odds_undir_(i, j);
      if (std::isfinite(log_odds)) log_odds += undirected_increment(i, without(active, j), j, a, b);
      const bool on = rng.bernoulli_logit(log_odds);
      state.eta(v, lo_ + j) = on ? 1 : 0;
      if (!on) state.alpha(v, lo_ + j) = 0.0;
      active = without(active, j);
      if (on) active.insert(std::upper_bound(active.begin(), active.end(), j), j);
    }
  }

  if (plan.alpha_kappa) draw_alpha_kappa(v, state, rng);
  if (lo_ == 0) return;
  directed_update(v, state, plan, b_snapshot_, false, rng);
  if (plan.kappa) draw_kappa(v, state, b_snapshot_, rng);
}

void LayerSampler::symmetrize(SamplerState& state) const {
  for (Vertex v = lo_; v < hi_; ++v)
    for (Vertex w = v + 1; w < hi_; ++w) {
      if (state.eta(v, w) && state.eta(w, v)) continue;
      state.eta(v, w) = state.eta(w, v) = 0;
      state.alpha(v, w) = state.alpha(w, v) = 0.0;
    }
}

LayerStats LayerSampler::stats(const SamplerState& state, bool eta_and) const {
  LayerStats out;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (Vertex v = lo_; v < hi_; ++v) {
    for (Vertex w = 0; w < lo_; ++w) out.edges += state.gamma(v, w);
    for (Vertex w = v + 1; w < hi_; ++w) {
      const bool fwd = state.eta(v, w) != 0;
      const bool back = state.eta(w, v) != 0;
      out.edges += eta_and ? (fwd && back) : (fwd || back);
    }
    const double kappa = state.kappa(v);
    out.kappa_sum += kappa;
    out.log_likelihood += 0.5 * n_ * (std::log(kappa) - log2pi) - 0.5 * kappa * residual_norm(v, state, state.b);
  }
  return out;
}

int LayerSampler::invariant_violations(const SamplerState& state, bool symmetric) const {
  int bad = 0;
  const int p = layout_->p();
  for (Vertex v = lo_; v < hi_; ++v) {
    if (!(state.kappa(v) > 0.0) || !std::isfinite(state.kappa(v))) ++bad;
    for (Vertex w = 0; w < p; ++w) {
      const bool parent = w < lo_;
      const bool neighbour = w >= lo_ && w < hi_ && w != v;
      if (parent) {
        if ((state.gamma(v, w) != 0) != (state.b(v, w) != 0.0)) ++bad;
      } else if (state.gamma(v, w) != 0 || state.b(v, w) != 0.0) {
        ++bad;
      }
      if (neighbour) {
        if ((state.eta(v, w) != 0) != (state.alpha(v, w) != 0.0)) ++bad;
        if (symmetric && state.eta(v, w) != state.eta(w, v)) ++bad;
      } else if (state.eta(v, w) != 0 || state.alpha(v, w) != 0.0) {
        ++bad;
      }
    }
  }
  return bad;
}

}  // namespace bans
