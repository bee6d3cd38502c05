#include "bans/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "bans/errors.hpp"
#include "bans/layer_sampler.hpp"
#include "bans/worker_pool.hpp"

namespace bans {

namespace {

double per_layer(const std::vector<double>& values, int layer) {
  return values.size() == 1 ? values.front() : values[static_cast<std::size_t>(layer)];
}

void check_per_layer(const std::vector<double>& values, int num_layers, const char* name, bool allow_empty) {
  if (values.empty() && allow_empty) return;
  if (values.size() != 1 && values.size() != static_cast<std::size_t>(num_layers))
    fail(ErrorCode::ConfigInvalid, std::string(name) + " needs one value or one per layer");
  for (double x : values)
    if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::ConfigInvalid, std::string(name) + " must be positive");
}

void check_data(const Dataset& data) {
  if (data.n() < 2) fail(ErrorCode::ConfigInvalid, "at least two observations are required");
  if (data.p() != data.layout.p()) fail(ErrorCode::DimensionMismatch, "data columns do not match the layer map");
  for (int v = 0; v < data.p(); ++v) {
    const auto col = data.Y.col(v);
    if (!col.allFinite()) fail(ErrorCode::ConfigInvalid, "non-finite value in column " + std::to_string(v));
    const double centred = (col.array() - col.mean()).matrix().squaredNorm();
    if (!(centred > 1e-12 * std::max(1.0, col.squaredNorm())))
      fail(ErrorCode::DegenerateColumn, "column " + std::to_string(v) + " has zero variance");
  }
}

struct LayerRecord {
  std::vector<LayerStats> stats;
  std::vector<std::vector<Edge>> edges;
  long violations = 0;
};

class ChainRunner {
 public:
  ChainRunner(const Dataset& data, const PriorConfig& prior, const RunConfig& run, Mode mode, Symmetrize sym,
              const SweepPlan& plan)
      : data_(data), run_(run), mode_(mode), sym_(sym), plan_(plan), gram_(data.Y.transpose() * data.Y),
        trace_(ChainTrace::zeros(data.p())), records_(static_cast<std::size_t>(data.layout.num_layers())) {
    for (int k = 0; k < data.layout.num_layers(); ++k) {
      samplers_.emplace_back(data.layout, k, prior, run.seed);
      samplers_.back().bind(gram_, data.n());
    }
    trace_.mode = mode;
    trace_.symmetrize = sym;
    trace_.n_iter = run.n_iter;
    trace_.burn_in = run.burn_in;
    trace_.thin = run.thin;
    trace_.n_retained = run.retained();
  }

  ChainTrace run(SamplerState state) {
    const auto start = std::chrono::steady_clock::now();
    for (auto& s : samplers_) s.initialise(state);
    WorkerPool pool(std::max(1, run_.jobs));
    const int q = static_cast<int>(samplers_.size());
    if (mode_ == Mode::Bans) {
      const int warm = plan_.eta ? run_.warm_sweeps() : 0;
      pool.parallel_for(q, [&](int k) {
        LayerSampler& s = samplers_[static_cast<std::size_t>(k)];
        for (int iter = 0; iter < warm; ++iter) {
          s.prepare_parallel(state);
          for (Vertex v = s.begin(); v < s.end(); ++v) s.vertex_step(v, state, plan_);
        }
        if (warm > 0) s.symmetrize(state);
        for (int iter = warm; iter < run_.n_iter; ++iter) {
          s.sweep(state, plan_);
          if (retained(iter)) record(k, state);
        }
      });
    } else {
      const int p = data_.p();
      for (int iter = 0; iter < run_.n_iter; ++iter) {
        pool.parallel_for(q, [&](int k) { samplers_[static_cast<std::size_t>(k)].prepare_parallel(state); });
        pool.parallel_for(p, [&](int v) {
          samplers_[static_cast<std::size_t>(data_.layout.layer_of(v))].vertex_step(v, state, plan_);
        });
        if (retained(iter)) pool.parallel_for(q, [&](int k) { record(k, state); });
      }
    }
    finish();
    trace_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(trace_);
  }

 private:
  bool eta_and() const { return mode_ == Mode::Bans || sym_ == Symmetrize::And; }
  bool retained(int iter) const { return iter >= run_.burn_in && (iter - run_.burn_in + 1) % run_.thin == 0; }

  void record(int k, const SamplerState& state) {
    const LayerSampler& s = samplers_[static_cast<std::size_t>(k)];
    LayerRecord& rec = records_[static_cast<std::size_t>(k)];
    const int p = data_.p();
    std::vector<Edge> edges;
    for (Vertex v = s.begin(); v < s.end(); ++v) {
      for (Vertex w = 0; w < p; ++w) {
        const bool dir = state.gamma(v, w) != 0;
        const bool und = state.eta(v, w) != 0;
        trace_.directed_count(v, w) += dir;
        trace_.undirected_count(v, w) += und;
        trace_.b_positive(v, w) += state.b(v, w) > 0.0;
        trace_.alpha_positive(v, w) += state.alpha(v, w) > 0.0;
        trace_.b_sum(v, w) += state.b(v, w);
        trace_.alpha_sum(v, w) += state.alpha(v, w);
        if (run_.store_indicators && dir) edges.push_back(Edge::directed(w, v));
      }
      if (!run_.store_indicators) continue;
      for (Vertex w = v + 1; w < s.end(); ++w) {
        const bool fwd = state.eta(v, w) != 0;
        const bool back = state.eta(w, v) != 0;
        if (eta_and() ? (fwd && back) : (fwd || back)) edges.push_back(Edge::undirected(v, w));
      }
    }
    rec.stats.push_back(s.stats(state, eta_and()));
    if (run_.store_indicators) rec.edges.push_back(std::move(edges));
    if (run_.check_invariants) rec.violations += s.invariant_violations(state, mode_ == Mode::Bans);
  }

  void finish() {
    const auto m = static_cast<std::size_t>(trace_.n_retained);
    trace_.edge_count.assign(m, 0.0);
    trace_.mean_kappa.assign(m, 0.0);
    trace_.log_likelihood.assign(m, 0.0);
    if (run_.store_indicators) trace_.indicators.assign(m, {});
    for (const LayerRecord& rec : records_) {
      for (std::size_t t = 0; t < m; ++t) {
        trace_.edge_count[t] += rec.stats[t].edges;
        trace_.mean_kappa[t] += rec.stats[t].kappa_sum;
        trace_.log_likelihood[t] += rec.stats[t].log_likelihood;
        if (run_.store_indicators)
          trace_.indicators[t].insert(trace_.indicators[t].end(), rec.edges[t].begin(), rec.edges[t].end());
      }
      trace_.invariant_violations += rec.violations;
    }
    for (double& k : trace_.mean_kappa) k /= data_.p();
    for (auto& edges : trace_.indicators) std::sort(edges.begin(), edges.end());
  }

  const Dataset& data_;
  const RunConfig& run_;
  Mode mode_;
  Symmetrize sym_;
  SweepPlan plan_;
  Eigen::MatrixXd gram_;
  ChainTrace trace_;
  std::vector<LayerSampler> samplers_;
  std::vector<LayerRecord> records_;
};

ChainTrace run_chain(const Dataset& data, const PriorConfig& prior, const RunConfig& run, Mode mode, Symmetrize sym,
                     const SweepPlan& plan, SamplerState initial) {
  check_data(data);
  prior.validate(data.layout.num_layers());
  run.validate();
  if (run.retained() == 0) fail(ErrorCode::EmptyTrace, "no iterations are retained after burn-in");
  ChainRunner runner(data, prior, run, mode, sym, plan);
  return runner.run(std::move(initial));
}

}  // namespace

double PriorConfig::lambda_at(int layer) const { return per_layer(lambda, layer); }
double PriorConfig::delta_at(int layer) const { return per_layer(delta, layer); }
double PriorConfig::c2_at(int layer) const { return c2.empty() ? 1.0 / lambda_at(layer) : per_layer(c2, layer); }

double PriorConfig::inclusion(const Edge& e) const {
  if (auto it = overrides.find(e); it != overrides.end()) return it->second;
  return e.kind == EdgeKind::Directed ? p_dir : q_undir;
}

void PriorConfig::validate(int num_layers) const {
  check_per_layer(lambda, num_layers, "lambda", false);
  check_per_layer(delta, num_layers, "delta", false);
  check_per_layer(c2, num_layers, "c2", true);
  if (!(p_dir > 0.0 && p_dir < 1.0)) fail(ErrorCode::ConfigInvalid, "p_dir must lie in (0, 1)");
  if (!(q_undir > 0.0 && q_undir < 1.0)) fail(ErrorCode::ConfigInvalid, "q_undir must lie in (0, 1)");
  for (const auto& [edge, prob] : overrides)
    if (!(prob >= 0.0 && prob <= 1.0)) fail(ErrorCode::ConfigInvalid, "edge prior probability outside [0, 1]");
}

void RunConfig::validate() const {
  if (n_iter < 1) fail(ErrorCode::ConfigInvalid, "n_iter must be positive");
  if (burn_in < 0 || burn_in > n_iter) fail(ErrorCode::ConfigInvalid, "burn_in must lie in [0, n_iter]");
  if (thin < 1) fail(ErrorCode::ConfigInvalid, "thin must be at least 1");
  if (jobs < 1) fail(ErrorCode::ConfigInvalid, "jobs must be at least 1");
}

SamplerState SamplerState::empty(int p) {
  SamplerState s;
  s.gamma.setZero(p, p);
  s.eta.setZero(p, p);
  s.b.setZero(p, p);
  s.alpha.setZero(p, p);
  s.kappa.setOnes(p);
  return s;
}

SamplerState SamplerState::from_parameters(const MlggmParameters& params, const ChainGraph& layout) {
  const int p = layout.p();
  SamplerState s = empty(p);
  s.b = params.B;
  s.gamma = (params.B.array() != 0.0).cast<std::uint8_t>();
  for (Vertex v = 0; v < p; ++v) {
    s.kappa(v) = params.K(v, v);
    const int k = layout.layer_of(v);
    for (Vertex u = layout.layer_begin(k); u < layout.layer_end(k); ++u) {
      if (u == v || params.K(u, v) == 0.0) continue;
      s.alpha(v, u) = -params.K(u, v) / params.K(v, v);
      s.eta(v, u) = 1;
    }
  }
  return s;
}

ChainTrace ChainTrace::zeros(int p) {
  ChainTrace t;
  t.p = p;
  for (auto* m : {&t.directed_count, &t.undirected_count, &t.b_positive, &t.alpha_positive, &t.b_sum, &t.alpha_sum})
    m->setZero(p, p);
  return t;
}

ChainTrace run_bans(const Dataset& data, const PriorConfig& prior, const RunConfig& run) {
  return run_chain(data, prior, run, Mode::Bans, Symmetrize::And, SweepPlan{}, SamplerState::empty(data.p()));
}

ChainTrace run_bans_parallel(const Dataset& data, const PriorConfig& prior, const RunConfig& run,
                             Symmetrize symmetrize) {
  return run_chain(data, prior, run, Mode::BansParallel, symmetrize, SweepPlan{}, SamplerState::empty(data.p()));
}

std::vector<SignPosterior> structured_sign_run(const Dataset& data, std::span<const Edge> structure,
                                               const PriorConfig& prior, const RunConfig& run) {
  SamplerState init = SamplerState::empty(data.p());
  for (const Edge& e : structure) {
    if (!data.layout.in_universe(e))
      fail(ErrorCode::StructureInconsistent, "edge " + std::to_string(e.src) + "," + std::to_string(e.dst) +
                                                 " is not allowed by the layer map");
    if (e.kind == EdgeKind::Directed)
      init.gamma(e.dst, e.src) = 1;
    else
      init.eta(e.src, e.dst) = init.eta(e.dst, e.src) = 1;
  }
  SweepPlan plan;
  plan.eta = false;
  plan.gamma = false;
  const ChainTrace trace = run_chain(data, prior, run, Mode::Bans, Symmetrize::And, plan, std::move(init));

  const double m = trace.n_retained;
  std::vector<SignPosterior> out;
  out.reserve(structure.size());
  for (const Edge& e : structure) {
    SignPosterior s{e, 0.5, 0.0};
    if (e.kind == EdgeKind::Directed) {
      s.prob_positive = trace.b_positive(e.dst, e.src) / m;
      s.posterior_mean = trace.b_sum(e.dst, e.src) / m;
    } else {
      s.prob_positive = 0.5 * (trace.alpha_positive(e.src, e.dst) + trace.alpha_positive(e.dst, e.src)) / m;
      s.posterior_mean = 0.5 * (trace.alpha_sum(e.src, e.dst) + trace.alpha_sum(e.dst, e.src)) / m;
    }
    out.push_back(s);
  }
  return out;
}

void center_columns(Dataset& data) { data.Y.rowwise() -= data.Y.colwise().mean(); }

void standardize_columns(Dataset& data) {
  center_columns(data);
  if (data.n() < 2) fail(ErrorCode::DimensionMismatch, "at least two observations are required");
  for (int j = 0; j < data.p(); ++j) {
    const double sd = std::sqrt(data.Y.col(j).squaredNorm() / (data.n() - 1));
    if (!(sd > 0.0)) fail(ErrorCode::DegenerateColumn, "column " + std::to_string(j) + " is constant");
    data.Y.col(j) /= sd;
  }
}

}  // namespace bans
