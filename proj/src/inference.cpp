#include "bans/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "bans/errors.hpp"

namespace bans {

Eigen::MatrixXd ppi(const ChainTrace& trace) {
  if (trace.n_retained <= 0) fail(ErrorCode::EmptyTrace, "trace holds no retained iterations");
  const double m = trace.n_retained;
  Eigen::MatrixXd g = trace.directed_count / m;
  const Eigen::MatrixXd& u = trace.undirected_count;
  for (int v = 0; v < trace.p; ++v) {
    for (int w = v + 1; w < trace.p; ++w) {
      if (u(v, w) == 0.0 && u(w, v) == 0.0) continue;
      const double val = trace.mode == Mode::Bans || trace.symmetrize == Symmetrize::And ? std::min(u(v, w), u(w, v))
                                                                                          : std::max(u(v, w), u(w, v));
      g(v, w) = g(w, v) = val / m;
    }
  }
  return g;
}

std::vector<EdgeScore> edge_probabilities(const Eigen::MatrixXd& g, const ChainGraph& layout) {
  if (g.rows() != layout.p() || g.cols() != layout.p())
    fail(ErrorCode::DimensionMismatch, "probability matrix does not match the layout");
  std::vector<EdgeScore> out;
  for (const Edge& e : layout.candidate_universe()) out.push_back({e, g(e.dst, e.src)});
  return out;
}

std::vector<EdgeScore> ranked(std::span<const EdgeScore> scores) {
  std::vector<EdgeScore> out(scores.begin(), scores.end());
  std::stable_sort(out.begin(), out.end(), [](const EdgeScore& a, const EdgeScore& b) {
    if (a.g != b.g) return a.g > b.g;
    return a.edge < b.edge;
  });
  return out;
}

FdrSelection fdr_select(std::span<const EdgeScore> scores, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::ConfigInvalid, "FDR level must lie in (0, 1)");
  const std::vector<EdgeScore> order = ranked(scores);
  FdrSelection sel;
  double miss = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    miss += 1.0 - order[k].g;
    const bool group_end = k + 1 == order.size() || order[k + 1].g != order[k].g;
    if (group_end && miss / static_cast<double>(k + 1) < alpha) sel.xi = static_cast<int>(k + 1);
  }
  if (sel.xi == 0) return sel;
  sel.selected.assign(order.begin(), order.begin() + sel.xi);
  sel.phi = sel.selected.back().g;
  return sel;
}

double expected_fdr(std::span<const EdgeScore> scores, double phi) {
  double miss = 0.0;
  long count = 0;
  for (const EdgeScore& s : scores) {
    if (s.g > phi) {
      miss += 1.0 - s.g;
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::EmptySelection, "no probability exceeds the threshold");
  return miss / static_cast<double>(count);
}

double selection_fdr(const FdrSelection& selection) {
  if (selection.selected.empty()) return 0.0;
  double miss = 0.0;
  for (const EdgeScore& s : selection.selected) miss += 1.0 - s.g;
  return miss / static_cast<double>(selection.selected.size());
}

std::vector<SignedEdge> call_signs(std::span<const SignPosterior> signs, double xi) {
  if (!(xi > 0.0 && xi < 1.0)) fail(ErrorCode::ConfigInvalid, "sign cutoff must lie in (0, 1)");
  std::vector<SignedEdge> out;
  out.reserve(signs.size());
  for (const SignPosterior& s : signs) out.push_back({s.edge, s.prob_positive > xi ? 1 : -1, s.prob_positive});
  return out;
}

Eigen::VectorXd weighted_degree(std::span<const EdgeScore> edges, int p) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  for (const EdgeScore& s : edges) {
    if (s.edge.src < 0 || s.edge.src >= p || s.edge.dst < 0 || s.edge.dst >= p)
      fail(ErrorCode::IndexOutOfRange, "edge endpoint outside the vertex set");
    w(s.edge.src) += s.g;
    w(s.edge.dst) += s.g;
  }
  return w;
}

std::vector<Vertex> connected_component(std::span<const Edge> edges, int p, Vertex seed) {
  if (seed < 0 || seed >= p) fail(ErrorCode::IndexOutOfRange, "seed vertex outside the vertex set");
  std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(p));
  for (const Edge& e : edges) {
    adj[static_cast<std::size_t>(e.src)].push_back(e.dst);
    adj[static_cast<std::size_t>(e.dst)].push_back(e.src);
  }
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  std::queue<Vertex> todo;
  todo.push(seed);
  seen[static_cast<std::size_t>(seed)] = true;
  std::vector<Vertex> out;
  while (!todo.empty()) {
    const Vertex v = todo.front();
    todo.pop();
    out.push_back(v);
    for (Vertex u : adj[static_cast<std::size_t>(v)])
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        todo.push(u);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double connectivity_score(std::span<const Edge> edges, const ChainGraph& layout, int from, int to) {
  if (from < 0 || to < from || to >= layout.num_layers()) fail(ErrorCode::IndexOutOfRange, "invalid layer pair");
  const double a = layout.layer_size(from);
  const double b = layout.layer_size(to);
  const double possible = from == to ? a * (a - 1) / 2.0 : a * b;
  if (possible == 0.0) return 0.0;
  long observed = 0;
  for (const Edge& e : edges) {
    const int ls = layout.layer_of(e.src);
    const int ld = layout.layer_of(e.dst);
    if (from == to ? (e.kind == EdgeKind::Undirected && ls == from && ld == from)
                   : (e.kind == EdgeKind::Directed && ls == from && ld == to))
      ++observed;
  }
  return static_cast<double>(observed) / possible;
}

std::vector<ConnectivityRow> connectivity_table(std::span<const std::vector<Edge>> runs, const ChainGraph& layout) {
  std::vector<ConnectivityRow> rows;
  const int q = layout.num_layers();
  for (int a = 0; a < q; ++a) {
    for (int b = a; b < q; ++b) {
      ConnectivityRow row{a, b, 0.0, 0.0, {}};
      for (const auto& edges : runs) row.per_run.push_back(connectivity_score(edges, layout, a, b));
      const double k = static_cast<double>(row.per_run.size());
      if (k > 0) {
        for (double x : row.per_run) row.mean += x / k;
        if (k > 1) {
          double ss = 0.0;
          for (double x : row.per_run) ss += (x - row.mean) * (x - row.mean);
          row.sd = std::sqrt(ss / (k - 1));
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<IntersectionRow> intersection_counts(std::span<const std::vector<Edge>> runs) {
  const int r = static_cast<int>(runs.size());
  if (r == 0) return {};
  if (r > 20) fail(ErrorCode::ConfigInvalid, "at most 20 runs can be intersected");
  std::map<Edge, std::uint32_t> membership;
  for (int i = 0; i < r; ++i)
    for (const Edge& e : runs[static_cast<std::size_t>(i)]) membership[e] |= 1u << i;
  std::vector<long> counts(std::size_t{1} << r, 0);
  for (const auto& [edge, mask] : membership) ++counts[mask];
  std::vector<IntersectionRow> out;
  for (std::uint32_t mask = 1; mask < counts.size(); ++mask) {
    IntersectionRow row;
    for (int i = 0; i < r; ++i)
      if (mask & (1u << i)) row.runs.push_back(i);
    row.count = counts[mask];
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace bans
