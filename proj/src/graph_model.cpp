#include "bans/graph_model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "bans/errors.hpp"

namespace bans {

void ChainGraphSpec::add(const Edge& e) {
  if (e.kind == EdgeKind::Directed)
    add_directed(e.src, e.dst);
  else
    add_undirected(e.src, e.dst);
}

std::vector<Edge> ChainGraphSpec::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (auto [a, b] : directed) out.push_back(Edge::directed(a, b));
  for (auto [a, b] : undirected) out.push_back(Edge::undirected(a, b));
  std::sort(out.begin(), out.end());
  return out;
}

ChainGraphSpec layered_spec(std::span<const int> layer_sizes) {
  ChainGraphSpec spec;
  Vertex next = 0;
  for (int size : layer_sizes) {
    std::vector<Vertex> layer(static_cast<std::size_t>(size));
    std::iota(layer.begin(), layer.end(), next);
    next += size;
    spec.layers.push_back(std::move(layer));
  }
  spec.p = next;
  return spec;
}

ChainGraph::ChainGraph(ChainGraphSpec spec) : spec_(std::move(spec)) {}

ChainGraph validate(ChainGraphSpec spec) {
  if (spec.p <= 0) fail(ErrorCode::ConfigInvalid, "graph needs at least one vertex");
  if (spec.layers.empty()) fail(ErrorCode::ConfigInvalid, "graph needs at least one layer");

  const auto p = static_cast<std::size_t>(spec.p);
  std::vector<int> layer_of(p, -1);
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    auto& layer = spec.layers[k];
    if (layer.empty()) fail(ErrorCode::LayerOverlap, "layer " + std::to_string(k + 1) + " is empty");
    std::sort(layer.begin(), layer.end());
    for (Vertex v : layer) {
      if (v < 0 || static_cast<std::size_t>(v) >= p)
        fail(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(v) + " outside 0.." + std::to_string(p - 1));
      if (layer_of[static_cast<std::size_t>(v)] != -1)
        fail(ErrorCode::LayerOverlap, "vertex " + std::to_string(v) + " appears in more than one layer");
      layer_of[static_cast<std::size_t>(v)] = static_cast<int>(k);
    }
  }
  for (std::size_t v = 0; v < p; ++v)
    if (layer_of[v] == -1) fail(ErrorCode::LayerOverlap, "vertex " + std::to_string(v) + " is not in any layer");

  for (std::size_t v = 1; v < p; ++v)
    if (layer_of[v] < layer_of[v - 1])
      fail(ErrorCode::LabelOrderViolation,
           "vertex " + std::to_string(v) + " is labeled after a vertex of a later layer");

  auto check_endpoint = [&](Vertex v) {
    if (v < 0 || static_cast<std::size_t>(v) >= p)
      fail(ErrorCode::IndexOutOfRange, "edge endpoint " + std::to_string(v) + " out of range");
  };
  for (auto [from, to] : spec.directed) {
    check_endpoint(from);
    check_endpoint(to);
    if (layer_of[static_cast<std::size_t>(from)] >= layer_of[static_cast<std::size_t>(to)])
      fail(ErrorCode::BackwardDirectedEdge,
           std::to_string(from) + "->" + std::to_string(to) + " does not point to a later layer");
  }
  for (auto [a, b] : spec.undirected) {
    check_endpoint(a);
    check_endpoint(b);
    if (a == b) fail(ErrorCode::ConfigInvalid, "self loop on vertex " + std::to_string(a));
    if (layer_of[static_cast<std::size_t>(a)] != layer_of[static_cast<std::size_t>(b)])
      fail(ErrorCode::CrossLayerUndirectedEdge,
           std::to_string(a) + "-" + std::to_string(b) + " joins different layers");
  }

  ChainGraph g(std::move(spec));
  g.layer_of_ = std::move(layer_of);
  g.begin_.push_back(0);
  for (const auto& layer : g.spec_.layers) g.begin_.push_back(g.begin_.back() + static_cast<Vertex>(layer.size()));
  return g;
}

std::vector<Vertex> ChainGraph::cumulative(int l) const {
  if (l < 0 || l > num_layers())
    fail(ErrorCode::IndexOutOfRange, "cumulative index " + std::to_string(l) + " outside 0.." +
                                         std::to_string(num_layers()));
  std::vector<Vertex> out(static_cast<std::size_t>(begin_[static_cast<std::size_t>(l)]));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

VertexContext ChainGraph::context(Vertex v) const {
  if (v < 0 || v >= p()) fail(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(v));
  VertexContext ctx;
  ctx.v = v;
  const int k = layer_of(v);
  ctx.parents = cumulative(k);
  for (Vertex u = layer_begin(k); u < layer_end(k); ++u)
    if (u != v) ctx.neighbors.push_back(u);
  return ctx;
}

bool ChainGraph::has_edge(const Edge& e) const {
  if (e.kind == EdgeKind::Directed) return spec_.directed.contains({e.src, e.dst});
  return spec_.undirected.contains({std::min(e.src, e.dst), std::max(e.src, e.dst)});
}

std::vector<Edge> ChainGraph::candidate_universe() const {
  std::vector<Edge> out;
  for (Vertex v = 0; v < p(); ++v) {
    const int k = layer_of(v);
    for (Vertex w = 0; w < layer_begin(k); ++w) out.push_back(Edge::directed(w, v));
    for (Vertex w = v + 1; w < layer_end(k); ++w) out.push_back(Edge::undirected(v, w));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ChainGraph::in_universe(const Edge& e) const {
  if (e.src < 0 || e.dst < 0 || e.src >= p() || e.dst >= p() || e.src == e.dst) return false;
  if (e.kind == EdgeKind::Directed) return layer_of(e.src) < layer_of(e.dst);
  return layer_of(e.src) == layer_of(e.dst);
}

ChainGraph ChainGraph::with_edges(std::span<const Edge> edges) const {
  ChainGraphSpec spec;
  spec.p = spec_.p;
  spec.layers = spec_.layers;
  for (const Edge& e : edges) spec.add(e);
  return validate(std::move(spec));
}

std::vector<ConditionalIndependence> implied_independencies(const ChainGraph& g) {
  std::vector<ConditionalIndependence> out;
  for (Vertex v = 0; v < g.p(); ++v) {
    const int k = g.layer_of(v);
    // Missing within-layer pair: condition on C_{t(v)} minus both endpoints.
    for (Vertex u = g.layer_begin(k); u < v; ++u) {
      if (g.has_edge(Edge::undirected(u, v))) continue;
      ConditionalIndependence ci{u, v, {}, EdgeKind::Undirected};
      for (Vertex w = 0; w < g.layer_end(k); ++w)
        if (w != u && w != v) ci.given.push_back(w);
      out.push_back(std::move(ci));
    }
    // Missing u -> v: condition on C_{t(v)-1} minus u.
    for (Vertex u = 0; u < g.layer_begin(k); ++u) {
      if (g.has_edge(Edge::directed(u, v))) continue;
      ConditionalIndependence ci{u, v, {}, EdgeKind::Directed};
      for (Vertex w = 0; w < g.layer_begin(k); ++w)
        if (w != u) ci.given.push_back(w);
      out.push_back(std::move(ci));
    }
  }
  return out;
}

}  // namespace bans
