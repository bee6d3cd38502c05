#include "bans/design.hpp"

#include "bans/errors.hpp"

namespace bans {

namespace {

void check_dims(const SamplerState& state, const Dataset& data) {
  const auto p = data.p();
  if (state.b.rows() != p || state.b.cols() != p || state.alpha.rows() != p || state.alpha.cols() != p ||
      state.eta.rows() != p || state.gamma.rows() != p || state.kappa.size() != p)
    fail(ErrorCode::DimensionMismatch, "sampler state does not match the data dimension");
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& Y, const std::vector<Vertex>& cols) {
  Eigen::MatrixXd out(Y.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = Y.col(cols[j]);
  return out;
}

Eigen::VectorXd row_over(const Eigen::MatrixXd& M, Vertex v, const std::vector<Vertex>& cols) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Eigen::Index>(j)) = M(v, cols[j]);
  return out;
}

}  // namespace

UndirectedDesign build_undirected_design(Vertex v, const SamplerState& state, const Dataset& data) {
  check_dims(state, data);
  const VertexContext ctx = data.layout.context(v);
  const Eigen::MatrixXd Y_P = gather(data.Y, ctx.parents);

  UndirectedDesign d;
  d.columns = ctx.neighbors;
  d.response = data.Y.col(v);
  d.X = gather(data.Y, ctx.neighbors);
  if (!ctx.parents.empty()) {
    d.response -= Y_P * row_over(state.b, v, ctx.parents);
    for (std::size_t j = 0; j < ctx.neighbors.size(); ++j)
      d.X.col(static_cast<Eigen::Index>(j)) -= Y_P * row_over(state.b, ctx.neighbors[j], ctx.parents);
  }
  return d;
}

DirectedDesign build_directed_design(Vertex v, const SamplerState& state, const Dataset& data) {
  check_dims(state, data);
  const VertexContext ctx = data.layout.context(v);
  const Eigen::MatrixXd Y_P = gather(data.Y, ctx.parents);
  const auto m = static_cast<Eigen::Index>(ctx.parents.size());

  DirectedDesign d;
  d.parents = ctx.parents;
  d.rows.push_back(v);
  d.response = data.Y.col(v);
  for (Vertex u : ctx.neighbors) {
    if (state.alpha(v, u) != 0.0) d.response -= state.alpha(v, u) * data.Y.col(u);
    if (state.eta(v, u)) d.rows.push_back(u);
  }
  d.X.resize(data.n(), m * static_cast<Eigen::Index>(d.rows.size()));
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const double scale = r == 0 ? 1.0 : -state.alpha(v, d.rows[r]);
    d.X.middleCols(m * static_cast<Eigen::Index>(r), m) = scale * Y_P;
  }
  return d;
}

Eigen::VectorXd DirectedDesign::stacked_coefficients(const SamplerState& state) const {
  const auto m = static_cast<Eigen::Index>(parents.size());
  Eigen::VectorXd out(m * static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.segment(m * static_cast<Eigen::Index>(r), m) = row_over(state.b, rows[r], parents);
  return out;
}

}  // namespace bans
