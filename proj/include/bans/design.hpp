#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bans/datagen.hpp"
#include "bans/sampler.hpp"

namespace bans {

/// Response and design for v's undirected regression:
///   response = y_v - Y_P b_v,   X = Y_C - Y_P B_{C,P}^T   (columns follow `columns`).
struct UndirectedDesign {
  Eigen::VectorXd response;
  Eigen::MatrixXd X;
  std::vector<Vertex> columns;
};

/// Response and design for v's directed regression:
///   response = y_v - Y_C alpha_v,
///   X = [Y_P, -alpha_{v,u1} Y_P, -alpha_{v,u2} Y_P, ...]  for neighbours u1, u2, ...
/// `rows` lists the B rows stacked in the coefficient vector (v first).
struct DirectedDesign {
  Eigen::VectorXd response;
  Eigen::MatrixXd X;
  std::vector<Vertex> parents;
  std::vector<Vertex> rows;

  /// (b_v; b_u1; ...) restricted to the parents.
  Eigen::VectorXd stacked_coefficients(const SamplerState& state) const;
};

UndirectedDesign build_undirected_design(Vertex v, const SamplerState& state, const Dataset& data);
DirectedDesign build_directed_design(Vertex v, const SamplerState& state, const Dataset& data);

}  // namespace bans
