#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

#include "chb/error.hpp"

namespace chb {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Uniform tensor-product grid on the rectangle [0,lx] x [0,ly] with
/// nx*ny nodes. Node (i,j) has index j*nx + i (row-major, x fastest).
struct StructuredGrid {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  StructuredGrid() = default;
  StructuredGrid(int nx_, int ny_, double lx_, double ly_)
      : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    validate();
  }

  void validate() const {
    require(nx >= 3 && ny >= 3, ErrorKind::invalid_argument,
            "grid: node counts must be >= 3");
    require(lx > 0.0 && ly > 0.0, ErrorKind::invalid_argument,
            "grid: domain lengths must be positive");
  }

  double hx() const { return lx / (nx - 1); }
  double hy() const { return ly / (ny - 1); }
  int num_nodes() const { return nx * ny; }
  int num_cells() const { return (nx - 1) * (ny - 1); }
  int node(int i, int j) const { return j * nx + i; }
  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }

  bool same_as(const StructuredGrid& o) const {
    return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
  }
};

using GridPtr = std::shared_ptr<const StructuredGrid>;

inline GridPtr make_grid(int nx, int ny, double lx, double ly) {
  return std::make_shared<const StructuredGrid>(nx, ny, lx, ly);
}

/// Nodal scalar field on a StructuredGrid.
struct ScalarField {
  GridPtr grid;
  Vec v;

  ScalarField() = default;
  explicit ScalarField(GridPtr g) : grid(std::move(g)) {
    v = Vec::Zero(grid->num_nodes());
  }
  ScalarField(GridPtr g, Vec values) : grid(std::move(g)), v(std::move(values)) {
    require(v.size() == grid->num_nodes(), ErrorKind::invalid_argument,
            "scalar field: value count must equal node count");
  }
  ScalarField(GridPtr g, double constant) : grid(std::move(g)) {
    v = Vec::Constant(grid->num_nodes(), constant);
  }

  bool finite() const { return v.allFinite(); }
};

/// Nodal 2-vector field; components stored stacked [vx; vy].
struct VectorField2 {
  GridPtr grid;
  Vec v;  // size 2n

  VectorField2() = default;
  explicit VectorField2(GridPtr g) : grid(std::move(g)) {
    v = Vec::Zero(2 * grid->num_nodes());
  }
  VectorField2(GridPtr g, Vec values) : grid(std::move(g)), v(std::move(values)) {
    require(v.size() == 2 * grid->num_nodes(), ErrorKind::invalid_argument,
            "vector field: component counts must equal node count");
  }

  auto x() { return v.head(grid->num_nodes()); }
  auto y() { return v.tail(grid->num_nodes()); }
  auto x() const { return v.head(grid->num_nodes()); }
  auto y() const { return v.tail(grid->num_nodes()); }
  bool finite() const { return v.allFinite(); }
};

inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
  require(a && b && a->same_as(*b), ErrorKind::mismatched_grids,
          "fields live on different grids");
}

}  // namespace chb
