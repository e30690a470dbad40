#include "epslab/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace epslab {

Grid::Grid(int n, Domain d, Eigen::Vector2d c, double r)
    : n_(n), h_(1.0 / (n - 1)), domain_(d), disk_center_(c), disk_radius_(r) {
  if (n < 3) throw std::invalid_argument("grid needs at least 3 nodes per side");
  const int m = n * n;
  active_.assign(m, 0);
  interior_.assign(m, 0);
  weights_.assign(m, 0.0);

  for (int node = 0; node < m; ++node) {
    if (d == Domain::UnitSquare) {
      active_[node] = 1;
    } else {
      active_[node] = (pos(node) - c).norm() <= r + 1e-12;
    }
  }
  for (int node = 0; node < m; ++node) {
    if (!active_[node]) continue;
    const int x = ix(node), y = iy(node);
    bool inner = x > 0 && x < n - 1 && y > 0 && y < n - 1;
    if (inner) {
      inner = active_[index(x - 1, y)] && active_[index(x + 1, y)] &&
              active_[index(x, y - 1)] && active_[index(x, y + 1)];
    }
    interior_[node] = inner;
    active_nodes_.push_back(node);
    (inner ? interior_nodes_ : boundary_nodes_).push_back(node);
  }
  if (interior_nodes_.empty())
    throw std::invalid_argument("domain mask has no interior nodes");

  // Trapezoidal product weights relative to the lattice; a disk mask
  // halves the weight at masked-edge nodes the same way.
  auto axis_factor = [&](int i, bool lo_cut, bool hi_cut) {
    double f = 1.0;
    if (i == 0 || lo_cut) f *= 0.5;
    if (i == n - 1 || hi_cut) f *= 0.5;
    return f;
  };
  for (int node : active_nodes_) {
    const int x = ix(node), y = iy(node);
    const bool lx = x > 0 && !active_[index(x - 1, y)];
    const bool hx = x < n - 1 && !active_[index(x + 1, y)];
    const bool ly = y > 0 && !active_[index(x, y - 1)];
    const bool hy = y < n - 1 && !active_[index(x, y + 1)];
    weights_[node] = h_ * h_ * axis_factor(x, lx, hx) * axis_factor(y, ly, hy);
  }
}

std::shared_ptr<const Grid> Grid::make_square(int n) {
  return std::shared_ptr<const Grid>(
      new Grid(n, Domain::UnitSquare, {0.5, 0.5}, 0.5));
}

std::shared_ptr<const Grid> Grid::make_disk(int n, Eigen::Vector2d center,
                                            double radius) {
  return std::shared_ptr<const Grid>(
      new Grid(n, Domain::DiskMask, center, radius));
}

Eigen::Vector2d Grid::outward_normal(int node) const {
  if (!boundary(node)) throw std::invalid_argument("normal of a non-boundary node");
  if (domain_ == Domain::DiskMask) {
    Eigen::Vector2d d = pos(node) - disk_center_;
    const double len = d.norm();
    if (len < 1e-14) throw std::invalid_argument("normal undefined at the disk center");
    return d / len;
  }
  Eigen::Vector2d nu(0.0, 0.0);
  if (ix(node) == 0) nu[0] -= 1.0;
  if (ix(node) == n_ - 1) nu[0] += 1.0;
  if (iy(node) == 0) nu[1] -= 1.0;
  if (iy(node) == n_ - 1) nu[1] += 1.0;
  if (nu.squaredNorm() == 0.0) {
    // Masked-edge node of a square-with-hole situation cannot occur for
    // the unit square; keep a defined value for robustness.
    nu = Eigen::Vector2d(1.0, 0.0);
  }
  return nu.normalized();
}

double Grid::boundary_weight(int node) const {
  if (!boundary(node)) throw std::invalid_argument("boundary weight of an inner node");
  if (domain_ == Domain::DiskMask) {
    return 2.0 * M_PI * disk_radius_ / static_cast<double>(boundary_nodes_.size());
  }
  // Trapezoid along each edge; corners belong to two edges.
  const int x = ix(node), y = iy(node);
  const bool cx = x == 0 || x == n_ - 1;
  const bool cy = y == 0 || y == n_ - 1;
  if (cx && cy) return h_;        // two half-weights
  return h_;                      // interior edge node of a single edge
}

GridField zero_field(GridPtr grid, int dim) {
  GridField f;
  f.grid = std::move(grid);
  f.values = Eigen::MatrixXd::Zero(f.grid->num_nodes(), dim);
  f.support = BoolArray::Constant(f.grid->num_nodes(), false);
  for (int node : f.grid->active_nodes()) f.support[node] = true;
  return f;
}

GridField field_from_function(
    GridPtr grid, const std::function<Eigen::VectorXd(const Eigen::Vector2d&)>& fn,
    int dim) {
  GridField f = zero_field(std::move(grid), dim);
  for (int node : f.grid->active_nodes()) {
    Eigen::VectorXd v = fn(f.grid->pos(node));
    if (v.size() != dim) throw std::invalid_argument("field function dimension mismatch");
    f.values.row(node) = v.transpose();
  }
  return f;
}

GridField finite_difference(const GridField& field, int s, int h_steps,
                            FdKind kind) {
  if (s != 0 && s != 1) throw std::invalid_argument("direction must be 0 or 1");
  if (h_steps < 1) throw std::invalid_argument("h_steps must be >= 1");
  const Grid& g = *field.grid;
  const int n = g.n();
  const bool plus = kind == FdKind::DeltaPlus || kind == FdKind::TauPlus;
  const bool scaled = kind == FdKind::DeltaPlus || kind == FdKind::DeltaMinus;
  // Both difference quotients approximate the derivative, so the
  // backward one flips the sign of tau_minus.
  double scale = scaled ? 1.0 / (h_steps * g.h()) : 1.0;
  if (kind == FdKind::DeltaMinus) scale = -scale;

  GridField out;
  out.grid = field.grid;
  out.values = Eigen::MatrixXd::Zero(field.values.rows(), field.dim());
  out.support = BoolArray::Constant(g.num_nodes(), false);

  const int step = plus ? h_steps : -h_steps;
  for (int node : g.active_nodes()) {
    if (!field.support[node]) continue;
    const int x = g.ix(node), y = g.iy(node);
    const int tx = s == 0 ? x + step : x;
    const int ty = s == 1 ? y + step : y;
    if (tx < 0 || tx >= n || ty < 0 || ty >= n) continue;
    const int target = g.index(tx, ty);
    if (!field.support[target]) continue;
    out.values.row(node) =
        scale * (field.values.row(target) - field.values.row(node));
    out.support[node] = true;
  }
  return out;
}

BoolArray full_region(const Grid& grid) {
  BoolArray r = BoolArray::Constant(grid.num_nodes(), false);
  for (int node : grid.active_nodes()) r[node] = true;
  return r;
}

BoolArray rect_region(const Grid& grid, int ix0, int ix1, int iy0, int iy1) {
  BoolArray r = BoolArray::Constant(grid.num_nodes(), false);
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) {
      const int node = grid.index(x, y);
      if (grid.active(node)) r[node] = true;
    }
  return r;
}

BoolArray ball_region(const Grid& grid, const Eigen::Vector2d& center,
                      double radius) {
  BoolArray r = BoolArray::Constant(grid.num_nodes(), false);
  for (int node : grid.active_nodes())
    if ((grid.pos(node) - center).norm() <= radius + 1e-12) r[node] = true;
  return r;
}

double lp_norm(const GridField& field, double p, const BoolArray& region) {
  const Grid& g = *field.grid;
  if (p <= 0.0 || !std::isfinite(p)) {  // sup norm
    double m = 0.0;
    for (int node : g.active_nodes())
      if (region[node] && field.support[node])
        m = std::max(m, field.values.row(node).norm());
    return m;
  }
  double acc = 0.0;
  for (int node : g.active_nodes()) {
    if (!region[node] || !field.support[node]) continue;
    acc += g.weight(node) * std::pow(field.values.row(node).norm(), p);
  }
  return std::pow(acc, 1.0 / p);
}

double lp_norm(const GridField& field, double p) {
  return lp_norm(field, p, full_region(*field.grid));
}

double region_mass(const Grid& grid, const BoolArray& region) {
  double m = 0.0;
  for (int node : grid.active_nodes())
    if (region[node]) m += grid.weight(node);
  return m;
}

Eigen::VectorXd region_mean(const GridField& field, const BoolArray& region) {
  const Grid& g = *field.grid;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(field.dim());
  double mass = 0.0;
  for (int node : g.active_nodes()) {
    if (!region[node] || !field.support[node]) continue;
    acc += g.weight(node) * field.values.row(node).transpose();
    mass += g.weight(node);
  }
  if (mass <= 0.0) throw std::invalid_argument("mean over an empty region");
  return acc / mass;
}

namespace {

double mean_oscillation(const GridField& field, const Grid& g, int ix0, int ix1,
                        int iy0, int iy1) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(field.dim());
  double mass = 0.0;
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) {
      const int node = g.index(x, y);
      if (!g.active(node) || !field.support[node]) continue;
      mean += g.weight(node) * field.values.row(node).transpose();
      mass += g.weight(node);
    }
  if (mass <= 0.0) return 0.0;
  mean /= mass;
  double osc = 0.0;
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) {
      const int node = g.index(x, y);
      if (!g.active(node) || !field.support[node]) continue;
      osc += g.weight(node) *
             (field.values.row(node).transpose() - mean).norm();
    }
  return osc / mass;
}

void bmo_recurse(const GridField& field, const Grid& g, int ix0, int ix1,
                 int iy0, int iy1, int depth, double& best) {
  const long count = static_cast<long>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  if (count < 4) return;
  best = std::max(best, mean_oscillation(field, g, ix0, ix1, iy0, iy1));
  if (depth == 0) return;
  const int mx = (ix0 + ix1) / 2, my = (iy0 + iy1) / 2;
  bmo_recurse(field, g, ix0, mx, iy0, my, depth - 1, best);
  bmo_recurse(field, g, mx + 1, ix1, iy0, my, depth - 1, best);
  bmo_recurse(field, g, ix0, mx, my + 1, iy1, depth - 1, best);
  bmo_recurse(field, g, mx + 1, ix1, my + 1, iy1, depth - 1, best);
}

}  // namespace

double bmo_seminorm(const GridField& field, int ix0, int ix1, int iy0, int iy1,
                    int max_depth) {
  const Grid& g = *field.grid;
  if (ix0 < 0 || iy0 < 0 || ix1 >= g.n() || iy1 >= g.n() || ix0 > ix1 || iy0 > iy1)
    throw std::invalid_argument("oscillation window out of range");
  if (static_cast<long>(ix1 - ix0 + 1) * (iy1 - iy0 + 1) < 4)
    throw std::invalid_argument("oscillation window needs at least 4 nodes");
  double best = 0.0;
  bmo_recurse(field, g, ix0, ix1, iy0, iy1, max_depth, best);
  return best;
}

RigidFit rigid_project(const GridField& field, const BoolArray& region) {
  const Grid& g = *field.grid;
  if (field.dim() != 2)
    throw std::invalid_argument("rigid fit expects a two-component field");

  // Basis fields: phi0 = (-x2, x1), phi1 = e1, phi2 = e2.
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  int count = 0;
  bool collinear = true;
  Eigen::Vector2d first, second;
  bool have_first = false, have_second = false;
  for (int node : g.active_nodes()) {
    if (!region[node] || !field.support[node]) continue;
    const Eigen::Vector2d x = g.pos(node);
    if (!have_first) { first = x; have_first = true; }
    else if (!have_second && (x - first).norm() > 1e-14) { second = x; have_second = true; }
    else if (have_second) {
      const Eigen::Vector2d d1 = second - first, d2 = x - first;
      if (std::abs(d1.x() * d2.y() - d1.y() * d2.x()) > 1e-14) collinear = false;
    }
    const Eigen::Vector2d rot(-x[1], x[0]);
    const Eigen::Vector2d u = field.at(node);
    gram(0, 0) += rot.squaredNorm();
    gram(0, 1) += rot[0];
    gram(0, 2) += rot[1];
    gram(1, 1) += 1.0;
    gram(2, 2) += 1.0;
    rhs[0] += rot.dot(u);
    rhs[1] += u[0];
    rhs[2] += u[1];
    ++count;
  }
  if (count < 3 || collinear)
    throw std::invalid_argument("rigid fit needs at least 3 non-collinear nodes");
  gram(1, 0) = gram(0, 1);
  gram(2, 0) = gram(0, 2);
  gram(1, 2) = gram(2, 1) = 0.0;

  const Eigen::Vector3d sol = gram.ldlt().solve(rhs);
  RigidFit fit;
  fit.motion.rotation = sol[0];
  fit.motion.translation = {sol[1], sol[2]};
  fit.residual.grid = field.grid;
  fit.residual.values = Eigen::MatrixXd::Zero(field.values.rows(), 2);
  fit.residual.support = BoolArray::Constant(g.num_nodes(), false);
  for (int node : g.active_nodes()) {
    if (!region[node] || !field.support[node]) continue;
    fit.residual.values.row(node) =
        (field.at(node) - fit.motion.eval(g.pos(node))).transpose();
    fit.residual.support[node] = true;
  }
  return fit;
}

GridField mollify(const GridField& field, double rho) {
  const Grid& g = *field.grid;
  if (rho < g.h()) throw std::invalid_argument("mollifier radius below grid spacing");
  if (rho > 0.5) throw std::invalid_argument("mollifier radius exceeds half the domain");

  const int reach = static_cast<int>(std::floor(rho / g.h() + 1e-12));
  std::vector<std::pair<Eigen::Vector2i, double>> stencil;
  double mass = 0.0;
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx) {
      const double r2 = (dx * dx + dy * dy) * g.h() * g.h() / (rho * rho);
      if (r2 >= 1.0) continue;
      const double w = std::exp(-1.0 / (1.0 - r2));
      stencil.push_back({{dx, dy}, w});
      mass += w;
    }
  for (auto& s : stencil) s.second /= mass;

  GridField out;
  out.grid = field.grid;
  out.values = Eigen::MatrixXd::Zero(field.values.rows(), field.dim());
  out.support = BoolArray::Constant(g.num_nodes(), false);
  const int n = g.n();
  for (int node : g.active_nodes()) {
    if (!field.support[node]) continue;
    const int x = g.ix(node), y = g.iy(node);
    bool ok = true;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(field.dim());
    for (const auto& [d, w] : stencil) {
      const int tx = x + d[0], ty = y + d[1];
      if (tx < 0 || tx >= n || ty < 0 || ty >= n) { ok = false; break; }
      const int t = g.index(tx, ty);
      if (!field.support[t]) { ok = false; break; }
      acc += w * field.values.row(t);
    }
    if (!ok) continue;
    out.values.row(node) = acc;
    out.support[node] = true;
  }
  return out;
}

}  // namespace epslab
