#include "epslab/operators.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace epslab {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Index of the off-diagonal coordinate (i<j) within the orthonormal
// basis of symmetric matrices: the n diagonal entries come first.
int offdiag_slot(int n, int i, int j) {
  int slot = n;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (a == i && b == j) return slot;
      ++slot;
    }
  throw std::logic_error("bad off-diagonal index");
}

// Rows of the diagonal trace-free basis: n-1 orthonormal combinations
// of the diagonal directions, Gram-Schmidt over diag(1,...,1,-k,0...).
Eigen::MatrixXd diagonal_tracefree_basis(int n) {
  Eigen::MatrixXd basis(n - 1, n);
  for (int k = 0; k < n - 1; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v.head(k + 1).setOnes();
    v[k + 1] = -(k + 1);
    basis.row(k) = v.transpose() / v.norm();
  }
  return basis;
}

}  // namespace

FirstOrderOperator make_builtin(Builtin which, int n) {
  if (n < 2) throw std::invalid_argument("builtin operators need n >= 2");
  FirstOrderOperator op;
  op.n = n;
  op.dim_v = n;
  switch (which) {
    case Builtin::Gradient: {
      op.name = "grad";
      op.dim_w = n * n;
      for (int s = 0; s < n; ++s) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(op.dim_w, n);
        // (grad v)_{ik} = d_k v_i, row-major rows of the target.
        for (int i = 0; i < n; ++i) a(i * n + s, i) = 1.0;
        op.coeffs.push_back(std::move(a));
      }
      break;
    }
    case Builtin::Divergence: {
      op.name = "div";
      op.dim_w = 1;
      for (int s = 0; s < n; ++s) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, n);
        a(0, s) = 1.0;
        op.coeffs.push_back(std::move(a));
      }
      break;
    }
    case Builtin::SymmetricGradient: {
      op.name = "eps";
      op.dim_w = n * (n + 1) / 2;
      for (int s = 0; s < n; ++s) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(op.dim_w, n);
        // v (.) e_s in orthonormal coordinates.
        a(s, s) = 1.0;  // diagonal slot (s,s) picks v_s
        for (int i = 0; i < n; ++i) {
          if (i == s) continue;
          const int slot = offdiag_slot(n, std::min(i, s), std::max(i, s));
          a(slot, i) = 1.0 / kSqrt2;
        }
        op.coeffs.push_back(std::move(a));
      }
      break;
    }
    case Builtin::TraceFreeSymmetricGradient: {
      op.name = "eps_dev";
      op.dim_w = n * (n + 1) / 2 - 1;
      const Eigen::MatrixXd diag_basis = diagonal_tracefree_basis(n);
      const int off_count = n * (n - 1) / 2;
      for (int s = 0; s < n; ++s) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(op.dim_w, n);
        // Diagonal of v (.) e_s - (v_s / n) I is e_s v_s - (v_s/n) 1;
        // project onto the trace-free diagonal basis.
        for (int k = 0; k < n - 1; ++k)
          a(off_count + k, s) = diag_basis(k, s);
        for (int i = 0; i < n; ++i) {
          if (i == s) continue;
          const int slot = offdiag_slot(n, std::min(i, s), std::max(i, s)) - n;
          a(slot, i) = 1.0 / kSqrt2;
        }
        op.coeffs.push_back(std::move(a));
      }
      break;
    }
  }
  return op;
}

FirstOrderOperator make_builtin(const std::string& name, int n) {
  if (name == "grad") return make_builtin(Builtin::Gradient, n);
  if (name == "div") return make_builtin(Builtin::Divergence, n);
  if (name == "eps") return make_builtin(Builtin::SymmetricGradient, n);
  if (name == "eps_dev")
    return make_builtin(Builtin::TraceFreeSymmetricGradient, n);
  throw std::invalid_argument("unknown operator name: " + name);
}

Eigen::MatrixXd symbol(const FirstOrderOperator& op, const Eigen::VectorXd& xi) {
  if (xi.size() != op.n) throw std::invalid_argument("frequency dimension mismatch");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(op.dim_w, op.dim_v);
  for (int i = 0; i < op.n; ++i) s += xi[i] * op.coeffs[i];
  return s;
}

Eigen::MatrixXd adjoint_symbol(const FirstOrderOperator& op,
                               const Eigen::VectorXd& xi) {
  return symbol(op, xi).transpose();
}

namespace {

double min_singular(const FirstOrderOperator& op, const Eigen::VectorXd& xi) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(symbol(op, xi));
  // sigma_min as a map V -> W: injectivity needs dim_w >= dim_v and the
  // smallest of the dim_v singular values positive.
  if (op.dim_w < op.dim_v) return 0.0;
  return svd.singularValues().minCoeff();
}

std::vector<Eigen::VectorXd> sphere_samples(int n, int count) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(count + 2 * n);
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * M_PI * i / count;
      pts.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
    }
  } else {
    // Deterministic seeded directions plus the coordinate axes.
    std::mt19937_64 rng(0x5eed5eedULL + n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd v(n);
      do {
        for (int k = 0; k < n; ++k) v[k] = gauss(rng);
      } while (v.norm() < 1e-8);
      pts.push_back(v.normalized());
    }
  }
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[k] = 1.0;
    pts.push_back(e);
    pts.push_back(-e);
  }
  return pts;
}

}  // namespace

EllipticityReport ellipticity_margin(const FirstOrderOperator& op,
                                     int coarse_samples, int refine_iters,
                                     double tol) {
  EllipticityReport rep;
  Eigen::VectorXd best;
  double best_val = std::numeric_limits<double>::infinity();
  const auto samples = sphere_samples(op.n, coarse_samples);
  for (const auto& xi : samples) {
    const double v = min_singular(op, xi);
    if (v < best_val) { best_val = v; best = xi; }
  }
  rep.samples_used = static_cast<int>(samples.size());

  // Projected descent with a numerical tangent gradient.
  const double fd = 1e-6;
  double step = 0.1;
  for (int it = 0; it < refine_iters && step > 1e-12; ++it) {
    Eigen::VectorXd grad(op.n);
    for (int k = 0; k < op.n; ++k) {
      Eigen::VectorXd hi = best, lo = best;
      hi[k] += fd;
      lo[k] -= fd;
      grad[k] = (min_singular(op, hi.normalized()) -
                 min_singular(op, lo.normalized())) /
                (2.0 * fd);
      rep.samples_used += 2;
    }
    grad -= grad.dot(best) * best;  // tangent part
    if (grad.norm() < 1e-15) break;
    bool moved = false;
    while (step > 1e-12) {
      const Eigen::VectorXd cand = (best - step * grad).normalized();
      const double v = min_singular(op, cand);
      ++rep.samples_used;
      if (v < best_val) {
        best = cand;
        best_val = v;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  rep.min_singular_value = best_val;
  rep.witness_xi = best;
  rep.elliptic = best_val > tol;
  return rep;
}

KKReduction kk_reduction(const FirstOrderOperator& op1,
                         const FirstOrderOperator& op2, double tol) {
  if (op1.n != op2.n || op1.dim_v != op2.dim_v)
    throw std::invalid_argument("operators act on different spaces");
  const int n = op1.n, dv = op1.dim_v;

  // Stack coefficients side by side and solve min_C ||B2 - C B1||_F.
  Eigen::MatrixXd b1(op1.dim_w, n * dv), b2(op2.dim_w, n * dv);
  for (int s = 0; s < n; ++s) {
    b1.middleCols(s * dv, dv) = op1.coeffs[s];
    b2.middleCols(s * dv, dv) = op2.coeffs[s];
  }
  const Eigen::MatrixXd ct =
      b1.transpose().completeOrthogonalDecomposition().solve(b2.transpose());
  const Eigen::MatrixXd c = ct.transpose();

  KKReduction red;
  const double scale = b2.norm();
  red.residual = scale > 0.0 ? (b2 - c * b1).norm() / scale : 0.0;
  red.exists = red.residual <= tol;
  if (red.exists) red.reduction = c;
  return red;
}

TensorField apply(const FirstOrderOperator& op, const GridField& field,
                  FdScheme scheme) {
  const Grid& g = *field.grid;
  if (field.dim() != op.dim_v)
    throw std::invalid_argument("operator/field component mismatch");
  if (op.n != 2)
    throw std::invalid_argument("grid application is two-dimensional");

  TensorField out;
  out.grid = field.grid;
  out.values = Eigen::MatrixXd::Zero(g.num_nodes(), op.dim_w);
  out.support = BoolArray::Constant(g.num_nodes(), false);

  const int n = g.n();
  const double h = g.h();
  for (int node : g.active_nodes()) {
    if (!field.support[node]) continue;
    const int x = g.ix(node), y = g.iy(node);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(op.dim_w);
    bool ok = true;
    for (int s = 0; s < 2 && ok; ++s) {
      const int px = s == 0 ? x + 1 : x, py = s == 1 ? y + 1 : y;
      const int mx = s == 0 ? x - 1 : x, my = s == 1 ? y - 1 : y;
      const bool has_p = px >= 0 && px < n && py >= 0 && py < n &&
                         g.active(g.index(px, py)) &&
                         field.support[g.index(px, py)];
      const bool has_m = mx >= 0 && mx < n && my >= 0 && my < n &&
                         g.active(g.index(mx, my)) &&
                         field.support[g.index(mx, my)];
      Eigen::VectorXd d(op.dim_v);
      if (has_p && has_m && scheme == FdScheme::Central) {
        d = (field.at(g.index(px, py)) - field.at(g.index(mx, my))) / (2.0 * h);
      } else if (has_p) {
        d = (field.at(g.index(px, py)) - field.at(node)) / h;
      } else if (has_m) {
        d = (field.at(node) - field.at(g.index(mx, my))) / h;
      } else {
        ok = false;
        break;
      }
      acc += op.coeffs[s] * d;
    }
    if (!ok) continue;
    out.values.row(node) = acc.transpose();
    out.support[node] = true;
  }
  return out;
}

Eigen::VectorXd sym_coords(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("square matrix expected");
  Eigen::VectorXd c(n * (n + 1) / 2);
  for (int i = 0; i < n; ++i) c[i] = m(i, i);
  int slot = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      c[slot++] = (m(i, j) + m(j, i)) / kSqrt2;
  return c;
}

Eigen::MatrixXd sym_from_coords(const Eigen::VectorXd& c, int n) {
  if (c.size() != n * (n + 1) / 2)
    throw std::invalid_argument("coordinate count mismatch");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = c[i];
  int slot = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = m(j, i) = c[slot++] / kSqrt2;
    }
  return m;
}

Eigen::VectorXd tracefree_coords(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd c(n * (n + 1) / 2 - 1);
  int slot = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      c[slot++] = (m(i, j) + m(j, i)) / kSqrt2;
  const Eigen::MatrixXd basis = diagonal_tracefree_basis(n);
  for (int k = 0; k < n - 1; ++k) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += basis(k, i) * m(i, i);
    c[slot++] = v;
  }
  return c;
}

}  // namespace epslab
