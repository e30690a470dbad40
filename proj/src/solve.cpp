#include "epslab/solve.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

namespace epslab {

namespace {

// Difference stencils matching apply(): central where both lattice
// neighbours are active, one-sided on the boundary ring.  Each entry
// evaluates d/dx_s u(node) = ca u(a) + cb u(b).
struct Stencil {
  int a = 0, b = 0;
  double ca = 0.0, cb = 0.0;
};

struct Assembler {
  const Grid* g = nullptr;
  const Integrand* f = nullptr;
  Stabilization stab;
  std::vector<Stencil> stencils;  // 2 per active node, [2*i + s]
  std::vector<double> hat_norm;   // per node: largest referencing coefficient

  explicit Assembler(const Problem& pb)
      : g(pb.grid.get()), f(&pb.f), stab(pb.stab) {
    const int n = g->n();
    const double h = g->h();
    stencils.resize(2 * g->active_nodes().size());
    hat_norm.assign(g->num_nodes(), 0.0);
    for (size_t i = 0; i < g->active_nodes().size(); ++i) {
      const int node = g->active_nodes()[i];
      const int x = g->ix(node), y = g->iy(node);
      for (int s = 0; s < 2; ++s) {
        const int px = s == 0 ? x + 1 : x, py = s == 1 ? y + 1 : y;
        const int mx = s == 0 ? x - 1 : x, my = s == 1 ? y - 1 : y;
        const bool has_p =
            px < n && py < n && g->active(g->index(px, py));
        const bool has_m =
            mx >= 0 && my >= 0 && g->active(g->index(mx, my));
        Stencil st;
        if (has_p && has_m) {
          st = {g->index(px, py), g->index(mx, my), 1.0 / (2 * h), -1.0 / (2 * h)};
        } else if (has_p) {
          st = {g->index(px, py), node, 1.0 / h, -1.0 / h};
        } else if (has_m) {
          st = {node, g->index(mx, my), 1.0 / h, -1.0 / h};
        } else {
          throw std::invalid_argument("grid too coarse for difference stencils");
        }
        stencils[2 * i + s] = st;
        hat_norm[st.a] = std::max(hat_norm[st.a], std::abs(st.ca));
        hat_norm[st.b] = std::max(hat_norm[st.b], std::abs(st.cb));
      }
    }
  }

  // Stabilized energy; optionally the bare energy and the full nodal
  // gradient (rows of non-interior nodes are zeroed afterwards by the
  // caller's packing, boundary values being pinned).
  double energy(const Eigen::MatrixXd& u, double* bare,
                Eigen::MatrixXd* grad) const {
    const auto& act = g->active_nodes();
    double total = 0.0, total_bare = 0.0;
    if (grad) grad->setZero(g->num_nodes(), 2);
    Eigen::Matrix2d du;
    Eigen::VectorXd e(f->dim), ge;
    for (size_t i = 0; i < act.size(); ++i) {
      const int node = act[i];
      const double w = g->weight(node);
      for (int s = 0; s < 2; ++s) {
        const Stencil& st = stencils[2 * i + s];
        for (int c = 0; c < 2; ++c)
          du(c, s) = st.ca * u(st.a, c) + st.cb * u(st.b, c);
      }
      e[0] = du(0, 0);
      e[1] = du(1, 1);
      e[2] = (du(0, 1) + du(1, 0)) * M_SQRT1_2;
      const double fv = f->value(e);
      total_bare += w * fv;
      double sv = 0.0;
      if (stab.kind == Stabilization::Kind::Viscosity) {
        sv = 0.5 * stab.delta * du.squaredNorm();
      } else {
        sv = stab.alpha * (1.0 + std::pow(e.norm(), stab.p));
      }
      total += w * (fv + sv);
      if (!grad) continue;

      ge = f->gradient(e);
      if (stab.kind == Stabilization::Kind::PGrowth) {
        const double en = e.norm();
        if (en > 1e-300)
          ge += stab.alpha * stab.p * std::pow(en, stab.p - 2.0) * e;
      }
      Eigen::Matrix2d dd;  // dF/d(du)
      dd(0, 0) = ge[0];
      dd(1, 1) = ge[1];
      dd(0, 1) = dd(1, 0) = ge[2] * M_SQRT1_2;
      if (stab.kind == Stabilization::Kind::Viscosity) dd += stab.delta * du;
      for (int s = 0; s < 2; ++s) {
        const Stencil& st = stencils[2 * i + s];
        for (int c = 0; c < 2; ++c) {
          (*grad)(st.a, c) += w * st.ca * dd(c, s);
          (*grad)(st.b, c) += w * st.cb * dd(c, s);
        }
      }
    }
    if (bare) *bare = total_bare;
    return total;
  }
};

void check_problem(const Problem& pb) {
  if (!pb.grid) throw std::invalid_argument("problem has no grid");
  if (pb.f.dim != 3)
    throw std::invalid_argument("integrand must act on symmetric 2x2 coordinates");
  if (pb.datum.dim() != 2 || pb.datum.grid != pb.grid)
    throw std::invalid_argument("datum must be a planar field on the problem grid");
}

GridField perturbed_start(const Problem& pb) {
  GridField u = pb.datum;
  const double amp = pb.opts.perturb_amplitude;
  if (amp == 0.0) return u;
  const int k = std::max(1, pb.opts.perturb_frequency);
  for (int node : pb.grid->interior_nodes()) {
    const Eigen::Vector2d x = pb.grid->pos(node);
    const double bump =
        amp * std::sin(M_PI * k * x[0]) * std::sin(M_PI * k * x[1]);
    u.values(node, 0) += bump;
    u.values(node, 1) -= bump;
  }
  return u;
}

}  // namespace

double stabilized_energy(const Problem& problem, const GridField& u) {
  check_problem(problem);
  Assembler as(problem);
  return as.energy(u.values, nullptr, nullptr);
}

double bare_energy(const Problem& problem, const GridField& u) {
  check_problem(problem);
  Assembler as(problem);
  double bare = 0.0;
  as.energy(u.values, &bare, nullptr);
  return bare;
}

double el_residual(const Problem& problem, const GridField& u) {
  check_problem(problem);
  Assembler as(problem);
  Eigen::MatrixXd grad;
  as.energy(u.values, nullptr, &grad);
  double res = 0.0;
  for (int node : problem.grid->interior_nodes()) {
    const double hn = std::max(1.0, as.hat_norm[node]);
    res = std::max(res, grad.row(node).lpNorm<Eigen::Infinity>() / hn);
  }
  return res;
}

Eigen::VectorXd mean_symmetric_gradient(const Problem& problem,
                                        const GridField& u) {
  check_problem(problem);
  const auto eps = make_builtin(Builtin::SymmetricGradient, 2);
  const GridField e = apply(eps, u, FdScheme::Central);
  return region_mean(e, full_region(*problem.grid));
}

SolveReport minimize_stabilized(const Problem& problem,
                                const GridField& initial) {
  check_problem(problem);
  const auto t0 = std::chrono::steady_clock::now();
  const Grid& g = *problem.grid;
  Assembler as(problem);

  Eigen::MatrixXd u = initial.values;
  for (int node : g.boundary_nodes()) u.row(node) = problem.datum.values.row(node);

  const auto& free_nodes = g.interior_nodes();
  const int m = static_cast<int>(free_nodes.size());
  auto pack = [&](const Eigen::MatrixXd& full) {
    Eigen::VectorXd x(2 * m);
    for (int i = 0; i < m; ++i) {
      x[2 * i] = full(free_nodes[i], 0);
      x[2 * i + 1] = full(free_nodes[i], 1);
    }
    return x;
  };
  auto unpack = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& full) {
    for (int i = 0; i < m; ++i) {
      full(free_nodes[i], 0) = x[2 * i];
      full(free_nodes[i], 1) = x[2 * i + 1];
    }
  };

  SolveReport rep;
  Eigen::MatrixXd grad_full;
  double bare = 0.0;
  Eigen::VectorXd x = pack(u);
  double fx = as.energy(u, &bare, &grad_full);
  Eigen::VectorXd gx = pack(grad_full);
  rep.trajectory.push_back({0, fx, bare});

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> hist;  // (s, y)
  const SolverOptions& so = problem.opts;
  Eigen::MatrixXd trial_u = u;

  auto eval_at = [&](const Eigen::VectorXd& xt, double* bare_out,
                     Eigen::MatrixXd* grad_out) {
    unpack(xt, trial_u);
    return as.energy(trial_u, bare_out, grad_out);
  };

  // Near the minimum the true energy decrease sinks below the rounding
  // noise of the quadrature sum; accepting steps within that noise lets
  // the quasi-Newton direction keep contracting the gradient.
  const double rounding_slack = 4.0 * std::numeric_limits<double>::epsilon();
  auto armijo_ok = [&](double f_new, double f_old, double t, double slope) {
    return f_new <= f_old + so.armijo_c * t * slope +
                        rounding_slack * (1.0 + std::abs(f_old));
  };

  int it = 0;
  int completed = 0;
  for (it = 1; it <= so.max_iters; ++it) {
    const double ginf = gx.lpNorm<Eigen::Infinity>();
    if (ginf <= so.grad_tol) {
      rep.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd dir = -gx;
    if (!hist.empty()) {
      std::vector<double> alpha(hist.size());
      for (int k = static_cast<int>(hist.size()) - 1; k >= 0; --k) {
        const auto& [s, y] = hist[k];
        alpha[k] = s.dot(dir) / s.dot(y);
        dir -= alpha[k] * y;
      }
      const auto& [sl, yl] = hist.back();
      dir *= sl.dot(yl) / yl.squaredNorm();
      for (size_t k = 0; k < hist.size(); ++k) {
        const auto& [s, y] = hist[k];
        const double beta = y.dot(dir) / s.dot(y);
        dir += (alpha[k] - beta) * s;
      }
    }
    double slope = dir.dot(gx);
    if (slope > -1e-14 * dir.norm() * gx.norm()) {
      dir = -gx;
      slope = dir.dot(gx);
    }

    double t = hist.empty() ? std::min(1.0, 1.0 / std::max(1.0, ginf)) : 1.0;
    bool accepted = false;
    double fn = 0.0, bn = 0.0;
    Eigen::VectorXd xn;
    for (int ls = 0; ls < 48; ++ls) {
      xn = x + t * dir;
      fn = eval_at(xn, &bn, nullptr);
      if (armijo_ok(fn, fx, t, slope)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted && !hist.empty()) {
      dir = -gx;
      slope = dir.dot(gx);
      t = std::min(1.0, 1.0 / std::max(1.0, ginf));
      for (int ls = 0; ls < 60; ++ls) {
        xn = x + t * dir;
        fn = eval_at(xn, &bn, nullptr);
        if (armijo_ok(fn, fx, t, slope)) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
    }
    if (!accepted) break;  // line search stalled at rounding level

    fn = eval_at(xn, &bn, &grad_full);
    Eigen::VectorXd gn = pack(grad_full);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - gx;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      hist.emplace_back(s, y);
      while (static_cast<int>(hist.size()) > std::max(1, so.lbfgs_memory))
        hist.pop_front();
    }
    x = xn;
    fx = fn;
    bare = bn;
    gx = std::move(gn);
    ++completed;
    rep.trajectory.push_back({it, fx, bare});
  }
  if (!rep.converged && gx.lpNorm<Eigen::Infinity>() <= so.grad_tol)
    rep.converged = true;

  unpack(x, u);
  rep.minimizer = initial;
  rep.minimizer.values = u;
  for (int node : g.boundary_nodes())
    rep.minimizer.values.row(node) = problem.datum.values.row(node);
  rep.final_grad_norm = gx.lpNorm<Eigen::Infinity>();
  rep.iterations = completed;
  rep.el_residual = el_residual(problem, rep.minimizer);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SolveReport minimize_stabilized(const Problem& problem) {
  return minimize_stabilized(problem, perturbed_start(problem));
}

EkelandReport ekeland_certificate(const Problem& problem, const GridField& v,
                                  double eps_level, int trials, uint64_t seed) {
  check_problem(problem);
  if (eps_level < 0.0) throw std::invalid_argument("eps_level must be >= 0");
  const Grid& g = *problem.grid;
  const double fv = stabilized_energy(problem, v);
  const double sqrt_eps = std::sqrt(eps_level);

  EkelandReport rep;
  const double slack = 1e-10 * (1.0 + std::abs(fv));
  rep.certified = true;
  rep.worst_violation = -std::numeric_limits<double>::infinity();

  auto consider = [&](const GridField& w, const std::string& what) {
    GridField diff = w;
    diff.values -= v.values;
    const double dist = lp_norm(diff, 1.0);
    const double fw = stabilized_energy(problem, w);
    const double violation = fv - fw - sqrt_eps * dist;
    ++rep.competitors;
    if (violation > rep.worst_violation) {
      rep.worst_violation = violation;
      rep.worst_competitor = what;
    }
    if (violation > slack) rep.certified = false;
  };

  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    GridField w = v;
    w.values += t * (problem.datum.values - v.values);
    consider(w, "segment t=" + std::to_string(t));
  }

  for (double rho_steps : {2.0, 4.0}) {
    const double rho = rho_steps * g.h();
    if (rho > 0.49) continue;
    GridField vm = mollify(v, rho);
    for (double t : {0.5, 1.0}) {
      GridField w = v;
      for (int node : g.interior_nodes())
        if (vm.support[node])
          w.values.row(node) += t * (vm.values.row(node) - w.values.row(node));
      char what[64];
      std::snprintf(what, sizeof what, "mollified blend rho=%gh t=%g",
                    rho_steps, t);
      consider(w, what);
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> freq(1, 4);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double scale = 0.05 * (1.0 + lp_norm(v, 0.0));
  const int bumps = std::max(0, trials - rep.competitors);
  for (int b = 0; b < bumps; ++b) {
    const int k1 = freq(rng), k2 = freq(rng), k3 = freq(rng), k4 = freq(rng);
    const double a0 = unit(rng) * scale, a1 = unit(rng) * scale;
    GridField w = v;
    for (int node : g.interior_nodes()) {
      const Eigen::Vector2d x = g.pos(node);
      w.values(node, 0) +=
          a0 * std::sin(M_PI * k1 * x[0]) * std::sin(M_PI * k2 * x[1]);
      w.values(node, 1) +=
          a1 * std::sin(M_PI * k3 * x[0]) * std::sin(M_PI * k4 * x[1]);
    }
    consider(w, "random bump #" + std::to_string(b));
  }
  return rep;
}

CaccioppoliReport caccioppoli_ratio(const GridField& u, double p_growth,
                                    const std::vector<Eigen::Vector2d>& centers,
                                    const std::vector<double>& radii) {
  if (centers.empty() || radii.empty())
    throw std::invalid_argument("need at least one center and one radius");
  const Grid& g = *u.grid;
  const auto eps_op = make_builtin(Builtin::SymmetricGradient, 2);
  const GridField e = apply(eps_op, u, FdScheme::Central);

  CaccioppoliReport rep;
  for (const Eigen::Vector2d& center : centers)
    for (double radius : radii) {
      CaccioppoliRow row;
      row.center = center;
      row.radius = radius;

      BoolArray inner = ball_region(g, center, radius);
      double num_mass = 0.0, num = 0.0;
      for (int node : g.active_nodes()) {
        if (!inner[node] || !e.support[node]) continue;
        const double w = g.weight(node);
        num_mass += w;
        num += w * std::pow(e.at(node).norm(), p_growth);
      }
      row.numerator = num_mass > 0 ? num / num_mass : 0.0;

      BoolArray outer = ball_region(g, center, 2.0 * radius);
      const RigidFit fit = rigid_project(u, outer);
      double den_mass = 0.0, den = 0.0;
      for (int node : g.active_nodes()) {
        if (!outer[node]) continue;
        const double w = g.weight(node);
        den_mass += w;
        den += w * std::pow(fit.residual.at(node).norm() / radius, p_growth);
      }
      row.denominator = den_mass > 0 ? den / den_mass : 0.0;
      row.degenerate = row.denominator < 1e-14;
      row.ratio = row.degenerate ? 0.0 : row.numerator / row.denominator;
      rep.any_degenerate = rep.any_degenerate || row.degenerate;
      if (!row.degenerate) rep.max_ratio = std::max(rep.max_ratio, row.ratio);
      rep.rows.push_back(row);
    }
  return rep;
}

NikolskiiReport nikolskii_quotient(const GridField& u, double mu, double theta,
                                   const std::vector<int>& h_steps,
                                   double margin, double inner0, double inner1) {
  const Grid& g = *u.grid;
  if (g.domain() != Domain::UnitSquare)
    throw std::invalid_argument("difference quotients use the unit square");
  const auto eps_op = make_builtin(Builtin::SymmetricGradient, 2);
  const GridField e = apply(eps_op, u, FdScheme::Central);

  auto rise = [](double x, double a, double b) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double t = (x - a) / (b - a);
    return t * t * (3.0 - 2.0 * t);
  };
  auto axis = [&](double x) {
    return rise(x, margin, inner0) * rise(1.0 - x, margin, 1.0 - inner1);
  };

  NikolskiiReport rep;
  for (int steps : h_steps) {
    if (steps < 1) throw std::invalid_argument("h_steps must be positive");
    NikolskiiPoint pt;
    pt.h_steps = steps;
    pt.h = steps * g.h();
    double q = 0.0;
    for (int s = 0; s < 2; ++s) {
      const GridField tau = finite_difference(e, s, steps, FdKind::TauPlus);
      for (int node : g.active_nodes()) {
        if (!tau.support[node] || !e.support[node]) continue;
        const Eigen::Vector2d x = g.pos(node);
        const double rho = axis(x[0]) * axis(x[1]);
        if (rho == 0.0) continue;
        const double wgt = std::pow(1.0 + e.at(node).norm(), -mu);
        q += rho * rho * tau.at(node).squaredNorm() * wgt * g.weight(node);
      }
    }
    pt.quotient = q / std::pow(pt.h, 2.0 * theta);
    rep.series.push_back(pt);
  }

  double qmin = rep.series.front().quotient, qmax = qmin;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : rep.series) {
    qmin = std::min(qmin, pt.quotient);
    qmax = std::max(qmax, pt.quotient);
    const double lx = std::log(pt.h), ly = std::log(std::max(pt.quotient, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(rep.series.size());
  rep.max_over_min = qmin > 0 ? qmax / qmin : std::numeric_limits<double>::infinity();
  const double denom = n * sxx - sx * sx;
  rep.loglog_slope = std::abs(denom) > 1e-300 ? (n * sxy - sx * sy) / denom : 0.0;
  return rep;
}

ExcessReport excess_scan(const GridField& u, const Integrand& f,
                         const std::vector<Eigen::Vector2d>& centers,
                         const std::vector<double>& radii,
                         double excess_threshold, double hessian_bound) {
  if (centers.empty() || radii.empty())
    throw std::invalid_argument("need at least one center and one radius");
  if (f.dim != 3)
    throw std::invalid_argument("integrand must act on symmetric 2x2 coordinates");
  const Grid& g = *u.grid;
  const auto eps_op = make_builtin(Builtin::SymmetricGradient, 2);
  const GridField e = apply(eps_op, u, FdScheme::Central);

  ExcessReport rep;
  int regular = 0;
  for (const Eigen::Vector2d& center : centers)
    for (double radius : radii) {
      ExcessRow row;
      row.center = center;
      row.radius = radius;

      BoolArray ball = ball_region(g, center, radius);
      for (int node = 0; node < g.num_nodes(); ++node)
        if (ball[node] && !e.support[node]) ball[node] = false;
      const Eigen::VectorXd mean = region_mean(e, ball);
      double mass = 0.0, acc = 0.0;
      for (int node : g.active_nodes()) {
        if (!ball[node]) continue;
        const double w = g.weight(node);
        mass += w;
        acc += w * (e.at(node) - mean).norm();
      }
      row.excess = mass > 0 ? acc / mass : 0.0;

      // Hessian at the mean by polarization of the quadratic form.
      Eigen::Matrix3d hess;
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
          Eigen::Vector3d ea = Eigen::Vector3d::Zero(),
                          eb = Eigen::Vector3d::Zero();
          ea[a] = 1.0;
          eb[b] = 1.0;
          const double qp = f.hessian_form(mean, ea + eb);
          const double qm = f.hessian_form(mean, ea - eb);
          hess(a, b) = hess(b, a) = 0.25 * (qp - qm);
        }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hess);
      row.hessian_min = es.eigenvalues().minCoeff();
      row.predicted_regular =
          row.excess <= excess_threshold && row.hessian_min >= hessian_bound;
      if (row.predicted_regular) ++regular;
      rep.rows.push_back(row);
    }
  rep.regular_fraction =
      rep.rows.empty() ? 0.0 : static_cast<double>(regular) / rep.rows.size();
  return rep;
}

SweepReport viscosity_sweep(const Problem& base, const SweepOptions& opts) {
  check_problem(base);
  SweepReport rep;
  if (opts.deltas.empty()) {
    rep.failure = "no viscosity levels requested";
    return rep;
  }
  std::vector<double> deltas = opts.deltas;
  std::sort(deltas.rbegin(), deltas.rend());

  const Grid& g = *base.grid;
  const int n = g.n();
  const int ix0 = static_cast<int>(std::lround(opts.window0 * (n - 1)));
  const int ix1 = static_cast<int>(std::lround(opts.window1 * (n - 1)));
  const auto eps_op = make_builtin(Builtin::SymmetricGradient, 2);

  GridField warm = base.datum;
  bool have_warm = false;
  for (size_t k = 0; k < deltas.size(); ++k) {
    Problem pb = base;
    pb.stab.kind = Stabilization::Kind::Viscosity;
    pb.stab.delta = deltas[k];

    SolveReport sol = have_warm ? minimize_stabilized(pb, warm)
                                : minimize_stabilized(pb);
    if (!sol.converged) {
      char msg[96];
      std::snprintf(msg, sizeof msg,
                    "solver did not reach tolerance at delta=%g", deltas[k]);
      rep.failure = msg;
      return rep;
    }
    warm = sol.minimizer;
    have_warm = true;

    SweepRow row;
    row.delta = deltas[k];
    row.energy = bare_energy(pb, sol.minimizer);
    row.stabilized_energy = stabilized_energy(pb, sol.minimizer);
    const GridField e = apply(eps_op, sol.minimizer, FdScheme::Central);
    row.l1_eps = lp_norm(e, 1.0);
    for (double q : opts.q_norms) row.lq_eps.push_back(lp_norm(e, q));
    row.bmo = bmo_seminorm(sol.minimizer, ix0, ix1, ix0, ix1, opts.bmo_depth);
    row.sup_u = lp_norm(sol.minimizer, 0.0);
    row.el_res = sol.el_residual;
    // Gap estimate F_delta[u] - inf F_delta from strong convexity: the
    // viscosity term alone gives curvature >= delta h^2 pi^2 on the
    // pinned class, so the gap is at most |g|_2^2 / (2 kappa).
    const double m2 = 2.0 * static_cast<double>(g.interior_nodes().size());
    const double g2 = sol.final_grad_norm * std::sqrt(m2);
    const double kappa = deltas[k] * g.h() * g.h() * M_PI * M_PI;
    row.eps_level = std::min(1.0, std::max(1e-12, g2 * g2 / (2.0 * kappa)));
    const EkelandReport ek = ekeland_certificate(
        pb, sol.minimizer, row.eps_level, opts.ekeland_trials, opts.seed + k);
    row.ekeland_certified = ek.certified;
    rep.rows.push_back(row);
  }

  rep.energies_nonincreasing = true;
  for (size_t k = 1; k < rep.rows.size(); ++k) {
    const double slack = 1e-9 * (1.0 + std::abs(rep.rows[k - 1].energy));
    if (rep.rows[k].energy > rep.rows[k - 1].energy + slack)
      rep.energies_nonincreasing = false;
  }
  double lmin = rep.rows.front().l1_eps, lmax = lmin;
  for (const auto& r : rep.rows) {
    lmin = std::min(lmin, r.l1_eps);
    lmax = std::max(lmax, r.l1_eps);
  }
  rep.l1_max_over_min = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  rep.l1_within_factor = rep.l1_max_over_min <= opts.l1_factor;
  rep.completed = true;
  return rep;
}

}  // namespace epslab
