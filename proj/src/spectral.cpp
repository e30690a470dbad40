#include "epslab/spectral.hpp"

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <random>

namespace epslab {

namespace {

using CMat = Eigen::MatrixXcd;
using std::complex;

constexpr complex<double> kI{0.0, 1.0};

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

// Layout: mat(iy, ix) for nodal data, mat(ky, kx) for mode data.
CMat to_mat(const TorusField& u, int comp) {
  const int n = u.n;
  CMat m(n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      m(iy, ix) = u.values(iy * n + ix, comp);
  return m;
}

void fft2_inplace(CMat& m, bool inverse) {
  auto& fft = fft_engine();
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXcd buf(n), out(n);
  for (int c = 0; c < n; ++c) {
    buf = m.col(c);
    if (inverse) fft.inv(out, buf); else fft.fwd(out, buf);
    m.col(c) = out;
  }
  for (int r = 0; r < n; ++r) {
    buf = m.row(r).transpose();
    if (inverse) fft.inv(out, buf); else fft.fwd(out, buf);
    m.row(r) = out.transpose();
  }
}

std::vector<CMat> field_hats(const TorusField& u) {
  std::vector<CMat> hats;
  hats.reserve(u.dim());
  for (int c = 0; c < u.dim(); ++c) {
    CMat m = to_mat(u, c);
    fft2_inplace(m, false);
    hats.push_back(std::move(m));
  }
  return hats;
}

void store_real(TorusField& u, int comp, CMat hat) {
  fft2_inplace(hat, true);
  const int n = u.n;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      u.values(iy * n + ix, comp) = hat(iy, ix).real();
}

// Signed integer frequencies with the (unusable) Nyquist row masked out.
struct ModeGrids {
  Eigen::MatrixXd kx, ky;

  explicit ModeGrids(int n) : kx(n, n), ky(n, n) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const bool nyq = (n % 2 == 0) && (r == n / 2 || c == n / 2);
        kx(r, c) = nyq ? 0.0 : (c <= n / 2 ? c : c - n);
        ky(r, c) = nyq ? 0.0 : (r <= n / 2 ? r : r - n);
      }
  }
};

const ModeGrids& mode_grids(int n) {
  thread_local std::unique_ptr<ModeGrids> cache;
  thread_local int cached_n = -1;
  if (cached_n != n) {
    cache = std::make_unique<ModeGrids>(n);
    cached_n = n;
  }
  return *cache;
}

}  // namespace

TorusField torus_zero(int n, int dim) {
  TorusField u;
  u.n = n;
  u.values = Eigen::MatrixXd::Zero(n * n, dim);
  return u;
}

void project_zero_mean(TorusField& u) {
  for (int c = 0; c < u.dim(); ++c)
    u.values.col(c).array() -= u.values.col(c).mean();
}

double torus_lp_norm(const TorusField& u, double p) {
  const Eigen::VectorXd node_norms = u.values.rowwise().norm();
  if (p <= 0.0 || !std::isfinite(p)) return node_norms.maxCoeff();
  const double mean = node_norms.array().pow(p).mean();
  return std::pow(mean, 1.0 / p);
}

TorusField spectral_apply(const FirstOrderOperator& op, const TorusField& u) {
  if (op.n != 2) throw std::invalid_argument("torus fields are two-dimensional");
  if (u.dim() != op.dim_v) throw std::invalid_argument("component mismatch");
  const int n = u.n;
  const auto& modes = mode_grids(n);
  const auto hats = field_hats(u);

  TorusField w = torus_zero(n, op.dim_w);
  const complex<double> factor = 2.0 * M_PI * kI;
  for (int c = 0; c < op.dim_w; ++c) {
    CMat acc = CMat::Zero(n, n);
    for (int v = 0; v < op.dim_v; ++v) {
      const double a0 = op.coeffs[0](c, v), a1 = op.coeffs[1](c, v);
      if (a0 == 0.0 && a1 == 0.0) continue;
      acc.array() += (a0 * modes.kx + a1 * modes.ky).array() * hats[v].array();
    }
    store_real(w, c, factor * acc);
  }
  return w;
}

TorusField spectral_apply_adjoint(const FirstOrderOperator& op,
                                  const TorusField& w) {
  if (w.dim() != op.dim_w) throw std::invalid_argument("component mismatch");
  const int n = w.n;
  const auto& modes = mode_grids(n);
  const auto hats = field_hats(w);

  TorusField u = torus_zero(n, op.dim_v);
  const complex<double> factor = -2.0 * M_PI * kI;
  for (int v = 0; v < op.dim_v; ++v) {
    CMat acc = CMat::Zero(n, n);
    for (int c = 0; c < op.dim_w; ++c) {
      const double a0 = op.coeffs[0](c, v), a1 = op.coeffs[1](c, v);
      if (a0 == 0.0 && a1 == 0.0) continue;
      acc.array() += (a0 * modes.kx + a1 * modes.ky).array() * hats[c].array();
    }
    store_real(u, v, factor * acc);
  }
  return u;
}

TorusField recover(const FirstOrderOperator& op, const TorusField& g,
                   double ellipticity_tol) {
  if (g.dim() != op.dim_w) throw std::invalid_argument("component mismatch");
  const auto rep = ellipticity_margin(op, 128, 30);
  if (!rep.elliptic || rep.min_singular_value <= ellipticity_tol)
    throw std::domain_error("recovery needs an elliptic operator");
  for (int c = 0; c < g.dim(); ++c)
    if (std::abs(g.values.col(c).mean()) > 1e-10 * (1.0 + g.values.col(c).norm()))
      throw std::invalid_argument("datum must have zero mean");

  const int n = g.n;
  const auto& modes = mode_grids(n);
  auto hats = field_hats(g);

  TorusField u = torus_zero(n, op.dim_v);
  std::vector<CMat> uhat(op.dim_v, CMat::Zero(n, n));
  Eigen::MatrixXd a(op.dim_w, op.dim_v);
  Eigen::VectorXd re(op.dim_w), im(op.dim_w);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double skx = modes.kx(r, c), sky = modes.ky(r, c);
      if (skx == 0.0 && sky == 0.0) continue;
      a = skx * op.coeffs[0] + sky * op.coeffs[1];
      for (int j = 0; j < op.dim_w; ++j) {
        re[j] = hats[j](r, c).real();
        im[j] = hats[j](r, c).imag();
      }
      const Eigen::MatrixXd gram = a.transpose() * a;
      const auto solver = gram.ldlt();
      const Eigen::VectorXd yre = solver.solve(a.transpose() * re);
      const Eigen::VectorXd yim = solver.solve(a.transpose() * im);
      // Divide by 2 pi i: (re + i im) / (2 pi i) = (im - i re) / (2 pi).
      for (int v = 0; v < op.dim_v; ++v)
        uhat[v](r, c) = complex<double>(yim[v], -yre[v]) / (2.0 * M_PI);
    }
  for (int v = 0; v < op.dim_v; ++v) store_real(u, v, std::move(uhat[v]));
  return u;
}

double korn_ratio(const FirstOrderOperator& op, const TorusField& u, double p) {
  const auto grad = make_builtin(Builtin::Gradient, 2);
  const double num = torus_lp_norm(spectral_apply(grad, u), p);
  const double den = torus_lp_norm(spectral_apply(op, u), p);
  if (den <= 1e-300 || den < num * 1e-12)
    throw std::domain_error("operator image vanishes: ratio is unbounded");
  return num / den;
}

TorusField band_limit(const TorusField& u, int band) {
  const int n = u.n;
  const auto& modes = mode_grids(n);
  auto hats = field_hats(u);
  TorusField out = torus_zero(n, u.dim());
  for (int c = 0; c < u.dim(); ++c) {
    for (int r = 0; r < n; ++r)
      for (int col = 0; col < n; ++col) {
        const double kx = modes.kx(r, col), ky = modes.ky(r, col);
        const bool keep = std::max(std::abs(kx), std::abs(ky)) <= band &&
                          !(kx == 0.0 && ky == 0.0);
        // Nyquist rows carry kx = ky = 0 in the mode grids; drop them too.
        const bool nyq = (n % 2 == 0) && (r == n / 2 || col == n / 2);
        if (!keep || nyq) hats[c](r, col) = 0.0;
      }
    store_real(out, c, std::move(hats[c]));
  }
  return out;
}

TorusField upsample(const TorusField& u, int new_n) {
  const int n = u.n;
  if (new_n < n) throw std::invalid_argument("upsample cannot shrink the grid");
  if (new_n == n) return u;
  auto hats = field_hats(u);
  TorusField out = torus_zero(new_n, u.dim());
  const double scale = static_cast<double>(new_n) * new_n / (static_cast<double>(n) * n);
  for (int c = 0; c < u.dim(); ++c) {
    CMat big = CMat::Zero(new_n, new_n);
    for (int r = 0; r < n; ++r)
      for (int col = 0; col < n; ++col) {
        if ((n % 2 == 0) && (r == n / 2 || col == n / 2)) continue;
        const int sky = r <= n / 2 ? r : r - n;
        const int skx = col <= n / 2 ? col : col - n;
        const int nr = sky >= 0 ? sky : sky + new_n;
        const int nc = skx >= 0 ? skx : skx + new_n;
        big(nr, nc) = scale * hats[c](r, col);
      }
    store_real(out, c, std::move(big));
  }
  return out;
}

namespace {

// Shared evaluation for the ratio ascent.  P(k) entries of the two
// operators are affine in k, so images and adjoints are elementwise
// products against precomputed mode grids.
struct RatioAscent {
  const FirstOrderOperator& op;
  FirstOrderOperator grad;
  int n;
  int band;

  struct Eval {
    double objective = 0.0;  // ln of the (smoothed) ratio
    double ratio_l1 = 0.0;
    double ratio_l2 = 0.0;
    TorusField gradient;     // of the objective, band-limited
  };

  RatioAscent(const FirstOrderOperator& o, int n_)
      : op(o), grad(make_builtin(Builtin::Gradient, 2)), n(n_), band(n_ / 4) {}

  Eval eval(const TorusField& u, double kappa, bool l2_objective) const {
    Eval e;
    const TorusField du = spectral_apply(grad, u);
    const TorusField au = spectral_apply(op, u);

    const Eigen::VectorXd nd = du.values.rowwise().norm();
    const Eigen::VectorXd na = au.values.rowwise().norm();
    e.ratio_l1 = nd.mean() / std::max(na.mean(), 1e-300);
    e.ratio_l2 = std::sqrt(nd.squaredNorm() / std::max(na.squaredNorm(), 1e-300));

    TorusField wd = du, wa = au;
    double sd, sa;
    if (l2_objective) {
      sd = nd.squaredNorm() / (n * n);
      sa = na.squaredNorm() / (n * n);
      wd.values *= 2.0;
      wa.values *= 2.0;
    } else {
      const Eigen::VectorXd md = (nd.array().square() + kappa * kappa).sqrt();
      const Eigen::VectorXd ma = (na.array().square() + kappa * kappa).sqrt();
      sd = md.mean();
      sa = ma.mean();
      wd.values.array().colwise() /= md.array();
      wa.values.array().colwise() /= ma.array();
    }
    e.objective = std::log(sd) - std::log(sa);

    TorusField g = spectral_apply_adjoint(grad, wd);
    const TorusField ga = spectral_apply_adjoint(op, wa);
    g.values = g.values / sd - ga.values / sa;
    e.gradient = band_limit(g, band);
    return e;
  }
};

TorusField random_band_field(int n, int band, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TorusField u = torus_zero(n, 2);
  for (int i = 0; i < u.values.rows(); ++i)
    for (int c = 0; c < 2; ++c) u.values(i, c) = gauss(rng);
  u = band_limit(u, band);
  const double nrm = torus_lp_norm(u, 2.0);
  if (nrm > 0) u.values /= nrm;
  return u;
}

// Rotated stream field of two crossed diagonal wave packets: a
// triangular-spectrum profile along x1 + x2 plus the same along
// x1 - x2.  Its symmetrized gradient nearly cancels while the full
// gradient does not, which makes it a strong ascent seed.
TorusField diagonal_wave_field(int n, int band) {
  TorusField u = torus_zero(n, 2);
  std::vector<CMat> uhat(2, CMat::Zero(n, n));
  const double nn = static_cast<double>(n) * n;
  for (int j = -band; j <= band; ++j) {
    if (j == 0) continue;
    const double cj = (1.0 - std::abs(j) / (band + 1.0)) * nn;
    const complex<double> f = 2.0 * M_PI * kI * static_cast<double>(j) * cj;
    const int rj = j >= 0 ? j : j + n;     // row index for frequency j
    const int rmj = -j >= 0 ? -j : -j + n; // and for -j
    // Mode (j, j) of psi(x1 + x2): u_hat = 2 pi i j (1, -1) psi_hat.
    uhat[0](rj, rj) += f;
    uhat[1](rj, rj) -= f;
    // Mode (j, -j) of psi(x1 - x2): u_hat = 2 pi i j (-1, -1) psi_hat.
    uhat[0](rmj, rj) -= f;
    uhat[1](rmj, rj) -= f;
  }
  for (int c = 0; c < 2; ++c) store_real(u, c, std::move(uhat[c]));
  const double nrm = torus_lp_norm(u, 2.0);
  if (nrm > 0) u.values /= nrm;
  return u;
}

}  // namespace

OrnsteinResult ornstein_search(const FirstOrderOperator& op,
                               const OrnsteinOptions& opts) {
  if (op.n != 2) throw std::invalid_argument("search runs on the 2D torus");
  OrnsteinResult res;
  {
    const auto grad2 = make_builtin(Builtin::Gradient, 2);
    res.vacuous = kk_reduction(op, grad2).exists;
  }

  int iteration = 0;
  auto record = [&](double ratio, int n) {
    if (ratio > res.best_ratio) res.best_ratio = ratio;
    res.trace.push_back({iteration, res.best_ratio, n});
    ++iteration;
  };

  for (size_t stage = 0; stage < opts.resolutions.size(); ++stage) {
    const int n = opts.resolutions[stage];
    if (n < 8 || n % 4 != 0)
      throw std::invalid_argument("resolution must be a multiple of 4, at least 8");
    RatioAscent ascent(op, n);

    auto run = [&](TorusField u, int iters, bool l2_objective,
                   double* bound_out) {
      double kappa = opts.kappa_start;
      double step = 0.5;
      auto cur = ascent.eval(u, kappa, l2_objective);
      if (bound_out) *bound_out = std::max(*bound_out, cur.ratio_l2);
      if (!l2_objective && cur.ratio_l1 > res.best_ratio) res.best_field = u;
      for (int it = 0; it < iters; ++it) {
        if (!l2_objective) {
          record(cur.ratio_l1, n);
          if (bound_out) *bound_out = std::max(*bound_out, cur.ratio_l2);
        }
        bool accepted = false;
        while (step > 1e-14) {
          TorusField cand = u;
          cand.values += step * cur.gradient.values;
          cand = band_limit(cand, ascent.band);
          const double nrm = torus_lp_norm(cand, 2.0);
          if (nrm > 0) cand.values /= nrm;
          const auto ev = ascent.eval(cand, kappa, l2_objective);
          if (ev.objective > cur.objective + 1e-15) {
            u = std::move(cand);
            if (!l2_objective && ev.ratio_l1 > res.best_ratio) res.best_field = u;
            cur = ev;
            step *= 1.4;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) {
          if (l2_objective) break;
          if (kappa <= opts.kappa_min * (1.0 + 1e-12)) break;
          kappa = std::max(opts.kappa_min, kappa * 0.25);
          step = std::max(step, 1e-4);
          cur = ascent.eval(u, kappa, l2_objective);
        }
      }
      if (!l2_objective) record(cur.ratio_l1, n);
      if (bound_out) *bound_out = std::max(*bound_out, cur.ratio_l2);
      return u;
    };

    TorusField start;
    if (stage == 0) {
      // Phase one: the best L^2 field, by ascent of the smooth ratio.
      TorusField seed = random_band_field(n, ascent.band, opts.seed);
      start = run(std::move(seed), std::min(200, opts.budget / 10), true,
                  &res.p2_bound);
    } else {
      start = upsample(res.best_field, n);
      start = band_limit(start, ascent.band);
    }

    // Later stages only refine the upsampled best field; the stated
    // iteration budget belongs to the first resolution.
    const int main_iters =
        stage == 0 ? opts.budget / 2 : std::max(200, opts.budget / 10);
    run(std::move(start), main_iters, false, &res.p2_bound);

    if (stage == 0 && !res.vacuous) {
      run(diagonal_wave_field(n, ascent.band), (opts.budget * 5) / 20, false,
          nullptr);
      run(random_band_field(n, ascent.band, opts.seed + 1),
          (opts.budget * 4) / 20, false, nullptr);
    }
  }
  res.exceeded_p2_bound = res.best_ratio > res.p2_bound;
  return res;
}

}  // namespace epslab
