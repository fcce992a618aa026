#include "acceptance.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "floq/eigs.hpp"
#include "floq/liouville.hpp"

namespace floq::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& msg) {
    if (!cond) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << msg;
    }
  }
};

GradedPolynomial quadratic_form(const Mat& q) {
  const int n = static_cast<int>(q.rows());
  GradedPolynomial p(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      MultiIndex alpha(n, 0);
      alpha[i] += 1;
      alpha[j] += 1;
      double coeff = (i == j) ? q(i, i) : 2.0 * q(i, j);
      if (coeff != 0.0) p.set(alpha, coeff);
    }
  return p;
}

double mathieu_ground(int mf) {
  auto mat = preset_operator("mathieu");
  Spectrum sp = dense_spectrum(assemble_shifted(mat, CVec::Zero(1), mf).matrix);
  double best = sp.values[0].real();
  for (int i = 1; i < sp.values.size(); ++i) best = std::min(best, sp.values[i].real());
  return best;
}

void criterion1(Check& c) {
  for (int n = 1; n <= 3; ++n) {
    GradedPolynomial quad(n);
    for (int i = 0; i < n; ++i) {
      MultiIndex a(n, 0);
      a[i] = 2;
      quad.set(a, 1.0);
    }
    GradedPolynomial lin(n);
    MultiIndex e0(n, 0);
    e0[0] = 1;
    lin.set(e0, 1.0);
    if (n > 1) {
      MultiIndex e1(n, 0);
      e1[n - 1] = 1;
      lin.set(e1, 0.5);
    }
    for (int N = 0; N <= 6; ++N) {
      long long kq = qharmonic_dim(quad, N);
      long long kl = qharmonic_dim(lin, N);
      c.require(kq == h_dim(n, N), "quadratic kernel dim " + std::to_string(kq) + " != h_dim(" +
                                       std::to_string(n) + "," + std::to_string(N) + ")");
      c.require(kl == q_dim(n - 1, N), "linear kernel dim " + std::to_string(kl) + " != q_dim(" +
                                           std::to_string(n - 1) + "," + std::to_string(N) + ")");
    }
  }
}

void criterion2(Check& c, unsigned seed) {
  auto lap = preset_operator("laplacian2d");
  const int mf = 4;  // exact for constant coefficients
  LambdaFunction lf(lap, mf);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    Vec xi(2);
    xi[0] = 3.0 * unif(rng);
    xi[1] = 3.0 * unif(rng);
    if (xi.norm() > 3.0) xi *= 3.0 / xi.norm();
    worst = std::max(worst, std::abs(lf.lambda(xi) + xi.squaredNorm()));
  }
  c.require(worst <= 1e-9, "Lambda(xi)+|xi|^2 off by " + std::to_string(worst));

  double worst_band = 0.0;
  for (int s = 0; s < 12; ++s) {
    Vec k(2);
    k[0] = (kTwoPi / 2.0) * unif(rng);
    k[1] = (kTwoPi / 2.0) * unif(rng);
    Spectrum sp = dense_spectrum(assemble_shifted(lap, k.cast<Complex>(), mf).matrix);
    double lo = sp.values[0].real();
    for (int i = 1; i < sp.values.size(); ++i) lo = std::min(lo, sp.values[i].real());
    worst_band = std::max(worst_band, std::abs(lo - k.squaredNorm()));
  }
  c.require(worst_band <= 1e-9, "lambda_1(k)-|k|^2 off by " + std::to_string(worst_band));

  LiouvilleReport rep = liouville_dimensions(lap, 2, mf);
  c.require(rep.exact && rep.d_lower.size() == 3 && rep.d_lower[0] == 1 && rep.d_lower[1] == 3 &&
                rep.d_lower[2] == 5,
            "Liouville table is not (1, 3, 5)");
}

void criterion3(Check& c) {
  auto mat = preset_operator("mathieu");
  const int mf = 32;
  // Band scan: unique minimum of band 1 at k = 0, strict gap to band 2.
  std::vector<Vec> grid = serpentine_grid(1, 257);
  BandStructure bs = compute_bands(mat, grid, 2, mf);
  int argmin = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (size_t p = 0; p < grid.size(); ++p) {
    if (bs.bands[p][0].real() < bs.bands[argmin][0].real()) argmin = static_cast<int>(p);
    gap = std::min(gap, bs.bands[p][1].real() - bs.bands[p][0].real());
  }
  c.require(std::abs(grid[argmin][0]) <= 2.0 * kTwoPi / 256.0,
            "grid minimum not at k = 0 (found " + std::to_string(grid[argmin][0]) + ")");
  c.require(gap > 0.1, "gap to band 2 is " + std::to_string(gap));
  for (size_t p = 0; p < grid.size(); ++p)
    if (std::abs(grid[p][0] - grid[argmin][0]) > 0.5)
      c.require(bs.bands[p][0].real() > bs.bands[argmin][0].real() + 1e-6,
                "minimum is not unique");

  double ground = mathieu_ground(mf);
  auto shifted = mat.shifted(-ground);
  FermiPointSet fp = real_fermi_points(shifted, 0.0, 16);
  c.require(fp.points.size() == 1 && std::abs(fp.points[0][0]) <= 1e-4,
            "refined minimum not within 1e-4 of 0");
  BandTaylor taylor = band_taylor(shifted, fp.points[0], 4, Complex(0.0), 16);
  c.require(taylor.leading_order == 2, "leading order is " + std::to_string(taylor.leading_order));
  MultiIndex two{2};
  c.require(taylor.terms[2].coeff(two).real() > 0.1, "second derivative not positive");
  LiouvilleReport rep = liouville_dimensions(shifted, 3, 16);
  c.require(rep.exact, "Mathieu report not exact");
  for (int N = 1; N <= 3; ++N)
    c.require(rep.d_lower[N] == 2, "d_" + std::to_string(N) + " = " +
                                       std::to_string(rep.d_lower[N]) + " (expected 2)");
}

void criterion4(Check& c) {
  auto divf = preset_operator("sin_divform");
  CellSolution cell = solve_cell(divf);
  double q = cell.q_hom(0, 0);
  c.require(std::abs(q - std::sqrt(3.0)) <= 1e-6,
            "Q_hom = " + std::to_string(q) + " != sqrt(3)");
  TwoScale ts = two_scale_correctors(divf, cell, 2);
  double m2 = ts.m2_matrix(1)(0, 0);
  c.require(std::abs(m2 - q) <= 1e-6, "two-scale M2 = " + std::to_string(m2) + " != Q_hom");
}

void criterion5(Check& c) {
  auto lap = preset_operator("laplacian2d");
  LambdaFunction lf_lap(lap, 4);
  XiLevelSet level_lap = maximize_lambda(lf_lap);
  HomogHessianLink base = hessian_homogenization(lap, lf_lap, level_lap, 4);
  c.require(base.rel_err <= 1e-6, "baseline proportionality defect " +
                                      std::to_string(base.rel_err));
  const char* names[2] = {"sin_divform", "checkerboard2d"};
  for (const char* name : names) {
    auto op = preset_operator(name);
    int mf = op.n == 2 ? 8 : 16;
    LambdaFunction lf(op, mf);
    XiLevelSet level = maximize_lambda(lf);
    HomogHessianLink link = hessian_homogenization(op, lf, level, mf);
    double rel = std::abs(link.constant - base.constant) / std::abs(base.constant);
    c.require(rel <= 0.02, std::string(name) + ": calibration constant " +
                               std::to_string(link.constant) + " vs baseline " +
                               std::to_string(base.constant));
    c.require(link.rel_err <= 0.02,
              std::string(name) + ": proportionality defect " + std::to_string(link.rel_err));
  }
}

void criterion6(Check& c) {
  for (const std::string& name : preset_names()) {
    auto op = preset_operator(name);
    int mf = op.n == 2 ? 8 : 16;
    LambdaFunction lf(op, mf);
    XiLevelSet level = maximize_lambda(lf);
    Lambda0Criteria crit = lambda0_criteria(op, lf, level);
    if (crit.c_nonneg && !crit.c_is_zero)
      c.require(level.lambda0 >= -1e-6, name + ": c >= 0 but Lambda0 = " +
                                            std::to_string(level.lambda0));
    if (crit.c_is_zero) {
      bool alpha_zero = crit.alpha.norm() <= 1e-7;
      bool lambda_zero = std::abs(level.lambda0) <= 1e-6;
      c.require(alpha_zero == lambda_zero,
                name + ": alpha norm " + std::to_string(crit.alpha.norm()) +
                    " inconsistent with Lambda0 = " + std::to_string(level.lambda0));
      if (crit.gamma.size() > 0) {
        bool gamma_zero = crit.gamma.norm() <= 1e-6;
        c.require(gamma_zero == lambda_zero, name + ": gamma criterion inconsistent");
      }
    }
    if (name == "drift1d") {
      c.require(std::abs(level.lambda0 - 1.0) <= 1e-6,
                "drift1d Lambda0 = " + std::to_string(level.lambda0));
      c.require(std::abs(level.xi_star[0] - 1.0) <= 1e-4,
                "drift1d xi* = " + std::to_string(level.xi_star[0]));
    }
  }
}

void criterion7(Check& c) {
  auto drift = preset_operator("drift1d");
  LiouvilleReport rd = liouville_dimensions(drift, 4, 16);
  c.require(rd.exact && rd.classification == LiouvilleClass::Finite, "drift1d not Finite/exact");
  for (int N = 0; N <= 4; ++N)
    c.require(rd.d_lower[N] == 1, "drift1d d_" + std::to_string(N) + " != 1");

  auto sh = preset_operator("shifted1d");
  LiouvilleReport rs = liouville_dimensions(sh, 3, 16);
  c.require(rs.classification == LiouvilleClass::Vacuous, "shifted1d not Vacuous");
  for (long long d : rs.d_lower) c.require(d == 0, "shifted1d d_N != 0");

  auto lap = preset_operator("laplacian2d");
  LiouvilleReport rl = liouville_dimensions(lap, 3, 4);
  c.require(rl.exact, "laplacian2d not exact");
  for (int N = 0; N <= 3; ++N)
    c.require(rl.d_lower[N] == h_dim(2, N), "laplacian2d d_" + std::to_string(N) + " = " +
                                                std::to_string(rl.d_lower[N]));
}

void check_solution(Check& c, const PeriodicOperator& op, const PolyGrowthSolution& u,
                    const std::string& label) {
  double res = solution_residual(op, u);
  c.require(res <= 1e-6, label + ": residual " + std::to_string(res));
  c.require(growth_bound_holds(u), label + ": cell growth bound fails");
}

void criterion8(Check& c) {
  const char* alpha_zero_presets[4] = {"laplacian1d", "sin_divform", "laplacian2d",
                                       "checkerboard2d"};
  for (const char* name : alpha_zero_presets) {
    auto op = preset_operator(name);
    int mf = op.n == 2 ? 12 : 16;
    CellSolution cell = solve_cell(op, mf);
    auto basis = linear_growth_basis(op, cell);
    c.require(static_cast<int>(basis.size()) == op.n + 1,
              std::string(name) + ": linear basis size");
    for (size_t i = 0; i < basis.size(); ++i)
      check_solution(c, op, basis[i], std::string(name) + " linear[" + std::to_string(i) + "]");
    if (op.n == 2) {
      Mat cm(2, 2);
      cm << cell.q_hom(1, 1), 0.0, 0.0, -cell.q_hom(0, 0);
      check_solution(c, op, quadratic_solution(op, cell, cm), std::string(name) + " quad-diag");
      Mat co(2, 2);
      co << 0.0, 1.0, 1.0, 0.0;
      if (std::abs((cell.q_hom * co.transpose()).trace()) < 1e-8)
        check_solution(c, op, quadratic_solution(op, cell, co), std::string(name) + " quad-off");
    }
    TwoScale ts = two_scale_correctors(op, cell, 4);
    GradedPolynomial seed(op.n);
    if (op.n == 1) {
      seed.set(MultiIndex{1}, 1.0);
    } else {
      // degree-3 element of the kernel of the homogenized operator
      auto kernel = qharmonic_kernel(quadratic_form(cell.q_hom), 3);
      for (const auto& k : kernel)
        if (k.degree() == 3) {
          seed = k;
          break;
        }
    }
    c.require(seed.degree() >= 1, std::string(name) + ": no Q-harmonic seed found");
    check_solution(c, op, higher_order_solution(op, cell, ts, seed, 4),
                   std::string(name) + " higher-order");
  }

  auto drift = preset_operator("drift1d");
  CellSolution dcell = solve_cell(drift);
  auto dbasis = linear_growth_basis(drift, dcell);
  c.require(dbasis.size() == 1, "drift1d linear basis size");
  check_solution(c, drift, dbasis[0], "drift1d constant");
}

void criterion9(Check& c, unsigned seed) {
  std::mt19937 rng(seed + 9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int n = 1; n <= 2; ++n) {
    CellFunction f;
    MultiIndex g(n, -2);
    while (true) {
      Field fg(n, 9);
      for (int i = 0; i < fg.npoints(); ++i) fg.at(i) = Complex(unif(rng), unif(rng));
      fg.refresh();
      f.cells.emplace(g, fg);
      int d = 0;
      while (d < n && ++g[d] > 2) {
        g[d] = -2;
        ++d;
      }
      if (d == n) break;
    }
    auto uf = floquet_transform(f, n, 7);
    double defect = parseval_defect(f, uf);
    c.require(defect <= 1e-10, "Parseval defect " + std::to_string(defect));
    CellFunction back = floquet_inverse(uf, 2);
    double worst = 0.0;
    for (const auto& [gamma, fg] : f.cells) {
      auto it = back.cells.find(gamma);
      if (it == back.cells.end()) {
        worst = 1.0;
        break;
      }
      for (int i = 0; i < fg.npoints(); ++i)
        worst = std::max(worst, std::abs(fg.at(i) - it->second.at(i)));
    }
    c.require(worst <= 1e-10, "round trip error " + std::to_string(worst));
  }

  for (const std::string& name : preset_names()) {
    auto op = preset_operator(name);
    int mf = op.n == 2 ? 8 : 12;
    std::vector<Vec> ks;
    for (int s = 0; s < 2; ++s) {
      Vec k(op.n);
      for (int d = 0; d < op.n; ++d) k[d] = (kTwoPi / 2.0) * unif(rng);
      ks.push_back(k);
    }
    double dist = duality_check(op, ks, mf);
    c.require(dist <= 1e-8, name + ": duality distance " + std::to_string(dist));
  }
}

void criterion10(Check& c) {
  auto sh = preset_operator("shifted1d");
  LambdaFunction lf(sh, 16);
  XiLevelSet level = maximize_lambda(lf);
  std::vector<Vec> pts;
  Vec xp(1), xm(1);
  xp[0] = 1.0;
  xm[0] = -1.0;
  pts.push_back(xp);
  pts.push_back(xm);

  auto run = [&](Complex w2, double (*ref)(double), const char* label) {
    std::vector<Complex> w{Complex(0.5), w2};
    DiscreteMeasureSynthesis syn = synthesize_from_measure(sh, lf, level, pts, w);
    double worst = 0.0;
    for (int s = 0; s <= 100; ++s) {
      Vec x(1);
      x[0] = -5.0 + 0.1 * s;
      worst = std::max(worst, std::abs(syn.eval(x).real() - ref(x[0])));
    }
    c.require(worst <= 1e-7, std::string(label) + " pointwise error " + std::to_string(worst));
    c.require(syn.residual <= 1e-7, std::string(label) + " residual " +
                                        std::to_string(syn.residual));
    c.require(syn.growth_ok, std::string(label) + " growth certificate fails");
  };
  run(Complex(0.5), [](double t) { return std::cosh(t); }, "cosh");
  run(Complex(-0.5), [](double t) { return std::sinh(t); }, "sinh");
}

}  // namespace

std::vector<Result> run_all(unsigned seed) {
  std::vector<Result> results;
  auto run = [&](int id, const char* name, auto&& fn) {
    Result r;
    r.id = id;
    r.name = name;
    Check c;
    auto t0 = Clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail << "exception: " << e.what();
    }
    r.pass = c.pass;
    r.detail = c.detail.str();
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    results.push_back(std::move(r));
  };

  run(1, "dimension formulas", [&](Check& c) { criterion1(c); });
  run(2, "Laplacian calibration", [&](Check& c) { criterion2(c, seed); });
  run(3, "Mathieu band structure", [&](Check& c) { criterion3(c); });
  run(4, "homogenization oracle", [&](Check& c) { criterion4(c); });
  run(5, "Hessian-homogenization proportionality", [&](Check& c) { criterion5(c); });
  run(6, "Lambda0 criteria consistency", [&](Check& c) { criterion6(c); });
  run(7, "Liouville case split", [&](Check& c) { criterion7(c); });
  run(8, "constructed solutions", [&](Check& c) { criterion8(c); });
  run(9, "Floquet transform and duality", [&](Check& c) { criterion9(c, seed); });
  run(10, "discrete-measure synthesis", [&](Check& c) { criterion10(c); });
  return results;
}

}  // namespace floq::acceptance
