// floquet-lab: band structures, principal eigenvalues, Liouville dimension
// counts and homogenization cross-checks for periodic elliptic operators.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include "acceptance.hpp"
#include "floq/eigs.hpp"
#include "floq/liouville.hpp"

using json = nlohmann::json;
using namespace floq;

namespace {

constexpr const char* kVersion = "1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run manifest

struct Manifest {
  json config = json::object();
  json timings = json::object();
  std::vector<std::string> files;
  std::string out_dir = ".";

  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void stage_done(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    timings[name] = std::chrono::duration<double>(now - t0).count();
    t0 = now;
  }

  static std::string fnv1a(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash " + path);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
  }

  void write() {
    json inv = json::array();
    for (const auto& f : files)
      inv.push_back({{"path", f}, {"fnv1a", fnv1a(out_dir + "/" + f)}});
    json m = {{"tool", "floquet-lab"},
              {"version", kVersion},
              {"config", config},
              {"timings_seconds", timings},
              {"outputs", inv}};
    std::ofstream out(out_dir + "/manifest.json");
    out << m.dump(2) << "\n";
  }
};

void write_text(Manifest& man, const std::string& name, const std::string& body) {
  std::ofstream out(man.out_dir + "/" + name);
  if (!out) throw std::runtime_error("cannot write " + man.out_dir + "/" + name);
  out << body;
  out.close();
  man.files.push_back(name);
}

void write_json(Manifest& man, const std::string& name, const json& j) {
  write_text(man, name, j.dump(2) + "\n");
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Operator loading

Field field_from_json(const json& j, int n, int grid) {
  if (j.is_number()) return Field::constant(n, grid, Complex(j.get<double>()));
  if (j.is_array()) {
    Field f(n, grid);
    if (static_cast<int>(j.size()) != f.npoints())
      throw ConfigError("field sample array has " + std::to_string(j.size()) +
                        " entries, expected " + std::to_string(f.npoints()));
    for (int i = 0; i < f.npoints(); ++i) f.at(i) = Complex(j[static_cast<size_t>(i)].get<double>());
    f.refresh();
    return f;
  }
  throw ConfigError("field entries must be numbers or flat sample arrays");
}

PeriodicOperator load_operator(const std::string& preset, const std::string& spec_path,
                               int resolution) {
  if (!preset.empty()) return preset_operator(preset, resolution);
  if (spec_path.empty()) throw ConfigError("either --preset or --spec is required");
  std::ifstream in(spec_path);
  if (!in) throw ConfigError("cannot open spec file " + spec_path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad JSON in spec file: ") + e.what());
  }
  if (j.contains("preset")) return preset_operator(j["preset"].get<std::string>(), resolution);

  OperatorSpec spec;
  spec.n = j.value("n", 1);
  spec.grid_m = resolution > 0 ? resolution : j.value("grid_resolution", default_grid(spec.n));
  std::string kind = j.value("kind", "general");
  if (kind == "general")
    spec.kind = OperatorKind::GeneralSecondOrder;
  else if (kind == "schrodinger")
    spec.kind = OperatorKind::Schrodinger;
  else if (kind == "divergence")
    spec.kind = OperatorKind::DivergenceForm;
  else if (kind == "magnetic")
    spec.kind = OperatorKind::MagneticSchrodinger;
  else
    throw ConfigError("unknown operator kind: " + kind);
  try {
    if (j.contains("a"))
      for (const auto& e : j["a"]) spec.a.push_back(field_from_json(e, spec.n, spec.grid_m));
    if (j.contains("b"))
      for (const auto& e : j["b"]) spec.b.push_back(field_from_json(e, spec.n, spec.grid_m));
    if (j.contains("c")) spec.c = field_from_json(j["c"], spec.n, spec.grid_m);
    if (j.contains("V")) spec.v = field_from_json(j["V"], spec.n, spec.grid_m);
    if (j.contains("A"))
      for (const auto& e : j["A"]) spec.a_mag.push_back(field_from_json(e, spec.n, spec.grid_m));
    return build_operator(spec);
  } catch (const OperatorError& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// qharm polynomial parser: "xi1^2+xi2^2", "2*xi1*xi2 - xi3^2", ...

GradedPolynomial parse_poly(const std::string& text, int n) {
  GradedPolynomial p(n);
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  size_t pos = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("cannot parse polynomial at position " + std::to_string(pos) + ": " + msg);
  };
  while (pos < s.size()) {
    double sign = 1.0;
    while (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      if (s[pos] == '-') sign = -sign;
      ++pos;
    }
    if (pos >= s.size()) fail("dangling sign");
    double coeff = 1.0;
    MultiIndex alpha(n, 0);
    bool any = false;
    while (pos < s.size() && s[pos] != '+' && s[pos] != '-') {
      if (s[pos] == '*') {
        ++pos;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.') {
        size_t used = 0;
        coeff *= std::stod(s.substr(pos), &used);
        pos += used;
        any = true;
      } else if (s.compare(pos, 2, "xi") == 0) {
        pos += 2;
        size_t used = 0;
        int var = std::stoi(s.substr(pos), &used);
        pos += used;
        if (var < 1 || var > n) fail("variable index out of range: xi" + std::to_string(var));
        int power = 1;
        if (pos < s.size() && s[pos] == '^') {
          ++pos;
          power = std::stoi(s.substr(pos), &used);
          pos += used;
        }
        alpha[var - 1] += power;
        any = true;
      } else {
        fail(std::string("unexpected character '") + s[pos] + "'");
      }
    }
    if (!any) fail("empty term");
    p.set(alpha, p.coeff(alpha) + sign * coeff);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Shared CLI state

struct Common {
  std::string preset, spec_path, out_dir = ".";
  int resolution = 0;
  int nmax = 2;
  unsigned seed = 12345;
  int threads = 0;
  BandTolerances tol;
  double tol_level = 1e-7;

  void attach(CLI::App* app, bool needs_operator) {
    if (needs_operator) {
      app->add_option("--preset", preset, "bundled operator preset");
      app->add_option("--spec", spec_path, "operator spec JSON path");
    }
    app->add_option("--resolution", resolution, "coefficient grid / Fourier resolution override");
    app->add_option("--nmax", nmax, "maximal polynomial growth order N");
    app->add_option("--out", out_dir, "output directory");
    app->add_option("--seed", seed, "seed for randomized property checks");
    app->add_option("--threads", threads, "worker thread count (0 = FLOQUET_LAB_THREADS or 1)");
    app->add_option("--tol.fermi", tol.tol_fermi, "Fermi point tolerance");
    app->add_option("--tol.merge", tol.merge_radius, "Fermi point merge radius");
    app->add_option("--tol.gap", tol.gap_tol, "band gap tolerance");
    app->add_option("--tol.taylor", tol.taylor_zero_tol, "Taylor coefficient zero threshold");
    app->add_option("--tol.level", tol_level, "level-set membership tolerance");
  }

  void validate() const {
    if (tol.tol_fermi <= 0 || tol.merge_radius <= 0 || tol.gap_tol <= 0 ||
        tol.taylor_zero_tol <= 0 || tol_level <= 0)
      throw ConfigError("tolerance overrides must be positive");
    if (resolution < 0 || resolution > 257) throw ConfigError("resolution out of supported range");
  }

  void apply_threads() const {
    int t = threads;
    if (t == 0)
      if (const char* env = std::getenv("FLOQUET_LAB_THREADS")) t = std::atoi(env);
    if (t > 0) Eigen::setNbThreads(t);
  }

  json echo(const std::string& subcommand) const {
    return {{"subcommand", subcommand}, {"preset", preset},       {"spec", spec_path},
            {"resolution", resolution}, {"nmax", nmax},           {"seed", seed},
            {"out", out_dir},           {"tol",
             {{"fermi", tol.tol_fermi},
              {"merge", tol.merge_radius},
              {"gap", tol.gap_tol},
              {"taylor", tol.taylor_zero_tol},
              {"level", tol_level}}}};
  }
};

// CLI default truncation. The library default (16 for n = 1, 2) gives dense
// matrices of dimension (2 M_f + 1)^n, which is prohibitive for the scanning
// pipelines in 2d/3d; interactive runs trade a little resolution for speed
// and can always override with --resolution.
int mf_for(const PeriodicOperator& op, int resolution) {
  if (resolution > 0) return resolution;
  return op.n == 1 ? default_mf(1) : op.n == 2 ? 6 : 4;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_bands(const Common& cfg, int j_count, int per_dim, double level) {
  auto op = load_operator(cfg.preset, cfg.spec_path, 0);
  int mf = mf_for(op, cfg.resolution);
  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("bands");
  man.config["bands"] = j_count;
  man.config["per_dim"] = per_dim;
  man.config["level"] = level;

  std::vector<Vec> grid = serpentine_grid(op.n, per_dim);
  BandStructure bs = compute_bands(op, grid, j_count, mf);
  man.stage_done("bands");

  std::ostringstream csv;
  for (int d = 0; d < op.n; ++d) csv << "k" << d + 1 << ",";
  for (int j = 1; j <= j_count; ++j)
    csv << "re_lambda" << j << ",im_lambda" << j << (j == j_count ? "\n" : ",");
  for (size_t p = 0; p < grid.size(); ++p) {
    for (int d = 0; d < op.n; ++d) csv << grid[p][d] << ",";
    for (int j = 0; j < j_count; ++j)
      csv << bs.bands[p][j].real() << "," << bs.bands[p][j].imag()
          << (j + 1 == j_count ? "\n" : ",");
  }
  write_text(man, "bands.csv", csv.str());

  FermiPointSet fp = real_fermi_points(op, level, mf, cfg.tol);
  man.stage_done("fermi_points");
  json summary = {{"level", level},
                  {"fermi_points", json::array()},
                  {"multiplicities", fp.multiplicities},
                  {"infinite", fp.infinite},
                  {"taylor", json::array()}};
  for (const auto& q : fp.points) summary["fermi_points"].push_back(vec_json(q));
  for (size_t i = 0; i < fp.points.size(); ++i) {
    if (fp.multiplicities[i] != 1) continue;
    BandTaylor bt = band_taylor(op, fp.points[i], 4, Complex(level), mf, cfg.tol);
    json coeffs = json::array();
    for (int l = 0; l <= bt.max_order; ++l) {
      json term = json::array();
      for (const auto& [a, c] : bt.terms[static_cast<size_t>(l)].terms())
        term.push_back({{"alpha", a}, {"re", c.real()}, {"im", c.imag()}});
      coeffs.push_back(term);
    }
    summary["taylor"].push_back(
        {{"point", vec_json(fp.points[i])}, {"l0", bt.leading_order}, {"coefficients", coeffs}});
  }
  man.stage_done("taylor");
  write_json(man, "bands.json", summary);
  man.write();
}

void cmd_lambda(const Common& cfg, int ray_count, int ray_samples) {
  auto op = load_operator(cfg.preset, cfg.spec_path, 0);
  int mf = mf_for(op, cfg.resolution);
  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("lambda");
  man.config["rays"] = ray_count;
  man.config["ray_samples"] = ray_samples;

  LambdaFunction lf(op, mf);
  XiLevelSet level = maximize_lambda(lf, cfg.tol_level, ray_count);
  man.stage_done("maximize");

  const char* cls = level.classification == XiClass::Singleton       ? "singleton"
                    : level.classification == XiClass::ConvexSurface ? "convex_surface"
                                                                     : "sub_zero";
  json out = {{"lambda0", level.lambda0},
              {"xi_star", vec_json(level.xi_star)},
              {"classification", cls},
              {"xi_samples", json::array()},
              {"h_samples", json::array()}};
  for (const auto& xi : level.samples) {
    out["xi_samples"].push_back(vec_json(xi));
    Vec omega = xi.norm() > 0 ? Vec(xi / xi.norm()) : xi;
    out["h_samples"].push_back(level.h(omega));
  }
  write_json(man, "lambda.json", out);

  std::ostringstream csv;
  for (int d = 0; d < op.n; ++d) csv << "xi" << d + 1 << ",";
  csv << "lambda\n";
  std::vector<Vec> dirs;
  if (op.n == 1) {
    Vec e(1);
    e[0] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  } else {
    int count = std::max(ray_count, 4);
    for (int i = 0; i < count; ++i) {
      Vec e = Vec::Zero(op.n);
      double th = kTwoPi * i / count;
      e[0] = std::cos(th);
      e[1] = std::sin(th);
      dirs.push_back(e);
    }
  }
  double reach = std::max(1.0, 2.0 * level.xi_star.norm());
  for (const auto& e : dirs)
    for (int s = 0; s <= ray_samples; ++s) {
      Vec xi = e * (reach * s / ray_samples);
      for (int d = 0; d < op.n; ++d) csv << xi[d] << ",";
      csv << lf.lambda(xi) << "\n";
    }
  man.stage_done("rays");
  write_text(man, "lambda_rays.csv", csv.str());
  man.write();
}

void cmd_qharm(const Common& cfg, int n, int nn, const std::string& q_text, bool emit_kernel) {
  if (n < 1 || n > 5) throw ConfigError("--n must be in 1..5");
  GradedPolynomial q = parse_poly(q_text, n);
  if (q.empty()) throw ConfigError("polynomial Q must be nonzero");
  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("qharm");
  man.config["n"] = n;
  man.config["N"] = nn;
  man.config["q"] = q_text;

  json out = {{"dimension", qharmonic_dim(q, nn)},
              {"h_dim", h_dim(n, nn)},
              {"q_dim", q_dim(n, nn)}};
  if (emit_kernel) {
    json basis = json::array();
    for (const auto& p : qharmonic_kernel(q, nn)) {
      json terms = json::array();
      for (const auto& [a, c] : p.terms())
        terms.push_back({{"alpha", a}, {"re", c.real()}, {"im", c.imag()}});
      basis.push_back(terms);
    }
    out["kernel_basis"] = basis;
  }
  man.stage_done("qharm");
  std::cout << out.dump(2) << "\n";
  write_json(man, "qharm.json", out);
  man.write();
}

void cmd_homogenize(const Common& cfg, bool dump_fields) {
  auto op = load_operator(cfg.preset, cfg.spec_path, 0);
  int mf = mf_for(op, cfg.resolution);
  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("homogenize");

  LambdaFunction lf(op, mf);
  XiLevelSet level = maximize_lambda(lf, cfg.tol_level);
  Lambda0Criteria crit = lambda0_criteria(op, lf, level);
  man.stage_done("lambda");

  json out = {{"lambda0", level.lambda0},
              {"alpha", vec_json(crit.alpha)},
              {"gamma", vec_json(crit.gamma)}};
  if (level.lambda0 >= -cfg.tol_level) {
    HomogHessianLink link = hessian_homogenization(op, lf, level, mf);
    out["Q_hom"] = mat_json(link.q_hom);
    out["hessian_lambda"] = mat_json(link.hess);
    out["proportionality_constant"] = link.constant;
    out["proportionality_residual"] = link.rel_err;
    Vec xi = link.xi;
    Field p = lf.point(xi).p;
    PeriodicOperator conj = conjugated_operator(op, xi, p);
    CellSolution cell = solve_cell(conj, mf);
    out["psi_stats"] = {{"min", [&] {
                           double lo = 1e300;
                           for (int i = 0; i < cell.psi.npoints(); ++i)
                             lo = std::min(lo, cell.psi.at(i).real());
                           return lo;
                         }()},
                        {"max", cell.psi.max_abs()},
                        {"integral", cell.psi.integral().real()},
                        {"residual", cell.residual}};
    man.stage_done("cell");
    if (dump_fields) {
      std::ostringstream csv;
      for (int d = 0; d < op.n; ++d) csv << "x" << d + 1 << ",";
      csv << "psi";
      for (size_t jf = 0; jf < cell.corrector.size(); ++jf) csv << ",Psi" << jf + 1;
      csv << "\n";
      for (int i = 0; i < cell.psi.npoints(); ++i) {
        Vec x = cell.psi.point(i);
        for (int d = 0; d < op.n; ++d) csv << x[d] << ",";
        csv << cell.psi.at(i).real();
        for (const auto& f : cell.corrector) csv << "," << f.at(i).real();
        csv << "\n";
      }
      write_text(man, "cell_fields.csv", csv.str());
    }
  } else {
    out["note"] = "Lambda0 < 0: level set empty, no cell problem";
  }
  std::cout << out.dump(2) << "\n";
  write_json(man, "homogenize.json", out);
  man.write();
}

void cmd_liouville(const Common& cfg) {
  auto op = load_operator(cfg.preset, cfg.spec_path, 0);
  int mf = mf_for(op, cfg.resolution);
  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("liouville");

  LiouvilleReport rep = liouville_dimensions(op, cfg.nmax, mf, cfg.tol);
  man.stage_done("liouville");
  const char* cls = rep.classification == LiouvilleClass::Vacuous  ? "vacuous"
                    : rep.classification == LiouvilleClass::Finite ? "finite"
                                                                   : "infinite";
  json out = {{"classification", cls},
              {"exact", rep.exact},
              {"d", rep.d_lower},
              {"d_upper", rep.d_upper},
              {"Z", json::array()},
              {"per_point", json::array()}};
  for (const auto& q : rep.z.points) out["Z"].push_back(vec_json(q));
  for (const auto& pt : rep.per_point)
    out["per_point"].push_back({{"point", vec_json(pt.q)},
                                {"multiplicity", pt.multiplicity},
                                {"simple", pt.simple},
                                {"l0", pt.l0},
                                {"dims", pt.dims},
                                {"upper", pt.upper}});
  std::cout << out.dump(2) << "\n";
  write_json(man, "liouville.json", out);
  man.write();
}

void cmd_synthesize(const Common& cfg, const std::string& measure_path, double box,
                    int per_axis) {
  auto op = load_operator(cfg.preset, cfg.spec_path, 0);
  int mf = mf_for(op, cfg.resolution);
  std::ifstream in(measure_path);
  if (!in) throw ConfigError("cannot open measure file " + measure_path);
  json jm;
  try {
    in >> jm;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad JSON in measure file: ") + e.what());
  }
  std::vector<Vec> points;
  std::vector<Complex> weights;
  for (const auto& p : jm.at("points")) {
    Vec xi(op.n);
    if (static_cast<int>(p.size()) != op.n) throw ConfigError("measure point dimension mismatch");
    for (int d = 0; d < op.n; ++d) xi[d] = p[static_cast<size_t>(d)].get<double>();
    points.push_back(xi);
  }
  for (const auto& w : jm.at("weights")) {
    if (w.is_number())
      weights.emplace_back(w.get<double>());
    else
      weights.emplace_back(w.value("re", 0.0), w.value("im", 0.0));
  }
  if (points.empty() || points.size() != weights.size())
    throw ConfigError("measure needs equal nonzero numbers of points and weights");

  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("synthesize");
  man.config["measure"] = measure_path;
  man.config["box"] = box;

  LambdaFunction lf(op, mf);
  XiLevelSet level = maximize_lambda(lf, cfg.tol_level);
  DiscreteMeasureSynthesis syn =
      synthesize_from_measure(op, lf, level, points, weights, cfg.tol_level);
  man.stage_done("synthesize");

  std::ostringstream csv;
  for (int d = 0; d < op.n; ++d) csv << "x" << d + 1 << ",";
  csv << "re_u,im_u\n";
  std::vector<int> idx(static_cast<size_t>(op.n), 0);
  while (true) {
    Vec x(op.n);
    for (int d = 0; d < op.n; ++d) {
      x[d] = -box + 2.0 * box * idx[static_cast<size_t>(d)] / per_axis;
      csv << x[d] << ",";
    }
    Complex u = syn.eval(x);
    csv << u.real() << "," << u.imag() << "\n";
    int d = 0;
    while (d < op.n && ++idx[static_cast<size_t>(d)] > per_axis) {
      idx[static_cast<size_t>(d)] = 0;
      ++d;
    }
    if (d == op.n) break;
  }
  write_text(man, "synthesis.csv", csv.str());
  json out = {{"residual", syn.residual},
              {"growth_ok", syn.growth_ok},
              {"certificate", syn.certificate}};
  std::cout << out.dump(2) << "\n";
  write_json(man, "synthesis.json", out);
  man.write();
}

int cmd_verify_all(const Common& cfg) {
  auto results = acceptance::run_all(cfg.seed);
  int failures = 0;
  json out = json::array();
  for (const auto& r : results) {
    std::printf("criterion %d (%s): %s  [%.1fs]%s%s\n", r.id, r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.seconds, r.detail.empty() ? "" : " -- ",
                r.detail.c_str());
    out.push_back({{"id", r.id},
                   {"name", r.name},
                   {"pass", r.pass},
                   {"seconds", r.seconds},
                   {"detail", r.detail}});
    if (!r.pass) ++failures;
  }
  Manifest man;
  man.out_dir = cfg.out_dir;
  man.config = cfg.echo("verify-all");
  man.stage_done("verify-all");
  write_json(man, "verify.json", out);
  man.write();
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"floquet-lab: spectral theory of periodic elliptic operators"};
  app.require_subcommand(1);

  Common cfg;
  int bands_j = 4, bands_per_dim = 0;
  double bands_level = 0.0;
  int rays = 0, ray_samples = 40;
  int qharm_n = 2, qharm_nn = 2;
  std::string qharm_q;
  bool qharm_kernel = false, homog_dump = false;
  std::string measure_path;
  double syn_box = 5.0;
  int syn_per_axis = 100;

  auto* sb = app.add_subcommand("bands", "band structure sweep, Fermi points, Taylor data");
  cfg.attach(sb, true);
  sb->add_option("--bands", bands_j, "number of branches");
  sb->add_option("--per-dim", bands_per_dim, "k-grid points per dimension (0 = automatic)");
  sb->add_option("--level", bands_level, "spectral level for the Fermi point search");

  auto* sl = app.add_subcommand("lambda", "principal eigenvalue Lambda(xi) and its level set");
  cfg.attach(sl, true);
  sl->add_option("--rays", rays, "number of trace directions (0 = automatic)");
  sl->add_option("--ray-samples", ray_samples, "samples per ray in the CSV output");

  auto* sq = app.add_subcommand("qharm", "Q-harmonic polynomial dimension and kernel");
  cfg.attach(sq, false);
  sq->add_option("--n", qharm_n, "number of variables")->required();
  sq->add_option("--N", qharm_nn, "degree bound")->required();
  sq->add_option("--q", qharm_q, "polynomial, e.g. \"xi1^2+xi2^2\"")->required();
  sq->add_flag("--kernel", qharm_kernel, "emit a kernel basis");

  auto* sh = app.add_subcommand("homogenize", "cell problem, Q_hom and Hessian comparison");
  cfg.attach(sh, true);
  sh->add_flag("--dump-fields", homog_dump, "CSV dump of psi and the correctors");

  auto* sv = app.add_subcommand("liouville", "Liouville dimension report");
  cfg.attach(sv, true);

  auto* ss = app.add_subcommand("synthesize", "solution from a discrete measure on Xi");
  cfg.attach(ss, true);
  ss->add_option("--measure", measure_path, "measure JSON {points, weights}")->required();
  ss->add_option("--box", syn_box, "half-width of the sampling box");
  ss->add_option("--per-axis", syn_per_axis, "samples per axis");

  auto* sa = app.add_subcommand("verify-all", "run the full acceptance suite");
  cfg.attach(sa, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.validate();
    cfg.apply_threads();
    if (sb->parsed()) {
      auto op = load_operator(cfg.preset, cfg.spec_path, 0);
      int pd = bands_per_dim > 0 ? bands_per_dim : (op.n == 1 ? 129 : op.n == 2 ? 33 : 9);
      cmd_bands(cfg, bands_j, pd, bands_level);
    } else if (sl->parsed()) {
      cmd_lambda(cfg, rays, ray_samples);
    } else if (sq->parsed()) {
      cmd_qharm(cfg, qharm_n, qharm_nn, qharm_q, qharm_kernel);
    } else if (sh->parsed()) {
      cmd_homogenize(cfg, homog_dump);
    } else if (sv->parsed()) {
      cmd_liouville(cfg);
    } else if (ss->parsed()) {
      cmd_synthesize(cfg, measure_path, syn_box, syn_per_axis);
    } else if (sa->parsed()) {
      return cmd_verify_all(cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
