#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "affine_elastica/classifier.hpp"
#include "affine_elastica/curvature.hpp"
#include "affine_elastica/error.hpp"
#include "affine_elastica/fullaffine.hpp"
#include "affine_elastica/io.hpp"
#include "affine_elastica/synthesis.hpp"

#ifndef AFFINE_ELASTICA_VERSION
#define AFFINE_ELASTICA_VERSION "dev"
#endif

namespace affine_elastica::cli {

namespace {

using nlohmann::json;

constexpr double kDefaultTol = 1e-5;
constexpr double kUnimodularTol = 1e-6;
constexpr double kClosureTol = 1e-5;
constexpr double kIdentityTol = 1e-6;

// Raised for bad input that only shows up after parsing.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// "key = value" lines, '#' starts a comment. Each key becomes --key unless
// the command line already sets it, so flags win over the file.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    args.push_back(flag);
    std::istringstream vs(trim(line.substr(eq + 1)));
    for (std::string v; vs >> v;) args.push_back(v);
  }
  return args;
}

void add_config_option(CLI::App* app) {
  app->add_option("--config", "Key-value file whose keys are long option names of this command");
}

double default_tolerance() {
  if (const char* env = std::getenv("AFFINE_ELASTICA_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) {
      throw InputError(std::string("AFFINE_ELASTICA_TOL is not a positive number: ") + env);
    }
    return v;
  }
  return kDefaultTol;
}

// Invariants from exactly one of the groups (g2, g3), (q, Q), (P, tau).
struct InvariantFlags {
  std::optional<double> g2, g3, q, Q, P, tau;

  void add_to(CLI::App* app) {
    app->add_option("--g2", g2, "Invariant g2");
    app->add_option("--g3", g3, "Invariant g3");
    app->add_option("--q", q, "Curvature root q (with --Q)");
    app->add_option("--Q", Q, "Curvature root Q (with --q)");
    app->add_option("--P", P, "Real curvature root P (with --tau)");
    app->add_option("--tau", tau, "Imaginary part of the complex roots (with --P)");
  }

  bool any() const { return g2 || g3 || q || Q || P || tau; }

  Invariants get() const {
    const int groups = (g2 || g3) + (q || Q) + (P || tau);
    if (groups != 1) throw InputError("give exactly one of --g2/--g3, --q/--Q or --P/--tau");
    if (g2 || g3) {
      if (!g2 || !g3) throw InputError("--g2 and --g3 go together");
      return Invariants(*g2, *g3);
    }
    if (q || Q) {
      if (!q || !Q) throw InputError("--q and --Q go together");
      return invariants_from_qQ(*q, *Q);
    }
    if (!P || !tau) throw InputError("--P and --tau go together");
    return invariants_from_Ptau(*P, *tau);
  }
};

Branch branch_from(const std::string& name) {
  const auto b = parse_branch(name);
  if (!b) throw InputError("unknown branch '" + name + "' (closed or open)");
  return *b;
}

// A representative curve for each case, used when --case comes alone.
std::pair<Invariants, Branch> canonical_case(CaseTag tag) {
  switch (tag) {
    case CaseTag::A1: return {invariants_from_qQ(1.0, 3.940854279), Branch::Closed};
    case CaseTag::A2: return {invariants_from_qQ(0.0, 2.0), Branch::Closed};
    case CaseTag::A3: return {invariants_from_qQ(-1.0, 6.0), Branch::Closed};
    case CaseTag::B1: return {invariants_from_qQ(0.15, 0.85), Branch::Open};
    case CaseTag::B2: return {invariants_from_qQ(0.0, 1.0), Branch::Open};
    case CaseTag::B3: return {invariants_from_qQ(-0.5, 1.5), Branch::Open};
    case CaseTag::C1: return {invariants_from_Ptau(1.0, 2.0), Branch::Open};
    case CaseTag::C2: return {invariants_from_Ptau(1.0, 0.3), Branch::Open};
    case CaseTag::C3: return {invariants_from_Ptau(0.0, 1.0), Branch::Open};
    case CaseTag::C4: return {invariants_from_Ptau(-1.0, 8.0), Branch::Open};
    case CaseTag::C5: return {invariants_from_Ptau(-1.0, 0.125), Branch::Open};
    case CaseTag::Da: return {Invariants(0.75, -0.125), Branch::Open};
    case CaseTag::Dc: return {Invariants(0.75, -0.125), Branch::Closed};
    case CaseTag::E_case: return {Invariants(0.75, 0.125), Branch::Open};
    case CaseTag::Ellipse: return {Invariants(0.75, 0.125), Branch::Closed};
    case CaseTag::F: return {Invariants(0.0, -1.0), Branch::Open};
    case CaseTag::G: return {Invariants(0.0, 0.0), Branch::Open};
  }
  return {Invariants(0.0, 0.0), Branch::Open};
}

CurveSamples load_curve(const std::string& path, std::optional<bool> closed) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (!is_json) return read_csv(in, closed);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  CurveSamples c = curve_from_json(j);
  if (closed && *closed != c.closed) {
    c.closed = *closed;
    c.period = c.closed ? std::optional<double>(c.spacing() * static_cast<double>(c.size())) : std::nullopt;
  }
  return c;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  body(out);
  if (!out) throw InputError("error writing " + path);
}

// ---- verification suites

struct Suite {
  std::string name;
  bool pass = false;
  json details = json::object();
};

template <class F>
Suite guarded(const std::string& name, F&& body) {
  Suite s;
  s.name = name;
  try {
    body(s);
  } catch (const Error& e) {
    s.pass = false;
    s.details["error"] = std::string(error_name(e.code()));
    s.details["message"] = e.what();
  }
  return s;
}

Suite suite_el(const CurveSamples& c, double tol) {
  return guarded("el", [&](Suite& s) {
    bool unimodular = true;
    if (c.derivatives) {
      double e = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        e = std::max(e, std::abs(det2(c.derivatives->d1[i], c.derivatives->d2[i]) - 1.0));
      }
      s.details["unimodularity_error"] = e;
      unimodular = e < kUnimodularTol;
    } else {
      const FrameField f = frame_and_curvature(c);
      std::vector<double> dev(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) dev[i] = det2(f.T[i], f.N[i]) - 1.0;
      double e = 0.0;
      const std::size_t mg = boundary_margin(c);
      for (std::size_t i = mg; i + mg < c.size(); ++i) e = std::max(e, std::abs(dev[i]));
      s.details["unimodularity_error"] = e;
      unimodular = e < kUnimodularTol;
    }
    if (!unimodular) s.details["message"] = "s is not equi-affine arc length; try --reparametrize";
    const auto area = el_residual_area_constrained(c);
    const auto both = el_residual_area_and_length(c);
    s.details["area"] = {{"C", area.C}, {"residual", area.residual}};
    s.details["area_and_length"] = {{"C", both.C}, {"A", both.A}, {"residual", both.residual}};
    s.pass = unimodular && (area.residual < tol || both.residual < tol);
  });
}

Suite suite_sqrt(const CurveSamples& c, double tol) {
  return guarded("sqrt", [&](Suite& s) {
    const double r = el_residual_sqrt(c);
    s.details["residual"] = r;
    const auto cert = linear_fit_certificate(c);
    s.details["w_curve"] = cert.is_w_curve;
    s.details["fit"] = {{"A", cert.A}, {"B", cert.B}, {"C", cert.C}, {"residual", cert.fit_residual}};
    s.pass = r < tol;
  });
}

// Value at the seam interpolated from four samples on either side.
Suite suite_closure(const CurveSamples& c) {
  return guarded("closure", [&](Suite& s) {
    if (!c.closed) {
      s.details["message"] = "curve is open";
      return;
    }
    const std::size_t n = c.size();
    std::vector<double> xs;
    std::vector<Vec2> ps;
    for (int k = -4; k <= 4; ++k) {
      if (k == 0) continue;
      xs.push_back(k);
      ps.push_back(c.point((n + static_cast<std::size_t>(k + 4) - 4) % n));
    }
    const auto w = fd::weights(xs, 0.0, 0);
    Vec2 pred = Vec2::Zero();
    for (std::size_t i = 0; i < ps.size(); ++i) pred += w[i] * ps[i];
    const double gap = (pred - c.point(0)).norm() / c.diameter();
    s.details["relative_gap"] = gap;
    s.pass = gap < kClosureTol;
  });
}

Suite suite_fullaffine(const CurveSamples& c, double tol) {
  return guarded("fullaffine", [&](Suite& s) {
    const auto fd = full_affine_invariants(c);
    s.details["full_affine_length"] = fd.length;
    s.details["form_residual"] = el_residual_full_affine_form(fd);
    s.pass = true;
    if (c.closed) {
      const auto f = frame_and_curvature(c);
      std::vector<double> g(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) g[i] = fd.kappa_F[i] * std::sqrt(f.kappa[i]);
      const double total = integrate(g, c.spacing(), true);
      s.details["total_curvature"] = total;
      s.details["ellipse"] = std::abs(fd.length - 2.0 * std::numbers::pi) < kIdentityTol;
      s.pass = std::abs(total) < std::max(kIdentityTol, tol) && fd.length <= 2.0 * std::numbers::pi + kIdentityTol;
    }
  });
}

json suite_json(const Suite& s) {
  json j = s.details;
  j["suite"] = s.name;
  j["pass"] = s.pass;
  return j;
}

std::vector<Suite> run_suites(const CurveSamples& c, const std::string& which, double tol) {
  std::vector<Suite> out;
  const bool all = which == "all";
  if (all || which == "el") out.push_back(suite_el(c, tol));
  if (all || which == "sqrt") out.push_back(suite_sqrt(c, tol));
  if (which == "closure" || (all && c.closed)) out.push_back(suite_closure(c));
  if (all || which == "fullaffine") out.push_back(suite_fullaffine(c, tol));
  return out;
}

// ---- commands

struct ClassifyArgs {
  InvariantFlags inv;
  std::string branch = "open";
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const Invariants inv = a.inv.get();
  const Branch b = branch_from(a.branch);
  out << to_json(classify(inv, b)).dump(2) << '\n';
  return kPass;
}

struct TableArgs {
  std::vector<std::pair<int, int>> pairs;
  bool as_json = false;
};

int cmd_table(const TableArgs& a, std::ostream& out) {
  std::vector<std::pair<int, int>> rows = {{3, 4}, {4, 5}, {29, 37}, {17, 24}};
  for (const auto& p : a.pairs) {
    if (std::find(rows.begin(), rows.end(), p) == rows.end()) rows.push_back(p);
  }
  std::vector<std::future<std::optional<ClosureSolution>>> jobs;
  for (const auto& [m, n] : rows) {
    jobs.push_back(std::async(std::launch::async, [m, n]() -> std::optional<ClosureSolution> {
      try {
        return solve_closure(m, n);
      } catch (const Error&) {
        return std::nullopt;
      }
    }));
  }
  json arr = json::array();
  if (!a.as_json) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%4s %4s %16s %16s %16s %16s\n", "m", "n", "Q", "w1", "w2", "d");
    out << buf;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto sol = jobs[i].get();
    const auto [m, n] = rows[i];
    if (a.as_json) {
      if (sol) {
        arr.push_back(to_json(*sol));
      } else {
        arr.push_back({{"m", m}, {"n", n}, {"error", "no solution found"}});
      }
      continue;
    }
    char buf[160];
    if (sol) {
      std::snprintf(buf, sizeof buf, "%4d %4d %16.10g %16.10g %16.10g %16.10g\n", m, n, sol->Q, sol->lattice.w1,
                    sol->lattice.w2_im, sol->d);
    } else {
      std::snprintf(buf, sizeof buf, "%4d %4d   no solution found\n", m, n);
    }
    out << buf;
  }
  if (a.as_json) out << arr.dump(2) << '\n';
  return kPass;
}

struct SynthArgs {
  std::string tag;
  InvariantFlags inv;
  std::optional<std::string> branch;
  std::vector<int> closure;
  bool length_constrained = false;
  double A = 1.0;
  std::string c0 = "0";
  std::size_t n = 4001;
  std::optional<double> s0, length;
  std::string csv, json_path, svg, congruence;
  bool euclidean_display = false;
  std::optional<std::size_t> mark;
  std::vector<std::string> overlays;
  bool self_check = false;
  std::optional<double> tol;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const bool by_case = !a.length_constrained && (!a.tag.empty() || a.inv.any());
  const int modes = !a.closure.empty() + a.length_constrained + by_case;
  if (modes != 1) throw InputError("choose one of --case/invariants, --closure or --length-constrained");
  if (a.euclidean_display && a.closure.empty()) throw InputError("--euclidean-display needs --closure");
  std::vector<Overlay> overlays;
  for (const auto& o : a.overlays) {
    if (o == "parabola") {
      overlays.push_back(Overlay::OsculatingParabola);
    } else if (o == "conic") {
      overlays.push_back(Overlay::OsculatingConic);
    } else if (o == "frame") {
      overlays.push_back(Overlay::Frame);
    } else {
      throw InputError("unknown overlay '" + o + "' (parabola, conic, frame)");
    }
  }

  // Labels and parameters are checked first so that domain errors keep
  // exit code 2.
  std::optional<CaseLabel> label;
  if (by_case) {
    std::optional<CaseTag> want;
    if (!a.tag.empty()) {
      want = parse_tag(a.tag);
      if (!want) throw InputError("unknown case '" + a.tag + "'");
    }
    Invariants inv;
    Branch b = Branch::Open;
    if (a.inv.any()) {
      inv = a.inv.get();
      b = a.branch ? branch_from(*a.branch) : (want ? canonical_case(*want).second : Branch::Open);
    } else {
      std::tie(inv, b) = canonical_case(*want);
      if (a.branch) b = branch_from(*a.branch);
    }
    label = classify(inv, b);
    if (want && label->tag != *want) {
      throw InputError("the invariants give case " + std::string(tag_name(label->tag)) + ", not " +
                       std::string(tag_name(*want)));
    }
  }
  std::optional<double> g3;
  std::optional<Complex> c0;
  if (a.length_constrained) {
    if (!a.inv.g3 || a.inv.g2 || a.inv.q || a.inv.Q || a.inv.P || a.inv.tau) {
      throw InputError("--length-constrained takes --A, --g3 and --c0");
    }
    g3 = *a.inv.g3;
  }

  CurveSamples c;
  std::optional<ClosureSolution> sol;
  try {
    AnalyticCurve curve;
    SynthesisGrid grid;
    if (!a.closure.empty()) {
      sol = solve_closure(a.closure[0], a.closure[1]);
      curve = analytic_curve(closure_label(*sol));
      grid = {curve.s_ref, closure_period(*sol), a.n, true};
    } else if (a.length_constrained) {
      const LatticeData lat = half_periods(Invariants(a.A * a.A / 12.0, *g3));
      if (a.c0 == "w1") {
        c0 = Complex(lat.w1);
      } else if (a.c0 == "w2") {
        c0 = lat.w2();
      } else {
        try {
          std::size_t used = 0;
          c0 = Complex(std::stod(a.c0, &used));
          if (used != a.c0.size()) throw std::invalid_argument(a.c0);
        } catch (const std::exception&) {
          throw InputError("--c0 must be w1, w2 or a real number");
        }
      }
      curve = analytic_length_constrained(a.A, *g3, *c0);
      grid = default_grid(curve, a.n);
    } else {
      curve = analytic_curve(*label);
      grid = default_grid(curve, a.n);
    }
    if (a.s0) grid.s0 = *a.s0;
    if (a.length) grid.length = *a.length;
    grid.n = a.n;
    c = sample_analytic(curve, grid);
    if (a.euclidean_display) c = euclidean_display_transform(c, *sol);
  } catch (const Error& e) {
    err << "synthesis failed: " << e.what() << '\n';
    return kSynthesisFailed;
  }

  if (!a.csv.empty()) write_file(a.csv, [&](std::ostream& o) { write_csv(o, c); });
  if (!a.json_path.empty()) write_file(a.json_path, [&](std::ostream& o) { o << to_json(c).dump() << '\n'; });
  if (!a.svg.empty()) {
    SvgOptions o;
    o.mark = a.mark;
    o.overlays = overlays;
    o.version = AFFINE_ELASTICA_VERSION;
    const auto it = c.metadata.find("case");
    o.title = it != c.metadata.end() ? it->second : "curve";
    write_file(a.svg, [&](std::ostream& f) { write_svg(f, c, o); });
  }
  if (!a.congruence.empty()) {
    try {
      const auto path = congruence_path(c);
      write_file(a.congruence, [&](std::ostream& o) { o << to_json(path).dump() << '\n'; });
    } catch (const Error& e) {
      err << "congruence failed: " << e.what() << '\n';
      return kSynthesisFailed;
    }
  }

  json summary;
  summary["case"] = c.metadata.count("case") ? c.metadata.at("case") : "";
  summary["n"] = c.size();
  summary["closed"] = c.closed;
  summary["s0"] = c.s.front();
  summary["length"] = c.closed ? *c.period : c.s.back() - c.s.front();
  summary["display_normalized"] = c.display_normalized;
  if (sol) summary["closure"] = to_json(*sol);
  int code = kPass;
  if (a.self_check) {
    const double tol = a.tol ? *a.tol : default_tolerance();
    std::vector<Suite> suites = {suite_el(c, tol)};
    if (c.closed) suites.push_back(suite_closure(c));
    json checks = json::array();
    bool pass = true;
    for (const auto& s : suites) {
      checks.push_back(suite_json(s));
      pass = pass && s.pass;
    }
    summary["self_check"] = {{"tol", tol}, {"suites", checks}, {"pass", pass}};
    if (!pass) code = kVerifyFailed;
  }
  out << summary.dump(2) << '\n';
  return code;
}

struct VerifyArgs {
  std::string file;
  std::string suite = "all";
  bool closed = false, open = false;
  bool reparametrize = false;
  std::optional<double> tol;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  if (a.closed && a.open) throw InputError("--closed and --open exclude each other");
  const double tol = a.tol ? *a.tol : default_tolerance();
  std::optional<bool> closed;
  if (a.closed) closed = true;
  if (a.open) closed = false;
  CurveSamples c = load_curve(a.file, closed);
  if (a.reparametrize) {
    std::vector<Vec2> pts(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) pts[i] = c.point(i);
    c = reparametrize_equiaffine(pts, c.closed);
  }
  json report;
  report["file"] = a.file;
  report["n"] = c.size();
  report["closed"] = c.closed;
  report["tol"] = tol;
  json suites = json::array();
  bool pass = true;
  for (const auto& s : run_suites(c, a.suite, tol)) {
    suites.push_back(suite_json(s));
    pass = pass && s.pass;
  }
  report["suites"] = suites;
  report["pass"] = pass;
  out << report.dump(2) << '\n';
  return pass ? kPass : kVerifyFailed;
}

struct ScanArgs {
  double Qmin = 1.1, Qmax = 10.0;
  int steps = 200;
};

int cmd_scan(const ScanArgs& a, std::ostream& out) {
  if (!(a.Qmin > 1.0) || !(a.Qmax > a.Qmin) || a.steps < 1) {
    throw InputError("need 1 < Qmin < Qmax and steps >= 1");
  }
  const std::size_t count = static_cast<std::size_t>(a.steps) + 1;
  std::vector<std::optional<ClosureSample>> rows(count);
  const unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        const double Q = a.Qmin + (a.Qmax - a.Qmin) * static_cast<double>(i) / a.steps;
        try {
          rows[i] = closure_sample(Q);
        } catch (const Error&) {
          rows[i] = std::nullopt;
        }
      }
    }));
  }
  for (auto& j : jobs) j.get();
  out << "Q,lhs,d\n";
  for (std::size_t i = 0; i < count; ++i) {
    const double Q = a.Qmin + (a.Qmax - a.Qmin) * static_cast<double>(i) / a.steps;
    out << format_double(Q) << ',';
    if (rows[i]) {
      out << format_double(rows[i]->lhs) << ',' << format_double(rows[i]->d) << '\n';
    } else {
      out << "nan,nan\n";
    }
  }
  return kPass;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical curves of equi-affine and full-affine curvature functionals", "affine-elastica"};
  app.set_version_flag("--version", AFFINE_ELASTICA_VERSION);
  app.require_subcommand(1);

  ClassifyArgs ca;
  auto* classify_cmd = app.add_subcommand("classify", "Case of a pair of invariants, as JSON");
  ca.inv.add_to(classify_cmd);
  classify_cmd->add_option("--branch", ca.branch, "closed or open")->capture_default_str();
  add_config_option(classify_cmd);

  TableArgs ta;
  auto* table_cmd = app.add_subcommand("table", "Closed curves of the first case with rotation number n/m");
  table_cmd->add_option("--pair", ta.pairs, "Extra row m n (repeatable)");
  table_cmd->add_flag("--json", ta.as_json, "Print JSON instead of a text table");
  add_config_option(table_cmd);

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a critical curve and write CSV/JSON/SVG");
  synth_cmd->add_option("--case", sa.tag, "Case tag such as A1, C3, Da, F, G, ellipse");
  sa.inv.add_to(synth_cmd);
  synth_cmd->add_option("--branch", sa.branch, "closed or open");
  synth_cmd->add_option("--closure", sa.closure, "Closed curve with rotation number n/m: m n")->expected(2);
  synth_cmd->add_flag("--length-constrained", sa.length_constrained,
                      "Total curvature critical under fixed length and area");
  synth_cmd->add_option("--A", sa.A, "Length multiplier")->capture_default_str();
  synth_cmd->add_option("--c0", sa.c0, "Shift of the curvature: w1, w2 or a real number")->capture_default_str();
  synth_cmd->add_option("--n", sa.n, "Number of samples")->capture_default_str()->check(CLI::Range(7, 100000000));
  synth_cmd->add_option("--s0", sa.s0, "First arc-length value");
  synth_cmd->add_option("--length", sa.length, "Arc length covered")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--csv", sa.csv, "CSV output file");
  synth_cmd->add_option("--json", sa.json_path, "JSON output file");
  synth_cmd->add_option("--svg", sa.svg, "SVG output file");
  synth_cmd->add_option("--congruence", sa.congruence, "JSON file for the osculating parabola congruence");
  synth_cmd->add_flag("--euclidean-display", sa.euclidean_display,
                      "Map the curvature maxima of a closed curve onto a circle");
  synth_cmd->add_option("--mark", sa.mark, "Sample index for SVG overlays");
  synth_cmd->add_option("--overlay", sa.overlays, "parabola, conic or frame (repeatable)");
  synth_cmd->add_flag("--self-check", sa.self_check, "Verify the output before exiting");
  synth_cmd->add_option("--tol", sa.tol, "Residual tolerance for --self-check");
  add_config_option(synth_cmd);

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Residual report for a CSV or JSON curve");
  verify_cmd->add_option("file", va.file, "Curve file (.csv or .json)")->required();
  verify_cmd->add_option("--suite", va.suite, "el, sqrt, closure, fullaffine or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"el", "sqrt", "closure", "fullaffine", "all"}));
  verify_cmd->add_flag("--closed", va.closed, "Treat the samples as one period of a closed curve");
  verify_cmd->add_flag("--open", va.open, "Treat the samples as an open arc");
  verify_cmd->add_flag("--reparametrize", va.reparametrize,
                       "Resample positions by equi-affine arc length first");
  verify_cmd->add_option("--tol", va.tol, "Residual tolerance (default 1e-5 or AFFINE_ELASTICA_TOL)")
      ->check(CLI::PositiveNumber);
  add_config_option(verify_cmd);

  ScanArgs sc;
  auto* scan_cmd = app.add_subcommand("scan-closure", "Rotation number and d as functions of Q, as CSV");
  scan_cmd->add_option("--Qmin", sc.Qmin)->capture_default_str();
  scan_cmd->add_option("--Qmax", sc.Qmax)->capture_default_str();
  scan_cmd->add_option("--steps", sc.steps)->capture_default_str();
  add_config_option(scan_cmd);

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? kPass : kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*classify_cmd) return cmd_classify(ca, out);
    if (*table_cmd) return cmd_table(ta, out);
    if (*synth_cmd) return cmd_synth(sa, out, err);
    if (*verify_cmd) return cmd_verify(va, out);
    if (*scan_cmd) return cmd_scan(sc, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::DegenerateDiscriminant) {
      err << "the invariants lie on the boundary Delta = 0 between the generic cases\n";
    }
    return kInputError;
  }
  return kInputError;
}

}  // namespace affine_elastica::cli
