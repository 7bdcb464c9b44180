#include "affine_elastica/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "affine_elastica/curvature.hpp"
#include "affine_elastica/error.hpp"

namespace affine_elastica {

namespace {

using nlohmann::json;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    const auto a = cur.find_first_not_of(" \t\r");
    const auto b = cur.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : cur.substr(a, b - a + 1));
  }
  return out;
}

double parse_number(const std::string& text, std::size_t line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": '" + text + "' is not a number");
  }
  return v;
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::vector<Vec2> vecs_from_json(const json& j, const char* name) {
  std::vector<Vec2> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) {
      throw Error(ErrorCode::ParseError, std::string(name) + " must hold [x, y] pairs");
    }
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) { return fmt("%.17g", v); }

double round_significant(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

void write_csv(std::ostream& out, const CurveSamples& c) {
  const bool jets = c.derivatives.has_value();
  out << "s,x,y";
  if (jets) out << ",x1,y1,x2,y2,x3,y3";
  out << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << format_double(c.s[i]) << ',' << format_double(c.x[i]) << ',' << format_double(c.y[i]);
    if (jets) {
      for (const auto* d : {&c.derivatives->d1, &c.derivatives->d2, &c.derivatives->d3}) {
        out << ',' << format_double((*d)[i].x()) << ',' << format_double((*d)[i].y());
      }
    }
    out << '\n';
  }
}

bool looks_closed(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 4) return false;
  double longest = 0.0;
  for (std::size_t i = 1; i < n; ++i) longest = std::max(longest, std::hypot(x[i] - x[i - 1], y[i] - y[i - 1]));
  return std::hypot(x[0] - x[n - 1], y[0] - y[n - 1]) <= 1.5 * longest;
}

CurveSamples read_csv(std::istream& in, std::optional<bool> closed) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty input");
  ++lineno;
  const auto header = split(line);
  auto column = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto cs = column("s"), cx = column("x"), cy = column("y");
  if (!cs || !cx || !cy) throw Error(ErrorCode::ParseError, "header must name columns s, x and y");
  const char* jet_names[6] = {"x1", "y1", "x2", "y2", "x3", "y3"};
  std::vector<std::size_t> jet_cols;
  for (const char* name : jet_names) {
    if (const auto k = column(name)) jet_cols.push_back(*k);
  }
  const bool jets = jet_cols.size() == 6;

  CurveSamples c;
  CurveSamples::Derivatives d;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                                             " fields, expected " + std::to_string(header.size()));
    }
    c.s.push_back(parse_number(f[*cs], lineno));
    c.x.push_back(parse_number(f[*cx], lineno));
    c.y.push_back(parse_number(f[*cy], lineno));
    if (jets) {
      d.d1.emplace_back(parse_number(f[jet_cols[0]], lineno), parse_number(f[jet_cols[1]], lineno));
      d.d2.emplace_back(parse_number(f[jet_cols[2]], lineno), parse_number(f[jet_cols[3]], lineno));
      d.d3.emplace_back(parse_number(f[jet_cols[4]], lineno), parse_number(f[jet_cols[5]], lineno));
    }
  }
  if (jets) c.derivatives = std::move(d);
  c.closed = closed ? *closed : looks_closed(c.x, c.y);
  if (c.closed && c.size() >= 2) c.period = c.spacing() * static_cast<double>(c.size());
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return c;
}

json to_json(const CurveSamples& c) {
  json j;
  j["closed"] = c.closed;
  j["period"] = c.period ? json(*c.period) : json(nullptr);
  j["display_normalized"] = c.display_normalized;
  j["metadata"] = c.metadata;
  j["s"] = c.s;
  j["x"] = c.x;
  j["y"] = c.y;
  if (c.derivatives) {
    json d;
    const std::pair<const char*, const std::vector<Vec2>*> parts[] = {
        {"d1", &c.derivatives->d1}, {"d2", &c.derivatives->d2}, {"d3", &c.derivatives->d3}};
    for (const auto& [name, v] : parts) {
      json arr = json::array();
      for (const auto& p : *v) arr.push_back(vec_json(p));
      d[name] = std::move(arr);
    }
    j["derivatives"] = std::move(d);
  }
  return j;
}

CurveSamples curve_from_json(const json& j) {
  CurveSamples c;
  try {
    c.closed = j.at("closed").get<bool>();
    if (j.contains("period") && !j["period"].is_null()) c.period = j["period"].get<double>();
    c.display_normalized = j.value("display_normalized", false);
    if (j.contains("metadata")) c.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    c.s = j.at("s").get<std::vector<double>>();
    c.x = j.at("x").get<std::vector<double>>();
    c.y = j.at("y").get<std::vector<double>>();
    if (j.contains("derivatives")) {
      const auto& d = j["derivatives"];
      c.derivatives = CurveSamples::Derivatives{vecs_from_json(d.at("d1"), "d1"), vecs_from_json(d.at("d2"), "d2"),
                                                vecs_from_json(d.at("d3"), "d3")};
      if (c.derivatives->d1.size() != c.size() || c.derivatives->d2.size() != c.size() ||
          c.derivatives->d3.size() != c.size()) {
        throw Error(ErrorCode::ParseError, "derivative arrays do not match the samples");
      }
    }
    c.validate();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, e.what());
  }
  return c;
}

json to_json(const CaseLabel& label) {
  json j;
  j["tag"] = std::string(tag_name(label.tag));
  j["branch"] = std::string(branch_name(label.branch));
  j["g2"] = label.invariants.g2();
  j["g3"] = label.invariants.g3();
  j["discriminant"] = label.invariants.discriminant();
  json p = json::object();
  const auto& cp = label.params;
  const std::pair<const char*, const std::optional<double>*> fields[] = {
      {"q", &cp.q}, {"Q", &cp.Q}, {"P", &cp.P}, {"tau", &cp.tau}, {"E", &cp.E}, {"g3", &cp.g3}};
  for (const auto& [name, v] : fields) {
    if (*v) p[name] = **v;
  }
  j["params"] = std::move(p);
  return j;
}

json to_json(const ClosureSolution& sol) {
  json j;
  j["m"] = sol.m;
  j["n"] = sol.n;
  j["Q"] = round_significant(sol.Q, 10);
  j["w1"] = round_significant(sol.lattice.w1, 10);
  j["w2"] = round_significant(sol.lattice.w2_im, 10);
  j["d"] = round_significant(sol.d, 10);
  return j;
}

json to_json(const PointedParabolaPath& path) {
  json j;
  j["t"] = path.t;
  json lin = json::array(), tr = json::array();
  for (const auto& p : path.linear) lin.push_back(json::array({p.a, p.b, p.c, p.d}));
  for (const auto& v : path.translation) tr.push_back(vec_json(v));
  j["linear"] = std::move(lin);
  j["translation"] = std::move(tr);
  return j;
}

void write_svg(std::ostream& out, const CurveSamples& c, const SvgOptions& opts) {
  c.validate();
  const auto [xmin, xmax] = std::minmax_element(c.x.begin(), c.x.end());
  const auto [ymin, ymax] = std::minmax_element(c.y.begin(), c.y.end());
  const double span = std::max({*xmax - *xmin, *ymax - *ymin, 1e-12});
  const double margin = 0.05 * span;
  const double x0 = *xmin - margin, y1 = *ymax + margin;
  const double w = *xmax - *xmin + 2 * margin, h = *ymax - *ymin + 2 * margin;
  const double scale = opts.width / w;
  const int height = static_cast<int>(std::lround(h * scale));

  auto px = [&](const Vec2& p) { return fmt("%.3f", (p.x() - x0) * scale) + "," + fmt("%.3f", (y1 - p.y()) * scale); };
  auto polyline = [&](const std::vector<Vec2>& pts, const char* cls, bool closed) {
    out << "  <" << (closed ? "polygon" : "polyline") << " class=\"" << cls << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? " " : "") << px(pts[i]);
    out << "\"/>\n";
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!opts.version.empty()) out << "<!-- affine_elastica " << opts.version << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << opts.width << ' ' << height << "\">\n";
  out << "  <style>\n"
         "    .curve { fill: none; stroke: black; stroke-width: 1.2; }\n"
         "    .parabola { fill: none; stroke: #1f4e9c; stroke-width: 0.8; stroke-dasharray: 6 4; }\n"
         "    .conic { fill: none; stroke: #9c1f1f; stroke-width: 0.8; stroke-dasharray: 1.5 3; }\n"
         "    .frame { fill: none; stroke: #2a7d2a; stroke-width: 0.8; }\n"
         "    .mark { fill: black; }\n"
         "  </style>\n";
  if (!opts.title.empty()) out << "  <title>" << opts.title << "</title>\n";

  std::vector<Vec2> pts(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) pts[i] = c.point(i);
  polyline(pts, "curve", c.closed);

  if (!opts.overlays.empty()) {
    const FrameField f = frame_and_curvature(c);
    const std::size_t i = opts.mark ? std::min(*opts.mark, c.size() - 1) : 0;
    const Vec2 g = c.point(i), T = f.T[i], N = f.N[i];
    for (Overlay o : opts.overlays) {
      if (o == Overlay::Frame) {
        const std::size_t step = std::max<std::size_t>(1, c.size() / 24);
        for (std::size_t k = 0; k < c.size(); k += step) {
          const double lt = 0.04 * span / std::max(f.T[k].norm(), 1e-300);
          const double ln = 0.04 * span / std::max(f.N[k].norm(), 1e-300);
          polyline({c.point(k), c.point(k) + lt * f.T[k]}, "frame", false);
          polyline({c.point(k), c.point(k) + ln * f.N[k]}, "frame", false);
        }
        continue;
      }
      const double k = f.kappa[i];
      const bool parabola = o == Overlay::OsculatingParabola || std::abs(k) < 1e-9;
      std::vector<Vec2> conic;
      constexpr int kPts = 400;
      if (parabola) {
        const double tau = std::min(std::sqrt(2.0 * span / std::max(N.norm(), 1e-300)),
                                    span / std::max(T.norm(), 1e-300));
        for (int j = 0; j <= kPts; ++j) {
          const double t = tau * (2.0 * j / kPts - 1.0);
          conic.push_back(g + t * T + 0.5 * t * t * N);
        }
      } else if (k > 0.0) {
        const double r = std::sqrt(k);
        for (int j = 0; j < kPts; ++j) {
          const double th = 2.0 * std::numbers::pi * j / kPts;
          conic.push_back(g + std::sin(th) / r * T + (1.0 - std::cos(th)) / k * N);
        }
      } else {
        const double r = std::sqrt(-k);
        const double tau = std::asinh(span * r / std::max(T.norm(), 1e-300));
        for (int j = 0; j <= kPts; ++j) {
          const double th = tau * (2.0 * j / kPts - 1.0);
          conic.push_back(g + std::sinh(th) / r * T + (1.0 - std::cosh(th)) / k * N);
        }
      }
      polyline(conic, parabola ? "parabola" : "conic", !parabola && k > 0.0);
    }
    out << "  <circle class=\"mark\" cx=\"" << fmt("%.3f", (g.x() - x0) * scale) << "\" cy=\""
        << fmt("%.3f", (y1 - g.y()) * scale) << "\" r=\"2.5\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace affine_elastica
