#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affine_elastica/classifier.hpp"
#include "affine_elastica/curve.hpp"
#include "affine_elastica/fullaffine.hpp"
#include "affine_elastica/synthesis.hpp"

namespace affine_elastica {

/// Decimal text with 17 significant digits, enough to read back the same
/// double.
std::string format_double(double v);

/// Header "s,x,y", plus "x1,y1,x2,y2,x3,y3" when derivative data is present,
/// then one line per sample. LF endings.
void write_csv(std::ostream& out, const CurveSamples& c);

/// Reads what write_csv writes. Columns are found by name; s, x, y are
/// required and the derivative columns are taken when all six are there.
/// Without `closed` the curve counts as closed when the gap from the last
/// sample back to the first looks like one more step. Throws ParseError.
CurveSamples read_csv(std::istream& in, std::optional<bool> closed = std::nullopt);

/// Closed when the step from the last point to the first is no longer than
/// 1.5 times the longest step between neighbours.
bool looks_closed(std::span<const double> x, std::span<const double> y);

nlohmann::json to_json(const CurveSamples& c);
/// Throws ParseError on missing or inconsistent fields.
CurveSamples curve_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CaseLabel& label);

/// Table fields m, n, Q, w1, w2, d rounded to 10 significant digits.
nlohmann::json to_json(const ClosureSolution& sol);

/// {"t": [...], "linear": [[a, b, c, d], ...], "translation": [[x, y], ...]}
nlohmann::json to_json(const PointedParabolaPath& path);

/// v rounded to the given number of significant digits.
double round_significant(double v, int digits);

enum class Overlay { OsculatingParabola, OsculatingConic, Frame };

struct SvgOptions {
  int width = 640;
  /// Node at which the overlays are drawn.
  std::optional<std::size_t> mark;
  std::vector<Overlay> overlays;
  std::string title;
  /// Written into a comment; the rest of the document depends only on the
  /// curve and the options.
  std::string version;
};

/// Polyline of the curve in a viewport fitted to its bounding box with a
/// 5% margin. Osculating parabolas are dashed, conics dotted.
void write_svg(std::ostream& out, const CurveSamples& c, const SvgOptions& opts = {});

}  // namespace affine_elastica
