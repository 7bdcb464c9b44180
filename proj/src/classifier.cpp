#include "affine_elastica/classifier.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include "affine_elastica/error.hpp"

namespace affine_elastica {

namespace {

constexpr std::array<std::pair<CaseTag, std::string_view>, 17> kTagNames{{
    {CaseTag::A1, "A1"},
    {CaseTag::A2, "A2"},
    {CaseTag::A3, "A3"},
    {CaseTag::B1, "B1"},
    {CaseTag::B2, "B2"},
    {CaseTag::B3, "B3"},
    {CaseTag::C1, "C1"},
    {CaseTag::C2, "C2"},
    {CaseTag::C3, "C3"},
    {CaseTag::C4, "C4"},
    {CaseTag::C5, "C5"},
    {CaseTag::Da, "Da"},
    {CaseTag::Dc, "Dc"},
    {CaseTag::E_case, "E"},
    {CaseTag::F, "F"},
    {CaseTag::G, "G"},
    {CaseTag::Ellipse, "ellipse"},
}};

std::string normalise(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '.' || ch == '_' || ch == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

}  // namespace

std::string_view tag_name(CaseTag tag) {
  for (const auto& [t, name] : kTagNames) {
    if (t == tag) return name;
  }
  return "?";
}

std::optional<CaseTag> parse_tag(std::string_view name) {
  std::string key = normalise(name);
  if (key == "ecase") key = "e";
  for (const auto& [t, n] : kTagNames) {
    if (normalise(n) == key) return t;
  }
  return std::nullopt;
}

std::string_view branch_name(Branch b) { return b == Branch::Closed ? "closed" : "open"; }

std::optional<Branch> parse_branch(std::string_view name) {
  const std::string key = normalise(name);
  if (key == "closed" || key == "closedbranch") return Branch::Closed;
  if (key == "open" || key == "openbranch") return Branch::Open;
  return std::nullopt;
}

CaseLabel classify(const Invariants& inv, Branch branch) {
  CaseLabel label;
  label.invariants = inv;
  label.branch = branch;
  const double g2 = inv.g2(), g3 = inv.g3();

  if (std::abs(g2) < 1e-14 && std::abs(g3) < 1e-14) {
    label.tag = CaseTag::G;
    return label;
  }
  const bool g2_zero = std::abs(g2) <= 1e-10 * std::cbrt(g3 * g3);
  if (!g2_zero && inv.degenerate()) {
    const double E = std::cbrt(g3);
    label.params.E = E;
    if (g3 < 0.0) {
      label.tag = branch == Branch::Closed ? CaseTag::Dc : CaseTag::Da;
    } else {
      label.tag = branch == Branch::Closed ? CaseTag::Ellipse : CaseTag::E_case;
    }
    return label;
  }
  if (branch == Branch::Closed && (g2_zero || inv.discriminant() < 0.0)) {
    throw Error(ErrorCode::BranchUnavailable,
                "the phase cubic has no closed component when the discriminant is negative");
  }
  if (g2_zero) {
    label.tag = CaseTag::F;
    label.params.g3 = g3;
    return label;
  }

  const auto roots = cubic_roots(inv);
  if (inv.discriminant() > 0.0) {
    // Curvature values -6 e_i, increasing: P < q < Q.
    const double P = -6.0 * roots[0].real();
    const double q = -6.0 * roots[1].real();
    const double Q = -6.0 * roots[2].real();
    if (branch == Branch::Closed) {
      label.params.q = q;
      label.params.Q = Q;
      if (std::abs(q) < kZeroRootTol * std::abs(Q)) {
        label.params.q = 0.0;
        label.tag = CaseTag::A2;
      } else {
        label.tag = q > 0.0 ? CaseTag::A1 : CaseTag::A3;
      }
      return label;
    }
    const double qn = q / std::abs(P);
    label.params.P = P;
    label.params.q = qn;
    label.params.Q = 1.0 - qn;
    if (qn >= 0.5) {
      std::ostringstream os;
      os << "normalised q = " << qn << " is not below 1/2";
      throw Error(ErrorCode::InvalidParameter, os.str());
    }
    if (std::abs(qn) < kZeroRootTol) {
      label.params.q = 0.0;
      label.params.Q = 1.0;
      label.tag = CaseTag::B2;
    } else {
      label.tag = qn > 0.0 ? CaseTag::B1 : CaseTag::B3;
    }
    return label;
  }

  const double P = -6.0 * roots[1].real();
  const double tau = 6.0 * std::abs(roots[0].imag());
  label.params.P = P;
  label.params.tau = tau;
  if (std::abs(P) < kZeroRootTol * tau) {
    label.params.P = 0.0;
    label.tag = CaseTag::C3;
    return label;
  }
  const bool wide = tau / std::abs(P) > std::sqrt(3.0) / 2.0;
  if (P > 0.0) {
    label.tag = wide ? CaseTag::C1 : CaseTag::C2;
  } else {
    label.tag = wide ? CaseTag::C4 : CaseTag::C5;
  }
  return label;
}

Invariants rescale(const Invariants& inv, double lambda) {
  const double l2 = lambda * lambda;
  return Invariants(inv.g2() * l2 * l2, inv.g3() * l2 * l2 * l2);
}

NormalForm rescale_to_normal_form(const Invariants& inv, const CaseLabel& label) {
  double l2 = 1.0;
  const auto& p = label.params;
  switch (label.tag) {
    case CaseTag::A1:
    case CaseTag::A3:
      l2 = 1.0 / std::abs(*p.q);
      break;
    case CaseTag::A2:
      l2 = 1.0 / *p.Q;
      break;
    case CaseTag::B1:
    case CaseTag::B2:
    case CaseTag::B3:
    case CaseTag::C1:
    case CaseTag::C2:
    case CaseTag::C4:
    case CaseTag::C5:
      l2 = 1.0 / std::abs(*p.P);
      break;
    case CaseTag::C3:
      l2 = 1.0 / *p.tau;
      break;
    case CaseTag::Da:
    case CaseTag::Dc:
    case CaseTag::E_case:
    case CaseTag::Ellipse:
      l2 = 1.0 / std::abs(*p.E);
      break;
    case CaseTag::F:
      l2 = std::pow(std::abs(*p.g3), -1.0 / 3.0);
      break;
    case CaseTag::G:
      break;
  }
  NormalForm out;
  out.scale = std::sqrt(l2);
  Invariants scaled = rescale(inv, out.scale);
  // Snap the exactly representable normal forms.
  if (label.tag == CaseTag::F) scaled = Invariants(0.0, *p.g3 > 0 ? 1.0 : -1.0);
  if (label.tag == CaseTag::Da || label.tag == CaseTag::Dc || label.tag == CaseTag::E_case ||
      label.tag == CaseTag::Ellipse) {
    const double s = *p.E > 0 ? 1.0 : -1.0;
    scaled = Invariants(3.0, s);
  }
  out.normalized = classify(scaled, label.branch);
  return out;
}

}  // namespace affine_elastica
