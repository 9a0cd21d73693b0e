#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"

namespace equicalib {

struct GroupElement {
  int index = 0;
  std::string description;
};

/// x -> linear * x + offset, applied to every row of a point.
struct AffineAction {
  Matrix linear;
  Vector offset;
};

/// Row permutation: output row i is input row `perm[i]`.
struct RowPermutation {
  std::vector<int> perm;
};

using InputAction = std::variant<AffineAction, RowPermutation>;

enum class Side { input, output };

/// Finite group given by an explicit element list with an input action on
/// dataset points and an optional linear output representation. The
/// constructor builds the Cayley table and rejects element lists that are not
/// closed, lack an identity, or lack inverses.
class FiniteGroup {
public:
  static constexpr double kMatrixTolerance = 1e-12;

  FiniteGroup(std::string name, std::vector<GroupElement> elements, std::vector<InputAction> input,
              std::optional<std::vector<Matrix>> output = std::nullopt)
      : name_(std::move(name)), elements_(std::move(elements)), input_(std::move(input)),
        output_(std::move(output)) {
    if (elements_.empty()) throw UsageError("group must have at least one element");
    if (input_.size() != elements_.size()) throw UsageError("input representation size mismatch");
    if (output_ && output_->size() != elements_.size()) {
      throw UsageError("output representation size mismatch");
    }
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      if (elements_[i].index != static_cast<int>(i)) throw UsageError("element indices must be 0..n-1");
    }
    build_tables();
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t order() const noexcept { return elements_.size(); }
  [[nodiscard]] const std::vector<GroupElement>& elements() const noexcept { return elements_; }
  [[nodiscard]] const GroupElement& element(std::size_t g) const { return elements_.at(g); }
  [[nodiscard]] const InputAction& input_action(std::size_t g) const { return input_.at(g); }
  [[nodiscard]] bool has_output_rep() const noexcept { return output_.has_value(); }
  [[nodiscard]] const Matrix& output_rep(std::size_t g) const {
    if (!output_) throw UsageError("group '" + name_ + "' has no output representation");
    return output_->at(g);
  }

  [[nodiscard]] std::size_t identity() const noexcept { return identity_; }
  /// Index of g*h, where (g*h)x = g(h x).
  [[nodiscard]] std::size_t compose(std::size_t g, std::size_t h) const {
    return table_.at(g * order() + h);
  }
  [[nodiscard]] std::size_t inverse(std::size_t g) const { return inverse_.at(g); }

  /// Same group acting trivially on `output_dim`-dimensional outputs (the
  /// invariant case).
  [[nodiscard]] FiniteGroup invariant(Eigen::Index output_dim) const {
    std::vector<Matrix> ids(order(), Matrix::Identity(output_dim, output_dim));
    return FiniteGroup(name_ + "/invariant", elements_, input_, std::move(ids));
  }

  [[nodiscard]] Point apply(std::size_t g, const Point& x) const {
    const auto& act = input_.at(g);
    if (const auto* aff = std::get_if<AffineAction>(&act)) {
      if (x.cols() != aff->linear.cols()) {
        throw UsageError("shape mismatch: point has " + std::to_string(x.cols()) +
                         " columns, representation acts on " + std::to_string(aff->linear.cols()));
      }
      if (g == identity_) return x;
      Point y = x * aff->linear.transpose();
      y.rowwise() += aff->offset.transpose();
      return y;
    }
    const auto& perm = std::get<RowPermutation>(act).perm;
    if (x.rows() != static_cast<Eigen::Index>(perm.size())) {
      throw UsageError("shape mismatch: point has " + std::to_string(x.rows()) +
                       " rows, permutation acts on " + std::to_string(perm.size()));
    }
    if (g == identity_) return x;
    Point y(x.rows(), x.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = x.row(perm[i]);
    return y;
  }

  [[nodiscard]] Vector apply_output(std::size_t g, const Vector& y) const {
    const Matrix& rho = output_rep(g);
    if (rho.cols() != y.size()) throw UsageError("shape mismatch on output representation");
    if (g == identity_) return y;
    return rho * y;
  }

  /// apply() dispatched on side; output side takes the single-row point as a vector.
  [[nodiscard]] Point apply(std::size_t g, const Point& x, Side side) const {
    if (side == Side::input) return apply(g, x);
    if (x.rows() != 1) throw UsageError("output-side action expects a vector");
    return row_point(apply_output(g, x.row(0).transpose()));
  }

private:
  static bool same_action(const InputAction& a, const InputAction& b) {
    if (a.index() != b.index()) return false;
    if (const auto* pa = std::get_if<RowPermutation>(&a)) {
      return pa->perm == std::get<RowPermutation>(b).perm;
    }
    const auto& x = std::get<AffineAction>(a);
    const auto& y = std::get<AffineAction>(b);
    return x.linear.rows() == y.linear.rows() && x.linear.cols() == y.linear.cols() &&
           (x.linear - y.linear).cwiseAbs().maxCoeff() <= kMatrixTolerance &&
           (x.offset - y.offset).cwiseAbs().maxCoeff() <= kMatrixTolerance;
  }

  static InputAction compose_actions(const InputAction& g, const InputAction& h) {
    if (g.index() != h.index()) throw UsageError("mixed action kinds in one group");
    if (const auto* pg = std::get_if<RowPermutation>(&g)) {
      const auto& ph = std::get<RowPermutation>(h).perm;
      if (ph.size() != pg->perm.size()) throw UsageError("permutation size mismatch");
      RowPermutation out{std::vector<int>(ph.size())};
      for (std::size_t i = 0; i < ph.size(); ++i) out.perm[i] = ph[pg->perm[i]];
      return out;
    }
    const auto& ag = std::get<AffineAction>(g);
    const auto& ah = std::get<AffineAction>(h);
    return AffineAction{ag.linear * ah.linear, ag.linear * ah.offset + ag.offset};
  }

  static bool is_identity(const InputAction& a) {
    if (const auto* p = std::get_if<RowPermutation>(&a)) {
      for (std::size_t i = 0; i < p->perm.size(); ++i) {
        if (p->perm[i] != static_cast<int>(i)) return false;
      }
      return true;
    }
    const auto& aff = std::get<AffineAction>(a);
    return (aff.linear - Matrix::Identity(aff.linear.rows(), aff.linear.cols())).cwiseAbs().maxCoeff() <=
               kMatrixTolerance &&
           (aff.offset.size() == 0 || aff.offset.cwiseAbs().maxCoeff() <= kMatrixTolerance);
  }

  void build_tables() {
    const std::size_t n = order();
    std::optional<std::size_t> id;
    for (std::size_t g = 0; g < n; ++g) {
      if (is_identity(input_[g])) {
        id = g;
        break;
      }
    }
    if (!id) throw UsageError("group '" + name_ + "' has no identity element");
    identity_ = *id;
    if (output_) {
      const Matrix& r = (*output_)[identity_];
      if ((r - Matrix::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff() > kMatrixTolerance) {
        throw UsageError("output representation of the identity is not the identity");
      }
    }
    table_.assign(n * n, 0);
    inverse_.assign(n, n);
    for (std::size_t g = 0; g < n; ++g) {
      for (std::size_t h = 0; h < n; ++h) {
        const InputAction gh = compose_actions(input_[g], input_[h]);
        std::optional<std::size_t> found;
        for (std::size_t k = 0; k < n; ++k) {
          if (same_action(gh, input_[k])) {
            found = k;
            break;
          }
        }
        if (!found) {
          throw UsageError("group '" + name_ + "' is not closed: " + elements_[g].description + " * " +
                           elements_[h].description);
        }
        table_[g * n + h] = *found;
        if (*found == identity_) inverse_[g] = h;
      }
      if (inverse_[g] == n) throw UsageError("element " + elements_[g].description + " has no inverse");
    }
  }

  std::string name_;
  std::vector<GroupElement> elements_;
  std::vector<InputAction> input_;
  std::optional<std::vector<Matrix>> output_;
  std::size_t identity_ = 0;
  std::vector<std::size_t> table_;
  std::vector<std::size_t> inverse_;
};

enum class GroupFamily { cyclic, dihedral, symmetric, reflect_x, z_swap };

struct GroupDescriptor {
  GroupFamily family = GroupFamily::cyclic;
  int order = 1;   // n for cyclic/dihedral/symmetric; ignored otherwise
  int dim = 2;     // ambient dimension of the rows the group acts on
  bool output_rep = true; // natural (same-matrix) output rep for rotation/reflection families
};

namespace detail {

// cos/sin of 2*pi*k/n, exact at multiples of a quarter turn.
inline std::pair<double, double> turn(int k, int n) {
  const int m = ((k % n) + n) % n;
  if ((4 * m) % n == 0) {
    switch ((4 * m) / n) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, -1.0};
      default: break;
    }
  }
  const double a = 2.0 * std::numbers::pi * m / n;
  return {std::cos(a), std::sin(a)};
}

inline Matrix planar_rotation(int k, int n, int dim) {
  Matrix r = Matrix::Identity(dim, dim);
  const auto [c, s] = turn(k, n);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

inline Matrix reflect_x(int dim) {
  Matrix r = Matrix::Identity(dim, dim);
  r(1, 1) = -1.0;
  return r;
}

inline std::string degrees(int k, int n) {
  std::ostringstream os;
  os << 360.0 * k / n;
  return os.str();
}

inline std::string cycle_notation(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  std::string out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i] || perm[i] == static_cast<int>(i)) continue;
    out += "(";
    std::size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) out += " ";
      out += std::to_string(j + 1);
      first = false;
      j = static_cast<std::size_t>(perm[j]);
    }
    out += ")";
  }
  return out.empty() ? "id" : out;
}

} // namespace detail

inline FiniteGroup build_group(const GroupDescriptor& d) {
  std::vector<GroupElement> els;
  std::vector<InputAction> acts;
  std::vector<Matrix> outs;
  auto add = [&](std::string desc, InputAction act, Matrix out) {
    els.push_back({static_cast<int>(els.size()), std::move(desc)});
    acts.push_back(std::move(act));
    outs.push_back(std::move(out));
  };
  switch (d.family) {
    case GroupFamily::cyclic:
    case GroupFamily::dihedral: {
      if (d.order < 1) throw UsageError("group order must be >= 1");
      if (d.dim < 2) throw UsageError("rotation groups need dim >= 2");
      const Vector zero = Vector::Zero(d.dim);
      for (int k = 0; k < d.order; ++k) {
        Matrix r = detail::planar_rotation(k, d.order, d.dim);
        add("rot " + detail::degrees(k, d.order) + "deg", AffineAction{r, zero}, r);
      }
      if (d.family == GroupFamily::dihedral) {
        for (int k = 0; k < d.order; ++k) {
          Matrix r = detail::planar_rotation(k, d.order, d.dim) * detail::reflect_x(d.dim);
          add("rot " + detail::degrees(k, d.order) + "deg . reflect-x", AffineAction{r, zero}, r);
        }
      }
      break;
    }
    case GroupFamily::reflect_x: {
      if (d.dim < 2) throw UsageError("reflect-x needs dim >= 2");
      const Vector zero = Vector::Zero(d.dim);
      add("id", AffineAction{Matrix::Identity(d.dim, d.dim), zero}, Matrix::Identity(d.dim, d.dim));
      add("reflect-x", AffineAction{detail::reflect_x(d.dim), zero}, detail::reflect_x(d.dim));
      break;
    }
    case GroupFamily::z_swap: {
      if (d.dim < 1) throw UsageError("z-swap needs dim >= 1");
      Matrix flip = Matrix::Identity(d.dim, d.dim);
      flip(d.dim - 1, d.dim - 1) = -1.0;
      Vector shift = Vector::Zero(d.dim);
      shift(d.dim - 1) = 1.0;
      add("id", AffineAction{Matrix::Identity(d.dim, d.dim), Vector::Zero(d.dim)}, Matrix::Identity(1, 1));
      add("z-swap", AffineAction{flip, shift}, Matrix::Identity(1, 1));
      break;
    }
    case GroupFamily::symmetric: {
      if (d.order < 1) throw UsageError("group order must be >= 1");
      if (d.order > 8) throw UsageError("symmetric group S_n limited to n <= 8 (n! elements)");
      std::vector<int> perm(static_cast<std::size_t>(d.order));
      for (int i = 0; i < d.order; ++i) perm[static_cast<std::size_t>(i)] = i;
      do {
        add(detail::cycle_notation(perm), RowPermutation{perm}, Matrix::Identity(1, 1));
      } while (std::next_permutation(perm.begin(), perm.end()));
      break;
    }
  }
  std::string name;
  switch (d.family) {
    case GroupFamily::cyclic: name = "cyclic:" + std::to_string(d.order); break;
    case GroupFamily::dihedral: name = "dihedral:" + std::to_string(d.order); break;
    case GroupFamily::symmetric: name = "symmetric:" + std::to_string(d.order); break;
    case GroupFamily::reflect_x: name = "reflect-x"; break;
    case GroupFamily::z_swap: name = "z-swap"; break;
  }
  const bool natural = d.output_rep && (d.family == GroupFamily::cyclic ||
                                        d.family == GroupFamily::dihedral ||
                                        d.family == GroupFamily::reflect_x);
  if (natural) return FiniteGroup(std::move(name), std::move(els), std::move(acts), std::move(outs));
  return FiniteGroup(std::move(name), std::move(els), std::move(acts));
}

/// Parses `cyclic:<n>`, `dihedral:<n>`, `symmetric:<n>`, `reflect-x`, `z-swap`.
inline GroupDescriptor parse_group_descriptor(std::string_view text, int dim = 2) {
  GroupDescriptor d;
  d.dim = dim;
  const auto colon = text.find(':');
  const std::string_view family = text.substr(0, colon);
  auto parse_order = [&]() {
    if (colon == std::string_view::npos) {
      throw UsageError("group descriptor '" + std::string(text) + "' needs an order, e.g. cyclic:4");
    }
    const std::string_view num = text.substr(colon + 1);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw UsageError("bad group order in '" + std::string(text) + "'");
    }
    return n;
  };
  if (family == "cyclic") {
    d.family = GroupFamily::cyclic;
    d.order = parse_order();
  } else if (family == "dihedral") {
    d.family = GroupFamily::dihedral;
    d.order = parse_order();
  } else if (family == "symmetric") {
    d.family = GroupFamily::symmetric;
    d.order = parse_order();
  } else if (family == "reflect-x" && colon == std::string_view::npos) {
    d.family = GroupFamily::reflect_x;
    d.order = 2;
  } else if (family == "z-swap" && colon == std::string_view::npos) {
    d.family = GroupFamily::z_swap;
    d.order = 2;
  } else {
    throw UsageError("unsupported group descriptor '" + std::string(text) +
                     "' (expected cyclic:<n>, dihedral:<n>, symmetric:<n>, reflect-x, z-swap)");
  }
  if (d.order < 1) throw UsageError("group order must be >= 1");
  return d;
}

inline FiniteGroup build_group(std::string_view descriptor, int dim = 2) {
  return build_group(parse_group_descriptor(descriptor, dim));
}

} // namespace equicalib
