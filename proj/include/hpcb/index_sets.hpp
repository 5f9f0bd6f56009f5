#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hpcb/decomposition.hpp"
#include "hpcb/error.hpp"
#include "hpcb/multi_index.hpp"

namespace hpcb {

/// Finite, duplicate-free, lexicographically ordered set of multi-indices.
class IndexSet {
 public:
  enum class Kind { HyperbolicCross, DyadicBlockSupport, Explicit };

  IndexSet() = default;

  /// Sorts and deduplicates `members`.
  IndexSet(int dim, std::vector<MultiIndex> members, Kind kind = Kind::Explicit)
      : dim_(dim), kind_(kind), members_(std::move(members)) {
    for (const auto& m : members_) require_same_dim(m, dim_);
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  long cross_level() const { return cross_level_; }
  const MultiIndex& block_level() const { return block_level_; }
  const std::vector<MultiIndex>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  bool contains(const MultiIndex& k) const { return std::binary_search(members_.begin(), members_.end(), k); }

  /// Largest |k_i| over all members and axes.
  int max_abs() const {
    int m = 0;
    for (const auto& k : members_) m = std::max(m, k.max_abs());
    return m;
  }

  bool all_nonnegative() const {
    return std::all_of(members_.begin(), members_.end(), [](const MultiIndex& k) { return k.min_entry() >= 0; });
  }

  /// Image under componentwise |.|, deduplicated.
  IndexSet abs_image() const {
    std::vector<MultiIndex> out;
    out.reserve(members_.size());
    for (const auto& k : members_) out.push_back(k.abs());
    IndexSet s(dim_, std::move(out), kind_);
    s.cross_level_ = cross_level_;
    s.block_level_ = block_level_;
    return s;
  }

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::HyperbolicCross: return "hyperbolic_cross";
      case Kind::DyadicBlockSupport: return "dyadic_block";
      case Kind::Explicit: return "explicit";
    }
    return "explicit";
  }

  /// Line format: header `# d=<d> kind=<kind> N=<N>`, then one index per line.
  void write(std::ostream& os) const {
    os << "# d=" << dim_ << " kind=" << kind_name(kind_) << " N=" << cross_level_;
    if (kind_ == Kind::DyadicBlockSupport) {
      os << " j=";
      for (int i = 0; i < block_level_.dim(); ++i) os << (i ? "," : "") << block_level_[i];
    }
    os << '\n';
    for (const auto& k : members_) {
      for (int i = 0; i < k.dim(); ++i) os << (i ? " " : "") << k[i];
      os << '\n';
    }
  }

  static IndexSet read(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw ConfigError("index set: missing header");
    int dim = -1;
    long n = 0;
    Kind kind = Kind::Explicit;
    MultiIndex block;
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw ConfigError("index set: malformed header token " + tok);
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "d") {
        dim = std::stoi(val);
      } else if (key == "N") {
        n = std::stol(val);
      } else if (key == "kind") {
        if (val == "hyperbolic_cross") kind = Kind::HyperbolicCross;
        else if (val == "dyadic_block") kind = Kind::DyadicBlockSupport;
        else if (val == "explicit") kind = Kind::Explicit;
        else throw ConfigError("index set: unknown kind " + val);
      } else if (key == "j") {
        std::vector<int> e;
        std::istringstream js(val);
        std::string part;
        while (std::getline(js, part, ',')) e.push_back(std::stoi(part));
        block = MultiIndex(std::move(e));
      }
    }
    if (dim < 1) throw ConfigError("index set: missing dimension");
    std::vector<MultiIndex> members;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<int> e;
      int v;
      while (ls >> v) e.push_back(v);
      if (static_cast<int>(e.size()) != dim) throw ConfigError("index set: wrong entry count in line: " + line);
      members.emplace_back(std::move(e));
    }
    IndexSet s(dim, std::move(members), kind);
    s.cross_level_ = n;
    s.block_level_ = block;
    return s;
  }

  friend IndexSet hyperbolic_cross(long n, int dim, bool signed_set);
  friend IndexSet dyadic_support(const MultiIndex& level, const DecompositionOfUnity& decomp);

 private:
  int dim_ = 0;
  Kind kind_ = Kind::Explicit;
  long cross_level_ = 0;
  MultiIndex block_level_;
  std::vector<MultiIndex> members_;
};

namespace detail {
inline void enumerate_cross(long budget, int axis, bool signed_set, std::vector<int>& current,
                            std::vector<MultiIndex>& out) {
  if (axis == static_cast<int>(current.size())) {
    out.emplace_back(current);
    return;
  }
  const long kmax = budget - 1;
  const long kmin = signed_set ? -kmax : 0;
  for (long k = kmin; k <= kmax; ++k) {
    current[axis] = static_cast<int>(k);
    enumerate_cross(budget / (1 + std::labs(k)), axis + 1, signed_set, current, out);
  }
}
}  // namespace detail

/// { k in Z^d : prod(1+|k_i|) <= N } (signed) or its image in N_0^d.
inline IndexSet hyperbolic_cross(long n, int dim, bool signed_set) {
  if (n < 1 || dim < 1) throw ConfigError("hyperbolic_cross requires N >= 1 and d >= 1");
  std::vector<MultiIndex> out;
  std::vector<int> current(dim, 0);
  // Per-coordinate budget recursion: a*b <= N iff b <= floor(N/a) for positive integers.
  detail::enumerate_cross(n, 0, signed_set, current, out);
  IndexSet s(dim, std::move(out), IndexSet::Kind::HyperbolicCross);
  s.cross_level_ = n;
  return s;
}

struct CrossCardinalityRow {
  long n;
  std::size_t size;
  double ratio;  // |Gamma_N| / (N (1 + log N)^{d-1})
};

inline std::vector<CrossCardinalityRow> cross_cardinality_check(const std::vector<long>& n_list, int dim) {
  std::vector<CrossCardinalityRow> rows;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ConfigError("cross_cardinality_check: N list must increase");
    const long n = n_list[i];
    const auto size = hyperbolic_cross(n, dim, true).size();
    const double denom = static_cast<double>(n) * std::pow(1.0 + std::log(static_cast<double>(n)), dim - 1);
    rows.push_back({n, size, static_cast<double>(size) / denom});
  }
  return rows;
}

/// All k in N_0^d with phi_j(k) != 0.
inline IndexSet dyadic_support(const MultiIndex& level, const DecompositionOfUnity& decomp) {
  const int dim = level.dim();
  if (dim < 1 || level.min_entry() < 0) throw ConfigError("dyadic_support requires a nonnegative level");
  std::vector<std::vector<int>> axis_support(dim);
  for (int i = 0; i < dim; ++i) {
    const int j = level[i];
    for (int k = DecompositionOfUnity::support_lo(j); k <= DecompositionOfUnity::support_hi(j); ++k)
      if (decomp.phi(j, static_cast<double>(k)) != 0.0) axis_support[i].push_back(k);
  }
  std::vector<MultiIndex> out;
  std::vector<int> current(dim, 0);
  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == dim) {
      out.emplace_back(current);
      return;
    }
    for (int k : axis_support[axis]) {
      current[axis] = k;
      self(self, axis + 1);
    }
  };
  rec(rec, 0);
  IndexSet s(dim, std::move(out), IndexSet::Kind::DyadicBlockSupport);
  s.block_level_ = level;
  return s;
}

/// Sorted per-axis integer range product [lo_i, hi_i].
inline IndexSet box(const std::vector<int>& lo, const std::vector<int>& hi) {
  const int dim = static_cast<int>(lo.size());
  std::vector<MultiIndex> out;
  std::vector<int> current(lo);
  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == dim) {
      out.emplace_back(current);
      return;
    }
    for (int k = lo[axis]; k <= hi[axis]; ++k) {
      current[axis] = k;
      self(self, axis + 1);
    }
  };
  rec(rec, 0);
  return IndexSet(dim, std::move(out));
}

}  // namespace hpcb
