#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hpcb/approx_recovery.hpp"
#include "hpcb/besov_norms.hpp"
#include "hpcb/chui_wang.hpp"
#include "hpcb/error.hpp"
#include "hpcb/hpc_transform.hpp"
#include "hpcb/qmc_cubature.hpp"
#include "hpcb/test_corpus.hpp"

namespace hpcb {

// ---------------------------------------------------------------- configuration

enum class Command { Coeffs, Norms, Cubature, Approx, Recover, Identities };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names = {
      {Command::Coeffs, "coeffs"}, {Command::Norms, "norms"},     {Command::Cubature, "cubature"},
      {Command::Approx, "approx"}, {Command::Recover, "recover"}, {Command::Identities, "identities"}};
  return names;
}

inline std::string command_name(Command c) {
  for (const auto& [cmd, name] : command_names())
    if (cmd == c) return name;
  return "?";
}

inline Command parse_command(std::string_view s) {
  for (const auto& [cmd, name] : command_names())
    if (name == s) return cmd;
  throw ConfigError("unknown command '" + std::string(s) + "'");
}

enum class ParamType { Int, Real, Flag, Text };
using ParamValue = std::variant<bool, long, double, std::string>;

struct ParamSpec {
  std::string name;
  ParamType type;
  std::optional<ParamValue> fallback;  // absent: no default
  std::string help;
};

/// Parameters accepted by a command, in the order they appear in CSV headers.
inline const std::vector<ParamSpec>& command_schema(Command c) {
  using T = ParamType;
  auto with_common = [](std::vector<ParamSpec> v) {
    v.push_back({"seed", T::Int, std::nullopt, "RNG seed; mandatory for randomized runs"});
    v.push_back({"out", T::Text, std::string(), "output CSV path (stdout when empty)"});
    v.push_back({"gnuplot", T::Flag, false, "also write a gnuplot script next to the CSV"});
    return v;
  };
  static const std::map<Command, std::vector<ParamSpec>> schemas = {
      {Command::Coeffs, with_common({
                            {"fn", T::Text, std::nullopt, "test function name"},
                            {"d", T::Int, 0L, "dimension (0: taken from the name)"},
                            {"N", T::Int, 16L, "hyperbolic cross size"},
                            {"source", T::Text, std::string("auto"), "auto, closed or grid"},
                            {"level", T::Int, -1L, "grid level for the grid source (-1: smallest safe)"},
                            {"decay", T::Int, 0L, "also tabulate |c_k| prod <k_i>^2 up to this |k|_inf"},
                        })},
      {Command::Norms, with_common({
                           {"fn", T::Text, std::string(), "piecewise tensor test function"},
                           {"d", T::Int, 0L, "dimension (0: taken from the name, 2 if ambiguous)"},
                           {"r", T::Real, 1.5, "smoothness"},
                           {"p", T::Real, 2.0, "integrability"},
                           {"q", T::Real, 2.0, "summability"},
                           {"compare", T::Text, std::string("cw,diff,hpc"), "norms to evaluate"},
                           {"J", T::Int, 12L, "Chui-Wang truncation level"},
                           {"J_hpc", T::Int, 14L, "hpc block truncation level"},
                           {"J_diff", T::Int, 8L, "difference seminorm truncation level"},
                           {"m", T::Int, 3L, "difference order"},
                           {"band", T::Flag, false, "run the norm-equivalence band experiment instead"},
                       })},
      {Command::Cubature, with_common({
                              {"fn", T::Text, std::nullopt, "test function name"},
                              {"d", T::Int, 2L, "dimension"},
                              {"rule", T::Text, std::string("fibonacci"), "fibonacci, lattice, net or net2"},
                              {"tent", T::Flag, false, "tent-transform the nodes"},
                              {"nmin", T::Int, 0L, "smallest family parameter (0: family default)"},
                              {"nmax", T::Int, 0L, "largest family parameter (0: family default)"},
                              {"generator", T::Text, std::string(), "comma separated lattice generator"},
                              {"shifts", T::Int, 0L, "random shifts averaged per size"},
                              {"skip", T::Int, 2L, "sizes excluded from the start of the fit"},
                          })},
      {Command::Approx, with_common({
                            {"fn", T::Text, std::nullopt, "test function name"},
                            {"d", T::Int, 0L, "dimension (0: taken from the name)"},
                            {"nmin", T::Int, 2L, "smallest log2 N"},
                            {"nmax", T::Int, 10L, "largest log2 N"},
                            {"p", T::Real, 2.0, "error norm exponent"},
                            {"skip", T::Int, 2L, "sizes excluded from the start of the fit"},
                        })},
      {Command::Recover, with_common({
                             {"fn", T::Text, std::nullopt, "test function name"},
                             {"d", T::Int, 0L, "dimension (0: taken from the name)"},
                             {"nmin", T::Int, 1L, "smallest log2 N"},
                             {"nmax", T::Int, 6L, "largest log2 N"},
                             {"oversampling", T::Real, 4.0, "factor in m = c n (1 + ln n)"},
                             {"skip", T::Int, 2L, "sizes excluded from the start of the fit"},
                             {"samples", T::Text, std::string(), "recover from this sample CSV instead"},
                             {"N", T::Int, 16L, "hyperbolic cross size for --samples"},
                         })},
      {Command::Identities, with_common({
                                {"d", T::Int, 0L, "dimension (0: 1, 2 and 3)"},
                                {"count", T::Int, 50L, "random polynomials per identity and dimension"},
                            })},
  };
  return schemas.at(c);
}

namespace detail {
inline std::string type_name(ParamType t) {
  switch (t) {
    case ParamType::Int: return "integer";
    case ParamType::Real: return "number";
    case ParamType::Flag: return "boolean";
    case ParamType::Text: return "string";
  }
  return "?";
}

inline std::string format_value(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<X, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<X, double>) {
          std::ostringstream s;
          s << std::setprecision(17) << x;
          return s.str();
        } else {
          return std::to_string(x);
        }
      },
      v);
}
}  // namespace detail

/// A command plus typed parameters checked against its schema.
class ExperimentConfig {
 public:
  explicit ExperimentConfig(Command c) : command_(c) {}

  Command command() const { return command_; }

  void set(const std::string& name, ParamValue v) {
    const auto& spec = find(name);
    // integral values are accepted for real parameters
    if (spec.type == ParamType::Real && std::holds_alternative<long>(v)) v = static_cast<double>(std::get<long>(v));
    const bool ok = (spec.type == ParamType::Int && std::holds_alternative<long>(v)) ||
                    (spec.type == ParamType::Real && std::holds_alternative<double>(v)) ||
                    (spec.type == ParamType::Flag && std::holds_alternative<bool>(v)) ||
                    (spec.type == ParamType::Text && std::holds_alternative<std::string>(v));
    if (!ok) throw ConfigError("parameter '" + name + "' expects a " + detail::type_name(spec.type));
    values_[name] = std::move(v);
  }

  void set_from_string(const std::string& name, const std::string& text) {
    const auto& spec = find(name);
    auto fail = [&] { throw ConfigError("parameter '" + name + "': cannot parse '" + text + "'"); };
    switch (spec.type) {
      case ParamType::Int: {
        long v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) fail();
        set(name, v);
        break;
      }
      case ParamType::Real: {
        if (text == "inf") {
          set(name, kInf);
          break;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(text, &used);
        } catch (const std::exception&) {
          fail();
        }
        if (used != text.size()) fail();
        set(name, v);
        break;
      }
      case ParamType::Flag:
        if (text == "true" || text == "1") {
          set(name, true);
        } else if (text == "false" || text == "0") {
          set(name, false);
        } else {
          fail();
        }
        break;
      case ParamType::Text: set(name, text); break;
    }
  }

  /// Values from a JSON object; an optional "command" key must agree with ours.
  void merge_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, val] : j.items()) {
      if (key == "command") {
        if (!val.is_string() || val.get<std::string>() != command_name(command_))
          throw ConfigError("config file is for a different command");
        continue;
      }
      if (val.is_boolean()) {
        set(key, val.get<bool>());
      } else if (val.is_number_integer()) {
        set(key, static_cast<long>(val.get<std::int64_t>()));
      } else if (val.is_number()) {
        set(key, val.get<double>());
      } else if (val.is_string()) {
        // strings may carry numbers, e.g. "inf"
        if (find(key).type == ParamType::Text) {
          set(key, val.get<std::string>());
        } else {
          set_from_string(key, val.get<std::string>());
        }
      } else {
        throw ConfigError("config file: unsupported value for '" + key + "'");
      }
    }
  }

  void merge_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    merge_json(j);
  }

  bool has(const std::string& name) const { return values_.count(name) || find(name).fallback.has_value(); }

  ParamValue value(const std::string& name) const {
    if (auto it = values_.find(name); it != values_.end()) return it->second;
    const auto& spec = find(name);
    if (!spec.fallback) throw ConfigError("missing parameter '" + name + "'");
    return *spec.fallback;
  }

  long get_int(const std::string& name) const { return std::get<long>(value(name)); }
  double get_real(const std::string& name) const { return std::get<double>(value(name)); }
  bool get_flag(const std::string& name) const { return std::get<bool>(value(name)); }
  std::string get_text(const std::string& name) const { return std::get<std::string>(value(name)); }

  std::optional<std::uint64_t> seed() const {
    if (!has("seed")) return std::nullopt;
    return static_cast<std::uint64_t>(get_int("seed"));
  }

  /// Whether this configuration draws random numbers.
  bool randomized() const {
    switch (command_) {
      case Command::Cubature: return get_int("shifts") > 0;
      case Command::Recover: return get_text("samples").empty();
      case Command::Identities: return true;
      default: return false;
    }
  }

  void validate() const {
    for (const auto& spec : command_schema(command_))
      if (!spec.fallback && spec.name != "seed" && !values_.count(spec.name))
        throw ConfigError(command_name(command_) + ": parameter '" + spec.name + "' is required");
    if (randomized() && !seed()) throw ConfigError(command_name(command_) + ": this run is randomized and needs --seed");
    if (seed() && get_int("seed") < 0) throw ConfigError("seed must be nonnegative");
    auto positive = [&](const char* key) {
      if (get_int(key) < 1) throw ConfigError(std::string(key) + " must be positive");
    };
    auto nonneg = [&](const char* key) {
      if (get_int(key) < 0) throw ConfigError(std::string(key) + " must be nonnegative");
    };
    auto dim_range = [&](long lo) {
      if (get_int("d") < lo || get_int("d") > 8) throw ConfigError("d must lie in [" + std::to_string(lo) + ", 8]");
    };
    switch (command_) {
      case Command::Coeffs: {
        dim_range(0);
        positive("N");
        nonneg("decay");
        const auto s = get_text("source");
        if (s != "auto" && s != "closed" && s != "grid") throw ConfigError("source must be auto, closed or grid");
        break;
      }
      case Command::Norms: {
        dim_range(0);
        const BesovParams bp(get_real("r"), get_real("p"), get_real("q"));
        bp.require_valid();
        if (bp.p != bp.q) throw ConfigError("tensor norm paths need p = q");
        positive("J");
        positive("J_hpc");
        positive("J_diff");
        if (get_int("m") < 2 || get_int("m") > 3) throw ConfigError("difference order m must be 2 or 3");
        if (!get_flag("band") && get_text("fn").empty()) throw ConfigError("norms: --fn is required without --band");
        for (const auto& k : split_list(get_text("compare")))
          if (k != "cw" && k != "diff" && k != "hpc") throw ConfigError("compare: unknown norm '" + k + "'");
        break;
      }
      case Command::Cubature: {
        dim_range(1);
        nonneg("nmin");
        nonneg("nmax");
        nonneg("shifts");
        nonneg("skip");
        const auto r = get_text("rule");
        if (r != "fibonacci" && r != "lattice" && r != "net" && r != "net2")
          throw ConfigError("rule must be fibonacci, lattice, net or net2");
        if (r == "fibonacci" && get_int("d") != 2) throw ConfigError("fibonacci rules are two-dimensional");
        if (r == "lattice" && get_text("generator").empty()) throw ConfigError("lattice rule needs --generator");
        break;
      }
      case Command::Approx:
        dim_range(0);
        nonneg("nmin");
        nonneg("skip");
        if (get_int("nmax") < get_int("nmin")) throw ConfigError("nmax must be >= nmin");
        if (get_int("nmax") > 20) throw ConfigError("nmax is capped at 20");
        if (!(get_real("p") >= 1.0)) throw ConfigError("approximation error needs p >= 1");
        break;
      case Command::Recover:
        dim_range(0);
        nonneg("nmin");
        nonneg("skip");
        positive("N");
        if (get_int("nmax") < get_int("nmin")) throw ConfigError("nmax must be >= nmin");
        if (get_int("nmax") > 16) throw ConfigError("nmax is capped at 16");
        if (!(get_real("oversampling") >= kMinOversampling))
          throw ConfigError("oversampling must be at least " + std::to_string(kMinOversampling));
        break;
      case Command::Identities:
        if (get_int("d") < 0 || get_int("d") > 3) throw ConfigError("identities: d must be 0, 1, 2 or 3");
        positive("count");
        break;
    }
  }

  /// `key=value` for every schema parameter with a value, defaults resolved.
  std::string describe() const {
    std::string s = "command=" + command_name(command_);
    for (const auto& spec : command_schema(command_)) {
      if (!has(spec.name)) continue;
      s += ' ' + spec.name + '=' + detail::format_value(value(spec.name));
    }
    return s;
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
    return out;
  }

 private:
  const ParamSpec& find(const std::string& name) const {
    for (const auto& spec : command_schema(command_))
      if (spec.name == name) return spec;
    throw ConfigError(command_name(command_) + ": unknown parameter '" + name + "'");
  }

  Command command_;
  std::map<std::string, ParamValue> values_;
};

// ---------------------------------------------------------------- results

struct PlotSpec {
  int x_column = 1;  // 1-based, gnuplot convention
  int y_column = 2;
  bool loglog = true;
  std::string title;
};

struct CsvTable {
  std::string name;
  std::string body;  // header row plus data rows
  std::optional<PlotSpec> plot;
};

struct ExperimentResult {
  std::string config;  // resolved `key=value` list written into every CSV header
  std::vector<CsvTable> tables;
  std::vector<std::string> summary;  // one line per headline number
};

/// FNV-1a over the non-comment lines of a CSV text.
inline std::uint64_t csv_body_hash(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    if (line.empty() || line.front() != '#') {
      for (unsigned char c : line) h = (h ^ c) * 1099511628211ULL;
      h = (h ^ '\n') * 1099511628211ULL;
    }
    pos = end + 1;
  }
  return h;
}

inline void write_table(std::ostream& os, const CsvTable& t, const std::string& config) {
  os << "# config: " << config << '\n' << "# table: " << t.name << '\n' << t.body;
}

/// Path of table `index`: the configured path for the first, `<stem>.<name><ext>` after.
inline std::filesystem::path table_path(const std::filesystem::path& out, const CsvTable& t, std::size_t index) {
  if (index == 0) return out;
  auto p = out;
  p.replace_filename(out.stem().string() + "." + t.name + (out.has_extension() ? out.extension().string() : ".csv"));
  return p;
}

inline std::string gnuplot_script(const CsvTable& t, const std::filesystem::path& data) {
  const PlotSpec plot = t.plot.value_or(PlotSpec{});
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key autotitle columnhead\n";
  if (plot.loglog) s << "set logscale xy 2\n";
  if (!plot.title.empty()) s << "set title '" << plot.title << "'\n";
  s << "plot '" << data.filename().string() << "' using " << plot.x_column << ':' << plot.y_column
    << " with linespoints\n"
    << "pause -1\n";
  return s.str();
}

/// Writes every table (and gnuplot scripts when asked) under the configured path,
/// or prints all tables to `fallback` when no path is set. Returns the files written.
inline std::vector<std::filesystem::path> write_artifacts(const ExperimentResult& res, const ExperimentConfig& cfg,
                                                          std::ostream& fallback) {
  std::vector<std::filesystem::path> written;
  const std::string out = cfg.get_text("out");
  if (out.empty()) {
    for (const auto& t : res.tables) write_table(fallback, t, res.config);
    return written;
  }
  for (std::size_t i = 0; i < res.tables.size(); ++i) {
    const auto path = table_path(out, res.tables[i], i);
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    write_table(f, res.tables[i], res.config);
    written.push_back(path);
    if (cfg.get_flag("gnuplot") && res.tables[i].plot) {
      auto gp = path;
      gp.replace_extension(".gp");
      std::ofstream g(gp);
      if (!g) throw ConfigError("cannot write " + gp.string());
      g << gnuplot_script(res.tables[i], path);
      written.push_back(gp);
    }
  }
  return written;
}

namespace detail {
inline std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::string fit_summary(const std::string& label, const RateFit& fit) {
  std::ostringstream s;
  s << label << " slope " << std::setprecision(6) << fit.slope << " (log power " << fit.log_power << ", skip "
    << fit.skip << ", residual " << fit.residual << (fit.degenerate ? ", degenerate" : "") << ")";
  return s.str();
}

inline const TestFunction& resolve_function(const ExperimentConfig& cfg) {
  return find_test_function(cfg.get_text("fn"), static_cast<int>(cfg.get_int("d")));
}
}  // namespace detail

// ---------------------------------------------------------------- exact identity suite

struct IdentityResidual {
  std::string name;
  std::string statement;
  int dim = 0;
  std::size_t cases = 0;
  double max_residual = 0.0;  // relative
};

/// Random hpc polynomial: `terms` coefficients in [-1,1] at frequencies in [0, kmax]^d,
/// always including the corner (kmax, ..., kmax).
inline CoefficientMap random_hpc_polynomial(std::mt19937_64& rng, int dim, int kmax, int terms) {
  std::uniform_int_distribution<int> freq(0, kmax);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  CoefficientMap c(Basis::HalfPeriodCosine, dim);
  c.set(MultiIndex(std::vector<int>(dim, kmax)), coef(rng));
  for (int t = 1; t < terms; ++t) {
    std::vector<int> k(dim);
    for (auto& e : k) e = freq(rng);
    c.add(MultiIndex(std::move(k)), coef(rng));
  }
  return c;
}

namespace detail {
// |a - b| relative to the larger side, or to `size` once both sides are at round-off
inline double relative_gap(double a, double b, double size) {
  const double big = std::max(std::abs(a), std::abs(b));
  const double denom = big > 1e-12 * size ? big : size;
  return denom > 0.0 ? std::abs(a - b) / denom : 0.0;
}
}  // namespace detail

/// Maximum relative residuals of the exact periodization identities on `count` random
/// hpc polynomials of dimension `dim`.
inline std::vector<IdentityResidual> identity_suite(int dim, std::uint64_t seed, int count = 50) {
  if (dim < 1 || dim > 3) throw ConfigError("identity suite: dim must be 1, 2 or 3");
  if (count < 1) throw ConfigError("identity suite: count must be positive");
  const int kmax = dim == 3 ? 6 : 8;
  const int terms = dim == 1 ? 6 : 10;
  const int level = resolving_level(kmax);
  const auto decomp = DecompositionOfUnity::standard();
  const auto cube_box = box(std::vector<int>(dim, 0), std::vector<int>(dim, kmax));
  const auto torus_box = box(std::vector<int>(dim, -kmax), std::vector<int>(dim, kmax));
  const std::array<double, 3> exps = {1.0, 2.0, kInf};

  struct Draw {
    CoefficientMap f, g;
    long N;
    double p;
    MultiIndex block;
    int rule_param;
  };
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(dim));
  std::vector<Draw> draws;
  for (int i = 0; i < count; ++i) {
    Draw d{random_hpc_polynomial(rng, dim, kmax, terms), random_hpc_polynomial(rng, dim, kmax, terms), 0, 0.0,
           MultiIndex(std::vector<int>(dim, 0)), 0};
    // 3-d grids are kept small: the torus side of the error transfer doubles every axis
    d.N = std::uniform_int_distribution<long>(2, dim == 3 ? 8 : 24)(rng);
    d.p = exps[i % 3];
    std::vector<int> j(dim);
    for (auto& e : j) e = std::uniform_int_distribution<int>(0, dim == 3 ? 2 : 3)(rng);
    d.block = MultiIndex(std::move(j));
    d.rule_param = std::uniform_int_distribution<int>(6, 12)(rng);
    draws.push_back(std::move(d));
  }

  std::vector<IdentityResidual> out = {
      {"periodized_cosine", "P(c_k) = 2^((|k|_0 + d)/2) cos_k", dim, 0, 0.0},
      {"scalar_product", "<f,g> = 2^-d <Pf,Pg>", dim, 0, 0.0},
      {"fourier_coefficients", "<f,c_|k|> = 2^((|k|_0 - d)/2) <Pf,e_k>", dim, 0, 0.0},
      {"approximation_error", "||f - A_hpc,N f||_p = ||f o tent - A_N (f o tent)||_p", dim, 0, 0.0},
      {"cubature_error", "|Q(tent X, f) - I f| = |Q(X, f o tent) - I(f o tent)|", dim, 0, 0.0},
      {"block_norm", "||P(f_j)||_p^p = 2^d ||f_j||_p^p", dim, 0, 0.0},
  };
  auto record = [&](std::size_t which, double r) {
    out[which].cases += 1;
    out[which].max_residual = std::max(out[which].max_residual, r);
  };

  for (const auto& dr : draws) {
    const GridFunction f = hpc_synthesize(dr.f, level);
    const GridFunction pf = periodize(f);

    // P(c_k) by linearity: P f against the scaled symmetric cosines
    {
      GridFunction expect(Domain::SymCube, dim, level);
      const auto nodes = expect.axis_nodes();
      std::vector<double> x(dim);
      for (std::size_t flat = 0; flat < expect.size(); ++flat) {
        std::size_t rest = flat;
        for (int a = dim - 1; a >= 0; --a) {
          x[a] = nodes[rest % nodes.size()];
          rest /= nodes.size();
        }
        double v = 0.0;
        for (const auto& [k, c] : dr.f)
          v += c.real() * std::pow(2.0, 0.5 * (k.nonzero_count() + dim)) * sym_cosine(k, x);
        expect[flat] = v;
      }
      double scale = 0.0;
      for (double v : expect.values()) scale = std::max(scale, std::abs(v));
      record(0, pf.max_abs_diff(expect) / scale);
    }

    // scalar products, relative to ||f|| ||g||
    {
      const GridFunction g = hpc_synthesize(dr.g, level);
      const double lhs = inner(f, g);
      const double rhs = std::ldexp(inner(pf, periodize(g)), -dim);
      record(1, std::abs(lhs - rhs) / std::sqrt(inner(f, f) * inner(g, g)));
    }

    // hpc coefficients against Fourier coefficients of P f
    {
      const auto hpc = hpc_analyze(f, cube_box);
      const auto fou = fourier_analyze(pf, torus_box);
      double gap = 0.0, scale = 0.0;
      for (const auto& [k, v] : fou) {
        const double rhs_k = std::pow(2.0, 0.5 * (k.nonzero_count() - dim)) * v.real();
        gap = std::max({gap, std::abs(hpc.get(k.abs()).real() - rhs_k), std::abs(v.imag())});
      }
      for (const auto& [k, v] : hpc) scale = std::max(scale, std::abs(v));
      record(2, gap / scale);
    }

    // approximation error on the cube and on the torus
    {
      const int lv = std::max(level, projection_level(dr.N));
      const GridFunction fine = lv == level ? f : hpc_synthesize(dr.f, lv);
      const auto e = error_transfer_check(fine, dr.N, dr.p);
      record(3, detail::relative_gap(e.lhs, e.rhs, fine.lp_norm(dr.p)));
    }

    // cubature error with tent-transformed nodes
    {
      const CubatureRule rule = dim == 2 && dr.rule_param % 2 == 0 ? fibonacci_rule(dr.rule_param + 6)
                                                                    : digital_net(dr.rule_param, dim, 1);
      const auto fp = [&](std::span<const double> x) { return hpc_eval(dr.f, x); };
      const double integral = dr.f.get(MultiIndex(std::vector<int>(dim, 0))).real();
      const auto c = tent_cubature_identity(rule, fp, integral);
      record(4, detail::relative_gap(c.lhs, c.rhs, f.lp_norm(1.0)));
    }

    // block norms, relative to the same functional of the whole of f
    {
      const int lv = std::max(level, resolving_level(dyadic_support(dr.block, decomp).max_abs()));
      const GridFunction fine = lv == level ? f : hpc_synthesize(dr.f, lv);
      const auto b = periodization_block_identity(dr.f, dr.block, dr.p, decomp, lv);
      const double whole = std::isinf(dr.p) ? fine.lp_norm(dr.p) : std::ldexp(fine.lp_norm_pow(dr.p), dim);
      record(5, detail::relative_gap(b.lhs, b.rhs, whole));
    }
  }
  return out;
}

// ---------------------------------------------------------------- norm-equivalence bands

struct BandRow {
  std::string function;
  int scale = 0;  // dyadic dilation 2^scale
  double cw = 0.0;
  double hpc = 0.0;
  double diff = 0.0;
  double cw_ratio() const { return cw / hpc; }
  double diff_ratio() const { return diff / hpc; }
};

struct ViolationRow {
  int level = 0;  // Chui-Wang truncation level
  double cw = 0.0;
  double hpc = 0.0;
  double ratio() const { return cw / hpc; }
};

struct BandReport {
  BesovParams params;
  BesovParams violation_params;
  std::string violation_function;
  std::vector<BandRow> rows;
  std::vector<ViolationRow> violation;

  static double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
  }
  double cw_band() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.cw_ratio());
    return spread(v);
  }
  double diff_band() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.diff_ratio());
    return spread(v);
  }
  double violation_spread() const {
    std::vector<double> v;
    for (const auto& r : violation) v.push_back(r.ratio());
    return spread(v);
  }

  void write_rows_csv(std::ostream& os) const {
    os << "function,scale,cw,hpc,diff,cw_over_hpc,diff_over_hpc\n" << std::setprecision(17);
    for (const auto& r : rows)
      os << r.function << ',' << r.scale << ',' << r.cw << ',' << r.hpc << ',' << r.diff << ',' << r.cw_ratio() << ','
         << r.diff_ratio() << '\n';
  }
  void write_violation_csv(std::ostream& os) const {
    os << "level,cw,hpc,cw_over_hpc\n" << std::setprecision(17);
    for (const auto& r : violation) os << r.level << ',' << r.cw << ',' << r.hpc << ',' << r.ratio() << '\n';
  }
};

/// N_order dilated by (order + 1) 2^scale and placed at fraction `t` of the free room in [0,1].
inline PiecewisePolynomial placed_bspline(int order, int scale, double t) {
  const double a = std::ldexp(order + 1.0, scale);
  const double lo = t * (1.0 - order / a);
  return cardinal_bspline(order).dilated(a, lo * a);
}

struct BandLevels {
  int cw = 12;
  int hpc = 14;
  int diff = 8;
};

/// Twenty bivariate tensor B-splines (orders 3 to 6, five placements) at dyadic scales 0..2:
/// the Chui-Wang and difference norms against the hpc norm. The violation part evaluates a
/// smooth member at `violation` smoothness for growing Chui-Wang truncation levels.
inline BandReport norm_band_experiment(const BesovParams& bp = {1.5, 2.0, 2.0}, int m = 3,
                                       const BesovParams& violation = {2.5, 2.0, 2.0}, const BandLevels& lv = {}) {
  bp.require_valid();
  static constexpr std::array<std::array<double, 2>, 5> placements = {
      {{0.5, 0.5}, {0.2, 0.7}, {0.8, 0.3}, {0.35, 0.9}, {0.65, 0.1}}};
  struct Job {
    int order, placement, scale;
  };
  std::vector<Job> jobs;
  for (int order = 3; order <= 6; ++order)
    for (int pl = 0; pl < 5; ++pl)
      for (int s = 0; s <= 2; ++s) jobs.push_back({order, pl, s});

  BandReport rep;
  rep.params = bp;
  rep.violation_params = violation;
  rep.rows = parallel_map<BandRow>(jobs.size(), [&](std::size_t i) {
    const auto& jb = jobs[i];
    const auto& pl = placements[jb.placement];
    const TensorPiecewise f{1.0, {placed_bspline(jb.order, jb.scale, pl[0]), placed_bspline(jb.order, jb.scale, pl[1])}};
    BandRow row;
    row.function = "N" + std::to_string(jb.order) + "_p" + std::to_string(jb.placement);
    row.scale = jb.scale;
    row.cw = cw_seq_norm_tensor(f, bp, lv.cw).value;
    row.hpc = hpc_besov_norm_tensor(f, bp, lv.hpc).value;
    row.diff = difference_seminorm_tensor(f, bp, m, lv.diff).value;
    return row;
  });

  const TensorPiecewise smooth{1.0, {placed_bspline(4, 0, 0.5), placed_bspline(4, 0, 0.5)}};
  rep.violation_function = "N4_p0";
  const std::vector<int> levels = {lv.cw - 4, lv.cw, lv.cw + 4};
  rep.violation = parallel_map<ViolationRow>(levels.size(), [&](std::size_t i) {
    return ViolationRow{levels[i], cw_seq_norm_tensor(smooth, violation, levels[i]).value,
                        hpc_besov_norm_tensor(smooth, violation, levels[i] + 2).value};
  });
  return rep;
}

// ---------------------------------------------------------------- commands

namespace detail {

inline ExperimentResult run_coeffs(const ExperimentConfig& cfg) {
  const auto& f = resolve_function(cfg);
  const auto K = hyperbolic_cross(cfg.get_int("N"), f.dim(), false);
  std::string source = cfg.get_text("source");
  if (source == "auto") source = f.has_closed_form_coefficients() ? "closed" : "grid";
  CoefficientMap c;
  if (source == "closed") {
    if (!f.has_closed_form_coefficients()) throw ConfigError(f.name() + " has no closed-form coefficients");
    c = f.hpc_coefficients(K);
  } else {
    int level = static_cast<int>(cfg.get_int("level"));
    if (level < 0) level = resolving_level(K.max_abs());
    c = hpc_analyze(GridFunction::sample(Domain::UnitCube, f.dim(), level, f.evaluator()), K);
  }
  ExperimentResult res;
  std::ostringstream body;
  c.write_csv(body);
  res.tables.push_back({"coefficients", body.str(), std::nullopt});
  res.summary.push_back(f.name() + ": " + std::to_string(c.size()) + " coefficients from " + source);
  if (const long kd = cfg.get_int("decay"); kd > 0) {
    if (kd > K.max_abs()) throw ConfigError("decay range exceeds the cross; raise --N");
    const auto rep = coefficient_decay_report(c, static_cast<int>(kd));
    std::ostringstream d;
    for (int i = 0; i < f.dim(); ++i) d << "k_" << (i + 1) << ',';
    d << "abs_coefficient,weighted\n" << std::setprecision(17);
    for (const auto& r : rep.rows) {
      for (int e : r.k) d << e << ',';
      d << r.coefficient << ',' << r.weighted << '\n';
    }
    res.tables.push_back({"decay", d.str(), std::nullopt});
    res.summary.push_back("sup |c_k| prod <k_i>^2 = " + num(rep.sup_weighted));
  }
  return res;
}

inline TensorPiecewise tensor_piecewise(const TestFunction& f) {
  if (!f.is_tensor()) throw ConfigError(f.name() + " is not a tensor product");
  TensorPiecewise t{1.0, {}};
  for (const auto& fac : f.factors()) {
    const auto* p = fac.piecewise_form();
    if (!p) throw ConfigError(f.name() + ": norms need piecewise polynomial factors");
    t.factors.push_back(*p);
  }
  return t;
}

inline ExperimentResult run_norms(const ExperimentConfig& cfg) {
  const BesovParams bp(cfg.get_real("r"), cfg.get_real("p"), cfg.get_real("q"));
  const int m = static_cast<int>(cfg.get_int("m"));
  ExperimentResult res;
  if (cfg.get_flag("band")) {
    const auto rep = norm_band_experiment(bp, m, BesovParams(2.5, bp.p, bp.q),
                                          {static_cast<int>(cfg.get_int("J")), static_cast<int>(cfg.get_int("J_hpc")),
                                           static_cast<int>(cfg.get_int("J_diff"))});
    std::ostringstream a, b;
    rep.write_rows_csv(a);
    rep.write_violation_csv(b);
    res.tables.push_back({"band", a.str(), std::nullopt});
    res.tables.push_back({"violation", b.str(), PlotSpec{1, 4, false, "cw/hpc outside the regime"}});
    res.summary.push_back("cw/hpc band width " + num(rep.cw_band()));
    res.summary.push_back("diff/hpc band width " + num(rep.diff_band()));
    res.summary.push_back("violation spread at r=2.5 " + num(rep.violation_spread()));
    return res;
  }
  const TestFunction* fp = &resolve_function(cfg);
  const auto tf = tensor_piecewise(*fp);
  std::vector<NormReport> reports;
  for (const auto& kind : ExperimentConfig::split_list(cfg.get_text("compare"))) {
    if (kind == "cw") reports.push_back(cw_seq_norm_tensor(tf, bp, static_cast<int>(cfg.get_int("J"))));
    if (kind == "hpc") reports.push_back(hpc_besov_norm_tensor(tf, bp, static_cast<int>(cfg.get_int("J_hpc"))));
    if (kind == "diff")
      reports.push_back(difference_seminorm_tensor(tf, bp, m, static_cast<int>(cfg.get_int("J_diff"))));
  }
  std::ostringstream body;
  NormReport::write_csv_header(body);
  for (const auto& r : reports) r.write_csv_row(body);
  res.tables.push_back({"norms", body.str(), std::nullopt});
  const NormReport* ref = nullptr;
  for (const auto& r : reports)
    if (r.kind == "hpc") ref = &r;
  for (const auto& r : reports) {
    std::string line = fp->name() + " " + r.kind + " = " + num(r.value);
    if (ref && &r != ref) line += " (ratio to hpc " + num(r.value / ref->value) + ")";
    res.summary.push_back(line);
  }
  return res;
}

inline std::vector<long> parse_generator(const std::string& s) {
  std::vector<long> z;
  for (const auto& item : ExperimentConfig::split_list(s)) {
    try {
      z.push_back(std::stol(item));
    } catch (const std::exception&) {
      throw ConfigError("generator: cannot parse '" + item + "'");
    }
  }
  return z;
}

inline ExperimentResult run_cubature(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const auto& f = resolve_function(cfg);
  if (f.dim() != d) throw ConfigError("function dimension does not match --d");
  const std::string rule = cfg.get_text("rule");
  RuleFamily family;
  if (rule == "fibonacci") {
    family = fibonacci_family();
  } else if (rule == "lattice") {
    const auto z = parse_generator(cfg.get_text("generator"));
    if (static_cast<int>(z.size()) != d) throw ConfigError("generator length must equal d");
    family = rank1_family(z);
  } else {
    family = digital_net_family(d, rule == "net2" ? 2 : 1);
  }
  const int lo = static_cast<int>(cfg.get_int("nmin"));
  const int hi = static_cast<int>(cfg.get_int("nmax"));
  if (hi < lo) throw ConfigError("nmax must be >= nmin");
  std::vector<int> params;
  for (int i = lo; i <= hi; ++i) params.push_back(i);
  CubatureOptions opt;
  opt.tent = cfg.get_flag("tent");
  opt.shifts = static_cast<int>(cfg.get_int("shifts"));
  opt.seed = cfg.seed().value_or(1);
  opt.skip = static_cast<std::size_t>(cfg.get_int("skip"));
  const auto fit = convergence_experiment(family, f, params, opt);
  ExperimentResult res;
  std::ostringstream body;
  fit.write_csv(body);
  res.tables.push_back({"cubature", body.str(), PlotSpec{1, 2, true, family.name + " on " + f.name()}});
  res.summary.push_back(fit_summary(family.name + (opt.tent ? " tent" : "") + " on " + f.name(), fit));
  return res;
}

inline std::vector<long> dyadic_sizes(const ExperimentConfig& cfg) {
  std::vector<long> N;
  for (long j = cfg.get_int("nmin"); j <= cfg.get_int("nmax"); ++j) N.push_back(1L << j);
  return N;
}

inline ExperimentResult run_approx(const ExperimentConfig& cfg) {
  const auto& f = resolve_function(cfg);
  const auto fit =
      projection_error_rate(f, dyadic_sizes(cfg), cfg.get_real("p"), static_cast<std::size_t>(cfg.get_int("skip")));
  ExperimentResult res;
  std::ostringstream body;
  fit.write_csv(body);
  res.tables.push_back({"approx", body.str(), PlotSpec{1, 2, true, "projection error, " + f.name()}});
  res.summary.push_back(fit_summary("projection on " + f.name(), fit));
  return res;
}

inline ExperimentResult run_recover(const ExperimentConfig& cfg) {
  const auto& f = resolve_function(cfg);
  ExperimentResult res;
  if (const auto path = cfg.get_text("samples"); !path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open samples file " + path);
    const auto samples = read_samples_csv(in);
    const auto K = hyperbolic_cross(cfg.get_int("N"), f.dim(), false);
    const auto ls = ls_recover(samples, K);
    std::ostringstream c, r;
    ls.coefficients.write_csv(c);
    ls.write_report_csv(r);
    res.tables.push_back({"coefficients", c.str(), std::nullopt});
    res.tables.push_back({"report", r.str(), std::nullopt});
    res.summary.push_back("condition " + num(ls.condition) + ", residual " + num(ls.residual_norm));
    return res;
  }
  const auto N = dyadic_sizes(cfg);
  const std::uint64_t seed = *cfg.seed();
  std::ostringstream body;
  body << "N,basis_size,samples,ls_error,projection_error,condition\n" << std::setprecision(17);
  std::vector<RatePoint> pts;
  for (std::size_t i = 0; i < N.size(); ++i) {
    const auto c = compare_recovery(f, N[i], seed + 1000003ULL * i, cfg.get_real("oversampling"));
    body << c.N << ',' << c.basis_size << ',' << c.samples << ',' << c.ls_error << ',' << c.projection_error << ','
         << c.condition << '\n';
    pts.push_back({static_cast<double>(c.samples), c.ls_error});
  }
  const auto fit = fit_rate(std::move(pts), static_cast<std::size_t>(cfg.get_int("skip")));
  res.tables.push_back({"recover", body.str(), PlotSpec{3, 4, true, "least squares, " + f.name()}});
  res.summary.push_back(fit_summary("least squares on " + f.name() + " against samples", fit));
  return res;
}

inline ExperimentResult run_identities(const ExperimentConfig& cfg) {
  std::vector<int> dims;
  if (cfg.get_int("d") == 0) {
    dims = {1, 2, 3};
  } else {
    dims = {static_cast<int>(cfg.get_int("d"))};
  }
  ExperimentResult res;
  std::ostringstream body;
  body << "identity,d,cases,max_relative_residual\n" << std::setprecision(6) << std::scientific;
  for (int d : dims)
    for (const auto& r : identity_suite(d, *cfg.seed(), static_cast<int>(cfg.get_int("count")))) {
      body << r.name << ',' << r.dim << ',' << r.cases << ',' << r.max_residual << '\n';
      std::ostringstream line;
      line << std::left << std::setw(22) << r.name << " d=" << d << "  max residual " << std::scientific
           << std::setprecision(3) << r.max_residual << "  [" << r.statement << "]";
      res.summary.push_back(line.str());
    }
  res.tables.push_back({"identities", body.str(), std::nullopt});
  return res;
}

}  // namespace detail

/// Fills the defaults that depend on other parameters: the dimension of the named
/// function and the family range of cubature rules.
inline ExperimentConfig resolve(ExperimentConfig cfg) {
  cfg.validate();
  const auto cmd = cfg.command();
  const bool by_name = cmd == Command::Coeffs || cmd == Command::Approx || cmd == Command::Recover ||
                       (cmd == Command::Norms && !cfg.get_flag("band"));
  if (by_name && cfg.get_int("d") == 0) {
    try {
      cfg.set("d", static_cast<long>(find_test_function(cfg.get_text("fn")).dim()));
    } catch (const ConfigError&) {
      if (cmd != Command::Norms) throw;
      cfg.set("d", 2L);  // bare family names such as bspline4
    }
  }
  if (cmd == Command::Cubature) {
    const bool fib = cfg.get_text("rule") == "fibonacci";
    if (cfg.get_int("nmin") == 0) cfg.set("nmin", fib ? 6L : 3L);
    if (cfg.get_int("nmax") == 0) cfg.set("nmax", fib ? 19L : 12L);
  }
  return cfg;
}

/// Validates `cfg` and runs its command. ConfigError and PreconditionError escape.
inline ExperimentResult run(const ExperimentConfig& config) {
  const ExperimentConfig cfg = resolve(config);
  ExperimentResult res;
  switch (cfg.command()) {
    case Command::Coeffs: res = detail::run_coeffs(cfg); break;
    case Command::Norms: res = detail::run_norms(cfg); break;
    case Command::Cubature: res = detail::run_cubature(cfg); break;
    case Command::Approx: res = detail::run_approx(cfg); break;
    case Command::Recover: res = detail::run_recover(cfg); break;
    case Command::Identities: res = detail::run_identities(cfg); break;
  }
  res.config = cfg.describe();
  return res;
}

}  // namespace hpcb
