#pragma once

// Config access, JSON serialization and CSV output for atlas_sim.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "atlas/atlas.hpp"
#include "json.hpp"

namespace atlas::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

[[noreturn]] inline void config_error(const std::string& what) { throw Error(Errc::invalid_config, what); }

/// Read-only view of the merged configuration with typed lookups.
class Config {
 public:
  explicit Config(json j) : j_(std::move(j)) {
    if (!j_.is_object()) config_error("config must be a JSON object");
    if (j_.contains("schema_version") && j_["schema_version"] != kSchemaVersion)
      config_error("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }
  const json& at(const std::string& key) const {
    if (!has(key)) config_error("missing required key '" + key + "'");
    return j_[key];
  }
  const json& raw() const { return j_; }

  template <class T>
  T get(const std::string& key) const {
    return convert<T>(key, at(key));
  }
  template <class T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  std::uint64_t seed() const {
    if (!has("seed")) config_error("a seed is required ('seed' key or --seed)");
    const auto& v = j_["seed"];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      config_error("'seed' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  template <class T>
  static T convert(const std::string& key, const json& v) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw std::invalid_argument("integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("string");
      }
      return v.get<T>();
    } catch (const std::invalid_argument& e) {
      config_error("key '" + key + "': expected " + e.what());
    } catch (const json::exception& e) {
      config_error("key '" + key + "': " + e.what());
    }
  }

 private:
  json j_;
};

/// Applies "key=value" to the top level; the value is parsed as JSON and
/// falls back to a plain string.
inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  config[key] = value.is_discarded() ? json(text) : value;
}

inline json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) config_error("cannot read config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) config_error("config file '" + path + "' is not valid JSON");
  return j;
}

// ---------------------------------------------------------------------------
// Values

/// Non-finite doubles become the strings "inf", "-inf" and "nan".
inline json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json numbers(std::span<const double> xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

inline std::vector<double> real_vector(const std::string& key, const json& v) {
  if (!v.is_array()) config_error("key '" + key + "': expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) config_error("key '" + key + "': expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

/// A spacing vector given either as a constant or as an explicit array.
inline std::vector<double> spacing_values(const std::string& key, const json& v, int m) {
  const auto n = static_cast<std::size_t>(m - 1);
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  auto z = real_vector(key, v);
  if (z.size() != n) config_error("key '" + key + "': expected " + std::to_string(n) + " spacings");
  return z;
}

// ---------------------------------------------------------------------------
// Measures

inline json to_json(const Truncation& t) {
  switch (t.kind) {
    case Truncation::Kind::upper: return {{"kind", "upper"}, {"bound", number(t.bound)}};
    case Truncation::Kind::lower: return {{"kind", "lower"}, {"bound", number(t.bound)}};
    case Truncation::Kind::none: break;
  }
  return {{"kind", "none"}};
}

inline json to_json(const ProductExponentialMeasure& mu) {
  json trunc = json::array();
  for (const auto& t : mu.truncation) trunc.push_back(to_json(t));
  return {{"rates", numbers(mu.rates)}, {"truncation", trunc}};
}

inline Truncation truncation_from_json(const json& j) {
  if (j.is_null()) return Truncation::none();
  if (!j.is_object()) config_error("truncation entries must be objects");
  const std::string kind = Config::convert<std::string>("truncation.kind", j.value("kind", json("none")));
  if (kind == "none") return Truncation::none();
  const double b = Config::convert<double>("truncation.bound", j.value("bound", json()));
  if (kind == "upper") return Truncation::upper(b);
  if (kind == "lower") return Truncation::lower(b);
  config_error("unknown truncation kind '" + kind + "'");
}

inline ProductExponentialMeasure measure_from_json(const json& j) {
  ProductExponentialMeasure mu;
  mu.rates = real_vector("rates", j.value("rates", json()));
  if (j.contains("truncation"))
    for (const auto& t : j["truncation"]) mu.truncation.push_back(truncation_from_json(t));
  mu.validate();
  return mu;
}

/// Initial spacing law: a product-exponential measure or a fixed point.
struct InitialLaw {
  std::optional<ProductExponentialMeasure> measure;
  SpacingVector fixed;
  json description;

  SpacingVector draw(StreamRng& rng) const { return measure ? sample(*measure, rng) : fixed; }
};

/// Parses "init". Kinds: stationary (default), lambda_a, plus, minus, fixed,
/// measure.
inline InitialLaw initial_law(const Config& c, const ModelSpec& spec) {
  const int m = spec.m;
  const double gamma = c.get<double>("gamma", 1.0);
  json init = c.has("init") ? c.raw()["init"] : json{{"kind", "stationary"}};
  if (init.is_string()) init = json{{"kind", init}};
  if (!init.is_object()) config_error("'init' must be an object or a kind name");
  const std::string kind = Config::convert<std::string>("init.kind", init.value("kind", json("stationary")));
  InitialLaw law;
  if (kind == "stationary") {
    law.measure = spec.right_anchored ? mu_lambda_a(m, 2.0, 0.0) : mu_star_finite(m, gamma);
  } else if (kind == "lambda_a") {
    law.measure = mu_lambda_a(m, Config::convert<double>("init.lambda", init.value("lambda", json())),
                              Config::convert<double>("init.a", init.value("a", json(0.0))));
  } else if (kind == "plus" || kind == "minus") {
    const auto z = spacing_values("init.z", init.value("z", json()), m);
    law.measure = kind == "plus" ? conditioned_plus(m, z) : conditioned_minus(m, z);
  } else if (kind == "fixed") {
    law.fixed = SpacingVector{spacing_values("init.z", init.value("z", json()), m)};
    validate_spacing(law.fixed, spec.gaps());
  } else if (kind == "measure") {
    law.measure = measure_from_json(init);
    if (law.measure->dim() != spec.gaps()) config_error("init measure dimension must be m-1");
  } else {
    config_error("unknown init kind '" + kind + "'");
  }
  law.description = law.measure ? to_json(*law.measure) : json{{"fixed", numbers(law.fixed.z)}};
  law.description["kind"] = kind;
  return law;
}

inline ModelSpec model_from(const Config& c) {
  const int m = c.get<int>("m");
  if (m < 2) config_error("'m' must be at least 2");
  return make_atlas(m, c.get<double>("gamma", 1.0), c.get<bool>("right_anchored", false));
}

inline EngineOptions engine_options(const Config& c) {
  EngineOptions o;
  const std::string scheme = c.get<std::string>("scheme", "bridge");
  if (scheme == "bridge") o.scheme = ReflectionScheme::bridge;
  else if (scheme == "projection") o.scheme = ReflectionScheme::projection;
  else config_error("'scheme' must be bridge or projection");
  const std::string solver = c.get<std::string>("solver", "active_set");
  if (solver == "active_set") o.skorokhod.method = SkorokhodMethod::active_set;
  else if (solver == "gauss_seidel") o.skorokhod.method = SkorokhodMethod::gauss_seidel;
  else config_error("'solver' must be active_set or gauss_seidel");
  return o;
}

inline unsigned worker_count(const Config& c) {
  unsigned n = default_threads();
  if (c.has("threads")) {
    const int t = c.get<int>("threads");
    if (t < 1) config_error("'threads' must be positive");
    n = static_cast<unsigned>(t);
    if (const unsigned cap = thread_cap(); cap > 0) n = std::min(n, cap);
  }
  return n;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const KsResult& r) {
  return {{"statistic", r.statistic}, {"critical", r.critical()}, {"n", r.n}, {"significance", r.significance},
          {"pass", r.pass}};
}

inline json to_json(const ExponentFit& f) {
  return {{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"r2", number(f.r2)}};
}

inline json to_json(const TruncationPlan& p) {
  return {{"k", p.k},
          {"m", p.m},
          {"t_m", number(p.t_m)},
          {"gamma_m", number(p.gamma_m)},
          {"ell_m", p.ell_m},
          {"epsilon", number(p.epsilon)},
          {"epsilon_bound", number(p.epsilon_bound)},
          {"top_bound", number(p.top_bound)},
          {"bulk_bound", number(p.bulk_bound)},
          {"kappa", number(p.kappa)},
          {"beta", number(p.beta)},
          {"x_m0", number(p.x_m0)},
          {"x_k0", number(p.x_k0)}};
}

inline json to_json(const HypothesisReport& h) {
  auto stat = [](double all, double first, double second) {
    return json{{"value", number(all)}, {"first_half", number(first)}, {"second_half", number(second)}};
  };
  return {{"beta", number(h.beta)},
          {"beta_prime", number(h.beta_prime)},
          {"window", {h.window_lo, h.window_hi}},
          {"window_mid", h.window_mid},
          {"a_max", stat(h.a_max, h.a_max_first, h.a_max_second)},
          {"b_max", stat(h.b_max, h.b_max_first, h.b_max_second)},
          {"c_min", stat(h.c_min, h.c_min_first, h.c_min_second)},
          {"e1_pass", h.e1_pass},
          {"e2_pass", h.e2_pass},
          {"e3_pass", h.e3_pass},
          {"theta_decreases", h.theta_decreases},
          {"all_pass", h.all_pass()}};
}

inline json report_header(const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

// ---------------------------------------------------------------------------
// Output

/// Output sink opened before any work so that unwritable paths fail early.
class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) config_error("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw Error(Errc::invalid_config, "write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

inline void write_json(Sink& sink, const json& j) {
  sink.stream() << j.dump(2) << '\n';
  sink.finish();
}

/// Shortest round-trip decimal form.
inline void put_number(std::ostream& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, res.ptr - buf);
}

inline void csv_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    put_number(out, values[i]);
  }
  out << '\n';
}

inline std::string csv_header(std::size_t gaps, bool replica_column) {
  std::string h = replica_column ? "replica,time" : "time";
  for (std::size_t j = 1; j <= gaps; ++j) h += ",z_" + std::to_string(j);
  h += ",X_1";
  for (std::size_t j = 1; j <= gaps; ++j) h += ",L_" + std::to_string(j);
  return h;
}

inline std::vector<double> csv_values(const Snapshot& s) {
  std::vector<double> row{s.time};
  row.insert(row.end(), s.z.z.begin(), s.z.z.end());
  row.push_back(s.x1);
  row.insert(row.end(), s.L.begin(), s.L.end());
  return row;
}

}  // namespace atlas::cli
