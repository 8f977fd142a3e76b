// Copyright 2026 The nhwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Config-driven experiment runner behind the command-line tool.
//
// A config is one JSON object:
//   experiment   simulate | tail-fit | drift-check | rect-exit |
//                boundary-scaling | lyapunov-eval
//   model        {family, c, b, eps_cap}; c may be an array (sweep)
//   wedge        {alpha: {pi_numerator, pi_denominator}, b, A}
//   start        [x1, x2]
//   n_paths, t_max, master_seed
//   params       kind-specific object
// Unknown keys are rejected. Angle grids in params are fractions of alpha.

#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nhwalk/geometry.hpp"
#include "nhwalk/io.hpp"
#include "nhwalk/lyapunov.hpp"
#include "nhwalk/models.hpp"
#include "nhwalk/simulate.hpp"
#include "nhwalk/stats.hpp"
#include "nhwalk/version.hpp"

namespace nhwalk {

enum class ExitStatus : int {
  ok = 0,
  runtime_failure = 1,
  config_error = 2,
  insufficient_data = 3,
  check_failed = 4,
};

enum class ExperimentKind { simulate, tail_fit, drift_check, rect_exit, boundary_scaling, lyapunov_eval };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::tail_fit: return "tail-fit";
    case ExperimentKind::drift_check: return "drift-check";
    case ExperimentKind::rect_exit: return "rect-exit";
    case ExperimentKind::boundary_scaling: return "boundary-scaling";
    case ExperimentKind::lyapunov_eval: return "lyapunov-eval";
  }
  return "?";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::simulate, ExperimentKind::tail_fit, ExperimentKind::drift_check,
                 ExperimentKind::rect_exit, ExperimentKind::boundary_scaling, ExperimentKind::lyapunov_eval}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

/// Kind-specific parameters. Only the fields of the configured kind are
/// read and echoed.
struct ExperimentParams {
  // tail-fit
  std::string samples_file;  // empty: simulate first
  std::optional<FitWindow> window;
  int per_doubling = 8;
  // drift-check / lyapunov-eval / boundary-scaling
  std::string check = "supermartingale";  // supermartingale | submartingale | lamperti
  double w = 1.9;
  double gamma = 0.9;
  std::vector<double> radii{50, 100, 200, 400, 800};
  std::vector<double> angles{0.0};
  std::string field = "g";  // lamperti: g | f
  double field_power = 1.0;
  double p0 = 0.5;
  double r_exp = 2.0;
  std::string condition = "noncon1";  // existence | noncon1 | noncon2 | noncon3
  // rect-exit
  int frame = 4;
  std::vector<std::int64_t> N{64, 128, 256, 512};
  double h = 1.0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  // boundary-scaling
  double r = 100.0;
  double eps1 = 0.05;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  ModelSpec model;
  std::vector<double> c_values{0.0};
  bool c_sweep = false;
  WedgeSpec wedge;
  Lattice start{30, 0};
  std::uint64_t n_paths = 1000;
  std::uint64_t t_max = 1000000;
  std::uint64_t master_seed = 0;
  ExperimentParams params;

  BatchConfig batch(double c) const {
    BatchConfig b;
    b.model = model;
    b.model.c = c;
    b.wedge = wedge;
    b.x0 = start;
    b.n_paths = n_paths;
    b.t_max = t_max;
    b.master_seed = master_seed;
    return b;
  }
};

// ---------------------------------------------------------------------------
// Loading.

namespace detail {

/// Walks one JSON object, recording which keys were consumed so that the
/// remainder can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown field");
    }
  }

  double number(const std::string& key, double dflt) {
    const Json* v = get(key);
    if (v == nullptr) return dflt;
    if (!v->is_number()) throw ConfigError(field(key) + ": expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key) + ": must be finite");
    return d;
  }

  template <class Int>
  Int integer(const std::string& key, Int dflt) {
    const Json* v = get(key);
    return v == nullptr ? dflt : as_integer<Int>(*v, field(key));
  }

  std::string string(const std::string& key, const std::string& dflt) {
    const Json* v = get(key);
    if (v == nullptr) return dflt;
    if (!v->is_string()) throw ConfigError(field(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& dflt) {
    const Json* v = get(key);
    if (v == nullptr) return dflt;
    if (!v->is_array() || v->empty()) throw ConfigError(field(key) + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ConfigError(field(key) + ": expected a non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  template <class Int>
  static Int as_integer(const Json& v, const std::string& where) {
    if (v.is_number_integer()) {
      if constexpr (std::is_unsigned_v<Int>) {
        if (!v.is_number_unsigned()) throw ConfigError(where + ": must be nonnegative");
        return static_cast<Int>(v.get<std::uint64_t>());
      } else {
        return static_cast<Int>(v.get<std::int64_t>());
      }
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::fabs(d) < 9.0e15) {
        if (std::is_unsigned_v<Int> && d < 0) throw ConfigError(where + ": must be nonnegative");
        return static_cast<Int>(d);
      }
    }
    throw ConfigError(where + ": expected an integer");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline void check_positive(double v, const std::string& where) {
  if (!(v > 0.0)) throw ConfigError(where + ": must be positive");
}

}  // namespace detail

/// Parses and validates a config object. A manifest written by run() is
/// accepted too: its "config" member is used.
inline ExperimentConfig parse_config(const Json& doc) {
  const Json& root = (doc.is_object() && doc.contains("config") && doc.contains("tool")) ? doc["config"] : doc;
  detail::ObjectReader top(root, "config");
  ExperimentConfig cfg;

  const Json* kind = top.get("experiment");
  if (kind == nullptr || !kind->is_string()) throw ConfigError("config.experiment: required string");
  const auto k = parse_kind(kind->get<std::string>());
  if (!k) throw ConfigError("config.experiment: unknown experiment '" + kind->get<std::string>() + "'");
  cfg.kind = *k;

  if (const Json* m = top.get("model")) {
    detail::ObjectReader mr(*m, "config.model");
    const std::string fam = mr.string("family", "zero_drift");
    const auto f = parse_family(fam);
    if (!f) throw ConfigError("config.model.family: unknown family '" + fam + "'");
    cfg.model.family = *f;
    if (const Json* c = mr.get("c")) {
      if (c->is_array()) {
        cfg.c_values = mr.numbers("c", {});
        cfg.c_sweep = true;
      } else if (c->is_number()) {
        cfg.c_values = {c->get<double>()};
      } else {
        throw ConfigError("config.model.c: expected a number or an array of numbers");
      }
    }
    cfg.model.b = mr.integer<std::int64_t>("b", 1);
    cfg.model.eps_cap = mr.number("eps_cap", cfg.model.eps_cap);
    mr.finish();
  }
  cfg.model.c = cfg.c_values.front();
  for (double c : cfg.c_values) {
    ModelSpec probe = cfg.model;
    probe.c = c;
    try {
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.model: ") + e.what());
    }
  }

  if (const Json* w = top.get("wedge")) {
    detail::ObjectReader wr(*w, "config.wedge");
    if (const Json* a = wr.get("alpha")) {
      detail::ObjectReader ar(*a, "config.wedge.alpha");
      const auto num = ar.integer<std::int64_t>("pi_numerator", 1);
      const auto den = ar.integer<std::int64_t>("pi_denominator", 4);
      ar.finish();
      if (den == 0) throw ConfigError("config.wedge.alpha.pi_denominator: must be nonzero");
      cfg.wedge.alpha = PiFraction(num, den);
    }
    cfg.wedge.halfline_thickness = wr.integer<std::int64_t>("b", 1);
    cfg.wedge.excluded_radius = wr.number("A", 0.0);
    wr.finish();
  }
  try {
    cfg.wedge.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.wedge: ") + e.what());
  }

  if (const Json* s = top.get("start")) {
    if (!s->is_array() || s->size() != 2) throw ConfigError("config.start: expected [x1, x2]");
    cfg.start = {detail::ObjectReader::as_integer<std::int64_t>((*s)[0], "config.start[0]"),
                 detail::ObjectReader::as_integer<std::int64_t>((*s)[1], "config.start[1]")};
  }
  cfg.n_paths = top.integer<std::uint64_t>("n_paths", cfg.n_paths);
  cfg.t_max = top.integer<std::uint64_t>("t_max", cfg.t_max);
  cfg.master_seed = top.integer<std::uint64_t>("master_seed", cfg.master_seed);
  if (cfg.t_max < 1) throw ConfigError("config.t_max: must be positive");

  static const Json kEmpty = Json::object();
  const Json* pj = top.get("params");
  detail::ObjectReader pr(pj == nullptr ? kEmpty : *pj, "config.params");
  ExperimentParams& p = cfg.params;
  switch (cfg.kind) {
    case ExperimentKind::simulate:
      break;
    case ExperimentKind::tail_fit: {
      p.samples_file = pr.string("samples_file", "");
      if (const Json* win = pr.get("window")) {
        if (!win->is_array() || win->size() != 2) throw ConfigError("config.params.window: expected [t_lo, t_hi]");
        FitWindow fw{detail::ObjectReader::as_integer<std::uint64_t>((*win)[0], "config.params.window[0]"),
                     detail::ObjectReader::as_integer<std::uint64_t>((*win)[1], "config.params.window[1]")};
        if (fw.t_lo < 1 || fw.t_lo >= fw.t_hi) throw ConfigError("config.params.window: need 1 <= t_lo < t_hi");
        p.window = fw;
      }
      p.per_doubling = pr.integer<int>("per_doubling", 8);
      if (p.per_doubling < 1) throw ConfigError("config.params.per_doubling: must be positive");
      break;
    }
    case ExperimentKind::drift_check: {
      p.check = pr.string("check", p.check);
      if (p.check != "supermartingale" && p.check != "submartingale" && p.check != "lamperti") {
        throw ConfigError("config.params.check: expected supermartingale, submartingale or lamperti");
      }
      p.w = pr.number("w", p.w);
      p.gamma = pr.number("gamma", p.gamma);
      p.radii = pr.numbers("radii", p.radii);
      p.angles = pr.numbers("angles", p.angles);
      p.field = pr.string("field", p.field);
      if (p.field != "g" && p.field != "f") throw ConfigError("config.params.field: expected g or f");
      p.field_power = pr.number("field_power", p.field_power);
      p.p0 = pr.number("p0", p.p0);
      p.r_exp = pr.number("r_exp", p.r_exp);
      p.condition = pr.string("condition", p.condition);
      if (p.condition != "existence" && p.condition != "noncon1" && p.condition != "noncon2" &&
          p.condition != "noncon3") {
        throw ConfigError("config.params.condition: expected existence, noncon1, noncon2 or noncon3");
      }
      detail::check_positive(p.w, "config.params.w");
      detail::check_positive(p.field_power, "config.params.field_power");
      detail::check_positive(p.p0, "config.params.p0");
      if (!(p.r_exp > 1.0)) throw ConfigError("config.params.r_exp: must exceed 1");
      for (double r : p.radii) detail::check_positive(r, "config.params.radii");
      const double alpha = cfg.wedge.alpha.radians();
      if (p.check == "supermartingale") {
        if (p.w * alpha >= std::numbers::pi / 2.0) throw ConfigError("config.params.w: need w < pi / (2 alpha)");
        if (!(p.gamma > 0.0) || p.gamma == 1.0) throw ConfigError("config.params.gamma: need gamma > 0, gamma != 1");
      } else if (p.check == "submartingale") {
        if (!(p.gamma > 1.0)) throw ConfigError("config.params.gamma: need gamma > 1");
      } else if (p.field == "g" && 2 * cfg.wedge.alpha.numerator() >= cfg.wedge.alpha.denominator()) {
        throw ConfigError("config.params.field: g requires alpha < pi/2");
      }
      break;
    }
    case ExperimentKind::lyapunov_eval: {
      p.w = pr.number("w", 2.0);
      p.radii = pr.numbers("radii", p.radii);
      p.angles = pr.numbers("angles", p.angles);
      detail::check_positive(p.w, "config.params.w");
      for (double r : p.radii) detail::check_positive(r, "config.params.radii");
      break;
    }
    case ExperimentKind::rect_exit: {
      p.frame = pr.integer<int>("frame", p.frame);
      if (p.frame < 1 || p.frame > 7) throw ConfigError("config.params.frame: must lie in 1..7");
      if (const Json* ns = pr.get("N")) {
        if (!ns->is_array() || ns->empty()) throw ConfigError("config.params.N: expected a non-empty integer array");
        p.N.clear();
        for (const auto& e : *ns) {
          const auto n = detail::ObjectReader::as_integer<std::int64_t>(e, "config.params.N");
          if (n < 1) throw ConfigError("config.params.N: entries must be positive");
          p.N.push_back(n);
        }
      }
      p.h = pr.number("h", p.h);
      detail::check_positive(p.h, "config.params.h");
      p.y = pr.integer<std::int64_t>("y", p.y);
      p.z = pr.integer<std::int64_t>("z", p.z);
      if (std::llabs(p.z) > cfg.model.b) throw ConfigError("config.params.z: |z| must not exceed b");
      for (auto n : p.N) {
        if (std::fabs(static_cast<double>(p.y)) > 2.0 * p.h * static_cast<double>(n)) {
          throw ConfigError("config.params.y: |y| must not exceed 2 h N for every N");
        }
      }
      break;
    }
    case ExperimentKind::boundary_scaling: {
      p.r = pr.number("r", p.r);
      p.angles = pr.numbers("angles", {0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75, 0.9, -0.9});
      p.eps1 = pr.number("eps1", p.eps1);
      detail::check_positive(p.r, "config.params.r");
      detail::check_positive(p.eps1, "config.params.eps1");
      break;
    }
  }
  pr.finish();
  top.finish();
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(doc);
}

/// The fully resolved config, defaults included. parse_config inverts it.
inline Json to_json(const ExperimentConfig& cfg) {
  Json model = to_json(cfg.model);
  if (cfg.c_sweep) model["c"] = cfg.c_values;
  Json j{{"experiment", to_string(cfg.kind)},
         {"model", model},
         {"wedge", to_json(cfg.wedge)},
         {"start", Json::array({cfg.start.x1, cfg.start.x2})},
         {"n_paths", cfg.n_paths},
         {"t_max", cfg.t_max},
         {"master_seed", cfg.master_seed}};
  const ExperimentParams& p = cfg.params;
  Json params = Json::object();
  switch (cfg.kind) {
    case ExperimentKind::simulate:
      break;
    case ExperimentKind::tail_fit:
      params["samples_file"] = p.samples_file;
      if (p.window) params["window"] = Json::array({p.window->t_lo, p.window->t_hi});
      params["per_doubling"] = p.per_doubling;
      break;
    case ExperimentKind::drift_check:
      params = Json{{"check", p.check},         {"w", p.w},         {"gamma", p.gamma},
                    {"radii", p.radii},         {"angles", p.angles}, {"field", p.field},
                    {"field_power", p.field_power}, {"p0", p.p0},   {"r_exp", p.r_exp},
                    {"condition", p.condition}};
      break;
    case ExperimentKind::lyapunov_eval:
      params = Json{{"w", p.w}, {"radii", p.radii}, {"angles", p.angles}};
      break;
    case ExperimentKind::rect_exit:
      params = Json{{"frame", p.frame}, {"N", p.N}, {"h", p.h}, {"y", p.y}, {"z", p.z}};
      break;
    case ExperimentKind::boundary_scaling:
      params = Json{{"r", p.r}, {"angles", p.angles}, {"eps1", p.eps1}};
      break;
  }
  j["params"] = params;
  return j;
}

// ---------------------------------------------------------------------------
// Running.

/// Exclusive lock on an output directory, released on destruction.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".nhwalk.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw std::runtime_error("output directory is locked by another run (" + path_.string() + ")");
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunResult {
  ExitStatus status = ExitStatus::ok;
  std::vector<std::string> outputs;  // file names relative to the output directory
  std::string message;
};

namespace detail {

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    body(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + (dir_ / name).string());
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

inline std::string with_suffix(const std::string& stem, const std::string& suffix) {
  return stem + suffix + ".csv";
}

inline std::vector<double> scaled_angles(const ExperimentConfig& cfg) {
  const double alpha = cfg.wedge.alpha.radians();
  std::vector<double> out;
  for (double a : cfg.params.angles) out.push_back(a * alpha);
  return out;
}

inline std::vector<Lattice> grid_states(const ExperimentConfig& cfg) {
  std::vector<Lattice> out;
  for (double r : cfg.params.radii) {
    for (double phi : scaled_angles(cfg)) out.push_back(lattice_at(r, phi));
  }
  return out;
}

/// Runs one model instance (one point of a c sweep). Returns false when a
/// checked inequality fails.
inline bool run_one(const ExperimentConfig& cfg, const ModelSpec& model, const std::string& sfx,
                    unsigned workers, OutputDir& out, std::ostream& log) {
  const ExperimentParams& p = cfg.params;
  BatchConfig batch = cfg.batch(model.c);
  switch (cfg.kind) {
    case ExperimentKind::simulate: {
      for (const auto& w : batch_warnings(batch)) log << "warning: " << w << "\n";
      const auto samples = run_batch(batch, workers);
      out.write(with_suffix("exit_samples", sfx), [&](std::ostream& os) { write_exit_samples(os, batch, samples); });
      return true;
    }
    case ExperimentKind::tail_fit: {
      std::vector<ExitSample> samples;
      if (!p.samples_file.empty()) {
        std::ifstream in(p.samples_file);
        if (!in) throw std::runtime_error("cannot open samples file " + p.samples_file);
        samples = read_exit_samples(in);
        if (samples.empty()) throw InsufficientDataError("samples file holds no samples");
      } else {
        for (const auto& w : batch_warnings(batch)) log << "warning: " << w << "\n";
        samples = run_batch(batch, workers);
        out.write(with_suffix("exit_samples", sfx), [&](std::ostream& os) { write_exit_samples(os, batch, samples); });
      }
      std::uint64_t t_max = samples.front().t_max;
      for (const auto& s : samples) t_max = std::min(t_max, s.t_max);
      const FitWindow win = p.window.value_or(default_window(t_max));
      if (win.t_hi >= t_max) throw ConfigError("config.params.window: t_hi must be below t_max");
      const auto grid = geometric_grid(win.t_lo, win.t_hi, p.per_doubling);
      const SurvivalCurve curve = survival_curve(samples, grid);
      out.write(with_suffix("survival", sfx), [&](std::ostream& os) { write_survival(os, curve); });
      const TailFit fit = fit_tail_exponent(curve, win);
      out.write(with_suffix("tailfit", sfx), [&](std::ostream& os) { write_tailfit(os, fit); });
      log << "gamma_hat" << sfx << " = " << format_double(fit.gamma_hat) << " (stderr "
          << format_double(fit.std_error) << ", R^2 " << format_double(fit.r_squared) << ")\n";
      return true;
    }
    case ExperimentKind::drift_check: {
      const auto angles = scaled_angles(cfg);
      if (p.check == "lamperti") {
        const WedgeTest test(cfg.wedge);
        const auto states = grid_states(cfg);
        const auto in_region = [&test](Lattice x) { return test.in_wedge(x); };
        LampertiReport rep;
        if (p.field == "g") {
          const GFunctionParams gp(cfg.wedge.alpha.radians());
          const double pw = p.field_power;
          rep = check_lamperti(model, [&gp, pw](Lattice x) { return std::pow(g_eval(gp, x), pw); }, in_region,
                               p.p0, p.r_exp, states);
        } else {
          const double w = p.w, pw = p.field_power;
          rep = check_lamperti(model, [w, pw](Lattice x) { return std::pow(std::max(f_eval(w, x), 0.0), pw); },
                               in_region, p.p0, p.r_exp, states);
        }
        for (const auto& n : rep.notes) log << "note: " << n << "\n";
        std::vector<LyapunovReport> rows;
        for (const auto& r : rep.rows) {
          const PolarPoint pp = to_polar(r.state);
          LyapunovReport row;
          row.point = to_real(r.state);
          row.r = pp.r;
          row.phi = pp.phi;
          row.exact = r.inc_p0;
          row.margin = r.inc_p0;
          rows.push_back(row);
        }
        out.write(with_suffix("lyapunov_report", sfx), [&](std::ostream& os) { write_lyapunov_report(os, rows); });
        out.write(with_suffix("lamperti_report", sfx), [&](std::ostream& os) { write_lamperti(os, rep); });
        out.write(with_suffix("lamperti_summary", sfx), [&](std::ostream& os) { write_lamperti_summary(os, rep); });
        if (rep.rows.empty()) throw InsufficientDataError("lamperti check: no states inside the region");
        bool holds = rep.noncon1_holds;
        if (p.condition == "existence") holds = rep.existence_holds;
        if (p.condition == "noncon2") holds = rep.noncon2_holds;
        if (p.condition == "noncon3") holds = rep.noncon3_holds;
        log << "lamperti " << p.condition << sfx << ": " << (holds ? "holds" : "fails") << "\n";
        return holds;
      }
      const CheckResult res = p.check == "supermartingale"
                                  ? check_supermartingale_subcritical(model, cfg.wedge, p.w, p.gamma, p.radii, angles)
                                  : check_submartingale_fhat(model, cfg.wedge, p.gamma, p.radii, angles);
      for (const auto& n : res.notes) log << "note: " << n << "\n";
      out.write(with_suffix("lyapunov_report", sfx), [&](std::ostream& os) { write_lyapunov_report(os, res.rows); });
      if (res.rows.empty()) throw InsufficientDataError("drift check: no grid point inside the wedge");
      log << p.check << sfx << ": worst margin " << format_double(res.worst_margin) << ", "
          << (res.holds ? "holds" : "fails") << "\n";
      return res.holds;
    }
    case ExperimentKind::lyapunov_eval: {
      const double w = p.w;
      const auto field = [w](Lattice x) { return f_eval(w, x); };
      std::vector<LyapunovReport> mean_rows, second_rows;
      for (const Lattice& x : grid_states(cfg)) {
        if (x.x1 == 0 && x.x2 == 0) {
          log << "note: origin skipped\n";
          continue;
        }
        const Vec2d mu = drift_at(model, x);
        const Mat2 M = covariance_at(model, x);
        const PolarPoint pp = to_polar(x);
        const double m1 = exact_increment_moment(model, field, x, 1);
        const double a1 = expansion_mean(w, x, mu, M);
        LyapunovReport r1 = detail::make_row(x, m1, a1, w - 3.0, 0.0);
        r1.margin = std::fabs(r1.residual) * std::pow(pp.r, 3.0 - w);
        mean_rows.push_back(r1);
        const double m2 = exact_increment_moment(model, field, x, 2);
        const double a2 = expansion_second(w, x, M);
        LyapunovReport r2 = detail::make_row(x, m2, a2, 2.0 * w - 3.0, 0.0);
        r2.margin = std::fabs(r2.residual) * std::pow(pp.r, 3.0 - 2.0 * w);
        second_rows.push_back(r2);
      }
      out.write(with_suffix("lyapunov_report", sfx), [&](std::ostream& os) { write_lyapunov_report(os, mean_rows); });
      out.write(with_suffix("lyapunov_second", sfx), [&](std::ostream& os) { write_lyapunov_report(os, second_rows); });
      return true;
    }
    case ExperimentKind::rect_exit: {
      std::vector<RectExitEstimate> rows;
      for (auto n : p.N) {
        RectFrame frame{p.frame, n, p.h};
        rows.push_back(rect_exit_experiment(model, frame, p.y, p.z, cfg.n_paths, cfg.master_seed, workers));
        log << "N=" << n << ": delta=" << format_double(rows.back().delta) << "\n";
      }
      out.write(with_suffix("rect_exit", sfx), [&](std::ostream& os) { write_rect_exit(os, rows); });
      return true;
    }
    case ExperimentKind::boundary_scaling: {
      const auto phis = scaled_angles(cfg);
      const auto res = boundary_scaling_experiment(model, cfg.wedge, p.r, phis, p.eps1, cfg.n_paths,
                                                   cfg.master_seed, workers);
      for (const auto& n : res.notes) log << "note: " << n << "\n";
      out.write(with_suffix("boundary_scaling", sfx), [&](std::ostream& os) { write_boundary_scaling(os, res); });
      if (res.points.size() >= 2) {
        std::vector<double> a, b;
        for (const auto& pt : res.points) {
          a.push_back(pt.p_hat);
          b.push_back(pt.cos_wphi);
        }
        const double rho = pearson(a, b);
        out.write(with_suffix("boundary_summary", sfx), [&](std::ostream& os) {
          os << "horizon,n_points,pearson\n"
             << res.horizon << ',' << res.points.size() << ',' << format_double(rho) << '\n';
        });
      }
      return true;
    }
  }
  return true;
}

}  // namespace detail

/// Runs a parsed config into out_dir. Writes manifest.json last.
inline RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                unsigned workers, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  DirLock lock(out_dir);
  detail::OutputDir out(out_dir);
  RunResult result;
  bool all_hold = true;
  for (double c : cfg.c_values) {
    ModelSpec m = cfg.model;
    m.c = c;
    const std::string sfx = cfg.c_sweep ? "_c" + format_double(c) : "";
    all_hold = detail::run_one(cfg, m, sfx, workers, out, log) && all_hold;
  }
  if (!all_hold) {
    result.status = ExitStatus::check_failed;
    result.message = "drift inequality fails on the grid";
  }
  Json manifest{{"tool", kToolName},
                {"version", kVersion},
                {"created_utc", utc_timestamp()},
                {"config", to_json(cfg)},
                {"outputs", out.written()},
                {"status", static_cast<int>(result.status)}};
  out.write("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << "\n"; });
  result.outputs = out.written();
  return result;
}

/// Full pipeline with exit-status mapping: config problems 2, insufficient
/// data 3, failed drift checks 4, anything else 1.
inline int run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
               unsigned workers, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::config_error);
  } catch (const std::invalid_argument& e) {
    log << "error: config: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::config_error);
  }
  try {
    const RunResult r = run_experiment(cfg, out_dir, workers, log);
    if (!r.message.empty()) log << "result: " << r.message << "\n";
    return static_cast<int>(r.status);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::config_error);
  } catch (const InsufficientDataError& e) {
    log << "error: insufficient data: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::insufficient_data);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::runtime_failure);
  }
}

}  // namespace nhwalk
