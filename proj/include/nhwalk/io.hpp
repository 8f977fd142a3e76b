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

// CSV and JSON serialization of samples, curves, fits and reports.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nhwalk/geometry.hpp"
#include "nhwalk/lyapunov.hpp"
#include "nhwalk/models.hpp"
#include "nhwalk/simulate.hpp"
#include "nhwalk/stats.hpp"

namespace nhwalk {

using Json = nlohmann::ordered_json;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips; "nan" / "inf" / "-inf" otherwise.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Json to_json(const ModelSpec& m) {
  return Json{{"family", std::string(to_string(m.family))}, {"c", m.c}, {"b", m.b}, {"eps_cap", m.eps_cap}};
}

inline Json to_json(const PiFraction& a) {
  return Json{{"pi_numerator", a.numerator()}, {"pi_denominator", a.denominator()}};
}

inline Json to_json(const WedgeSpec& w) {
  return Json{{"alpha", to_json(w.alpha)}, {"b", w.halfline_thickness}, {"A", w.excluded_radius}};
}

inline Json to_json(const BatchConfig& c) {
  return Json{{"model", to_json(c.model)},
              {"wedge", to_json(c.wedge)},
              {"start", Json::array({c.x0.x1, c.x0.x2})},
              {"n_paths", c.n_paths},
              {"t_max", c.t_max},
              {"master_seed", c.master_seed}};
}

// ---------------------------------------------------------------------------
// Exit samples.

inline void write_exit_samples(std::ostream& os, const BatchConfig& cfg,
                               std::span<const ExitSample> samples) {
  os << "# nhwalk exit samples\n";
  os << "# batch_config: " << to_json(cfg).dump() << "\n";
  os << "path_id,tau,censored,x0_1,x0_2,t_max\n";
  for (const auto& s : samples) {
    os << s.path_id << ',' << s.tau << ',' << (s.censored ? 1 : 0) << ',' << s.x0.x1 << ','
       << s.x0.x2 << ',' << s.t_max << '\n';
  }
}

namespace detail {

template <class T>
T parse_int_field(std::string_view text, std::size_t line_no, const char* name) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DataError("exit samples line " + std::to_string(line_no) + ": bad " + name + " '" +
                    std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads the exit-sample CSV; '#' lines and the column header are skipped.
inline std::vector<ExitSample> read_exit_samples(std::istream& is) {
  std::vector<ExitSample> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "path_id,tau,censored,x0_1,x0_2,t_max") {
        throw DataError("exit samples: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 6) {
      throw DataError("exit samples line " + std::to_string(line_no) + ": expected 6 columns");
    }
    ExitSample s;
    s.path_id = detail::parse_int_field<std::uint64_t>(cols[0], line_no, "path_id");
    s.tau = detail::parse_int_field<std::uint64_t>(cols[1], line_no, "tau");
    const int cens = detail::parse_int_field<int>(cols[2], line_no, "censored");
    if (cens != 0 && cens != 1) throw DataError("exit samples line " + std::to_string(line_no) + ": censored must be 0 or 1");
    s.censored = cens == 1;
    s.x0.x1 = detail::parse_int_field<std::int64_t>(cols[3], line_no, "x0_1");
    s.x0.x2 = detail::parse_int_field<std::int64_t>(cols[4], line_no, "x0_2");
    s.t_max = detail::parse_int_field<std::uint64_t>(cols[5], line_no, "t_max");
    if (s.tau > s.t_max) throw DataError("exit samples line " + std::to_string(line_no) + ": tau exceeds t_max");
    out.push_back(s);
  }
  if (!header_seen) throw DataError("exit samples: missing column header");
  return out;
}

// ---------------------------------------------------------------------------
// Plot-ready tables.

inline void write_survival(std::ostream& os, const SurvivalCurve& c) {
  os << "t,S,n_at_risk\n";
  for (const auto& p : c.points) os << p.t << ',' << format_double(p.S) << ',' << p.n_at_risk << '\n';
}

inline void write_tailfit(std::ostream& os, const TailFit& f) {
  os << "gamma_hat,stderr,r_squared,t_lo,t_hi,n_paths\n";
  os << format_double(f.gamma_hat) << ',' << format_double(f.std_error) << ','
     << format_double(f.r_squared) << ',' << f.window.t_lo << ',' << f.window.t_hi << ','
     << f.n_paths << '\n';
}

inline void write_lyapunov_report(std::ostream& os, std::span<const LyapunovReport> rows) {
  os << "r,phi,exact,analytic,residual,margin\n";
  for (const auto& r : rows) {
    os << format_double(r.r) << ',' << format_double(r.phi) << ',' << format_double(r.exact) << ','
       << format_double(r.analytic) << ',' << format_double(r.residual) << ','
       << format_double(r.margin) << '\n';
  }
}

inline void write_lamperti(std::ostream& os, const LampertiReport& rep) {
  os << "x1,x2,y,inc_2p0,inc_2,inc_2r\n";
  for (const auto& r : rep.rows) {
    os << r.state.x1 << ',' << r.state.x2 << ',' << format_double(r.y) << ','
       << format_double(r.inc_p0) << ',' << format_double(r.inc_2) << ',' << format_double(r.inc_r)
       << '\n';
  }
}

inline void write_lamperti_summary(std::ostream& os, const LampertiReport& rep) {
  os << "condition,constant,holds\n";
  os << "existence," << format_double(rep.existence_C) << ',' << rep.existence_holds << '\n';
  os << "noncon1," << format_double(rep.noncon1_min) << ',' << rep.noncon1_holds << '\n';
  os << "noncon2," << format_double(rep.noncon2_C) << ',' << rep.noncon2_holds << '\n';
  os << "noncon3," << format_double(rep.noncon3_D) << ',' << rep.noncon3_holds << '\n';
}

inline void write_rect_exit(std::ostream& os, std::span<const RectExitEstimate> rows) {
  os << "N,n_paths,hit_u1,hit_u2,unreached,step_cap,delta,stderr\n";
  for (const auto& e : rows) {
    os << e.N << ',' << e.n_paths << ',' << e.hit_u1 << ',' << e.hit_u2 << ',' << e.unreached << ','
       << e.step_cap << ',' << format_double(e.delta) << ',' << format_double(e.std_error) << '\n';
  }
}

inline void write_boundary_scaling(std::ostream& os, const BoundaryScalingResult& res) {
  os << "phi,x0_1,x0_2,p_hat,stderr,cos_wphi\n";
  for (const auto& p : res.points) {
    os << format_double(p.phi) << ',' << p.x0.x1 << ',' << p.x0.x2 << ',' << format_double(p.p_hat)
       << ',' << format_double(p.std_error) << ',' << format_double(p.cos_wphi) << '\n';
  }
}

}  // namespace nhwalk
