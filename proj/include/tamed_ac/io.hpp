#pragma once

// CSV and JSON artifact writers. Floats use the shortest round-trip-safe form
// at 17 significant digits, '.' as decimal separator and '\n' line endings,
// independent of the process locale.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "tamed_ac/analysis.hpp"
#include "tamed_ac/error.hpp"
#include "tamed_ac/property_suite.hpp"
#include "tamed_ac/spectral.hpp"

namespace tamed_ac {

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw IoError("cannot format floating-point value");
  return std::string(buf, res.ptr);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// CSV

inline std::string error_table_csv(const ErrorTable& t) {
  std::string s = "level,tau,weak_error,mc_halfwidth,n_samples,admissible,admissibility_ratio\n";
  for (const auto& r : t.rows) {
    s += std::to_string(r.level) + ',' + format_double(r.tau) + ',' + format_double(r.weak_error) + ',' +
         format_double(r.mc_halfwidth) + ',' + std::to_string(r.n_samples) + ',' + (r.admissible ? "1" : "0") + ',' +
         format_double(r.admissibility_ratio) + '\n';
  }
  return s;
}

inline std::string profile_csv(const SineBasis& basis, const ProfileSet& p) {
  std::string s = "time,node_index,x,mean_value\n";
  for (std::size_t t = 0; t < p.times.size(); ++t) {
    const auto& v = p.mean_profiles[t].values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      s += format_double(p.times[t]) + ',' + std::to_string(i + 1) + ',' + format_double(basis.node(i + 1)) + ',' +
           format_double(v[i]) + '\n';
    }
  }
  return s;
}

inline std::string moments_csv(const MomentReport& m) {
  std::string s = "time,mean_l2_sq,mean_l4_4,mean_sup\n";
  for (const auto& r : m.rows) {
    s += format_double(r.time) + ',' + format_double(r.mean_l2_sq) + ',' + format_double(r.mean_l4_4) + ',' +
         format_double(r.mean_sup) + '\n';
  }
  return s;
}

// Column label for a taming degree: 1 -> "1", 0.5 -> "1/2", otherwise 17 digits.
inline std::string alpha_label(double a) {
  if (a == 1.0) return "1";
  const double inv = 1.0 / a;
  if (inv == std::round(inv) && std::abs(inv) < 1e6) return "1/" + std::to_string(static_cast<long long>(inv));
  for (int d = 2; d <= 12; ++d) {
    const double n = a * d;
    if (std::abs(n - std::round(n)) < 1e-12) {
      return std::to_string(static_cast<long long>(std::round(n))) + "/" + std::to_string(d);
    }
  }
  return format_double(a);
}

// Wide table: one error column per taming degree in the given order, then
// one flag per degree marking rows whose error did not decrease.
inline std::string table1_csv(std::span<const double> alphas, std::span<const ErrorTable> tables) {
  std::string s = "level,tau";
  for (double a : alphas) s += ",alpha_" + alpha_label(a);
  for (double a : alphas) s += ",nondecreasing_alpha_" + alpha_label(a);
  s += '\n';
  if (tables.empty()) return s;
  const std::size_t n_rows = tables.front().rows.size();
  for (std::size_t r = 0; r < n_rows; ++r) {
    s += std::to_string(tables.front().rows[r].level) + ',' + format_double(tables.front().rows[r].tau);
    for (const auto& t : tables) s += ',' + format_double(t.rows[r].weak_error);
    for (const auto& t : tables) s += (r > 0 && !(t.rows[r].weak_error < t.rows[r - 1].weak_error)) ? ",1" : ",0";
    s += '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::ordered_json;

inline ordered_json to_json(const RateFit& f) {
  return ordered_json{{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}};
}

inline ordered_json to_json(const CheckResult& c) {
  return ordered_json{{"name", c.name},     {"passed", c.passed},   {"samples", c.samples},
                      {"worst_ratio", c.worst_ratio}, {"counterexample", c.counterexample}, {"detail", c.detail}};
}

inline ordered_json to_json(const PropertyReport& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["all_passed"] = r.all_passed();
  if (r.constants) {
    const auto& c = *r.constants;
    j["constants"] = ordered_json{{"lipschitz", c.lipschitz}, {"c0", c.c0}, {"c1", c.c1}, {"c2", c.c2},
                                  {"c3", c.c3},               {"c4", c.c4}, {"c5", c.c5}};
  } else {
    j["constants"] = nullptr;
  }
  j["checks"] = ordered_json::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  return j;
}

}  // namespace tamed_ac
