#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "radsim/errors.hpp"
#include "radsim/solar.hpp"

namespace radsim {

struct WeatherRecord {
  Clock timestamp{};
  double t_air{0.0};  // ambient [K]; also the convective far-field temperature
  double t_gnd{0.0};
  std::optional<double> t_sky;
  double ghi{0.0};
  double dni{0.0};
  double dhi{0.0};
};

inline constexpr double kSwinbankCoefficient = 0.0552;

/// Sky temperature [K]: measured value when present, else Swinbank clear-sky estimate.
inline double sky_temperature(const WeatherRecord& r) {
  if (r.t_sky) return *r.t_sky;
  return kSwinbankCoefficient * std::pow(r.t_air, 1.5);
}

/// Plane-of-array irradiance for the four vertical-or-tilted cardinal facades.
struct PoaIrradiance {
  std::array<double, 4> g_ts{};
  double operator[](Orientation o) const { return g_ts[static_cast<int>(o)]; }
};

inline double poa_irradiance(const WeatherRecord& r, const SolarGeometry& geom, double tilt_deg,
                             double surface_azimuth_deg, double albedo) {
  const double aoi = angle_of_incidence(geom.zenith, geom.azimuth, tilt_deg, surface_azimuth_deg);
  return poa_irradiance(r.ghi, r.dni, r.dhi, aoi, geom.zenith, tilt_deg, albedo);
}

inline PoaIrradiance facade_irradiance(const WeatherRecord& r, const SolarGeometry& geom, double tilt_deg,
                                       double albedo) {
  PoaIrradiance poa;
  for (Orientation o : kOrientations)
    poa.g_ts[static_cast<int>(o)] = poa_irradiance(r, geom, tilt_deg, orientation_azimuth(o), albedo);
  return poa;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

}  // namespace detail

/// Parses ISO-8601 `YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]`. No offset means UTC.
inline std::optional<Clock> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  s = detail::trim(s);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
    return std::nullopt;
  if (!detail::parse_fixed_int(s, 0, 4, y) || !detail::parse_fixed_int(s, 5, 2, mo) ||
      !detail::parse_fixed_int(s, 8, 2, d) || !detail::parse_fixed_int(s, 11, 2, h) ||
      !detail::parse_fixed_int(s, 14, 2, mi))
    return std::nullopt;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::parse_fixed_int(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
  }
  int offset_min = 0;
  if (pos < s.size()) {
    const char tz = s[pos];
    if (tz == 'Z' && pos + 1 == s.size()) {
    } else if ((tz == '+' || tz == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!detail::parse_fixed_int(s, pos + 1, 2, oh) || !detail::parse_fixed_int(s, pos + 4, 2, om))
        return std::nullopt;
      offset_min = (tz == '+' ? 1 : -1) * (oh * 60 + om);
    } else {
      return std::nullopt;
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_min};
}

inline std::string format_timestamp(Clock t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

/// Loads weather CSV. Header names the columns (any order; t_sky optional);
/// an optional second row starting with `units` tags temperature columns K or C.
inline std::vector<WeatherRecord> load_weather(std::string_view csv_text) {
  std::istringstream in{std::string(csv_text)};
  std::string line;
  std::size_t line_no = 0;

  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = detail::trim(line);
      if (!t.empty() && t.front() != '#') return true;
    }
    return false;
  };

  if (!next_content_line()) throw ParseError("weather: empty document");
  const auto header = detail::split_csv(line);
  constexpr std::array<std::string_view, 7> kColumns{"timestamp", "t_air", "t_gnd", "t_sky", "ghi", "dni", "dhi"};
  std::array<int, 7> idx{};
  idx.fill(-1);
  for (std::size_t i = 0; i < header.size(); ++i)
    for (std::size_t k = 0; k < kColumns.size(); ++k)
      if (detail::lower(header[i]) == kColumns[k]) idx[k] = static_cast<int>(i);
  for (std::size_t k = 0; k < kColumns.size(); ++k)
    if (idx[k] < 0 && kColumns[k] != "t_sky")
      throw ParseError("weather: missing mandatory column '" + std::string(kColumns[k]) + "'");

  std::array<double, 7> offset{};  // Celsius -> Kelvin per column
  std::vector<WeatherRecord> records;
  bool first_data = true;
  while (next_content_line()) {
    const auto fields = detail::split_csv(line);
    if (first_data && !fields.empty() && detail::lower(fields[0]) == "units") {
      first_data = false;
      for (std::size_t k : {1u, 2u, 3u}) {
        if (idx[k] < 0 || static_cast<std::size_t>(idx[k]) >= fields.size()) continue;
        const auto u = detail::lower(fields[static_cast<std::size_t>(idx[k])]);
        if (u == "c" || u == "degc") offset[k] = 273.15;
        else if (u != "k" && !u.empty())
          throw ParseError("weather line " + std::to_string(line_no) + ": unknown temperature unit '" + u + "'");
      }
      continue;
    }
    first_data = false;
    auto field = [&](std::size_t k) -> std::string_view {
      if (idx[k] < 0) return {};
      const auto i = static_cast<std::size_t>(idx[k]);
      if (i >= fields.size()) throw ParseError("weather line " + std::to_string(line_no) + ": too few fields");
      return fields[i];
    };
    auto number = [&](std::size_t k) {
      const auto v = detail::parse_double(field(k));
      if (!v)
        throw ParseError("weather line " + std::to_string(line_no) + ": bad value for '" +
                         std::string(kColumns[k]) + "'");
      return *v + offset[k];
    };

    WeatherRecord r;
    const auto ts = parse_timestamp(field(0));
    if (!ts) throw ParseError("weather line " + std::to_string(line_no) + ": bad timestamp");
    r.timestamp = *ts;
    r.t_air = number(1);
    r.t_gnd = number(2);
    if (auto sky = detail::parse_double(field(3))) r.t_sky = *sky + offset[3];
    else if (!detail::trim(field(3)).empty())
      throw ParseError("weather line " + std::to_string(line_no) + ": bad value for 't_sky'");
    r.ghi = number(4);
    r.dni = number(5);
    r.dhi = number(6);

    const auto where = " (weather line " + std::to_string(line_no) + ")";
    if (r.ghi < 0.0 || r.dni < 0.0 || r.dhi < 0.0) throw ValidationError("negative irradiance" + where);
    if (r.t_air <= 0.0 || r.t_gnd <= 0.0 || (r.t_sky && *r.t_sky <= 0.0))
      throw ValidationError("temperatures must be positive kelvin" + where);
    if (!records.empty() && r.timestamp <= records.back().timestamp)
      throw ValidationError("timestamps must be strictly increasing" + where);
    records.push_back(r);
  }
  if (records.empty()) throw ParseError("weather: no records");
  return records;
}

/// Zero-order hold: the latest record at or before `t`.
inline const WeatherRecord& weather_at(const std::vector<WeatherRecord>& records, Clock t) {
  if (records.empty() || t < records.front().timestamp)
    throw ValidationError("weather does not cover " + format_timestamp(t));
  auto it = std::upper_bound(records.begin(), records.end(), t,
                             [](Clock lhs, const WeatherRecord& r) { return lhs < r.timestamp; });
  return *std::prev(it);
}

}  // namespace radsim
