#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "radsim/errors.hpp"

namespace radsim {

using Clock = std::chrono::sys_seconds;

struct SitePosition {
  double latitude{0.0};   // deg, north positive
  double longitude{0.0};  // deg, east positive
  double albedo{0.2};

  friend bool operator==(const SitePosition&, const SitePosition&) = default;

  void validate() const {
    if (!(std::abs(latitude) <= 90.0)) throw ValidationError("site latitude must lie in [-90, 90]");
    if (!(albedo >= 0.0 && albedo <= 1.0)) throw ValidationError("site albedo must lie in [0, 1]");
  }
};

/// Cardinal facade orientations, indexed like the solver's face directions.
enum class Orientation { East = 0, North = 1, West = 2, South = 3 };

inline constexpr std::array<Orientation, 4> kOrientations{Orientation::East, Orientation::North,
                                                           Orientation::West, Orientation::South};

/// Surface azimuth in degrees clockwise from north.
constexpr double orientation_azimuth(Orientation o) {
  switch (o) {
    case Orientation::East: return 90.0;
    case Orientation::North: return 0.0;
    case Orientation::West: return 270.0;
    case Orientation::South: return 180.0;
  }
  return 0.0;
}

struct SolarGeometry {
  double zenith{90.0};   // deg
  double azimuth{0.0};   // deg clockwise from north, [0, 360)
  std::array<double, 4> aoi_per_orientation{};  // vertical facades, indexed by Orientation

  double aoi(Orientation o) const { return aoi_per_orientation[static_cast<int>(o)]; }
};

namespace detail {
inline constexpr double kDeg = std::numbers::pi / 180.0;
}

/// Angle of incidence [deg] between the sun and a surface of given tilt and azimuth.
inline double angle_of_incidence(double zenith_deg, double sun_azimuth_deg, double tilt_deg,
                                 double surface_azimuth_deg) {
  using detail::kDeg;
  const double cos_aoi = std::cos(zenith_deg * kDeg) * std::cos(tilt_deg * kDeg) +
                         std::sin(zenith_deg * kDeg) * std::sin(tilt_deg * kDeg) *
                             std::cos((sun_azimuth_deg - surface_azimuth_deg) * kDeg);
  return std::acos(std::clamp(cos_aoi, -1.0, 1.0)) / kDeg;
}

/// NOAA general solar position (fractional-year series for declination and
/// equation of time, then hour angle). Accurate to a fraction of a degree.
inline SolarGeometry solar_position(const SitePosition& site, Clock timestamp) {
  using namespace std::chrono;
  using detail::kDeg;
  const auto day = floor<days>(timestamp);
  const year_month_day ymd{day};
  const auto jan1 = sys_days{ymd.year() / January / 1};
  const int day_of_year = static_cast<int>((day - jan1).count()) + 1;
  const bool leap = ymd.year().is_leap();
  const double seconds_of_day = static_cast<double>((timestamp - day).count());
  const double hour = seconds_of_day / 3600.0;

  const double gamma = 2.0 * std::numbers::pi / (leap ? 366.0 : 365.0) * (day_of_year - 1 + (hour - 12.0) / 24.0);
  const double eqtime = 229.18 * (0.000075 + 0.001868 * std::cos(gamma) - 0.032077 * std::sin(gamma) -
                                  0.014615 * std::cos(2 * gamma) - 0.040849 * std::sin(2 * gamma));
  const double decl = 0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
                      0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma) -
                      0.002697 * std::cos(3 * gamma) + 0.00148 * std::sin(3 * gamma);

  const double true_solar_minutes = hour * 60.0 + eqtime + 4.0 * site.longitude;
  const double hour_angle = (true_solar_minutes / 4.0 - 180.0) * kDeg;
  const double lat = site.latitude * kDeg;

  const double cos_zen = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
  const double zen = std::acos(std::clamp(cos_zen, -1.0, 1.0));

  // Azimuth from north via atan2 of the horizontal sun vector (east, north components).
  const double east = -std::cos(decl) * std::sin(hour_angle);
  const double north = std::sin(decl) * std::cos(lat) - std::cos(decl) * std::sin(lat) * std::cos(hour_angle);
  double az = std::atan2(east, north) / kDeg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;

  SolarGeometry g;
  g.zenith = zen / kDeg;
  g.azimuth = az;
  for (Orientation o : kOrientations)
    g.aoi_per_orientation[static_cast<int>(o)] = angle_of_incidence(g.zenith, g.azimuth, 90.0, orientation_azimuth(o));
  return g;
}

/// Diffuse-sky and ground-reflected geometric factors; they sum to one.
inline double sky_diffuse_factor(double tilt_deg) { return 0.5 * (1.0 + std::cos(tilt_deg * detail::kDeg)); }
inline double ground_reflect_factor(double tilt_deg) { return 0.5 * (1.0 - std::cos(tilt_deg * detail::kDeg)); }

/// Isotropic-sky plane-of-array irradiance [W/m^2] from beam, diffuse and
/// ground-reflected components. Beam term is dropped when the sun is behind
/// the plane or below the horizon.
inline double poa_irradiance(double ghi, double dni, double dhi, double aoi_deg, double zenith_deg, double tilt_deg,
                             double albedo) {
  if (tilt_deg < 0.0 || tilt_deg > 180.0) throw std::invalid_argument("tilt must lie in [0, 180] degrees");
  const double cos_aoi = std::cos(aoi_deg * detail::kDeg);
  const double beam = (zenith_deg < 90.0) ? dni * std::max(cos_aoi, 0.0) : 0.0;
  const double value = beam + dhi * sky_diffuse_factor(tilt_deg) + ghi * albedo * ground_reflect_factor(tilt_deg);
  return std::max(value, 0.0);
}

struct SolarFluxes {
  double absorbed{0.0};     // alpha * G  [W/m^2]
  double transmitted{0.0};  // tau * G    [W/m^2]
};

inline SolarFluxes solar_fluxes(double poa, double alpha, double tau) {
  if (alpha < 0.0 || alpha > 1.0 || tau < 0.0 || tau > 1.0 || alpha + tau > 1.0)
    throw std::invalid_argument("solar_fluxes: need alpha, tau in [0,1] and alpha + tau <= 1");
  return {alpha * poa, tau * poa};
}

}  // namespace radsim
