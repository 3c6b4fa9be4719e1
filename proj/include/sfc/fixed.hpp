#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sfc {

// All quantities in this codebase are exact integers:
//   mbps_t  - traffic volumes, whole Mbps
//   qty_t   - host resources in units of 0.01 (8 cores -> 800, 1.75 GB -> 175)
//   money_t - costs in units of 0.0001, so beta=0.01 and alpha*demand products
//             with two decimals each stay exact
using mbps_t = std::int64_t;
using qty_t = std::int64_t;
using money_t = std::int64_t;

constexpr std::int64_t kQtyScale = 100;
constexpr std::int64_t kMoneyScale = 10000;

inline std::int64_t fixed_from_double(double v, std::int64_t scale, const char* what) {
  double scaled = v * static_cast<double>(scale);
  double nearest = std::round(scaled);
  if (!(std::fabs(scaled - nearest) < 1e-6 * (1.0 + std::fabs(scaled))))
    throw std::invalid_argument(std::string(what) + ": value " + std::to_string(v) +
                                " is not representable at 1/" + std::to_string(scale) +
                                " resolution");
  return static_cast<std::int64_t>(nearest);
}

inline qty_t qty_from_double(double v, const char* what = "quantity") {
  if (v < 0) throw std::invalid_argument(std::string(what) + ": negative quantity");
  return fixed_from_double(v, kQtyScale, what);
}

inline money_t money_from_double(double v, const char* what = "cost") {
  return fixed_from_double(v, kMoneyScale, what);
}

inline double money_to_double(money_t m) { return static_cast<double>(m) / kMoneyScale; }
inline double qty_to_double(qty_t q) { return static_cast<double>(q) / kQtyScale; }

// Prints with two decimals when the value lands on 0.01, else four.
inline std::string money_str(money_t m) {
  char buf[48];
  std::int64_t whole = m / kMoneyScale;
  std::int64_t frac = m % kMoneyScale;
  const char* sign = "";
  if (m < 0) {
    sign = "-";
    whole = -whole;
    frac = -frac;
  }
  if (frac % 100 == 0)
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", sign, static_cast<long long>(whole),
                  static_cast<long long>(frac / 100));
  else
    std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", sign, static_cast<long long>(whole),
                  static_cast<long long>(frac));
  return buf;
}

inline std::string qty_str(qty_t q) {
  char buf[48];
  std::int64_t whole = q / kQtyScale;
  std::int64_t frac = q % kQtyScale;
  const char* sign = "";
  if (q < 0) {
    sign = "-";
    whole = -whole;
    frac = -frac;
  }
  if (frac == 0)
    std::snprintf(buf, sizeof(buf), "%s%lld", sign, static_cast<long long>(whole));
  else
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", sign, static_cast<long long>(whole),
                  static_cast<long long>(frac));
  return buf;
}

}  // namespace sfc
