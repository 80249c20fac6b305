#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace pp {

/// Calendar date (proleptic Gregorian, day resolution). Serialized as
/// ISO-8601 `YYYY-MM-DD`.
class Date {
 public:
  constexpr Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Throws Error{InvalidArgument} on anything other than a valid YYYY-MM-DD.
  static Date parse(std::string_view iso);

  std::string iso() const;
  long long day_number() const { return days_.time_since_epoch().count(); }
  Date plus_days(long long n) const { return Date(days_ + std::chrono::days(n)); }

  friend long long operator-(const Date& a, const Date& b) {
    return (a.days_ - b.days_).count();
  }
  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

inline constexpr double kDaysPerYear = 365.25;
inline constexpr double kDaysPerMonth = kDaysPerYear / 12.0;

}  // namespace pp
