#include "pp/date.hpp"

#include <charconv>
#include <cstdio>

#include "pp/error.hpp"

namespace pp {

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    fail(ErrorCode::InvalidArgument, "invalid calendar date");
  }
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view iso) {
  auto bad = [&]() -> Date {
    fail(ErrorCode::InvalidArgument, "expected YYYY-MM-DD, got '" + std::string(iso) + "'");
  };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return bad();
  int y = 0;
  unsigned m = 0, d = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
    return ec == std::errc{} && ptr == iso.data() + pos + len;
  };
  if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return bad();
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return bad();
  return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace pp
