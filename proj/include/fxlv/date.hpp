#pragma once

#include <chrono>
#include <compare>
#include <stdexcept>
#include <string>

namespace fxlv {

// Calendar date with whole-day arithmetic. Stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;

  Date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok())
      throw std::invalid_argument("Date: invalid calendar date " +
                                  std::to_string(year * 10000 + month * 100 + day));
    serial_ = std::chrono::sys_days{ymd}.time_since_epoch().count();
  }

  // Parses the YYYYMMDD integer form used by all file formats.
  static Date from_yyyymmdd(long v) {
    if (v < 10000101 || v > 99991231)
      throw std::invalid_argument("Date: value out of YYYYMMDD range: " + std::to_string(v));
    return Date(static_cast<int>(v / 10000), static_cast<unsigned>((v / 100) % 100),
                static_cast<unsigned>(v % 100));
  }

  static Date from_serial(int days) {
    Date d;
    d.serial_ = days;
    return d;
  }

  int serial() const { return serial_; }

  int yyyymmdd() const {
    const auto ymd = ymd_();
    return static_cast<int>(ymd.year()) * 10000 +
           static_cast<int>(static_cast<unsigned>(ymd.month())) * 100 +
           static_cast<int>(static_cast<unsigned>(ymd.day()));
  }

  int year() const { return static_cast<int>(ymd_().year()); }
  unsigned month() const { return static_cast<unsigned>(ymd_().month()); }
  unsigned day() const { return static_cast<unsigned>(ymd_().day()); }

  // ISO weekday, 1 = Monday .. 7 = Sunday.
  unsigned weekday() const {
    const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{serial_}}};
    return wd.iso_encoding();
  }

  Date operator+(int days) const { return from_serial(serial_ + days); }
  Date operator-(int days) const { return from_serial(serial_ - days); }
  friend int operator-(Date a, Date b) { return a.serial_ - b.serial_; }

  auto operator<=>(const Date&) const = default;

  std::string to_string() const { return std::to_string(yyyymmdd()); }

 private:
  std::chrono::year_month_day ymd_() const {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{serial_}}};
  }

  int serial_ = 0;
};

inline int days_between(Date d1, Date d2) { return d2 - d1; }

// ACT/365 fixed year fraction. Throws if d1 > d2.
inline double year_fraction(Date d1, Date d2) {
  if (d1 > d2)
    throw std::invalid_argument("year_fraction: dates out of order (" + d1.to_string() +
                                " > " + d2.to_string() + ")");
  return static_cast<double>(d2 - d1) / 365.0;
}

}  // namespace fxlv
