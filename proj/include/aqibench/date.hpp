#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqibench/errors.hpp"

namespace aqibench {

/// Source layout of a date string. EPA portal exports use month/day/year;
/// some merged files circulate as day-month-year. Ambiguous strings are
/// resolved by a per-file format choice, never guessed.
enum class DateFormat { Iso, MonthDayYear, DayMonthYear };

inline std::optional<DateFormat> date_format_from_string(std::string_view s) {
    if (s == "iso") return DateFormat::Iso;
    if (s == "mdy") return DateFormat::MonthDayYear;
    if (s == "dmy") return DateFormat::DayMonthYear;
    return std::nullopt;
}

/// Calendar date stored as days since 1970-01-01.
class Date {
  public:
    Date() = default;

    Date(int year, unsigned month, unsigned day) {
        const std::chrono::year_month_day ymd{std::chrono::year{year},
                                              std::chrono::month{month},
                                              std::chrono::day{day}};
        if (!ymd.ok()) {
            throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                                  std::to_string(month) + "-" + std::to_string(day));
        }
        serial_ = std::chrono::sys_days{ymd}.time_since_epoch().count();
    }

    static Date from_serial(int serial) {
        Date d;
        d.serial_ = serial;
        return d;
    }

    /// Parses a date string in the given format. Two-digit years are taken as
    /// 20xx. Returns nullopt for anything that is not a valid calendar date.
    static std::optional<Date> parse(std::string_view text, DateFormat format) {
        int a = 0, b = 0, c = 0;
        if (!split_fields(text, a, b, c)) return std::nullopt;
        int y, m, d;
        switch (format) {
            case DateFormat::Iso: y = a; m = b; d = c; break;
            case DateFormat::MonthDayYear: m = a; d = b; y = c; break;
            case DateFormat::DayMonthYear: d = a; m = b; y = c; break;
            default: return std::nullopt;
        }
        if (y < 100) y += 2000;
        const std::chrono::year_month_day ymd{std::chrono::year{y},
                                              std::chrono::month{static_cast<unsigned>(m)},
                                              std::chrono::day{static_cast<unsigned>(d)}};
        if (!ymd.ok()) return std::nullopt;
        return from_serial(static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
    }

    int serial() const { return serial_; }

    Date plus_days(int n) const { return from_serial(serial_ + n); }

    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    unsigned day() const { return static_cast<unsigned>(ymd().day()); }

    std::string to_iso() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
        return buf;
    }

    auto operator<=>(const Date&) const = default;

  private:
    std::chrono::year_month_day ymd() const {
        return std::chrono::year_month_day{
            std::chrono::sys_days{std::chrono::days{serial_}}};
    }

    static bool split_fields(std::string_view text, int& a, int& b, int& c) {
        int vals[3] = {0, 0, 0};
        int field = 0;
        std::size_t pos = 0;
        while (pos < text.size() && field < 3) {
            std::size_t end = pos;
            while (end < text.size() && text[end] >= '0' && text[end] <= '9') ++end;
            if (end == pos) return false;
            auto res = std::from_chars(text.data() + pos, text.data() + end, vals[field]);
            if (res.ec != std::errc{}) return false;
            ++field;
            pos = end;
            if (pos < text.size()) {
                const char sep = text[pos];
                if (sep != '/' && sep != '-' && sep != '.') break;
                ++pos;
            }
        }
        if (field != 3 || pos != text.size()) return false;
        a = vals[0];
        b = vals[1];
        c = vals[2];
        return true;
    }

    int serial_ = 0;
};

}  // namespace aqibench
