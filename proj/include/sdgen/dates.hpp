#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sdgen {

/// Proleptic Gregorian calendar date.
struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
    friend auto operator<=>(const CivilDate& a, const CivilDate& b) {
        if (a.year != b.year) return a.year <=> b.year;
        if (a.month != b.month) return a.month <=> b.month;
        return a.day <=> b.day;
    }
};

struct CivilTime {
    CivilDate date;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

bool is_valid_date(const CivilDate& d);

/// Days since 1970-01-01 (negative before).
int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(int64_t days);

CivilDate add_days(const CivilDate& d, int64_t n);
int64_t days_between(const CivilDate& a, const CivilDate& b);

/// 0 = Sunday .. 6 = Saturday.
int day_of_week(const CivilDate& d);

/// "YYYY-MM-DD"; parse returns nullopt on malformed or out-of-range input.
std::string format_date(const CivilDate& d);
std::optional<CivilDate> parse_date(std::string_view s);

/// First day of the period containing d. Supported parts: year, quarter,
/// month, week (Sunday-start, GoogleSQL default), day.
std::optional<CivilDate> truncate_date(const CivilDate& d, std::string_view part);

/// Minimal strftime subset shared by the timestamp format functions:
/// %Y %m %d %H %M %S and literal text.
std::string format_civil_time(const CivilTime& t, std::string_view fmt);
std::optional<CivilTime> parse_civil_time(std::string_view text, std::string_view fmt);

}  // namespace sdgen
