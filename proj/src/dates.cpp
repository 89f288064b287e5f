#include "sdgen/dates.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace sdgen {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int last_day_of_month(int y, int m) {
    static constexpr std::array<int, 12> days = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return days[m - 1];
}

}  // namespace

bool is_valid_date(const CivilDate& d) {
    if (d.month < 1 || d.month > 12) return false;
    if (d.day < 1 || d.day > last_day_of_month(d.year, d.month)) return false;
    return true;
}

// Low-level civil calendar conversions, days relative to 1970-01-01.
int64_t days_from_civil(const CivilDate& d) {
    int64_t y = d.year;
    unsigned m = static_cast<unsigned>(d.month);
    unsigned day = static_cast<unsigned>(d.day);
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

CivilDate civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(day)};
}

CivilDate add_days(const CivilDate& d, int64_t n) { return civil_from_days(days_from_civil(d) + n); }

int64_t days_between(const CivilDate& a, const CivilDate& b) {
    return days_from_civil(b) - days_from_civil(a);
}

int day_of_week(const CivilDate& d) {
    // 1970-01-01 was a Thursday (=4).
    int64_t z = days_from_civil(d);
    return static_cast<int>(((z % 7) + 7 + 4) % 7);
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::optional<CivilDate> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    }
    CivilDate d;
    d.year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    d.month = (s[5] - '0') * 10 + (s[6] - '0');
    d.day = (s[8] - '0') * 10 + (s[9] - '0');
    if (!is_valid_date(d)) return std::nullopt;
    return d;
}

std::optional<CivilDate> truncate_date(const CivilDate& d, std::string_view part) {
    std::string p;
    for (char c : part) p += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (p == "year") return CivilDate{d.year, 1, 1};
    if (p == "quarter") return CivilDate{d.year, ((d.month - 1) / 3) * 3 + 1, 1};
    if (p == "month") return CivilDate{d.year, d.month, 1};
    if (p == "week") return add_days(d, -day_of_week(d));
    if (p == "day") return d;
    return std::nullopt;
}

std::string format_civil_time(const CivilTime& t, std::string_view fmt) {
    std::string out;
    char buf[8];
    for (size_t i = 0; i < fmt.size(); ++i) {
        if (fmt[i] != '%' || i + 1 >= fmt.size()) {
            out += fmt[i];
            continue;
        }
        ++i;
        switch (fmt[i]) {
        case 'Y': std::snprintf(buf, sizeof(buf), "%04d", t.date.year); out += buf; break;
        case 'm': std::snprintf(buf, sizeof(buf), "%02d", t.date.month); out += buf; break;
        case 'd': std::snprintf(buf, sizeof(buf), "%02d", t.date.day); out += buf; break;
        case 'H': std::snprintf(buf, sizeof(buf), "%02d", t.hour); out += buf; break;
        case 'M': std::snprintf(buf, sizeof(buf), "%02d", t.minute); out += buf; break;
        case 'S': std::snprintf(buf, sizeof(buf), "%02d", t.second); out += buf; break;
        case '%': out += '%'; break;
        default: out += '%'; out += fmt[i]; break;
        }
    }
    return out;
}

std::optional<CivilTime> parse_civil_time(std::string_view text, std::string_view fmt) {
    CivilTime t;
    size_t pos = 0;
    auto read_int = [&](int width, int& dst) -> bool {
        if (pos + width > text.size()) return false;
        int v = 0;
        for (int k = 0; k < width; ++k) {
            char c = text[pos + k];
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
            v = v * 10 + (c - '0');
        }
        pos += width;
        dst = v;
        return true;
    };
    for (size_t i = 0; i < fmt.size(); ++i) {
        if (fmt[i] != '%' || i + 1 >= fmt.size()) {
            if (pos >= text.size() || text[pos] != fmt[i]) return std::nullopt;
            ++pos;
            continue;
        }
        ++i;
        bool ok = true;
        switch (fmt[i]) {
        case 'Y': ok = read_int(4, t.date.year); break;
        case 'm': ok = read_int(2, t.date.month); break;
        case 'd': ok = read_int(2, t.date.day); break;
        case 'H': ok = read_int(2, t.hour); break;
        case 'M': ok = read_int(2, t.minute); break;
        case 'S': ok = read_int(2, t.second); break;
        case '%':
            ok = pos < text.size() && text[pos] == '%';
            ++pos;
            break;
        default: return std::nullopt;
        }
        if (!ok) return std::nullopt;
    }
    if (pos != text.size()) return std::nullopt;
    if (!is_valid_date(t.date)) return std::nullopt;
    if (t.hour > 23 || t.minute > 59 || t.second > 59) return std::nullopt;
    return t;
}

}  // namespace sdgen
