#include "sdgen/timezone.hpp"

namespace sdgen {

namespace {

constexpr int kPst = -8 * 3600;
constexpr int kPdt = -7 * 3600;

// Day of month of the n-th Sunday (n is 1-based).
int nth_sunday(int year, int month, int n) {
    int w = day_of_week(CivilDate{year, month, 1});  // 0 = Sunday
    int first = 1 + ((7 - w) % 7);
    return first + (n - 1) * 7;
}

int64_t utc_epoch(const CivilDate& d, int hour) {
    return days_from_civil(d) * 86400 + hour * 3600;
}

// US rule (2007 revision, applied to all years): DST from the second Sunday
// of March 02:00 standard to the first Sunday of November 02:00 daylight.
bool us_pacific_dst(int64_t epoch_seconds) {
    int year = civil_from_days(epoch_seconds >= 0 ? epoch_seconds / 86400
                                                  : (epoch_seconds - 86399) / 86400)
                   .year;
    int64_t start = utc_epoch(CivilDate{year, 3, nth_sunday(year, 3, 2)}, 10);  // 02:00 PST
    int64_t end = utc_epoch(CivilDate{year, 11, nth_sunday(year, 11, 1)}, 9);   // 02:00 PDT
    return epoch_seconds >= start && epoch_seconds < end;
}

}  // namespace

TimeZone TimeZone::lookup(std::string_view name, bool* known) {
    if (known) *known = true;
    if (name.empty() || name == "UTC" || name == "Etc/UTC") return TimeZone("UTC", Rules::Utc);
    if (name == "America/Los_Angeles") return TimeZone(std::string(name), Rules::UsPacific);
    if (known) *known = false;
    return TimeZone(std::string(name), Rules::Utc);
}

TimeZone TimeZone::utc() { return TimeZone("UTC", Rules::Utc); }

int TimeZone::offset_at(int64_t epoch_seconds) const {
    if (rules_ == Rules::Utc) return 0;
    return us_pacific_dst(epoch_seconds) ? kPdt : kPst;
}

CivilTime TimeZone::civil_at(int64_t epoch_seconds) const {
    int64_t local = epoch_seconds + offset_at(epoch_seconds);
    int64_t days = local >= 0 ? local / 86400 : (local - 86399) / 86400;
    int64_t secs = local - days * 86400;
    CivilTime t;
    t.date = civil_from_days(days);
    t.hour = static_cast<int>(secs / 3600);
    t.minute = static_cast<int>((secs % 3600) / 60);
    t.second = static_cast<int>(secs % 60);
    return t;
}

CivilDate TimeZone::local_date(int64_t epoch_seconds) const {
    return civil_at(epoch_seconds).date;
}

int64_t TimeZone::epoch_from_civil(const CivilTime& local) const {
    int64_t naive =
        days_from_civil(local.date) * 86400 + local.hour * 3600 + local.minute * 60 + local.second;
    int64_t guess = naive - offset_at(naive);
    int off = offset_at(guess);
    int64_t t = naive - off;
    if (offset_at(t) == off) return t;
    return naive - offset_at(naive);
}

}  // namespace sdgen
