#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sdgen/dates.hpp"

namespace sdgen {

/// Built-in zone table: UTC plus America/Los_Angeles with US DST rules
/// (second Sunday of March 02:00 local to first Sunday of November 02:00
/// local; PST = UTC-8, PDT = UTC-7). Unknown zone names fall back to UTC;
/// callers that care surface the fallback as a warning.
class TimeZone {
public:
    /// Resolves a zone label. `known` reports whether the label was in the
    /// table (fallback zones behave as UTC).
    static TimeZone lookup(std::string_view name, bool* known = nullptr);
    static TimeZone utc();

    const std::string& name() const { return name_; }

    /// UTC offset in seconds in effect at the given UTC instant.
    int offset_at(int64_t epoch_seconds) const;

    CivilTime civil_at(int64_t epoch_seconds) const;
    CivilDate local_date(int64_t epoch_seconds) const;

    /// Epoch seconds for a local civil time in this zone. Ambiguous or
    /// skipped local times resolve via the pre-transition offset.
    int64_t epoch_from_civil(const CivilTime& local) const;

private:
    enum class Rules { Utc, UsPacific };
    TimeZone(std::string name, Rules rules) : name_(std::move(name)), rules_(rules) {}

    std::string name_;
    Rules rules_;
};

}  // namespace sdgen
