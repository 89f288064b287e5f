#include "sdgen/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sdgen/common.hpp"
#include "sdgen/data_io.hpp"
#include "sdgen/generation.hpp"

namespace sdgen {

namespace {

uint64_t text_hash(std::string_view s) {
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Fraction of the range covered at row i: endpoints first, then binary
/// subdivision (1/2, 1/4, 3/4, 1/8, 3/8, ...).
double walk_fraction(int i) {
    if (i <= 0) return 0.0;
    if (i == 1) return 1.0;
    const int m = i - 1;
    int lg = 0;
    while ((1 << (lg + 1)) <= m) ++lg;
    const int pos = m - (1 << lg);
    return static_cast<double>(2 * pos + 1) / static_cast<double>(1 << (lg + 1));
}

const CivilDate kBaseDate{2024, 1, 1};
constexpr int64_t kBaseEpoch = 1704067200;  // 2024-01-01T00:00:00Z

std::string base_word(const FieldDef& f) {
    std::string word;
    for (char c : f.annotation + " ") {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            if (word.size() >= 4 && word != "field" && word != "this" && word != "that")
                return word;
            word.clear();
        }
    }
    return to_lower(f.name);
}

class Synth {
  public:
    Synth(const GenerationRequest& req, uint64_t seed) : req_(req), seed_(seed) {}

    Value value_for(const ColumnDirective& d, int i) const {
        if (!d.field) throw Error("directive for " + d.column.dotted() + " has no field binding");
        FieldDef flat = *d.field;  // element-level view of repeated leaves
        flat.repeated = false;
        const uint64_t col_seed = derive_seed(seed_, text_hash(d.column.dotted()));

        Value v = raw_value(d, flat, i, col_seed);
        if (!d.avoid.empty()) {
            std::vector<Value> avoid;
            for (const auto& a : d.avoid)
                avoid.push_back(coerce_field_value(*req_.schemas, flat, a));
            int bump = 0;
            auto hit = [&](const Value& candidate) {
                Value c = coerce_field_value(*req_.schemas, flat, candidate);
                return std::find(avoid.begin(), avoid.end(), c) != avoid.end();
            };
            while (bump < 64 && hit(v))
                v = raw_value(d, flat, i + std::max(1, req_.row_count) * ++bump, col_seed);
            if (hit(v))
                throw Error("cannot satisfy exclusion constraints on " + d.column.dotted());
        }

        Value coerced = coerce_field_value(*req_.schemas, flat, v);
        if (!value_fits_field(*req_.schemas, flat, coerced))
            throw Error("literal constraint for column " + d.column.dotted() +
                        " does not fit type " + flat.type_name() + ": " + v.to_display());
        return coerced;
    }

  private:
    const GenerationRequest& req_;
    uint64_t seed_;

    static double unit_draw(uint64_t col_seed, int i) {
        return SeededRng(derive_seed(col_seed, static_cast<uint64_t>(i))).next_unit();
    }

    Value raw_value(const ColumnDirective& d, const FieldDef& f, int i, uint64_t col_seed) const {
        if (d.pin) return *d.pin;
        if (d.spec) return spec_value(d, *d.spec, f, i, col_seed);
        if (!d.cycle.empty()) return d.cycle[static_cast<size_t>(i) % d.cycle.size()];
        if (d.lo || d.hi) return range_value(d, f, i);
        if (d.like) return like_value(*d.like, i);
        return default_value(d, f, i, col_seed);
    }

    [[noreturn]] static void mismatch(const ColumnDirective& d, const FieldDef& f,
                                      const Value& v) {
        throw Error("literal constraint for column " + d.column.dotted() + " does not fit type " +
                    f.type_name() + ": " + v.to_display());
    }

    // --- generator-style signals ------------------------------------------

    Value spec_value(const ColumnDirective& d, const ValueSpec& spec, const FieldDef& f, int i,
                     uint64_t col_seed) const {
        using K = ValueSpec::Kind;
        switch (spec.kind) {
            case K::Literal: return spec.literal;
            case K::OneOf: return spec.one_of[static_cast<size_t>(i) % spec.one_of.size()];
            case K::Range: {
                ColumnDirective r = d;
                r.lo = spec.lo.is_null() ? std::nullopt : std::optional<Value>(spec.lo);
                r.hi = spec.hi.is_null() ? std::nullopt : std::optional<Value>(spec.hi);
                r.lo_inclusive = spec.lo_inclusive;
                r.hi_inclusive = spec.hi_inclusive;
                return range_value(r, f, i);
            }
            case K::Incremental: {
                const int64_t n = spec.incremental.start + int64_t{i} * spec.incremental.step;
                if (!f.is_scalar()) mismatch(d, f, Value(n));
                switch (f.scalar()) {
                    case Scalar::Int64: return Value(n);
                    case Scalar::Float64: return Value(static_cast<double>(n));
                    case Scalar::Date: return Value(civil_from_days(n));
                    case Scalar::Timestamp: return Value(Timestamp{n, ""});
                    case Scalar::String: return Value(std::to_string(n));
                    default: mismatch(d, f, Value(n));
                }
            }
            case K::UniformFloat: {
                const double u = unit_draw(col_seed, i);
                const double x = spec.uniform.lo + u * (spec.uniform.hi - spec.uniform.lo);
                if (!f.is_scalar()) mismatch(d, f, Value(x));
                switch (f.scalar()) {
                    case Scalar::Float64: return Value(x);
                    case Scalar::Int64: return Value(static_cast<int64_t>(std::llround(x)));
                    default: mismatch(d, f, Value(x));
                }
            }
            case K::SeededChoice: {
                const auto& c = spec.choice;
                if (c.values.empty()) throw Error("seeded choice on " + d.column.dotted() +
                                                  " has no values");
                const double u = unit_draw(col_seed, i);
                size_t idx = 0;
                if (c.weights.empty()) {
                    idx = std::min(c.values.size() - 1,
                                   static_cast<size_t>(u * static_cast<double>(c.values.size())));
                } else {
                    double total = 0;
                    for (double w : c.weights) total += w;
                    double mark = u * total, acc = 0;
                    for (size_t k = 0; k < c.weights.size(); ++k) {
                        acc += c.weights[k];
                        if (mark < acc) {
                            idx = k;
                            break;
                        }
                        idx = k;
                    }
                }
                return c.values[idx];
            }
        }
        throw Error("unhandled signal kind on " + d.column.dotted());
    }

    // --- range synthesis ----------------------------------------------------

    static std::optional<int64_t> value_to_domain(const Value& v, Scalar kind) {
        switch (kind) {
            case Scalar::Int64:
                if (v.is_int()) return v.as_int();
                if (v.is_float()) return static_cast<int64_t>(std::llround(v.as_float()));
                if (v.is_string())
                    try {
                        return std::stoll(v.as_string());
                    } catch (const std::exception&) {
                        return std::nullopt;
                    }
                return std::nullopt;
            case Scalar::Date:
                if (v.is_date()) return days_from_civil(v.as_date());
                if (v.is_string())
                    if (auto d = parse_date(v.as_string())) return days_from_civil(*d);
                return std::nullopt;
            case Scalar::Timestamp:
                if (v.is_timestamp()) return v.as_timestamp().epoch_seconds;
                if (v.is_int()) return v.as_int();
                if (v.is_string())
                    if (auto d = parse_date(v.as_string())) return days_from_civil(*d) * 86400;
                return std::nullopt;
            default: return std::nullopt;
        }
    }

    static Value domain_to_value(int64_t n, Scalar kind) {
        switch (kind) {
            case Scalar::Date: return Value(civil_from_days(n));
            case Scalar::Timestamp: return Value(Timestamp{n, ""});
            default: return Value(n);
        }
    }

    Value range_value(const ColumnDirective& d, const FieldDef& f, int i) const {
        if (!f.is_scalar())
            mismatch(d, f, d.lo ? *d.lo : *d.hi);
        const Scalar kind = f.scalar();

        if (kind == Scalar::Float64) {
            double lo = d.lo && d.lo->is_float()   ? d.lo->as_float()
                        : d.lo && d.lo->is_int()   ? static_cast<double>(d.lo->as_int())
                                                   : 0.0;
            double hi = d.hi && d.hi->is_float()   ? d.hi->as_float()
                        : d.hi && d.hi->is_int()   ? static_cast<double>(d.hi->as_int())
                                                   : 0.0;
            if (!d.lo) lo = hi - 10.0;
            if (!d.hi) hi = lo + 10.0;
            const double eps = std::max(1e-9, std::abs(hi - lo) * 1e-9);
            if (!d.lo_inclusive) lo += eps;
            if (!d.hi_inclusive) hi -= eps;
            if (lo > hi)
                throw Error("range constraint on " + d.column.dotted() + " is unsatisfiable");
            return Value(lo + walk_fraction(i) * (hi - lo));
        }

        if (kind == Scalar::String) {
            // Date-shaped string bounds walk the date domain; anything else
            // alternates between the inclusive endpoints.
            auto lo_d = d.lo && d.lo->is_string() ? parse_date(d.lo->as_string()) : std::nullopt;
            auto hi_d = d.hi && d.hi->is_string() ? parse_date(d.hi->as_string()) : std::nullopt;
            if ((d.lo && !lo_d) || (d.hi && !hi_d)) {
                if (!d.lo_inclusive || !d.hi_inclusive)
                    throw Error("string range constraint on " + d.column.dotted() +
                                " is not synthesizable");
                const Value& pickl = d.lo ? *d.lo : *d.hi;
                const Value& pickh = d.hi ? *d.hi : *d.lo;
                return i % 2 == 0 ? pickl : pickh;
            }
            int64_t lo = lo_d ? days_from_civil(*lo_d)
                              : days_from_civil(*hi_d) - 9;
            int64_t hi = hi_d ? days_from_civil(*hi_d) : lo + 9;
            if (!d.lo_inclusive) ++lo;
            if (!d.hi_inclusive) --hi;
            if (lo > hi)
                throw Error("range constraint on " + d.column.dotted() + " is unsatisfiable");
            return Value(format_date(civil_from_days(walk_int(lo, hi, i, d))));
        }

        auto lo_opt = d.lo ? value_to_domain(*d.lo, kind) : std::nullopt;
        auto hi_opt = d.hi ? value_to_domain(*d.hi, kind) : std::nullopt;
        if ((d.lo && !lo_opt) || (d.hi && !hi_opt))
            mismatch(d, f, d.lo && !lo_opt ? *d.lo : *d.hi);
        if (!lo_opt && !hi_opt)
            throw Error("range constraint on " + d.column.dotted() + " has no usable bound");
        int64_t lo = lo_opt ? *lo_opt : *hi_opt - 9;
        int64_t hi = hi_opt ? *hi_opt : lo + 9;
        if (!d.lo_inclusive) ++lo;
        if (!d.hi_inclusive) --hi;
        if (lo > hi) throw Error("range constraint on " + d.column.dotted() + " is unsatisfiable");
        return domain_to_value(walk_int(lo, hi, i, d), kind);
    }

    /// Integer-domain walk honoring uniqueness and date-chain ranks.
    int64_t walk_int(int64_t lo, int64_t hi, int i, const ColumnDirective& d) const {
        if (d.unique) {
            if (lo + i > hi)
                throw Error("unique values exhaust the range on " + d.column.dotted());
            return lo + i;
        }
        if (d.order_rank >= 0) {
            const int64_t stride = std::max(1, d.order_size);
            return std::min(hi, lo + int64_t{i} * stride + d.order_rank);
        }
        if (i == 0) return lo;
        if (i == 1) return hi;
        return lo + static_cast<int64_t>(
                        std::llround(walk_fraction(i) * static_cast<double>(hi - lo)));
    }

    // --- pattern + default synthesis ---------------------------------------

    static Value like_value(const std::string& pattern, int i) {
        std::string base;
        bool any_wild = false;
        for (char c : pattern) {
            if (c == '%') {
                any_wild = true;
            } else if (c == '_') {
                base += 'x';
            } else {
                base += c;
            }
        }
        if (!any_wild) return Value(base);  // exact-shape pattern
        if (!pattern.empty() && pattern.back() == '%')
            return Value(base + "_" + std::to_string(i + 1));
        if (!pattern.empty() && pattern.front() == '%')
            return Value(std::to_string(i + 1) + "_" + base);
        return Value(base);
    }

    Value default_value(const ColumnDirective& d, const FieldDef& f, int i,
                        uint64_t col_seed) const {
        if (f.is_enum()) {
            const auto& values = f.enum_kind().values;
            if (values.empty())
                throw Error("enum " + f.enum_kind().type_name + " has no values");
            return Value(EnumVal{values[static_cast<size_t>(i) % values.size()]});
        }
        switch (f.scalar()) {
            case Scalar::Int64:
                return Value(int64_t{i} + 1 + static_cast<int64_t>(col_seed % 7) * 10);
            case Scalar::Float64:
                return Value(static_cast<double>(i + 1) +
                             static_cast<double>(col_seed % 9 + 1) * 0.125);
            case Scalar::Bool: return Value(((static_cast<uint64_t>(i) + col_seed) & 1) == 0);
            case Scalar::String:
                return Value(base_word(f) + "_" + std::to_string(i + 1));
            case Scalar::Bytes:
                return Value(Bytes{base_word(f) + "_" + std::to_string(i + 1)});
            case Scalar::Date: {
                if (d.order_rank >= 0)
                    return Value(add_days(kBaseDate,
                                          int64_t{i} * std::max(1, d.order_size) + d.order_rank));
                return Value(add_days(kBaseDate, static_cast<int64_t>(col_seed % 28) + i));
            }
            case Scalar::Timestamp: {
                if (d.order_rank >= 0)
                    return Value(Timestamp{kBaseEpoch + (int64_t{i} * std::max(1, d.order_size) +
                                                         d.order_rank) *
                                                            3600,
                                           ""});
                return Value(Timestamp{
                    kBaseEpoch + static_cast<int64_t>(col_seed % 24) * 3600 + int64_t{i} * 3600,
                    ""});
            }
        }
        throw Error("no default synthesis for column " + d.column.dotted());
    }
};

}  // namespace

BackendResult DeterministicBackend::complete(const BackendRequest& request) {
    if (!request.origin)
        return {false, "",
                "deterministic backend only serves structured generation requests"};
    const GenerationRequest& req = *request.origin;
    if (!req.schemas || !req.root)
        return {false, "", "generation request carries no schema context"};
    try {
        const Synth synth(req, derive_seed(seed_, req.seed));
        std::vector<Row> rows;
        rows.reserve(static_cast<size_t>(std::max(0, req.row_count)));
        for (int i = 0; i < req.row_count; ++i) {
            Row r;
            if (req.scope == GenerationRequest::Scope::NestedField && req.directives.empty() &&
                !req.nested_field.empty())
                r.set(req.nested_field.leaf(), Value(Record{}));
            for (const auto& d : req.directives)
                set_path(r, d.column.names(), synth.value_for(d, i));
            rows.push_back(coerce_row(*req.schemas, *req.root, r));
        }
        return {true, serialize_rows(*req.schemas, *req.root, rows, req.format), ""};
    } catch (const std::exception& e) {
        return {false, "", e.what()};
    }
}

HttpBackend::HttpBackend(const BackendSpec& spec) {
    const std::string& url = spec.endpoint;
    size_t scheme = url.find("://");
    const size_t host_at = scheme == std::string::npos ? 0 : scheme + 3;
    size_t slash = url.find('/', host_at);
    if (slash == std::string::npos) {
        host_part_ = url;
        path_ = "/";
    } else {
        host_part_ = url.substr(0, slash);
        path_ = url.substr(slash);
    }
    model_ = spec.model;
    timeout_seconds_ = spec.timeout_seconds;
    if (const char* tok = std::getenv(spec.auth_env.c_str())) token_ = tok;
}

BackendResult HttpBackend::complete(const BackendRequest& request) {
    nlohmann::ordered_json body;
    body["system"] = request.system;
    body["user"] = request.user;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (!model_.empty()) body["model"] = model_;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= kTransportRetries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        httplib::Client client(host_part_);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "connection to " + host_part_ + " failed (" +
                         httplib::to_string(res.error()) + ")";
            continue;  // transport failure: retryable
        }
        if (res->status >= 500) {
            last_error = "backend returned HTTP " + std::to_string(res->status);
            continue;  // server failure: retryable
        }
        if (res->status != 200)
            return {false, "", "backend returned HTTP " + std::to_string(res->status) +
                                   (res->body.empty() ? "" : ": " + res->body)};
        auto parsed = nlohmann::ordered_json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("text") || !parsed["text"].is_string())
            return {false, "", "backend response is not {\"text\": ...} JSON"};
        return {true, parsed["text"].get<std::string>(), ""};
    }
    return {false, "", last_error + " after " + std::to_string(kTransportRetries + 1) +
                           " attempts"};
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
    if (spec.kind == BackendSpec::Kind::Http) return std::make_unique<HttpBackend>(spec);
    return std::make_unique<DeterministicBackend>(spec.seed);
}

}  // namespace sdgen
