#include "sdgen/predicate_eval.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "sdgen/common.hpp"
#include "sdgen/dates.hpp"
#include "sdgen/timezone.hpp"

namespace sdgen {

using analysis::Pred;

bool like_match(std::string_view text, std::string_view pattern) {
    // Two-pointer scan with one backtrack anchor per '%' (classic wildcard
    // matching; linear in practice).
    size_t t = 0, p = 0;
    size_t star_p = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t])) {
            ++t;
            ++p;
        } else if (p < pattern.size() && pattern[p] == '%') {
            star_p = p++;
            star_t = t;
        } else if (star_p != std::string_view::npos) {
            p = star_p + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '%') ++p;
    return p == pattern.size();
}

namespace {

using MaybeValue = std::optional<Value>;

const Value kNull = Value(Null{});

bool is_numeric(const Value& v) { return v.is_int() || v.is_float(); }

double as_double(const Value& v) {
    return v.is_int() ? static_cast<double>(v.as_int()) : v.as_float();
}

std::optional<std::string> as_text(const Value& v) {
    if (v.is_string()) return v.as_string();
    if (v.is_enum()) return v.as_enum().name;
    if (v.is_bytes()) return v.as_bytes().data;
    return std::nullopt;
}

std::optional<int64_t> parse_full_int(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    long long n = std::strtoll(t.c_str(), &end, 10);
    if (errno != 0 || end != t.c_str() + t.size()) return std::nullopt;
    return int64_t{n};
}

std::optional<double> parse_full_float(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    double d = std::strtod(t.c_str(), &end);
    if (errno != 0 || end != t.c_str() + t.size()) return std::nullopt;
    return d;
}

/// "YYYY-MM-DD[ HH:MM:SS]" as a UTC instant.
std::optional<int64_t> parse_utc_instant(const std::string& s) {
    const std::string t = trim(s);
    if (auto ct = parse_civil_time(t, "%Y-%m-%d %H:%M:%S"))
        return TimeZone::utc().epoch_from_civil(*ct);
    if (auto d = parse_date(t))
        return TimeZone::utc().epoch_from_civil(CivilTime{*d, 0, 0, 0});
    return std::nullopt;
}

int sign_of(int64_t d) { return d < 0 ? -1 : d > 0 ? 1 : 0; }
int sign_of(double d) { return d < 0 ? -1 : d > 0 ? 1 : 0; }

/// Scalar cast semantics shared by CAST and SAFE_CAST; nullopt = cast
/// failure (the caller decides between error and NULL).
MaybeValue cast_value(const Value& v, const std::string& type) {
    if (v.is_null()) return kNull;
    if (type == "STRING") {
        if (v.is_string()) return v;
        if (v.is_enum()) return Value(v.as_enum().name);
        if (v.is_int() || v.is_float()) return Value(v.to_display());
        if (v.is_bool()) return Value(v.as_bool() ? std::string("true") : std::string("false"));
        if (v.is_date()) return Value(format_date(v.as_date()));
        if (v.is_bytes()) return Value(v.as_bytes().data);
        return std::nullopt;
    }
    if (type == "INT64") {
        if (v.is_int()) return v;
        if (v.is_float()) return Value(static_cast<int64_t>(std::llround(v.as_float())));
        if (v.is_bool()) return Value(int64_t{v.as_bool() ? 1 : 0});
        if (auto t = as_text(v)) {
            if (auto n = parse_full_int(*t)) return Value(*n);
        }
        return std::nullopt;
    }
    if (type == "FLOAT64") {
        if (v.is_float()) return v;
        if (v.is_int()) return Value(static_cast<double>(v.as_int()));
        if (auto t = as_text(v)) {
            if (auto d = parse_full_float(*t)) return Value(*d);
        }
        return std::nullopt;
    }
    if (type == "BOOL") {
        if (v.is_bool()) return v;
        if (auto t = as_text(v)) {
            std::string l = to_lower(trim(*t));
            if (l == "true") return Value(true);
            if (l == "false") return Value(false);
        }
        return std::nullopt;
    }
    if (type == "DATE") {
        if (v.is_date()) return v;
        if (v.is_timestamp()) return Value(TimeZone::utc().local_date(v.as_timestamp().epoch_seconds));
        if (auto t = as_text(v)) {
            if (auto d = parse_date(trim(*t))) return Value(*d);
        }
        return std::nullopt;
    }
    if (type == "TIMESTAMP") {
        if (v.is_timestamp()) return v;
        if (v.is_date())
            return Value(Timestamp{TimeZone::utc().epoch_from_civil(CivilTime{v.as_date()}), ""});
        if (auto t = as_text(v)) {
            if (auto e = parse_utc_instant(*t)) return Value(Timestamp{*e, ""});
        }
        return std::nullopt;
    }
    return std::nullopt;
}

MaybeValue eval_operator(const Row& row, const Pred& p);
MaybeValue eval_function(const Row& row, const Pred& p);

}  // namespace

std::optional<Value> cast_scalar(const Value& v, const std::string& type) {
    return cast_value(v, type);
}

std::optional<Value> evaluate_scalar(const Row& row, const Pred& p) {
    switch (p.kind) {
        case Pred::Kind::Literal: return p.value;
        case Pred::Kind::Column: {
            const Value* v = get_path(row, p.column.names());
            return v ? *v : kNull;
        }
        case Pred::Kind::Func:
            return p.a ? eval_operator(row, p) : eval_function(row, p);
        default:
            return std::nullopt;  // boolean node in scalar position
    }
}

namespace {

MaybeValue eval_operator(const Row& row, const Pred& p) {
    MaybeValue a = evaluate_scalar(row, *p.a);
    MaybeValue b = p.b ? evaluate_scalar(row, *p.b) : kNull;
    if (!a || !b) return std::nullopt;
    if (a->is_null() || b->is_null()) return kNull;

    if (p.func == "||") {
        auto sa = as_text(*a), sb = as_text(*b);
        if (!sa || !sb) return std::nullopt;
        return Value(*sa + *sb);
    }
    if (!is_numeric(*a) || !is_numeric(*b)) return std::nullopt;

    if (p.func == "/") {
        double denom = as_double(*b);
        if (denom == 0.0) return std::nullopt;  // runtime error territory
        return Value(as_double(*a) / denom);
    }
    if (a->is_int() && b->is_int()) {
        int64_t x = a->as_int(), y = b->as_int();
        if (p.func == "+") return Value(x + y);
        if (p.func == "-") return Value(x - y);
        if (p.func == "*") return Value(x * y);
        return std::nullopt;
    }
    double x = as_double(*a), y = as_double(*b);
    if (p.func == "+") return Value(x + y);
    if (p.func == "-") return Value(x - y);
    if (p.func == "*") return Value(x * y);
    return std::nullopt;
}

MaybeValue eval_function(const Row& row, const Pred& p) {
    std::vector<Value> args;
    args.reserve(p.list.size());
    for (const auto& arg : p.list) {
        MaybeValue v = evaluate_scalar(row, *arg);
        if (!v) return std::nullopt;
        args.push_back(std::move(*v));
    }

    if (p.func == "CAST" || p.func == "SAFE_CAST") {
        if (args.size() != 1) return std::nullopt;
        MaybeValue out = cast_value(args[0], p.cast_type);
        if (out) return out;
        return p.func == "SAFE_CAST" ? MaybeValue(kNull) : std::nullopt;
    }

    // NULL in, NULL out for the plain value functions below.
    for (const auto& a : args)
        if (a.is_null()) return kNull;

    if (p.func == "DATE") {
        if (args.empty() || args.size() > 2) return std::nullopt;
        const Value& src = args[0];
        if (src.is_date() && args.size() == 1) return src;
        if (src.is_timestamp()) {
            TimeZone zone = TimeZone::utc();
            if (args.size() == 2) {
                auto label = as_text(args[1]);
                if (!label) return std::nullopt;
                zone = TimeZone::lookup(*label);
            }
            return Value(zone.local_date(src.as_timestamp().epoch_seconds));
        }
        if (auto t = as_text(src); t && args.size() == 1) {
            if (auto d = parse_date(trim(*t))) return Value(*d);
        }
        return std::nullopt;
    }
    if (p.func == "TIMESTAMP_SECONDS") {
        if (args.size() != 1) return std::nullopt;
        if (args[0].is_int()) return Value(Timestamp{args[0].as_int(), ""});
        return std::nullopt;
    }
    if (p.func == "PARSE_TIMESTAMP") {
        if (args.size() < 2 || args.size() > 3) return std::nullopt;
        auto fmt = as_text(args[0]);
        auto text = as_text(args[1]);
        if (!fmt || !text) return std::nullopt;
        auto ct = parse_civil_time(*text, *fmt);
        if (!ct) return std::nullopt;
        TimeZone zone = TimeZone::utc();
        if (args.size() == 3) {
            auto label = as_text(args[2]);
            if (!label) return std::nullopt;
            zone = TimeZone::lookup(*label);
        }
        return Value(Timestamp{zone.epoch_from_civil(*ct), ""});
    }
    if (p.func == "FORMAT_TIMESTAMP") {
        if (args.size() < 2 || args.size() > 3) return std::nullopt;
        auto fmt = as_text(args[0]);
        if (!fmt || !args[1].is_timestamp()) return std::nullopt;
        TimeZone zone = TimeZone::utc();
        if (args.size() == 3) {
            auto label = as_text(args[2]);
            if (!label) return std::nullopt;
            zone = TimeZone::lookup(*label);
        }
        return Value(format_civil_time(zone.civil_at(args[1].as_timestamp().epoch_seconds), *fmt));
    }
    if (p.func == "DATE_TRUNC") {
        if (args.size() != 2) return std::nullopt;
        auto part = as_text(args[1]);
        if (!part) return std::nullopt;
        CivilDate d;
        if (args[0].is_date()) {
            d = args[0].as_date();
        } else if (auto t = as_text(args[0])) {
            auto parsed = parse_date(trim(*t));
            if (!parsed) return std::nullopt;
            d = *parsed;
        } else {
            return std::nullopt;
        }
        if (auto out = truncate_date(d, to_lower(*part))) return Value(*out);
        return std::nullopt;
    }
    if (p.func == "LOWER" || p.func == "UPPER") {
        if (args.size() != 1) return std::nullopt;
        auto t = as_text(args[0]);
        if (!t) return std::nullopt;
        return Value(p.func == "LOWER" ? to_lower(*t) : to_upper(*t));
    }
    return std::nullopt;
}

}  // namespace

std::optional<int> compare_values(const Value& a, const Value& b) {
    if (is_numeric(a) && is_numeric(b)) {
        if (a.is_int() && b.is_int()) return sign_of(a.as_int() - b.as_int());
        double d = as_double(a) - as_double(b);
        return sign_of(d);
    }
    // Dates compare with dates and date-shaped strings.
    if (a.is_date() || b.is_date()) {
        auto to_date = [](const Value& v) -> std::optional<CivilDate> {
            if (v.is_date()) return v.as_date();
            if (auto t = as_text(v)) return parse_date(trim(*t));
            return std::nullopt;
        };
        auto da = to_date(a), db = to_date(b);
        if (!da || !db) return std::nullopt;
        return sign_of(days_from_civil(*da) - days_from_civil(*db));
    }
    // Timestamps compare with timestamps and UTC-instant strings.
    if (a.is_timestamp() || b.is_timestamp()) {
        auto to_epoch = [](const Value& v) -> std::optional<int64_t> {
            if (v.is_timestamp()) return v.as_timestamp().epoch_seconds;
            if (v.is_int()) return v.as_int();
            if (auto t = as_text(v)) return parse_utc_instant(*t);
            return std::nullopt;
        };
        auto ea = to_epoch(a), eb = to_epoch(b);
        if (!ea || !eb) return std::nullopt;
        return sign_of(*ea - *eb);
    }
    if (a.is_bool() && b.is_bool())
        return sign_of(static_cast<int64_t>(a.as_bool()) - static_cast<int64_t>(b.as_bool()));
    // Strings, enums, and bytes compare by content.
    auto sa = as_text(a), sb = as_text(b);
    if (sa && sb) return sign_of(static_cast<int64_t>(sa->compare(*sb)));
    return std::nullopt;
}

namespace {

Tri compare_with_op(const std::string& op, const Value& a, const Value& b) {
    std::optional<int> c = compare_values(a, b);
    if (!c) return Tri::Unknown;
    bool result = false;
    if (op == "=") result = *c == 0;
    else if (op == "!=") result = *c != 0;
    else if (op == "<") result = *c < 0;
    else if (op == "<=") result = *c <= 0;
    else if (op == ">") result = *c > 0;
    else if (op == ">=") result = *c >= 0;
    else return Tri::Unknown;
    return result ? Tri::True : Tri::False;
}

Tri as_condition(const MaybeValue& v) {
    if (!v || v->is_null()) return Tri::Unknown;
    if (v->is_bool()) return v->as_bool() ? Tri::True : Tri::False;
    return Tri::Unknown;
}

}  // namespace

Tri evaluate_predicate(const Row& row, const Pred& p) {
    switch (p.kind) {
        case Pred::Kind::And:
            return tri_and(evaluate_predicate(row, *p.a), evaluate_predicate(row, *p.b));
        case Pred::Kind::Or:
            return tri_or(evaluate_predicate(row, *p.a), evaluate_predicate(row, *p.b));
        case Pred::Kind::Not: return tri_not(evaluate_predicate(row, *p.a));
        case Pred::Kind::Compare: {
            MaybeValue a = evaluate_scalar(row, *p.a);
            MaybeValue b = evaluate_scalar(row, *p.b);
            if (!a || !b || a->is_null() || b->is_null()) return Tri::Unknown;
            return compare_with_op(p.op, *a, *b);
        }
        case Pred::Kind::Between: {
            MaybeValue v = evaluate_scalar(row, *p.a);
            MaybeValue lo = evaluate_scalar(row, *p.b);
            MaybeValue hi = evaluate_scalar(row, *p.c);
            if (!v || !lo || !hi || v->is_null() || lo->is_null() || hi->is_null())
                return Tri::Unknown;
            Tri t = tri_and(compare_with_op(">=", *v, *lo), compare_with_op("<=", *v, *hi));
            return p.negated ? tri_not(t) : t;
        }
        case Pred::Kind::InList: {
            MaybeValue v = evaluate_scalar(row, *p.a);
            if (!v || v->is_null()) return Tri::Unknown;
            Tri any = Tri::False;
            for (const auto& el : p.list) {
                MaybeValue m = evaluate_scalar(row, *el);
                Tri eq = (!m || m->is_null()) ? Tri::Unknown : compare_with_op("=", *v, *m);
                any = tri_or(any, eq);
            }
            return p.negated ? tri_not(any) : any;
        }
        case Pred::Kind::Like: {
            MaybeValue v = evaluate_scalar(row, *p.a);
            MaybeValue pat = evaluate_scalar(row, *p.b);
            if (!v || !pat || v->is_null() || pat->is_null()) return Tri::Unknown;
            auto text = as_text(*v);
            auto pattern = as_text(*pat);
            if (!text || !pattern) return Tri::Unknown;
            Tri t = like_match(*text, *pattern) ? Tri::True : Tri::False;
            return p.negated ? tri_not(t) : t;
        }
        case Pred::Kind::IsNull: {
            MaybeValue v = evaluate_scalar(row, *p.a);
            if (!v) return Tri::Unknown;
            Tri t = v->is_null() ? Tri::True : Tri::False;
            return p.negated ? tri_not(t) : t;
        }
        case Pred::Kind::Column: {
            // A bare boolean column used as a condition.
            return as_condition(evaluate_scalar(row, p));
        }
        case Pred::Kind::Literal: return as_condition(p.value);
        case Pred::Kind::Func: return as_condition(evaluate_scalar(row, p));
        case Pred::Kind::Opaque: return Tri::Unknown;
    }
    return Tri::Unknown;
}

}  // namespace sdgen
