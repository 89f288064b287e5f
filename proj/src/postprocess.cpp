#include "sdgen/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <utility>

#include "sdgen/dates.hpp"
#include "sdgen/data_io.hpp"
#include "sdgen/predicate_eval.hpp"
#include "sdgen/timezone.hpp"

namespace sdgen {

using analysis::CoverageTarget;
using analysis::Pred;
using analysis::PredPtr;

namespace {

std::string display_or_absent(const Value* v) { return v ? v->to_display() : "(absent)"; }

bool values_equal(const Value& a, const Value& b) {
    auto c = compare_values(a, b);
    return c && *c == 0;
}

const FieldDef* try_resolve(const SchemaSet* set, const SchemaDef* schema,
                            const ColumnPath& path) {
    if (!set || !schema) return nullptr;
    try {
        return &resolve_path(*set, *schema, path);
    } catch (const Error&) {
        return nullptr;
    }
}

// --- typed value stepping ---------------------------------------------------

std::optional<Value> successor(const Value& v) {
    if (v.is_int()) return Value(v.as_int() + 1);
    if (v.is_float()) return Value(v.as_float() + 1.0);
    if (v.is_date()) return Value(add_days(v.as_date(), 1));
    if (v.is_timestamp()) return Value(Timestamp{v.as_timestamp().epoch_seconds + 1, ""});
    if (v.is_string()) return Value(v.as_string() + "a");
    if (v.is_enum()) return Value(EnumVal{v.as_enum().name + "a"});
    if (v.is_bool()) return v.as_bool() ? std::nullopt : std::optional<Value>(Value(true));
    return std::nullopt;
}

std::optional<Value> predecessor(const Value& v) {
    if (v.is_int()) return Value(v.as_int() - 1);
    if (v.is_float()) return Value(v.as_float() - 1.0);
    if (v.is_date()) return Value(add_days(v.as_date(), -1));
    if (v.is_timestamp()) return Value(Timestamp{v.as_timestamp().epoch_seconds - 1, ""});
    if (v.is_string()) {
        const std::string& s = v.as_string();
        if (s.empty()) return std::nullopt;
        return Value(s.substr(0, s.size() - 1));  // a proper prefix sorts first
    }
    if (v.is_bool()) return v.as_bool() ? std::optional<Value>(Value(false)) : std::nullopt;
    return std::nullopt;
}

std::optional<std::string> text_of(const Value& v) {
    if (v.is_string()) return v.as_string();
    if (v.is_enum()) return v.as_enum().name;
    return std::nullopt;
}

// --- conjunctive per-column state --------------------------------------------

/// Intersection of every simple single-column conjunct naming one column.
struct ColumnState {
    ColumnPath column;
    std::optional<Value> pin;
    bool has_in = false;
    std::vector<Value> in_set;  // kept filtered against the other parts
    std::optional<Value> lo, hi;
    bool lo_inc = true, hi_inc = true;
    std::vector<Value> avoid;
    std::vector<std::string> likes, not_likes;
    bool must_null = false, not_null = false;
};

bool state_allows(const ColumnState& s, const Value& v) {
    if (s.must_null) return v.is_null();
    if (v.is_null()) return false;  // NULL satisfies no comparison form
    if (s.pin && !values_equal(v, *s.pin)) return false;
    if (s.has_in) {
        bool hit = false;
        for (const auto& m : s.in_set)
            if (!m.is_null() && values_equal(v, m)) hit = true;
        if (!hit) return false;
    }
    if (s.lo) {
        auto c = compare_values(v, *s.lo);
        if (!c || *c < 0 || (*c == 0 && !s.lo_inc)) return false;
    }
    if (s.hi) {
        auto c = compare_values(v, *s.hi);
        if (!c || *c > 0 || (*c == 0 && !s.hi_inc)) return false;
    }
    for (const auto& m : s.avoid)
        if (values_equal(v, m)) return false;
    if (!s.likes.empty() || !s.not_likes.empty()) {
        auto t = text_of(v);
        if (!t) return false;
        for (const auto& p : s.likes)
            if (!like_match(*t, p)) return false;
        for (const auto& p : s.not_likes)
            if (like_match(*t, p)) return false;
    }
    return true;
}

[[noreturn]] void unsatisfiable(const Pred& cause) {
    throw EnforceError("unsatisfiable constraint after intersection: " +
                       analysis::render_predicate(cause));
}

/// Re-checks internal consistency after one fold step; `cause` is the
/// conjunct just applied and is named when the state collapsed.
void check_state(ColumnState& s, const Pred& cause) {
    if (s.must_null) {
        if (s.not_null || s.pin || s.has_in || s.lo || s.hi || !s.likes.empty()) {
            unsatisfiable(cause);
        }
        return;
    }
    if (s.lo && s.hi) {
        auto c = compare_values(*s.lo, *s.hi);
        if (!c || *c > 0 || (*c == 0 && !(s.lo_inc && s.hi_inc))) unsatisfiable(cause);
    }
    if (s.pin) {
        ColumnState probe = s;
        probe.pin.reset();
        if (!state_allows(probe, *s.pin)) unsatisfiable(cause);
    }
    if (s.has_in) {
        ColumnState probe = s;
        probe.has_in = false;
        probe.in_set.clear();
        std::vector<Value> kept;
        for (const auto& m : s.in_set)
            if (!m.is_null() && state_allows(probe, m)) kept.push_back(m);
        s.in_set = std::move(kept);
        if (s.in_set.empty()) unsatisfiable(cause);
    }
}

void apply_bound(ColumnState& s, const std::string& op, const Value& v) {
    if (op == ">" || op == ">=") {
        bool inc = op == ">=";
        if (!s.lo) {
            s.lo = v;
            s.lo_inc = inc;
        } else if (auto c = compare_values(v, *s.lo)) {
            if (*c > 0 || (*c == 0 && !inc)) {
                s.lo = v;
                s.lo_inc = inc;
            }
        }
    } else {
        bool inc = op == "<=";
        if (!s.hi) {
            s.hi = v;
            s.hi_inc = inc;
        } else if (auto c = compare_values(v, *s.hi)) {
            if (*c < 0 || (*c == 0 && !inc)) {
                s.hi = v;
                s.hi_inc = inc;
            }
        }
    }
}

std::string flip_op(const std::string& op) {
    if (op == "<") return ">";
    if (op == "<=") return ">=";
    if (op == ">") return "<";
    if (op == ">=") return "<=";
    return op;  // = and != are symmetric
}

std::string negate_op(const std::string& op) {
    if (op == "=") return "!=";
    if (op == "!=") return "=";
    if (op == "<") return ">=";
    if (op == "<=") return ">";
    if (op == ">") return "<=";
    if (op == ">=") return "<";
    return op;
}

/// Literal side of a simple conjunct: no column references and evaluable
/// without a row (constant folding covers e.g. `10 * 2`).
std::optional<Value> fold_constant(const Pred& p) {
    std::vector<const Pred*> cols;
    analysis::collect_columns(p, cols);
    if (!cols.empty()) return std::nullopt;
    Row empty;
    auto v = evaluate_scalar(empty, p);
    if (!v || v->is_null()) return std::nullopt;
    return *v;
}

enum class ConjunctClass { Foldable, Derived, Complex, Unevaluable };

ConjunctClass classify(const Pred& p) {
    if (!p.evaluable) return ConjunctClass::Unevaluable;
    if (p.derived) return ConjunctClass::Derived;
    switch (p.kind) {
        case Pred::Kind::Compare: {
            bool a_col = p.a && p.a->kind == Pred::Kind::Column;
            bool b_col = p.b && p.b->kind == Pred::Kind::Column;
            if (a_col && !b_col && p.b && fold_constant(*p.b)) return ConjunctClass::Foldable;
            if (b_col && !a_col && p.a && fold_constant(*p.a)) return ConjunctClass::Foldable;
            return ConjunctClass::Complex;
        }
        case Pred::Kind::Between:
            if (p.negated) return ConjunctClass::Complex;
            return p.a && p.a->kind == Pred::Kind::Column && p.b && fold_constant(*p.b) && p.c &&
                           fold_constant(*p.c)
                       ? ConjunctClass::Foldable
                       : ConjunctClass::Complex;
        case Pred::Kind::InList: {
            if (!p.a || p.a->kind != Pred::Kind::Column) return ConjunctClass::Complex;
            for (const auto& m : p.list)
                if (m->kind != Pred::Kind::Literal) return ConjunctClass::Complex;
            return ConjunctClass::Foldable;
        }
        case Pred::Kind::Like:
            return p.a && p.a->kind == Pred::Kind::Column && p.b &&
                           p.b->kind == Pred::Kind::Literal && p.b->value.is_string()
                       ? ConjunctClass::Foldable
                       : ConjunctClass::Complex;
        case Pred::Kind::IsNull:
            return p.a && p.a->kind == Pred::Kind::Column ? ConjunctClass::Foldable
                                                          : ConjunctClass::Complex;
        case Pred::Kind::Not:
            if (p.a && p.a->kind == Pred::Kind::Compare) {
                Pred flipped = *p.a;
                flipped.op = negate_op(p.a->op);
                return classify(flipped);
            }
            return ConjunctClass::Complex;
        default: return ConjunctClass::Complex;
    }
}

/// Folds one Foldable conjunct into the state map. Throws EnforceError when
/// the intersection collapses.
void fold_conjunct(std::map<std::string, ColumnState>& states, const Pred& p, const Pred& cause) {
    switch (p.kind) {
        case Pred::Kind::Not: {
            Pred flipped = *p.a;
            flipped.op = negate_op(p.a->op);
            fold_conjunct(states, flipped, cause);
            return;
        }
        case Pred::Kind::Compare: {
            bool col_left = p.a->kind == Pred::Kind::Column;
            const Pred& col = col_left ? *p.a : *p.b;
            Value lit = *fold_constant(col_left ? *p.b : *p.a);
            std::string op = col_left ? p.op : flip_op(p.op);
            ColumnState& s = states[col.column.dotted()];
            s.column = col.column;
            if (op == "=") {
                if (s.pin && !values_equal(*s.pin, lit)) unsatisfiable(cause);
                s.pin = lit;
            } else if (op == "!=") {
                s.avoid.push_back(lit);
            } else {
                apply_bound(s, op, lit);
            }
            check_state(s, cause);
            return;
        }
        case Pred::Kind::Between: {
            ColumnState& s = states[p.a->column.dotted()];
            s.column = p.a->column;
            apply_bound(s, ">=", *fold_constant(*p.b));
            apply_bound(s, "<=", *fold_constant(*p.c));
            check_state(s, cause);
            return;
        }
        case Pred::Kind::InList: {
            ColumnState& s = states[p.a->column.dotted()];
            s.column = p.a->column;
            if (!p.negated) {
                std::vector<Value> members;
                for (const auto& m : p.list) members.push_back(m->value);
                if (!s.has_in) {
                    s.has_in = true;
                    s.in_set = std::move(members);
                } else {
                    std::vector<Value> kept;
                    for (const auto& m : s.in_set)
                        for (const auto& n : members)
                            if (!n.is_null() && values_equal(m, n)) {
                                kept.push_back(m);
                                break;
                            }
                    s.in_set = std::move(kept);
                }
            } else {
                for (const auto& m : p.list) {
                    // x NOT IN (..., NULL) is never true in SQL.
                    if (m->value.is_null()) unsatisfiable(cause);
                    s.avoid.push_back(m->value);
                }
            }
            check_state(s, cause);
            return;
        }
        case Pred::Kind::Like: {
            ColumnState& s = states[p.a->column.dotted()];
            s.column = p.a->column;
            (p.negated ? s.not_likes : s.likes).push_back(p.b->value.as_string());
            check_state(s, cause);
            return;
        }
        case Pred::Kind::IsNull: {
            ColumnState& s = states[p.a->column.dotted()];
            s.column = p.a->column;
            (p.negated ? s.not_null : s.must_null) = true;
            check_state(s, cause);
            return;
        }
        default: return;
    }
}

// --- satisfying-value synthesis ----------------------------------------------

Value default_for_field(const FieldDef* f) {
    if (f) {
        if (f->is_enum() && !f->enum_kind().values.empty())
            return Value(EnumVal{f->enum_kind().values.front()});
        if (f->is_scalar()) {
            switch (f->scalar()) {
                case Scalar::Int64: return Value(int64_t{1});
                case Scalar::Float64: return Value(1.0);
                case Scalar::Bool: return Value(true);
                case Scalar::Date: return Value(CivilDate{2023, 1, 1});
                case Scalar::Timestamp: return Value(Timestamp{1672531200, ""});  // 2023-01-01 UTC
                case Scalar::Bytes: return Value(Bytes{"value"});
                default: break;
            }
        }
    }
    return Value(std::string("value"));
}

std::string like_seed(const std::string& pattern) {
    std::string base;
    for (char c : pattern) {
        if (c == '%') continue;
        base += c == '_' ? 'x' : c;
    }
    return base;
}

/// Deterministic value satisfying the compiled state. The state is known
/// consistent; stepping past the avoid list is capped, and exhaustion names
/// the column rather than looping forever.
Value satisfying_value(const ColumnState& s, const FieldDef* field) {
    if (s.must_null) return Value(Null{});
    auto finish = [&](Value start, bool forward) -> std::optional<Value> {
        std::optional<Value> c = std::move(start);
        for (int step = 0; c && step < 64; ++step) {
            if (state_allows(s, *c)) return c;
            c = forward ? successor(*c) : predecessor(*c);
        }
        return std::nullopt;
    };
    std::optional<Value> found;
    if (s.pin) {
        found = state_allows(s, *s.pin) ? std::optional<Value>(s.pin) : std::nullopt;
    } else if (s.has_in) {
        for (const auto& m : s.in_set)
            if (state_allows(s, m)) {
                found = m;
                break;
            }
    } else if (s.lo) {
        found = finish(*s.lo, true);
    } else if (s.hi) {
        found = finish(*s.hi, false);
    } else if (!s.likes.empty()) {
        const std::string& pattern = s.likes.front();
        std::string base = like_seed(pattern);
        bool open = pattern.find('%') != std::string::npos;
        for (int k = 0; !found && k < 64; ++k) {
            std::string candidate = k == 0 ? base : base + std::to_string(k);
            if (k > 0 && (!open || pattern.back() != '%')) break;
            if (state_allows(s, Value(candidate))) found = Value(candidate);
        }
        if (!found && field && field->is_enum()) {
            for (const auto& ev : field->enum_kind().values)
                if (state_allows(s, Value(EnumVal{ev}))) {
                    found = Value(EnumVal{ev});
                    break;
                }
        }
    } else {
        // Only an avoid list and/or NOT NULL: synthesize from the field kind.
        found = finish(default_for_field(field), true);
        if (!found && field && field->is_enum()) {
            for (const auto& ev : field->enum_kind().values)
                if (state_allows(s, Value(EnumVal{ev}))) {
                    found = Value(EnumVal{ev});
                    break;
                }
        }
    }
    if (!found)
        throw EnforceError("cannot synthesize a value satisfying the constraints on " +
                           s.column.dotted());
    return *found;
}

// --- derived-chain inversion ---------------------------------------------------

struct Requirement {
    std::string op;
    Value v;
};

/// Natural cast-type of an expression, for inverting CAST wrappers. Empty =
/// unknown (the inversion keeps the value unchanged and lets forward
/// verification decide).
std::string deduce_type(const Pred& e, const Row& row) {
    if (e.kind == Pred::Kind::Column) {
        const Value* cell = get_path(row, e.column.names());
        if (!cell) return "";
        if (cell->is_int()) return "INT64";
        if (cell->is_float()) return "FLOAT64";
        if (cell->is_bool()) return "BOOL";
        if (cell->is_string()) return "STRING";
        if (cell->is_date()) return "DATE";
        if (cell->is_timestamp()) return "TIMESTAMP";
        return "";
    }
    if (e.kind == Pred::Kind::Literal) {
        const Value& v = e.value;
        if (v.is_int()) return "INT64";
        if (v.is_float()) return "FLOAT64";
        if (v.is_string()) return "STRING";
        if (v.is_date()) return "DATE";
        if (v.is_timestamp()) return "TIMESTAMP";
        return "";
    }
    if (e.kind != Pred::Kind::Func) return "";
    if (e.func == "CAST" || e.func == "SAFE_CAST") return e.cast_type;
    if (e.func == "DATE" || e.func == "DATE_TRUNC") return "DATE";
    if (e.func == "TIMESTAMP_SECONDS" || e.func == "PARSE_TIMESTAMP") return "TIMESTAMP";
    if (e.func == "FORMAT_TIMESTAMP" || e.func == "LOWER" || e.func == "UPPER" || e.func == "||")
        return "STRING";
    return "";
}

std::optional<CivilDate> value_as_date(const Value& v) {
    if (v.is_date()) return v.as_date();
    if (v.is_string()) return parse_date(v.as_string());
    return std::nullopt;
}

CivilDate advance_bucket(const CivilDate& b, const std::string& part) {
    if (part == "year") return CivilDate{b.year + 1, 1, 1};
    if (part == "quarter")
        return b.month >= 10 ? CivilDate{b.year + 1, 1, 1} : CivilDate{b.year, b.month + 3, 1};
    if (part == "month")
        return b.month == 12 ? CivilDate{b.year + 1, 1, 1} : CivilDate{b.year, b.month + 1, b.day};
    if (part == "week") return add_days(b, 7);
    return add_days(b, 1);  // day
}

const TimeZone zone_from_args(const std::vector<PredPtr>& args, size_t index) {
    if (args.size() > index && args[index]->kind == Pred::Kind::Literal &&
        args[index]->value.is_string())
        return TimeZone::lookup(args[index]->value.as_string());
    return TimeZone::utc();
}

/// One inversion step through a whitelisted FuncCall; updates req and moves
/// `node` to the wrapped child. Returns false when the function cannot be
/// inverted for this requirement.
bool invert_function(const Pred& f, Requirement& req, const Pred** node) {
    if (f.func == "CAST" || f.func == "SAFE_CAST") {
        if (f.list.empty()) return false;
        // The inner type is unknowable without the row; handled by the caller
        // via deduce_type. Marker op keeps the requirement unchanged here.
        *node = f.list[0].get();
        return true;
    }
    if (f.func == "DATE") {
        if (f.list.empty()) return false;
        auto d = value_as_date(req.v);
        if (!d) return false;
        CivilDate target = *d;
        if (req.op == ">")
            target = add_days(target, 1);
        else if (req.op == "<")
            target = add_days(target, -1);
        else if (req.op == "!=")
            target = add_days(target, 1);
        TimeZone tz = zone_from_args(f.list, 1);
        // Local noon keeps the instant inside the target date in any zone
        // the chain might re-interpret it under.
        int64_t epoch = tz.epoch_from_civil(CivilTime{target, 12, 0, 0});
        req = {"=", Value(Timestamp{epoch, ""})};
        *node = f.list[0].get();
        return true;
    }
    if (f.func == "TIMESTAMP_SECONDS") {
        if (f.list.empty()) return false;
        int64_t epoch = 0;
        if (req.v.is_timestamp())
            epoch = req.v.as_timestamp().epoch_seconds;
        else if (req.v.is_int())
            epoch = req.v.as_int();
        else
            return false;
        req = {req.op, Value(epoch)};  // monotone: the comparison direction survives
        *node = f.list[0].get();
        return true;
    }
    if (f.func == "DATE_TRUNC") {
        if (f.list.size() < 2 || f.list[1]->kind != Pred::Kind::Literal) return false;
        auto part_text = text_of(f.list[1]->value);
        auto d = value_as_date(req.v);
        if (!part_text || !d) return false;
        auto aligned = truncate_date(*d, *part_text);
        if (!aligned) return false;
        if (req.op == "=") {
            if (*aligned != *d) return false;  // off-bucket target is unsatisfiable
            req = {"=", Value(*d)};
        } else if (req.op == ">=") {
            req = {">=", Value(*aligned == *d ? *d : advance_bucket(*aligned, *part_text))};
        } else if (req.op == ">") {
            req = {">=", Value(advance_bucket(*aligned, *part_text))};
        } else if (req.op == "<=") {
            req = {"<", Value(advance_bucket(*aligned, *part_text))};
        } else if (req.op == "<") {
            req = {"<", Value(*aligned == *d ? *d : advance_bucket(*aligned, *part_text))};
        } else {  // !=
            req = {"=", Value(advance_bucket(*aligned, *part_text))};
        }
        *node = f.list[0].get();
        return true;
    }
    if (f.func == "PARSE_TIMESTAMP") {
        if (f.list.size() < 2 || f.list[0]->kind != Pred::Kind::Literal) return false;
        auto fmt = text_of(f.list[0]->value);
        if (!fmt) return false;
        int64_t epoch = 0;
        if (req.v.is_timestamp())
            epoch = req.v.as_timestamp().epoch_seconds;
        else if (req.v.is_int())
            epoch = req.v.as_int();
        else
            return false;
        if (req.op == ">")
            epoch += 1;
        else if (req.op == "<")
            epoch -= 1;
        else if (req.op == "!=")
            epoch += 1;
        TimeZone tz = zone_from_args(f.list, 2);
        req = {"=", Value(format_civil_time(tz.civil_at(epoch), *fmt))};
        *node = f.list[1].get();
        return true;
    }
    if (f.func == "FORMAT_TIMESTAMP") {
        if (f.list.size() < 2 || f.list[0]->kind != Pred::Kind::Literal || req.op != "=")
            return false;
        auto fmt = text_of(f.list[0]->value);
        auto target = text_of(req.v);
        if (!fmt || !target) return false;
        auto civil = parse_civil_time(*target, *fmt);
        if (!civil) return false;
        TimeZone tz = zone_from_args(f.list, 2);
        req = {"=", Value(Timestamp{tz.epoch_from_civil(*civil), ""})};
        *node = f.list[1].get();
        return true;
    }
    if (f.func == "LOWER" || f.func == "UPPER") {
        if (f.list.empty() || req.op != "=") return false;
        *node = f.list[0].get();
        return true;  // candidate text passes through; forward check rejects misfits
    }
    return false;
}

std::optional<Value> value_sub(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) return Value(a.as_int() - b.as_int());
    if ((a.is_int() || a.is_float()) && (b.is_int() || b.is_float())) {
        double x = a.is_int() ? static_cast<double>(a.as_int()) : a.as_float();
        double y = b.is_int() ? static_cast<double>(b.as_int()) : b.as_float();
        return Value(x - y);
    }
    return std::nullopt;
}

std::optional<Value> value_add(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) return Value(a.as_int() + b.as_int());
    if ((a.is_int() || a.is_float()) && (b.is_int() || b.is_float())) {
        double x = a.is_int() ? static_cast<double>(a.as_int()) : a.as_float();
        double y = b.is_int() ? static_cast<double>(b.as_int()) : b.as_float();
        return Value(x + y);
    }
    return std::nullopt;
}

std::optional<double> value_num(const Value& v) {
    if (v.is_int()) return static_cast<double>(v.as_int());
    if (v.is_float()) return v.as_float();
    return std::nullopt;
}

Value number_value(double d) {
    double r = std::round(d);
    if (r == d && std::abs(d) < 9.0e15) return Value(static_cast<int64_t>(r));
    return Value(d);
}

/// Inverts one arithmetic/concatenation operator node around the side that
/// holds the column.
bool invert_operator(const Pred& f, const Row& row, Requirement& req, const Pred** node) {
    const bool col_left = analysis::innermost_column(*f.a) != nullptr;
    const Pred& inner = col_left ? *f.a : *f.b;
    const Pred& other = col_left ? *f.b : *f.a;
    auto k = evaluate_scalar(row, other);
    if (!k || k->is_null()) return false;

    if (f.func == "||") {
        if (req.op != "=") return false;
        auto target = text_of(req.v);
        auto fixed = text_of(*k);
        if (!target || !fixed || fixed->size() > target->size()) return false;
        if (col_left) {  // x || k = v  ->  x = v minus suffix k
            if (target->compare(target->size() - fixed->size(), fixed->size(), *fixed) != 0)
                return false;
            req = {"=", Value(target->substr(0, target->size() - fixed->size()))};
        } else {  // k || x = v  ->  x = v minus prefix k
            if (target->compare(0, fixed->size(), *fixed) != 0) return false;
            req = {"=", Value(target->substr(fixed->size()))};
        }
        *node = &inner;
        return true;
    }
    if (f.func == "+") {
        auto v = value_sub(req.v, *k);
        if (!v) return false;
        req.v = *v;
    } else if (f.func == "-") {
        if (col_left) {  // x - k op v  ->  x op v + k
            auto v = value_add(req.v, *k);
            if (!v) return false;
            req.v = *v;
        } else {  // k - x op v  ->  x flip(op) k - v
            auto v = value_sub(*k, req.v);
            if (!v) return false;
            req = {flip_op(req.op), *v};
        }
    } else if (f.func == "*") {
        auto kn = value_num(*k);
        auto vn = value_num(req.v);
        if (!kn || !vn || *kn == 0.0) return false;
        req = {*kn < 0 ? flip_op(req.op) : req.op, number_value(*vn / *kn)};
    } else if (f.func == "/") {
        if (!col_left) return false;  // k / x: skip (no general inverse here)
        auto kn = value_num(*k);
        auto vn = value_num(req.v);
        if (!kn || !vn || *kn == 0.0) return false;
        req = {*kn < 0 ? flip_op(req.op) : req.op, number_value(*vn * *kn)};
    } else {
        return false;
    }
    *node = &inner;
    return true;
}

std::optional<Value> value_for_requirement(const Requirement& req) {
    if (req.op == "=" || req.op == ">=" || req.op == "<=") return req.v;
    if (req.op == ">") return successor(req.v);
    if (req.op == "<") return predecessor(req.v);
    if (req.op == "!=") {
        if (auto s = successor(req.v)) return s;
        return predecessor(req.v);
    }
    return std::nullopt;
}

/// Shapes a candidate to the type of the cell it will replace, so the
/// substitution keeps the column's representation (digits stay in string
/// columns, enum columns get enum values).
Value coerce_like(const Value& candidate, const Value* existing) {
    if (!existing || existing->is_null()) return candidate;
    if (existing->is_enum()) {
        if (auto t = text_of(candidate)) return Value(EnumVal{*t});
        return candidate;
    }
    std::string type;
    if (existing->is_string())
        type = "STRING";
    else if (existing->is_int())
        type = "INT64";
    else if (existing->is_float())
        type = "FLOAT64";
    else if (existing->is_bool())
        type = "BOOL";
    else if (existing->is_date())
        type = "DATE";
    else if (existing->is_timestamp())
        type = "TIMESTAMP";
    if (type.empty()) return candidate;
    if (auto cast = cast_scalar(candidate, type); cast && !cast->is_null()) return *cast;
    return candidate;
}

}  // namespace

std::string_view provenance_name(CellProvenance p) {
    switch (p) {
        case CellProvenance::Backend: return "backend";
        case CellProvenance::Substituted: return "substituted";
        case CellProvenance::JoinSynced: return "join-synced";
    }
    return "backend";
}

CellProvenance TableData::provenance_of(size_t row, const std::string& dotted) const {
    if (row < provenance.size()) {
        auto it = provenance[row].find(dotted);
        if (it != provenance[row].end()) return it->second;
    }
    return CellProvenance::Backend;
}

void TableData::tag(size_t row, const std::string& dotted, CellProvenance p) {
    if (provenance.size() < rows.size()) provenance.resize(rows.size());
    if (row < provenance.size()) provenance[row][dotted] = p;
}

std::optional<Value> solve_derived(const Pred& pred, const Row& row) {
    if (pred.kind != Pred::Kind::Compare || !pred.a || !pred.b) return std::nullopt;
    const bool a_has = analysis::innermost_column(*pred.a) != nullptr;
    const bool b_has = analysis::innermost_column(*pred.b) != nullptr;
    if (a_has == b_has) return std::nullopt;
    const Pred* node = a_has ? pred.a.get() : pred.b.get();
    const Pred* val_side = a_has ? pred.b.get() : pred.a.get();
    auto target = evaluate_scalar(row, *val_side);
    if (!target || target->is_null()) return std::nullopt;

    Requirement req{a_has ? pred.op : flip_op(pred.op), *target};
    const Pred* col = nullptr;
    for (int depth = 0; depth < 16 && node; ++depth) {
        if (node->kind == Pred::Kind::Column) {
            col = node;
            break;
        }
        if (node->kind != Pred::Kind::Func) return std::nullopt;
        if (node->a && node->b) {
            if (!invert_operator(*node, row, req, &node)) return std::nullopt;
            continue;
        }
        if (node->func == "CAST" || node->func == "SAFE_CAST") {
            if (node->list.empty()) return std::nullopt;
            const Pred* inner = node->list[0].get();
            std::string inner_type = deduce_type(*inner, row);
            if (!inner_type.empty()) {
                auto recast = cast_scalar(req.v, inner_type);
                if (recast && !recast->is_null()) req.v = *recast;
                // A failed re-cast keeps the value; the forward check decides.
            }
            node = inner;
            continue;
        }
        if (!invert_function(*node, req, &node)) return std::nullopt;
    }
    if (!col) return std::nullopt;

    auto candidate = value_for_requirement(req);
    if (!candidate) return std::nullopt;
    const auto segments = col->column.names();
    const Value* existing = get_path(row, segments);
    Value shaped = coerce_like(*candidate, existing);

    Row probe = row;
    set_path(probe, segments, shaped);
    if (evaluate_predicate(probe, pred) == Tri::True) return shaped;
    if (!(shaped == *candidate)) {
        set_path(probe, segments, *candidate);
        if (evaluate_predicate(probe, pred) == Tri::True) return *candidate;
    }
    return std::nullopt;
}

namespace {

/// Shared bookkeeping for one enforce_constraints run.
struct Enforcer {
    TableData& data;
    SubstitutionLog* log;
    Warnings* warnings;
    std::map<std::string, ColumnState> states;
    std::set<std::string> reported;  // one report per predicate, not per row

    void warn_once(const std::string& message) {
        if (!reported.insert(message).second) return;
        if (warnings) warnings->push_back(message);
    }

    const FieldDef* field_of(const ColumnPath& path) {
        return try_resolve(data.schemas, data.schema, path);
    }

    void substitute(size_t row_index, const ColumnPath& column, Value v,
                    const std::string& reason) {
        // Constraint literals carry SQL surface types ('2023-01-01' is a
        // string); the stored cell must match the column's declared kind.
        if (const FieldDef* f = field_of(column))
            v = coerce_field_value(*data.schemas, *f, std::move(v));
        const auto segments = column.names();
        Row& row = data.rows[row_index];
        const Value* before = get_path(row, segments);
        if (before && *before == v) return;
        std::string from = display_or_absent(before);
        set_path(row, segments, v);
        data.tag(row_index, column.dotted(), CellProvenance::Substituted);
        if (log)
            log->push_back({data.table, row_index, column.dotted(), std::move(from),
                            v.to_display(), reason});
    }

    /// Fixes one failing conjunct on one row. Returns true when a
    /// substitution was applied.
    bool fix_conjunct(size_t row_index, const PredPtr& c, ConjunctClass cls) {
        const Row& row = data.rows[row_index];
        const std::string reason = analysis::render_predicate(*c);
        switch (cls) {
            case ConjunctClass::Foldable: {
                const Pred* col_node = analysis::innermost_column(*c);
                if (!col_node) return false;
                const ColumnState& s = states.at(col_node->column.dotted());
                Value v = satisfying_value(s, field_of(s.column));
                substitute(row_index, s.column, std::move(v), reason);
                return true;
            }
            case ConjunctClass::Derived: {
                if (c->kind == Pred::Kind::Between && !c->negated) {
                    // Split into the two comparisons and solve whichever fails.
                    auto lo = analysis::make_compare(">=", c->a, c->b);
                    auto hi = analysis::make_compare("<=", c->a, c->c);
                    bool changed = false;
                    for (const auto& side : {lo, hi}) {
                        if (evaluate_predicate(data.rows[row_index], *side) == Tri::True) continue;
                        if (auto v = solve_derived(*side, data.rows[row_index])) {
                            const Pred* col_node = analysis::innermost_column(*side);
                            substitute(row_index, col_node->column, std::move(*v), reason);
                            changed = true;
                        }
                    }
                    if (!changed)
                        warn_once("derived constraint not invertible; left for the judge: " +
                                  reason);
                    return changed;
                }
                if (auto v = solve_derived(*c, row)) {
                    const Pred* col_node = analysis::innermost_column(*c);
                    substitute(row_index, col_node->column, std::move(*v), reason);
                    return true;
                }
                warn_once("derived constraint not invertible; left for the judge: " + reason);
                return false;
            }
            case ConjunctClass::Complex: return fix_complex(row_index, c, reason);
            case ConjunctClass::Unevaluable: return false;
        }
        return false;
    }

    bool fix_complex(size_t row_index, const PredPtr& c, const std::string& reason) {
        const Pred& p = *c;
        if (p.kind == Pred::Kind::Or) return fix_disjunction(row_index, c, reason);
        if (p.kind == Pred::Kind::Compare && p.a && p.b) return fix_cross(row_index, p, reason);
        if (p.kind == Pred::Kind::IsNull && p.a) {
            const Pred* col_node = analysis::innermost_column(*p.a);
            if (!col_node) return false;
            if (!p.negated) {
                // NULL propagates through any whitelisted chain.
                substitute(row_index, col_node->column, Value(Null{}), reason);
                return true;
            }
            Value v = default_for_field(field_of(col_node->column));
            Row probe = data.rows[row_index];
            set_path(probe, col_node->column.names(), v);
            if (evaluate_predicate(probe, p) == Tri::True) {
                substitute(row_index, col_node->column, std::move(v), reason);
                return true;
            }
            warn_once("could not enforce: " + reason);
            return false;
        }
        if (p.kind == Pred::Kind::Column) {
            substitute(row_index, p.column, Value(true), reason);
            return true;
        }
        if (p.kind == Pred::Kind::Not && p.a && p.a->kind == Pred::Kind::Column) {
            substitute(row_index, p.a->column, Value(false), reason);
            return true;
        }
        warn_once("could not enforce: " + reason);
        return false;
    }

    /// Commits the first disjunct branch that verifies on a row copy.
    bool fix_disjunction(size_t row_index, const PredPtr& c, const std::string& reason) {
        for (const auto& branch : analysis::disjuncts_of(c)) {
            Row saved = data.rows[row_index];
            auto saved_tags =
                row_index < data.provenance.size() ? data.provenance[row_index]
                                                   : std::map<std::string, CellProvenance>{};
            size_t saved_log = log ? log->size() : 0;
            bool any = false;
            try {
                for (const auto& sub : analysis::conjuncts_of(branch)) {
                    if (evaluate_predicate(data.rows[row_index], *sub) == Tri::True) continue;
                    std::map<std::string, ColumnState> branch_states;
                    ConjunctClass cls = classify(*sub);
                    if (cls == ConjunctClass::Foldable) {
                        fold_conjunct(branch_states, *sub, *sub);
                        std::swap(states, branch_states);
                        // Branch-local state: visible only for this fix.
                        try {
                            any = fix_conjunct(row_index, sub, cls) || any;
                        } catch (...) {
                            std::swap(states, branch_states);
                            throw;
                        }
                        std::swap(states, branch_states);
                    } else {
                        any = fix_conjunct(row_index, sub, cls) || any;
                    }
                }
            } catch (const EnforceError&) {
                any = false;  // contradictory branch: roll back and move on
            }
            if (any && evaluate_predicate(data.rows[row_index], *c) == Tri::True) return true;
            data.rows[row_index] = std::move(saved);
            if (row_index < data.provenance.size()) data.provenance[row_index] = saved_tags;
            if (log) log->resize(saved_log);
        }
        warn_once("could not enforce disjunction: " + reason);
        return false;
    }

    /// Cross-column comparison inside one table: rewrite the left column
    /// from the right side's value (or the mirror when the left column is
    /// pinned by other constraints).
    bool fix_cross(size_t row_index, const Pred& p, const std::string& reason) {
        auto solve_side = [&](const Pred& col_side, const Pred& val_side,
                              const std::string& op) -> bool {
            if (col_side.kind != Pred::Kind::Column) return false;
            auto v = evaluate_scalar(data.rows[row_index], val_side);
            if (!v || v->is_null()) return false;
            Requirement req{op, *v};
            auto candidate = value_for_requirement(req);
            if (!candidate) return false;
            auto it = states.find(col_side.column.dotted());
            if (it != states.end() && !state_allows(it->second, *candidate)) return false;
            Row probe = data.rows[row_index];
            set_path(probe, col_side.column.names(), *candidate);
            if (evaluate_predicate(probe, p) != Tri::True) return false;
            substitute(row_index, col_side.column, std::move(*candidate), reason);
            return true;
        };
        if (solve_side(*p.a, *p.b, p.op)) return true;
        if (solve_side(*p.b, *p.a, flip_op(p.op))) return true;
        warn_once("could not enforce: " + reason);
        return false;
    }
};

std::string describe_coverage(const CoverageTarget& ct) {
    switch (ct.kind) {
        case CoverageTarget::Kind::ValueSet: {
            std::vector<std::string> names;
            for (const auto& v : ct.values) names.push_back(v.to_display());
            return "coverage: " + ct.column.dotted() + " takes each of {" + join(names, ", ") +
                   "}";
        }
        case CoverageTarget::Kind::Partition:
            return "coverage: one row per " + ct.part + " on " + ct.column.dotted() + " in [" +
                   ct.lo.to_display() + ", " + ct.hi.to_display() + "]";
        case CoverageTarget::Kind::RangeSpread:
            return "coverage: " + ct.column.dotted() + " spread across [" + ct.lo.to_display() +
                   ", " + ct.hi.to_display() + "]";
    }
    return "coverage";
}

/// One required slot of a coverage target: a membership test plus the value
/// substituted into a row elected to cover it.
struct CoverageSlot {
    Value assigned;
    std::function<bool(const Value&)> matches;
};

std::vector<CoverageSlot> coverage_slots(const CoverageTarget& ct, const FieldDef* field) {
    std::vector<CoverageSlot> slots;
    if (ct.kind == CoverageTarget::Kind::ValueSet) {
        for (const auto& v : ct.values)
            slots.push_back({v, [v](const Value& cell) { return values_equal(cell, v); }});
        return slots;
    }
    if (ct.kind == CoverageTarget::Kind::Partition) {
        auto lo = value_as_date(ct.lo), hi = value_as_date(ct.hi);
        if (!lo || !hi || *hi < *lo) return slots;
        auto bucket = truncate_date(*lo, ct.part);
        if (!bucket) return slots;
        const bool as_string =
            field && field->is_scalar() && field->scalar() == Scalar::String;
        int guard = 0;
        std::string part = ct.part;
        CivilDate lo_d = *lo, hi_d = *hi;
        for (CivilDate b = *bucket; b <= hi_d && ++guard < 10000;
             b = advance_bucket(b, part)) {
            CivilDate assigned = std::max(b, lo_d);
            Value v = as_string ? Value(format_date(assigned)) : Value(assigned);
            slots.push_back({v, [b, part, lo_d, hi_d](const Value& cell) {
                                 auto d = value_as_date(cell);
                                 if (!d || *d < lo_d || hi_d < *d) return false;
                                 auto t = truncate_date(*d, part);
                                 return t && *t == b;
                             }});
        }
        return slots;
    }
    // RangeSpread: both endpoints and one interior point.
    const Value lo = ct.lo, hi = ct.hi;
    slots.push_back({lo, [lo](const Value& cell) { return values_equal(cell, lo); }});
    slots.push_back({hi, [hi](const Value& cell) { return values_equal(cell, hi); }});
    Value mid = lo;
    if (lo.is_int() && hi.is_int())
        mid = Value((lo.as_int() + hi.as_int()) / 2);
    else if ((lo.is_int() || lo.is_float()) && (hi.is_int() || hi.is_float()))
        mid = Value((*value_num(lo) + *value_num(hi)) / 2.0);
    else if (auto lod = value_as_date(lo), hid = value_as_date(hi); lod && hid)
        mid = Value(add_days(*lod, days_between(*lod, *hid) / 2));
    slots.push_back({mid, [lo, hi](const Value& cell) {
                         auto a = compare_values(cell, lo);
                         auto b = compare_values(cell, hi);
                         return a && b && *a > 0 && *b < 0;
                     }});
    return slots;
}

void enforce_coverage(Enforcer& enf, const std::vector<CoverageTarget>& coverage) {
    TableData& data = enf.data;
    for (const auto& ct : coverage) {
        if (ct.table != data.table) continue;
        auto slots = coverage_slots(ct, enf.field_of(ct.column));
        if (slots.empty()) continue;
        const std::string reason = describe_coverage(ct);
        const auto segments = ct.column.names();

        // Who covers what today?
        std::vector<std::vector<size_t>> covers(slots.size());
        for (size_t r = 0; r < data.rows.size(); ++r) {
            const Value* cell = get_path(data.rows[r], segments);
            if (!cell) continue;
            for (size_t s = 0; s < slots.size(); ++s)
                if (slots[s].matches(*cell)) covers[s].push_back(r);
        }
        std::vector<bool> protected_row(data.rows.size(), false);
        for (size_t s = 0; s < slots.size(); ++s)
            if (covers[s].size() == 1) protected_row[covers[s][0]] = true;

        size_t cursor = 0;
        for (size_t s = 0; s < slots.size(); ++s) {
            if (!covers[s].empty()) continue;
            auto it = enf.states.find(ct.column.dotted());
            if (it != enf.states.end() && !state_allows(it->second, slots[s].assigned)) {
                enf.warn_once("coverage value " + slots[s].assigned.to_display() + " on " +
                              ct.column.dotted() +
                              " conflicts with the conjunctive constraints; constraint wins");
                continue;
            }
            size_t tries = 0;
            while (tries < data.rows.size() && protected_row[cursor % data.rows.size()]) {
                ++cursor;
                ++tries;
            }
            if (data.rows.empty() || tries == data.rows.size()) {
                enf.warn_once("not enough rows to realize " + reason);
                break;
            }
            size_t row_index = cursor % data.rows.size();
            enf.substitute(row_index, ct.column, slots[s].assigned, reason);
            protected_row[row_index] = true;  // sole cover of the new slot
            ++cursor;
        }
    }
}

}  // namespace

TableData enforce_constraints(TableData data, const std::vector<PredPtr>& constraints,
                              const std::vector<CoverageTarget>& coverage, SubstitutionLog* log,
                              Warnings* warnings) {
    Enforcer enf{data, log, warnings, {}, {}};

    std::vector<std::pair<PredPtr, ConjunctClass>> work;
    for (const auto& c : constraints) {
        if (!c) continue;
        ConjunctClass cls = classify(*c);
        if (cls == ConjunctClass::Foldable) fold_conjunct(enf.states, *c, *c);
        if (cls != ConjunctClass::Unevaluable) work.emplace_back(c, cls);
    }

    for (size_t r = 0; r < data.rows.size(); ++r) {
        for (int round = 0; round < 3; ++round) {
            bool changed = false;
            bool all_true = true;
            for (const auto& [c, cls] : work) {
                if (evaluate_predicate(data.rows[r], *c) == Tri::True) continue;
                all_true = false;
                changed = enf.fix_conjunct(r, c, cls) || changed;
            }
            if (all_true || !changed) break;
        }
    }

    // Safety net: anything evaluable still failing is surfaced, not hidden.
    for (const auto& [c, cls] : work) {
        for (size_t r = 0; r < data.rows.size(); ++r) {
            if (evaluate_predicate(data.rows[r], *c) != Tri::True) {
                enf.warn_once("constraint still unsatisfied after enforcement: " +
                              analysis::render_predicate(*c));
                break;
            }
        }
    }

    enforce_coverage(enf, coverage);
    return data;
}

std::map<std::string, TableData> enforce_joins(std::map<std::string, TableData> tables,
                                               const std::vector<analysis::JoinConstraint>& joins,
                                               int fan_out, SubstitutionLog* log) {
    if (fan_out < 1) fan_out = 1;
    for (const auto& jc : joins) {
        auto pit = tables.find(jc.left_table);
        auto sit = tables.find(jc.right_table);
        if (pit == tables.end())
            throw EnforceError("join table '" + jc.left_table + "' missing from generated tables");
        if (sit == tables.end())
            throw EnforceError("join table '" + jc.right_table +
                               "' missing from generated tables");
        TableData& prim = pit->second;
        TableData& sec = sit->second;
        if (sec.rows.empty()) continue;
        if (prim.rows.empty())
            throw EnforceError("join primary table '" + jc.left_table + "' has no rows");

        for (const auto& pair : jc.pairs) {
            const auto left_segs = pair.left.column.names();
            for (const Row& row : prim.rows) {
                const Value* v = get_path(row, left_segs);
                if (!v || v->is_null())
                    throw EnforceError("join column '" + pair.left.column.dotted() +
                                       "' missing from generated rows of table '" +
                                       jc.left_table + "'");
            }
            const auto right_segs = pair.right.column.names();
            bool present = std::any_of(sec.rows.begin(), sec.rows.end(), [&](const Row& row) {
                return get_path(row, right_segs) != nullptr;
            });
            if (!present)
                throw EnforceError("join column '" + pair.right.column.dotted() +
                                   "' missing from generated rows of table '" + jc.right_table +
                                   "'");
        }

        const size_t n = prim.rows.size();
        for (size_t i = 0; i < sec.rows.size(); ++i) {
            const size_t src = (i / static_cast<size_t>(fan_out)) % n;
            for (const auto& pair : jc.pairs) {
                const Value* raw = get_path(prim.rows[src], pair.left.column.names());
                Value keyed = *raw;
                if (!pair.left.cast_type.empty()) {
                    auto cast = cast_scalar(keyed, pair.left.cast_type);
                    if (!cast || cast->is_null())
                        throw EnforceError("join key CAST(" + pair.left.column.dotted() + " AS " +
                                           pair.left.cast_type + ") fails on value " +
                                           raw->to_display());
                    keyed = *cast;
                }
                // Shape the copied key to the secondary column, inverting a
                // CAST wrapper on that side when present.
                Value candidate = keyed;
                if (const FieldDef* f = try_resolve(sec.schemas, sec.schema, pair.right.column))
                    candidate = coerce_field_value(*sec.schemas, *f, candidate);
                if (!pair.right.cast_type.empty()) {
                    auto post = cast_scalar(candidate, pair.right.cast_type);
                    if (!post || !values_equal(*post, keyed)) candidate = keyed;
                }

                const auto right_segs = pair.right.column.names();
                const Value* before = get_path(sec.rows[i], right_segs);
                if (before) {  // skip cells that already join correctly
                    Value held = *before;
                    if (!pair.right.cast_type.empty()) {
                        auto post = cast_scalar(held, pair.right.cast_type);
                        held = post && !post->is_null() ? *post : Value(Null{});
                    }
                    if (values_equal(held, keyed)) continue;
                }
                std::string from = display_or_absent(before);
                set_path(sec.rows[i], right_segs, candidate);
                sec.tag(i, pair.right.column.dotted(), CellProvenance::JoinSynced);
                if (log)
                    log->push_back({jc.right_table, i, pair.right.column.dotted(),
                                    std::move(from), candidate.to_display(),
                                    "join: " + jc.left_table + "." + pair.left.column.dotted() +
                                        " = " + jc.right_table + "." +
                                        pair.right.column.dotted()});
            }
        }
    }
    return tables;
}

}  // namespace sdgen
