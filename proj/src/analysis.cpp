#include "sdgen/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sdgen/data_io.hpp"
#include "sdgen/dates.hpp"

namespace sdgen::analysis {

using ordered_json = nlohmann::ordered_json;

bool is_whitelisted_function(std::string_view name) {
    static const std::set<std::string, std::less<>> kAllowed = {
        "CAST",           "SAFE_CAST",        "DATE",       "TIMESTAMP_SECONDS",
        "PARSE_TIMESTAMP", "FORMAT_TIMESTAMP", "DATE_TRUNC", "LOWER",
        "UPPER"};
    return kAllowed.count(name) > 0;
}

namespace {

bool is_operator_func(std::string_view name) {
    return name == "+" || name == "-" || name == "*" || name == "/" || name == "||";
}

std::shared_ptr<Pred> new_pred(Pred::Kind k) {
    auto p = std::make_shared<Pred>();
    p->kind = k;
    return p;
}

bool is_datepart(std::string_view s) {
    std::string l = to_lower(s);
    return l == "year" || l == "quarter" || l == "month" || l == "week" || l == "day" ||
           l == "hour" || l == "minute" || l == "second";
}

}  // namespace

PredPtr make_literal(Value v) {
    auto p = new_pred(Pred::Kind::Literal);
    p->value = std::move(v);
    return p;
}

PredPtr make_column(std::string table, ColumnPath path) {
    auto p = new_pred(Pred::Kind::Column);
    p->table = std::move(table);
    p->column = std::move(path);
    return p;
}

PredPtr make_compare(std::string op, PredPtr a, PredPtr b) {
    auto p = new_pred(Pred::Kind::Compare);
    p->op = std::move(op);
    p->evaluable = a->evaluable && b->evaluable;
    p->a = std::move(a);
    p->b = std::move(b);
    return p;
}

PredPtr make_and(PredPtr a, PredPtr b) {
    auto p = new_pred(Pred::Kind::And);
    p->evaluable = a->evaluable && b->evaluable;
    p->a = std::move(a);
    p->b = std::move(b);
    return p;
}

PredPtr make_or(PredPtr a, PredPtr b) {
    auto p = new_pred(Pred::Kind::Or);
    p->evaluable = a->evaluable && b->evaluable;
    p->a = std::move(a);
    p->b = std::move(b);
    return p;
}

std::vector<PredPtr> conjuncts_of(const PredPtr& p) {
    std::vector<PredPtr> out;
    if (!p) return out;
    if (p->kind == Pred::Kind::And) {
        for (auto& c : conjuncts_of(p->a)) out.push_back(c);
        for (auto& c : conjuncts_of(p->b)) out.push_back(c);
    } else {
        out.push_back(p);
    }
    return out;
}

std::vector<PredPtr> disjuncts_of(const PredPtr& p) {
    std::vector<PredPtr> out;
    if (!p) return out;
    if (p->kind == Pred::Kind::Or) {
        for (auto& c : disjuncts_of(p->a)) out.push_back(c);
        for (auto& c : disjuncts_of(p->b)) out.push_back(c);
    } else {
        out.push_back(p);
    }
    return out;
}

void collect_columns(const Pred& p, std::vector<const Pred*>& out) {
    if (p.kind == Pred::Kind::Column) {
        out.push_back(&p);
        return;
    }
    for (const auto& child : {p.a, p.b, p.c})
        if (child) collect_columns(*child, out);
    for (const auto& child : p.list)
        if (child) collect_columns(*child, out);
}

const Pred* innermost_column(const Pred& p) {
    std::vector<const Pred*> cols;
    collect_columns(p, cols);
    return cols.empty() ? nullptr : cols.front();
}

namespace {

std::string quote_sql(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'') out += '\'';
    }
    out += '\'';
    return out;
}

std::string render_literal(const Value& v) {
    if (v.is_null()) return "NULL";
    if (v.is_string()) return quote_sql(v.as_string());
    if (v.is_date()) return quote_sql(format_date(v.as_date()));
    if (v.is_bool()) return v.as_bool() ? "true" : "false";
    if (v.is_enum()) return quote_sql(v.as_enum().name);
    return v.to_display();
}

}  // namespace

std::string render_predicate(const Pred& p) {
    switch (p.kind) {
        case Pred::Kind::Literal: return render_literal(p.value);
        case Pred::Kind::Column: return p.column.dotted();
        case Pred::Kind::Compare:
            return render_predicate(*p.a) + p.op + render_predicate(*p.b);
        case Pred::Kind::Between:
            if (p.negated)
                return render_predicate(*p.a) + " NOT BETWEEN " + render_predicate(*p.b) +
                       " AND " + render_predicate(*p.c);
            return render_predicate(*p.a) + ">=" + render_predicate(*p.b) + " AND " +
                   render_predicate(*p.a) + "<=" + render_predicate(*p.c);
        case Pred::Kind::Like:
            return render_predicate(*p.a) + (p.negated ? " NOT LIKE " : " LIKE ") +
                   render_predicate(*p.b);
        case Pred::Kind::InList: {
            std::vector<std::string> parts;
            for (const auto& e : p.list) parts.push_back(render_predicate(*e));
            return render_predicate(*p.a) + (p.negated ? " NOT IN (" : " IN (") +
                   join(parts, ", ") + ")";
        }
        case Pred::Kind::IsNull:
            return render_predicate(*p.a) + (p.negated ? " IS NOT NULL" : " IS NULL");
        case Pred::Kind::And: {
            std::vector<std::string> parts;
            for (const auto& c : conjuncts_of(std::make_shared<Pred>(p)))
                parts.push_back(render_predicate(*c));
            return join(parts, " AND ");
        }
        case Pred::Kind::Or: {
            std::vector<std::string> parts;
            for (const auto& c : disjuncts_of(std::make_shared<Pred>(p)))
                parts.push_back(render_predicate(*c));
            return "(" + join(parts, " OR ") + ")";
        }
        case Pred::Kind::Not: return "NOT (" + render_predicate(*p.a) + ")";
        case Pred::Kind::Func: {
            if (p.func == "||") return render_predicate(*p.a) + "||" + render_predicate(*p.b);
            if (is_operator_func(p.func))
                return render_predicate(*p.a) + " " + p.func + " " + render_predicate(*p.b);
            if (p.func == "CAST" || p.func == "SAFE_CAST")
                return p.func + "(" + render_predicate(*p.list[0]) + " AS " + p.cast_type + ")";
            std::vector<std::string> parts;
            for (const auto& e : p.list) parts.push_back(render_predicate(*e));
            return p.func + "(" + join(parts, ", ") + ")";
        }
        case Pred::Kind::Opaque: return p.text;
    }
    return "";
}

std::string render_conjunction(const std::vector<PredPtr>& ps) {
    std::vector<std::string> parts;
    for (const auto& p : ps) parts.push_back(render_predicate(*p));
    return join(parts, " AND ");
}

int coverage_demand(const CoverageTarget& t) {
    switch (t.kind) {
        case CoverageTarget::Kind::ValueSet: return static_cast<int>(t.values.size());
        case CoverageTarget::Kind::RangeSpread: return 3;
        case CoverageTarget::Kind::Partition: {
            auto to_date = [](const Value& v) -> std::optional<CivilDate> {
                if (v.is_date()) return v.as_date();
                if (v.is_string()) return parse_date(v.as_string());
                return std::nullopt;
            };
            auto lo = to_date(t.lo), hi = to_date(t.hi);
            if (!lo || !hi || *hi < *lo) return 0;
            auto start = truncate_date(*lo, t.part);
            if (!start) return 0;
            int count = 0;
            CivilDate d = *start;
            while (!(*hi < d) && count < 10000) {
                ++count;
                if (t.part == "year") d = CivilDate{d.year + 1, 1, 1};
                else if (t.part == "quarter") d = d.month >= 10 ? CivilDate{d.year + 1, 1, 1}
                                                                : CivilDate{d.year, d.month + 3, 1};
                else if (t.part == "month") d = d.month == 12 ? CivilDate{d.year + 1, 1, 1}
                                                              : CivilDate{d.year, d.month + 1, 1};
                else if (t.part == "week") d = add_days(d, 7);
                else if (t.part == "day") d = add_days(d, 1);
                else return count;
            }
            return count;
        }
    }
    return 0;
}

const TableTarget* QueryAnalysis::target(std::string_view table) const {
    for (const auto& t : targets)
        if (t.table == table) return &t;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Extraction walk
// ---------------------------------------------------------------------------

namespace {

struct Scope;

struct Source {
    std::string alias_lower;
    std::string display;
    std::string base_table;              // "" for derived
    const sql::SelectStmt* derived = nullptr;
    Scope* inner = nullptr;
    int target_index = -1;               // into Extractor::targets_ for base sources
    int order = 0;                       // global creation order
    std::vector<PredPtr> constraints;    // conjuncts attributed to this occurrence
};

struct Scope {
    std::vector<std::unique_ptr<Source>> sources;
    Scope* parent = nullptr;
};

struct TargetAcc {
    std::string table;
    const SchemaDef* schema = nullptr;
    std::vector<std::string> aliases;
    std::set<ColumnPath> referenced;
    std::vector<Source*> occurrences;  // creation order
};

struct Resolved {
    enum class Kind { Column, Unbound } kind = Kind::Unbound;
    Source* base = nullptr;  // terminal base source
    std::string table;
    ColumnPath column;
};

struct CaseCandidate {
    int target_index;
    ColumnPath column;
    std::vector<Value> values;  // arm order
};

struct PartitionCandidate {
    int target_index;
    ColumnPath column;
    std::string part;
};

class Extractor {
  public:
    Extractor(const SchemaSet& set) : set_(set) {}

    QueryAnalysis run(const sql::Statement& stmt) {
        if (stmt.function)
            walk_function(*stmt.function);
        else if (stmt.select)
            walk_select(*stmt.select, nullptr);
        QueryAnalysis qa;
        qa.warnings = stmt.flagged;
        finalize(qa);
        return qa;
    }

  private:
    const SchemaSet& set_;
    std::vector<std::unique_ptr<Scope>> scope_pool_;
    std::vector<TargetAcc> targets_;
    Warnings warnings_;
    int next_source_order_ = 0;

    struct PendingJoin {
        int left_target, right_target;
        JoinPair pair;
    };
    std::vector<PendingJoin> joins_;
    std::vector<CaseCandidate> cases_;
    std::vector<PartitionCandidate> partitions_;
    std::vector<PredPtr> range_spreads_;  // Between conjuncts kept for coverage
    std::vector<int> range_spread_targets_;
    std::vector<PredPtr> value_lists_;  // InList / OR-of-equalities conjuncts
    std::vector<int> value_list_targets_;
    std::vector<PredPtr> unassigned_;

    // Base sources touched while converting the current conjunct.
    std::set<Source*> touched_;

    int intern_target(const std::string& table) {
        for (size_t i = 0; i < targets_.size(); ++i)
            if (targets_[i].table == table) return static_cast<int>(i);
        const SchemaDef* schema = set_.message(table);
        if (!schema)
            throw ConfigError("table '" + table + "' referenced with no loadable schema");
        targets_.push_back(TargetAcc{table, schema, {}, {}, {}});
        return static_cast<int>(targets_.size()) - 1;
    }

    Source* add_base_source(Scope& scope, const std::string& table, const std::string& alias) {
        int idx = intern_target(table);
        auto src = std::make_unique<Source>();
        src->alias_lower = to_lower(alias.empty() ? table : alias);
        src->display = alias.empty() ? table : alias;
        src->base_table = table;
        src->target_index = idx;
        src->order = next_source_order_++;
        auto& aliases = targets_[idx].aliases;
        if (std::find(aliases.begin(), aliases.end(), src->display) == aliases.end())
            aliases.push_back(src->display);
        targets_[idx].occurrences.push_back(src.get());
        scope.sources.push_back(std::move(src));
        return scope.sources.back().get();
    }

    Source* add_derived_source(Scope& scope, const sql::SelectStmt& sub, const std::string& alias,
                               Scope* inner) {
        auto src = std::make_unique<Source>();
        src->alias_lower = to_lower(alias);
        src->display = alias;
        src->derived = &sub;
        src->inner = inner;
        src->order = next_source_order_++;
        scope.sources.push_back(std::move(src));
        return scope.sources.back().get();
    }

    void walk_function(const sql::FunctionStmt& fn) {
        auto scope = std::make_unique<Scope>();
        for (const auto& [pname, ptype] : fn.params) {
            if (scalar_from_keyword(to_lower(ptype))) continue;  // scalar param
            add_base_source(*scope, ptype, pname);
        }
        Scope* s = scope.get();
        scope_pool_.push_back(std::move(scope));
        if (fn.body) {
            convert(*fn.body, s);  // records references
            visit_coverage(*fn.body, s);
        }
    }

    Scope* walk_select(const sql::SelectStmt& sel, Scope* parent) {
        auto scope_owner = std::make_unique<Scope>();
        Scope* scope = scope_owner.get();
        scope->parent = parent;
        scope_pool_.push_back(std::move(scope_owner));

        auto add_ref = [&](const sql::TableRef& ref) {
            if (ref.is_base()) {
                add_base_source(*scope, ref.table, ref.alias);
            } else {
                Scope* inner = walk_select(*ref.subquery, scope);
                add_derived_source(*scope, *ref.subquery, ref.alias, inner);
            }
        };
        if (sel.from) add_ref(*sel.from);
        for (const auto& j : sel.joins) add_ref(j.table);

        for (const auto& j : sel.joins)
            if (j.on) classify_tree(*j.on, scope);
        if (sel.where) classify_tree(*sel.where, scope);
        if (sel.having) {
            if (contains_aggregate(*sel.having)) {
                PredPtr p = convert(*sel.having, scope);
                unassigned_.push_back(p);
                warnings_.push_back("HAVING uses aggregates; not enforceable per row: " +
                                    render_predicate(*p));
            } else {
                classify_tree(*sel.having, scope);
            }
        }

        for (const auto& item : sel.items) {
            if (!item.expr) continue;
            convert(*item.expr, scope);
            visit_coverage(*item.expr, scope);
        }
        if (sel.where) visit_coverage(*sel.where, scope);
        if (sel.having) visit_coverage(*sel.having, scope);
        for (const auto& g : sel.group_by) {
            if (!g) continue;
            if (!try_partition(*g, scope)) {
                convert(*g, scope);
                visit_coverage(*g, scope);
            }
        }
        for (const auto& o : sel.order_by)
            if (o.expr) convert(*o.expr, scope);
        return scope;
    }

    static bool contains_aggregate(const sql::Expr& e) {
        static const std::set<std::string> kAgg = {"SUM",       "COUNT",     "AVG",
                                                   "MIN",       "MAX",       "ARRAY_AGG",
                                                   "STRING_AGG"};
        if (e.kind == sql::Expr::Kind::FuncCall && kAgg.count(e.name)) return true;
        for (const auto& c : {e.a, e.b, e.c})
            if (c && contains_aggregate(*c)) return true;
        for (const auto& c : e.list)
            if (c && contains_aggregate(*c)) return true;
        for (const auto& w : e.whens) {
            if (w.when && contains_aggregate(*w.when)) return true;
            if (w.then && contains_aggregate(*w.then)) return true;
        }
        return false;
    }

    // --- column resolution -------------------------------------------------

    Resolved resolve_in_base(Source& src, const std::vector<std::string>& parts) {
        Resolved r;
        TargetAcc& acc = targets_[src.target_index];
        ColumnPath path;
        for (const auto& p : parts) path.segments.push_back(PathSegment{p, -1});
        try {
            resolve_path(set_, *acc.schema, path);
        } catch (const Error&) {
            return r;  // Unbound: not a column of this table
        }
        r.kind = Resolved::Kind::Column;
        r.base = &src;
        r.table = acc.table;
        r.column = path;
        return r;
    }

    Resolved resolve_in_source(Source& src, const std::vector<std::string>& parts) {
        if (src.base_table.size()) return resolve_in_base(src, parts);
        // Derived table: map through its select items.
        const sql::SelectStmt& sub = *src.derived;
        bool has_star = false;
        for (const auto& item : sub.items) {
            if (!item.expr) continue;
            if (item.expr->kind == sql::Expr::Kind::Star) {
                has_star = true;
                continue;
            }
            std::string out_name = item.alias;
            if (out_name.empty() && item.expr->kind == sql::Expr::Kind::ColumnRef &&
                !item.expr->parts.empty())
                out_name = item.expr->parts.back();
            if (out_name.empty() || !iequals(out_name, parts[0])) continue;
            if (item.expr->kind == sql::Expr::Kind::ColumnRef) {
                std::vector<std::string> mapped = item.expr->parts;
                mapped.insert(mapped.end(), parts.begin() + 1, parts.end());
                return resolve_ref(src.inner, mapped);
            }
            if (parts.size() == 1) {
                // Computed item: bind to its innermost source column.
                PredPtr inner = convert(*item.expr, src.inner);
                const Pred* col = innermost_column(*inner);
                if (col && !col->table.empty()) {
                    Resolved r;
                    r.kind = Resolved::Kind::Column;
                    r.table = col->table;
                    r.column = col->column;
                    // touched_ already updated by the convert above
                    return r;
                }
            }
            return Resolved{};
        }
        if (has_star) return resolve_ref(src.inner, parts);
        return Resolved{};
    }

    Resolved resolve_ref(Scope* scope, const std::vector<std::string>& parts) {
        if (!scope || parts.empty()) return Resolved{};
        // Qualified by alias?
        if (parts.size() >= 2) {
            std::string head = to_lower(parts[0]);
            for (auto& src : scope->sources) {
                if (src->alias_lower == head) {
                    std::vector<std::string> rest(parts.begin() + 1, parts.end());
                    Resolved r = resolve_in_source(*src, rest);
                    if (r.kind == Resolved::Kind::Column) note_resolution(*src, r);
                    return r;
                }
            }
        }
        // Unqualified: try every source; must be unambiguous.
        Resolved found;
        Source* found_src = nullptr;
        int matches = 0;
        for (auto& src : scope->sources) {
            Resolved r = resolve_in_source(*src, parts);
            if (r.kind == Resolved::Kind::Column) {
                ++matches;
                found = r;
                found_src = src.get();
            }
        }
        if (matches == 1) {
            note_resolution(*found_src, found);
            return found;
        }
        if (matches > 1) {
            warnings_.push_back("column '" + join(parts, ".") +
                                "' is ambiguous across tables in scope");
            return Resolved{};
        }
        return resolve_ref(scope->parent, parts);
    }

    void note_resolution(Source& via, const Resolved& r) {
        Source* base = r.base ? r.base : &via;
        if (base->base_table.size()) {
            touched_.insert(base);
            targets_[base->target_index].referenced.insert(r.column);
        }
    }

    // --- conversion to Pred --------------------------------------------------

    PredPtr convert(const sql::Expr& e, Scope* scope) {
        using K = sql::Expr::Kind;
        switch (e.kind) {
            case K::Literal: return make_literal(e.value);
            case K::ColumnRef: {
                Resolved r = resolve_ref(scope, e.parts);
                if (r.kind == Resolved::Kind::Column) return make_column(r.table, r.column);
                warnings_.push_back("column '" + join(e.parts, ".") +
                                    "' does not resolve to any table in scope");
                auto p = new_pred(Pred::Kind::Column);
                ColumnPath path;
                for (const auto& part : e.parts) path.segments.push_back(PathSegment{part, -1});
                p->column = path;
                p->evaluable = false;
                return p;
            }
            case K::Star: {
                auto p = new_pred(Pred::Kind::Opaque);
                p->text = "*";
                p->evaluable = false;
                return p;
            }
            case K::Unary: {
                PredPtr a = convert(*e.a, scope);
                if (e.op == "NOT") {
                    auto p = new_pred(Pred::Kind::Not);
                    p->evaluable = a->evaluable;
                    p->a = std::move(a);
                    return p;
                }
                // Unary minus: fold into numeric literals, else keep as 0-x.
                if (a->kind == Pred::Kind::Literal && a->value.is_int())
                    return make_literal(Value(-a->value.as_int()));
                if (a->kind == Pred::Kind::Literal && a->value.is_float())
                    return make_literal(Value(-a->value.as_float()));
                auto p = new_pred(Pred::Kind::Func);
                p->func = "-";
                p->evaluable = a->evaluable;
                p->a = make_literal(Value(int64_t{0}));
                p->b = std::move(a);
                return p;
            }
            case K::Binary: {
                PredPtr a = convert(*e.a, scope);
                PredPtr b = convert(*e.b, scope);
                if (e.op == "AND") return make_and(std::move(a), std::move(b));
                if (e.op == "OR") return make_or(std::move(a), std::move(b));
                if (e.op == "=" || e.op == "!=" || e.op == "<" || e.op == "<=" || e.op == ">" ||
                    e.op == ">=") {
                    auto p = new_pred(Pred::Kind::Compare);
                    p->op = e.op;
                    p->evaluable = a->evaluable && b->evaluable;
                    p->a = std::move(a);
                    p->b = std::move(b);
                    mark_derived(*p);
                    return p;
                }
                auto p = new_pred(Pred::Kind::Func);
                p->func = e.op;
                p->evaluable = a->evaluable && b->evaluable;
                p->a = std::move(a);
                p->b = std::move(b);
                return p;
            }
            case K::Between: {
                auto p = new_pred(Pred::Kind::Between);
                p->a = convert(*e.a, scope);
                p->b = convert(*e.b, scope);
                p->c = convert(*e.c, scope);
                p->negated = e.negated;
                p->evaluable = p->a->evaluable && p->b->evaluable && p->c->evaluable;
                mark_derived(*p);
                return p;
            }
            case K::InList: {
                auto p = new_pred(Pred::Kind::InList);
                p->a = convert(*e.a, scope);
                p->evaluable = p->a->evaluable;
                for (const auto& el : e.list) {
                    p->list.push_back(convert(*el, scope));
                    p->evaluable = p->evaluable && p->list.back()->evaluable;
                }
                p->negated = e.negated;
                mark_derived(*p);
                return p;
            }
            case K::Like: {
                auto p = new_pred(Pred::Kind::Like);
                p->a = convert(*e.a, scope);
                p->b = convert(*e.b, scope);
                p->negated = e.negated;
                p->evaluable = p->a->evaluable && p->b->evaluable;
                mark_derived(*p);
                return p;
            }
            case K::IsNull: {
                auto p = new_pred(Pred::Kind::IsNull);
                p->a = convert(*e.a, scope);
                p->negated = e.negated;
                p->evaluable = p->a->evaluable;
                return p;
            }
            case K::Case: {
                auto p = new_pred(Pred::Kind::Opaque);
                p->text = "CASE expression";
                p->evaluable = false;
                if (e.a) p->list.push_back(convert(*e.a, scope));
                for (const auto& w : e.whens) {
                    if (w.when) p->list.push_back(convert(*w.when, scope));
                    if (w.then) p->list.push_back(convert(*w.then, scope));
                }
                if (e.b) p->list.push_back(convert(*e.b, scope));
                return p;
            }
            case K::FuncCall: {
                auto p = new_pred(Pred::Kind::Func);
                p->func = e.name;
                p->evaluable = is_whitelisted_function(e.name);
                for (size_t i = 0; i < e.list.size(); ++i) {
                    const sql::Expr& arg = *e.list[i];
                    // DATE_TRUNC(col, quarter): the datepart is grammar, not a column.
                    if (i == 1 && e.name == "DATE_TRUNC" &&
                        arg.kind == sql::Expr::Kind::ColumnRef && arg.parts.size() == 1 &&
                        is_datepart(arg.parts[0])) {
                        p->list.push_back(make_literal(Value(to_lower(arg.parts[0]))));
                        continue;
                    }
                    p->list.push_back(convert(arg, scope));
                    p->evaluable = p->evaluable && p->list.back()->evaluable;
                }
                return p;
            }
            case K::Cast: {
                auto p = new_pred(Pred::Kind::Func);
                p->func = e.safe ? "SAFE_CAST" : "CAST";
                p->cast_type = to_upper(e.name);
                p->list.push_back(convert(*e.a, scope));
                p->evaluable = p->list.back()->evaluable;
                return p;
            }
            case K::Opaque: {
                auto p = new_pred(Pred::Kind::Opaque);
                p->text = e.text;
                p->evaluable = false;
                return p;
            }
        }
        auto p = new_pred(Pred::Kind::Opaque);
        p->evaluable = false;
        return p;
    }

    static void mark_derived(Pred& p) {
        if (p.a && p.a->kind == Pred::Kind::Func && innermost_column(*p.a)) p.derived = true;
        if (p.kind == Pred::Kind::Compare && p.b && p.b->kind == Pred::Kind::Func &&
            innermost_column(*p.b))
            p.derived = true;
    }

    // --- conjunct classification --------------------------------------------

    void classify_tree(const sql::Expr& e, Scope* scope) {
        if (e.kind == sql::Expr::Kind::Binary && e.op == "AND") {
            classify_tree(*e.a, scope);
            classify_tree(*e.b, scope);
            return;
        }
        touched_.clear();
        PredPtr p = convert(e, scope);
        std::set<Source*> touched = touched_;

        if (try_join(p, touched)) return;

        std::vector<const Pred*> cols;
        collect_columns(*p, cols);
        if (cols.empty()) {
            warnings_.push_back("constraint without column references ignored: " +
                                render_predicate(*p));
            return;
        }
        bool unbound = std::any_of(cols.begin(), cols.end(),
                                   [](const Pred* c) { return c->table.empty(); });
        std::set<std::string> tables;
        for (const Pred* c : cols)
            if (!c->table.empty()) tables.insert(c->table);
        if (unbound || tables.size() != 1 || touched.size() != 1) {
            unassigned_.push_back(p);
            if (!unbound && tables.size() > 1) {
                std::vector<std::string> names(tables.begin(), tables.end());
                warnings_.push_back("constraint spans tables " + join(names, ", ") +
                                    " without being an equijoin: " + render_predicate(*p));
            }
            return;
        }
        Source* src = *touched.begin();
        src->constraints.push_back(p);
        note_value_coverage(p, src->target_index);
    }

    /// Recognizes equality between two column chains of different sources,
    /// optionally wrapped in CAST/SAFE_CAST.
    bool try_join(const PredPtr& p, const std::set<Source*>& touched) {
        if (p->kind != Pred::Kind::Compare || p->op != "=") return false;
        auto strip = [](const PredPtr& side, std::string* cast) -> const Pred* {
            const Pred* s = side.get();
            while (s->kind == Pred::Kind::Func &&
                   (s->func == "CAST" || s->func == "SAFE_CAST") && s->list.size() == 1) {
                *cast = s->cast_type;
                s = s->list[0].get();
            }
            return s->kind == Pred::Kind::Column && !s->table.empty() ? s : nullptr;
        };
        std::string lcast, rcast;
        const Pred* l = strip(p->a, &lcast);
        const Pred* r = strip(p->b, &rcast);
        if (!l || !r) return false;
        if (touched.size() != 2) return false;  // same source: ordinary constraint
        auto it = touched.begin();
        Source* s1 = *it++;
        Source* s2 = *it;
        PendingJoin pj;
        // Assign sides by which source each column belongs to.
        Source* ls = l->table == targets_[s1->target_index].table ? s1 : s2;
        Source* rs = ls == s1 ? s2 : s1;
        if (l->table != targets_[ls->target_index].table ||
            r->table != targets_[rs->target_index].table)
            return false;
        pj.left_target = ls->target_index;
        pj.right_target = rs->target_index;
        pj.pair.left = JoinSide{l->table, l->column, lcast};
        pj.pair.right = JoinSide{r->table, r->column, rcast};
        joins_.push_back(std::move(pj));
        return true;
    }

    /// InList and OR-of-equalities conjuncts double as value coverage.
    void note_value_coverage(const PredPtr& p, int target_index) {
        if (p->kind == Pred::Kind::InList && !p->negated &&
            p->a->kind == Pred::Kind::Column) {
            bool all_lit = std::all_of(p->list.begin(), p->list.end(), [](const PredPtr& e) {
                return e->kind == Pred::Kind::Literal;
            });
            if (all_lit) {
                value_lists_.push_back(p);
                value_list_targets_.push_back(target_index);
            }
            return;
        }
        if (p->kind == Pred::Kind::Between && !p->negated &&
            p->a->kind == Pred::Kind::Column && p->b->kind == Pred::Kind::Literal &&
            p->c->kind == Pred::Kind::Literal) {
            range_spreads_.push_back(p);
            range_spread_targets_.push_back(target_index);
            return;
        }
        if (p->kind == Pred::Kind::Or) {
            ColumnPath col;
            std::vector<Value> values;
            for (const auto& d : disjuncts_of(p)) {
                const Pred *c = nullptr, *lit = nullptr;
                if (d->kind != Pred::Kind::Compare || d->op != "=") return;
                if (d->a->kind == Pred::Kind::Column && d->b->kind == Pred::Kind::Literal) {
                    c = d->a.get();
                    lit = d->b.get();
                } else if (d->b->kind == Pred::Kind::Column &&
                           d->a->kind == Pred::Kind::Literal) {
                    c = d->b.get();
                    lit = d->a.get();
                } else {
                    return;
                }
                if (values.empty())
                    col = c->column;
                else if (!(col == c->column))
                    return;
                values.push_back(lit->value);
            }
            if (values.size() >= 2) {
                auto lp = new_pred(Pred::Kind::InList);
                lp->a = make_column(targets_[target_index].table, col);
                for (auto& v : values) lp->list.push_back(make_literal(v));
                value_lists_.push_back(lp);
                value_list_targets_.push_back(target_index);
            }
        }
    }

    // --- coverage visitors ---------------------------------------------------

    void visit_coverage(const sql::Expr& e, Scope* scope) {
        if (e.kind == sql::Expr::Kind::Case) extract_case(e, scope);
        for (const auto& c : {e.a, e.b, e.c})
            if (c) visit_coverage(*c, scope);
        for (const auto& c : e.list)
            if (c) visit_coverage(*c, scope);
        for (const auto& w : e.whens) {
            if (w.when) visit_coverage(*w.when, scope);
            if (w.then) visit_coverage(*w.then, scope);
        }
    }

    void extract_case(const sql::Expr& e, Scope* scope) {
        // Arms keyed by column, in first-appearance order.
        std::vector<CaseCandidate> local;
        auto add_arm = [&](Source* base, const ColumnPath& col, int target, const Value& v) {
            for (auto& cand : local) {
                if (cand.target_index == target && cand.column == col) {
                    cand.values.push_back(v);
                    return;
                }
            }
            (void)base;
            local.push_back(CaseCandidate{target, col, {v}});
        };
        if (e.a) {
            // CASE <operand> WHEN <literal> ... form.
            touched_.clear();
            PredPtr operand = convert(*e.a, scope);
            if (operand->kind == Pred::Kind::Column && touched_.size() == 1) {
                int target = (*touched_.begin())->target_index;
                for (const auto& w : e.whens) {
                    if (!w.when) continue;
                    PredPtr v = convert(*w.when, scope);
                    if (v->kind == Pred::Kind::Literal)
                        add_arm(*touched_.begin(), operand->column, target, v->value);
                    else
                        warnings_.push_back("CASE arm is not a literal; branch skipped");
                }
            }
        } else {
            for (const auto& w : e.whens) {
                if (!w.when) continue;
                touched_.clear();
                PredPtr cond = convert(*w.when, scope);
                if (cond->kind != Pred::Kind::Compare || cond->op != "=" ||
                    touched_.size() != 1) {
                    warnings_.push_back("CASE arm is not a simple column equality; branch "
                                        "coverage skipped for: " +
                                        render_predicate(*cond));
                    continue;
                }
                const Pred *c = nullptr, *lit = nullptr;
                if (cond->a->kind == Pred::Kind::Column &&
                    cond->b->kind == Pred::Kind::Literal) {
                    c = cond->a.get();
                    lit = cond->b.get();
                } else if (cond->b->kind == Pred::Kind::Column &&
                           cond->a->kind == Pred::Kind::Literal) {
                    c = cond->b.get();
                    lit = cond->a.get();
                } else {
                    warnings_.push_back("CASE arm is not a simple column equality; branch "
                                        "coverage skipped for: " +
                                        render_predicate(*cond));
                    continue;
                }
                add_arm(*touched_.begin(), c->column, (*touched_.begin())->target_index,
                        lit->value);
            }
        }
        for (auto& cand : local) cases_.push_back(std::move(cand));
    }

    bool try_partition(const sql::Expr& e, Scope* scope) {
        if (e.kind != sql::Expr::Kind::FuncCall || e.name != "DATE_TRUNC" || e.list.size() != 2)
            return false;
        const sql::Expr& part_arg = *e.list[1];
        std::string part;
        if (part_arg.kind == sql::Expr::Kind::ColumnRef && part_arg.parts.size() == 1 &&
            is_datepart(part_arg.parts[0]))
            part = to_lower(part_arg.parts[0]);
        else if (part_arg.kind == sql::Expr::Kind::Literal && part_arg.value.is_string() &&
                 is_datepart(part_arg.value.as_string()))
            part = to_lower(part_arg.value.as_string());
        else
            return false;
        touched_.clear();
        PredPtr col = convert(*e.list[0], scope);
        if (col->kind != Pred::Kind::Column || touched_.size() != 1) return false;
        partitions_.push_back(
            PartitionCandidate{(*touched_.begin())->target_index, col->column, part});
        return true;
    }

    // --- finalize -------------------------------------------------------------

    void finalize(QueryAnalysis& qa) {
        for (auto& acc : targets_) {
            TableTarget t;
            t.table = acc.table;
            t.schema = acc.schema;
            t.aliases = acc.aliases;
            t.referenced.assign(acc.referenced.begin(), acc.referenced.end());

            // Merge constraint branches across occurrences.
            std::vector<std::vector<PredPtr>> branches;
            std::set<std::string> seen;
            for (Source* src : acc.occurrences) {
                if (src->constraints.empty()) continue;
                std::string key = render_conjunction(src->constraints);
                if (seen.insert(key).second) branches.push_back(src->constraints);
            }
            if (branches.size() == 1) {
                t.constraints = branches[0];
            } else if (branches.size() > 1) {
                PredPtr merged;
                for (auto& branch : branches) {
                    PredPtr chain = branch[0];
                    for (size_t i = 1; i < branch.size(); ++i)
                        chain = make_and(chain, branch[i]);
                    merged = merged ? make_or(merged, chain) : chain;
                }
                t.constraints.push_back(merged);
                t.merged_disjunctively = true;
                warnings_.push_back("table '" + acc.table +
                                    "' is constrained differently across references; branches "
                                    "merged disjunctively");
            }
            qa.targets.push_back(std::move(t));
        }

        finalize_joins(qa);
        finalize_coverage(qa);
        qa.unassigned = unassigned_;
        for (auto& w : warnings_) qa.warnings.push_back(std::move(w));
        warnings_.clear();
    }

    void finalize_joins(QueryAnalysis& qa) {
        for (const auto& pj : joins_) {
            int a = pj.left_target, b = pj.right_target;
            JoinPair pair = pj.pair;
            if (a > b) {
                std::swap(a, b);
                std::swap(pair.left, pair.right);
            }
            JoinConstraint* jc = nullptr;
            for (auto& existing : qa.joins) {
                if (existing.left_table == targets_[a].table &&
                    existing.right_table == targets_[b].table) {
                    jc = &existing;
                    break;
                }
            }
            if (!jc) {
                qa.joins.push_back(JoinConstraint{targets_[a].table, targets_[b].table, {}});
                jc = &qa.joins.back();
            }
            bool dup = std::any_of(jc->pairs.begin(), jc->pairs.end(), [&](const JoinPair& p) {
                return p.left.column == pair.left.column && p.right.column == pair.right.column;
            });
            if (!dup) jc->pairs.push_back(pair);
        }
    }

    std::optional<std::pair<Value, Value>> find_range(const TableTarget& t,
                                                      const ColumnPath& col) {
        std::optional<Value> lo, hi;
        for (const auto& c : t.constraints) {
            if (c->kind == Pred::Kind::Between && !c->negated &&
                c->a->kind == Pred::Kind::Column && c->a->column == col &&
                c->b->kind == Pred::Kind::Literal && c->c->kind == Pred::Kind::Literal)
                return std::make_pair(c->b->value, c->c->value);
            if (c->kind != Pred::Kind::Compare) continue;
            const Pred *colp = nullptr, *lit = nullptr;
            std::string op = c->op;
            if (c->a->kind == Pred::Kind::Column && c->b->kind == Pred::Kind::Literal) {
                colp = c->a.get();
                lit = c->b.get();
            } else if (c->b->kind == Pred::Kind::Column && c->a->kind == Pred::Kind::Literal) {
                colp = c->b.get();
                lit = c->a.get();
                if (op == "<") op = ">";
                else if (op == "<=") op = ">=";
                else if (op == ">") op = "<";
                else if (op == ">=") op = "<=";
            } else {
                continue;
            }
            if (!(colp->column == col)) continue;
            if (op == ">=" || op == ">") lo = lit->value;
            if (op == "<=" || op == "<") hi = lit->value;
        }
        if (lo && hi) return std::make_pair(*lo, *hi);
        return std::nullopt;
    }

    void finalize_coverage(QueryAnalysis& qa) {
        auto find_cov = [&](const std::string& table, const ColumnPath& col,
                            CoverageTarget::Kind kind) -> CoverageTarget* {
            for (auto& c : qa.coverage)
                if (c.table == table && c.column == col && c.kind == kind) return &c;
            return nullptr;
        };

        // CASE branch sets, with an ELSE probe value.
        for (const auto& cand : cases_) {
            const TargetAcc& acc = targets_[cand.target_index];
            CoverageTarget* cov =
                find_cov(acc.table, cand.column, CoverageTarget::Kind::ValueSet);
            if (!cov) {
                qa.coverage.push_back(CoverageTarget{});
                cov = &qa.coverage.back();
                cov->kind = CoverageTarget::Kind::ValueSet;
                cov->table = acc.table;
                cov->column = cand.column;
            }
            // Union, preserving first-appearance order; sentinel re-derived below.
            if (cov->has_sentinel && !cov->values.empty()) {
                cov->values.pop_back();
                cov->has_sentinel = false;
            }
            for (const auto& v : cand.values) {
                bool present = std::any_of(cov->values.begin(), cov->values.end(),
                                           [&](const Value& x) {
                                               return x.to_display() == v.to_display();
                                           });
                if (!present) cov->values.push_back(v);
            }
            add_sentinel(*cov, *acc.schema);
        }

        // InList / OR-of-equalities value sets (no sentinel).
        for (size_t i = 0; i < value_lists_.size(); ++i) {
            const PredPtr& p = value_lists_[i];
            const TargetAcc& acc = targets_[value_list_targets_[i]];
            CoverageTarget* cov =
                find_cov(acc.table, p->a->column, CoverageTarget::Kind::ValueSet);
            if (!cov) {
                qa.coverage.push_back(CoverageTarget{});
                cov = &qa.coverage.back();
                cov->kind = CoverageTarget::Kind::ValueSet;
                cov->table = acc.table;
                cov->column = p->a->column;
            }
            std::vector<Value> values;
            for (const auto& e : p->list) values.push_back(e->value);
            size_t insert_at = cov->has_sentinel ? cov->values.size() - 1 : cov->values.size();
            for (const auto& v : values) {
                bool present = std::any_of(cov->values.begin(), cov->values.end(),
                                           [&](const Value& x) {
                                               return x.to_display() == v.to_display();
                                           });
                if (!present) cov->values.insert(cov->values.begin() + insert_at++, v);
            }
        }

        // Partitions need a date range from the table constraints.
        for (const auto& cand : partitions_) {
            const std::string& table = targets_[cand.target_index].table;
            const TableTarget* t = qa.target(table);
            auto range = t ? find_range(*t, cand.column) : std::nullopt;
            if (!range) {
                qa.warnings.push_back("date_trunc partition on '" + cand.column.dotted() +
                                      "' has no date range constraint; partition coverage "
                                      "skipped");
                continue;
            }
            if (find_cov(table, cand.column, CoverageTarget::Kind::Partition)) continue;
            CoverageTarget cov;
            cov.kind = CoverageTarget::Kind::Partition;
            cov.table = table;
            cov.column = cand.column;
            cov.part = cand.part;
            cov.lo = range->first;
            cov.hi = range->second;
            qa.coverage.push_back(std::move(cov));
        }

        // BETWEEN ranges spread endpoints + interior, unless a partition
        // already enumerates the same column.
        for (size_t i = 0; i < range_spreads_.size(); ++i) {
            const PredPtr& p = range_spreads_[i];
            const std::string& table = targets_[range_spread_targets_[i]].table;
            if (find_cov(table, p->a->column, CoverageTarget::Kind::Partition)) continue;
            if (find_cov(table, p->a->column, CoverageTarget::Kind::RangeSpread)) continue;
            CoverageTarget cov;
            cov.kind = CoverageTarget::Kind::RangeSpread;
            cov.table = table;
            cov.column = p->a->column;
            cov.lo = p->b->value;
            cov.hi = p->c->value;
            qa.coverage.push_back(std::move(cov));
        }
    }

    void add_sentinel(CoverageTarget& cov, const SchemaDef& schema) {
        const FieldDef* leaf = nullptr;
        try {
            leaf = &resolve_path(set_, schema, cov.column);
        } catch (const Error&) {
            return;
        }
        if (leaf->is_enum()) {
            std::set<std::string> used;
            for (const auto& v : cov.values)
                used.insert(v.is_enum() ? v.as_enum().name
                                        : (v.is_string() ? v.as_string() : v.to_display()));
            std::vector<std::string> members = leaf->enum_kind().values;
            std::sort(members.begin(), members.end());
            for (const auto& m : members) {
                if (!used.count(m)) {
                    cov.values.push_back(Value(EnumVal{m}));
                    cov.has_sentinel = true;
                    return;
                }
            }
            warnings_.push_back("all enum members of '" + cov.column.dotted() +
                                "' appear in CASE arms; no ELSE probe value available");
            return;
        }
        if (leaf->is_scalar() && leaf->scalar() == Scalar::String) {
            std::string probe = "OTHER";
            auto in_use = [&](const std::string& s) {
                return std::any_of(cov.values.begin(), cov.values.end(), [&](const Value& v) {
                    return v.is_string() && v.as_string() == s;
                });
            };
            int n = 1;
            while (in_use(probe)) probe = "OTHER_" + std::to_string(++n);
            cov.values.push_back(Value(probe));
            cov.has_sentinel = true;
            return;
        }
        warnings_.push_back("CASE over non-string column '" + cov.column.dotted() +
                            "'; no ELSE probe value added");
    }
};

}  // namespace

std::vector<TableTarget> extract_targets(const sql::Statement& stmt, const SchemaSet& schemas,
                                         Warnings* warnings) {
    Extractor ex(schemas);
    QueryAnalysis qa = ex.run(stmt);
    if (warnings)
        warnings->insert(warnings->end(), qa.warnings.begin(), qa.warnings.end());
    return std::move(qa.targets);
}

std::vector<JoinConstraint> extract_joins(const sql::Statement& stmt, const SchemaSet& schemas,
                                          Warnings* warnings) {
    Extractor ex(schemas);
    QueryAnalysis qa = ex.run(stmt);
    if (warnings)
        warnings->insert(warnings->end(), qa.warnings.begin(), qa.warnings.end());
    return std::move(qa.joins);
}

std::vector<CoverageTarget> extract_coverage_targets(const sql::Statement& stmt,
                                                     const SchemaSet& schemas,
                                                     Warnings* warnings) {
    Extractor ex(schemas);
    QueryAnalysis qa = ex.run(stmt);
    if (warnings)
        warnings->insert(warnings->end(), qa.warnings.begin(), qa.warnings.end());
    return std::move(qa.coverage);
}

namespace {

/// Conjuncts whose only column is `col` (used when a user signal overrides
/// the extracted constraints for that column).
bool touches_only(const Pred& p, const ColumnPath& col) {
    std::vector<const Pred*> cols;
    collect_columns(p, cols);
    if (cols.empty()) return false;
    return std::all_of(cols.begin(), cols.end(),
                       [&](const Pred* c) { return c->column == col; });
}

PredPtr signal_constraint(const std::string& table, const ColumnPath& col,
                          const ValueSpec& spec) {
    PredPtr colp = make_column(table, col);
    switch (spec.kind) {
        case ValueSpec::Kind::Literal:
            return make_compare("=", colp, make_literal(spec.literal));
        case ValueSpec::Kind::OneOf: {
            auto p = std::make_shared<Pred>();
            p->kind = Pred::Kind::InList;
            p->a = colp;
            for (const auto& v : spec.one_of) p->list.push_back(make_literal(v));
            return p;
        }
        case ValueSpec::Kind::Range:
            return make_and(
                make_compare(spec.lo_inclusive ? ">=" : ">", colp, make_literal(spec.lo)),
                make_compare(spec.hi_inclusive ? "<=" : "<", colp, make_literal(spec.hi)));
        case ValueSpec::Kind::UniformFloat:
            return make_and(make_compare(">=", colp, make_literal(Value(spec.uniform.lo))),
                            make_compare("<", colp, make_literal(Value(spec.uniform.hi))));
        case ValueSpec::Kind::Incremental:
        case ValueSpec::Kind::SeededChoice:
            return nullptr;  // generator-only signals constrain nothing
    }
    return nullptr;
}

}  // namespace

QueryAnalysis analyze(const sql::Statement& stmt, const SchemaSet& schemas,
                      const ContextMap* context) {
    Extractor ex(schemas);
    QueryAnalysis qa = ex.run(stmt);
    if (!context) return qa;

    for (const auto& [key, spec] : context->signals) {
        ColumnPath path = ColumnPath::parse(key);
        bool resolved_any = false;
        for (auto& target : qa.targets) {
            if (!target.schema) continue;
            // Accept "table.column" qualification as well as a bare path.
            ColumnPath local = path;
            if (!path.segments.empty() && iequals(path.segments[0].name, target.table) &&
                path.segments.size() > 1)
                local.segments.erase(local.segments.begin());
            try {
                resolve_path(schemas, *target.schema, local);
            } catch (const Error&) {
                continue;
            }
            resolved_any = true;
            auto removed = std::remove_if(
                target.constraints.begin(), target.constraints.end(),
                [&](const PredPtr& c) { return touches_only(*c, local); });
            bool dropped = removed != target.constraints.end();
            target.constraints.erase(removed, target.constraints.end());
            if (dropped)
                qa.warnings.push_back("user signal on '" + local.dotted() +
                                      "' overrides extracted constraints");
            if (PredPtr c = signal_constraint(target.table, local, spec))
                target.constraints.push_back(std::move(c));
            if (std::find(target.referenced.begin(), target.referenced.end(), local) ==
                target.referenced.end()) {
                target.referenced.push_back(local);
                std::sort(target.referenced.begin(), target.referenced.end());
            }

            // Coverage for the overridden column follows the signal.
            auto cov_removed = std::remove_if(qa.coverage.begin(), qa.coverage.end(),
                                              [&](const CoverageTarget& c) {
                                                  return c.table == target.table &&
                                                         c.column == local;
                                              });
            if (cov_removed != qa.coverage.end()) {
                qa.coverage.erase(cov_removed, qa.coverage.end());
                qa.warnings.push_back("user signal on '" + local.dotted() +
                                      "' replaces extracted coverage");
            }
            if (spec.kind == ValueSpec::Kind::OneOf) {
                CoverageTarget cov;
                cov.kind = CoverageTarget::Kind::ValueSet;
                cov.table = target.table;
                cov.column = local;
                cov.values = spec.one_of;
                qa.coverage.push_back(std::move(cov));
            }
        }
        if (!resolved_any)
            throw ConfigError("signal column '" + key +
                              "' does not resolve in any target schema");
    }
    return qa;
}

nlohmann::ordered_json analysis_to_json(const QueryAnalysis& qa) {
    ordered_json j;
    auto targets = ordered_json::array();
    for (const auto& t : qa.targets) {
        ordered_json tj;
        tj["tables"] = ordered_json::array({t.table});
        if (t.constraints.empty())
            tj["constraints"] = ordered_json::array();
        else
            tj["constraints"] = render_conjunction(t.constraints);
        targets.push_back(std::move(tj));
    }
    j["targets"] = std::move(targets);

    auto joins = ordered_json::array();
    for (const auto& jc : qa.joins) {
        for (const auto& pair : jc.pairs) {
            ordered_json pj;
            if (jc.left_table == jc.right_table) {
                pj["table"] = jc.left_table;
                pj["left_column"] = pair.left.column.dotted();
                pj["right_column"] = pair.right.column.dotted();
            } else {
                pj[jc.left_table] = pair.left.column.dotted();
                pj[jc.right_table] = pair.right.column.dotted();
            }
            joins.push_back(std::move(pj));
        }
    }
    j["join_constraints"] = std::move(joins);

    if (!qa.coverage.empty()) {
        auto cov = ordered_json::array();
        for (const auto& c : qa.coverage) {
            ordered_json cj;
            cj["table"] = c.table;
            cj["column"] = c.column.dotted();
            switch (c.kind) {
                case CoverageTarget::Kind::ValueSet: {
                    cj["kind"] = "value_set";
                    auto vals = ordered_json::array();
                    for (const auto& v : c.values) vals.push_back(value_to_json(v));
                    cj["values"] = std::move(vals);
                    if (c.has_sentinel) cj["else_probe"] = true;
                    break;
                }
                case CoverageTarget::Kind::Partition:
                    cj["kind"] = "partition";
                    cj["part"] = c.part;
                    cj["lo"] = value_to_json(c.lo);
                    cj["hi"] = value_to_json(c.hi);
                    break;
                case CoverageTarget::Kind::RangeSpread:
                    cj["kind"] = "range_spread";
                    cj["lo"] = value_to_json(c.lo);
                    cj["hi"] = value_to_json(c.hi);
                    break;
            }
            cov.push_back(std::move(cj));
        }
        j["coverage"] = std::move(cov);
    }
    if (!qa.unassigned.empty()) {
        auto arr = ordered_json::array();
        for (const auto& p : qa.unassigned) arr.push_back(render_predicate(*p));
        j["unassigned"] = std::move(arr);
    }
    if (!qa.warnings.empty()) j["warnings"] = qa.warnings;
    return j;
}

}  // namespace sdgen::analysis
