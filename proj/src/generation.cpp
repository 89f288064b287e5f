#include "sdgen/generation.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "sdgen/prompts.hpp"

namespace sdgen {

namespace {

using analysis::CoverageTarget;
using analysis::Pred;
using analysis::PredPtr;
using analysis::TableTarget;

std::string quoted_value(const Value& v) {
    if (v.is_string() || v.is_enum() || v.is_bytes())
        return "'" + replace_all(v.to_display(), "'", "''") + "'";
    if (v.is_date()) return "'" + format_date(v.as_date()) + "'";
    return v.to_display();
}

std::string quoted_list(const std::vector<Value>& vs) {
    std::vector<std::string> parts;
    parts.reserve(vs.size());
    for (const auto& v : vs) parts.push_back(quoted_value(v));
    return join(parts, ", ");
}

/// Does the conjunct mention any column of this table inside the scope set?
bool touches_scope(const Pred& p, const std::string& table,
                   const std::set<ColumnPath>& scope) {
    std::vector<const Pred*> cols;
    analysis::collect_columns(p, cols);
    for (const Pred* c : cols)
        if (c->table == table && scope.count(c->column)) return true;
    return false;
}

const Pred* literal_of(const PredPtr& p) {
    return p && p->kind == Pred::Kind::Literal ? p.get() : nullptr;
}

const Pred* column_of(const PredPtr& p) {
    return p && p->kind == Pred::Kind::Column ? p.get() : nullptr;
}

struct DirectiveIndex {
    std::map<ColumnPath, ColumnDirective*> by_path;

    ColumnDirective* find(const std::string& table, const Pred& col_node,
                          const std::string& target_table) {
        if (table != target_table) return nullptr;
        auto it = by_path.find(col_node.column);
        return it == by_path.end() ? nullptr : it->second;
    }
};

void set_bound(ColumnDirective& d, const std::string& op, Value lit) {
    if (op == ">=") {
        d.lo = std::move(lit);
        d.lo_inclusive = true;
    } else if (op == ">") {
        d.lo = std::move(lit);
        d.lo_inclusive = false;
    } else if (op == "<=") {
        d.hi = std::move(lit);
        d.hi_inclusive = true;
    } else if (op == "<") {
        d.hi = std::move(lit);
        d.hi_inclusive = false;
    }
}

/// Applies one conjunct to the directive set. Returns false when the
/// conjunct names a directive slot that is already pinned differently
/// (used to pick a satisfiable OR branch).
bool apply_conjunct(const Pred& p, const std::string& table, DirectiveIndex& idx);

bool apply_compare(const Pred& p, const std::string& table, DirectiveIndex& idx) {
    const Pred* col = column_of(p.a);
    const Pred* lit = literal_of(p.b);
    if (!col || !lit) {
        col = column_of(p.b);
        lit = literal_of(p.a);
    }
    if (!col || !lit) return true;
    ColumnDirective* d = idx.find(col->table, *col, table);
    if (!d) return true;
    std::string op = p.op;
    if (column_of(p.b) == col) {
        // Literal on the left: flip the comparison around.
        if (op == ">") op = "<";
        else if (op == "<") op = ">";
        else if (op == ">=") op = "<=";
        else if (op == "<=") op = ">=";
    }
    if (op == "=") {
        if (d->pin && !(*d->pin == lit->value)) return false;
        d->pin = lit->value;
    } else if (op == "!=") {
        d->avoid.push_back(lit->value);
    } else {
        set_bound(*d, op, lit->value);
    }
    return true;
}

bool apply_conjunct(const Pred& p, const std::string& table, DirectiveIndex& idx) {
    if (p.derived || !p.evaluable) return true;  // postprocess territory
    switch (p.kind) {
        case Pred::Kind::Compare:
            return apply_compare(p, table, idx);
        case Pred::Kind::Between: {
            const Pred* col = column_of(p.a);
            const Pred* lo = literal_of(p.b);
            const Pred* hi = literal_of(p.c);
            if (!col || !lo || !hi || p.negated) return true;
            if (ColumnDirective* d = idx.find(col->table, *col, table)) {
                d->lo = lo->value;
                d->hi = hi->value;
                d->lo_inclusive = d->hi_inclusive = true;
            }
            return true;
        }
        case Pred::Kind::InList: {
            const Pred* col = column_of(p.a);
            if (!col) return true;
            ColumnDirective* d = idx.find(col->table, *col, table);
            if (!d) return true;
            std::vector<Value> vals;
            for (const auto& item : p.list) {
                const Pred* lit = literal_of(item);
                if (!lit) return true;
                vals.push_back(lit->value);
            }
            if (p.negated) {
                for (auto& v : vals) d->avoid.push_back(std::move(v));
            } else if (d->cycle.empty()) {
                d->cycle = std::move(vals);
            }
            return true;
        }
        case Pred::Kind::IsNull: {
            const Pred* col = column_of(p.a);
            if (!col || p.negated) return true;
            if (ColumnDirective* d = idx.find(col->table, *col, table)) d->pin = Value(Null{});
            return true;
        }
        case Pred::Kind::Like: {
            const Pred* col = column_of(p.a);
            const Pred* lit = literal_of(p.b);
            if (!col || !lit || p.negated || !lit->value.is_string()) return true;
            if (ColumnDirective* d = idx.find(col->table, *col, table))
                d->like = lit->value.as_string();
            return true;
        }
        case Pred::Kind::And: {
            bool ok = apply_conjunct(*p.a, table, idx);
            return apply_conjunct(*p.b, table, idx) && ok;
        }
        case Pred::Kind::Or: {
            // Satisfy the disjunction by committing to the first branch that
            // does not contradict an existing pin; rows then satisfy it as a
            // conjunct. Nested Or chains recurse left to right.
            std::vector<PredPtr> branches;
            if (p.a) branches.push_back(p.a);
            if (p.b) branches.push_back(p.b);
            for (const auto& branch : branches)
                if (apply_conjunct(*branch, table, idx)) return true;
            return false;
        }
        default:
            return true;
    }
}

bool path_matches_scope(const ColumnPath& candidate, const std::string& table,
                        const ColumnPath& scope_col) {
    if (candidate == scope_col) return true;
    const auto names = candidate.names();
    const auto scope_names = scope_col.names();
    if (names.size() != scope_names.size() + 1 || names[0] != table) return false;
    return std::equal(names.begin() + 1, names.end(), scope_names.begin());
}

const ValueSpec* signal_for(const ContextMap& context, const std::string& table,
                            const ColumnPath& col) {
    for (const auto& [key, spec] : context.signals) {
        ColumnPath parsed;
        try {
            parsed = ColumnPath::parse(key);
        } catch (const ParseError&) {
            continue;
        }
        if (path_matches_scope(parsed, table, col)) return &spec;
    }
    return nullptr;
}

bool is_unique_column(const ContextMap& context, const std::string& table, const ColumnPath& col) {
    for (const auto& u : context.unique_columns)
        if (path_matches_scope(u, table, col)) return true;
    return false;
}

std::vector<Value> partition_cycle(const CoverageTarget& ct, const FieldDef& field) {
    std::vector<Value> out;
    auto lo_text = ct.lo.is_date() ? format_date(ct.lo.as_date()) : ct.lo.to_display();
    auto hi_text = ct.hi.is_date() ? format_date(ct.hi.as_date()) : ct.hi.to_display();
    auto lo = parse_date(lo_text);
    auto hi = parse_date(hi_text);
    if (!lo || !hi || *hi < *lo) return out;
    auto bucket = truncate_date(*lo, ct.part);
    if (!bucket) return out;
    const bool as_string = field.is_scalar() && field.scalar() == Scalar::String;
    int guard = 0;
    while (*bucket <= *hi && ++guard < 10000) {
        CivilDate v = std::max(*bucket, *lo);
        out.push_back(as_string ? Value(format_date(v)) : Value(v));
        CivilDate next = add_days(*bucket, 1);
        if (ct.part == "day") {
            bucket = next;
            continue;
        }
        // Step past the current bucket by advancing until truncation moves.
        auto moved = truncate_date(next, ct.part);
        while (moved && *moved == *bucket) {
            next = add_days(next, ct.part == "week" ? 7 : 27);
            moved = truncate_date(next, ct.part);
        }
        if (!moved) break;
        bucket = moved;
    }
    return out;
}

void apply_chain_ranks(std::vector<ColumnDirective>& directives, const std::string& note) {
    const std::vector<ColumnPath> chain = parse_date_chain(note);
    if (chain.empty()) return;
    for (size_t rank = 0; rank < chain.size(); ++rank)
        for (auto& d : directives)
            if (d.column == chain[rank]) {
                d.order_rank = static_cast<int>(rank);
                d.order_size = static_cast<int>(chain.size());
            }
}

std::string synthesize_note(const SchemaSet& schemas, const SchemaDef& root,
                            const CorrelationHint& hint) {
    if (!hint.note.empty()) return hint.note;
    bool all_dates = !hint.columns.empty();
    for (const auto& col : hint.columns) {
        try {
            const FieldDef& f = resolve_path(schemas, root, col);
            if (!(f.is_scalar() &&
                  (f.scalar() == Scalar::Date || f.scalar() == Scalar::Timestamp))) {
                all_dates = false;
                break;
            }
        } catch (const Error&) {
            all_dates = false;
            break;
        }
    }
    if (all_dates) {
        std::vector<std::string> parts;
        for (const auto& c : hint.columns) parts.push_back(c.dotted());
        return "dates must be mutually consistent: " + join(parts, " <= ");
    }
    return "values in this group should be mutually consistent";
}

struct ScopeTexts {
    std::string constraints;
    std::string signals;
};

ScopeTexts render_scope_texts(const analysis::QueryAnalysis& qa, const ContextMap& context,
                              const TableTarget& target, const std::vector<ColumnPath>& columns,
                              const std::string& note) {
    std::set<ColumnPath> scope(columns.begin(), columns.end());
    std::vector<std::string> lines;
    for (const auto& c : target.constraints)
        if (touches_scope(*c, target.table, scope))
            lines.push_back("- " + analysis::render_predicate(*c));
    for (const auto& ct : qa.coverage) {
        if (ct.table != target.table || !scope.count(ct.column)) continue;
        switch (ct.kind) {
            case CoverageTarget::Kind::ValueSet:
                lines.push_back("- " + ct.column.dotted() +
                                " should take each of these values across the generated rows: " +
                                quoted_list(ct.values));
                break;
            case CoverageTarget::Kind::Partition:
                lines.push_back("- " + ct.column.dotted() +
                                " should include at least one value in every " + ct.part +
                                " from " + quoted_value(ct.lo) + " to " + quoted_value(ct.hi));
                break;
            case CoverageTarget::Kind::RangeSpread:
                lines.push_back("- " + ct.column.dotted() +
                                " values should spread across the range " + quoted_value(ct.lo) +
                                " to " + quoted_value(ct.hi) + ", including both endpoints");
                break;
        }
    }
    for (const auto& col : columns)
        if (is_unique_column(context, target.table, col))
            lines.push_back("- " + col.dotted() + " values must be unique across rows");

    std::vector<std::string> signal_lines;
    for (const auto& col : columns)
        if (const ValueSpec* spec = signal_for(context, target.table, col))
            signal_lines.push_back("- " + col.dotted() + ": " + spec->describe());
    if (!note.empty()) signal_lines.push_back("- " + note);

    return {join(lines, "\n"), join(signal_lines, "\n")};
}

std::vector<ColumnDirective> build_directives(const analysis::QueryAnalysis& qa,
                                              const ContextMap& context,
                                              const TableTarget& target, const SchemaSet& schemas,
                                              const std::vector<ColumnInfo>& columns) {
    std::vector<ColumnDirective> out;
    out.reserve(columns.size());
    DirectiveIndex idx;
    for (const auto& c : columns) {
        ColumnDirective d;
        d.column = c.path;
        d.field = c.leaf;
        d.unique = is_unique_column(context, target.table, c.path);
        out.push_back(std::move(d));
    }
    for (auto& d : out) idx.by_path[d.column] = &d;

    for (const auto& conj : target.constraints) apply_conjunct(*conj, target.table, idx);

    for (const auto& ct : qa.coverage) {
        if (ct.table != target.table) continue;
        auto it = idx.by_path.find(ct.column);
        if (it == idx.by_path.end()) continue;
        ColumnDirective& d = *it->second;
        switch (ct.kind) {
            case CoverageTarget::Kind::ValueSet:
                d.cycle = ct.values;
                break;
            case CoverageTarget::Kind::RangeSpread:
                if (!d.lo) d.lo = ct.lo;
                if (!d.hi) d.hi = ct.hi;
                break;
            case CoverageTarget::Kind::Partition: {
                auto cycle = partition_cycle(ct, *d.field);
                if (!cycle.empty()) d.cycle = std::move(cycle);
                break;
            }
        }
    }

    for (auto& d : out) {
        const ValueSpec* spec = signal_for(context, target.table, d.column);
        if (!spec) continue;
        using K = ValueSpec::Kind;
        switch (spec->kind) {
            // The analysis pass usually folds these three into constraints
            // already; applying them here too keeps directly-planned runs
            // (no analyze() context pass) consistent.
            case K::Literal:
                if (!d.pin) d.pin = spec->literal;
                break;
            case K::OneOf:
                if (d.cycle.empty()) d.cycle = spec->one_of;
                break;
            case K::Range:
                if (!d.lo && !spec->lo.is_null()) {
                    d.lo = spec->lo;
                    d.lo_inclusive = spec->lo_inclusive;
                }
                if (!d.hi && !spec->hi.is_null()) {
                    d.hi = spec->hi;
                    d.hi_inclusive = spec->hi_inclusive;
                }
                break;
            default:
                d.spec = *spec;
                break;
        }
    }
    return out;
}

}  // namespace

int plan_row_count(const analysis::QueryAnalysis& qa, const ContextMap& context,
                   const std::string& table) {
    int demand = 0;
    const CoverageTarget* widest = nullptr;
    for (const auto& ct : qa.coverage) {
        if (ct.table != table) continue;
        int d = analysis::coverage_demand(ct);
        if (d > demand) {
            demand = d;
            widest = &ct;
        }
    }
    if (context.row_count > 0) {
        if (widest && context.row_count < demand)
            throw PlanError("row_count " + std::to_string(context.row_count) +
                            " cannot cover coverage target on " + table + "." +
                            widest->column.dotted() + ", which needs at least " +
                            std::to_string(demand) + " rows");
        return context.row_count;
    }
    return std::max(3, demand);
}

std::vector<GenerationRequest> plan_requests(const analysis::QueryAnalysis& qa,
                                             const ContextMap& context, const SchemaSet& schemas,
                                             const std::string& table, uint64_t seed,
                                             DataFormat format, Warnings* warnings) {
    const TableTarget* target = qa.target(table);
    if (!target || !target->schema)
        throw PlanError("no generation target named '" + table + "' in the analysis");
    const SchemaDef& root = *target->schema;
    const int row_count = plan_row_count(qa, context, table);

    // Split the root's fields: top-level scalars group; nested fields travel
    // whole, one request each.
    std::vector<ColumnInfo> top_scalars;
    std::vector<const FieldDef*> nested_fields;
    for (const auto& f : root.fields) {
        if (f.deprecated) continue;
        if (f.is_nested()) {
            if (!f.nested().resolved || !schemas.message(f.nested().message)) {
                if (warnings)
                    warnings->push_back("field '" + root.name + "." + f.name +
                                        "' has unresolved type '" + f.nested().message +
                                        "'; skipped");
                continue;
            }
            nested_fields.push_back(&f);
        } else {
            top_scalars.push_back({ColumnPath::of({f.name}), &f});
        }
    }

    // Sort correlation hints into the scope that can honor them.
    std::vector<CorrelationHint> scalar_hints;
    std::map<std::string, std::vector<const CorrelationHint*>> nested_hints;
    for (const auto& hint : context.correlations) {
        if (hint.columns.empty()) continue;
        bool all_top = true, all_same_nested = true;
        const std::string head = hint.columns.front().segments.front().name;
        for (const auto& col : hint.columns) {
            if (col.size() != 1) all_top = false;
            if (col.size() < 2 || col.names().front() != head) all_same_nested = false;
        }
        if (all_top) {
            scalar_hints.push_back(hint);
        } else if (all_same_nested) {
            nested_hints[head].push_back(&hint);
        } else if (warnings) {
            std::vector<std::string> cols;
            for (const auto& c : hint.columns) cols.push_back(c.dotted());
            warnings->push_back("correlation hint spans generation scopes and is ignored: " +
                                join(cols, ", "));
        }
    }

    const std::vector<ColumnInfo> all_columns = enumerate_columns(schemas, root);

    std::vector<GenerationRequest> plan;
    auto base_request = [&]() {
        GenerationRequest req;
        req.table = table;
        req.row_count = row_count;
        req.user_input = context.user_criteria;
        req.format = format;
        req.schemas = &schemas;
        req.root = &root;
        return req;
    };

    for (auto& group : group_columns(root, top_scalars, scalar_hints, warnings)) {
        GenerationRequest req = base_request();
        req.scope = GenerationRequest::Scope::WholeGroup;
        req.group = group;
        req.columns = group.members;
        std::vector<ColumnInfo> infos;
        for (const auto& m : group.members)
            infos.push_back({m, &resolve_path(schemas, root, m)});
        req.directives = build_directives(qa, context, *target, schemas, infos);
        apply_chain_ranks(req.directives, group.correlation_note);
        auto texts = render_scope_texts(qa, context, *target, req.columns, group.correlation_note);
        req.constraints_text = std::move(texts.constraints);
        req.signals_text = std::move(texts.signals);
        req.proto_description = render_proto_description(schemas, root, req.columns);
        for (const auto& info : infos)
            if (!info.leaf->annotation.empty())
                req.annotations[info.path.dotted()] = info.leaf->annotation;
        plan.push_back(std::move(req));
    }

    for (const FieldDef* nf : nested_fields) {
        GenerationRequest req = base_request();
        req.scope = GenerationRequest::Scope::NestedField;
        req.nested_field = ColumnPath::of({nf->name});
        std::vector<ColumnInfo> infos;
        for (const auto& c : all_columns)
            if (c.path.names().front() == nf->name) infos.push_back(c);
        for (const auto& info : infos) req.columns.push_back(info.path);
        req.directives = build_directives(qa, context, *target, schemas, infos);
        std::vector<std::string> notes;
        for (const CorrelationHint* hint : nested_hints[nf->name]) {
            notes.push_back(synthesize_note(schemas, root, *hint));
            apply_chain_ranks(req.directives, notes.back());
        }
        auto texts =
            render_scope_texts(qa, context, *target, req.columns, join(notes, "; "));
        req.constraints_text = std::move(texts.constraints);
        req.signals_text = std::move(texts.signals);
        const std::vector<ColumnPath> description_paths =
            req.columns.empty() ? std::vector<ColumnPath>{req.nested_field} : req.columns;
        req.proto_description = render_proto_description(schemas, root, description_paths);
        for (const auto& info : infos)
            if (!info.leaf->annotation.empty())
                req.annotations[info.path.dotted()] = info.leaf->annotation;
        plan.push_back(std::move(req));
    }

    for (size_t i = 0; i < plan.size(); ++i) {
        plan[i].index = i;
        plan[i].seed = derive_seed(seed, i);
    }
    return plan;
}

std::vector<RawGeneration> run_requests(const std::vector<GenerationRequest>& requests,
                                        Backend& backend, int max_concurrency,
                                        double temperature) {
    std::vector<RawGeneration> out(requests.size());
    if (requests.empty()) return out;

    const int workers =
        std::max(1, std::min<int>(max_concurrency, static_cast<int>(requests.size())));
    std::atomic<size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= requests.size()) return;
            const GenerationRequest& req = requests[i];
            RawGeneration rg;
            rg.index = req.index;
            rg.requested_columns = req.columns;
            try {
                Prompt prompt = build_prompt(req);
                BackendRequest call;
                call.system = std::move(prompt.system);
                call.user = std::move(prompt.user);
                call.temperature = temperature;
                call.origin = &req;
                BackendResult res = backend.complete(call);
                rg.ok = res.ok;
                rg.text = std::move(res.text);
                rg.error = std::move(res.error);
            } catch (const std::exception& e) {
                rg.ok = false;
                rg.error = e.what();
            }
            out[i] = std::move(rg);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return out;
}

std::vector<Row> parse_generation(const RawGeneration& raw, const SchemaSet& schemas,
                                  const SchemaDef& schema, Warnings* fragments) {
    std::vector<Row> rows = parse_data_text(raw.text, fragments);
    for (auto& r : rows) r = coerce_row(schemas, schema, r);
    return rows;
}

namespace {

using NameChain = std::vector<std::string>;

struct LedgerIndex {
    std::set<NameChain> leaves;
    std::set<NameChain> prefixes;  // proper prefixes of leaves
};

void record_removal(const NameChain& chain, std::set<NameChain>& seen,
                    std::vector<ColumnPath>& removed) {
    if (!seen.insert(chain).second) return;
    std::vector<PathSegment> segs;
    for (const auto& n : chain) segs.push_back({n, -1});
    removed.push_back(ColumnPath{std::move(segs)});
}

bool prune_record(Record& rec, NameChain& chain, const LedgerIndex& ledger,
                  std::set<NameChain>& seen, std::vector<ColumnPath>& removed);

/// Returns true when the value at `chain` survives.
bool prune_value(Value& v, NameChain& chain, const LedgerIndex& ledger, std::set<NameChain>& seen,
                 std::vector<ColumnPath>& removed) {
    if (ledger.leaves.count(chain)) return true;  // requested leaf; shape checked later
    if (!ledger.prefixes.count(chain)) {
        record_removal(chain, seen, removed);
        return false;
    }
    if (v.is_record()) {
        return prune_record(v.as_record(), chain, ledger, seen, removed);
    }
    if (v.is_list()) {
        auto& list = v.as_list();
        for (auto it = list.begin(); it != list.end();) {
            bool keep = it->is_record()
                            ? prune_record(it->as_record(), chain, ledger, seen, removed)
                            : false;
            it = keep ? it + 1 : list.erase(it);
        }
        if (!list.empty()) return true;
        record_removal(chain, seen, removed);
        return false;
    }
    // A scalar sitting at a record prefix can hold none of the requested
    // leaves under it; drop it.
    record_removal(chain, seen, removed);
    return false;
}

bool prune_record(Record& rec, NameChain& chain, const LedgerIndex& ledger,
                  std::set<NameChain>& seen, std::vector<ColumnPath>& removed) {
    for (auto it = rec.fields.begin(); it != rec.fields.end();) {
        chain.push_back(it->first);
        const bool keep = prune_value(it->second, chain, ledger, seen, removed);
        chain.pop_back();
        it = keep ? it + 1 : rec.fields.erase(it);
    }
    return !rec.fields.empty();
}

}  // namespace

FilterResult filter_hallucinations(std::vector<Row> rows,
                                   const std::vector<ColumnPath>& requested) {
    LedgerIndex ledger;
    for (const auto& p : requested) {
        NameChain names = p.names();
        for (size_t i = 1; i < names.size(); ++i)
            ledger.prefixes.insert(NameChain(names.begin(), names.begin() + i));
        ledger.leaves.insert(std::move(names));
    }

    FilterResult fr;
    std::set<NameChain> seen;
    for (auto& row : rows) {
        NameChain chain;
        prune_record(row, chain, ledger, seen, fr.removed);
    }
    fr.rows = std::move(rows);
    return fr;
}

std::vector<Row> merge_generations(const std::vector<GenerationRequest>& requests,
                                   const std::vector<std::vector<Row>>& per_request_rows,
                                   int row_count, Warnings* warnings) {
    if (requests.size() != per_request_rows.size())
        throw Error("merge_generations: " + std::to_string(per_request_rows.size()) +
                    " row sets for " + std::to_string(requests.size()) + " requests");
    std::vector<Row> out(static_cast<size_t>(std::max(0, row_count)));
    for (size_t r = 0; r < requests.size(); ++r) {
        const auto& rows = per_request_rows[r];
        if (warnings && static_cast<int>(rows.size()) > row_count)
            warnings->push_back("request #" + std::to_string(requests[r].index) + " returned " +
                                std::to_string(rows.size()) + " rows; keeping the first " +
                                std::to_string(row_count));
        if (warnings && static_cast<int>(rows.size()) < row_count)
            warnings->push_back("request #" + std::to_string(requests[r].index) +
                                " returned only " + std::to_string(rows.size()) + " of " +
                                std::to_string(row_count) + " rows");
        for (size_t i = 0; i < out.size() && i < rows.size(); ++i)
            for (const auto& [name, v] : rows[i].fields) out[i].set(name, v);
    }
    return out;
}

}  // namespace sdgen
