#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdgen/context.hpp"
#include "sdgen/schema.hpp"
#include "sdgen/sql/ast.hpp"
#include "sdgen/value.hpp"

namespace sdgen::analysis {

/// Functions a predicate may apply and still stay machine-checkable. Any
/// other function marks its subtree unevaluable: kept for prompts, skipped
/// by enforcement and the deterministic judge.
bool is_whitelisted_function(std::string_view name);

struct Pred;
using PredPtr = std::shared_ptr<const Pred>;

/// Predicate IR over resolved column paths. Unlike the SQL AST, column
/// references are bound to one base table and the tree carries
/// evaluability/derivation markers.
struct Pred {
    enum class Kind {
        Literal,  // value
        Column,   // table + column
        Compare,  // op, a, b
        Between,  // a between b and c, negated
        Like,     // a like b, negated
        InList,   // a in list, negated
        IsNull,   // a is [not] null, negated
        And,      // a, b
        Or,       // a, b
        Not,      // a
        Func,     // func(list...); CAST/SAFE_CAST carry cast_type
        Opaque,   // text
    };

    Kind kind = Kind::Opaque;
    Value value;
    std::string table;
    ColumnPath column;
    std::string op;
    std::string func;
    std::string cast_type;
    std::string text;
    bool negated = false;
    /// False when the subtree contains a non-whitelisted function, an opaque
    /// fragment, or an unbound column.
    bool evaluable = true;
    /// True on a comparison whose column side passes through function
    /// application; the constraint attaches to the innermost column.
    bool derived = false;
    PredPtr a, b, c;
    std::vector<PredPtr> list;
};

PredPtr make_literal(Value v);
PredPtr make_column(std::string table, ColumnPath path);
PredPtr make_compare(std::string op, PredPtr a, PredPtr b);
PredPtr make_and(PredPtr a, PredPtr b);
PredPtr make_or(PredPtr a, PredPtr b);

/// Flattens nested And / Or chains.
std::vector<PredPtr> conjuncts_of(const PredPtr& p);
std::vector<PredPtr> disjuncts_of(const PredPtr& p);

/// All Column nodes in the subtree, left to right.
void collect_columns(const Pred& p, std::vector<const Pred*>& out);
/// Leftmost innermost Column node, or null.
const Pred* innermost_column(const Pred& p);

/// Renders in compact SQL-ish form: fake_column='X' AND date>='2023-01-01'.
/// Strings and dates are single-quoted; columns print as dotted paths.
std::string render_predicate(const Pred& p);
std::string render_conjunction(const std::vector<PredPtr>& ps);

struct TableTarget {
    std::string table;
    std::vector<std::string> aliases;  // first-seen order; table name when bare
    const SchemaDef* schema = nullptr;
    std::vector<PredPtr> constraints;  // conjunctive across all rows
    std::vector<ColumnPath> referenced;  // sorted, unique
    /// Set when distinct constraint sets from multiple references of this
    /// table were merged into one disjunction.
    bool merged_disjunctively = false;
};

struct JoinSide {
    std::string table;
    ColumnPath column;
    std::string cast_type;  // "" = no cast on this side
};

struct JoinPair {
    JoinSide left, right;
};

/// Equijoin keys for one pair of tables, left = earlier generation target.
struct JoinConstraint {
    std::string left_table, right_table;
    std::vector<JoinPair> pairs;
};

struct CoverageTarget {
    enum class Kind { ValueSet, Partition, RangeSpread };
    Kind kind = Kind::ValueSet;
    std::string table;
    ColumnPath column;
    std::vector<Value> values;  // ValueSet; sentinel appended last when present
    bool has_sentinel = false;
    std::string part;  // Partition: year|quarter|month|week|day
    Value lo, hi;      // Partition / RangeSpread bounds
};

/// Minimum number of rows needed to realize the target: |values| for a
/// ValueSet, one per time bucket for a Partition, 3 for a RangeSpread
/// (both endpoints plus an interior point).
int coverage_demand(const CoverageTarget& t);

struct QueryAnalysis {
    std::vector<TableTarget> targets;
    std::vector<JoinConstraint> joins;
    std::vector<CoverageTarget> coverage;
    std::vector<PredPtr> unassigned;  // cross-table or unbound residue
    Warnings warnings;

    const TableTarget* target(std::string_view table) const;
};

/// The three extraction passes. Each runs the same resolution walk; the
/// bundled `analyze` runs it once and also applies user-context overrides.
std::vector<TableTarget> extract_targets(const sql::Statement& stmt, const SchemaSet& schemas,
                                         Warnings* warnings = nullptr);
std::vector<JoinConstraint> extract_joins(const sql::Statement& stmt, const SchemaSet& schemas,
                                          Warnings* warnings = nullptr);
std::vector<CoverageTarget> extract_coverage_targets(const sql::Statement& stmt,
                                                     const SchemaSet& schemas,
                                                     Warnings* warnings = nullptr);

QueryAnalysis analyze(const sql::Statement& stmt, const SchemaSet& schemas,
                      const ContextMap* context = nullptr);

/// Dump shape: {"targets": [{"tables": [...], "constraints": "..." | []}],
/// "join_constraints": [{t1: col, t2: col}, ...]} plus coverage/unassigned/
/// warnings keys only when non-empty.
nlohmann::ordered_json analysis_to_json(const QueryAnalysis& qa);

}  // namespace sdgen::analysis
