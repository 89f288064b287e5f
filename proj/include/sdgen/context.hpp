#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdgen/schema.hpp"
#include "sdgen/value.hpp"

namespace sdgen {

class Backend;

struct Incremental {
    int64_t start = 0;
    int64_t step = 1;
};

struct UniformFloat {
    double lo = 0.0;
    double hi = 1.0;
};

struct SeededChoice {
    std::vector<Value> values;
    std::vector<double> weights;  // empty = uniform
};

/// A user-pinned generation signal for one column.
struct ValueSpec {
    enum class Kind { Literal, OneOf, Range, Incremental, UniformFloat, SeededChoice };
    Kind kind = Kind::Literal;
    Value literal;
    std::vector<Value> one_of;
    Value lo, hi;  // Range
    bool lo_inclusive = true, hi_inclusive = true;
    Incremental incremental;
    UniformFloat uniform;
    SeededChoice choice;

    static ValueSpec from_json(const nlohmann::ordered_json& j);
    nlohmann::ordered_json to_json() const;
    std::string describe() const;  // one-line rendering for prompts/reports
};

struct CorrelationHint {
    std::vector<ColumnPath> columns;
    std::string note;
};

/// User-provided generation context, loaded from a JSON file.
struct ContextMap {
    std::string question;
    std::string user_criteria;
    std::map<std::string, ValueSpec> signals;  // key: dotted column path
    int row_count = 0;                         // 0 = pick from coverage demand
    std::vector<ColumnPath> unique_columns;
    int instances_per_test = 1;
    std::vector<CorrelationHint> correlations;

    static ContextMap from_json(const nlohmann::ordered_json& j);
    static ContextMap from_text(std::string_view json_text);
    nlohmann::ordered_json to_json() const;
};

/// Applies an external annotation docs file (JSON map of dotted column path
/// to text) onto one message tree. Docs override inline comments. Keys that
/// do not resolve produce warnings and are ignored. Idempotent.
void merge_annotations(SchemaSet& set, const SchemaDef& root,
                       const std::map<std::string, std::string>& docs, Warnings* warnings);

/// Fills every missing field annotation reachable from `root`. The
/// deterministic backend path synthesizes "<Type> field <name>" stubs
/// locally; an HTTP backend is asked per field. Machine-generated text is
/// flagged on the field. Backend failures leave gaps and add warnings.
void fill_annotations(SchemaSet& set, const SchemaDef& root, Backend& backend, Warnings* warnings);

struct ColumnGroup {
    std::vector<ColumnPath> members;  // 1..30 scalar leaf paths
    std::string correlation_note;
};

/// Extracts an ordering chain from a correlation note of the form
/// "...: a <= b <= c" (the shape group_columns emits for all-date groups).
/// Returns the chained column paths in order, or empty when the note
/// declares no ordering.
std::vector<ColumnPath> parse_date_chain(const std::string& note);

inline constexpr int kMaxGroupSize = 30;

/// Partitions the scalar leaf columns of `root` into generation groups.
/// Hinted columns group together (user hints first, then a shared
/// name-prefix heuristic, then annotation keyword match); the rest pack in
/// declaration order, at most kMaxGroupSize per group.
std::vector<ColumnGroup> group_columns(const SchemaSet& set, const SchemaDef& root,
                                       const std::vector<CorrelationHint>& hints,
                                       Warnings* warnings);

/// Same grouping over an explicit column list (request planning passes only
/// the top-level scalar columns here; nested subtrees travel whole).
std::vector<ColumnGroup> group_columns(const SchemaDef& root,
                                       const std::vector<ColumnInfo>& columns,
                                       const std::vector<CorrelationHint>& hints,
                                       Warnings* warnings);

}  // namespace sdgen
