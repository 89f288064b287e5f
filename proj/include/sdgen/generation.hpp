#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdgen/analysis.hpp"
#include "sdgen/backend.hpp"
#include "sdgen/context.hpp"
#include "sdgen/data_io.hpp"
#include "sdgen/schema.hpp"
#include "sdgen/value.hpp"

namespace sdgen {

/// Per-column value guidance compiled at planning time from the query
/// constraints, coverage targets, and user signals that touch the column.
/// The prompt renders it as text; the deterministic backend synthesizes
/// values from it directly.
struct ColumnDirective {
    ColumnPath column;  // relative to the target schema
    const FieldDef* field = nullptr;
    std::optional<Value> pin;     // equality constraint or literal signal
    std::vector<Value> cycle;     // coverage / one-of values, emitted round-robin
    std::optional<Value> lo, hi;  // range bounds
    bool lo_inclusive = true, hi_inclusive = true;
    std::vector<Value> avoid;        // != / NOT IN literals to steer around
    std::optional<std::string> like;  // LIKE pattern synthesized strings must match
    std::optional<ValueSpec> spec;   // generator-style user signal
    bool unique = false;
    /// Position in the scope's declared date-ordering chain (see
    /// parse_date_chain); -1 when the column is not chained. Values within a
    /// row must be non-decreasing along rank.
    int order_rank = -1;
    int order_size = 0;  // chain length when order_rank >= 0
};

/// One unit of backend work: either one scalar column group or one nested
/// top-level field's whole subtree. Carries everything both prompt assembly
/// and deterministic synthesis need, so a request is self-contained.
struct GenerationRequest {
    enum class Scope { WholeGroup, NestedField };

    size_t index = 0;  // plan position; results reassemble in this order
    std::string table;
    Scope scope = Scope::WholeGroup;
    ColumnGroup group;        // scope == WholeGroup
    ColumnPath nested_field;  // scope == NestedField: one top-level field
    /// Requested-column ledger: every leaf path this request may emit.
    /// Recorded before any backend call so hallucinated columns are
    /// detectable afterwards. Empty only for a nested field whose message
    /// has no leaf columns.
    std::vector<ColumnPath> columns;

    int row_count = 0;
    std::string constraints_text;  // {constraints} slot; "" renders as "(none)"
    std::string signals_text;      // {data_generation_signals} slot
    std::string user_input;        // {user_input} slot
    std::string proto_description;  // {proto_description} slot
    /// Dotted path -> field comment for every annotated in-scope column;
    /// the same text is inlined as comments in proto_description.
    std::map<std::string, std::string> annotations;

    int attempt = 1;
    std::string retry_context;  // prior validation report text; set iff attempt > 1

    uint64_t seed = 0;  // derived per request; deterministic backend input
    DataFormat format = DataFormat::TextprotoLike;

    const SchemaSet* schemas = nullptr;
    const SchemaDef* root = nullptr;  // target table schema
    std::vector<ColumnDirective> directives;
};

/// Raw backend output for one request, still untyped, plus the pre-call
/// column ledger. A failed call records the error and leaves text empty.
struct RawGeneration {
    size_t index = 0;
    bool ok = false;
    std::string error;
    std::string text;
    std::vector<Row> parsed;  // filled by parse_generation
    std::vector<ColumnPath> requested_columns;
};

/// Splits one table target's columns into generation requests: one per
/// scalar column group (user correlation hints honored, at most
/// kMaxGroupSize columns each), then one per nested top-level field, in
/// declaration order. A nested field's subtree is never split. Deterministic
/// for identical inputs. Throws PlanError when an explicit row_count in
/// `context` cannot cover a coverage target's demand (names the target).
std::vector<GenerationRequest> plan_requests(const analysis::QueryAnalysis& qa,
                                             const ContextMap& context, const SchemaSet& schemas,
                                             const std::string& table, uint64_t seed,
                                             DataFormat format = DataFormat::TextprotoLike,
                                             Warnings* warnings = nullptr);

/// Rows needed for one table: the explicit context row_count when set,
/// otherwise max(3, largest coverage demand on that table). Throws PlanError
/// when the explicit count is below a coverage demand.
int plan_row_count(const analysis::QueryAnalysis& qa, const ContextMap& context,
                   const std::string& table);

/// Dispatches requests over a bounded worker pool: at most max_concurrency
/// backend calls in flight at any instant. Results come back in plan order
/// regardless of completion order. A per-request backend failure is recorded
/// in its RawGeneration and never aborts sibling requests.
std::vector<RawGeneration> run_requests(const std::vector<GenerationRequest>& requests,
                                        Backend& backend, int max_concurrency = 10,
                                        double temperature = 0.1);

/// Parses one raw generation into typed rows against the target schema:
/// markdown fences stripped, JSON or textproto-like structure accepted,
/// values coerced to field kinds. Unparseable fragments are reported through
/// `fragments` and skipped. Throws ParseError (quoting the first 80 chars)
/// when nothing parses at all.
std::vector<Row> parse_generation(const RawGeneration& raw, const SchemaSet& schemas,
                                  const SchemaDef& schema, Warnings* fragments = nullptr);

struct FilterResult {
    std::vector<Row> rows;
    std::vector<ColumnPath> removed;  // first-seen order, unique
};

/// Removes every leaf cell whose path is not in the requested ledger;
/// emptied records are pruned. Rows are otherwise untouched.
FilterResult filter_hallucinations(std::vector<Row> rows,
                                   const std::vector<ColumnPath>& requested);

/// Positional merge of per-request rows into full table rows: the i-th row
/// of every request joins into the i-th output row, in plan order. Requests
/// that returned more rows than row_count are truncated (warning); requests
/// that returned fewer leave their columns absent from the tail rows
/// (warning; structural validation flags the gaps).
std::vector<Row> merge_generations(const std::vector<GenerationRequest>& requests,
                                   const std::vector<std::vector<Row>>& per_request_rows,
                                   int row_count, Warnings* warnings = nullptr);

}  // namespace sdgen
