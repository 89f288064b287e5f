#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdgen/analysis.hpp"
#include "sdgen/common.hpp"
#include "sdgen/schema.hpp"
#include "sdgen/value.hpp"

namespace sdgen {

/// Origin of one generated cell. Everything starts as backend output; the
/// enforcement layer tags each cell it rewrites.
enum class CellProvenance { Backend, Substituted, JoinSynced };

std::string_view provenance_name(CellProvenance p);

/// One table's generated rows plus a per-cell provenance overlay keyed by
/// dotted path. A cell absent from the overlay is backend-produced.
struct TableData {
    std::string table;
    const SchemaSet* schemas = nullptr;
    const SchemaDef* schema = nullptr;
    std::vector<Row> rows;
    /// Parallel to `rows`; records only rewritten cells.
    std::vector<std::map<std::string, CellProvenance>> provenance;

    CellProvenance provenance_of(size_t row, const std::string& dotted) const;
    void tag(size_t row, const std::string& dotted, CellProvenance p);
};

/// One cell rewrite applied by the enforcement layer; the run report emits
/// the accumulated log.
struct Substitution {
    std::string table;
    size_t row = 0;
    std::string column;    // dotted path
    std::string from;      // display form; "(absent)" when the cell was missing
    std::string to;
    std::string reason;    // rendered predicate, coverage target, or join key
};
using SubstitutionLog = std::vector<Substitution>;

/// Rewrites cells until every evaluable conjunctive constraint holds on
/// every row, then assigns missing coverage values round-robin across rows.
/// Only cells named by a constraint or coverage target are touched; every
/// rewrite is tagged Substituted and logged. Rows already satisfying
/// everything pass through untouched (zero substitutions), which also makes
/// the operation idempotent. A coverage value that would contradict a
/// conjunctive constraint is skipped with a warning — the constraint wins.
/// Derived predicates the solver cannot invert are reported once through
/// `warnings` and left for the judge. Throws EnforceError, naming the
/// offending predicate, when the constraint set itself is unsatisfiable
/// (e.g. an empty range after intersection). Coverage targets bound to
/// other tables are ignored. Independent per table, so callers may run
/// tables concurrently.
TableData enforce_constraints(TableData data, const std::vector<analysis::PredPtr>& constraints,
                              const std::vector<analysis::CoverageTarget>& coverage,
                              SubstitutionLog* log = nullptr, Warnings* warnings = nullptr);

/// Inverts a derived comparison's whitelisted function chain to produce a
/// raw value for its innermost column that satisfies the comparison on
/// `row`. The candidate is shaped to the column's current cell type (so a
/// string column constrained through CAST(... AS INT64) receives digits)
/// and forward-verified with evaluate_predicate before being returned.
/// nullopt = chain not invertible; the caller leaves the row unchanged and
/// reports the predicate for the judge path.
std::optional<Value> solve_derived(const analysis::Pred& pred, const Row& row);

/// Copies join-key values across tables, one JoinConstraint at a time in
/// declaration order. The first-listed table is primary: secondary row i
/// takes the keys of primary row (i / fan_out) % |primary|, with CAST
/// wrappers applied so the join equality holds post-cast. Synced cells are
/// tagged JoinSynced and logged; cells whose value already matches are left
/// untouched. Runs single-threaded after per-table enforcement completes.
/// Throws EnforceError when a join table is absent from `tables`, the
/// primary table has no rows while the secondary does, a primary row lacks
/// a key cell (or holds NULL), or the secondary never produced the key
/// column at all — each of these feeds the retry loop.
std::map<std::string, TableData> enforce_joins(std::map<std::string, TableData> tables,
                                               const std::vector<analysis::JoinConstraint>& joins,
                                               int fan_out = 1, SubstitutionLog* log = nullptr);

}  // namespace sdgen
