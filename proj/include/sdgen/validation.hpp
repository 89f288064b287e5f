#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdgen/analysis.hpp"
#include "sdgen/backend.hpp"
#include "sdgen/context.hpp"
#include "sdgen/postprocess.hpp"

namespace sdgen::validation {

/// One concrete problem found by a rule. The message is self-contained
/// (table, column, offending value) because retry prompts embed it verbatim.
struct Violation {
    std::string rule;           // "r1".."r5"
    std::string column;         // dotted path, "" when not column-specific
    std::optional<size_t> row;  // offending row, when one row is at fault
    std::string message;
};

struct RuleResult {
    enum class Status { Pass, Fail, Skipped };
    Status status = Status::Pass;
    std::vector<Violation> violations;  // non-empty iff Fail
    std::string skip_reason;            // set iff Skipped
    /// Informational only (degenerate pairs, unevaluable residue); never
    /// affects the status.
    std::vector<std::string> notes;

    static RuleResult pass();
    static RuleResult skipped(std::string reason);
    static RuleResult fail(std::vector<Violation> violations);
    bool failed() const { return status == Status::Fail; }
};

/// Combines per-table runs of one rule: any Fail wins, else any Pass, else
/// Skipped with the reasons joined. Violations and notes concatenate.
RuleResult merge_results(std::vector<RuleResult> parts);

struct ValidationReport {
    /// Rule id -> result, in run order r1..r5.
    std::vector<std::pair<std::string, RuleResult>> rules;

    bool pass() const;  // no rule failed (Skipped does not fail)
    const RuleResult* rule(std::string_view id) const;

    nlohmann::ordered_json to_json() const;
    /// Human-readable block, one line per rule plus one per violation; this
    /// is the text retry prompts embed.
    std::string to_text() const;
};

enum class Verdict { Valid, NotValid, NotPresent };
std::string_view verdict_name(Verdict v);  // "VALID" / "NOT VALID" / "NOT PRESENT"

struct JudgeVerdict {
    Verdict verdict = Verdict::Valid;
    std::string reason;
};

/// r1 (schema column absent from every row) and r2 (value kind mismatching
/// its field: wrong scalar type, unknown enum member, scalar where a record
/// is required, undeclared column). Deprecated columns are exempt from r1.
std::pair<RuleResult, RuleResult> check_structure(const postprocess::TableData& data);

struct CorrelationOptions {
    double pearson_threshold = 0.1;  // |r| must exceed this
    double chi_square_alpha = 0.05;
    size_t min_rows = 5;
};

/// r3. Each hinted group must show correlation on at least one testable
/// pair: numeric-numeric via |Pearson| > threshold, categorical-categorical
/// via chi-square rejecting independence. Groups whose note declares a date
/// ordering are additionally checked row-by-row for monotone consistency.
/// Fewer than min_rows rows skips the rule; zero-variance pairs are skipped
/// with a note.
RuleResult check_correlation(const postprocess::TableData& data,
                             const std::vector<ColumnGroup>& groups,
                             const CorrelationOptions& options = {});

/// r4. For every join constraint the simulated pairwise equijoin must yield
/// at least one matched pair and every secondary-row key must appear in the
/// primary key set. An empty or missing secondary table fails outright.
RuleResult check_joins(const std::map<std::string, postprocess::TableData>& tables,
                       const std::vector<analysis::JoinConstraint>& joins);

/// Scans a judge completion for its verdict token. "NOT PRESENT" is matched
/// before "NOT VALID" before "VALID" (the tokens nest as substrings).
/// Underscored spellings are accepted. nullopt when no token appears.
std::optional<JudgeVerdict> parse_verdict(std::string_view completion);

/// r5. Deterministic first: every evaluable constraint must hold on every
/// row (the extracted constraints are conjunctive); a constraint whose
/// columns are absent from all rows yields NOT PRESENT. Unevaluable
/// constraints go to the backend judge when one is configured and the
/// deterministic half found nothing wrong; with no backend they are Skipped
/// with a warning. An unparseable backend verdict is an r5 error and fails.
RuleResult judge_semantics(const postprocess::TableData& data,
                           const std::vector<analysis::PredPtr>& constraints,
                           Backend* judge = nullptr, JudgeVerdict* verdict_out = nullptr,
                           Warnings* warnings = nullptr);

/// Runs r1..r5 in order with no short-circuiting and returns the full
/// report. `groups` is keyed by table name; targets missing from `tables`
/// are validated as empty (r1 lists every column, r5 reports NOT PRESENT).
ValidationReport validate_all(const std::map<std::string, postprocess::TableData>& tables,
                              const SchemaSet& schemas, const analysis::QueryAnalysis& analysis,
                              const std::map<std::string, std::vector<ColumnGroup>>& groups,
                              Backend* judge = nullptr, Warnings* warnings = nullptr,
                              const CorrelationOptions& options = {});

}  // namespace sdgen::validation
