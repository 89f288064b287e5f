#pragma once

#include <optional>
#include <string_view>

#include "sdgen/analysis.hpp"
#include "sdgen/common.hpp"
#include "sdgen/value.hpp"

namespace sdgen {

// The three-valued outcome type Tri and its Kleene connectives live in
// common.hpp; Unknown is the evaluator's "unevaluable" leg (NULL
// comparisons, functions outside the whitelist, orderless type pairs).

/// SQL LIKE matching: % matches any run (including empty), _ exactly one
/// character, everything else literally.
bool like_match(std::string_view text, std::string_view pattern);

/// Evaluates the scalar half of the predicate IR (literals, column lookups,
/// whitelisted functions, arithmetic, concatenation) against one row.
/// nullopt = unevaluable; Value(Null) = SQL NULL (missing cells included).
std::optional<Value> evaluate_scalar(const Row& row, const analysis::Pred& p);

/// Three-way comparison under SQL coercion rules: numerics widen, strings
/// compare with dates/enums/bytes by content, timestamps parse date-shaped
/// strings as UTC instants. nullopt when the kinds have no defined order.
std::optional<int> compare_values(const Value& a, const Value& b);

/// The CAST machinery behind CAST/SAFE_CAST, exposed for enforcement:
/// applies SQL cast semantics to one value. nullopt = the cast errors
/// (plain CAST would make the expression unevaluable, SAFE_CAST yields
/// NULL). Casting NULL returns NULL for every type.
std::optional<Value> cast_scalar(const Value& v, const std::string& type);

/// Evaluates a predicate against one row. Column references resolve by
/// dotted path; the table qualifier is assumed bound to this row's table.
Tri evaluate_predicate(const Row& row, const analysis::Pred& p);

}  // namespace sdgen
