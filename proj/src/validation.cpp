#include "sdgen/validation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "sdgen/data_io.hpp"
#include "sdgen/predicate_eval.hpp"
#include "sdgen/prompts.hpp"
#include "sdgen/stats.hpp"

namespace sdgen::validation {

namespace {

using analysis::JoinConstraint;
using analysis::JoinPair;
using analysis::Pred;
using analysis::PredPtr;
using postprocess::TableData;

std::string_view rule_title(std::string_view id) {
    if (id == "r1") return "missing columns";
    if (id == "r2") return "field kinds";
    if (id == "r3") return "column correlations";
    if (id == "r4") return "join keys";
    if (id == "r5") return "semantic constraints";
    return "";
}

/// True when some cell exists at `segments` (descending through records and
/// into the elements of repeated records). A Null cell counts as present —
/// absence means the generator never emitted the column at all.
bool subtree_present(const Record& rec, const std::vector<std::string>& segments, size_t i) {
    const Value* v = rec.find(segments[i]);
    if (!v) return false;
    if (i + 1 == segments.size()) return true;
    if (v->is_record()) return subtree_present(v->as_record(), segments, i + 1);
    if (v->is_list()) {
        for (const Value& e : v->as_list())
            if (e.is_record() && subtree_present(e.as_record(), segments, i + 1)) return true;
    }
    return false;
}

bool column_present_anywhere(const std::vector<Row>& rows, const ColumnPath& path) {
    const auto segments = path.names();
    for (const Row& row : rows)
        if (subtree_present(row, segments, 0)) return true;
    return false;
}

std::string quoted(const std::string& s) { return "'" + s + "'"; }

/// r2 recursive walk: every cell of `rec` checked against the message that
/// declares it. `prefix` is the dotted path down to (excluding) this record.
void check_record_kinds(const SchemaSet& set, const SchemaDef& schema, const Record& rec,
                        const std::string& table, const std::string& prefix, size_t row_index,
                        std::vector<Violation>& out) {
    auto path_of = [&](const std::string& name) {
        return prefix.empty() ? name : prefix + "." + name;
    };
    for (const auto& [name, value] : rec.fields) {
        const std::string path = path_of(name);
        const FieldDef* field = schema.find_field(name);
        if (!field) {
            out.push_back({"r2", path, row_index,
                           "table " + quoted(table) + ": column " + quoted(path) +
                               " is not declared in message " + quoted(schema.name)});
            continue;
        }
        if (value.is_null()) continue;  // absence is r1's concern, not a kind mismatch

        if (field->is_nested()) {
            const SchemaDef* nested = set.message(field->nested().message);
            if (!nested) continue;  // unresolved reference; reported at link time
            auto recurse = [&](const Record& child) {
                check_record_kinds(set, *nested, child, table, path, row_index, out);
            };
            if (value.is_record() && !field->repeated) {
                recurse(value.as_record());
            } else if (value.is_list() && field->repeated) {
                for (const Value& e : value.as_list()) {
                    if (e.is_record())
                        recurse(e.as_record());
                    else
                        out.push_back({"r2", path, row_index,
                                       "table " + quoted(table) + ": column " + quoted(path) +
                                           " element is a " + e.type_name() + " where record " +
                                           quoted(nested->name) + " is required"});
                }
            } else {
                out.push_back({"r2", path, row_index,
                               "table " + quoted(table) + ": column " + quoted(path) + " holds a " +
                                   value.type_name() + " where " +
                                   (field->repeated ? "a repeated record " : "record ") +
                                   quoted(nested->name) + " is required"});
            }
            continue;
        }

        // Leaf (scalar or enum) field.
        if (value.is_record()) {
            out.push_back({"r2", path, row_index,
                           "table " + quoted(table) + ": column " + quoted(path) +
                               " holds a record where " + field->type_name() +
                               " (a scalar) is required"});
            continue;
        }
        if (value_fits_field(set, *field, value)) continue;

        const Value* leaf_value = &value;
        if (value.is_list() && !value.as_list().empty() && !field->repeated)
            leaf_value = &value.as_list().front();
        if (field->is_enum() && (leaf_value->is_enum() || leaf_value->is_string())) {
            const std::string& member =
                leaf_value->is_enum() ? leaf_value->as_enum().name : leaf_value->as_string();
            out.push_back({"r2", path, row_index,
                           "table " + quoted(table) + ": column " + quoted(path) + " value " +
                               quoted(member) + " is not a member of enum " +
                               field->enum_kind().type_name});
        } else {
            out.push_back({"r2", path, row_index,
                           "table " + quoted(table) + ": column " + quoted(path) + " value " +
                               quoted(value.to_display()) + " (" + value.type_name() +
                               ") does not fit the declared " + field->type_name() + " column"});
        }
    }
}

enum class MemberClass { Numeric, Categorical, Dated, Other };

MemberClass classify_member(const FieldDef& field) {
    if (field.is_enum()) return MemberClass::Categorical;
    if (!field.is_scalar() || field.repeated) return MemberClass::Other;
    switch (field.scalar()) {
        case Scalar::Int64:
        case Scalar::Float64:
            return MemberClass::Numeric;
        case Scalar::Bool:
        case Scalar::String:
        case Scalar::Bytes:
            return MemberClass::Categorical;
        case Scalar::Date:
        case Scalar::Timestamp:
            return MemberClass::Dated;
    }
    return MemberClass::Other;
}

std::optional<double> as_number(const Value& v) {
    if (v.is_int()) return static_cast<double>(v.as_int());
    if (v.is_float()) return v.as_float();
    return std::nullopt;
}

std::string category_of(const Value& v) { return v.to_display(); }

std::string group_label(const ColumnGroup& g) {
    std::string s = "{";
    for (size_t i = 0; i < g.members.size(); ++i) {
        if (i) s += ", ";
        s += g.members[i].dotted();
    }
    return s + "}";
}

std::string trim_copy(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string clip(std::string_view s, size_t n) {
    std::string t = trim_copy(s);
    if (t.size() <= n) return t;
    return t.substr(0, n) + "...";
}

nlohmann::ordered_json rows_as_json(const TableData& data) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Row& row : data.rows) arr.push_back(value_to_json(Value(row)));
    return arr;
}

}  // namespace

RuleResult RuleResult::pass() { return RuleResult{}; }

RuleResult RuleResult::skipped(std::string reason) {
    RuleResult r;
    r.status = Status::Skipped;
    r.skip_reason = std::move(reason);
    return r;
}

RuleResult RuleResult::fail(std::vector<Violation> violations) {
    RuleResult r;
    r.status = Status::Fail;
    r.violations = std::move(violations);
    return r;
}

RuleResult merge_results(std::vector<RuleResult> parts) {
    if (parts.empty()) return RuleResult::pass();
    RuleResult out;
    bool any_fail = false, any_pass = false;
    std::vector<std::string> reasons;
    for (RuleResult& p : parts) {
        any_fail = any_fail || p.status == RuleResult::Status::Fail;
        any_pass = any_pass || p.status == RuleResult::Status::Pass;
        if (p.status == RuleResult::Status::Skipped && !p.skip_reason.empty() &&
            std::find(reasons.begin(), reasons.end(), p.skip_reason) == reasons.end())
            reasons.push_back(p.skip_reason);
        std::move(p.violations.begin(), p.violations.end(), std::back_inserter(out.violations));
        std::move(p.notes.begin(), p.notes.end(), std::back_inserter(out.notes));
    }
    if (any_fail) {
        out.status = RuleResult::Status::Fail;
    } else if (any_pass) {
        out.status = RuleResult::Status::Pass;
        out.violations.clear();
        for (const std::string& r : reasons) out.notes.push_back("partially skipped: " + r);
    } else {
        out.status = RuleResult::Status::Skipped;
        std::string joined;
        for (const std::string& r : reasons) {
            if (!joined.empty()) joined += "; ";
            joined += r;
        }
        out.skip_reason = joined;
    }
    return out;
}

bool ValidationReport::pass() const {
    for (const auto& [id, r] : rules)
        if (r.status == RuleResult::Status::Fail) return false;
    return true;
}

const RuleResult* ValidationReport::rule(std::string_view id) const {
    for (const auto& [rid, r] : rules)
        if (rid == id) return &r;
    return nullptr;
}

nlohmann::ordered_json ValidationReport::to_json() const {
    nlohmann::ordered_json out;
    nlohmann::ordered_json rs = nlohmann::ordered_json::object();
    for (const auto& [id, r] : rules) {
        nlohmann::ordered_json j;
        j["title"] = std::string(rule_title(id));
        switch (r.status) {
            case RuleResult::Status::Pass:
                j["status"] = "pass";
                break;
            case RuleResult::Status::Fail:
                j["status"] = "fail";
                break;
            case RuleResult::Status::Skipped:
                j["status"] = "skipped";
                j["reason"] = r.skip_reason;
                break;
        }
        if (!r.violations.empty()) {
            nlohmann::ordered_json vs = nlohmann::ordered_json::array();
            for (const Violation& v : r.violations) {
                nlohmann::ordered_json vj;
                vj["rule"] = v.rule;
                if (!v.column.empty()) vj["column"] = v.column;
                if (v.row) vj["row"] = *v.row;
                vj["message"] = v.message;
                vs.push_back(std::move(vj));
            }
            j["violations"] = std::move(vs);
        }
        if (!r.notes.empty()) j["notes"] = r.notes;
        rs[id] = std::move(j);
    }
    out["rules"] = std::move(rs);
    out["pass"] = pass();
    return out;
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    for (const auto& [id, r] : rules) {
        out << id << " " << rule_title(id) << ": ";
        switch (r.status) {
            case RuleResult::Status::Pass:
                out << "PASS\n";
                break;
            case RuleResult::Status::Fail:
                out << "FAIL\n";
                break;
            case RuleResult::Status::Skipped:
                out << "SKIPPED (" << r.skip_reason << ")\n";
                break;
        }
        for (const Violation& v : r.violations) out << "  - " << v.message << "\n";
        for (const std::string& n : r.notes) out << "  (note) " << n << "\n";
    }
    out << "overall: " << (pass() ? "PASS" : "FAIL") << "\n";
    return out.str();
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Valid:
            return "VALID";
        case Verdict::NotValid:
            return "NOT VALID";
        case Verdict::NotPresent:
            return "NOT PRESENT";
    }
    return "VALID";
}

std::pair<RuleResult, RuleResult> check_structure(const TableData& data) {
    std::vector<Violation> missing, mismatched;
    const auto columns = enumerate_columns(*data.schemas, *data.schema);

    if (data.rows.empty())
        missing.push_back({"r1", "", std::nullopt,
                           "table " + quoted(data.table) + " has no rows; every column is missing"});
    for (const ColumnInfo& col : columns) {
        if (column_present_anywhere(data.rows, col.path)) continue;
        missing.push_back({"r1", col.path.dotted(), std::nullopt,
                           "table " + quoted(data.table) + ": column " + quoted(col.path.dotted()) +
                               " is missing from all " + std::to_string(data.rows.size()) +
                               " rows"});
    }

    for (size_t i = 0; i < data.rows.size(); ++i)
        check_record_kinds(*data.schemas, *data.schema, data.rows[i], data.table, "", i,
                           mismatched);

    RuleResult r1 = missing.empty() ? RuleResult::pass() : RuleResult::fail(std::move(missing));
    RuleResult r2 =
        mismatched.empty() ? RuleResult::pass() : RuleResult::fail(std::move(mismatched));
    return {std::move(r1), std::move(r2)};
}

RuleResult check_correlation(const TableData& data, const std::vector<ColumnGroup>& groups,
                             const CorrelationOptions& options) {
    if (data.rows.size() < options.min_rows)
        return RuleResult::skipped("insufficient rows (" + std::to_string(data.rows.size()) +
                                   " < " + std::to_string(options.min_rows) + ")");

    std::vector<Violation> violations;
    std::vector<std::string> notes;

    for (const ColumnGroup& group : groups) {
        const auto chain = parse_date_chain(group.correlation_note);
        if (group.members.size() < 2 && chain.size() < 2) continue;  // vacuously consistent

        struct Member {
            ColumnPath path;
            MemberClass cls = MemberClass::Other;
        };
        std::vector<Member> members;
        for (const ColumnPath& p : group.members) {
            Member m{p, MemberClass::Other};
            try {
                m.cls = classify_member(resolve_path(*data.schemas, *data.schema, p));
            } catch (const Error&) {
                notes.push_back("group " + group_label(group) + ": member " + quoted(p.dotted()) +
                                " not in schema; skipped");
            }
            members.push_back(std::move(m));
        }

        bool testable = false, correlated = false;
        std::vector<std::string> tested;  // one diagnostic per tested pair

        for (size_t i = 0; i < members.size(); ++i) {
            for (size_t j = i + 1; j < members.size(); ++j) {
                const Member& a = members[i];
                const Member& b = members[j];
                const std::string pair_name =
                    "(" + a.path.dotted() + ", " + b.path.dotted() + ")";
                const auto a_segs = a.path.names();
                const auto b_segs = b.path.names();

                if (a.cls == MemberClass::Numeric && b.cls == MemberClass::Numeric) {
                    std::vector<double> xs, ys;
                    for (const Row& row : data.rows) {
                        const Value* va = get_path(row, a_segs);
                        const Value* vb = get_path(row, b_segs);
                        if (!va || !vb) continue;
                        auto x = as_number(*va);
                        auto y = as_number(*vb);
                        if (!x || !y) continue;
                        xs.push_back(*x);
                        ys.push_back(*y);
                    }
                    if (xs.size() < 2) {
                        notes.push_back("group " + group_label(group) + ": pair " + pair_name +
                                        " skipped: fewer than 2 complete rows");
                        continue;
                    }
                    double r = pearson(xs, ys);
                    if (std::isnan(r)) {
                        notes.push_back("group " + group_label(group) + ": pair " + pair_name +
                                        " skipped: zero variance");
                        continue;
                    }
                    testable = true;
                    std::ostringstream d;
                    d.precision(3);
                    d << "|Pearson r" << pair_name << "| = " << std::fabs(r);
                    tested.push_back(d.str());
                    if (std::fabs(r) > options.pearson_threshold) correlated = true;
                } else if (a.cls == MemberClass::Categorical &&
                           b.cls == MemberClass::Categorical) {
                    std::map<std::string, std::map<std::string, double>> table;
                    std::set<std::string> cols;
                    for (const Row& row : data.rows) {
                        const Value* va = get_path(row, a_segs);
                        const Value* vb = get_path(row, b_segs);
                        if (!va || !vb || va->is_null() || vb->is_null()) continue;
                        table[category_of(*va)][category_of(*vb)] += 1.0;
                        cols.insert(category_of(*vb));
                    }
                    if (table.size() < 2 || cols.size() < 2) {
                        notes.push_back("group " + group_label(group) + ": pair " + pair_name +
                                        " skipped: zero variance");
                        continue;
                    }
                    std::vector<std::vector<double>> counts;
                    for (const auto& [rv, row_counts] : table) {
                        std::vector<double> line;
                        for (const std::string& c : cols) {
                            auto it = row_counts.find(c);
                            line.push_back(it == row_counts.end() ? 0.0 : it->second);
                        }
                        counts.push_back(std::move(line));
                    }
                    ChiSquareResult res =
                        chi_square_independence(counts, options.chi_square_alpha);
                    if (res.df < 1) {
                        notes.push_back("group " + group_label(group) + ": pair " + pair_name +
                                        " skipped: degenerate contingency table");
                        continue;
                    }
                    testable = true;
                    std::ostringstream d;
                    d.precision(4);
                    d << "chi-square" << pair_name << " = " << res.statistic
                      << " vs critical " << res.critical;
                    tested.push_back(d.str());
                    if (res.reject_independence) correlated = true;
                }
            }
        }

        if (testable && !correlated) {
            std::string detail;
            for (const std::string& t : tested) {
                if (!detail.empty()) detail += "; ";
                detail += t;
            }
            violations.push_back({"r3", group_label(group), std::nullopt,
                                  "table " + quoted(data.table) + ": group " +
                                      group_label(group) + " shows no correlated pair (" +
                                      detail + ")"});
        }

        // Declared date ordering: every adjacent chain pair must be monotone
        // on every row where both cells exist.
        for (size_t r = 0; r < data.rows.size() && chain.size() >= 2; ++r) {
            for (size_t k = 0; k + 1 < chain.size(); ++k) {
                const Value* va = get_path(data.rows[r], chain[k].names());
                const Value* vb = get_path(data.rows[r], chain[k + 1].names());
                if (!va || !vb || va->is_null() || vb->is_null()) continue;
                auto cmp = compare_values(*va, *vb);
                if (cmp && *cmp > 0)
                    violations.push_back(
                        {"r3", chain[k + 1].dotted(), r,
                         "table " + quoted(data.table) + ": row " + std::to_string(r) + ": " +
                             chain[k].dotted() + " = " + va->to_display() + " is after " +
                             chain[k + 1].dotted() + " = " + vb->to_display() +
                             " but the group declares " + chain[k].dotted() +
                             " <= " + chain[k + 1].dotted()});
            }
        }
    }

    RuleResult result =
        violations.empty() ? RuleResult::pass() : RuleResult::fail(std::move(violations));
    result.notes = std::move(notes);
    return result;
}

RuleResult check_joins(const std::map<std::string, TableData>& tables,
                       const std::vector<JoinConstraint>& joins) {
    std::vector<Violation> violations;

    for (const JoinConstraint& jc : joins) {
        std::string key_desc;
        for (const JoinPair& p : jc.pairs) {
            if (!key_desc.empty()) key_desc += ", ";
            key_desc += jc.left_table + "." + p.left.column.dotted() + " = " + jc.right_table +
                        "." + p.right.column.dotted();
        }

        auto sec_it = tables.find(jc.right_table);
        if (sec_it == tables.end() || sec_it->second.rows.empty()) {
            violations.push_back({"r4", jc.right_table, std::nullopt,
                                  "empty table: " + quoted(jc.right_table) +
                                      " has no rows for the join (" + key_desc + ")"});
            continue;
        }
        auto prim_it = tables.find(jc.left_table);
        if (prim_it == tables.end() || prim_it->second.rows.empty()) {
            violations.push_back({"r4", jc.left_table, std::nullopt,
                                  "empty table: " + quoted(jc.left_table) +
                                      " has no rows for the join (" + key_desc + ")"});
            continue;
        }
        const TableData& prim = prim_it->second;
        const TableData& sec = sec_it->second;

        // One value, post-cast; nullopt when the cell is absent, NULL, or the
        // cast fails (a non-key in every pairing).
        auto keyed = [](const Row& row, const analysis::JoinSide& side) -> std::optional<Value> {
            const Value* v = get_path(row, side.column.names());
            if (!v || v->is_null()) return std::nullopt;
            if (side.cast_type.empty()) return *v;
            return cast_scalar(*v, side.cast_type);
        };

        for (size_t s = 0; s < sec.rows.size(); ++s) {
            bool matched = false;
            for (const Row& p_row : prim.rows) {
                bool all = true;
                for (const JoinPair& pair : jc.pairs) {
                    auto lv = keyed(p_row, pair.left);
                    auto rv = keyed(sec.rows[s], pair.right);
                    auto cmp = lv && rv ? compare_values(*lv, *rv) : std::nullopt;
                    if (!cmp || *cmp != 0) {
                        all = false;
                        break;
                    }
                }
                if (all) {
                    matched = true;
                    break;
                }
            }
            if (matched) continue;

            std::string key_render;
            for (const JoinPair& pair : jc.pairs) {
                if (!key_render.empty()) key_render += ", ";
                const Value* rv = get_path(sec.rows[s], pair.right.column.names());
                key_render += pair.right.column.dotted() + "=" +
                              (rv ? quoted(rv->to_display()) : "(absent)");
            }
            violations.push_back({"r4", jc.right_table + "." + jc.pairs.front().right.column.dotted(),
                                  s,
                                  "table " + quoted(jc.right_table) + " row " + std::to_string(s) +
                                      " key (" + key_render + ") has no matching row in " +
                                      quoted(jc.left_table) + " for the join (" + key_desc + ")"});
        }
    }

    return violations.empty() ? RuleResult::pass() : RuleResult::fail(std::move(violations));
}

std::optional<JudgeVerdict> parse_verdict(std::string_view completion) {
    std::string upper(completion);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    std::replace(upper.begin(), upper.end(), '_', ' ');

    // "NOT PRESENT" and "NOT VALID" both contain shorter tokens, so the
    // longest verdicts are matched first.
    JudgeVerdict v;
    v.reason = trim_copy(completion);
    if (upper.find("NOT PRESENT") != std::string::npos) {
        v.verdict = Verdict::NotPresent;
        return v;
    }
    if (upper.find("NOT VALID") != std::string::npos || upper.find("INVALID") != std::string::npos) {
        v.verdict = Verdict::NotValid;
        return v;
    }
    if (upper.find("VALID") != std::string::npos) {
        v.verdict = Verdict::Valid;
        return v;
    }
    return std::nullopt;
}

RuleResult judge_semantics(const TableData& data, const std::vector<PredPtr>& constraints,
                           Backend* judge, JudgeVerdict* verdict_out, Warnings* warnings) {
    std::vector<Violation> violations;
    std::vector<std::string> notes;
    std::vector<PredPtr> residue;
    bool any_absent = false;
    bool any_not_valid = false;

    for (const PredPtr& c : constraints) {
        if (!c->evaluable) {
            residue.push_back(c);
            continue;
        }
        const std::string rendered = analysis::render_predicate(*c);
        std::vector<const Pred*> cols;
        analysis::collect_columns(*c, cols);

        bool col_present = cols.empty();
        for (const Pred* col : cols)
            if (column_present_anywhere(data.rows, col->column)) {
                col_present = true;
                break;
            }
        if (!col_present) {
            any_absent = true;
            const std::string col_name = cols.front()->column.dotted();
            violations.push_back(
                {"r5", col_name, std::nullopt,
                 data.rows.empty()
                     ? "table " + quoted(data.table) + " has no rows; column " + quoted(col_name) +
                           " constrained by " + rendered + " is absent (NOT PRESENT)"
                     : "table " + quoted(data.table) + ": column " + quoted(col_name) +
                           " constrained by " + rendered + " is absent from the data (NOT PRESENT)"});
            continue;
        }

        const Pred* inner = analysis::innermost_column(*c);
        const std::string col_name = inner ? inner->column.dotted() : "";
        for (size_t i = 0; i < data.rows.size(); ++i) {
            Tri t = evaluate_predicate(data.rows[i], *c);
            if (t == Tri::True) continue;
            any_not_valid = true;
            violations.push_back(
                {"r5", col_name, i,
                 t == Tri::False
                     ? "table " + quoted(data.table) + ": row " + std::to_string(i) +
                           " violates " + rendered
                     : "table " + quoted(data.table) + ": row " + std::to_string(i) +
                           " cannot be shown to satisfy " + rendered +
                           " (missing or NULL operand)"});
        }
    }

    if (!residue.empty()) {
        const std::string residue_text = analysis::render_conjunction(residue);
        if (!judge) {
            if (warnings)
                warnings->push_back("r5: unevaluable constraint(s) skipped, no judge backend "
                                    "configured: " +
                                    residue_text);
            if (violations.empty()) {
                RuleResult r = RuleResult::skipped(
                    "unevaluable constraint(s), no judge backend configured: " + residue_text);
                r.notes = std::move(notes);
                return r;
            }
            notes.push_back("unevaluable constraint(s) skipped (no judge backend): " +
                            residue_text);
        } else if (!violations.empty()) {
            // Deterministic findings already feed the retry; don't spend a call.
            notes.push_back("unevaluable constraint(s) not judged (deterministic violations "
                            "already present): " +
                            residue_text);
        } else {
            Prompt prompt = build_judge_prompt(rows_as_json(data).dump(2), residue_text);
            BackendResult res = judge->complete(BackendRequest{prompt.system, prompt.user});
            if (!res.ok) {
                any_not_valid = true;
                violations.push_back(
                    {"r5", "", std::nullopt, "judge backend error: " + res.error});
            } else if (auto verdict = parse_verdict(res.text)) {
                switch (verdict->verdict) {
                    case Verdict::Valid:
                        notes.push_back("judge accepted: " + residue_text);
                        break;
                    case Verdict::NotValid:
                        any_not_valid = true;
                        violations.push_back({"r5", "", std::nullopt,
                                              "judge: NOT VALID for " + residue_text + " — " +
                                                  clip(verdict->reason, 200)});
                        break;
                    case Verdict::NotPresent:
                        any_absent = true;
                        violations.push_back({"r5", "", std::nullopt,
                                              "judge: NOT PRESENT for " + residue_text + " — " +
                                                  clip(verdict->reason, 200)});
                        break;
                }
            } else {
                any_not_valid = true;
                violations.push_back({"r5", "", std::nullopt,
                                      "unparseable judge verdict: " + quoted(clip(res.text, 120))});
            }
        }
    }

    if (verdict_out) {
        verdict_out->verdict = any_not_valid  ? Verdict::NotValid
                               : any_absent   ? Verdict::NotPresent
                                              : Verdict::Valid;
        verdict_out->reason = violations.empty() ? "every constraint satisfied by every row"
                                                 : violations.front().message;
    }
    RuleResult result =
        violations.empty() ? RuleResult::pass() : RuleResult::fail(std::move(violations));
    result.notes = std::move(notes);
    return result;
}

ValidationReport validate_all(const std::map<std::string, TableData>& tables,
                              const SchemaSet& schemas, const analysis::QueryAnalysis& qa,
                              const std::map<std::string, std::vector<ColumnGroup>>& groups,
                              Backend* judge, Warnings* warnings,
                              const CorrelationOptions& options) {
    std::vector<RuleResult> r1s, r2s, r3s, r5s;
    static const std::vector<ColumnGroup> kNoGroups;

    for (const analysis::TableTarget& target : qa.targets) {
        TableData fallback;
        const TableData* data = nullptr;
        if (auto it = tables.find(target.table); it != tables.end()) {
            data = &it->second;
        } else {
            fallback.table = target.table;
            fallback.schemas = &schemas;
            fallback.schema = target.schema ? target.schema : schemas.message(target.table);
            data = &fallback;
        }
        if (!data->schema || !data->schemas) {
            if (warnings)
                warnings->push_back("validation skipped for " + quoted(target.table) +
                                    ": no schema resolved");
            continue;
        }
        auto [r1, r2] = check_structure(*data);
        r1s.push_back(std::move(r1));
        r2s.push_back(std::move(r2));
        auto git = groups.find(target.table);
        r3s.push_back(
            check_correlation(*data, git == groups.end() ? kNoGroups : git->second, options));
        r5s.push_back(judge_semantics(*data, target.constraints, judge, nullptr, warnings));
    }

    ValidationReport report;
    report.rules.emplace_back("r1", merge_results(std::move(r1s)));
    report.rules.emplace_back("r2", merge_results(std::move(r2s)));
    report.rules.emplace_back("r3", merge_results(std::move(r3s)));
    report.rules.emplace_back("r4", check_joins(tables, analysis.joins));
    report.rules.emplace_back("r5", merge_results(std::move(r5s)));
    return report;
}

}  // namespace sdgen::validation
