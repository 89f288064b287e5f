#include "sdgen/context.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "sdgen/backend.hpp"
#include "sdgen/data_io.hpp"

namespace sdgen {
namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_config(const std::string& what) { throw ConfigError(what); }

void check_keys(const ordered_json& j, std::initializer_list<const char*> allowed,
                const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) bad_config(std::string("unknown ") + where + " key '" + it.key() + "'");
    }
}

std::vector<Value> values_from_json(const ordered_json& j, const char* where) {
    if (!j.is_array()) bad_config(std::string(where) + " must be an array");
    std::vector<Value> out;
    for (const auto& e : j) out.push_back(json_to_value(e));
    return out;
}

}  // namespace

ValueSpec ValueSpec::from_json(const ordered_json& j) {
    if (!j.is_object()) bad_config("value spec must be a JSON object");
    check_keys(j, {"literal", "one_of", "range", "generator"}, "value spec");
    if (j.size() != 1) bad_config("value spec needs exactly one of literal/one_of/range/generator");
    ValueSpec spec;
    if (j.contains("literal")) {
        spec.kind = Kind::Literal;
        spec.literal = json_to_value(j["literal"]);
    } else if (j.contains("one_of")) {
        spec.kind = Kind::OneOf;
        spec.one_of = values_from_json(j["one_of"], "one_of");
        if (spec.one_of.empty()) bad_config("one_of must list at least one value");
    } else if (j.contains("range")) {
        const auto& r = j["range"];
        if (!r.is_object()) bad_config("range must be an object");
        check_keys(r, {"lo", "hi", "lo_inclusive", "hi_inclusive"}, "range");
        if (!r.contains("lo") || !r.contains("hi")) bad_config("range needs lo and hi");
        spec.kind = Kind::Range;
        spec.lo = json_to_value(r["lo"]);
        spec.hi = json_to_value(r["hi"]);
        spec.lo_inclusive = r.value("lo_inclusive", true);
        spec.hi_inclusive = r.value("hi_inclusive", true);
    } else {
        const auto& g = j["generator"];
        if (!g.is_object() || g.size() != 1)
            bad_config("generator needs exactly one of incremental/uniform_float/seeded_choice");
        if (g.contains("incremental")) {
            const auto& i = g["incremental"];
            check_keys(i, {"start", "step"}, "incremental");
            spec.kind = Kind::Incremental;
            spec.incremental.start = i.value("start", int64_t{0});
            spec.incremental.step = i.value("step", int64_t{1});
            if (spec.incremental.step == 0) bad_config("incremental step must be nonzero");
        } else if (g.contains("uniform_float")) {
            const auto& u = g["uniform_float"];
            check_keys(u, {"lo", "hi"}, "uniform_float");
            spec.kind = Kind::UniformFloat;
            spec.uniform.lo = u.value("lo", 0.0);
            spec.uniform.hi = u.value("hi", 1.0);
            if (!(spec.uniform.lo < spec.uniform.hi))
                bad_config("uniform_float needs lo < hi");
        } else if (g.contains("seeded_choice")) {
            const auto& c = g["seeded_choice"];
            check_keys(c, {"values", "weights"}, "seeded_choice");
            spec.kind = Kind::SeededChoice;
            spec.choice.values = values_from_json(c.at("values"), "seeded_choice values");
            if (spec.choice.values.empty()) bad_config("seeded_choice needs values");
            if (c.contains("weights")) {
                for (const auto& w : c["weights"]) spec.choice.weights.push_back(w.get<double>());
                if (spec.choice.weights.size() != spec.choice.values.size())
                    bad_config("seeded_choice weights must match values length");
                double total = 0;
                for (double w : spec.choice.weights) {
                    if (w < 0) bad_config("seeded_choice weights must be nonnegative");
                    total += w;
                }
                if (total <= 0) bad_config("seeded_choice weights must sum to a positive value");
            }
        } else {
            bad_config("unknown generator kind");
        }
    }
    return spec;
}

ordered_json ValueSpec::to_json() const {
    ordered_json j;
    switch (kind) {
        case Kind::Literal: j["literal"] = value_to_json(literal); break;
        case Kind::OneOf: {
            auto arr = ordered_json::array();
            for (const auto& v : one_of) arr.push_back(value_to_json(v));
            j["one_of"] = std::move(arr);
            break;
        }
        case Kind::Range: {
            ordered_json r;
            r["lo"] = value_to_json(lo);
            r["hi"] = value_to_json(hi);
            if (!lo_inclusive) r["lo_inclusive"] = false;
            if (!hi_inclusive) r["hi_inclusive"] = false;
            j["range"] = std::move(r);
            break;
        }
        case Kind::Incremental:
            j["generator"]["incremental"] = {{"start", incremental.start},
                                             {"step", incremental.step}};
            break;
        case Kind::UniformFloat:
            j["generator"]["uniform_float"] = {{"lo", uniform.lo}, {"hi", uniform.hi}};
            break;
        case Kind::SeededChoice: {
            ordered_json c;
            auto arr = ordered_json::array();
            for (const auto& v : choice.values) arr.push_back(value_to_json(v));
            c["values"] = std::move(arr);
            if (!choice.weights.empty()) c["weights"] = choice.weights;
            j["generator"]["seeded_choice"] = std::move(c);
            break;
        }
    }
    return j;
}

std::string ValueSpec::describe() const {
    switch (kind) {
        case Kind::Literal: return "= " + literal.to_display();
        case Kind::OneOf: {
            std::vector<std::string> parts;
            for (const auto& v : one_of) parts.push_back(v.to_display());
            return "one of [" + join(parts, ", ") + "]";
        }
        case Kind::Range:
            return (lo_inclusive ? ">= " : "> ") + lo.to_display() + " and " +
                   (hi_inclusive ? "<= " : "< ") + hi.to_display();
        case Kind::Incremental:
            return "incremental from " + std::to_string(incremental.start) + " step " +
                   std::to_string(incremental.step);
        case Kind::UniformFloat:
            return "uniform float in [" + Value(uniform.lo).to_display() + ", " +
                   Value(uniform.hi).to_display() + ")";
        case Kind::SeededChoice: {
            std::vector<std::string> parts;
            for (const auto& v : choice.values) parts.push_back(v.to_display());
            return std::string("seeded choice of [") + join(parts, ", ") + "]" +
                   (choice.weights.empty() ? "" : " (weighted)");
        }
    }
    return "";
}

ContextMap ContextMap::from_json(const ordered_json& j) {
    if (!j.is_object()) bad_config("context map must be a JSON object");
    check_keys(j,
               {"question", "user_criteria", "signals", "row_count", "unique_columns",
                "instances_per_test", "correlations"},
               "context");
    ContextMap ctx;
    if (j.contains("question")) ctx.question = j["question"].get<std::string>();
    if (j.contains("user_criteria")) ctx.user_criteria = j["user_criteria"].get<std::string>();
    if (j.contains("signals")) {
        const auto& s = j["signals"];
        if (!s.is_object()) bad_config("signals must be an object keyed by column path");
        for (auto it = s.begin(); it != s.end(); ++it) {
            ColumnPath::parse(it.key());  // validates the key shape
            ctx.signals[it.key()] = ValueSpec::from_json(it.value());
        }
    }
    if (j.contains("row_count")) {
        if (!j["row_count"].is_number_integer() || j["row_count"].get<int64_t>() <= 0)
            bad_config("row_count must be a positive integer");
        ctx.row_count = static_cast<int>(j["row_count"].get<int64_t>());
    }
    if (j.contains("unique_columns"))
        for (const auto& c : j["unique_columns"])
            ctx.unique_columns.push_back(ColumnPath::parse(c.get<std::string>()));
    if (j.contains("instances_per_test")) {
        if (!j["instances_per_test"].is_number_integer() ||
            j["instances_per_test"].get<int64_t>() <= 0)
            bad_config("instances_per_test must be a positive integer");
        ctx.instances_per_test = static_cast<int>(j["instances_per_test"].get<int64_t>());
    }
    if (j.contains("correlations")) {
        for (const auto& h : j["correlations"]) {
            check_keys(h, {"columns", "note"}, "correlation hint");
            CorrelationHint hint;
            if (!h.contains("columns") || !h["columns"].is_array() || h["columns"].size() < 2)
                bad_config("correlation hint needs a columns array with at least two entries");
            for (const auto& c : h["columns"])
                hint.columns.push_back(ColumnPath::parse(c.get<std::string>()));
            hint.note = h.value("note", std::string());
            ctx.correlations.push_back(std::move(hint));
        }
    }
    return ctx;
}

ContextMap ContextMap::from_text(std::string_view json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const ordered_json::parse_error& e) {
        bad_config(std::string("context map is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

ordered_json ContextMap::to_json() const {
    ordered_json j = ordered_json::object();
    if (!question.empty()) j["question"] = question;
    if (!user_criteria.empty()) j["user_criteria"] = user_criteria;
    if (!signals.empty()) {
        ordered_json s = ordered_json::object();
        for (const auto& [k, v] : signals) s[k] = v.to_json();
        j["signals"] = std::move(s);
    }
    if (row_count > 0) j["row_count"] = row_count;
    if (!unique_columns.empty()) {
        auto arr = ordered_json::array();
        for (const auto& c : unique_columns) arr.push_back(c.dotted());
        j["unique_columns"] = std::move(arr);
    }
    if (instances_per_test != 1) j["instances_per_test"] = instances_per_test;
    if (!correlations.empty()) {
        auto arr = ordered_json::array();
        for (const auto& h : correlations) {
            ordered_json o;
            auto cols = ordered_json::array();
            for (const auto& c : h.columns) cols.push_back(c.dotted());
            o["columns"] = std::move(cols);
            if (!h.note.empty()) o["note"] = h.note;
            arr.push_back(std::move(o));
        }
        j["correlations"] = std::move(arr);
    }
    return j;
}

namespace {

FieldDef* mutable_field(SchemaSet& set, const SchemaDef& root, const ColumnPath& path) {
    SchemaDef* cur = set.message(root.name);
    if (!cur) return nullptr;
    for (size_t i = 0; i < path.segments.size(); ++i) {
        FieldDef* f = cur->find_field(path.segments[i].name);
        if (!f) return nullptr;
        if (i + 1 == path.segments.size()) return f;
        if (!f->is_nested() || !f->nested().resolved) return nullptr;
        cur = set.message(f->nested().message);
        if (!cur) return nullptr;
    }
    return nullptr;
}

}  // namespace

void merge_annotations(SchemaSet& set, const SchemaDef& root,
                       const std::map<std::string, std::string>& docs, Warnings* warnings) {
    for (const auto& [key, text] : docs) {
        ColumnPath path;
        try {
            path = ColumnPath::parse(key);
        } catch (const ParseError&) {
            if (warnings) warnings->push_back("annotation key '" + key + "' is not a column path");
            continue;
        }
        FieldDef* f = mutable_field(set, root, path);
        if (!f) {
            if (warnings)
                warnings->push_back("annotation key '" + key + "' does not resolve in schema '" +
                              root.name + "'");
            continue;
        }
        f->annotation = text;  // docs override inline comments
        f->machine_annotation = false;
    }
}

namespace {

std::string annotation_stub(const FieldDef& f) {
    std::string type = f.type_name();
    if (!type.empty()) type[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(type[0])));
    return type + " field " + f.name;
}

/// Messages reachable from root through resolved nested references, in
/// first-discovery order, root first.
std::vector<SchemaDef*> reachable_messages(SchemaSet& set, const SchemaDef& root) {
    std::vector<SchemaDef*> out;
    std::set<std::string> seen;
    std::vector<std::string> queue{root.name};
    while (!queue.empty()) {
        std::string name = queue.front();
        queue.erase(queue.begin());
        if (!seen.insert(name).second) continue;
        SchemaDef* m = set.message(name);
        if (!m) continue;
        out.push_back(m);
        for (const auto& f : m->fields)
            if (f.is_nested() && f.nested().resolved) queue.push_back(f.nested().message);
    }
    return out;
}

}  // namespace

void fill_annotations(SchemaSet& set, const SchemaDef& root, Backend& backend,
                      Warnings* warnings) {
    for (SchemaDef* msg : reachable_messages(set, root)) {
        for (FieldDef& f : msg->fields) {
            if (!f.annotation.empty()) continue;
            if (backend.kind() == "deterministic") {
                f.annotation = annotation_stub(f);
                f.machine_annotation = true;
                continue;
            }
            BackendRequest req;
            req.system =
                "You document database schema fields. Reply with one short plain-text "
                "sentence describing the field.";
            req.user = "Message: " + msg->name + "\nField: " + f.name +
                       "\nType: " + f.type_name() + (f.repeated ? " (repeated)" : "") +
                       "\nWrite a one-line description of this field.";
            BackendResult res = backend.complete(req);
            if (!res.ok || trim(res.text).empty()) {
                if (warnings)
                    warnings->push_back("annotation backend failed for " + msg->name + "." + f.name +
                                  (res.error.empty() ? "" : ": " + res.error));
                continue;
            }
            f.annotation = trim(res.text);
            f.machine_annotation = true;
        }
    }
}

namespace {

bool is_dateish(const FieldDef& f) {
    return f.is_scalar() && (f.scalar() == Scalar::Date || f.scalar() == Scalar::Timestamp);
}

std::string date_chain_note(const std::vector<ColumnPath>& members) {
    std::vector<std::string> parts;
    for (const auto& m : members) parts.push_back(m.dotted());
    return "dates must be mutually consistent: " + join(parts, " <= ");
}

std::vector<std::string> annotation_keywords(const std::string& annotation) {
    static const std::set<std::string> kStop = {
        "field",   "this",  "that",  "with",  "from",    "value",     "values",
        "data",    "column", "columns", "int64", "float64", "bool",     "string",
        "bytes",   "date",  "timestamp", "enum", "repeated", "machine", "generated",
        "record",  "table", "when",  "each",  "used",     "uses",      "into",
        "their",   "have",  "has",   "are",   "the",      "for",       "and"};
    std::vector<std::string> out;
    std::string word;
    for (char c : annotation + " ") {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!word.empty()) {
            if (word.size() >= 4 && !kStop.count(word)) out.push_back(word);
            word.clear();
        }
    }
    return out;
}

}  // namespace

std::vector<ColumnPath> parse_date_chain(const std::string& note) {
    if (note.find(" <= ") == std::string::npos) return {};
    std::string tail = note;
    if (size_t colon = note.rfind(": "); colon != std::string::npos) tail = note.substr(colon + 2);
    std::vector<ColumnPath> chain;
    size_t at = 0;
    while (at <= tail.size()) {
        size_t next = tail.find(" <= ", at);
        std::string token = trim(next == std::string::npos ? tail.substr(at)
                                                           : tail.substr(at, next - at));
        if (token.empty()) return {};
        // Chain members must look like column references; a numeric or
        // quoted bound means the note is a range, not an ordering chain.
        char head = token[0];
        if (!std::isalpha(static_cast<unsigned char>(head)) && head != '_') return {};
        try {
            chain.push_back(ColumnPath::parse(token));
        } catch (const ParseError&) {
            return {};
        }
        if (next == std::string::npos) break;
        at = next + 4;
    }
    return chain.size() >= 2 ? chain : std::vector<ColumnPath>{};
}

std::vector<ColumnGroup> group_columns(const SchemaSet& set, const SchemaDef& root,
                                       const std::vector<CorrelationHint>& hints,
                                       Warnings* warnings) {
    return group_columns(root, enumerate_columns(set, root), hints, warnings);
}

std::vector<ColumnGroup> group_columns(const SchemaDef& root,
                                       const std::vector<ColumnInfo>& columns,
                                       const std::vector<CorrelationHint>& hints,
                                       Warnings* warnings) {
    std::map<ColumnPath, const FieldDef*> leaf_of;
    std::vector<ColumnPath> order;
    for (const auto& c : columns) {
        leaf_of[c.path] = c.leaf;
        order.push_back(c.path);
    }
    std::set<ColumnPath> unclaimed(order.begin(), order.end());

    std::vector<ColumnGroup> groups;
    auto push_group = [&](std::vector<ColumnPath> members, std::string note) {
        // Oversized hinted groups split into chunks that keep the note.
        for (size_t at = 0; at < members.size(); at += kMaxGroupSize) {
            ColumnGroup g;
            size_t end = std::min(members.size(), at + kMaxGroupSize);
            g.members.assign(members.begin() + at, members.begin() + end);
            g.correlation_note = note;
            groups.push_back(std::move(g));
        }
    };

    // 1. User hints, in the order given.
    for (const auto& hint : hints) {
        std::vector<ColumnPath> members;
        for (const auto& col : hint.columns) {
            if (!leaf_of.count(col)) {
                if (warnings)
                    warnings->push_back("correlation hint column '" + col.dotted() +
                                  "' is not a generatable column of " + root.name);
                continue;
            }
            if (!unclaimed.count(col)) {
                if (warnings)
                    warnings->push_back("correlation hint column '" + col.dotted() +
                                  "' already belongs to an earlier group");
                continue;
            }
            unclaimed.erase(col);
            members.push_back(col);
        }
        if (members.empty()) continue;
        std::string note = hint.note;
        if (note.empty()) {
            bool all_dates = std::all_of(members.begin(), members.end(),
                                         [&](const ColumnPath& m) { return is_dateish(*leaf_of[m]); });
            note = all_dates ? date_chain_note(members)
                             : "values in this group should be mutually consistent";
        }
        push_group(std::move(members), std::move(note));
    }

    // 2. Shared leaf-name prefix: names with >= 2 underscore tokens bucket on
    //    the first token; buckets of >= 2 unclaimed columns group together.
    std::map<std::string, std::vector<ColumnPath>> prefix_buckets;
    for (const auto& col : order) {
        if (!unclaimed.count(col)) continue;
        auto tokens = split(col.leaf(), '_');
        if (tokens.size() >= 2 && !tokens[0].empty()) prefix_buckets[tokens[0]].push_back(col);
    }
    for (auto& [prefix, members] : prefix_buckets) {
        if (members.size() < 2) continue;
        for (const auto& m : members) unclaimed.erase(m);
        bool all_dates = std::all_of(members.begin(), members.end(),
                                     [&](const ColumnPath& m) { return is_dateish(*leaf_of[m]); });
        std::string note = all_dates
                               ? date_chain_note(members)
                               : "columns share the '" + prefix +
                                     "' prefix and should be mutually consistent";
        push_group(std::move(members), std::move(note));
    }

    // 3. Annotation keyword match on hand-written annotations.
    std::map<std::string, std::vector<ColumnPath>> keyword_buckets;
    for (const auto& col : order) {
        if (!unclaimed.count(col)) continue;
        const FieldDef* f = leaf_of[col];
        if (f->annotation.empty() || f->machine_annotation) continue;
        std::set<std::string> seen;
        for (const auto& kw : annotation_keywords(f->annotation))
            if (seen.insert(kw).second) keyword_buckets[kw].push_back(col);
    }
    for (auto& [kw, members] : keyword_buckets) {
        std::vector<ColumnPath> still;
        for (const auto& m : members)
            if (unclaimed.count(m)) still.push_back(m);
        if (still.size() < 2) continue;
        for (const auto& m : still) unclaimed.erase(m);
        bool all_dates = std::all_of(still.begin(), still.end(),
                                     [&](const ColumnPath& m) { return is_dateish(*leaf_of[m]); });
        std::string note = all_dates ? date_chain_note(still)
                                     : "annotations mention '" + kw +
                                           "'; values should be mutually consistent";
        push_group(std::move(still), std::move(note));
    }

    // 4. Everything else packs in declaration order.
    std::vector<ColumnPath> rest;
    for (const auto& col : order)
        if (unclaimed.count(col)) rest.push_back(col);
    if (!rest.empty()) push_group(std::move(rest), "");

    return groups;
}

}  // namespace sdgen
