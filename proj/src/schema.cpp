#include "sdgen/schema.hpp"

#include <algorithm>
#include <map>

namespace sdgen {

std::string_view scalar_keyword(Scalar s) {
    switch (s) {
        case Scalar::Int64: return "int64";
        case Scalar::Float64: return "float64";
        case Scalar::Bool: return "bool";
        case Scalar::String: return "string";
        case Scalar::Bytes: return "bytes";
        case Scalar::Date: return "date";
        case Scalar::Timestamp: return "timestamp";
    }
    return "string";
}

std::optional<Scalar> scalar_from_keyword(std::string_view kw) {
    static const std::pair<std::string_view, Scalar> table[] = {
        {"int64", Scalar::Int64},   {"float64", Scalar::Float64},
        {"bool", Scalar::Bool},     {"string", Scalar::String},
        {"bytes", Scalar::Bytes},   {"date", Scalar::Date},
        {"timestamp", Scalar::Timestamp},
    };
    for (const auto& [name, s] : table)
        if (name == kw) return s;
    return std::nullopt;
}

std::string FieldDef::type_name() const {
    struct Namer {
        std::string operator()(Scalar s) const { return std::string(scalar_keyword(s)); }
        std::string operator()(const EnumKind& e) const { return e.type_name; }
        std::string operator()(const NestedKind& n) const { return n.message; }
    };
    return std::visit(Namer{}, kind);
}

const FieldDef* SchemaDef::find_field(std::string_view fname) const {
    for (const auto& f : fields)
        if (f.name == fname) return &f;
    return nullptr;
}

FieldDef* SchemaDef::find_field(std::string_view fname) {
    for (auto& f : fields)
        if (f.name == fname) return &f;
    return nullptr;
}

ColumnPath ColumnPath::of(std::initializer_list<std::string> names) {
    ColumnPath p;
    for (const auto& n : names) p.segments.push_back({n, -1});
    return p;
}

ColumnPath ColumnPath::parse(std::string_view dotted) {
    ColumnPath p;
    if (dotted.empty()) throw ParseError("empty column path");
    for (std::string& part : split(std::string(dotted), '.')) {
        PathSegment seg;
        auto bracket = part.find('[');
        if (bracket != std::string::npos) {
            if (part.back() != ']') throw ParseError("malformed index in path segment: " + part);
            std::string idx = part.substr(bracket + 1, part.size() - bracket - 2);
            seg.name = part.substr(0, bracket);
            try {
                seg.index = std::stoi(idx);
            } catch (const std::exception&) {
                throw ParseError("malformed index in path segment: " + part);
            }
            if (seg.index < 0) throw ParseError("negative index in path segment: " + part);
        } else {
            seg.name = part;
        }
        if (seg.name.empty()) throw ParseError("empty segment in column path: " + std::string(dotted));
        p.segments.push_back(std::move(seg));
    }
    return p;
}

std::string ColumnPath::dotted() const {
    std::string out;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (i) out += '.';
        out += segments[i].name;
        if (segments[i].index >= 0) out += "[" + std::to_string(segments[i].index) + "]";
    }
    return out;
}

std::vector<std::string> ColumnPath::names() const {
    std::vector<std::string> out;
    out.reserve(segments.size());
    for (const auto& s : segments) out.push_back(s.name);
    return out;
}

ColumnPath ColumnPath::parent() const {
    ColumnPath p = *this;
    if (!p.segments.empty()) p.segments.pop_back();
    return p;
}

ColumnPath ColumnPath::child(std::string name) const {
    ColumnPath p = *this;
    p.segments.push_back({std::move(name), -1});
    return p;
}

SchemaDef& SchemaSet::add_message(SchemaDef def) {
    if (message(def.name)) throw ParseError("duplicate message name: " + def.name);
    messages_.push_back(std::make_unique<SchemaDef>(std::move(def)));
    return *messages_.back();
}

EnumDef& SchemaSet::add_enum(EnumDef def) {
    if (enum_def(def.name)) throw ParseError("duplicate enum name: " + def.name);
    enums_.push_back(std::make_unique<EnumDef>(std::move(def)));
    return *enums_.back();
}

const SchemaDef* SchemaSet::message(std::string_view name) const {
    for (const auto& m : messages_)
        if (m->name == name) return m.get();
    return nullptr;
}

SchemaDef* SchemaSet::message(std::string_view name) {
    for (const auto& m : messages_)
        if (m->name == name) return m.get();
    return nullptr;
}

const EnumDef* SchemaSet::enum_def(std::string_view name) const {
    for (const auto& e : enums_)
        if (e->name == name) return e.get();
    return nullptr;
}

std::vector<const SchemaDef*> SchemaSet::messages() const {
    std::vector<const SchemaDef*> out;
    out.reserve(messages_.size());
    for (const auto& m : messages_) out.push_back(m.get());
    return out;
}

std::vector<const EnumDef*> SchemaSet::enums() const {
    std::vector<const EnumDef*> out;
    out.reserve(enums_.size());
    for (const auto& e : enums_) out.push_back(e.get());
    return out;
}

std::vector<std::string> SchemaSet::link() {
    std::vector<std::string> unresolved;
    for (const auto& m : messages_) {
        for (auto& f : m->fields) {
            auto* ref = std::get_if<NestedKind>(&f.kind);
            if (!ref || ref->resolved) continue;
            if (const EnumDef* e = enum_def(ref->message)) {
                f.kind = EnumKind{e->name, e->values};
            } else if (message(ref->message)) {
                ref->resolved = true;
            } else {
                unresolved.push_back(m->name + "." + f.name + " -> " + ref->message);
            }
        }
    }
    return unresolved;
}

const FieldDef& resolve_path(const SchemaSet& set, const SchemaDef& root, const ColumnPath& path) {
    if (path.empty()) throw Error("empty column path");
    const SchemaDef* cur = &root;
    for (size_t i = 0; i < path.segments.size(); ++i) {
        const std::string& seg = path.segments[i].name;
        const FieldDef* f = cur->find_field(seg);
        if (!f)
            throw Error("unresolvable segment '" + seg + "' in path " + path.dotted() + " (message " +
                        cur->name + ")");
        if (i + 1 == path.segments.size()) return *f;
        if (!f->is_nested())
            throw Error("path " + path.dotted() + " continues past leaf field '" + seg + "'");
        const NestedKind& n = f->nested();
        const SchemaDef* next = set.message(n.message);
        if (!n.resolved || !next)
            throw Error("path " + path.dotted() + " crosses unresolved reference '" + seg + " -> " +
                        n.message + "'");
        cur = next;
    }
    throw Error("empty column path");
}

namespace {

void enumerate_into(const SchemaSet& set, const SchemaDef& msg, const ColumnPath& prefix,
                    std::map<std::string, int>& visits, int recursion_cap, bool include_deprecated,
                    std::vector<ColumnInfo>& out) {
    for (const auto& f : msg.fields) {
        if (f.deprecated && !include_deprecated) continue;
        if (f.is_scalar() || f.is_enum()) {
            out.push_back({prefix.child(f.name), &f});
            continue;
        }
        const NestedKind& n = f.nested();
        const SchemaDef* child = n.resolved ? set.message(n.message) : nullptr;
        if (!child) continue;
        int& count = visits[child->name];
        if (count >= recursion_cap) continue;
        ++count;
        enumerate_into(set, *child, prefix.child(f.name), visits, recursion_cap, include_deprecated,
                       out);
        --count;
    }
}

}  // namespace

std::vector<ColumnInfo> enumerate_columns(const SchemaSet& set, const SchemaDef& root,
                                          int recursion_cap, bool include_deprecated) {
    std::vector<ColumnInfo> out;
    std::map<std::string, int> visits;
    visits[root.name] = 1;
    enumerate_into(set, root, ColumnPath{}, visits, recursion_cap, include_deprecated, out);
    return out;
}

}  // namespace sdgen
