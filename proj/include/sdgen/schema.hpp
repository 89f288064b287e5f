#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdgen/common.hpp"

namespace sdgen {

enum class Scalar { Int64, Float64, Bool, String, Bytes, Date, Timestamp };

std::string_view scalar_keyword(Scalar s);
std::optional<Scalar> scalar_from_keyword(std::string_view kw);

/// Enum-typed field; carries the declared type name and its allowed values
/// (copied from the EnumDef at link time).
struct EnumKind {
    std::string type_name;
    std::vector<std::string> values;
    friend bool operator==(const EnumKind&, const EnumKind&) = default;
};

/// Reference to another message. `resolved` is set by SchemaSet::link();
/// unresolved references survive parsing and fail only when generation
/// actually needs them.
struct NestedKind {
    std::string message;
    bool resolved = false;
    friend bool operator==(const NestedKind&, const NestedKind&) = default;
};

using FieldKind = std::variant<Scalar, EnumKind, NestedKind>;

struct FieldDef {
    std::string name;
    FieldKind kind = Scalar::String;
    bool repeated = false;
    bool deprecated = false;
    std::string annotation;
    bool machine_annotation = false;  // annotation was auto-filled, not authored
    int number = 0;  // 0 = not declared

    bool is_scalar() const { return std::holds_alternative<Scalar>(kind); }
    bool is_enum() const { return std::holds_alternative<EnumKind>(kind); }
    bool is_nested() const { return std::holds_alternative<NestedKind>(kind); }
    Scalar scalar() const { return std::get<Scalar>(kind); }
    const EnumKind& enum_kind() const { return std::get<EnumKind>(kind); }
    const NestedKind& nested() const { return std::get<NestedKind>(kind); }
    /// Type name as written in the DSL ("int64", "Currency", ...).
    std::string type_name() const;
};

struct SchemaDef {
    std::string name;
    std::vector<FieldDef> fields;
    std::string annotation;

    const FieldDef* find_field(std::string_view name) const;
    FieldDef* find_field(std::string_view name);
};

struct EnumDef {
    std::string name;
    std::vector<std::string> values;
    std::string annotation;
};

struct PathSegment {
    std::string name;
    int index = -1;  // -1 = no element index

    friend bool operator==(const PathSegment&, const PathSegment&) = default;
    friend auto operator<=>(const PathSegment&, const PathSegment&) = default;
};

/// Dotted column path relative to a root message, e.g.
/// private_info.running_balance.currency.
struct ColumnPath {
    std::vector<PathSegment> segments;

    ColumnPath() = default;
    explicit ColumnPath(std::vector<PathSegment> segs) : segments(std::move(segs)) {}

    static ColumnPath of(std::initializer_list<std::string> names);
    /// Parses "a.b[2].c"; throws ParseError on malformed input.
    static ColumnPath parse(std::string_view dotted);

    std::string dotted() const;
    std::vector<std::string> names() const;
    bool empty() const { return segments.empty(); }
    size_t size() const { return segments.size(); }
    const std::string& leaf() const { return segments.back().name; }
    ColumnPath parent() const;
    ColumnPath child(std::string name) const;

    friend bool operator==(const ColumnPath&, const ColumnPath&) = default;
    friend auto operator<=>(const ColumnPath&, const ColumnPath&) = default;
};

/// All messages and enums loaded from one or more schema files. Message
/// storage is pointer-stable, so SchemaDef* handles stay valid across adds.
class SchemaSet {
public:
    SchemaSet() = default;
    SchemaSet(SchemaSet&&) = default;
    SchemaSet& operator=(SchemaSet&&) = default;
    SchemaSet(const SchemaSet&) = delete;
    SchemaSet& operator=(const SchemaSet&) = delete;

    SchemaDef& add_message(SchemaDef def);  // throws ParseError on duplicate name
    EnumDef& add_enum(EnumDef def);

    const SchemaDef* message(std::string_view name) const;
    SchemaDef* message(std::string_view name);
    const EnumDef* enum_def(std::string_view name) const;

    std::vector<const SchemaDef*> messages() const;  // declaration order
    std::vector<const EnumDef*> enums() const;

    /// Resolves every pending type reference: enum names become EnumKind,
    /// message names get resolved=true. Returns one description per
    /// reference that stayed unresolved ("Msg.field -> MissingType").
    std::vector<std::string> link();

private:
    std::vector<std::unique_ptr<SchemaDef>> messages_;
    std::vector<std::unique_ptr<EnumDef>> enums_;
};

/// Walks `path` through nested kinds starting at `root`. Throws Error naming
/// the first unresolvable segment, a stale nested reference, or a path that
/// continues past a leaf.
const FieldDef& resolve_path(const SchemaSet& set, const SchemaDef& root, const ColumnPath& path);

struct ColumnInfo {
    ColumnPath path;
    const FieldDef* leaf = nullptr;
};

/// Enumerates every leaf (scalar or enum) column path under `root` in
/// declaration order. Recursive message chains are cut once a message name
/// would appear more than `recursion_cap` times on the descent path.
/// Deprecated and unresolved-reference subtrees are skipped unless
/// `include_deprecated` is set (unresolved are always skipped).
std::vector<ColumnInfo> enumerate_columns(const SchemaSet& set, const SchemaDef& root,
                                          int recursion_cap = 3, bool include_deprecated = false);

}  // namespace sdgen
