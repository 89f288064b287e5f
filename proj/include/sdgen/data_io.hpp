#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdgen/schema.hpp"
#include "sdgen/value.hpp"

namespace sdgen {

enum class DataFormat { TextprotoLike, Json };

std::string_view format_name(DataFormat f);
std::optional<DataFormat> format_from_name(std::string_view name);

/// Renders rows in schema declaration order. Textproto-like mode emits one
/// `name: value` line per scalar, `name { ... }` blocks for records, repeated
/// fields as repeated lines, and a `---` line between rows. JSON mode emits an
/// array of row objects. Deprecated fields are never emitted; null cells are
/// skipped. Throws Error if a row holds a column absent from the schema.
std::string serialize_rows(const SchemaSet& set, const SchemaDef& schema,
                           const std::vector<Row>& rows, DataFormat fmt);

/// Strips a leading markdown code fence (with optional language tag) and its
/// closing fence; returns the input unchanged when no fence is present.
std::string strip_markdown_fences(std::string_view text);

/// Structural parse of backend output: JSON (array of row objects or a single
/// object) or textproto-like text, fences stripped first. Values come back
/// untyped against any schema: quoted text as Str, bare words as EnumVal,
/// numbers as Int/Float. Lines that fit neither syntax are skipped and
/// reported through `fragments`. Throws ParseError when nothing parses.
std::vector<Row> parse_data_text(std::string_view text, Warnings* fragments = nullptr);

/// Schema-guided coercion of a structurally parsed row: date strings become
/// CivilDate, epoch ints become Timestamp, bare or quoted enum names become
/// EnumVal, numeric strings become numbers, single values of repeated fields
/// are wrapped into lists. Values that cannot be coerced and columns unknown
/// to the schema are kept as parsed (later validation flags them).
Row coerce_row(const SchemaSet& set, const SchemaDef& schema, const Row& raw);

/// The per-cell core of coerce_row: coerces one value toward the field's
/// kind, returning the input unchanged when no coercion applies.
Value coerce_field_value(const SchemaSet& set, const FieldDef& field, const Value& v);

/// True when the (typically already coerced) value structurally fits the
/// field: matching scalar type (ints pass for float64), a declared enum
/// member, a record for nested references, a list of fitting elements for
/// repeated fields. Null always fits — absence is the structural validator's
/// concern, not a type mismatch.
bool value_fits_field(const SchemaSet& set, const FieldDef& field, const Value& v);

/// Value <-> JSON mapping used by the JSON data format and report emission.
/// Dates map to "YYYY-MM-DD" strings, timestamps to epoch-second numbers,
/// enums to their names.
nlohmann::ordered_json value_to_json(const Value& v);
Value json_to_value(const nlohmann::ordered_json& j);

}  // namespace sdgen
