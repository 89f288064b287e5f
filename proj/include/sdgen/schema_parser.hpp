#pragma once

#include <string>
#include <string_view>

#include "sdgen/schema.hpp"

namespace sdgen {

/// Parses schema-DSL source into `set` without linking. Message and enum
/// declarations may nest inside messages; nested declarations are hoisted
/// into the set under their simple name. Throws ParseError with position.
void parse_schema_text(SchemaSet& set, std::string_view text);

/// Parses one source text into a fresh set and links references. Unresolved
/// references are kept (marker on the field), not rejected.
SchemaSet parse_schema(std::string_view text);

/// Canonical form: messages in declaration order, then enums; two-space
/// indent; annotations as `//` lines above their item. Re-parsing the output
/// yields an equivalent set, and serializing that is byte-identical.
std::string serialize_schema(const SchemaSet& set);

}  // namespace sdgen
