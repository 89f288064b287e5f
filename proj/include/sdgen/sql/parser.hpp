#pragma once

#include <string_view>

#include "sdgen/sql/ast.hpp"

namespace sdgen::sql {

struct Token {
    enum class Type { Ident, Number, String, Op, End };
    Type type = Type::End;
    std::string text;  // idents keep original case; strings are unquoted
    int line = 1, col = 1;
    size_t begin = 0, end = 0;  // byte span in the source

    bool is_kw(std::string_view kw) const { return type == Type::Ident && iequals(text, kw); }
    bool is_op(std::string_view o) const { return type == Type::Op && text == o; }
};

/// Tokenizes one SQL statement. Comments (`--` and `/* */`) are skipped.
/// Throws ParseError on malformed lexemes.
std::vector<Token> lex_sql(std::string_view text);

/// Parses one SELECT or CREATE FUNCTION statement. Unsupported constructs
/// are kept as Opaque expressions and recorded in Statement::flagged; real
/// syntax errors throw ParseError with position.
Statement parse_sql(std::string_view text);

}  // namespace sdgen::sql
