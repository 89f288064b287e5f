#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdgen/common.hpp"
#include "sdgen/value.hpp"

namespace sdgen::sql {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct WhenClause {
    ExprPtr when;
    ExprPtr then;
};

/// One flat node type for the whole expression grammar; `kind` selects which
/// members are meaningful. Analysis converts this into its own Predicate IR,
/// so the shape here favors easy construction over strict typing.
struct Expr {
    enum class Kind {
        Literal,    // value
        ColumnRef,  // parts ("a.b.c", alias-qualified until resolution)
        Star,       // parts = optional qualifier for t.*
        Unary,      // op ("NOT", "-"), a
        Binary,     // op ("=", "!=", "<", "<=", ">", ">=", "<>", "AND", "OR",
                    //     "+", "-", "*", "/", "||"), a, b
        Between,    // a BETWEEN b AND c, negated
        InList,     // a IN (list), negated
        Like,       // a LIKE b, negated
        IsNull,     // a IS [NOT] NULL, negated
        Case,       // a = optional operand, whens, b = optional ELSE
        FuncCall,   // name, list = args, distinct
        Cast,       // a AS name, safe for SAFE_CAST
        Opaque,     // text = raw source of an unsupported construct
    };

    Kind kind = Kind::Opaque;
    Value value;
    std::vector<std::string> parts;
    std::string op;
    std::string name;
    std::string text;
    bool negated = false;
    bool safe = false;
    bool distinct = false;
    ExprPtr a, b, c;
    std::vector<ExprPtr> list;
    std::vector<WhenClause> whens;
    int line = 0, col = 0;
};

struct SelectStmt;

struct TableRef {
    std::string table;  // base table name, possibly dotted
    std::shared_ptr<const SelectStmt> subquery;
    std::string alias;

    bool is_base() const { return subquery == nullptr; }
};

struct JoinClause {
    enum class Type { Inner, Left, Right, Full, Cross };
    Type type = Type::Inner;
    TableRef table;
    ExprPtr on;  // null for CROSS / comma joins
};

std::string_view join_type_name(JoinClause::Type t);

struct SelectItem {
    ExprPtr expr;
    std::string alias;
};

struct SelectStmt {
    bool distinct = false;
    std::vector<SelectItem> items;
    std::optional<TableRef> from;
    std::vector<JoinClause> joins;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
    struct OrderItem {
        ExprPtr expr;
        bool desc = false;
    };
    std::vector<OrderItem> order_by;
    std::optional<int64_t> limit;
};

struct FunctionStmt {
    std::string name;
    bool is_public = false;
    std::vector<std::pair<std::string, std::string>> params;  // (name, type)
    std::string returns;
    ExprPtr body;
};

/// Exactly one of `select` / `function` is set. `flagged` lists constructs
/// that were parsed opaquely rather than understood.
struct Statement {
    std::shared_ptr<const SelectStmt> select;
    std::shared_ptr<const FunctionStmt> function;
    Warnings flagged;
};

}  // namespace sdgen::sql
