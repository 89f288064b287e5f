#include <map>

#include "sdgen/sql/parser.hpp"

namespace sdgen::sql {

namespace {

bool is_reserved_after_expr(const Token& t) {
    if (t.type != Token::Type::Ident) return true;
    static const char* kw[] = {"FROM",  "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT", "UNION",
                               "JOIN",  "INNER", "LEFT",  "RIGHT",  "FULL",  "CROSS", "ON",
                               "USING", "AND",   "OR",    "NOT",    "AS",    "WHEN",  "THEN",
                               "ELSE",  "END",   "ASC",   "DESC",   "BETWEEN", "IN",  "LIKE",
                               "IS",    "BY",    "ALL",   "DISTINCT"};
    for (const char* k : kw)
        if (iequals(t.text, k)) return true;
    return false;
}

class Parser {
public:
    Parser(std::string_view src) : src_(src), toks_(lex_sql(src)) {}

    Statement run() {
        Statement stmt;
        if (peek().is_kw("CREATE")) {
            stmt.function = parse_function();
        } else if (peek().is_kw("SELECT") || peek().is_kw("WITH")) {
            stmt.select = parse_select_with_ctes();
        } else {
            fail("expected SELECT, WITH, or CREATE FUNCTION");
        }
        if (peek().is_op(";")) take();
        if (peek().type != Token::Type::End) fail("trailing input after statement");
        stmt.flagged = std::move(flagged_);
        return stmt;
    }

private:
    std::string_view src_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    Warnings flagged_;
    std::vector<std::map<std::string, std::shared_ptr<const SelectStmt>>> cte_scopes_;

    const Token& peek(size_t ahead = 0) const {
        size_t p = pos_ + ahead;
        return toks_[std::min(p, toks_.size() - 1)];
    }
    Token take() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string got = t.type == Token::Type::End ? "<end>" : t.text;
        throw ParseError(msg + " (got '" + got + "')", t.line, t.col);
    }

    void expect_op(std::string_view op) {
        if (!peek().is_op(op)) fail("expected '" + std::string(op) + "'");
        take();
    }

    void expect_kw(std::string_view kw) {
        if (!peek().is_kw(kw)) fail("expected " + std::string(kw));
        take();
    }

    std::string expect_ident() {
        if (peek().type != Token::Type::Ident) fail("expected identifier");
        return take().text;
    }

    std::shared_ptr<Expr> node(Expr::Kind kind) const {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->line = peek().line;
        e->col = peek().col;
        return e;
    }

    /// Source text from token index `from` up to (not including) current.
    std::string raw_since(size_t from) const {
        size_t b = toks_[from].begin;
        size_t e = pos_ > from ? toks_[pos_ - 1].end : b;
        return std::string(src_.substr(b, e - b));
    }

    void skip_balanced_parens() {
        expect_op("(");
        int depth = 1;
        while (depth > 0) {
            if (peek().type == Token::Type::End) fail("unbalanced parentheses");
            if (peek().is_op("(")) ++depth;
            if (peek().is_op(")")) --depth;
            take();
        }
    }

    const std::shared_ptr<const SelectStmt>* find_cte(const std::string& name) const {
        for (auto it = cte_scopes_.rbegin(); it != cte_scopes_.rend(); ++it) {
            auto found = it->find(to_lower(name));
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    // --- statements ---------------------------------------------------------

    std::shared_ptr<const FunctionStmt> parse_function() {
        expect_kw("CREATE");
        auto fn = std::make_shared<FunctionStmt>();
        if (peek().is_kw("PUBLIC")) {
            take();
            fn->is_public = true;
        }
        if (peek().is_kw("TEMP") || peek().is_kw("TEMPORARY")) {
            take();
            flagged_.push_back("TEMP function treated as ordinary function");
        }
        expect_kw("FUNCTION");
        fn->name = expect_ident();
        expect_op("(");
        while (!peek().is_op(")")) {
            std::string pname = expect_ident();
            std::string ptype = expect_ident();
            fn->params.emplace_back(pname, ptype);
            if (peek().is_op(",")) take();
        }
        take();  // )
        expect_kw("RETURNS");
        fn->returns = expect_ident();
        expect_kw("AS");
        expect_op("(");
        fn->body = parse_expr();
        expect_op(")");
        return fn;
    }

    std::shared_ptr<const SelectStmt> parse_select_with_ctes() {
        cte_scopes_.emplace_back();
        if (peek().is_kw("WITH")) {
            take();
            while (true) {
                std::string name = expect_ident();
                expect_kw("AS");
                expect_op("(");
                auto body = parse_select_with_ctes();
                expect_op(")");
                cte_scopes_.back()[to_lower(name)] = std::move(body);
                if (peek().is_op(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        auto sel = parse_select();
        cte_scopes_.pop_back();
        return sel;
    }

    std::shared_ptr<const SelectStmt> parse_select() {
        expect_kw("SELECT");
        auto sel = std::make_shared<SelectStmt>();
        if (peek().is_kw("DISTINCT")) {
            take();
            sel->distinct = true;
        } else if (peek().is_kw("ALL")) {
            take();
        }
        while (true) {
            SelectItem item;
            item.expr = parse_expr();
            if (peek().is_kw("AS")) {
                take();
                item.alias = expect_ident();
            } else if (!is_reserved_after_expr(peek()) && !peek().is_op(",")) {
                item.alias = expect_ident();
            }
            sel->items.push_back(std::move(item));
            if (peek().is_op(",")) {
                take();
                continue;
            }
            break;
        }
        if (peek().is_kw("FROM")) {
            take();
            sel->from = parse_from_item();
            while (true) {
                if (peek().is_op(",")) {
                    take();
                    JoinClause j;
                    j.type = JoinClause::Type::Cross;
                    j.table = parse_from_item();
                    sel->joins.push_back(std::move(j));
                    continue;
                }
                auto type = peek_join_type();
                if (!type) break;
                JoinClause j;
                j.type = *type;
                j.table = parse_from_item();
                if (peek().is_kw("ON")) {
                    take();
                    j.on = parse_expr();
                } else if (peek().is_kw("USING")) {
                    size_t start = pos_;
                    take();
                    skip_balanced_parens();
                    flagged_.push_back("USING clause treated opaquely: " + raw_since(start));
                } else if (j.type != JoinClause::Type::Cross) {
                    fail("expected ON condition for join");
                }
                sel->joins.push_back(std::move(j));
            }
        }
        if (peek().is_kw("WHERE")) {
            take();
            sel->where = parse_expr();
        }
        if (peek().is_kw("GROUP")) {
            take();
            expect_kw("BY");
            while (true) {
                sel->group_by.push_back(parse_expr());
                if (peek().is_op(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        if (peek().is_kw("HAVING")) {
            take();
            sel->having = parse_expr();
        }
        if (peek().is_kw("ORDER")) {
            take();
            expect_kw("BY");
            while (true) {
                SelectStmt::OrderItem item;
                item.expr = parse_expr();
                if (peek().is_kw("DESC")) {
                    take();
                    item.desc = true;
                } else if (peek().is_kw("ASC")) {
                    take();
                }
                sel->order_by.push_back(std::move(item));
                if (peek().is_op(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        if (peek().is_kw("LIMIT")) {
            take();
            if (peek().type != Token::Type::Number) fail("expected LIMIT count");
            sel->limit = std::stoll(take().text);
        }
        if (peek().is_kw("UNION")) {
            size_t start = pos_;
            take();
            if (peek().is_kw("ALL") || peek().is_kw("DISTINCT")) take();
            parse_select_with_ctes();
            flagged_.push_back("UNION branch ignored by analysis: " + raw_since(start));
        }
        return sel;
    }

    std::optional<JoinClause::Type> peek_join_type() {
        auto consume_join = [&](JoinClause::Type t, int words) {
            for (int k = 0; k < words; ++k) take();
            return t;
        };
        if (peek().is_kw("JOIN")) return consume_join(JoinClause::Type::Inner, 1);
        if (peek().is_kw("INNER") && peek(1).is_kw("JOIN"))
            return consume_join(JoinClause::Type::Inner, 2);
        if (peek().is_kw("CROSS") && peek(1).is_kw("JOIN"))
            return consume_join(JoinClause::Type::Cross, 2);
        for (auto [kw, type] : {std::pair{"LEFT", JoinClause::Type::Left},
                                std::pair{"RIGHT", JoinClause::Type::Right},
                                std::pair{"FULL", JoinClause::Type::Full}}) {
            if (peek().is_kw(kw)) {
                if (peek(1).is_kw("JOIN")) return consume_join(type, 2);
                if (peek(1).is_kw("OUTER") && peek(2).is_kw("JOIN")) return consume_join(type, 3);
            }
        }
        return std::nullopt;
    }

    TableRef parse_from_item() {
        TableRef ref;
        if (peek().is_op("(")) {
            take();
            if (peek().is_kw("SELECT") || peek().is_kw("WITH")) {
                ref.subquery = parse_select_with_ctes();
                expect_op(")");
            } else {
                // parenthesized join tree: not modeled, flag and skip
                size_t start = pos_ - 1;
                int depth = 1;
                while (depth > 0) {
                    if (peek().type == Token::Type::End) fail("unbalanced parentheses in FROM");
                    if (peek().is_op("(")) ++depth;
                    if (peek().is_op(")")) --depth;
                    take();
                }
                flagged_.push_back("parenthesized FROM item treated opaquely: " + raw_since(start));
                ref.table = "<opaque>";
            }
        } else {
            std::string name = expect_ident();
            while (peek().is_op(".")) {
                take();
                name += "." + expect_ident();
            }
            if (const auto* cte = find_cte(name)) {
                ref.subquery = *cte;
                ref.alias = name;
            } else {
                ref.table = name;
            }
        }
        if (peek().is_kw("AS")) {
            take();
            ref.alias = expect_ident();
        } else if (!is_reserved_after_expr(peek()) && !peek().is_op("(")) {
            ref.alias = expect_ident();
        }
        return ref;
    }

    // --- expressions ---------------------------------------------------------

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (peek().is_kw("OR")) {
            take();
            auto e = node(Expr::Kind::Binary);
            e->op = "OR";
            e->a = lhs;
            e->b = parse_and();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (peek().is_kw("AND")) {
            take();
            auto e = node(Expr::Kind::Binary);
            e->op = "AND";
            e->a = lhs;
            e->b = parse_not();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (peek().is_kw("NOT")) {
            take();
            auto e = node(Expr::Kind::Unary);
            e->op = "NOT";
            e->a = parse_not();
            return e;
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        ExprPtr lhs = parse_additive();
        bool negated = false;
        if (peek().is_kw("NOT") &&
            (peek(1).is_kw("BETWEEN") || peek(1).is_kw("IN") || peek(1).is_kw("LIKE"))) {
            take();
            negated = true;
        }
        if (peek().is_kw("BETWEEN")) {
            take();
            auto e = node(Expr::Kind::Between);
            e->negated = negated;
            e->a = lhs;
            e->b = parse_additive();
            expect_kw("AND");
            e->c = parse_additive();
            return e;
        }
        if (peek().is_kw("IN")) {
            take();
            auto e = node(Expr::Kind::InList);
            e->negated = negated;
            e->a = lhs;
            size_t start = pos_;
            expect_op("(");
            if (peek().is_kw("SELECT") || peek().is_kw("WITH")) {
                pos_ = start;
                skip_balanced_parens();
                auto opaque = node(Expr::Kind::Opaque);
                opaque->text = raw_since(start);
                flagged_.push_back("IN subquery treated opaquely: " + opaque->text);
                e->list.push_back(opaque);
                return e;
            }
            while (!peek().is_op(")")) {
                e->list.push_back(parse_expr());
                if (peek().is_op(",")) take();
            }
            take();
            return e;
        }
        if (peek().is_kw("LIKE")) {
            take();
            auto e = node(Expr::Kind::Like);
            e->negated = negated;
            e->a = lhs;
            e->b = parse_additive();
            return e;
        }
        if (negated) fail("expected BETWEEN, IN, or LIKE after NOT");
        if (peek().is_kw("IS")) {
            take();
            auto e = node(Expr::Kind::IsNull);
            e->a = lhs;
            if (peek().is_kw("NOT")) {
                take();
                e->negated = true;
            }
            expect_kw("NULL");
            return e;
        }
        static const char* cmp_ops[] = {"=", "!=", "<>", "<=", ">=", "<", ">"};
        for (const char* op : cmp_ops) {
            if (peek().is_op(op)) {
                take();
                auto e = node(Expr::Kind::Binary);
                e->op = op == std::string_view("<>") ? "!=" : op;
                e->a = lhs;
                e->b = parse_additive();
                return e;
            }
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (peek().is_op("+") || peek().is_op("-") || peek().is_op("||")) {
            std::string op = take().text;
            auto e = node(Expr::Kind::Binary);
            e->op = op;
            e->a = lhs;
            e->b = parse_multiplicative();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        while (peek().is_op("*") || peek().is_op("/")) {
            std::string op = take().text;
            auto e = node(Expr::Kind::Binary);
            e->op = op;
            e->a = lhs;
            e->b = parse_unary();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (peek().is_op("-")) {
            take();
            auto e = node(Expr::Kind::Unary);
            e->op = "-";
            e->a = parse_unary();
            return e;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.type == Token::Type::Number) {
            auto e = node(Expr::Kind::Literal);
            std::string text = take().text;
            if (text.find('.') != std::string::npos || text.find('e') != std::string::npos ||
                text.find('E') != std::string::npos) {
                e->value = Value(std::stod(text));
            } else {
                e->value = Value(static_cast<int64_t>(std::stoll(text)));
            }
            return e;
        }
        if (t.type == Token::Type::String) {
            auto e = node(Expr::Kind::Literal);
            e->value = Value(take().text);
            return e;
        }
        if (t.is_op("*")) {
            take();
            return node(Expr::Kind::Star);
        }
        if (t.is_op("(")) {
            size_t start = pos_;
            take();
            if (peek().is_kw("SELECT") || peek().is_kw("WITH")) {
                pos_ = start;
                skip_balanced_parens();
                auto e = node(Expr::Kind::Opaque);
                e->text = raw_since(start);
                flagged_.push_back("scalar subquery treated opaquely: " + e->text);
                return e;
            }
            ExprPtr inner = parse_expr();
            expect_op(")");
            return inner;
        }
        if (t.type != Token::Type::Ident) fail("expected expression");
        if (is_reserved_after_expr(t)) fail("expected expression, found '" + t.text + "'");
        if (t.is_kw("TRUE") || t.is_kw("FALSE")) {
            auto e = node(Expr::Kind::Literal);
            e->value = Value(take().is_kw("TRUE"));
            return e;
        }
        if (t.is_kw("NULL")) {
            take();
            auto e = node(Expr::Kind::Literal);
            e->value = Value(Null{});
            return e;
        }
        if (t.is_kw("CASE")) return parse_case();
        if ((t.is_kw("CAST") || t.is_kw("SAFE_CAST")) && peek(1).is_op("(")) {
            bool safe = t.is_kw("SAFE_CAST");
            take();
            take();
            auto e = node(Expr::Kind::Cast);
            e->safe = safe;
            e->a = parse_expr();
            expect_kw("AS");
            e->name = to_upper(expect_ident());
            expect_op(")");
            return e;
        }
        if (t.is_kw("EXISTS") && peek(1).is_op("(")) {
            size_t start = pos_;
            take();
            skip_balanced_parens();
            auto e = node(Expr::Kind::Opaque);
            e->text = raw_since(start);
            flagged_.push_back("EXISTS subquery treated opaquely: " + e->text);
            return e;
        }
        if (peek(1).is_op("(")) return parse_func_call();
        // column reference, possibly dotted, possibly ending in .*
        auto e = node(Expr::Kind::ColumnRef);
        e->parts.push_back(expect_ident());
        while (peek().is_op(".")) {
            take();
            if (peek().is_op("*")) {
                take();
                e->kind = Expr::Kind::Star;
                return e;
            }
            e->parts.push_back(expect_ident());
        }
        return e;
    }

    ExprPtr parse_func_call() {
        auto e = node(Expr::Kind::FuncCall);
        e->name = to_upper(expect_ident());
        expect_op("(");
        if (peek().is_kw("DISTINCT")) {
            take();
            e->distinct = true;
        }
        while (!peek().is_op(")")) {
            if (peek().is_op("*")) {
                take();
                e->list.push_back(node(Expr::Kind::Star));
            } else {
                e->list.push_back(parse_expr());
            }
            if (peek().is_op(",")) take();
            else break;
        }
        expect_op(")");
        if (peek().is_kw("OVER")) {
            size_t start = pos_;
            take();
            if (peek().is_op("(")) skip_balanced_parens();
            else expect_ident();
            flagged_.push_back("window specification treated opaquely: " + raw_since(start));
        }
        return e;
    }

    ExprPtr parse_case() {
        expect_kw("CASE");
        auto e = node(Expr::Kind::Case);
        if (!peek().is_kw("WHEN")) e->a = parse_expr();
        while (peek().is_kw("WHEN")) {
            take();
            WhenClause arm;
            arm.when = parse_expr();
            expect_kw("THEN");
            arm.then = parse_expr();
            e->whens.push_back(std::move(arm));
        }
        if (e->whens.empty()) fail("CASE requires at least one WHEN arm");
        if (peek().is_kw("ELSE")) {
            take();
            e->b = parse_expr();
        }
        expect_kw("END");
        return e;
    }
};

}  // namespace

Statement parse_sql(std::string_view text) { return Parser(text).run(); }

}  // namespace sdgen::sql
