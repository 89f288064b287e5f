#include <doctest.h>

#include "fixtures.hpp"
#include "sdgen/sql/parser.hpp"

using namespace sdgen;
using sql::Expr;

namespace {

const Expr& deref(const sql::ExprPtr& p) {
    REQUIRE(p != nullptr);
    return *p;
}

}  // namespace

TEST_CASE("lexer: tokens, comments, strings, spans") {
    auto toks = sql::lex_sql("SELECT a.b, 'it''s' -- end\nFROM `t u` /* x */ WHERE x<>1.5e2");
    std::vector<std::string> texts;
    for (const auto& t : toks) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"SELECT", "a", ".", "b", ",", "it's", "FROM", "t u",
                                            "WHERE", "x", "<>", "1.5e2", ""});
    CHECK(toks[0].line == 1);
    CHECK(toks[6].line == 2);  // FROM after the line comment

    CHECK_THROWS_AS((void)sql::lex_sql("SELECT 'open"), ParseError);
    CHECK_THROWS_AS((void)sql::lex_sql("SELECT /* open"), ParseError);
    CHECK_THROWS_AS((void)sql::lex_sql("SELECT a ~ b"), ParseError);
    try {
        (void)sql::lex_sql("SELECT\n  a ~ b");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("parser: trivial select star") {
    auto stmt = sql::parse_sql("SELECT * FROM t");
    REQUIRE(stmt.select != nullptr);
    CHECK(stmt.function == nullptr);
    CHECK(stmt.flagged.empty());
    const auto& sel = *stmt.select;
    REQUIRE(sel.items.size() == 1);
    CHECK(deref(sel.items[0].expr).kind == Expr::Kind::Star);
    REQUIRE(sel.from.has_value());
    CHECK(sel.from->table == "t");
    CHECK(sel.from->is_base());
    CHECK(sel.joins.empty());
    CHECK(sel.where == nullptr);
}

TEST_CASE("parser: allocation join query structure") {
    auto stmt = sql::parse_sql(fixtures::kAllocationJoinSql);
    REQUIRE(stmt.select != nullptr);
    CHECK(stmt.flagged.empty());
    const auto& sel = *stmt.select;

    // Outer FROM is a derived table aliased AP without AS.
    REQUIRE(sel.from.has_value());
    CHECK_FALSE(sel.from->is_base());
    CHECK(sel.from->alias == "AP");
    const auto& inner = *sel.from->subquery;
    REQUIRE(inner.from.has_value());
    CHECK(inner.from->table == "fake_table_1");
    const auto& w = deref(inner.where);
    // a AND b AND c associates left: AND(AND(a, b), c).
    REQUIRE(w.kind == Expr::Kind::Binary);
    CHECK(w.op == "AND");
    const auto& left = deref(w.a);
    CHECK(left.op == "AND");
    const auto& eq = deref(left.a);
    CHECK(eq.op == "=");
    CHECK(deref(eq.a).parts == std::vector<std::string>{"fake_column"});
    CHECK(deref(eq.b).value.as_string() == "Regional_Team_Americas");
    CHECK(deref(left.b).op == ">=");
    CHECK(deref(w.b).op == "<=");

    // LEFT JOIN (SELECT * FROM fake_table_2) AS Capacity ON ...
    REQUIRE(sel.joins.size() == 1);
    const auto& j = sel.joins[0];
    CHECK(j.type == sql::JoinClause::Type::Left);
    CHECK(j.table.alias == "Capacity");
    CHECK_FALSE(j.table.is_base());
    CHECK(j.table.subquery->from->table == "fake_table_2");
    const auto& on = deref(j.on);
    CHECK(on.op == "AND");
    const auto& key1 = deref(on.a);
    CHECK(key1.op == "=");
    const auto& cast = deref(key1.a);
    CHECK(cast.kind == Expr::Kind::Cast);
    CHECK(cast.safe);
    CHECK(cast.name == "STRING");
    CHECK(deref(cast.a).parts == std::vector<std::string>{"AP", "date"});
    CHECK(deref(key1.b).parts == std::vector<std::string>{"Capacity", "week_start_date"});
    const auto& key2 = deref(on.b);
    CHECK(deref(key2.a).parts == std::vector<std::string>{"AP", "username"});
    CHECK(deref(key2.b).parts == std::vector<std::string>{"Capacity", "username"});
}

TEST_CASE("parser: create function with case body") {
    auto stmt = sql::parse_sql(fixtures::kBalanceFunctionSql);
    REQUIRE(stmt.function != nullptr);
    CHECK(stmt.select == nullptr);
    const auto& fn = *stmt.function;
    CHECK(fn.name == "GetBalanceInUsd");
    CHECK(fn.is_public);
    REQUIRE(fn.params.size() == 1);
    CHECK(fn.params[0].first == "Input");
    CHECK(fn.params[0].second == "fake_table");
    CHECK(fn.returns == "INT64");

    const auto& body = deref(fn.body);
    REQUIRE(body.kind == Expr::Kind::Case);
    CHECK(body.a == nullptr);  // condition form, no operand
    REQUIRE(body.whens.size() == 3);
    const auto& w0 = deref(body.whens[0].when);
    CHECK(w0.op == "=");
    CHECK(deref(w0.a).parts ==
          std::vector<std::string>{"private_info", "running_balance", "currency"});
    CHECK(deref(w0.b).value.as_string() == "USD");
    // THEN of the GBP arm multiplies by the conversion rate.
    const auto& t1 = deref(body.whens[1].then);
    CHECK(t1.op == "*");
    CHECK(deref(t1.b).value.as_float() == doctest::Approx(1.26));
    CHECK(deref(body.b).value.is_null());  // ELSE NULL
}

TEST_CASE("parser: quarterly aggregation query") {
    auto stmt = sql::parse_sql(fixtures::kQuarterlyAdsSql);
    REQUIRE(stmt.select != nullptr);
    CHECK(stmt.flagged.empty());
    const auto& sel = *stmt.select;
    REQUIRE(sel.items.size() == 2);

    const auto& trunc = deref(sel.items[0].expr);
    CHECK(trunc.kind == Expr::Kind::FuncCall);
    CHECK(trunc.name == "DATE_TRUNC");
    REQUIRE(trunc.list.size() == 2);
    CHECK(deref(trunc.list[0]).parts == std::vector<std::string>{"logdate"});
    CHECK(deref(trunc.list[1]).parts == std::vector<std::string>{"quarter"});

    const auto& ratio = deref(sel.items[1].expr);
    CHECK(ratio.op == "/");
    CHECK(deref(ratio.a).name == "SUM");
    CHECK(deref(deref(ratio.a).list[0]).parts == std::vector<std::string>{"conversions"});

    const auto& w = deref(sel.where);
    CHECK(w.op == "AND");
    const auto& between = deref(w.b);
    REQUIRE(between.kind == Expr::Kind::Between);
    CHECK_FALSE(between.negated);
    CHECK(deref(between.b).value.as_string() == "2022-01-01");
    CHECK(deref(between.c).value.as_string() == "2022-12-31");

    REQUIRE(sel.group_by.size() == 1);
    CHECK(deref(sel.group_by[0]).name == "DATE_TRUNC");
}

TEST_CASE("parser: project tasks rollup query") {
    auto stmt = sql::parse_sql(fixtures::kProjectTasksSql);
    REQUIRE(stmt.select != nullptr);
    CHECK(stmt.flagged.empty());
    const auto& sel = *stmt.select;

    const auto& agg = deref(sel.items[1].expr);
    CHECK(agg.name == "ARRAY_AGG");
    CHECK(deref(agg.list[0]).name == "STRUCT");

    REQUIRE(sel.from.has_value());
    const auto& inner = *sel.from->subquery;
    CHECK(inner.from->table == "fake_project_tasks");
    CHECK(inner.from->alias == "t");
    REQUIRE(inner.items.size() == 3);
    CHECK(inner.items[1].alias == "task");
    const auto& fmt = deref(inner.items[2].expr);
    CHECK(fmt.name == "FORMAT_TIMESTAMP");
    CHECK(deref(fmt.list[0]).value.as_string() == "%Y-%m-%d");
    CHECK(deref(fmt.list[1]).name == "PARSE_TIMESTAMP");

    REQUIRE(inner.joins.size() == 1);
    CHECK(inner.joins[0].type == sql::JoinClause::Type::Inner);
    CHECK(inner.joins[0].table.table == "fake_devices");
    CHECK(inner.joins[0].table.alias == "d");

    const auto& like = deref(inner.where);
    REQUIRE(like.kind == Expr::Kind::Like);
    CHECK(deref(like.a).parts == std::vector<std::string>{"t", "name"});
    CHECK(deref(like.b).value.as_string() == "%fake_task_name%");

    REQUIRE(inner.order_by.size() == 1);
    CHECK_FALSE(inner.order_by[0].desc);
}

TEST_CASE("parser: operator precedence") {
    auto stmt = sql::parse_sql("SELECT * FROM t WHERE a OR b AND NOT c = 1 + 2 * 3");
    const auto& w = deref(stmt.select->where);
    CHECK(w.op == "OR");  // OR binds loosest
    const auto& rhs = deref(w.b);
    CHECK(rhs.op == "AND");
    const auto& notp = deref(rhs.b);
    REQUIRE(notp.kind == Expr::Kind::Unary);
    CHECK(notp.op == "NOT");
    const auto& cmp = deref(notp.a);
    CHECK(cmp.op == "=");
    const auto& sum = deref(cmp.b);
    CHECK(sum.op == "+");
    CHECK(deref(sum.b).op == "*");  // * binds tighter than +
}

TEST_CASE("parser: comparison variants") {
    auto stmt = sql::parse_sql(
        "SELECT * FROM t WHERE a <> 1 AND b NOT BETWEEN 2 AND 3 AND c NOT IN (4, 5) AND d NOT "
        "LIKE 'x%' AND e IS NOT NULL AND f IS NULL");
    std::vector<const Expr*> cs;
    const Expr* cur = stmt.select->where.get();
    while (cur->kind == Expr::Kind::Binary && cur->op == "AND") {
        cs.insert(cs.begin(), cur->b.get());
        cur = cur->a.get();
    }
    cs.insert(cs.begin(), cur);
    REQUIRE(cs.size() == 6);
    CHECK(cs[0]->op == "!=");  // <> normalizes
    CHECK(cs[1]->kind == Expr::Kind::Between);
    CHECK(cs[1]->negated);
    CHECK(cs[2]->kind == Expr::Kind::InList);
    CHECK(cs[2]->negated);
    CHECK(cs[2]->list.size() == 2);
    CHECK(cs[3]->kind == Expr::Kind::Like);
    CHECK(cs[3]->negated);
    CHECK(cs[4]->kind == Expr::Kind::IsNull);
    CHECK(cs[4]->negated);
    CHECK(cs[5]->kind == Expr::Kind::IsNull);
    CHECK_FALSE(cs[5]->negated);
}

TEST_CASE("parser: WITH clause substitutes the named subquery") {
    auto stmt = sql::parse_sql(
        "WITH recent AS (SELECT * FROM events WHERE day >= '2024-01-01') "
        "SELECT * FROM recent WHERE kind = 'click'");
    REQUIRE(stmt.select != nullptr);
    CHECK(stmt.flagged.empty());
    const auto& sel = *stmt.select;
    REQUIRE(sel.from.has_value());
    CHECK_FALSE(sel.from->is_base());
    CHECK(sel.from->alias == "recent");
    CHECK(sel.from->subquery->from->table == "events");
}

TEST_CASE("parser: aliases with and without AS") {
    auto stmt = sql::parse_sql("SELECT x AS a, y b, z FROM t1 u JOIN t2 AS v ON u.k = v.k");
    const auto& sel = *stmt.select;
    CHECK(sel.items[0].alias == "a");
    CHECK(sel.items[1].alias == "b");
    CHECK(sel.items[2].alias == "");
    CHECK(sel.from->alias == "u");
    CHECK(sel.joins[0].table.alias == "v");
}

TEST_CASE("parser: unsupported constructs parse opaquely and get flagged") {
    SUBCASE("union") {
        auto stmt = sql::parse_sql("SELECT a FROM t UNION ALL SELECT a FROM u");
        REQUIRE(stmt.select != nullptr);
        REQUIRE_FALSE(stmt.flagged.empty());
        CHECK(stmt.flagged[0].find("UNION") != std::string::npos);
    }
    SUBCASE("scalar subquery") {
        auto stmt = sql::parse_sql("SELECT * FROM t WHERE x = (SELECT MAX(x) FROM t)");
        REQUIRE_FALSE(stmt.flagged.empty());
        const auto& w = deref(stmt.select->where);
        CHECK(deref(w.b).kind == Expr::Kind::Opaque);
        CHECK(deref(w.b).text.find("SELECT MAX(x) FROM t") != std::string::npos);
    }
    SUBCASE("IN subquery") {
        auto stmt = sql::parse_sql("SELECT * FROM t WHERE x IN (SELECT x FROM u)");
        REQUIRE_FALSE(stmt.flagged.empty());
        const auto& w = deref(stmt.select->where);
        REQUIRE(w.kind == Expr::Kind::InList);
        CHECK(deref(w.list[0]).kind == Expr::Kind::Opaque);
    }
    SUBCASE("EXISTS") {
        auto stmt = sql::parse_sql("SELECT * FROM t WHERE EXISTS (SELECT 1 FROM u)");
        REQUIRE_FALSE(stmt.flagged.empty());
        CHECK(deref(stmt.select->where).kind == Expr::Kind::Opaque);
    }
    SUBCASE("window function") {
        auto stmt =
            sql::parse_sql("SELECT RANK() OVER (PARTITION BY a ORDER BY b) FROM t");
        REQUIRE_FALSE(stmt.flagged.empty());
        CHECK(deref(stmt.select->items[0].expr).kind == Expr::Kind::FuncCall);
    }
    SUBCASE("USING join") {
        auto stmt = sql::parse_sql("SELECT * FROM t JOIN u USING (k)");
        REQUIRE_FALSE(stmt.flagged.empty());
    }
}

TEST_CASE("parser: errors carry positions") {
    CHECK_THROWS_AS((void)sql::parse_sql("SELECT FROM t"), ParseError);
    CHECK_THROWS_AS((void)sql::parse_sql("SELECT * FROM"), ParseError);
    CHECK_THROWS_AS((void)sql::parse_sql("SELECT * FROM t WHERE"), ParseError);
    CHECK_THROWS_AS((void)sql::parse_sql("SELECT * FROM t LEFT JOIN u"), ParseError);
    CHECK_THROWS_AS((void)sql::parse_sql("SELECT * FROM t extra garbage"), ParseError);
    try {
        (void)sql::parse_sql("SELECT *\nFROM t WHERE (a = 1");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("parser: case with operand and dotted star") {
    auto stmt = sql::parse_sql(
        "SELECT t.*, CASE status WHEN 'open' THEN 1 WHEN 'closed' THEN 2 ELSE 0 END FROM t");
    const auto& star = deref(stmt.select->items[0].expr);
    CHECK(star.kind == Expr::Kind::Star);
    CHECK(star.parts == std::vector<std::string>{"t"});
    const auto& c = deref(stmt.select->items[1].expr);
    REQUIRE(c.kind == Expr::Kind::Case);
    REQUIRE(c.a != nullptr);  // operand form
    CHECK(deref(c.a).parts == std::vector<std::string>{"status"});
    CHECK(c.whens.size() == 2);
    CHECK(deref(c.whens[0].when).value.as_string() == "open");
}
