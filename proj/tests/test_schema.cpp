#include <doctest.h>

#include <set>

#include "sdgen/schema.hpp"
#include "sdgen/schema_parser.hpp"

using namespace sdgen;

namespace {

const char* kAccountSchema = R"(
// Account record with balance history.
message Account {
  int64 id = 1;
  string owner = 2;
  PrivateInfo private_info = 3;
}

message PrivateInfo {
  RunningBalance running_balance = 1;
  // Soft-delete marker.
  bool archived = 2;
}

message RunningBalance {
  float64 amount = 1;
  Currency currency = 2;  // ISO currency of the balance
  date as_of = 3;
}

enum Currency {
  USD;
  GBP;
  EUR;
}
)";

}  // namespace

TEST_CASE("parse nested schema with enum two levels under root") {
    SchemaSet set = parse_schema(kAccountSchema);
    const SchemaDef* account = set.message("Account");
    REQUIRE(account != nullptr);
    CHECK(account->annotation == "Account record with balance history.");
    CHECK(account->fields.size() == 3);
    CHECK(account->fields[0].is_scalar());
    CHECK(account->fields[0].scalar() == Scalar::Int64);
    CHECK(account->fields[0].number == 1);
    REQUIRE(account->fields[2].is_nested());
    CHECK(account->fields[2].nested().resolved);

    const FieldDef& currency =
        resolve_path(set, *account, ColumnPath::parse("private_info.running_balance.currency"));
    REQUIRE(currency.is_enum());
    CHECK(currency.enum_kind().type_name == "Currency");
    CHECK(currency.enum_kind().values == std::vector<std::string>{"USD", "GBP", "EUR"});
    CHECK(currency.annotation == "ISO currency of the balance");

    const SchemaDef* info = set.message("PrivateInfo");
    REQUIRE(info != nullptr);
    CHECK(info->fields[1].annotation == "Soft-delete marker.");
}

TEST_CASE("empty message body is valid") {
    SchemaSet set = parse_schema("message Empty {}");
    REQUIRE(set.message("Empty") != nullptr);
    CHECK(set.message("Empty")->fields.empty());
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_schema("message {"), ParseError);
    CHECK_THROWS_AS(parse_schema("message M { int64 a; int64 a; }"), ParseError);
    CHECK_THROWS_AS(parse_schema("message M {} message M {}"), ParseError);
    CHECK_THROWS_AS(parse_schema("enum E { }"), ParseError);
    CHECK_THROWS_AS(parse_schema("message M { int64 a = x; }"), ParseError);
    try {
        parse_schema("message M {\n  int64 ?; }");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("unresolved references are retained with a marker") {
    SchemaSet set;
    parse_schema_text(set, "message M { Ghost g = 1; int64 x = 2; }");
    auto unresolved = set.link();
    REQUIRE(unresolved.size() == 1);
    CHECK(unresolved[0] == "M.g -> Ghost");
    const SchemaDef* m = set.message("M");
    REQUIRE(m->fields[0].is_nested());
    CHECK_FALSE(m->fields[0].nested().resolved);
    CHECK_THROWS_WITH_AS(resolve_path(set, *m, ColumnPath::parse("g.anything")),
                         doctest::Contains("Ghost"), Error);
}

TEST_CASE("deprecated and repeated attributes") {
    SchemaSet set = parse_schema(R"(
message M {
  repeated string tags = 1;
  int64 old_score = 2 [deprecated];
  int64 older = 3 [deprecated = true];
  int64 kept = 4 [deprecated = false];
}
)");
    const SchemaDef* m = set.message("M");
    CHECK(m->fields[0].repeated);
    CHECK(m->fields[1].deprecated);
    CHECK(m->fields[2].deprecated);
    CHECK_FALSE(m->fields[3].deprecated);
}

TEST_CASE("column path parse and print") {
    ColumnPath p = ColumnPath::parse("a.b[2].c");
    REQUIRE(p.segments.size() == 3);
    CHECK(p.segments[1].index == 2);
    CHECK(p.dotted() == "a.b[2].c");
    CHECK(p.names() == std::vector<std::string>{"a", "b", "c"});
    CHECK(p.leaf() == "c");
    CHECK(p.parent().dotted() == "a.b[2]");
    CHECK_THROWS_AS(ColumnPath::parse(""), ParseError);
    CHECK_THROWS_AS(ColumnPath::parse("a..b"), ParseError);
    CHECK_THROWS_AS(ColumnPath::parse("a[x]"), ParseError);
    CHECK(ColumnPath::of({"x", "y"}) < ColumnPath::of({"x", "z"}));
}

TEST_CASE("resolve_path error cases") {
    SchemaSet set = parse_schema(kAccountSchema);
    const SchemaDef* account = set.message("Account");
    CHECK_THROWS_WITH_AS(resolve_path(set, *account, ColumnPath::parse("nope")),
                         doctest::Contains("nope"), Error);
    CHECK_THROWS_WITH_AS(resolve_path(set, *account, ColumnPath::parse("id.sub")),
                         doctest::Contains("past leaf"), Error);
}

TEST_CASE("serialize then parse is an identity on the canonical form") {
    SchemaSet set = parse_schema(kAccountSchema);
    std::string one = serialize_schema(set);
    SchemaSet set2 = parse_schema(one);
    std::string two = serialize_schema(set2);
    CHECK(one == two);
    CHECK(one.find("// Account record with balance history.") != std::string::npos);
    CHECK(one.find("Currency currency = 2;") != std::string::npos);
}

TEST_CASE("enumerate_columns matches brute-force expectations") {
    SchemaSet set = parse_schema(kAccountSchema);
    auto cols = enumerate_columns(set, *set.message("Account"));
    std::vector<std::string> dotted;
    for (const auto& c : cols) dotted.push_back(c.path.dotted());
    CHECK(dotted == std::vector<std::string>{
                        "id", "owner", "private_info.running_balance.amount",
                        "private_info.running_balance.currency",
                        "private_info.running_balance.as_of", "private_info.archived"});
    // every enumerated path resolves, and every resolvable leaf is enumerated
    std::set<std::string> seen(dotted.begin(), dotted.end());
    for (const auto& c : cols) {
        const FieldDef& f = resolve_path(set, *set.message("Account"), c.path);
        CHECK(&f == c.leaf);
    }
    CHECK(seen.size() == cols.size());
}

TEST_CASE("enumerate_columns caps recursive descent") {
    SchemaSet set = parse_schema("message Node { int64 v = 1; Node child = 2; }");
    auto cols = enumerate_columns(set, *set.message("Node"), 3);
    std::vector<std::string> dotted;
    for (const auto& c : cols) dotted.push_back(c.path.dotted());
    CHECK(dotted == std::vector<std::string>{"v", "child.v", "child.child.v"});
    auto cols1 = enumerate_columns(set, *set.message("Node"), 1);
    REQUIRE(cols1.size() == 1);
    CHECK(cols1[0].path.dotted() == "v");
}

TEST_CASE("enumerate_columns skips deprecated and unresolved subtrees") {
    SchemaSet set;
    parse_schema_text(set, R"(
message Root {
  int64 live = 1;
  int64 dead = 2 [deprecated];
  Ghost ghost = 3;
}
)");
    set.link();
    auto cols = enumerate_columns(set, *set.message("Root"));
    REQUIRE(cols.size() == 1);
    CHECK(cols[0].path.dotted() == "live");
    auto with_dead = enumerate_columns(set, *set.message("Root"), 3, true);
    CHECK(with_dead.size() == 2);
}

TEST_CASE("trailing comments attach to their field") {
    SchemaSet set = parse_schema(R"(
message M {
  // leading note
  int64 a = 1;  // trailing note
  int64 b = 2;
}
)");
    const SchemaDef* m = set.message("M");
    CHECK(m->fields[0].annotation == "leading note trailing note");
    CHECK(m->fields[1].annotation.empty());
}
