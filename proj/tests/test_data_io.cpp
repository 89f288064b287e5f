#include <doctest.h>

#include "sdgen/data_io.hpp"
#include "sdgen/schema_parser.hpp"

using namespace sdgen;

namespace {

SchemaSet balance_set() {
    return parse_schema(R"(
message Account {
  int64 id = 1;
  string owner = 2;
  PrivateInfo private_info = 3;
  repeated string tags = 4;
  int64 legacy = 5 [deprecated];
}
message PrivateInfo {
  RunningBalance running_balance = 1;
}
message RunningBalance {
  float64 amount = 1;
  Currency currency = 2;
  date as_of = 3;
  timestamp updated = 4;
}
enum Currency { USD; GBP; EUR; }
)");
}

Row sample_row(int64_t id) {
    Row balance;
    balance.set("amount", Value(100.5));
    balance.set("currency", Value(EnumVal{"USD"}));
    balance.set("as_of", Value(CivilDate{2023, 1, 15}));
    balance.set("updated", Value(Timestamp{1678886400, ""}));
    Row info;
    info.set("running_balance", Value(std::move(balance)));
    Row row;
    row.set("id", Value(id));
    row.set("owner", Value(std::string("alice")));
    row.set("private_info", Value(std::move(info)));
    row.set("tags", Value(Value::List{Value(std::string("a")), Value(std::string("b"))}));
    return row;
}

}  // namespace

TEST_CASE("textproto serialization in schema order") {
    SchemaSet set = balance_set();
    std::string text = serialize_rows(set, *set.message("Account"), {sample_row(7)},
                                      DataFormat::TextprotoLike);
    CHECK(text ==
          "id: 7\n"
          "owner: \"alice\"\n"
          "private_info {\n"
          "  running_balance {\n"
          "    amount: 100.5\n"
          "    currency: USD\n"
          "    as_of: \"2023-01-15\"\n"
          "    updated: 1678886400\n"
          "  }\n"
          "}\n"
          "tags: \"a\"\n"
          "tags: \"b\"\n");
}

TEST_CASE("textproto round-trips through parse and coerce") {
    SchemaSet set = balance_set();
    const SchemaDef& schema = *set.message("Account");
    std::vector<Row> rows = {sample_row(1), sample_row(2)};
    std::string text = serialize_rows(set, schema, rows, DataFormat::TextprotoLike);
    CHECK(text.find("---\n") != std::string::npos);
    Warnings frags;
    std::vector<Row> parsed = parse_data_text(text, &frags);
    CHECK(frags.empty());
    REQUIRE(parsed.size() == 2);
    for (size_t i = 0; i < parsed.size(); ++i) {
        Row back = coerce_row(set, schema, parsed[i]);
        CHECK(back == rows[i]);
    }
}

TEST_CASE("json serialization round-trips") {
    SchemaSet set = balance_set();
    const SchemaDef& schema = *set.message("Account");
    std::vector<Row> rows = {sample_row(1), sample_row(2)};
    std::string text = serialize_rows(set, schema, rows, DataFormat::Json);
    std::vector<Row> parsed = parse_data_text(text);
    REQUIRE(parsed.size() == 2);
    for (size_t i = 0; i < parsed.size(); ++i) {
        Row back = coerce_row(set, schema, parsed[i]);
        CHECK(back == rows[i]);
    }
}

TEST_CASE("deprecated fields never serialize") {
    SchemaSet set = balance_set();
    Row row = sample_row(3);
    row.set("legacy", Value(int64_t{9}));
    for (DataFormat fmt : {DataFormat::TextprotoLike, DataFormat::Json}) {
        std::string text = serialize_rows(set, *set.message("Account"), {row}, fmt);
        CHECK(text.find("legacy") == std::string::npos);
    }
}

TEST_CASE("serializing an off-schema column is an error") {
    SchemaSet set = balance_set();
    Row row = sample_row(3);
    row.set("made_up", Value(int64_t{1}));
    CHECK_THROWS_WITH_AS(
        serialize_rows(set, *set.message("Account"), {row}, DataFormat::TextprotoLike),
        doctest::Contains("made_up"), Error);
}

TEST_CASE("markdown fences are stripped before parsing") {
    std::string fenced = "```textproto\ncurrency: USD\namount: 100\n---\ncurrency: GBP\n```\n";
    std::string bare = "currency: USD\namount: 100\n---\ncurrency: GBP\n";
    CHECK(parse_data_text(fenced) == parse_data_text(bare));
    std::string with_prose = "Here is the data:\n```\nx: 1\n```\nHope that helps!";
    std::vector<Row> rows = parse_data_text(with_prose);
    REQUIRE(rows.size() == 1);
    CHECK(*rows[0].find("x") == Value(int64_t{1}));
}

TEST_CASE("json with trailing commas and fences parses") {
    std::string text = "```json\n[{\"a\": 1, \"b\": [1, 2,],}, {\"a\": 2,},]\n```";
    std::vector<Row> rows = parse_data_text(text);
    REQUIRE(rows.size() == 2);
    CHECK(*rows[0].find("a") == Value(int64_t{1}));
    REQUIRE(rows[0].find("b")->is_list());
    CHECK(rows[0].find("b")->as_list().size() == 2);
}

TEST_CASE("unparseable text raises a format error quoting a prefix") {
    CHECK_THROWS_AS(parse_data_text("@@@@ no structure here @@@@"), ParseError);
    CHECK_THROWS_AS(parse_data_text("   \n  \n"), ParseError);
    try {
        parse_data_text("!?!?");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("!?!?") != std::string::npos);
    }
}

TEST_CASE("partial recovery reports fragments") {
    Warnings frags;
    std::vector<Row> rows = parse_data_text("a: 1\nthis line is prose, not a field\nb: 2\n", &frags);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].find("a") != nullptr);
    CHECK(rows[0].find("b") != nullptr);
    CHECK_FALSE(frags.empty());
}

TEST_CASE("repeated occurrences fold into lists") {
    std::vector<Row> rows = parse_data_text("tag: \"a\"\ntag: \"b\"\ntag: \"c\"\n");
    REQUIRE(rows.size() == 1);
    const Value* v = rows[0].find("tag");
    REQUIRE(v->is_list());
    CHECK(v->as_list().size() == 3);
}

TEST_CASE("coercion fixes representable mismatches and leaves real ones") {
    SchemaSet set = balance_set();
    const SchemaDef& schema = *set.message("Account");
    Warnings frags;
    std::vector<Row> parsed = parse_data_text(
        "id: \"42\"\nowner: alice\n"
        "private_info { running_balance { amount: 7 currency: \"GBP\" as_of: \"2023-02-01\" } }\n"
        "tags: \"solo\"\n",
        &frags);
    REQUIRE(parsed.size() == 1);
    Row row = coerce_row(set, schema, parsed[0]);
    CHECK(*row.find("id") == Value(int64_t{42}));
    CHECK(*row.find("owner") == Value(std::string("alice")));  // bare word to string
    const Value* bal = get_path(row, {"private_info", "running_balance"});
    REQUIRE(bal != nullptr);
    CHECK(*bal->as_record().find("amount") == Value(7.0));
    CHECK(*bal->as_record().find("currency") == Value(EnumVal{"GBP"}));
    CHECK(*bal->as_record().find("as_of") == Value(CivilDate{2023, 2, 1}));
    const Value* tags = row.find("tags");
    REQUIRE(tags->is_list());  // single occurrence of repeated field wrapped
    CHECK(tags->as_list().size() == 1);

    // a non-numeric string against int64 is left alone for r2 to flag
    std::vector<Row> bad = parse_data_text("id: \"not-a-number\"\n");
    Row kept = coerce_row(set, schema, bad[0]);
    CHECK(kept.find("id")->is_string());
    // unknown enum members keep their name for the membership check
    std::vector<Row> aud =
        parse_data_text("private_info { running_balance { currency: AUD } }\n");
    Row aud_row = coerce_row(set, schema, aud[0]);
    CHECK(get_path(aud_row, {"private_info", "running_balance", "currency"})->as_enum().name ==
          "AUD");
}

TEST_CASE("value path helpers") {
    Row row = sample_row(1);
    CHECK(get_path(row, {"private_info", "running_balance", "amount"})->as_float() == 100.5);
    CHECK(get_path(row, {"private_info", "missing"}) == nullptr);
    CHECK(get_path(row, {"id", "too_deep"}) == nullptr);
    set_path(row, {"private_info", "running_balance", "amount"}, Value(1.0));
    CHECK(get_path(row, {"private_info", "running_balance", "amount"})->as_float() == 1.0);
    set_path(row, {"fresh", "leaf"}, Value(int64_t{5}));
    CHECK(get_path(row, {"fresh", "leaf"})->as_int() == 5);
    CHECK(erase_path(row, {"fresh", "leaf"}));
    CHECK_FALSE(erase_path(row, {"fresh", "leaf"}));
}

TEST_CASE("value display forms") {
    CHECK(Value(int64_t{42}).to_display() == "42");
    CHECK(Value(1.5).to_display() == "1.5");
    CHECK(Value(0.1).to_display() == "0.1");
    CHECK(Value(true).to_display() == "true");
    CHECK(Value(CivilDate{2023, 1, 5}).to_display() == "2023-01-05");
    CHECK(Value(EnumVal{"USD"}).to_display() == "USD");
    CHECK(Value(Null{}).to_display() == "null");
    CHECK(Value(Value::List{Value(int64_t{1}), Value(int64_t{2})}).to_display() == "[1, 2]");
    CHECK(Value().type_name() == "null");
    CHECK(Value(Timestamp{5, "UTC"}).to_display() == "5 UTC");
}
