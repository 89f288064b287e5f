#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sdgen/backend.hpp"
#include "sdgen/context.hpp"
#include "sdgen/schema_parser.hpp"

using namespace sdgen;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> dotted(const std::vector<ColumnPath>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.dotted());
    return out;
}

}  // namespace

TEST_CASE("value spec: literal / one_of / range round-trip and describe") {
    ValueSpec lit = ValueSpec::from_json(ordered_json::parse(R"({"literal": 5})"));
    CHECK(lit.kind == ValueSpec::Kind::Literal);
    CHECK(lit.literal == Value(int64_t{5}));
    CHECK(lit.describe() == "= 5");
    CHECK(ValueSpec::from_json(lit.to_json()).describe() == "= 5");

    ValueSpec one = ValueSpec::from_json(ordered_json::parse(R"({"one_of": ["USD", "GBP"]})"));
    CHECK(one.kind == ValueSpec::Kind::OneOf);
    CHECK(one.describe() == "one of [USD, GBP]");
    CHECK(ValueSpec::from_json(one.to_json()).one_of == one.one_of);

    ValueSpec rng = ValueSpec::from_json(
        ordered_json::parse(R"({"range": {"lo": 1, "hi": 10, "lo_inclusive": false}})"));
    CHECK(rng.kind == ValueSpec::Kind::Range);
    CHECK(rng.describe() == "> 1 and <= 10");
    CHECK(ValueSpec::from_json(rng.to_json()).describe() == "> 1 and <= 10");
}

TEST_CASE("value spec: generators round-trip and describe") {
    ValueSpec inc = ValueSpec::from_json(
        ordered_json::parse(R"({"generator": {"incremental": {"start": 100, "step": 5}}})"));
    CHECK(inc.kind == ValueSpec::Kind::Incremental);
    CHECK(inc.describe() == "incremental from 100 step 5");

    ValueSpec uni = ValueSpec::from_json(
        ordered_json::parse(R"({"generator": {"uniform_float": {"lo": 0.0, "hi": 1.0}}})"));
    CHECK(uni.kind == ValueSpec::Kind::UniformFloat);
    CHECK(uni.describe() == "uniform float in [0, 1)");

    ValueSpec ch = ValueSpec::from_json(ordered_json::parse(
        R"({"generator": {"seeded_choice": {"values": ["a", "b"], "weights": [3, 1]}}})"));
    CHECK(ch.kind == ValueSpec::Kind::SeededChoice);
    CHECK(ch.describe() == "seeded choice of [a, b] (weighted)");
    CHECK(ValueSpec::from_json(ch.to_json()).choice.weights == std::vector<double>{3, 1});
}

TEST_CASE("value spec: malformed specs are rejected") {
    auto bad = [](const char* text) {
        CHECK_THROWS_AS(ValueSpec::from_json(ordered_json::parse(text)), ConfigError);
    };
    bad(R"({"literal": 1, "one_of": [2]})");                          // two kinds at once
    bad(R"({"pick": [1]})");                                          // unknown key
    bad(R"({"one_of": []})");                                         // empty choice
    bad(R"({"range": {"lo": 1}})");                                   // missing hi
    bad(R"({"generator": {"incremental": {"step": 0}}})");            // zero step
    bad(R"({"generator": {"uniform_float": {"lo": 2, "hi": 2}}})");   // empty interval
    bad(R"({"generator": {"seeded_choice": {"values": ["a"], "weights": [1, 2]}}})");
    bad(R"({"generator": {"seeded_choice": {"values": ["a"], "weights": [-1]}}})");
    bad(R"({"generator": {"seeded_choice": {"values": ["a", "b"], "weights": [0, 0]}}})");
}

TEST_CASE("context map: full document parses") {
    ContextMap ctx = ContextMap::from_text(R"({
      "question": "Which teams are over capacity?",
      "user_criteria": "Americas allocations in Q1 2023.",
      "signals": {"capacity": {"range": {"lo": 10.0, "hi": 40.0}}},
      "row_count": 8,
      "unique_columns": ["username"],
      "instances_per_test": 3,
      "correlations": [{"columns": ["date", "week_start_date"],
                        "note": "week_start_date is the Monday of date's week"}]
    })");
    CHECK(ctx.question == "Which teams are over capacity?");
    CHECK(ctx.user_criteria == "Americas allocations in Q1 2023.");
    REQUIRE(ctx.signals.count("capacity") == 1);
    CHECK(ctx.signals.at("capacity").kind == ValueSpec::Kind::Range);
    CHECK(ctx.row_count == 8);
    CHECK(dotted(ctx.unique_columns) == std::vector<std::string>{"username"});
    CHECK(ctx.instances_per_test == 3);
    REQUIRE(ctx.correlations.size() == 1);
    CHECK(dotted(ctx.correlations[0].columns) ==
          std::vector<std::string>{"date", "week_start_date"});

    // to_json round-trips through from_json.
    ContextMap again = ContextMap::from_json(ctx.to_json());
    CHECK(again.to_json() == ctx.to_json());
}

TEST_CASE("context map: malformed documents are rejected") {
    CHECK_THROWS_AS(ContextMap::from_text("not json"), ConfigError);
    CHECK_THROWS_AS(ContextMap::from_text(R"({"rows": 5})"), ConfigError);
    CHECK_THROWS_AS(ContextMap::from_text(R"({"row_count": 0})"), ConfigError);
    CHECK_THROWS_AS(ContextMap::from_text(R"({"row_count": "five"})"), ConfigError);
    CHECK_THROWS_AS(ContextMap::from_text(R"({"instances_per_test": -1})"), ConfigError);
    CHECK_THROWS_AS(ContextMap::from_text(R"({"correlations": [{"columns": ["a"]}]})"),
                    ConfigError);
    // Signal keys must be column paths.
    CHECK_THROWS_AS(ContextMap::from_text(R"({"signals": {"a..b": {"literal": 1}}})"),
                    ParseError);
}

TEST_CASE("annotations: docs merge onto fields and override inline comments") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    SchemaDef* root = set.message("fake_table");
    REQUIRE(root != nullptr);

    Warnings warnings;
    merge_annotations(set, *root,
                      {{"owner", "Account owner username"},
                       {"private_info.running_balance.amount",
                        "Balance amount in the account currency"}},
                      &warnings);
    CHECK(warnings.empty());
    CHECK(root->find_field("owner")->annotation == "Account owner username");
    const SchemaDef* rb = set.message("RunningBalance");
    CHECK(rb->find_field("amount")->annotation == "Balance amount in the account currency");
    CHECK_FALSE(rb->find_field("amount")->machine_annotation);

    // Docs win over whatever was there before; merging twice is a no-op.
    merge_annotations(set, *root, {{"owner", "Account owner username"}}, &warnings);
    CHECK(warnings.empty());
    CHECK(root->find_field("owner")->annotation == "Account owner username");
}

TEST_CASE("annotations: unresolvable doc keys warn and are skipped") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    SchemaDef* root = set.message("fake_table");

    Warnings warnings;
    merge_annotations(set, *root,
                      {{"a..b", "x"}, {"no_such_column", "y"}, {"owner.too.deep", "z"}},
                      &warnings);
    REQUIRE(warnings.size() == 3);
    CHECK(warnings[0].find("not a column path") != std::string::npos);
    CHECK(warnings[1].find("does not resolve") != std::string::npos);
    CHECK(warnings[2].find("does not resolve") != std::string::npos);
}

TEST_CASE("annotations: deterministic fill writes typed stubs for every gap") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    SchemaDef* root = set.message("fake_table");
    DeterministicBackend backend(7);

    Warnings warnings;
    fill_annotations(set, *root, backend, &warnings);
    CHECK(warnings.empty());

    CHECK(root->find_field("id")->annotation == "Int64 field id");
    CHECK(root->find_field("id")->machine_annotation);
    CHECK(root->find_field("private_info")->annotation == "PrivateInfo field private_info");
    const SchemaDef* rb = set.message("RunningBalance");
    CHECK(rb->find_field("as_of")->annotation == "Date field as_of");
    CHECK(rb->find_field("currency")->annotation == "Currency field currency");

    // Hand-written text survives a second pass untouched.
    root->find_field("owner")->annotation = "Account owner";
    root->find_field("owner")->machine_annotation = false;
    fill_annotations(set, *root, backend, &warnings);
    CHECK(root->find_field("owner")->annotation == "Account owner");
    CHECK_FALSE(root->find_field("owner")->machine_annotation);
}

TEST_CASE("grouping: user hints claim columns first and synthesize date-chain notes") {
    SchemaSet set = parse_schema(R"(
message booking {
  date check_in_date = 1;
  date check_out_date = 2;
  string guest_name = 3;
  int64 nights = 4;
}
)");
    const SchemaDef* root = set.message("booking");

    CorrelationHint hint;
    hint.columns = {ColumnPath::parse("check_in_date"), ColumnPath::parse("check_out_date")};
    Warnings warnings;
    auto groups = group_columns(set, *root, {hint}, &warnings);
    CHECK(warnings.empty());

    REQUIRE(groups.size() == 2);
    CHECK(dotted(groups[0].members) ==
          std::vector<std::string>{"check_in_date", "check_out_date"});
    CHECK(groups[0].correlation_note ==
          "dates must be mutually consistent: check_in_date <= check_out_date");
    CHECK(dotted(groups[1].members) == std::vector<std::string>{"guest_name", "nights"});
    CHECK(groups[1].correlation_note.empty());
}

TEST_CASE("grouping: hint problems warn without derailing the plan") {
    SchemaSet set = parse_schema(fixtures::kAllocationSchemas);
    const SchemaDef* root = set.message("fake_table_1");

    CorrelationHint ghost;
    ghost.columns = {ColumnPath::parse("date"), ColumnPath::parse("no_such_column")};
    ghost.note = "paired";
    CorrelationHint dup;
    dup.columns = {ColumnPath::parse("date"), ColumnPath::parse("allocation")};

    Warnings warnings;
    auto groups = group_columns(set, *root, {ghost, dup}, &warnings);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("'no_such_column' is not a generatable column") !=
          std::string::npos);
    CHECK(warnings[1].find("'date' already belongs to an earlier group") != std::string::npos);

    // date lands in the first hint's group; allocation still forms the second.
    REQUIRE(groups.size() >= 2);
    CHECK(dotted(groups[0].members) == std::vector<std::string>{"date"});
    CHECK(groups[0].correlation_note == "paired");
    CHECK(dotted(groups[1].members) == std::vector<std::string>{"allocation"});
}

TEST_CASE("grouping: shared name prefixes and annotation keywords bucket the rest") {
    SchemaSet set = parse_schema(R"(
message shipment_row {
  int64 weight = 1;  // Shipment gross weight
  string carrier = 2;  // Carrier handling the shipment
  date contract_start_date = 3;
  date contract_end_date = 4;
  string status = 5;
}
)");
    const SchemaDef* root = set.message("shipment_row");

    Warnings warnings;
    auto groups = group_columns(set, *root, {}, &warnings);
    CHECK(warnings.empty());

    REQUIRE(groups.size() == 3);
    // Prefix bucket: contract_* dates, chained because both are dates.
    CHECK(dotted(groups[0].members) ==
          std::vector<std::string>{"contract_start_date", "contract_end_date"});
    CHECK(groups[0].correlation_note ==
          "dates must be mutually consistent: contract_start_date <= contract_end_date");
    // Keyword bucket: both annotations mention "shipment".
    CHECK(dotted(groups[1].members) == std::vector<std::string>{"weight", "carrier"});
    CHECK(groups[1].correlation_note ==
          "annotations mention 'shipment'; values should be mutually consistent");
    // Remainder packs in declaration order.
    CHECK(dotted(groups[2].members) == std::vector<std::string>{"status"});
}

TEST_CASE("grouping: machine annotations never feed the keyword heuristic") {
    SchemaSet set = parse_schema(R"(
message plain {
  int64 first = 1;
  int64 second = 2;
}
)");
    SchemaDef* root = set.message("plain");
    DeterministicBackend backend(1);
    fill_annotations(set, *root, backend, nullptr);  // both get "Int64 field ..." stubs

    auto groups = group_columns(set, *root, {}, nullptr);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].correlation_note.empty());  // packed remainder, not a keyword group
}

TEST_CASE("grouping: oversized groups chunk at the size cap") {
    std::string schema = "message wide {\n";
    for (int i = 1; i <= 65; ++i) schema += "  int64 col" + std::to_string(i) + ";\n";
    schema += "}\n";
    SchemaSet set = parse_schema(schema);
    const SchemaDef* root = set.message("wide");

    auto groups = group_columns(set, *root, {}, nullptr);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].members.size() == 30);
    CHECK(groups[1].members.size() == 30);
    CHECK(groups[2].members.size() == 5);
    CHECK(groups[0].members.front().dotted() == "col1");
    CHECK(groups[1].members.front().dotted() == "col31");
    CHECK(groups[2].members.back().dotted() == "col65");
}

TEST_CASE("grouping: nested leaf paths group like any other column") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    const SchemaDef* root = set.message("fake_table");

    auto groups = group_columns(set, *root, {}, nullptr);
    REQUIRE(groups.size() >= 1);
    std::vector<std::string> all;
    for (const auto& g : groups)
        for (const auto& m : g.members) all.push_back(m.dotted());
    // Every scalar/enum leaf appears exactly once across all groups.
    std::vector<std::string> expect = {
        "id", "owner", "private_info.running_balance.amount",
        "private_info.running_balance.currency", "private_info.running_balance.as_of",
        "private_info.archived"};
    std::sort(all.begin(), all.end());
    std::sort(expect.begin(), expect.end());
    CHECK(all == expect);
}

TEST_CASE("date chains: parse_date_chain reads the notes group_columns emits") {
    auto chain = parse_date_chain(
        "dates must be mutually consistent: check_in_date <= check_out_date");
    CHECK(dotted(chain) == std::vector<std::string>{"check_in_date", "check_out_date"});

    auto nested = parse_date_chain("stay.check_in <= stay.check_out <= stay.billed_at");
    CHECK(dotted(nested) ==
          std::vector<std::string>{"stay.check_in", "stay.check_out", "stay.billed_at"});

    CHECK(parse_date_chain("values in this group should be mutually consistent").empty());
    CHECK(parse_date_chain("x <= 5").empty());  // not a column chain
    CHECK(parse_date_chain("").empty());
}
