#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "sdgen/backend.hpp"
#include "sdgen/common.hpp"
#include "sdgen/generation.hpp"
#include "sdgen/schema_parser.hpp"
#include "sdgen/sql/parser.hpp"

using namespace sdgen;
using analysis::QueryAnalysis;

namespace {

QueryAnalysis analyze_text(const char* sql_text, const SchemaSet& set,
                           const ContextMap* ctx = nullptr) {
    return analysis::analyze(sql::parse_sql(sql_text), set, ctx);
}

std::vector<std::string> dotted(const std::vector<ColumnPath>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.dotted());
    return out;
}

const ColumnDirective* directive_for(const GenerationRequest& req, const char* path) {
    for (const auto& d : req.directives)
        if (d.column.dotted() == path) return &d;
    return nullptr;
}

/// Scripted stand-in backend: fails the chosen request index, echoes a fixed
/// textproto row for everything else.
class ScriptedBackend : public Backend {
  public:
    explicit ScriptedBackend(size_t fail_index) : fail_index_(fail_index) {}
    std::string kind() const override { return "scripted"; }
    BackendResult complete(const BackendRequest& request) override {
        REQUIRE(request.origin != nullptr);
        if (request.origin->index == fail_index_) return {false, "", "backend melted"};
        return {true, "marker: " + std::to_string(request.origin->index), ""};
    }

  private:
    size_t fail_index_;
};

/// Records the high-water mark of concurrent complete() calls.
class GaugeBackend : public Backend {
  public:
    std::string kind() const override { return "gauge"; }
    BackendResult complete(const BackendRequest& request) override {
        int now = ++in_flight_;
        int seen = high_water_.load();
        while (now > seen && !high_water_.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --in_flight_;
        return {true, std::to_string(request.origin->index), ""};
    }
    int high_water() const { return high_water_.load(); }

  private:
    std::atomic<int> in_flight_{0};
    std::atomic<int> high_water_{0};
};

GenerationRequest stub_request(size_t index, std::vector<ColumnPath> columns) {
    GenerationRequest req;
    req.index = index;
    req.table = "t";
    req.columns = std::move(columns);
    req.row_count = 1;
    return req;
}

}  // namespace

TEST_CASE("plan: flat table folds the query constraints into one group request") {
    SchemaSet set = parse_schema(fixtures::kAllocationSchemas);
    auto qa = analyze_text(fixtures::kAllocationJoinSql, set);
    ContextMap ctx;

    auto plan = plan_requests(qa, ctx, set, "fake_table_1", 42);
    REQUIRE(plan.size() == 1);
    const auto& req = plan[0];

    CHECK(req.scope == GenerationRequest::Scope::WholeGroup);
    CHECK(req.index == 0);
    CHECK(req.table == "fake_table_1");
    CHECK(req.row_count == 3);  // no coverage demand, default floor
    CHECK(req.seed == derive_seed(42, 0));
    CHECK(dotted(req.columns) ==
          std::vector<std::string>{"fake_column", "date", "username", "allocation"});
    CHECK(req.constraints_text ==
          "- fake_column='Regional_Team_Americas'\n"
          "- date>='2023-01-01'\n"
          "- date<='2023-03-31'");
    CHECK(req.signals_text.empty());
    CHECK(req.proto_description.find("message fake_table_1 {") != std::string::npos);
    CHECK(req.proto_description.find("int64 allocation = 4;") != std::string::npos);

    const ColumnDirective* pin = directive_for(req, "fake_column");
    REQUIRE(pin != nullptr);
    REQUIRE(pin->pin.has_value());
    CHECK(pin->pin->to_display() == "Regional_Team_Americas");

    const ColumnDirective* range = directive_for(req, "date");
    REQUIRE(range != nullptr);
    REQUIRE(range->lo.has_value());
    REQUIRE(range->hi.has_value());
    CHECK(range->lo->to_display() == "2023-01-01");
    CHECK(range->hi->to_display() == "2023-03-31");
}

TEST_CASE("plan: nested table splits into a scalar group plus the whole subtree") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    auto qa = analyze_text(fixtures::kBalanceFunctionSql, set);
    ContextMap ctx;

    auto plan = plan_requests(qa, ctx, set, "fake_table", 7);
    REQUIRE(plan.size() == 2);

    CHECK(plan[0].scope == GenerationRequest::Scope::WholeGroup);
    CHECK(dotted(plan[0].columns) == std::vector<std::string>{"id", "owner"});
    CHECK(plan[0].constraints_text.empty());
    CHECK(plan[0].row_count == 4);  // currency coverage demands all four values

    CHECK(plan[1].scope == GenerationRequest::Scope::NestedField);
    CHECK(plan[1].nested_field.dotted() == "private_info");
    CHECK(dotted(plan[1].columns) ==
          std::vector<std::string>{
              "private_info.running_balance.amount", "private_info.running_balance.currency",
              "private_info.running_balance.as_of", "private_info.archived"});
    CHECK(plan[1].constraints_text ==
          "- private_info.running_balance.currency should take each of these values across "
          "the generated rows: 'USD', 'GBP', 'EUR', 'AUD'");
    CHECK(plan[1].row_count == 4);
    CHECK(plan[1].seed == derive_seed(7, 1));
    CHECK(plan[1].proto_description.find("message RunningBalance {") != std::string::npos);
    CHECK(plan[1].proto_description.find("enum Currency {") != std::string::npos);

    const ColumnDirective* cycle =
        directive_for(plan[1], "private_info.running_balance.currency");
    REQUIRE(cycle != nullptr);
    CHECK(cycle->cycle.size() == 4);
}

TEST_CASE("plan: row counts follow explicit context or the widest coverage demand") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    auto qa = analyze_text(fixtures::kBalanceFunctionSql, set);

    ContextMap none;
    CHECK(plan_row_count(qa, none, "fake_table") == 4);

    ContextMap eight;
    eight.row_count = 8;
    CHECK(plan_row_count(qa, eight, "fake_table") == 8);

    ContextMap two;
    two.row_count = 2;
    CHECK_THROWS_WITH_AS(
        plan_requests(qa, two, set, "fake_table", 1),
        "row_count 2 cannot cover coverage target on "
        "fake_table.private_info.running_balance.currency, which needs at least 4 rows",
        PlanError);
}

TEST_CASE("plan: unknown table is an error") {
    SchemaSet set = parse_schema(fixtures::kAllocationSchemas);
    auto qa = analyze_text(fixtures::kAllocationJoinSql, set);
    ContextMap ctx;
    CHECK_THROWS_WITH_AS(plan_requests(qa, ctx, set, "nope", 1),
                         "no generation target named 'nope' in the analysis", PlanError);
}

TEST_CASE("plan: identical inputs produce identical plans") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    auto qa = analyze_text(fixtures::kBalanceFunctionSql, set);
    ContextMap ctx;
    ctx.user_criteria = "Accounts across all supported currencies.";

    auto a = plan_requests(qa, ctx, set, "fake_table", 99);
    auto b = plan_requests(qa, ctx, set, "fake_table", 99);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].constraints_text == b[i].constraints_text);
        CHECK(a[i].signals_text == b[i].signals_text);
        CHECK(a[i].proto_description == b[i].proto_description);
        CHECK(dotted(a[i].columns) == dotted(b[i].columns));
    }
}

TEST_CASE("plan: correlation hints route to the scope that can honor them") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    ContextMap ctx;
    CorrelationHint nested;
    nested.columns = {ColumnPath::parse("private_info.running_balance.as_of"),
                      ColumnPath::parse("private_info.running_balance.amount")};
    nested.note = "amount grows over time";
    CorrelationHint spanning;
    spanning.columns = {ColumnPath::parse("id"), ColumnPath::parse("private_info.archived")};
    CorrelationHint top;
    top.columns = {ColumnPath::parse("id"), ColumnPath::parse("owner")};
    ctx.correlations = {nested, spanning, top};

    auto qa = analyze_text(fixtures::kBalanceFunctionSql, set);
    Warnings warnings;
    auto plan = plan_requests(qa, ctx, set, "fake_table", 3, DataFormat::TextprotoLike,
                              &warnings);

    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0] ==
          "correlation hint spans generation scopes and is ignored: id, private_info.archived");

    REQUIRE(plan.size() == 2);
    // The top-level hint grouped id+owner; the empty note synthesizes.
    CHECK(plan[0].group.correlation_note == "values in this group should be mutually consistent");
    CHECK(plan[0].signals_text == "- values in this group should be mutually consistent");
    // The nested hint's note reaches the subtree request's signals.
    CHECK(plan[1].signals_text == "- amount grows over time");
}

TEST_CASE("plan: unresolved nested types are skipped with a warning") {
    SchemaSet set = parse_schema(R"(
message t {
  Ghost g = 1;
  int64 x = 2;
}
)");
    auto qa = analyze_text("SELECT x FROM t", set);
    ContextMap ctx;
    Warnings warnings;
    auto plan =
        plan_requests(qa, ctx, set, "t", 1, DataFormat::TextprotoLike, &warnings);
    REQUIRE(plan.size() == 1);
    CHECK(dotted(plan[0].columns) == std::vector<std::string>{"x"});
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0] == "field 't.g' has unresolved type 'Ghost'; skipped");
}

TEST_CASE("run: per-request failures never abort the batch") {
    std::vector<GenerationRequest> requests = {
        stub_request(0, {ColumnPath::parse("a")}),
        stub_request(1, {ColumnPath::parse("b")}),
        stub_request(2, {ColumnPath::parse("c")}),
    };
    ScriptedBackend backend(1);
    auto out = run_requests(requests, backend, 2);

    REQUIRE(out.size() == 3);
    CHECK(out[0].ok);
    CHECK(out[0].text == "marker: 0");
    CHECK_FALSE(out[1].ok);
    CHECK(out[1].error == "backend melted");
    CHECK(out[1].text.empty());
    CHECK(out[2].ok);
    CHECK(out[2].text == "marker: 2");
    CHECK(dotted(out[2].requested_columns) == std::vector<std::string>{"c"});
}

TEST_CASE("run: concurrency stays under the cap and results keep plan order") {
    std::vector<GenerationRequest> requests;
    for (size_t i = 0; i < 65; ++i)
        requests.push_back(stub_request(i, {ColumnPath::parse("a")}));

    GaugeBackend backend;
    auto out = run_requests(requests, backend, 10);

    CHECK(backend.high_water() <= 10);
    CHECK(backend.high_water() >= 2);  // the pool really ran in parallel
    REQUIRE(out.size() == 65);
    for (size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].index == i);
        CHECK(out[i].text == std::to_string(i));
    }
}

TEST_CASE("generate: deterministic backend honors pins, ranges, and cycles") {
    SchemaSet set = parse_schema(fixtures::kAllocationSchemas);
    auto qa = analyze_text(fixtures::kAllocationJoinSql, set);
    ContextMap ctx;
    auto plan = plan_requests(qa, ctx, set, "fake_table_1", 42);
    REQUIRE(plan.size() == 1);

    DeterministicBackend backend(9);
    auto raw = run_requests(plan, backend);
    REQUIRE(raw.size() == 1);
    REQUIRE_MESSAGE(raw[0].ok, raw[0].error);

    const SchemaDef* root = set.message("fake_table_1");
    auto rows = parse_generation(raw[0], set, *root);
    REQUIRE(rows.size() == 3);

    const CivilDate lo{2023, 1, 1}, hi{2023, 3, 31};
    for (const auto& row : rows) {
        const Value* fc = row.find("fake_column");
        REQUIRE(fc != nullptr);
        CHECK(fc->as_string() == "Regional_Team_Americas");

        const Value* d = row.find("date");
        REQUIRE(d != nullptr);
        REQUIRE(d->is_date());
        CHECK(lo <= d->as_date());
        CHECK(d->as_date() <= hi);

        const Value* alloc = row.find("allocation");
        REQUIRE(alloc != nullptr);
        CHECK(alloc->as_int() != 0);

        const Value* user = row.find("username");
        REQUIRE(user != nullptr);
        CHECK_FALSE(user->as_string().empty());
    }
}

TEST_CASE("generate: deterministic backend output is a pure function of request and seed") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    auto qa = analyze_text(fixtures::kBalanceFunctionSql, set);
    ContextMap ctx;
    auto plan = plan_requests(qa, ctx, set, "fake_table", 42);

    DeterministicBackend first(9);
    DeterministicBackend second(9);
    DeterministicBackend other(10);
    auto a = run_requests(plan, first);
    auto b = run_requests(plan, second);
    auto c = run_requests(plan, other);

    REQUIRE(a.size() == b.size());
    bool any_difference = false;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].text == b[i].text);
        if (a[i].text != c[i].text) any_difference = true;
    }
    CHECK(any_difference);  // the backend seed reaches the synthesized values
}

TEST_CASE("generate: merged rows cover every currency branch in cycle order") {
    SchemaSet set = parse_schema(fixtures::kBalanceSchemas);
    auto qa = analyze_text(fixtures::kBalanceFunctionSql, set);
    ContextMap ctx;
    auto plan = plan_requests(qa, ctx, set, "fake_table", 5);
    DeterministicBackend backend(5);
    auto raw = run_requests(plan, backend);

    const SchemaDef* root = set.message("fake_table");
    std::vector<std::vector<Row>> per_request;
    for (const auto& rg : raw) {
        REQUIRE_MESSAGE(rg.ok, rg.error);
        auto parsed = parse_generation(rg, set, *root);
        auto filtered = filter_hallucinations(std::move(parsed), rg.requested_columns);
        CHECK(filtered.removed.empty());  // own output never hallucinates
        per_request.push_back(std::move(filtered.rows));
    }

    Warnings warnings;
    auto rows = merge_generations(plan, per_request, plan[0].row_count, &warnings);
    CHECK(warnings.empty());
    REQUIRE(rows.size() == 4);

    std::vector<std::string> currencies;
    for (const auto& row : rows) {
        const Value* cur =
            get_path(row, {"private_info", "running_balance", "currency"});
        REQUIRE(cur != nullptr);
        currencies.push_back(cur->is_enum() ? cur->as_enum().name : cur->to_display());

        const Value* amount = get_path(row, {"private_info", "running_balance", "amount"});
        REQUIRE(amount != nullptr);
        CHECK(amount->as_float() != 0.0);

        CHECK(row.find("id") != nullptr);
        CHECK(row.find("owner") != nullptr);
    }
    CHECK(currencies == std::vector<std::string>{"USD", "GBP", "EUR", "AUD"});
}

TEST_CASE("generate: nested field with an empty message still yields block rows") {
    SchemaSet set = parse_schema(R"(
message holder {
  Meta meta = 1;
}
message Meta {
}
)");
    auto qa = analyze_text("SELECT * FROM holder", set);
    ContextMap ctx;
    auto plan = plan_requests(qa, ctx, set, "holder", 1);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0].scope == GenerationRequest::Scope::NestedField);
    CHECK(plan[0].columns.empty());

    DeterministicBackend backend(2);
    auto raw = run_requests(plan, backend);
    REQUIRE_MESSAGE(raw[0].ok, raw[0].error);

    const SchemaDef* root = set.message("holder");
    auto rows = parse_generation(raw[0], set, *root);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        const Value* meta = row.find("meta");
        REQUIRE(meta != nullptr);
        CHECK(meta->is_record());
        CHECK(meta->as_record().fields.empty());
    }
}

TEST_CASE("parse: unparseable output throws naming the head of the text") {
    SchemaSet set = parse_schema(fixtures::kAllocationSchemas);
    const SchemaDef* root = set.message("fake_table_1");
    RawGeneration raw;
    raw.ok = true;
    raw.text = "@@@@ $$$$ ****";
    CHECK_THROWS_AS((void)parse_generation(raw, set, *root), ParseError);
    try {
        (void)parse_generation(raw, set, *root);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unparseable generation output") != std::string::npos);
        CHECK(std::string(e.what()).find("@@@@") != std::string::npos);
    }
}

TEST_CASE("filter: hallucinated columns are removed and reported once") {
    Row r1;
    r1.set("fake_column", Value("x"));
    r1.set("invented", Value("y"));
    Record nested;
    nested.set("week", Value(int64_t{1}));
    r1.set("made_up", Value(nested));
    Row r2;
    r2.set("invented", Value("z"));
    r2.set("fake_column", Value("w"));

    auto fr = filter_hallucinations({r1, r2}, {ColumnPath::parse("fake_column")});
    REQUIRE(fr.rows.size() == 2);
    CHECK(fr.rows[0].fields.size() == 1);
    CHECK(fr.rows[0].find("fake_column")->as_string() == "x");
    CHECK(fr.rows[1].fields.size() == 1);
    CHECK(fr.rows[1].find("fake_column")->as_string() == "w");
    CHECK(dotted(fr.removed) == std::vector<std::string>{"invented", "made_up"});
}

TEST_CASE("filter: extra leaves inside a requested subtree are pruned by path") {
    Row row;
    Record info;
    info.set("amount", Value(int64_t{10}));
    info.set("extra", Value(int64_t{2}));
    row.set("info", Value(info));

    auto fr = filter_hallucinations({row}, {ColumnPath::parse("info.amount")});
    REQUIRE(fr.rows.size() == 1);
    const Value* info_v = fr.rows[0].find("info");
    REQUIRE(info_v != nullptr);
    CHECK(info_v->as_record().fields.size() == 1);
    CHECK(info_v->as_record().find("amount") != nullptr);
    CHECK(dotted(fr.removed) == std::vector<std::string>{"info.extra"});
}

TEST_CASE("filter: a fully hallucinated batch empties the rows") {
    Row row;
    row.set("b", Value(int64_t{1}));
    auto fr = filter_hallucinations({row, row}, {ColumnPath::parse("a")});
    REQUIRE(fr.rows.size() == 2);
    CHECK(fr.rows[0].fields.empty());
    CHECK(fr.rows[1].fields.empty());
    CHECK(dotted(fr.removed) == std::vector<std::string>{"b"});  // reported once
}

TEST_CASE("filter: clean rows pass through untouched") {
    Row row;
    row.set("a", Value(int64_t{1}));
    Record sub;
    sub.set("x", Value("deep"));
    row.set("n", Value(sub));

    auto fr = filter_hallucinations({row},
                                    {ColumnPath::parse("a"), ColumnPath::parse("n.x")});
    CHECK(fr.removed.empty());
    REQUIRE(fr.rows.size() == 1);
    CHECK(fr.rows[0] == row);
}

TEST_CASE("merge: positional union with truncation and shortfall warnings") {
    std::vector<GenerationRequest> requests = {stub_request(0, {ColumnPath::parse("a")}),
                                               stub_request(1, {ColumnPath::parse("b")})};
    Row a1, a2, a3, b1;
    a1.set("a", Value(int64_t{1}));
    a2.set("a", Value(int64_t{2}));
    a3.set("a", Value(int64_t{3}));
    b1.set("b", Value(int64_t{10}));

    Warnings warnings;
    auto rows = merge_generations(requests, {{a1, a2, a3}, {b1}}, 2, &warnings);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].find("a")->as_int() == 1);
    CHECK(rows[0].find("b")->as_int() == 10);
    CHECK(rows[1].find("a")->as_int() == 2);
    CHECK(rows[1].find("b") == nullptr);

    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0] == "request #0 returned 3 rows; keeping the first 2");
    CHECK(warnings[1] == "request #1 returned only 1 of 2 rows");

    CHECK_THROWS_AS(merge_generations(requests, {{a1}}, 1, nullptr), Error);
}
