#pragma once

// Shared SQL and schema fixtures used across the parser, analysis, and
// pipeline test suites.

namespace fixtures {

// Team allocation rows joined against weekly capacity, with a quarter-scoped
// filter on the allocation side. Exercises derived tables, a LEFT JOIN with
// a SAFE_CAST on one key, and two equijoin pairs.
inline const char* kAllocationJoinSql =
    "SELECT * FROM ( SELECT * FROM fake_table_1 WHERE fake_column = "
    "\"Regional_Team_Americas\" AND date >= \"2023-01-01\" AND date <= \"2023-03-31\" ) AP "
    "LEFT JOIN (SELECT * FROM fake_table_2) AS Capacity ON SAFE_CAST(AP.date AS STRING) = "
    "Capacity.week_start_date AND AP.username = Capacity.username";

inline const char* kAllocationSchemas = R"(
message fake_table_1 {
  string fake_column = 1;
  date date = 2;
  string username = 3;
  int64 allocation = 4;
}

message fake_table_2 {
  string week_start_date = 1;
  string username = 2;
  float64 capacity = 3;
}
)";

// Scalar function over a nested table type: a currency CASE whose branches
// (plus the implicit ELSE) all need covering rows.
inline const char* kBalanceFunctionSql =
    "CREATE PUBLIC FUNCTION GetBalanceInUsd(Input fake_table) RETURNS INT64 AS ( CASE WHEN "
    "private_info.running_balance.currency = 'USD' THEN private_info.running_balance.amount "
    "WHEN private_info.running_balance.currency = 'GBP' THEN "
    "private_info.running_balance.amount * 1.26 WHEN private_info.running_balance.currency = "
    "'EUR' THEN private_info.running_balance.amount * 1.05 ELSE NULL END );";

inline const char* kBalanceSchemas = R"(
message fake_table {
  int64 id = 1;
  string owner = 2;
  PrivateInfo private_info = 3;
}

message PrivateInfo {
  RunningBalance running_balance = 1;
  bool archived = 2;
}

message RunningBalance {
  float64 amount = 1;
  Currency currency = 2;
  date as_of = 3;
}

enum Currency {
  USD;
  GBP;
  EUR;
  AUD;
}
)";

// Quarterly conversion-rate aggregation: DATE_TRUNC bucketing over a
// BETWEEN-bounded year, one bucket per quarter.
inline const char* kQuarterlyAdsSql =
    "SELECT date_trunc(logdate, quarter), sum(conversions) / sum(clicks) FROM fake_table_1 "
    "WHERE result_type = 'TEXT_AD' AND logdate BETWEEN '2022-01-01' AND '2022-12-31' GROUP BY "
    "date_trunc(logdate, quarter);";

inline const char* kQuarterlyAdsSchemas = R"(
message fake_table_1 {
  date logdate = 1;
  string result_type = 2;
  int64 conversions = 3;
  int64 clicks = 4;
}
)";

// Task rollup per device: inner join plus timestamp reformatting inside a
// derived table, LIKE filtering, and an aggregate STRUCT projection.
inline const char* kProjectTasksSql =
    "SELECT name, ARRAY_AGG(STRUCT(task, start_date)) FROM ( SELECT d.name, t.name AS task, "
    "FORMAT_TIMESTAMP(\"%Y-%m-%d\", PARSE_TIMESTAMP(\"%Y%m%d\", t.start_date)) AS start_date "
    "FROM fake_project_tasks AS t INNER JOIN fake_devices AS d ON t.project_id = d.id WHERE "
    "t.name LIKE '%fake_task_name%' ORDER BY start_date ) GROUP BY name;";

inline const char* kProjectTasksSchemas = R"(
message fake_project_tasks {
  int64 project_id = 1;
  string name = 2;
  string start_date = 3;
}

message fake_devices {
  int64 id = 1;
  string name = 2;
}
)";

}  // namespace fixtures
