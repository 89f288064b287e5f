#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdgen/dates.hpp"

namespace sdgen {

class Value;

struct Null {
    friend bool operator==(const Null&, const Null&) { return true; }
};

struct Bytes {
    std::string data;
    friend bool operator==(const Bytes&, const Bytes&) = default;
};

struct Timestamp {
    int64_t epoch_seconds = 0;
    std::string zone;  // optional IANA-style label, empty = none
    friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

struct EnumVal {
    std::string name;
    friend bool operator==(const EnumVal&, const EnumVal&) = default;
};

/// Ordered field-name -> value mapping; order is schema declaration order for
/// pipeline-produced rows and source order for parsed text.
struct Record {
    std::vector<std::pair<std::string, Value>> fields;

    const Value* find(std::string_view name) const;
    Value* find(std::string_view name);
    Value& set(const std::string& name, Value v);
    bool erase(std::string_view name);
    friend bool operator==(const Record&, const Record&);
};

/// A generated cell value. Rows are Records at the table root.
class Value {
public:
    using List = std::vector<Value>;
    using Storage = std::variant<Null, int64_t, double, bool, std::string, Bytes, CivilDate,
                                 Timestamp, EnumVal, List, Record>;

    Value() : v_(Null{}) {}
    Value(Null n) : v_(n) {}
    Value(int64_t i) : v_(i) {}
    Value(int i) : v_(static_cast<int64_t>(i)) {}
    Value(double d) : v_(d) {}
    Value(bool b) : v_(b) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(Bytes b) : v_(std::move(b)) {}
    Value(CivilDate d) : v_(d) {}
    Value(Timestamp t) : v_(std::move(t)) {}
    Value(EnumVal e) : v_(std::move(e)) {}
    Value(List l) : v_(std::move(l)) {}
    Value(Record r) : v_(std::move(r)) {}

    bool is_null() const { return std::holds_alternative<Null>(v_); }
    bool is_int() const { return std::holds_alternative<int64_t>(v_); }
    bool is_float() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_bytes() const { return std::holds_alternative<Bytes>(v_); }
    bool is_date() const { return std::holds_alternative<CivilDate>(v_); }
    bool is_timestamp() const { return std::holds_alternative<Timestamp>(v_); }
    bool is_enum() const { return std::holds_alternative<EnumVal>(v_); }
    bool is_list() const { return std::holds_alternative<List>(v_); }
    bool is_record() const { return std::holds_alternative<Record>(v_); }

    int64_t as_int() const { return std::get<int64_t>(v_); }
    double as_float() const { return std::get<double>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Bytes& as_bytes() const { return std::get<Bytes>(v_); }
    const CivilDate& as_date() const { return std::get<CivilDate>(v_); }
    const Timestamp& as_timestamp() const { return std::get<Timestamp>(v_); }
    const EnumVal& as_enum() const { return std::get<EnumVal>(v_); }
    const List& as_list() const { return std::get<List>(v_); }
    List& as_list() { return std::get<List>(v_); }
    const Record& as_record() const { return std::get<Record>(v_); }
    Record& as_record() { return std::get<Record>(v_); }

    const Storage& storage() const { return v_; }

    /// Short type tag for diagnostics ("int", "record", ...).
    std::string type_name() const;

    /// Canonical display form; strings unquoted. Used in violation messages.
    std::string to_display() const;

    friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }

private:
    Storage v_;
};

using Row = Record;

/// Dotted-path cell access on a row; descends through records. A repeated
/// field yields the list itself; `get_path` does not index into lists.
const Value* get_path(const Row& row, const std::vector<std::string>& segments);
/// Creates intermediate records as needed and overwrites the leaf.
void set_path(Row& row, const std::vector<std::string>& segments, Value v);
bool erase_path(Row& row, const std::vector<std::string>& segments);

}  // namespace sdgen
