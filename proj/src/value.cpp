#include "sdgen/value.hpp"

#include <cinttypes>
#include <cstdio>

namespace sdgen {

const Value* Record::find(std::string_view name) const {
    for (const auto& [k, v] : fields)
        if (k == name) return &v;
    return nullptr;
}

Value* Record::find(std::string_view name) {
    for (auto& [k, v] : fields)
        if (k == name) return &v;
    return nullptr;
}

Value& Record::set(const std::string& name, Value v) {
    if (Value* existing = find(name)) {
        *existing = std::move(v);
        return *existing;
    }
    fields.emplace_back(name, std::move(v));
    return fields.back().second;
}

bool Record::erase(std::string_view name) {
    for (auto it = fields.begin(); it != fields.end(); ++it) {
        if (it->first == name) {
            fields.erase(it);
            return true;
        }
    }
    return false;
}

bool operator==(const Record& a, const Record& b) { return a.fields == b.fields; }

std::string Value::type_name() const {
    struct Namer {
        std::string operator()(const Null&) const { return "null"; }
        std::string operator()(int64_t) const { return "int"; }
        std::string operator()(double) const { return "float"; }
        std::string operator()(bool) const { return "bool"; }
        std::string operator()(const std::string&) const { return "string"; }
        std::string operator()(const Bytes&) const { return "bytes"; }
        std::string operator()(const CivilDate&) const { return "date"; }
        std::string operator()(const Timestamp&) const { return "timestamp"; }
        std::string operator()(const EnumVal&) const { return "enum"; }
        std::string operator()(const Value::List&) const { return "list"; }
        std::string operator()(const Record&) const { return "record"; }
    };
    return std::visit(Namer{}, v_);
}

namespace {

std::string format_float(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, d);
        double back = 0;
        std::sscanf(shorter, "%lf", &back);
        if (back == d) return shorter;
    }
    return buf;
}

}  // namespace

std::string Value::to_display() const {
    struct Shower {
        std::string operator()(const Null&) const { return "null"; }
        std::string operator()(int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_float(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const Bytes& b) const { return b.data; }
        std::string operator()(const CivilDate& d) const { return format_date(d); }
        std::string operator()(const Timestamp& t) const {
            std::string s = std::to_string(t.epoch_seconds);
            if (!t.zone.empty()) s += " " + t.zone;
            return s;
        }
        std::string operator()(const EnumVal& e) const { return e.name; }
        std::string operator()(const Value::List& l) const {
            std::string out = "[";
            for (size_t i = 0; i < l.size(); ++i) {
                if (i) out += ", ";
                out += l[i].to_display();
            }
            return out + "]";
        }
        std::string operator()(const Record& r) const {
            std::string out = "{";
            for (size_t i = 0; i < r.fields.size(); ++i) {
                if (i) out += ", ";
                out += r.fields[i].first + ": " + r.fields[i].second.to_display();
            }
            return out + "}";
        }
    };
    return std::visit(Shower{}, v_);
}

const Value* get_path(const Row& row, const std::vector<std::string>& segments) {
    const Record* rec = &row;
    for (size_t i = 0; i < segments.size(); ++i) {
        const Value* v = rec->find(segments[i]);
        if (!v) return nullptr;
        if (i + 1 == segments.size()) return v;
        if (!v->is_record()) return nullptr;
        rec = &v->as_record();
    }
    return nullptr;
}

void set_path(Row& row, const std::vector<std::string>& segments, Value v) {
    Record* rec = &row;
    for (size_t i = 0; i + 1 < segments.size(); ++i) {
        Value* child = rec->find(segments[i]);
        if (!child || !child->is_record()) child = &rec->set(segments[i], Record{});
        rec = &child->as_record();
    }
    rec->set(segments.back(), std::move(v));
}

bool erase_path(Row& row, const std::vector<std::string>& segments) {
    Record* rec = &row;
    for (size_t i = 0; i + 1 < segments.size(); ++i) {
        Value* child = rec->find(segments[i]);
        if (!child || !child->is_record()) return false;
        rec = &child->as_record();
    }
    return rec->erase(segments.back());
}

}  // namespace sdgen
