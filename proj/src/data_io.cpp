#include "sdgen/data_io.hpp"

#include <cctype>
#include <charconv>

namespace sdgen {

std::string_view format_name(DataFormat f) {
    return f == DataFormat::Json ? "json" : "textproto";
}

std::optional<DataFormat> format_from_name(std::string_view name) {
    if (name == "textproto" || name == "textproto-like") return DataFormat::TextprotoLike;
    if (name == "json") return DataFormat::Json;
    return std::nullopt;
}

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string scalar_text(const Value& v) {
    if (v.is_string()) return quote(v.as_string());
    if (v.is_bytes()) return quote(v.as_bytes().data);
    if (v.is_date()) return quote(format_date(v.as_date()));
    if (v.is_timestamp()) return std::to_string(v.as_timestamp().epoch_seconds);
    return v.to_display();  // int, float, bool, enum
}

void write_field(const SchemaSet& set, const FieldDef& field, const Value& v, int depth,
                 std::string& out);

void write_record(const SchemaSet& set, const SchemaDef& schema, const Record& rec, int depth,
                  std::string& out) {
    for (const auto& field : schema.fields) {
        if (field.deprecated) continue;
        const Value* v = rec.find(field.name);
        if (!v || v->is_null()) continue;
        write_field(set, field, *v, depth, out);
    }
    for (const auto& [name, v] : rec.fields) {
        if (!schema.find_field(name))
            throw Error("row contains column '" + name + "' absent from schema " + schema.name);
    }
}

void write_single(const SchemaSet& set, const FieldDef& field, const Value& v, int depth,
                  std::string& out) {
    std::string indent(static_cast<size_t>(depth) * 2, ' ');
    if (v.is_record()) {
        const SchemaDef* child =
            field.is_nested() && field.nested().resolved ? set.message(field.nested().message) : nullptr;
        out += indent + field.name + " {\n";
        if (child) {
            write_record(set, *child, v.as_record(), depth + 1, out);
        } else {
            for (const auto& [name, cv] : v.as_record().fields) {
                FieldDef anon;
                anon.name = name;
                write_field(set, anon, cv, depth + 1, out);
            }
        }
        out += indent + "}\n";
    } else {
        out += indent + field.name + ": " + scalar_text(v) + "\n";
    }
}

void write_field(const SchemaSet& set, const FieldDef& field, const Value& v, int depth,
                 std::string& out) {
    if (v.is_list()) {
        for (const Value& elem : v.as_list()) write_single(set, field, elem, depth, out);
    } else {
        write_single(set, field, v, depth, out);
    }
}

nlohmann::ordered_json row_to_json(const SchemaSet& set, const SchemaDef& schema, const Record& rec);

nlohmann::ordered_json field_value_json(const SchemaSet& set, const FieldDef& field, const Value& v) {
    if (v.is_record()) {
        const SchemaDef* child =
            field.is_nested() && field.nested().resolved ? set.message(field.nested().message) : nullptr;
        if (child) return row_to_json(set, *child, v.as_record());
        return value_to_json(v);
    }
    return value_to_json(v);
}

nlohmann::ordered_json row_to_json(const SchemaSet& set, const SchemaDef& schema, const Record& rec) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& field : schema.fields) {
        if (field.deprecated) continue;
        const Value* v = rec.find(field.name);
        if (!v || v->is_null()) continue;
        if (v->is_list()) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const Value& elem : v->as_list()) arr.push_back(field_value_json(set, field, elem));
            obj[field.name] = std::move(arr);
        } else {
            obj[field.name] = field_value_json(set, field, *v);
        }
    }
    for (const auto& [name, v] : rec.fields) {
        if (!schema.find_field(name))
            throw Error("row contains column '" + name + "' absent from schema " + schema.name);
    }
    return obj;
}

}  // namespace

std::string serialize_rows(const SchemaSet& set, const SchemaDef& schema,
                           const std::vector<Row>& rows, DataFormat fmt) {
    if (fmt == DataFormat::Json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const Row& row : rows) arr.push_back(row_to_json(set, schema, row));
        return arr.dump(2) + "\n";
    }
    std::string out;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (i) out += "---\n";
        write_record(set, schema, rows[i], 0, out);
    }
    return out;
}

std::string strip_markdown_fences(std::string_view text) {
    std::vector<std::string> lines = split(std::string(text), '\n');
    size_t open = lines.size();
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).rfind("```", 0) == 0) {
            open = i;
            break;
        }
    }
    if (open == lines.size()) return std::string(text);
    size_t close = lines.size();
    for (size_t i = open + 1; i < lines.size(); ++i) {
        if (trim(lines[i]).rfind("```", 0) == 0) {
            close = i;
            break;
        }
    }
    std::string out;
    for (size_t i = open + 1; i < close; ++i) {
        out += lines[i];
        out += '\n';
    }
    return out;
}

namespace {

// --- textproto-like structural parse ---------------------------------------

struct DataTok {
    enum Type { Ident, Int, Float, Str, Punct, RowSep, End };
    Type type = End;
    std::string text;
    int line = 1;
};

std::vector<DataTok> lex_data(std::string_view src, Warnings* fragments) {
    std::vector<DataTok> toks;
    int line = 1;
    size_t i = 0;
    auto line_start_is_dashes = [&](size_t pos) {
        size_t j = pos;
        int dashes = 0;
        while (j < src.size() && src[j] == '-') {
            ++dashes;
            ++j;
        }
        while (j < src.size() && (src[j] == ' ' || src[j] == '\t')) ++j;
        if (dashes >= 3 && (j == src.size() || src[j] == '\n')) return j;
        return pos;
    };
    bool at_line_start = true;
    while (i < src.size()) {
        char c = src[i];
        if (at_line_start) {
            size_t after = line_start_is_dashes(i);
            if (after != i) {
                toks.push_back({DataTok::RowSep, "---", line});
                i = after;
                at_line_start = false;
                continue;
            }
        }
        if (c == '\n') {
            ++line;
            ++i;
            at_line_start = true;
            continue;
        }
        at_line_start = false;
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        DataTok t;
        t.line = line;
        if (c == '"' || c == '\'') {
            char q = c;
            ++i;
            std::string s;
            bool closed = false;
            while (i < src.size()) {
                if (src[i] == '\\' && i + 1 < src.size()) {
                    char e = src[i + 1];
                    if (e == 'n') s += '\n';
                    else if (e == 't') s += '\t';
                    else if (e == 'r') s += '\r';
                    else s += e;
                    i += 2;
                    continue;
                }
                if (src[i] == q) {
                    ++i;
                    closed = true;
                    break;
                }
                if (src[i] == '\n') break;
                s += src[i++];
            }
            if (!closed && fragments)
                fragments->push_back("unterminated string at line " + std::to_string(line));
            t.type = DataTok::Str;
            t.text = std::move(s);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
            t.type = DataTok::Ident;
            t.text = std::string(src.substr(start, i - start));
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            size_t start = i;
            bool is_float = false;
            if (c == '-' || c == '+') ++i;
            while (i < src.size()) {
                char d = src[i];
                if (std::isdigit(static_cast<unsigned char>(d))) {
                    ++i;
                } else if (d == '.' || d == 'e' || d == 'E') {
                    is_float = true;
                    ++i;
                    if (i < src.size() && (src[i] == '-' || src[i] == '+') &&
                        (d == 'e' || d == 'E'))
                        ++i;
                } else {
                    break;
                }
            }
            t.type = is_float ? DataTok::Float : DataTok::Int;
            t.text = std::string(src.substr(start, i - start));
            if (t.text == "-" || t.text == "+" || t.text == ".") {
                if (fragments)
                    fragments->push_back("stray '" + t.text + "' at line " + std::to_string(line));
                continue;
            }
        } else if (std::string_view("{}:[],").find(c) != std::string_view::npos) {
            t.type = DataTok::Punct;
            t.text = std::string(1, c);
            ++i;
        } else {
            if (fragments)
                fragments->push_back(std::string("unrecognized character '") + c + "' at line " +
                                     std::to_string(line));
            ++i;
            continue;
        }
        toks.push_back(std::move(t));
    }
    toks.push_back({DataTok::End, "", line});
    return toks;
}

class TextprotoParser {
public:
    TextprotoParser(std::string_view src, Warnings* fragments)
        : toks_(lex_data(src, fragments)), fragments_(fragments) {}

    std::vector<Row> run() {
        std::vector<Row> rows;
        Row current;
        while (peek().type != DataTok::End) {
            if (peek().type == DataTok::RowSep) {
                take();
                if (!current.fields.empty()) rows.push_back(std::move(current));
                current = Row{};
                continue;
            }
            parse_field(current);
        }
        if (!current.fields.empty()) rows.push_back(std::move(current));
        return rows;
    }

private:
    std::vector<DataTok> toks_;
    Warnings* fragments_;
    size_t pos_ = 0;

    const DataTok& peek() const { return toks_[pos_]; }
    DataTok take() { return toks_[pos_++]; }

    void skip_line(const std::string& why) {
        int line = peek().line;
        if (fragments_)
            fragments_->push_back(why + " at line " + std::to_string(line) + " near '" +
                                  (peek().type == DataTok::End ? "<eof>" : peek().text) + "'");
        while (peek().type != DataTok::End && peek().line == line) take();
    }

    void add_value(Record& rec, const std::string& name, Value v) {
        if (Value* existing = rec.find(name)) {
            if (existing->is_list()) {
                existing->as_list().push_back(std::move(v));
            } else {
                Value::List list;
                list.push_back(std::move(*existing));
                list.push_back(std::move(v));
                *existing = Value(std::move(list));
            }
        } else {
            rec.set(name, std::move(v));
        }
    }

    bool parse_field(Record& rec) {
        if (peek().type != DataTok::Ident) {
            skip_line("expected field name");
            return false;
        }
        std::string name = take().text;
        if (peek().type == DataTok::Punct && peek().text == "{") {
            take();
            Record nested;
            parse_block(nested);
            add_value(rec, name, Value(std::move(nested)));
            return true;
        }
        if (!(peek().type == DataTok::Punct && peek().text == ":")) {
            skip_line("expected ':' or '{' after field name '" + name + "'");
            return false;
        }
        take();
        if (peek().type == DataTok::Punct && peek().text == "{") {
            take();
            Record nested;
            parse_block(nested);
            add_value(rec, name, Value(std::move(nested)));
            return true;
        }
        if (peek().type == DataTok::Punct && peek().text == "[") {
            take();
            Value::List list;
            while (!(peek().type == DataTok::Punct && peek().text == "]")) {
                if (peek().type == DataTok::End) {
                    skip_line("unterminated list for field '" + name + "'");
                    return false;
                }
                if (auto v = parse_scalar()) list.push_back(std::move(*v));
                else return false;
                if (peek().type == DataTok::Punct && peek().text == ",") take();
            }
            take();
            add_value(rec, name, Value(std::move(list)));
            return true;
        }
        if (auto v = parse_scalar()) {
            add_value(rec, name, std::move(*v));
            return true;
        }
        return false;
    }

    void parse_block(Record& rec) {
        while (!(peek().type == DataTok::Punct && peek().text == "}")) {
            if (peek().type == DataTok::End) {
                if (fragments_) fragments_->push_back("unterminated block");
                return;
            }
            if (peek().type == DataTok::RowSep) {
                take();
                continue;
            }
            parse_field(rec);
        }
        take();
    }

    std::optional<Value> parse_scalar() {
        const DataTok& t = peek();
        switch (t.type) {
            case DataTok::Int: {
                int64_t v = 0;
                auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                take();
                if (ec != std::errc{}) return Value(t.text);
                return Value(v);
            }
            case DataTok::Float: {
                std::string text = take().text;
                try {
                    return Value(std::stod(text));
                } catch (const std::exception&) {
                    return Value(text);
                }
            }
            case DataTok::Str: return Value(take().text);
            case DataTok::Ident: {
                std::string word = take().text;
                if (word == "true") return Value(true);
                if (word == "false") return Value(false);
                if (word == "null") return Value(Null{});
                return Value(EnumVal{std::move(word)});
            }
            default:
                skip_line("expected a value");
                return std::nullopt;
        }
    }
};

// Removes commas directly preceding '}' or ']' outside string literals.
std::string drop_trailing_commas(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            out += c;
            if (c == '\\' && i + 1 < s.size()) out += s[++i];
            else if (c == '"') in_str = false;
            continue;
        }
        if (c == '"') {
            in_str = true;
            out += c;
            continue;
        }
        if (c == ',') {
            size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += c;
    }
    return out;
}

std::string_view first_80(std::string_view s) { return s.substr(0, std::min<size_t>(80, s.size())); }

}  // namespace

std::vector<Row> parse_data_text(std::string_view text, Warnings* fragments) {
    std::string body = strip_markdown_fences(text);
    std::string trimmed = trim(body);
    if (trimmed.empty())
        throw ParseError("unparseable generation output: empty text");
    if (trimmed[0] == '[' || trimmed[0] == '{') {
        nlohmann::ordered_json j =
            nlohmann::ordered_json::parse(drop_trailing_commas(trimmed), nullptr, false, true);
        if (!j.is_discarded()) {
            std::vector<Row> rows;
            auto push_row = [&](const nlohmann::ordered_json& obj) {
                Value v = json_to_value(obj);
                if (v.is_record()) rows.push_back(std::move(v.as_record()));
                else if (fragments) fragments->push_back("non-object row skipped");
            };
            if (j.is_array()) {
                for (const auto& elem : j) push_row(elem);
            } else {
                push_row(j);
            }
            if (!rows.empty()) return rows;
        }
        // Malformed JSON falls through to textproto-style recovery.
    }
    std::vector<Row> rows = TextprotoParser(body, fragments).run();
    if (rows.empty())
        throw ParseError("unparseable generation output: \"" + std::string(first_80(trimmed)) +
                         "\"");
    return rows;
}

namespace {

std::optional<int64_t> parse_int_text(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_float_text(std::string_view s) {
    if (s.empty()) return std::nullopt;
    try {
        size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<std::string> value_text(const Value& v) {
    if (v.is_string()) return v.as_string();
    if (v.is_enum()) return v.as_enum().name;
    return std::nullopt;
}

Value coerce_scalar(const Value& v, Scalar target) {
    switch (target) {
        case Scalar::Int64:
            if (v.is_int()) return v;
            if (v.is_float()) {
                double d = v.as_float();
                if (d == static_cast<double>(static_cast<int64_t>(d)))
                    return Value(static_cast<int64_t>(d));
                return v;
            }
            if (auto t = value_text(v); t)
                if (auto i = parse_int_text(*t)) return Value(*i);
            return v;
        case Scalar::Float64:
            if (v.is_float()) return v;
            if (v.is_int()) return Value(static_cast<double>(v.as_int()));
            if (auto t = value_text(v); t)
                if (auto d = parse_float_text(*t)) return Value(*d);
            return v;
        case Scalar::Bool:
            if (v.is_bool()) return v;
            if (auto t = value_text(v); t) {
                if (iequals(*t, "true")) return Value(true);
                if (iequals(*t, "false")) return Value(false);
            }
            return v;
        case Scalar::String:
            if (v.is_string()) return v;
            if (v.is_enum()) return Value(v.as_enum().name);
            return v;
        case Scalar::Bytes:
            if (v.is_bytes()) return v;
            if (auto t = value_text(v); t) return Value(Bytes{*t});
            return v;
        case Scalar::Date:
            if (v.is_date()) return v;
            if (auto t = value_text(v); t)
                if (auto d = parse_date(*t)) return Value(*d);
            return v;
        case Scalar::Timestamp:
            if (v.is_timestamp()) return v;
            if (v.is_int()) return Value(Timestamp{v.as_int(), ""});
            if (auto t = value_text(v); t)
                if (auto i = parse_int_text(*t)) return Value(Timestamp{*i, ""});
            return v;
    }
    return v;
}

Value coerce_element(const SchemaSet& set, const FieldDef& field, const Value& v) {
    if (field.is_scalar()) return coerce_scalar(v, field.scalar());
    if (field.is_enum()) {
        if (auto t = value_text(v); t) {
            for (const auto& allowed : field.enum_kind().values)
                if (allowed == *t) return Value(EnumVal{*t});
            if (v.is_string()) return Value(EnumVal{*t});  // normalized form; r2 flags membership
        }
        return v;
    }
    const NestedKind& n = field.nested();
    const SchemaDef* child = n.resolved ? set.message(n.message) : nullptr;
    if (child && v.is_record()) return Value(coerce_row(set, *child, v.as_record()));
    return v;
}

bool element_fits(const SchemaSet& set, const FieldDef& field, const Value& v) {
    if (v.is_null()) return true;
    if (field.is_scalar()) {
        switch (field.scalar()) {
            case Scalar::Int64: return v.is_int();
            case Scalar::Float64: return v.is_float() || v.is_int();
            case Scalar::Bool: return v.is_bool();
            case Scalar::String: return v.is_string();
            case Scalar::Bytes: return v.is_bytes();
            case Scalar::Date: return v.is_date();
            case Scalar::Timestamp: return v.is_timestamp();
        }
        return false;
    }
    if (field.is_enum()) {
        if (!v.is_enum()) return false;
        for (const auto& m : field.enum_kind().values)
            if (m == v.as_enum().name) return true;
        return false;
    }
    if (!v.is_record()) return false;
    const NestedKind& n = field.nested();
    const SchemaDef* child = n.resolved ? set.message(n.message) : nullptr;
    if (!child) return true;  // unresolved reference: nothing to check against
    for (const auto& [name, cv] : v.as_record().fields) {
        const FieldDef* cf = child->find_field(name);
        if (!cf || !value_fits_field(set, *cf, cv)) return false;
    }
    return true;
}

}  // namespace

Row coerce_row(const SchemaSet& set, const SchemaDef& schema, const Row& raw) {
    Row out;
    for (const auto& [name, v] : raw.fields) {
        const FieldDef* field = schema.find_field(name);
        if (!field) {
            out.set(name, v);
            continue;
        }
        out.set(name, coerce_field_value(set, *field, v));
    }
    return out;
}

Value coerce_field_value(const SchemaSet& set, const FieldDef& field, const Value& v) {
    if (field.repeated) {
        Value::List out;
        if (v.is_list()) {
            for (const Value& elem : v.as_list()) out.push_back(coerce_element(set, field, elem));
        } else {
            out.push_back(coerce_element(set, field, v));
        }
        return Value(std::move(out));
    }
    return coerce_element(set, field, v);
}

bool value_fits_field(const SchemaSet& set, const FieldDef& field, const Value& v) {
    if (v.is_null()) return true;
    if (field.repeated) {
        if (!v.is_list()) return false;
        for (const auto& e : v.as_list())
            if (!element_fits(set, field, e)) return false;
        return true;
    }
    if (v.is_list()) return false;
    return element_fits(set, field, v);
}

nlohmann::ordered_json value_to_json(const Value& v) {
    struct Conv {
        nlohmann::ordered_json operator()(const Null&) const { return nullptr; }
        nlohmann::ordered_json operator()(int64_t i) const { return i; }
        nlohmann::ordered_json operator()(double d) const { return d; }
        nlohmann::ordered_json operator()(bool b) const { return b; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
        nlohmann::ordered_json operator()(const Bytes& b) const { return b.data; }
        nlohmann::ordered_json operator()(const CivilDate& d) const { return format_date(d); }
        nlohmann::ordered_json operator()(const Timestamp& t) const { return t.epoch_seconds; }
        nlohmann::ordered_json operator()(const EnumVal& e) const { return e.name; }
        nlohmann::ordered_json operator()(const Value::List& l) const {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const Value& elem : l) arr.push_back(value_to_json(elem));
            return arr;
        }
        nlohmann::ordered_json operator()(const Record& r) const {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (const auto& [k, val] : r.fields) obj[k] = value_to_json(val);
            return obj;
        }
    };
    return std::visit(Conv{}, v.storage());
}

Value json_to_value(const nlohmann::ordered_json& j) {
    if (j.is_null()) return Value(Null{});
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number_integer()) return Value(j.get<int64_t>());
    if (j.is_number_unsigned()) return Value(static_cast<int64_t>(j.get<uint64_t>()));
    if (j.is_number_float()) return Value(j.get<double>());
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_array()) {
        Value::List list;
        for (const auto& elem : j) list.push_back(json_to_value(elem));
        return Value(std::move(list));
    }
    Record rec;
    for (auto it = j.begin(); it != j.end(); ++it) rec.set(it.key(), json_to_value(it.value()));
    return Value(std::move(rec));
}

}  // namespace sdgen
