#include "sdgen/schema_parser.hpp"

#include <cctype>
#include <vector>

namespace sdgen {
namespace {

struct Token {
    enum Type { Ident, Number, Punct, End };
    Type type = End;
    std::string text;
    int line = 0, col = 0;
};

struct Comment {
    std::string text;
    int line = 0;
    bool own_line = true;  // no token precedes it on its line
    bool used = false;
};

struct Lexed {
    std::vector<Token> tokens;
    std::vector<Comment> comments;
};

Lexed lex(std::string_view src) {
    Lexed out;
    int line = 1, col = 1;
    size_t i = 0;
    bool token_on_line = false;
    auto advance = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 1;
            token_on_line = false;
        } else {
            ++col;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            size_t start = i + 2;
            size_t end = start;
            while (end < src.size() && src[end] != '\n') ++end;
            out.comments.push_back({trim(std::string(src.substr(start, end - start))), line,
                                    !token_on_line, false});
            while (i < end) {
                advance(src[i]);
                ++i;
            }
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(c);
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
                advance(src[i]);
                ++i;
            }
            t.type = Token::Ident;
            t.text = std::string(src.substr(start, i - start));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '-' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t start = i;
            advance(src[i]);
            ++i;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                advance(src[i]);
                ++i;
            }
            t.type = Token::Number;
            t.text = std::string(src.substr(start, i - start));
        } else if (std::string_view("{}[]=;,").find(c) != std::string_view::npos) {
            t.type = Token::Punct;
            t.text = std::string(1, c);
            advance(c);
            ++i;
        } else {
            throw ParseError(std::string("unexpected character '") + c + "' in schema", line, col);
        }
        token_on_line = true;
        out.tokens.push_back(std::move(t));
    }
    out.tokens.push_back({Token::End, "", line, col});
    return out;
}

class Parser {
public:
    Parser(SchemaSet& set, std::string_view src) : set_(set), lexed_(lex(src)) {}

    void run() {
        while (!at_end()) {
            std::string ann = leading_annotation(peek().line);
            if (peek().text == "message") {
                parse_message(ann);
            } else if (peek().text == "enum") {
                parse_enum(ann);
            } else {
                fail("expected 'message' or 'enum'");
            }
        }
    }

private:
    SchemaSet& set_;
    Lexed lexed_;
    size_t pos_ = 0;

    const Token& peek() const { return lexed_.tokens[pos_]; }
    bool at_end() const { return peek().type == Token::End; }
    Token take() { return lexed_.tokens[pos_++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " (got '" + (at_end() ? "<eof>" : peek().text) + "')", peek().line,
                         peek().col);
    }

    Token expect_punct(char c) {
        if (peek().type != Token::Punct || peek().text[0] != c)
            fail(std::string("expected '") + c + "'");
        return take();
    }

    Token expect_ident() {
        if (peek().type != Token::Ident) fail("expected identifier");
        return take();
    }

    /// Joins the maximal run of own-line comments directly above `line`.
    std::string leading_annotation(int line) {
        std::vector<Comment*> run;
        int want = line - 1;
        for (auto it = lexed_.comments.rbegin(); it != lexed_.comments.rend(); ++it) {
            if (it->used || !it->own_line || it->line > want) continue;
            if (it->line < want) break;
            run.push_back(&*it);
            --want;
        }
        std::string ann;
        for (auto it = run.rbegin(); it != run.rend(); ++it) {
            (*it)->used = true;
            if (!ann.empty()) ann += ' ';
            ann += (*it)->text;
        }
        return ann;
    }

    /// First unused trailing comment on `line` (after the item's last token).
    std::string trailing_annotation(int line) {
        for (auto& c : lexed_.comments) {
            if (!c.used && !c.own_line && c.line == line) {
                c.used = true;
                return c.text;
            }
        }
        return "";
    }

    void parse_message(std::string annotation) {
        take();  // message
        Token name = expect_ident();
        if (set_.message(name.text) != nullptr)
            throw ParseError("duplicate message name: " + name.text, name.line, name.col);
        expect_punct('{');
        SchemaDef def;
        def.name = name.text;
        def.annotation = std::move(annotation);
        while (!(peek().type == Token::Punct && peek().text == "}")) {
            if (at_end()) fail("unterminated message body");
            std::string ann = leading_annotation(peek().line);
            if (peek().text == "message") {
                parse_message(ann);
            } else if (peek().text == "enum") {
                parse_enum(ann);
            } else {
                parse_field(def, std::move(ann));
            }
        }
        take();  // }
        set_.add_message(std::move(def));
    }

    void parse_field(SchemaDef& def, std::string annotation) {
        FieldDef f;
        f.annotation = std::move(annotation);
        if (peek().type == Token::Ident && peek().text == "repeated") {
            take();
            f.repeated = true;
        }
        Token type = expect_ident();
        if (auto s = scalar_from_keyword(type.text)) {
            f.kind = *s;
        } else {
            f.kind = NestedKind{type.text, false};
        }
        Token name = expect_ident();
        f.name = name.text;
        if (def.find_field(f.name))
            throw ParseError("duplicate field name '" + f.name + "' in message " + def.name,
                             name.line, name.col);
        if (peek().type == Token::Punct && peek().text == "=") {
            take();
            if (peek().type != Token::Number) fail("expected field number");
            f.number = std::stoi(take().text);
        }
        if (peek().type == Token::Punct && peek().text == "[") {
            take();
            while (true) {
                Token attr = expect_ident();
                bool value = true;
                if (peek().type == Token::Punct && peek().text == "=") {
                    take();
                    Token v = expect_ident();
                    if (v.text == "true") value = true;
                    else if (v.text == "false") value = false;
                    else throw ParseError("expected true or false", v.line, v.col);
                }
                if (attr.text == "deprecated") f.deprecated = value;
                else throw ParseError("unknown field attribute: " + attr.text, attr.line, attr.col);
                if (peek().type == Token::Punct && peek().text == ",") {
                    take();
                    continue;
                }
                break;
            }
            expect_punct(']');
        }
        Token semi = expect_punct(';');
        std::string trail = trailing_annotation(semi.line);
        if (!trail.empty()) {
            if (!f.annotation.empty()) f.annotation += ' ';
            f.annotation += trail;
        }
        def.fields.push_back(std::move(f));
    }

    void parse_enum(std::string annotation) {
        take();  // enum
        Token name = expect_ident();
        if (set_.enum_def(name.text) != nullptr)
            throw ParseError("duplicate enum name: " + name.text, name.line, name.col);
        expect_punct('{');
        EnumDef def;
        def.name = name.text;
        def.annotation = std::move(annotation);
        while (!(peek().type == Token::Punct && peek().text == "}")) {
            if (at_end()) fail("unterminated enum body");
            Token v = expect_ident();
            for (const auto& existing : def.values)
                if (existing == v.text)
                    throw ParseError("duplicate enum value '" + v.text + "' in " + def.name, v.line,
                                     v.col);
            if (peek().type == Token::Punct && peek().text == "=") {
                take();
                if (peek().type != Token::Number) fail("expected enum value number");
                take();
            }
            expect_punct(';');
            def.values.push_back(v.text);
        }
        take();  // }
        if (def.values.empty())
            throw ParseError("enum " + def.name + " has no values", name.line, name.col);
        set_.add_enum(std::move(def));
    }
};

}  // namespace

void parse_schema_text(SchemaSet& set, std::string_view text) { Parser(set, text).run(); }

SchemaSet parse_schema(std::string_view text) {
    SchemaSet set;
    parse_schema_text(set, text);
    set.link();
    return set;
}

std::string serialize_schema(const SchemaSet& set) {
    std::string out;
    bool first = true;
    auto gap = [&] {
        if (!first) out += '\n';
        first = false;
    };
    for (const SchemaDef* m : set.messages()) {
        gap();
        if (!m->annotation.empty()) out += "// " + m->annotation + "\n";
        out += "message " + m->name + " {\n";
        for (const auto& f : m->fields) {
            if (!f.annotation.empty()) out += "  // " + f.annotation + "\n";
            out += "  ";
            if (f.repeated) out += "repeated ";
            out += f.type_name() + " " + f.name;
            if (f.number > 0) out += " = " + std::to_string(f.number);
            if (f.deprecated) out += " [deprecated]";
            out += ";\n";
        }
        out += "}\n";
    }
    for (const EnumDef* e : set.enums()) {
        gap();
        if (!e->annotation.empty()) out += "// " + e->annotation + "\n";
        out += "enum " + e->name + " {\n";
        for (const auto& v : e->values) out += "  " + v + ";\n";
        out += "}\n";
    }
    return out;
}

}  // namespace sdgen
