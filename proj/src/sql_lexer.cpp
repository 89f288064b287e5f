#include <cctype>

#include "sdgen/sql/parser.hpp"

namespace sdgen::sql {

std::vector<Token> lex_sql(std::string_view src) {
    std::vector<Token> toks;
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            int start_line = line, start_col = col;
            advance(2);
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
            if (i + 1 >= src.size())
                throw ParseError("unterminated block comment", start_line, start_col);
            advance(2);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        t.begin = i;
        if (c == '\'' || c == '"') {
            char q = c;
            int start_line = line, start_col = col;
            advance(1);
            std::string s;
            bool closed = false;
            while (i < src.size()) {
                if (src[i] == '\\' && i + 1 < src.size()) {
                    char e = src[i + 1];
                    if (e == 'n') s += '\n';
                    else if (e == 't') s += '\t';
                    else s += e;
                    advance(2);
                    continue;
                }
                if (src[i] == q) {
                    if (i + 1 < src.size() && src[i + 1] == q) {  // doubled-quote escape
                        s += q;
                        advance(2);
                        continue;
                    }
                    advance(1);
                    closed = true;
                    break;
                }
                s += src[i];
                advance(1);
            }
            if (!closed) throw ParseError("unterminated string literal", start_line, start_col);
            t.type = Token::Type::String;
            t.text = std::move(s);
        } else if (c == '`') {
            int start_line = line, start_col = col;
            advance(1);
            std::string s;
            while (i < src.size() && src[i] != '`') {
                s += src[i];
                advance(1);
            }
            if (i >= src.size())
                throw ParseError("unterminated quoted identifier", start_line, start_col);
            advance(1);
            t.type = Token::Type::Ident;
            t.text = std::move(s);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t start = i;
            bool seen_dot = false, seen_exp = false;
            while (i < src.size()) {
                char d = src[i];
                if (std::isdigit(static_cast<unsigned char>(d))) {
                    advance(1);
                } else if (d == '.' && !seen_dot && !seen_exp) {
                    seen_dot = true;
                    advance(1);
                } else if ((d == 'e' || d == 'E') && !seen_exp && i > start) {
                    seen_exp = true;
                    advance(1);
                    if (i < src.size() && (src[i] == '+' || src[i] == '-')) advance(1);
                } else {
                    break;
                }
            }
            t.type = Token::Type::Number;
            t.text = std::string(src.substr(start, i - start));
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                advance(1);
            t.type = Token::Type::Ident;
            t.text = std::string(src.substr(start, i - start));
        } else {
            static const std::string_view two_char[] = {"!=", "<>", "<=", ">=", "||"};
            std::string_view rest = src.substr(i);
            std::string op;
            for (std::string_view cand : two_char) {
                if (rest.rfind(cand, 0) == 0) {
                    op = std::string(cand);
                    break;
                }
            }
            if (op.empty()) {
                if (std::string_view("=<>+-*/(),;.[]").find(c) == std::string_view::npos)
                    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
                op = std::string(1, c);
            }
            advance(op.size());
            t.type = Token::Type::Op;
            t.text = std::move(op);
        }
        t.end = i;
        toks.push_back(std::move(t));
    }
    Token end_tok;
    end_tok.type = Token::Type::End;
    end_tok.line = line;
    end_tok.col = col;
    end_tok.begin = end_tok.end = src.size();
    toks.push_back(std::move(end_tok));
    return toks;
}

std::string_view join_type_name(JoinClause::Type t) {
    switch (t) {
        case JoinClause::Type::Inner: return "INNER";
        case JoinClause::Type::Left: return "LEFT";
        case JoinClause::Type::Right: return "RIGHT";
        case JoinClause::Type::Full: return "FULL";
        case JoinClause::Type::Cross: return "CROSS";
    }
    return "INNER";
}

}  // namespace sdgen::sql
