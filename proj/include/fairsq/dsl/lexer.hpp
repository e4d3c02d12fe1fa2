#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fairsq/dsl/ast.hpp"

namespace fairsq::dsl {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(SourcePos pos, std::string message, std::vector<std::string> expected = {})
        : std::runtime_error(format(pos, message, expected))
        , pos_(pos)
        , detail_(std::move(message))
        , expected_(std::move(expected))
    {
    }

    SourcePos pos() const noexcept { return pos_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string format(SourcePos pos, const std::string& message, const std::vector<std::string>& expected)
    {
        std::string out = std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message;
        if (!expected.empty()) {
            out += " (expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i)
                    out += i + 1 == expected.size() ? " or " : ", ";
                out += expected[i];
            }
            out += ")";
        }
        return out;
    }

    SourcePos pos_;
    std::string detail_;
    std::vector<std::string> expected_;
};

enum class Tok {
    Ident,
    Number,
    Define,
    Return,
    If,
    Elif,
    Else,
    And,
    Or,
    True,
    False,
    Spec,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Plus,
    Minus,
    Star,
    Tilde,
    Arrow,
    Le,
    Lt,
    Ge,
    Gt,
    EqEq,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
    bool line_start = false; // first token on its line
    double number = 0.0;
};

inline std::string_view describe(Tok t)
{
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Define: return "'define'";
    case Tok::Return: return "'return'";
    case Tok::If: return "'if'";
    case Tok::Elif: return "'elif'";
    case Tok::Else: return "'else'";
    case Tok::And: return "'and'";
    case Tok::Or: return "'or'";
    case Tok::True: return "'true'";
    case Tok::False: return "'false'";
    case Tok::Spec: return "'spec'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Tilde: return "'~'";
    case Tok::Arrow: return "'<-'";
    case Tok::Le: return "'<='";
    case Tok::Lt: return "'<'";
    case Tok::Ge: return "'>='";
    case Tok::Gt: return "'>'";
    case Tok::EqEq: return "'=='";
    case Tok::End: return "end of input";
    }
    return "token";
}

namespace detail {

inline bool is_ident_start(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
inline bool is_ident_char(unsigned char c) { return is_ident_start(c) || is_digit(c); }

inline Tok keyword(std::string_view word)
{
    if (word == "define") return Tok::Define;
    if (word == "return") return Tok::Return;
    if (word == "if") return Tok::If;
    if (word == "elif") return Tok::Elif;
    if (word == "else") return Tok::Else;
    if (word == "and") return Tok::And;
    if (word == "or") return Tok::Or;
    if (word == "true") return Tok::True;
    if (word == "false") return Tok::False;
    if (word == "spec") return Tok::Spec;
    return Tok::Ident;
}

} // namespace detail

// Splits UTF-8 source into tokens. The only non-ASCII character accepted
// outside comments is U+2190 (left arrow).
inline std::vector<Token> tokenize(std::string_view src)
{
    std::vector<Token> out;
    std::size_t i = 0;
    SourcePos pos;
    bool line_start = true;

    auto advance = [&](std::size_t bytes) {
        for (std::size_t k = 0; k < bytes && i < src.size(); ++k, ++i) {
            const auto c = static_cast<unsigned char>(src[i]);
            if (c == '\n') {
                ++pos.line;
                pos.column = 1;
            } else if ((c & 0xC0) != 0x80) {
                ++pos.column;
            }
        }
    };
    auto push = [&](Tok kind, std::size_t len, SourcePos at) {
        Token t;
        t.kind = kind;
        t.text = std::string(src.substr(i, len));
        t.pos = at;
        t.line_start = line_start;
        line_start = false;
        out.push_back(std::move(t));
        advance(len);
    };

    while (i < src.size()) {
        const auto c = static_cast<unsigned char>(src[i]);
        const SourcePos at = pos;
        if (c == '\n') {
            line_start = true;
            advance(1);
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        if (detail::is_ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && detail::is_ident_char(static_cast<unsigned char>(src[j])))
                ++j;
            push(detail::keyword(src.substr(i, j - i)), j - i, at);
            continue;
        }
        if (detail::is_digit(c) || (c == '.' && i + 1 < src.size() && detail::is_digit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && detail::is_digit(static_cast<unsigned char>(src[j])))
                ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && detail::is_digit(static_cast<unsigned char>(src[j])))
                    ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-'))
                    ++k;
                if (k < src.size() && detail::is_digit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && detail::is_digit(static_cast<unsigned char>(src[k])))
                        ++k;
                    j = k;
                }
            }
            double value = 0.0;
            const auto text = src.substr(i, j - i);
            const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
            if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value))
                throw SyntaxError(at, "numeric literal out of range: " + std::string(text));
            push(Tok::Number, j - i, at);
            out.back().number = value;
            continue;
        }
        auto two = [&](char a, char b) { return c == static_cast<unsigned char>(a) && i + 1 < src.size() && src[i + 1] == b; };
        if (two('<', '-')) { push(Tok::Arrow, 2, at); continue; }
        if (two('<', '=')) { push(Tok::Le, 2, at); continue; }
        if (two('>', '=')) { push(Tok::Ge, 2, at); continue; }
        if (two('=', '=')) { push(Tok::EqEq, 2, at); continue; }
        switch (c) {
        case '(': push(Tok::LParen, 1, at); continue;
        case ')': push(Tok::RParen, 1, at); continue;
        case '{': push(Tok::LBrace, 1, at); continue;
        case '}': push(Tok::RBrace, 1, at); continue;
        case ',': push(Tok::Comma, 1, at); continue;
        case ';': push(Tok::Semi, 1, at); continue;
        case ':': push(Tok::Colon, 1, at); continue;
        case '+': push(Tok::Plus, 1, at); continue;
        case '-': push(Tok::Minus, 1, at); continue;
        case '*': push(Tok::Star, 1, at); continue;
        case '~': push(Tok::Tilde, 1, at); continue;
        case '<': push(Tok::Lt, 1, at); continue;
        case '>': push(Tok::Gt, 1, at); continue;
        default: break;
        }
        // U+2190 LEFTWARDS ARROW
        if (src.substr(i, 3) == "\xE2\x86\x90") {
            push(Tok::Arrow, 3, at);
            continue;
        }
        if (c == '=')
            throw SyntaxError(at, "unexpected '='", {"'=='", "'<-'"});
        if (c >= 0x80)
            throw SyntaxError(at, "unexpected non-ASCII character");
        static constexpr char hex[] = "0123456789ABCDEF";
        std::string shown = c >= 0x20 && c < 0x7F ? std::string(1, static_cast<char>(c))
                                                  : std::string{'\\', 'x', hex[c >> 4], hex[c & 0xF]};
        throw SyntaxError(at, "unexpected character '" + shown + "'");
    }
    Token end;
    end.kind = Tok::End;
    end.pos = pos;
    end.line_start = true;
    out.push_back(end);
    return out;
}

} // namespace fairsq::dsl
