#include "varigeo/parser.hpp"

#include <algorithm>
#include <cctype>

namespace varigeo::parser {

using excalc::Chart;
using excalc::DiffForm;
using symexpr::Expr;
using symexpr::Fn;
using symexpr::Rat;

namespace {

struct Token {
    enum class Kind { Number, Ident, Op, End } kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
                    throw ParseError("digits expected after decimal point", i);
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            out.push_back({Token::Kind::Number, s.substr(start, i - start), start});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                ++i;
            out.push_back({Token::Kind::Ident, s.substr(start, i - start), start});
            continue;
        }
        if (std::string("+-*/^(),").find(c) != std::string::npos) {
            out.push_back({Token::Kind::Op, std::string(1, c), i});
            ++i;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({Token::Kind::End, "", s.size()});
    return out;
}

Rat rat_from_number(const std::string& text) {
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        auto nz = text.find_first_not_of('0');
        return Rat(symexpr::Int(nz == std::string::npos ? "0" : text.substr(nz)));
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    // a leading zero would make cpp_int parse the literal as octal
    auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    symexpr::Int num(digits);
    symexpr::Int den = 1;
    for (std::size_t k = dot + 1; k < text.size(); ++k) den *= 10;
    return Rat(num, den);
}

std::optional<Fn> builtin_fn(const std::string& name) {
    if (name == "sin") return Fn::Sin;
    if (name == "cos") return Fn::Cos;
    if (name == "tan") return Fn::Tan;
    if (name == "exp") return Fn::Exp;
    if (name == "log") return Fn::Log;
    return std::nullopt;
}

class Parser {
public:
    Parser(const std::string& text, const Chart& chart, bool scalar_only)
        : toks_(lex(text)), chart_(chart), scalar_only_(scalar_only) {}

    DiffForm parse() {
        DiffForm f = parse_sum();
        expect_end();
        return f;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_++]; }

    bool accept_op(const char* op) {
        if (peek().kind == Token::Kind::Op && peek().text == op) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_op(const char* op) {
        if (!accept_op(op))
            throw ParseError(std::string("expected '") + op + "'", peek().pos);
    }

    void expect_end() {
        if (peek().kind != Token::Kind::End)
            throw ParseError("trailing input", peek().pos);
    }

    DiffForm parse_sum() {
        DiffForm f = parse_term();
        for (;;) {
            std::size_t at = peek().pos;
            if (accept_op("+")) {
                DiffForm g = parse_term();
                if (!f.is_structural_zero() && !g.is_structural_zero() &&
                    f.degree() != g.degree())
                    throw ParseError("cannot add forms of different degree", at);
                f += g;
            } else if (accept_op("-")) {
                DiffForm g = parse_term();
                if (!f.is_structural_zero() && !g.is_structural_zero() &&
                    f.degree() != g.degree())
                    throw ParseError("cannot subtract forms of different degree", at);
                f -= g;
            } else {
                return f;
            }
        }
    }

    DiffForm parse_term() {
        DiffForm f = parse_unary();
        for (;;) {
            std::size_t at = peek().pos;
            if (accept_op("*")) {
                f = excalc::wedge(f, parse_unary());
            } else if (accept_op("/")) {
                DiffForm g = parse_unary();
                if (g.degree() != 0)
                    throw ParseError("divisor must be a scalar", at);
                Expr d = g.scalar_value();
                if (d.is_structural_zero())
                    throw ParseError("division by zero", at);
                f = f * (Expr(1LL) / d);
            } else {
                return f;
            }
        }
    }

    // '^' binds tighter than unary minus: -q^2 is -(q^2)
    DiffForm parse_unary() {
        if (accept_op("+")) return parse_unary();
        if (accept_op("-")) return -parse_unary();
        return parse_power();
    }

    DiffForm parse_power() {
        DiffForm f = parse_primary();
        for (;;) {
            std::size_t at = peek().pos;
            if (!accept_op("^")) return f;
            DiffForm g = parse_unary();
            if (f.degree() == 0 && g.degree() == 0) {
                Expr e = g.scalar_value();
                if (!e.is_rational())
                    throw ParseError("exponent must be a rational constant", at);
                f = DiffForm::scalar(f.scalar_value().pow(e.rational_value()));
            } else {
                f = excalc::wedge(f, g);
            }
        }
    }

    DiffForm parse_primary() {
        Token t = next();
        if (t.kind == Token::Kind::Number)
            return DiffForm::scalar(Expr(rat_from_number(t.text)));
        if (t.kind == Token::Kind::Op && t.text == "(") {
            DiffForm f = parse_sum();
            expect_op(")");
            return f;
        }
        if (t.kind != Token::Kind::Ident)
            throw ParseError("expected a value", t.pos);

        if (auto fn = builtin_fn(t.text)) {
            expect_op("(");
            Expr arg = parse_scalar_arg(t.pos);
            expect_op(")");
            return DiffForm::scalar(Expr::call(*fn, arg));
        }
        if (t.text == "sqrt") {
            expect_op("(");
            Expr arg = parse_scalar_arg(t.pos);
            expect_op(")");
            return DiffForm::scalar(symexpr::sqrt(arg));
        }
        if (t.text == "D" && peek().kind == Token::Kind::Op && peek().text == "(") {
            return DiffForm::scalar(parse_deriv(t.pos));
        }

        // differential token: 'd' + coordinate name
        if (t.text.size() > 1 && t.text[0] == 'd' && chart_.has(t.text.substr(1))) {
            if (scalar_only_)
                throw ParseError("differential " + t.text + " in scalar context", t.pos);
            return DiffForm::d_coord(chart_, t.text.substr(1));
        }
        if (chart_.has(t.text) || chart_.has_param(t.text))
            return DiffForm::scalar(Expr::symbol(t.text));
        if (symexpr::is_registered_function(t.text))
            return DiffForm::scalar(Expr::deriv(t.text));
        throw ParseError("unknown identifier '" + t.text + "'", t.pos);
    }

    Expr parse_scalar_arg(std::size_t at) {
        DiffForm f = parse_sum();
        if (f.degree() != 0)
            throw ParseError("function argument must be a scalar", at);
        return f.scalar_value();
    }

    Expr parse_deriv(std::size_t at) {
        expect_op("(");
        Token fn = next();
        if (fn.kind != Token::Kind::Ident)
            throw ParseError("expected function name in D(...)", fn.pos);
        if (!symexpr::is_registered_function(fn.text))
            throw ParseError("'" + fn.text + "' is not a declared function", fn.pos);
        const auto& deps = symexpr::function_deps(fn.text);
        std::vector<std::string> partials;
        while (accept_op(",")) {
            Token v = next();
            if (v.kind != Token::Kind::Ident)
                throw ParseError("expected coordinate name in D(...)", v.pos);
            if (std::find(deps.begin(), deps.end(), v.text) == deps.end())
                throw ParseError("'" + fn.text + "' does not depend on " + v.text,
                                 v.pos);
            partials.push_back(v.text);
        }
        expect_op(")");
        (void)at;
        return Expr::deriv(fn.text, std::move(partials));
    }

    std::vector<Token> toks_;
    const Chart& chart_;
    bool scalar_only_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text, const Chart& chart) {
    Parser p(text, chart, true);
    DiffForm f = p.parse();
    if (f.degree() != 0) throw ParseError("expected a scalar expression", 0);
    return f.scalar_value();
}

DiffForm parse_form(const std::string& text, const Chart& chart) {
    Parser p(text, chart, false);
    return p.parse();
}

}  // namespace varigeo::parser
