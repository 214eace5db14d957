#include "presym/parser.hpp"

#include <cctype>

namespace presym {

namespace {

struct Parser {
    const std::string& s;
    const VarTable& vars;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }

    bool peek(char c) {
        skip_ws();
        return i < s.size() && s[i] == c;
    }

    bool accept(char c) {
        if (!peek(c)) return false;
        ++i;
        return true;
    }

    void expect(char c) {
        if (!accept(c))
            throw ParseError(std::string("expected '") + c + "'", i);
    }

    Expr parse_expr() {
        Expr e = parse_term();
        while (true) {
            if (accept('+')) e += parse_term();
            else if (accept('-')) e -= parse_term();
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            if (accept('*')) e *= parse_factor();
            else if (accept('/')) {
                std::size_t at = i;
                Expr d = parse_factor();
                if (d.is_zero()) throw ParseError("division by zero", at);
                e /= d;
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        Expr b = parse_base();
        if (accept('^')) {
            skip_ws();
            std::size_t at = i;
            bool neg = false;
            if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
            if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
                throw ParseError("exponent must be an integer", at);
            long k = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                k = k * 10 + (s[i++] - '0');
            if (i < s.size() && s[i] == '.')
                throw ParseError("exponent must be an integer", at);
            return b.pow(int(neg ? -k : k));
        }
        return b;
    }

    Expr parse_base() {
        skip_ws();
        if (i >= s.size()) throw ParseError("unexpected end of input", i);
        char c = s[i];
        if (c == '-') {
            ++i;
            return -parse_factor();
        }
        if (c == '(') {
            ++i;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError("unexpected character", i);
    }

    Expr parse_number() {
        std::size_t at = i;
        std::string digits;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
            digits += s[i++];
        if (i < s.size() && s[i] == '.')
            throw ParseError("floating-point literals are not allowed", at);
        return Expr(Rational(Integer(digits)));
    }

    Expr parse_ident() {
        std::size_t at = i;
        std::string name;
        while (i < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
            name += s[i++];
        int primes = 0;
        while (i < s.size() && s[i] == '\'') { ++primes; ++i; }

        if (peek('(')) {
            if (name == "exp") {
                if (primes) throw ParseError("exp takes no derivative primes", at);
                ++i;
                Expr arg = parse_expr();
                expect(')');
                return Expr::exp(arg);
            }
            if (!vars.has_function(name))
                throw UnknownIdentifier("unknown function '" + name + "'", at);
            ++i;
            Expr arg = parse_expr();
            expect(')');
            return Expr::opaque(name, primes, arg);
        }
        if (primes) throw ParseError("derivative primes require an argument list", at);
        AtomId id;
        if (!vars.lookup_symbol(name, id))
            throw UnknownIdentifier("unknown identifier '" + name + "'", at);
        return Expr::symbol(id);
    }
};

} // namespace

Expr parse_expression(const std::string& text, const VarTable& vars) {
    Parser p{text, vars};
    Expr e = p.parse_expr();
    p.skip_ws();
    if (p.i != text.size())
        throw ParseError("trailing input", p.i);
    return e;
}

} // namespace presym
