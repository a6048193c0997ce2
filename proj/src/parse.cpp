#include "multexode/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace multexode::expr {

namespace {

const std::vector<std::string> kOperand = {"number", "x", "i", "pi", "coefficient", "function", "("};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run() {
        skip_space();
        if (pos_ == text_.size()) fail(kOperand);
        Expr e = expr();
        skip_space();
        if (pos_ != text_.size()) fail({"+", "-", "*", "/", "^", "end of input"});
        return e;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string found = pos_ >= text_.size() ? "end of input" : "'" + std::string(1, text_[pos_]) + "'";
        throw SyntaxError(pos_, std::move(expected), std::move(found));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, std::vector<std::string> expected) {
        if (!accept(c)) fail(std::move(expected));
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) lhs = add({lhs, term()});
            else if (accept('-')) lhs = sub(lhs, term());
            else return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = mul({lhs, unary()});
            else if (accept('/')) lhs = div(lhs, unary());
            else return lhs;
        }
    }

    Expr unary() {
        if (accept('-')) return mul({constant(-1.0), unary()});
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (!accept('^')) return base;
        skip_space();
        const std::size_t at = pos_;
        Expr exponent = unary();
        auto c = exponent.as_constant();
        if (!c || c->imag() != 0.0 || std::trunc(c->real()) != c->real() || std::abs(c->real()) > 1e6) {
            pos_ = at;
            fail({"integer exponent"});
        }
        return int_pow(base, static_cast<int>(c->real()));
    }

    std::string identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    Expr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || ptr != text_.data() + pos_) {
            pos_ = start;
            fail({"number"});
        }
        return constant(v);
    }

    Expr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail(kOperand);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            Expr inner = expr();
            expect(')', {"+", "-", "*", "/", "^", ")"});
            return inner;
        }
        if (!std::isalpha(static_cast<unsigned char>(c))) fail(kOperand);

        const std::size_t start = pos_;
        const std::string name = identifier();
        if (name == "x") return var();
        if (name == "i") return constant(cplx(0.0, 1.0));
        if (name == "pi") return constant(std::numbers::pi);
        if (name.size() == 2 && name[0] == 'a' && name[1] >= '1' && name[1] <= '9') return coeff_ref(name);

        static const std::vector<std::pair<std::string, Func>> funcs = {
            {"sin", Func::sin}, {"cos", Func::cos}, {"exp", Func::exp},
            {"sinh", Func::sinh}, {"cosh", Func::cosh}, {"sqrt", Func::sqrt}};
        for (const auto& [fname, f] : funcs) {
            if (name == fname) return call(f, argument());
        }
        if (name == "prim") return prim(argument());
        if (name == "expp") return exp_prim(argument(), +1);
        if (name == "expm") return exp_prim(argument(), -1);
        if (name == "trig") return trig_call();

        pos_ = start;
        fail(kOperand);
    }

    Expr argument() {
        expect('(', {"("});
        Expr e = expr();
        expect(')', {"+", "-", "*", "/", "^", ")"});
        return e;
    }

    Expr trig_call() {
        expect('(', {"("});
        skip_space();
        const std::size_t at = pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail({"integer"});
        Expr jexpr = number();
        const double jv = jexpr.as_constant()->real();
        expect(';', {";"});
        std::vector<Expr> fs{expr()};
        while (accept(',')) fs.push_back(expr());
        expect(')', {",", ")"});
        if (std::trunc(jv) != jv || jv < 1.0 || jv > static_cast<double>(fs.size())) {
            pos_ = at;
            fail({"class index in 1.." + std::to_string(fs.size())});
        }
        return trig(std::move(fs), static_cast<int>(jv));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

}  // namespace multexode::expr
