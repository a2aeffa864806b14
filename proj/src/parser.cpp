#include "emq/parser.hpp"

#include <cctype>

namespace emq {

namespace {

struct Token {
    enum Kind { Num, Ident, Op, End } kind;
    std::string text;
    Rat value;   // for Num
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ >= s_.size()) {
            tok_ = {Token::End, "", Rat(0)};
            return;
        }
        char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i_;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
            if (j < s_.size() && s_[j] == '.') {
                size_t k = j + 1;
                while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
                if (k == j + 1) throw ParseError("malformed decimal literal");
                std::string digits = s_.substr(i_, j - i_) + s_.substr(j + 1, k - j - 1);
                size_t frac = k - j - 1;
                Rat v(digits, 10);
                for (size_t m = 0; m < frac; ++m) v /= 10;
                v.canonicalize();
                tok_ = {Token::Num, s_.substr(i_, k - i_), v};
                i_ = k;
            } else {
                Rat v(s_.substr(i_, j - i_), 10);
                tok_ = {Token::Num, s_.substr(i_, j - i_), v};
                i_ = j;
            }
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i_;
            while (j < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
                ++j;
            tok_ = {Token::Ident, s_.substr(i_, j - i_), Rat(0)};
            i_ = j;
            return;
        }
        static const std::string ops = "+-*/^()";
        if (ops.find(c) != std::string::npos) {
            tok_ = {Token::Op, std::string(1, c), Rat(0)};
            ++i_;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "' in expression");
    }

    const std::string& s_;
    size_t i_ = 0;
    Token tok_;
};

class Parser {
public:
    Parser(std::shared_ptr<const PhaseSpace> sp, const std::string& text)
        : sp_(std::move(sp)), lex_(text) {}

    SymExpr run() {
        SymExpr e = sum();
        if (lex_.peek().kind != Token::End)
            throw ParseError("trailing input after expression: '" + lex_.peek().text + "'");
        return e;
    }

private:
    bool is_op(const char* t) const {
        return lex_.peek().kind == Token::Op && lex_.peek().text == t;
    }

    SymExpr sum() {
        SymExpr e = product();
        while (is_op("+") || is_op("-")) {
            bool plus = lex_.take().text == "+";
            SymExpr rhs = product();
            e = plus ? e + rhs : e - rhs;
        }
        return e;
    }

    SymExpr product() {
        SymExpr e = unary();
        while (is_op("*") || is_op("/")) {
            bool mul = lex_.take().text == "*";
            SymExpr rhs = unary();
            if (mul) {
                e = e * rhs;
            } else {
                if (!rhs.is_invertible_term())
                    throw ParseError("division by a non-constant expression");
                e = e * rhs.inverse_term();
            }
        }
        return e;
    }

    SymExpr unary() {
        if (is_op("-")) {
            lex_.take();
            return -unary();
        }
        return power();
    }

    SymExpr power() {
        SymExpr base = primary();
        if (!is_op("^")) return base;
        lex_.take();
        bool neg = false;
        if (is_op("-")) {
            lex_.take();
            neg = true;
        }
        Token t = lex_.take();
        if (t.kind != Token::Num || t.value.get_den() != 1)
            throw ParseError("exponent must be an integer");
        if (!t.value.get_num().fits_sint_p())
            throw ParseError("exponent out of range");
        long n = t.value.get_num().get_si();
        if (neg) n = -n;
        if (n < 0 && !base.is_invertible_term())
            throw ParseError("negative power of a non-constant expression");
        return pow_int(base, int(n));
    }

    SymExpr primary() {
        const Token& p = lex_.peek();
        if (p.kind == Token::Num) {
            Token t = lex_.take();
            return SymExpr::constant(sp_, Quad(t.value));
        }
        if (p.kind == Token::Ident) {
            Token t = lex_.take();
            if (t.text == "sqrt2") return SymExpr::constant(sp_, Quad::sqrt2());
            if (t.text == "exp") {
                if (!is_op("(")) throw ParseError("exp requires parentheses");
                lex_.take();
                SymExpr arg = sum();
                expect(")");
                return exp_of(arg);
            }
            int id = sp_->find(t.text);
            if (id < 0) throw ParseError("unknown symbol '" + t.text + "'");
            return SymExpr::symbol(sp_, id);
        }
        if (is_op("(")) {
            lex_.take();
            SymExpr e = sum();
            expect(")");
            return e;
        }
        throw ParseError("expected a number, symbol, or parenthesized expression");
    }

    SymExpr exp_of(const SymExpr& arg) {
        TermKey k;
        std::map<int, Quad> acc;
        for (const auto& [tk, c] : arg.terms()) {
            if (!tk.weights.empty())
                throw ParseError("nested exp is not supported");
            if (tk.pows.empty())
                throw ParseError("exp argument must have no constant part");
            if (tk.pows.size() != 1 || tk.pows[0].second != 1)
                throw ParseError("exp argument must be linear in the symbols");
            acc[tk.pows[0].first] += c;
        }
        for (const auto& [s, w] : acc)
            if (!w.is_zero()) k.weights.emplace_back(s, w);
        SymExpr e(sp_);
        e.add_term(k, Quad(1));
        return e;
    }

    void expect(const char* t) {
        if (!is_op(t)) throw ParseError(std::string("expected '") + t + "'");
        lex_.take();
    }

    std::shared_ptr<const PhaseSpace> sp_;
    Lexer lex_;
};

} // namespace

SymExpr parse_expr(std::shared_ptr<const PhaseSpace> sp, const std::string& text) {
    return Parser(std::move(sp), text).run();
}

} // namespace emq
