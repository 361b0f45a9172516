#include "ccn/expr.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>

#include "ccn/errors.hpp"

namespace ccn {

Expr Expr::number(double v) {
    Expr e;
    e.kind_ = Kind::Number;
    e.value_ = v;
    return e;
}

Expr Expr::variable(Var v) {
    Expr e;
    e.kind_ = Kind::Variable;
    e.var_ = v;
    return e;
}

Expr Expr::pi() {
    Expr e;
    e.kind_ = Kind::Pi;
    return e;
}

Expr Expr::negate(Expr operand) {
    Expr e;
    e.kind_ = Kind::Negate;
    e.args_.push_back(std::move(operand));
    return e;
}

Expr Expr::binary(Kind op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind_ = op;
    e.args_.push_back(std::move(lhs));
    e.args_.push_back(std::move(rhs));
    return e;
}

Expr Expr::call(Func f, std::vector<Expr> args) {
    if (static_cast<int>(args.size()) != arity(f)) throw ContractError(std::string("wrong arity for ") + function_name(f));
    Expr e;
    e.kind_ = Kind::Call;
    e.func_ = f;
    e.args_ = std::move(args);
    return e;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case Expr::Kind::Number:
            if (a.value_ != b.value_) return false;
            break;
        case Expr::Kind::Variable:
            if (a.var_ != b.var_) return false;
            break;
        case Expr::Kind::Call:
            if (a.func_ != b.func_) return false;
            break;
        default:
            break;
    }
    return a.args_ == b.args_;
}

bool Expr::uses(Var v) const {
    if (kind_ == Kind::Variable) return var_ == v;
    for (const auto& c : args_)
        if (c.uses(v)) return true;
    return false;
}

int arity(Expr::Func f) { return (f == Expr::Func::Min || f == Expr::Func::Max) ? 2 : 1; }

const char* function_name(Expr::Func f) {
    switch (f) {
        case Expr::Func::Sin: return "sin";
        case Expr::Func::Cos: return "cos";
        case Expr::Func::Exp: return "exp";
        case Expr::Func::Abs: return "abs";
        case Expr::Func::Min: return "min";
        case Expr::Func::Max: return "max";
        case Expr::Func::Step: return "step";
    }
    return "?";
}

namespace {

const char* operator_symbol(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add: return " + ";
        case Expr::Kind::Sub: return " - ";
        case Expr::Kind::Mul: return " * ";
        case Expr::Kind::Div: return " / ";
        case Expr::Kind::Pow: return "^";
        default: return "?";
    }
}

}  // namespace

std::string Expr::to_string() const {
    switch (kind_) {
        case Kind::Number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", value_);
            return buf;
        }
        case Kind::Variable: return var_ == Var::X ? "x" : "y";
        case Kind::Pi: return "pi";
        case Kind::Negate: return "(-" + args_[0].to_string() + ")";
        case Kind::Call: {
            std::string s = function_name(func_);
            s += '(';
            for (std::size_t i = 0; i < args_.size(); ++i) {
                if (i) s += ", ";
                s += args_[i].to_string();
            }
            return s + ')';
        }
        default: return "(" + args_[0].to_string() + operator_symbol(kind_) + args_[1].to_string() + ")";
    }
}

// ---------------------------------------------------------------------------
// Tokenizer and recursive-descent parser

namespace {

enum class Tok { End, Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma };

struct Token {
    Tok kind = Tok::End;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
};

constexpr int kMaxDepth = 200;

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) { advance(); }

    Expr parse() {
        if (cur_.kind == Tok::End) throw ParseError("empty expression", cur_.offset);
        Expr e = expression();
        if (cur_.kind != Tok::End) throw ParseError("unexpected trailing input", cur_.offset);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    Token cur_;
    int depth_ = 0;

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth) throw ParseError("expression nested too deeply", p.cur_.offset);
        }
        ~DepthGuard() { --p.depth_; }
    };

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        cur_ = Token{};
        cur_.offset = pos_;
        if (pos_ >= text_.size()) return;

        const char c = text_[pos_];
        const auto single = [&](Tok t) {
            cur_.kind = t;
            cur_.text = text_.substr(pos_, 1);
            ++pos_;
        };
        switch (c) {
            case '+': return single(Tok::Plus);
            case '-': return single(Tok::Minus);
            case '*': return single(Tok::Star);
            case '/': return single(Tok::Slash);
            case '^': return single(Tok::Caret);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case ',': return single(Tok::Comma);
            default: break;
        }

        const auto is_digit = [&](std::size_t i) {
            return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
        };
        if (is_digit(pos_) || (c == '.' && is_digit(pos_ + 1))) {
            std::size_t end = pos_;
            while (is_digit(end)) ++end;
            if (end < text_.size() && text_[end] == '.') {
                ++end;
                while (is_digit(end)) ++end;
            }
            if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
                std::size_t e = end + 1;
                if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
                if (is_digit(e)) {
                    while (is_digit(e)) ++e;
                    end = e;
                }
            }
            const std::string literal(text_.substr(pos_, end - pos_));
            errno = 0;
            const double v = std::strtod(literal.c_str(), nullptr);
            if (errno == ERANGE && !std::isfinite(v)) throw ParseError("numeric literal out of range", pos_);
            cur_.kind = Tok::Number;
            cur_.text = text_.substr(pos_, end - pos_);
            cur_.number = v;
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            cur_.kind = Tok::Ident;
            cur_.text = text_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    void expect(Tok t, const char* what) {
        if (cur_.kind != t) throw ParseError(std::string("expected ") + what, cur_.offset);
        advance();
    }

    Expr expression() {
        DepthGuard guard(*this);
        Expr lhs = term();
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            const auto op = cur_.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
            advance();
            lhs = Expr::binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = unary();
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            const auto op = cur_.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
            advance();
            lhs = Expr::binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    Expr unary() {
        DepthGuard guard(*this);
        if (cur_.kind == Tok::Minus) {
            advance();
            return Expr::negate(unary());
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (cur_.kind == Tok::Caret) {
            advance();
            return Expr::binary(Expr::Kind::Pow, std::move(base), unary());
        }
        return base;
    }

    Expr primary() {
        switch (cur_.kind) {
            case Tok::Number: {
                const double v = cur_.number;
                advance();
                return Expr::number(v);
            }
            case Tok::LParen: {
                advance();
                Expr e = expression();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident: return identifier();
            case Tok::End: throw ParseError("unexpected end of input", cur_.offset);
            default: throw ParseError("unexpected '" + std::string(cur_.text) + "'", cur_.offset);
        }
    }

    Expr identifier() {
        const std::string_view name = cur_.text;
        const std::size_t at = cur_.offset;
        advance();
        if (name == "x") return Expr::variable(Expr::Var::X);
        if (name == "y") return Expr::variable(Expr::Var::Y);
        if (name == "pi") return Expr::pi();

        static constexpr std::pair<std::string_view, Expr::Func> kFuncs[] = {
            {"sin", Expr::Func::Sin}, {"cos", Expr::Func::Cos}, {"exp", Expr::Func::Exp},
            {"abs", Expr::Func::Abs}, {"min", Expr::Func::Min}, {"max", Expr::Func::Max},
            {"step", Expr::Func::Step},
        };
        for (const auto& [fname, f] : kFuncs) {
            if (name != fname) continue;
            expect(Tok::LParen, "'(' after function name");
            std::vector<Expr> args;
            args.push_back(expression());
            while (cur_.kind == Tok::Comma) {
                advance();
                args.push_back(expression());
            }
            expect(Tok::RParen, "')'");
            if (static_cast<int>(args.size()) != arity(f))
                throw ParseError(std::string(fname) + " takes " + std::to_string(arity(f)) + " argument(s), got " +
                                     std::to_string(args.size()),
                                 at);
            return Expr::call(f, std::move(args));
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", at);
    }
};

double checked(double v, const Expr& node) {
    if (!std::isfinite(v)) throw EvalError("non-finite value at " + node.to_string());
    return v;
}

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

double evaluate(const Expr& e, const Bindings& at) {
    using K = Expr::Kind;
    const auto& a = e.args();
    switch (e.kind()) {
        case K::Number: return e.value();
        case K::Pi: return std::numbers::pi;
        case K::Variable: {
            const auto& v = e.var() == Expr::Var::X ? at.x : at.y;
            if (!v) throw EvalError(std::string("unbound variable ") + (e.var() == Expr::Var::X ? "x" : "y"));
            return *v;
        }
        case K::Negate: return -evaluate(a[0], at);
        case K::Add: return checked(evaluate(a[0], at) + evaluate(a[1], at), e);
        case K::Sub: return checked(evaluate(a[0], at) - evaluate(a[1], at), e);
        case K::Mul: return checked(evaluate(a[0], at) * evaluate(a[1], at), e);
        case K::Div: return checked(evaluate(a[0], at) / evaluate(a[1], at), e);
        case K::Pow: {
            const double base = evaluate(a[0], at);
            const double ex = evaluate(a[1], at);
            if (base < 0.0 && ex != std::trunc(ex))
                throw EvalError("negative base with non-integer exponent at " + e.to_string());
            return checked(std::pow(base, ex), e);
        }
        case K::Call: {
            const double t = evaluate(a[0], at);
            switch (e.func()) {
                case Expr::Func::Sin: return checked(std::sin(t), e);
                case Expr::Func::Cos: return checked(std::cos(t), e);
                case Expr::Func::Exp: return checked(std::exp(t), e);
                case Expr::Func::Abs: return std::abs(t);
                case Expr::Func::Step: return t > 0.0 ? 1.0 : 0.0;
                case Expr::Func::Min: return std::min(t, evaluate(a[1], at));
                case Expr::Func::Max: return std::max(t, evaluate(a[1], at));
            }
        }
    }
    throw EvalError("malformed expression");
}

CoefficientField sample_on_mesh(const Expr& expr, const Mesh& mesh) {
    if (mesh.dim() == 1 && expr.uses(Expr::Var::Y))
        throw EvalError("expression uses y on a one-dimensional mesh: " + expr.to_string());
    CoefficientField field{expr, Vector(static_cast<Eigen::Index>(mesh.size()))};
    const auto& nodes = mesh.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Bindings at{nodes[i].x, std::nullopt};
        if (mesh.dim() == 2) at.y = nodes[i].y;
        try {
            field.samples[static_cast<Eigen::Index>(i)] = evaluate(expr, at);
        } catch (const EvalError& err) {
            throw EvalError("node " + std::to_string(i) + ": " + err.what());
        }
    }
    return field;
}

CoefficientField sample_on_mesh(std::string_view text, const Mesh& mesh) {
    return sample_on_mesh(parse_expression(text), mesh);
}

}  // namespace ccn
