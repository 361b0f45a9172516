#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccn/mesh.hpp"

namespace ccn {

/// Arithmetic expression tree for coefficient functions a(x), b(x).
///
/// Grammar (loosest to tightest):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?          right associative
///     primary := number | 'x' | 'y' | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin, cos, exp, abs, step (one argument), min, max (two arguments);
/// step(t) = 1 for t > 0 and 0 otherwise. Hence "-x^2" is -(x^2).
class Expr {
public:
    enum class Kind { Number, Variable, Pi, Negate, Add, Sub, Mul, Div, Pow, Call };
    enum class Var { X, Y };
    enum class Func { Sin, Cos, Exp, Abs, Min, Max, Step };

    static Expr number(double v);
    static Expr variable(Var v);
    static Expr pi();
    static Expr negate(Expr operand);
    static Expr binary(Kind op, Expr lhs, Expr rhs);
    static Expr call(Func f, std::vector<Expr> args);

    Kind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }
    Var var() const noexcept { return var_; }
    Func func() const noexcept { return func_; }
    const std::vector<Expr>& args() const noexcept { return args_; }

    bool uses(Var v) const;

    /// Fully parenthesized text that parses back to a structurally equal tree.
    std::string to_string() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    Kind kind_ = Kind::Number;
    double value_ = 0.0;
    Var var_ = Var::X;
    Func func_ = Func::Sin;
    std::vector<Expr> args_;
};

int arity(Expr::Func f);
const char* function_name(Expr::Func f);

/// Values for the free variables; an unset variable is unbound.
struct Bindings {
    std::optional<double> x;
    std::optional<double> y;
};

/// Throws ParseError (with byte offset) on unknown identifiers, arity mismatch,
/// unbalanced parentheses, trailing input, or empty text.
Expr parse_expression(std::string_view text);

/// IEEE double evaluation. Throws EvalError on an unbound variable, a non-finite
/// intermediate result, or a negative base raised to a non-integer power.
double evaluate(const Expr& expr, const Bindings& at);

/// An expression together with its nodal samples on a mesh.
struct CoefficientField {
    Expr expr;
    Vector samples;
};

/// Samples expr at every node. Errors carry the failing node index.
CoefficientField sample_on_mesh(const Expr& expr, const Mesh& mesh);

/// Convenience: parse then sample.
CoefficientField sample_on_mesh(std::string_view text, const Mesh& mesh);

}  // namespace ccn
