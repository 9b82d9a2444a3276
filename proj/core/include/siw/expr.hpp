#ifndef SIW_EXPR_HPP
#define SIW_EXPR_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace siw {

// Raised when evaluation hits a point where the expression is undefined:
// division by zero, log|0|, or a negative base under a non-integer power.
class singular_point_error : public std::runtime_error {
public:
    singular_point_error(const std::string& node, double at)
        : std::runtime_error("singular point: " + node + " at z = " + std::to_string(at)),
          node_(node), at_(at) {}
    const std::string& node() const { return node_; }
    double at() const { return at_; }

private:
    std::string node_;
    double at_;
};

// Closed-form scalar expression in one real variable.  Immutable value type;
// nodes are shared, so copies are cheap and thread-safe.
//
// Serialized (prefix) grammar, used verbatim inside JSON reports:
//   expr    := number | "z" | "(+ " expr {" " expr} ")" | "(* " expr {" " expr} ")"
//            | "(^ " expr " " number ")" | "(log " expr ")"    ; log = ln|arg|
//            | "(exp " expr ")" | "(/ " expr " " expr ")"
// Numbers use the shortest round-trip decimal form.
class Expr {
public:
    enum class Kind { constant, variable, add, mul, pow, logabs, exp, div };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v);
    static Expr var();
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr pow(const Expr& base, double exponent);
    static Expr logabs(const Expr& arg);
    static Expr exp(const Expr& arg);
    static Expr div(const Expr& num, const Expr& den);

    // polynomial c0 + c1 z + c2 z^2 + ...
    static Expr poly(const std::vector<double>& coeffs);

    Kind kind() const { return node_->kind; }
    double value() const { return node_->num; }     // constant nodes
    double exponent() const { return node_->num; }  // pow nodes
    const std::vector<Expr>& operands() const { return node_->kids; }

    double eval(double z) const;                 // throws singular_point_error
    bool defined_at(double z) const noexcept;
    Expr diff() const;                           // exact derivative, normalized
    Expr substitute(const Expr& inner) const;    // variable := inner
    Expr normalized() const;                     // flatten + constant folding; idempotent
    std::string str() const;
    bool same_tree(const Expr& other) const;

    bool is_constant(double v) const {
        return node_->kind == Kind::constant && node_->num == v;
    }

private:
    struct Node {
        Kind kind;
        double num = 0.0;        // constant value or pow exponent
        std::vector<Expr> kids;
    };
    using DiffCache = std::unordered_map<const void*, Expr>;
    using NormCache = std::unordered_map<const void*, Expr>;
    double eval_cached(double z, std::unordered_map<const void*, double>& cache) const;
    Expr diff_cached(DiffCache& cache) const;
    Expr normalized_cached(NormCache& cache) const;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Expr make(Kind k, double num, std::vector<Expr> kids);

    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator*(double a, const Expr& b);
Expr operator+(const Expr& a, double b);
Expr operator+(double a, const Expr& b);
Expr operator-(double a, const Expr& b);
Expr operator-(const Expr& a, double b);

}  // namespace siw

#endif
