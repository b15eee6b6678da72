#pragma once

// Small expression kernel: hash-consed immutable DAG nodes, symbolic
// differentiation, rule-based simplification and compiled evaluation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kmx::symx {

enum class Kind : std::uint8_t {
    constant,
    variable,
    negate,
    add,
    subtract,
    multiply,
    divide,
    power,
    exp,
    ln,
    sqrt,
    abs,
    sign,
    normal_pdf,
    normal_cdf,
};

std::string_view kind_name(Kind k);
std::size_t kind_arity(Kind k);

struct Node;

class Expression {
public:
    Expression();  // constant 0
    Expression(double c);  // NOLINT: implicit so that literals mix with expressions
    Expression(const Expression& o) noexcept;
    Expression(Expression&& o) noexcept;
    Expression& operator=(const Expression& o) noexcept;
    Expression& operator=(Expression&& o) noexcept;
    ~Expression();

    static Expression constant(double c);
    static Expression variable(std::string_view name);

    // Raw constructors: intern the node without applying any rewrite rule.
    static Expression make(Kind k, const Expression& a);
    static Expression make(Kind k, const Expression& a, const Expression& b);

    Kind kind() const;
    std::size_t arity() const;
    Expression child(std::size_t i) const;
    double value() const;              // constants only
    const std::string& name() const;   // variables only

    bool is_constant() const { return kind() == Kind::constant; }
    bool is_constant(double c) const { return is_constant() && value() == c; }
    bool depends_on(std::string_view var) const;

    // Structural identity; interned nodes make this pointer equality.
    bool same(const Expression& o) const { return n_ == o.n_; }
    std::uint64_t hash() const;
    const Node* node() const { return n_; }

private:
    explicit Expression(const Node* adopted) : n_(adopted) {}
    const Node* n_;
    friend struct Access;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);

Expression pow(const Expression& a, const Expression& b);
Expression exp(const Expression& a);
Expression ln(const Expression& a);
Expression sqrt(const Expression& a);
Expression abs(const Expression& a);
Expression sign(const Expression& a);
Expression normal_pdf(const Expression& a);
Expression normal_cdf(const Expression& a);

// Product of several factors with constants collected and sqrt(a)*sqrt(a)
// and a^p*a^q merged.
Expression product(std::vector<Expression> factors);
Expression square(const Expression& a);

using Binding = std::map<std::string, double, std::less<>>;

class UnboundVariable : public std::invalid_argument {
public:
    explicit UnboundVariable(const std::string& var);
    const std::string& variable() const { return var_; }

private:
    std::string var_;
};

class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, std::string subexpression);
    const std::string& subexpression() const { return sub_; }

private:
    std::string sub_;
};

// Derivative with respect to one variable. Keeps a memo so that repeated
// calls over overlapping DAGs reuse earlier work.
class Differentiator {
public:
    explicit Differentiator(std::string_view var);
    Expression operator()(const Expression& e);
    const std::string& variable() const { return var_; }

private:
    Expression rec(const Node* n);
    std::string var_;
    std::uint32_t id_;
    std::unordered_map<const Node*, Expression> memo_;
};

Expression differentiate(const Expression& e, std::string_view var);
Expression differentiate(const Expression& e, std::string_view var, int order);

Expression simplify(const Expression& e);

double evaluate(const Expression& e, const Binding& b);

// Tree size with multiplicity (saturates at UINT64_MAX).
std::uint64_t node_count(const Expression& e);
// Number of distinct nodes in the shared DAG.
std::size_t dag_size(const Expression& e);
std::size_t dag_size(std::span<const Expression> roots);

std::vector<std::string> variables(const Expression& e);

// Prefix form, e.g. (add (mul 2 S) #1=(exp x) #1#). Shared non-leaf
// subtrees are labelled on first use and referenced afterwards.
std::string to_string(const Expression& e);
Expression parse(std::string_view text);

// Replace variables by expressions (or constants).
Expression substitute(const Expression& e, const std::map<std::string, Expression, std::less<>>& repl);

// Flattened evaluation program for one or more roots.
class Program {
public:
    Program() = default;
    explicit Program(std::vector<Expression> outputs);

    const std::vector<std::string>& inputs() const { return inputs_; }
    std::size_t outputs() const { return out_.size(); }
    std::size_t size() const { return code_.size(); }

    std::vector<double> run(const Binding& b) const;
    // Inputs ordered as inputs(); scratch is resized as needed.
    void run(std::span<const double> in, std::span<double> out, std::vector<double>& scratch) const;
    std::vector<double> input_vector(const Binding& b) const;

private:
    struct Instr {
        Kind op;
        std::uint32_t a;
        std::uint32_t b;
        double c;
    };
    std::vector<Instr> code_;
    std::vector<Expression> nodes_;
    std::vector<std::uint32_t> out_;
    std::vector<std::string> inputs_;
};

}  // namespace kmx::symx
