#include "kmx/symx.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <mutex>
#include <unordered_set>

namespace kmx::symx {

struct Node {
    Kind kind;
    std::uint32_t var;
    mutable std::atomic<std::uint32_t> refs;
    std::uint64_t hash;
    std::uint64_t mask;
    std::uint64_t size;
    double value;
    const std::string* name;
    const Node* c[2];
};

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014327;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    return h;
}

std::uint64_t fnv(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = a + b;
    return r < a ? std::numeric_limits<std::uint64_t>::max() : r;
}

struct NodeHash {
    std::size_t operator()(const Node* n) const { return static_cast<std::size_t>(n->hash); }
};

struct NodeEq {
    bool operator()(const Node* x, const Node* y) const {
        if (x->kind != y->kind || x->hash != y->hash) return false;
        switch (x->kind) {
            case Kind::constant:
                return std::bit_cast<std::uint64_t>(x->value) == std::bit_cast<std::uint64_t>(y->value);
            case Kind::variable:
                return x->var == y->var;
            default:
                return x->c[0] == y->c[0] && x->c[1] == y->c[1];
        }
    }
};

struct Registry {
    std::mutex mu;
    std::unordered_set<Node*, NodeHash, NodeEq> table;
    std::size_t sweep_at = 1u << 16;
    std::deque<std::string> names;
    std::unordered_map<std::string, std::uint32_t> ids;

    void sweep() {
        std::vector<Node*> dead;
        for (Node* n : table)
            if (n->refs.load(std::memory_order_acquire) == 0) dead.push_back(n);
        while (!dead.empty()) {
            Node* n = dead.back();
            dead.pop_back();
            table.erase(n);
            for (const Node* ch : n->c) {
                if (ch && ch->refs.fetch_sub(1, std::memory_order_acq_rel) == 1)
                    dead.push_back(const_cast<Node*>(ch));
            }
            delete n;
        }
        sweep_at = std::max<std::size_t>(2 * table.size(), 1u << 16);
    }
};

Registry& registry() {
    static Registry* r = new Registry();  // intentionally leaked: outlives static Expressions
    return *r;
}

std::uint32_t var_id(std::string_view name, const std::string** stored) {
    auto& r = registry();
    std::lock_guard lk(r.mu);
    auto it = r.ids.find(std::string(name));
    if (it == r.ids.end()) {
        r.names.emplace_back(name);
        it = r.ids.emplace(std::string(name), static_cast<std::uint32_t>(r.names.size() - 1)).first;
    }
    if (stored) *stored = &r.names[it->second];
    return it->second;
}

const Node* intern(Kind k, std::uint32_t var, const std::string* name, double value, const Node* a, const Node* b) {
    Node proto;
    proto.kind = k;
    proto.var = var;
    proto.value = value;
    proto.name = name;
    proto.c[0] = a;
    proto.c[1] = b;
    proto.refs.store(0, std::memory_order_relaxed);
    std::uint64_t h = mix(0x5bd1e995ULL, static_cast<std::uint64_t>(k));
    std::uint64_t mask = 0;
    std::uint64_t size = 1;
    if (k == Kind::constant) {
        h = mix(h, std::bit_cast<std::uint64_t>(value));
    } else if (k == Kind::variable) {
        h = mix(h, fnv(*name));
        mask = 1ULL << (var & 63u);
    } else {
        for (const Node* ch : proto.c) {
            if (!ch) continue;
            h = mix(h, ch->hash);
            mask |= ch->mask;
            size = sat_add(size, ch->size);
        }
    }
    proto.hash = h;
    proto.mask = mask;
    proto.size = size;

    auto& r = registry();
    std::lock_guard lk(r.mu);
    auto it = r.table.find(&proto);
    if (it != r.table.end()) {
        (*it)->refs.fetch_add(1, std::memory_order_relaxed);
        return *it;
    }
    if (r.table.size() >= r.sweep_at) r.sweep();
    Node* n = new Node;
    n->kind = k;
    n->var = var;
    n->value = value;
    n->name = name;
    n->c[0] = a;
    n->c[1] = b;
    n->hash = h;
    n->mask = mask;
    n->size = size;
    n->refs.store(1, std::memory_order_relaxed);
    for (const Node* ch : n->c)
        if (ch) ch->refs.fetch_add(1, std::memory_order_relaxed);
    r.table.insert(n);
    return n;
}

}  // namespace

struct Access {
    static Expression adopt(const Node* n) { return Expression(n); }
    static Expression share(const Node* n) {
        n->refs.fetch_add(1, std::memory_order_relaxed);
        return Expression(n);
    }
};

namespace {

Expression from(const Node* n) { return Access::share(n); }

Expression node_op(Kind k, const Expression& a) {
    return Access::adopt(intern(k, 0, nullptr, 0.0, a.node(), nullptr));
}

Expression node_op(Kind k, const Expression& a, const Expression& b) {
    return Access::adopt(intern(k, 0, nullptr, 0.0, a.node(), b.node()));
}

bool finite(double x) { return std::isfinite(x); }

// Deterministic total order used to canonicalise commutative operands.
int structural_compare(const Node* x, const Node* y) {
    if (x == y) return 0;
    if (x->hash != y->hash) return x->hash < y->hash ? -1 : 1;
    if (x->kind != y->kind) return x->kind < y->kind ? -1 : 1;
    if (x->kind == Kind::constant) return x->value < y->value ? -1 : (x->value > y->value ? 1 : 0);
    if (x->kind == Kind::variable) return x->name->compare(*y->name);
    for (int i = 0; i < 2; ++i) {
        if (!x->c[i]) break;
        int r = structural_compare(x->c[i], y->c[i]);
        if (r != 0) return r;
    }
    return 0;
}

bool ordered_before(const Expression& a, const Expression& b) {
    if (a.is_constant() != b.is_constant()) return a.is_constant();
    return structural_compare(a.node(), b.node()) < 0;
}

// Split e into coefficient * term.
std::pair<double, Expression> split_coef(const Expression& e) {
    if (e.kind() == Kind::multiply && e.child(0).is_constant()) return {e.child(0).value(), e.child(1)};
    if (e.kind() == Kind::negate) return {-1.0, e.child(0)};
    return {1.0, e};
}

Expression scaled(double c, const Expression& term) { return Expression(c) * term; }

}  // namespace

// ---------------------------------------------------------------- names

std::string_view kind_name(Kind k) {
    switch (k) {
        case Kind::constant: return "const";
        case Kind::variable: return "var";
        case Kind::negate: return "neg";
        case Kind::add: return "add";
        case Kind::subtract: return "sub";
        case Kind::multiply: return "mul";
        case Kind::divide: return "div";
        case Kind::power: return "pow";
        case Kind::exp: return "exp";
        case Kind::ln: return "ln";
        case Kind::sqrt: return "sqrt";
        case Kind::abs: return "abs";
        case Kind::sign: return "sign";
        case Kind::normal_pdf: return "npdf";
        case Kind::normal_cdf: return "ncdf";
    }
    return "?";
}

std::size_t kind_arity(Kind k) {
    switch (k) {
        case Kind::constant:
        case Kind::variable: return 0;
        case Kind::add:
        case Kind::subtract:
        case Kind::multiply:
        case Kind::divide:
        case Kind::power: return 2;
        default: return 1;
    }
}

// ---------------------------------------------------------------- handle

namespace {

const Node* zero_node() {
    static const Node* z = intern(Kind::constant, 0, nullptr, 0.0, nullptr, nullptr);  // one reference kept forever
    z->refs.fetch_add(1, std::memory_order_relaxed);
    return z;
}

}  // namespace

Expression::Expression() : n_(zero_node()) {}

Expression::Expression(double c) {
    if (!std::isfinite(c)) throw std::invalid_argument("symx: non-finite constant");
    if (c == 0.0) {
        n_ = zero_node();  // also folds -0 into +0
        return;
    }
    n_ = intern(Kind::constant, 0, nullptr, c, nullptr, nullptr);
}

Expression::Expression(const Expression& o) noexcept : n_(o.n_) { n_->refs.fetch_add(1, std::memory_order_relaxed); }

Expression::Expression(Expression&& o) noexcept : n_(o.n_) { o.n_ = zero_node(); }

Expression& Expression::operator=(const Expression& o) noexcept {
    if (n_ != o.n_) {
        o.n_->refs.fetch_add(1, std::memory_order_relaxed);
        n_->refs.fetch_sub(1, std::memory_order_acq_rel);
        n_ = o.n_;
    }
    return *this;
}

Expression& Expression::operator=(Expression&& o) noexcept {
    if (this != &o) std::swap(n_, o.n_);
    return *this;
}

Expression::~Expression() { n_->refs.fetch_sub(1, std::memory_order_acq_rel); }

Expression Expression::constant(double c) { return Expression(c); }

Expression Expression::variable(std::string_view name) {
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
        throw std::invalid_argument("symx: invalid variable name '" + std::string(name) + "'");
    for (char ch : name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'))
            throw std::invalid_argument("symx: invalid variable name '" + std::string(name) + "'");
    const std::string* stored = nullptr;
    std::uint32_t id = var_id(name, &stored);
    return Access::adopt(intern(Kind::variable, id, stored, 0.0, nullptr, nullptr));
}

Expression Expression::make(Kind k, const Expression& a) {
    if (kind_arity(k) != 1) throw std::invalid_argument("symx: arity mismatch for " + std::string(kind_name(k)));
    return node_op(k, a);
}

Expression Expression::make(Kind k, const Expression& a, const Expression& b) {
    if (kind_arity(k) != 2) throw std::invalid_argument("symx: arity mismatch for " + std::string(kind_name(k)));
    return node_op(k, a, b);
}

Kind Expression::kind() const { return n_->kind; }
std::size_t Expression::arity() const { return kind_arity(n_->kind); }

Expression Expression::child(std::size_t i) const {
    if (i >= arity()) throw std::out_of_range("symx: child index");
    return from(n_->c[i]);
}

double Expression::value() const {
    if (n_->kind != Kind::constant) throw std::logic_error("symx: value() on non-constant");
    return n_->value;
}

const std::string& Expression::name() const {
    if (n_->kind != Kind::variable) throw std::logic_error("symx: name() on non-variable");
    return *n_->name;
}

bool Expression::depends_on(std::string_view var) const {
    auto& r = registry();
    std::uint32_t id;
    {
        std::lock_guard lk(r.mu);
        auto it = r.ids.find(std::string(var));
        if (it == r.ids.end()) return false;
        id = it->second;
    }
    if (!(n_->mask & (1ULL << (id & 63u)))) return false;
    std::vector<const Node*> stack{n_};
    std::unordered_set<const Node*> seen;
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!(n->mask & (1ULL << (id & 63u))) || !seen.insert(n).second) continue;
        if (n->kind == Kind::variable && n->var == id) return true;
        for (const Node* ch : n->c)
            if (ch) stack.push_back(ch);
    }
    return false;
}

std::uint64_t Expression::hash() const { return n_->hash; }

// ---------------------------------------------------------------- rules

Expression operator-(const Expression& a) {
    switch (a.kind()) {
        case Kind::constant: return Expression(-a.value());
        case Kind::negate: return a.child(0);
        case Kind::multiply:
            if (a.child(0).is_constant()) return Expression(-a.child(0).value()) * a.child(1);
            break;
        case Kind::subtract: return a.child(1) - a.child(0);
        default: break;
    }
    return node_op(Kind::negate, a);
}

Expression operator+(const Expression& a, const Expression& b) {
    if (a.is_constant() && b.is_constant()) {
        double s = a.value() + b.value();
        if (finite(s)) return Expression(s);
    }
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    auto [ca, ta] = split_coef(a);
    auto [cb, tb] = split_coef(b);
    if (ta.same(tb) && !ta.is_constant()) {
        double s = ca + cb;
        return s == 0.0 ? Expression(0.0) : scaled(s, ta);
    }
    if (b.kind() == Kind::negate) return a - b.child(0);
    if (a.kind() == Kind::negate) return b - a.child(0);
    if (a.kind() == Kind::subtract && a.child(1).same(b)) return a.child(0);
    if (b.kind() == Kind::subtract && b.child(1).same(a)) return b.child(0);
    if (ordered_before(b, a)) return node_op(Kind::add, b, a);
    return node_op(Kind::add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
    if (a.is_constant() && b.is_constant()) {
        double s = a.value() - b.value();
        if (finite(s)) return Expression(s);
    }
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    if (a.same(b)) return Expression(0.0);
    auto [ca, ta] = split_coef(a);
    auto [cb, tb] = split_coef(b);
    if (ta.same(tb) && !ta.is_constant()) {
        double s = ca - cb;
        return s == 0.0 ? Expression(0.0) : scaled(s, ta);
    }
    if (b.kind() == Kind::negate) return a + b.child(0);
    if (a.kind() == Kind::add) {
        if (a.child(0).same(b)) return a.child(1);
        if (a.child(1).same(b)) return a.child(0);
    }
    if (a.kind() == Kind::subtract && a.child(0).same(b)) return -a.child(1);
    return node_op(Kind::subtract, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
    if (a.is_constant() && b.is_constant()) {
        double p = a.value() * b.value();
        if (finite(p)) return Expression(p);
    }
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expression(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return -b;
    if (b.is_constant(-1.0)) return -a;
    if (a.kind() == Kind::negate && b.kind() == Kind::negate) return a.child(0) * b.child(0);
    if (a.kind() == Kind::negate) return -(a.child(0) * b);
    if (b.kind() == Kind::negate) return -(a * b.child(0));
    if (b.is_constant()) return b * a;
    if (a.is_constant()) {
        if (b.kind() == Kind::multiply && b.child(0).is_constant()) {
            double p = a.value() * b.child(0).value();
            if (finite(p)) return Expression(p) * b.child(1);
        }
        return node_op(Kind::multiply, a, b);
    }
    bool ac = a.kind() == Kind::multiply && a.child(0).is_constant();
    bool bc = b.kind() == Kind::multiply && b.child(0).is_constant();
    if (ac && bc) {
        double p = a.child(0).value() * b.child(0).value();
        if (finite(p)) return Expression(p) * (a.child(1) * b.child(1));
    }
    if (ac) return a.child(0) * (a.child(1) * b);
    if (bc) return b.child(0) * (a * b.child(1));
    if (a.same(b) && a.kind() == Kind::sqrt) return a.child(0);
    if (ordered_before(b, a)) return node_op(Kind::multiply, b, a);
    return node_op(Kind::multiply, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
    if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
        double q = a.value() / b.value();
        if (finite(q)) return Expression(q);
    }
    if (b.is_constant(1.0)) return a;
    if (b.is_constant(-1.0)) return -a;
    if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expression(0.0);
    if (a.same(b) && !b.is_constant(0.0)) return Expression(1.0);
    if (b.is_constant() && b.value() != 0.0 && finite(1.0 / b.value())) return Expression(1.0 / b.value()) * a;
    if (a.kind() == Kind::negate) return -(a.child(0) / b);
    if (b.kind() == Kind::negate) return -(a / b.child(0));
    if (a.kind() == Kind::multiply && a.child(0).is_constant()) return a.child(0) * (a.child(1) / b);
    return node_op(Kind::divide, a, b);
}

Expression pow(const Expression& a, const Expression& b) {
    if (a.is_constant() && b.is_constant()) {
        double p = std::pow(a.value(), b.value());
        if (finite(p)) return Expression(p);
    }
    if (b.is_constant(0.0)) return Expression(1.0);
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(1.0)) return Expression(1.0);
    return node_op(Kind::power, a, b);
}

Expression exp(const Expression& a) {
    if (a.is_constant()) {
        double v = std::exp(a.value());
        if (finite(v)) return Expression(v);
    }
    return node_op(Kind::exp, a);
}

Expression ln(const Expression& a) {
    if (a.is_constant() && a.value() > 0.0) return Expression(std::log(a.value()));
    if (a.kind() == Kind::exp) return a.child(0);
    return node_op(Kind::ln, a);
}

Expression sqrt(const Expression& a) {
    if (a.is_constant() && a.value() >= 0.0) return Expression(std::sqrt(a.value()));
    return node_op(Kind::sqrt, a);
}

Expression abs(const Expression& a) {
    if (a.is_constant()) return Expression(std::fabs(a.value()));
    if (a.kind() == Kind::abs) return a;
    if (a.kind() == Kind::negate) return abs(a.child(0));
    return node_op(Kind::abs, a);
}

Expression sign(const Expression& a) {
    if (a.is_constant()) return Expression(a.value() > 0.0 ? 1.0 : (a.value() < 0.0 ? -1.0 : 0.0));
    return node_op(Kind::sign, a);
}

Expression normal_pdf(const Expression& a) {
    if (a.is_constant()) return Expression(inv_sqrt_2pi * std::exp(-0.5 * a.value() * a.value()));
    if (a.kind() == Kind::negate) return normal_pdf(a.child(0));
    return node_op(Kind::normal_pdf, a);
}

Expression normal_cdf(const Expression& a) {
    if (a.is_constant()) return Expression(0.5 * std::erfc(-a.value() * M_SQRT1_2));
    return node_op(Kind::normal_cdf, a);
}

Expression product(std::vector<Expression> factors) {
    double coef = 1.0;
    std::vector<Expression> rest;
    std::vector<std::pair<Expression, Expression>> powers;  // base, exponent
    std::vector<Expression> stack(factors.rbegin(), factors.rend());
    while (!stack.empty()) {
        Expression f = stack.back();
        stack.pop_back();
        if (f.kind() == Kind::multiply) {
            stack.push_back(f.child(1));
            stack.push_back(f.child(0));
            continue;
        }
        if (f.kind() == Kind::negate) {
            coef = -coef;
            stack.push_back(f.child(0));
            continue;
        }
        if (f.is_constant()) {
            coef *= f.value();
            continue;
        }
        Expression base = f, expo = Expression(1.0);
        if (f.kind() == Kind::sqrt) {
            base = f.child(0);
            expo = Expression(0.5);
        } else if (f.kind() == Kind::power && f.child(1).is_constant()) {
            base = f.child(0);
            expo = f.child(1);
        }
        auto it = std::find_if(powers.begin(), powers.end(), [&](auto& p) { return p.first.same(base); });
        if (it == powers.end())
            powers.emplace_back(base, expo);
        else
            it->second = it->second + expo;
    }
    Expression out(coef);
    for (auto& [base, expo] : powers) {
        if (expo.is_constant(0.5))
            out = out * sqrt(base);
        else
            out = out * pow(base, expo);
    }
    return out;
}

Expression square(const Expression& a) { return product({a, a}); }

// ---------------------------------------------------------------- errors

UnboundVariable::UnboundVariable(const std::string& var)
    : std::invalid_argument("symx: unbound variable '" + var + "'"), var_(var) {}

DomainError::DomainError(const std::string& what, std::string subexpression)
    : std::domain_error(what + " in " + subexpression), sub_(std::move(subexpression)) {}

// ---------------------------------------------------------------- derivative

Differentiator::Differentiator(std::string_view var) : var_(var) {
    id_ = var_id(var, nullptr);
}

Expression Differentiator::operator()(const Expression& e) { return rec(e.node()); }

Expression Differentiator::rec(const Node* n) {
    if (!(n->mask & (1ULL << (id_ & 63u)))) return Expression(0.0);
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    Expression self = from(n);
    Expression d;
    switch (n->kind) {
        case Kind::constant: d = Expression(0.0); break;
        case Kind::variable: d = Expression(n->var == id_ ? 1.0 : 0.0); break;
        case Kind::negate: d = -rec(n->c[0]); break;
        case Kind::add: d = rec(n->c[0]) + rec(n->c[1]); break;
        case Kind::subtract: d = rec(n->c[0]) - rec(n->c[1]); break;
        case Kind::multiply: {
            Expression a = from(n->c[0]), b = from(n->c[1]);
            d = rec(n->c[0]) * b + a * rec(n->c[1]);
            break;
        }
        case Kind::divide: {
            Expression b = from(n->c[1]);
            d = (rec(n->c[0]) - self * rec(n->c[1])) / b;
            break;
        }
        case Kind::power: {
            Expression a = from(n->c[0]), b = from(n->c[1]);
            if (b.is_constant()) {
                d = b * pow(a, Expression(b.value() - 1.0)) * rec(n->c[0]);
            } else {
                d = self * (rec(n->c[1]) * ln(a) + b * rec(n->c[0]) / a);
            }
            break;
        }
        case Kind::exp: d = self * rec(n->c[0]); break;
        case Kind::ln: d = rec(n->c[0]) / from(n->c[0]); break;
        case Kind::sqrt: d = rec(n->c[0]) / (Expression(2.0) * self); break;
        case Kind::abs: d = sign(from(n->c[0])) * rec(n->c[0]); break;
        case Kind::sign: d = Expression(0.0); break;
        case Kind::normal_pdf: d = -(from(n->c[0]) * self) * rec(n->c[0]); break;
        case Kind::normal_cdf: d = normal_pdf(from(n->c[0])) * rec(n->c[0]); break;
    }
    memo_.emplace(n, d);
    return d;
}

Expression differentiate(const Expression& e, std::string_view var) { return Differentiator(var)(e); }

Expression differentiate(const Expression& e, std::string_view var, int order) {
    if (order < 0) throw std::invalid_argument("symx: negative derivative order");
    Differentiator d(var);
    Expression out = e;
    for (int i = 0; i < order; ++i) out = d(out);
    return out;
}

// ---------------------------------------------------------------- rebuild

namespace {

Expression rebuild(Kind k, const Expression& a, const Expression& b) {
    switch (k) {
        case Kind::negate: return -a;
        case Kind::add: return a + b;
        case Kind::subtract: return a - b;
        case Kind::multiply: return a * b;
        case Kind::divide: return a / b;
        case Kind::power: return pow(a, b);
        case Kind::exp: return exp(a);
        case Kind::ln: return ln(a);
        case Kind::sqrt: return sqrt(a);
        case Kind::abs: return abs(a);
        case Kind::sign: return sign(a);
        case Kind::normal_pdf: return normal_pdf(a);
        case Kind::normal_cdf: return normal_cdf(a);
        default: break;
    }
    throw std::logic_error("symx: rebuild of leaf");
}

template <class Leaf>
Expression transform(const Node* n, std::unordered_map<const Node*, Expression>& memo, Leaf&& leaf) {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    Expression out;
    if (n->kind == Kind::constant || n->kind == Kind::variable) {
        out = leaf(n);
    } else {
        Expression a = transform(n->c[0], memo, leaf);
        Expression b = n->c[1] ? transform(n->c[1], memo, leaf) : Expression();
        out = rebuild(n->kind, a, b);
    }
    memo.emplace(n, out);
    return out;
}

}  // namespace

Expression simplify(const Expression& e) {
    std::unordered_map<const Node*, Expression> memo;
    return transform(e.node(), memo, [](const Node* n) { return from(n); });
}

Expression substitute(const Expression& e, const std::map<std::string, Expression, std::less<>>& repl) {
    std::unordered_map<const Node*, Expression> memo;
    return transform(e.node(), memo, [&](const Node* n) {
        if (n->kind == Kind::variable) {
            auto it = repl.find(*n->name);
            if (it != repl.end()) return it->second;
        }
        return from(n);
    });
}

// ---------------------------------------------------------------- queries

std::uint64_t node_count(const Expression& e) { return e.node()->size; }

std::size_t dag_size(std::span<const Expression> roots) {
    std::unordered_set<const Node*> seen;
    std::vector<const Node*> stack;
    for (auto& r : roots) stack.push_back(r.node());
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        for (const Node* ch : n->c)
            if (ch) stack.push_back(ch);
    }
    return seen.size();
}

std::size_t dag_size(const Expression& e) { return dag_size(std::span<const Expression>(&e, 1)); }

std::vector<std::string> variables(const Expression& e) {
    std::unordered_set<const Node*> seen;
    std::vector<const Node*> stack{e.node()};
    std::vector<std::string> out;
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!n->mask || !seen.insert(n).second) continue;
        if (n->kind == Kind::variable) out.push_back(*n->name);
        for (const Node* ch : n->c)
            if (ch) stack.push_back(ch);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------- text form

namespace {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void print(const Node* n, const std::unordered_map<const Node*, int>& indeg,
           std::unordered_map<const Node*, int>& labels, std::string& out) {
    if (n->kind == Kind::constant) {
        out += format_number(n->value);
        return;
    }
    if (n->kind == Kind::variable) {
        out += *n->name;
        return;
    }
    auto lit = labels.find(n);
    if (lit != labels.end()) {
        out += '#' + std::to_string(lit->second) + '#';
        return;
    }
    if (indeg.at(n) > 1) {
        int id = static_cast<int>(labels.size()) + 1;
        labels.emplace(n, id);
        out += '#' + std::to_string(id) + '=';
    }
    out += '(';
    out += kind_name(n->kind);
    for (const Node* ch : n->c) {
        if (!ch) continue;
        out += ' ';
        print(ch, indeg, labels, out);
    }
    out += ')';
}

}  // namespace

std::string to_string(const Expression& e) {
    std::unordered_map<const Node*, int> indeg;
    std::vector<const Node*> stack{e.node()};
    indeg[e.node()] = 1;
    std::unordered_set<const Node*> seen;
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        for (const Node* ch : n->c) {
            if (!ch) continue;
            ++indeg[ch];
            stack.push_back(ch);
        }
    }
    std::unordered_map<const Node*, int> labels;
    std::string out;
    print(e.node(), indeg, labels, out);
    return out;
}

namespace {

struct Parser {
    std::string_view s;
    std::size_t i = 0;
    std::unordered_map<int, Expression> labels;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("symx parse error at offset " + std::to_string(i) + ": " + msg);
    }
    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    std::string_view token() {
        skip();
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
        if (j == i) fail("expected token");
        auto t = s.substr(i, j - i);
        i = j;
        return t;
    }
    Expression expr() {
        skip();
        if (i >= s.size()) fail("unexpected end of input");
        if (s[i] == '#') {
            std::size_t j = i + 1;
            int id = 0;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) id = id * 10 + (s[j++] - '0');
            if (j >= s.size() || j == i + 1) fail("bad label");
            if (s[j] == '#') {
                i = j + 1;
                auto it = labels.find(id);
                if (it == labels.end()) fail("undefined label #" + std::to_string(id));
                return it->second;
            }
            if (s[j] != '=') fail("bad label");
            i = j + 1;
            Expression e = expr();
            labels.emplace(id, e);
            return e;
        }
        if (s[i] == '(') {
            ++i;
            auto op = token();
            Kind k;
            static const std::pair<std::string_view, Kind> table[] = {
                {"neg", Kind::negate}, {"add", Kind::add},   {"sub", Kind::subtract}, {"mul", Kind::multiply},
                {"div", Kind::divide}, {"pow", Kind::power}, {"exp", Kind::exp},      {"ln", Kind::ln},
                {"sqrt", Kind::sqrt},  {"abs", Kind::abs},   {"sign", Kind::sign},    {"npdf", Kind::normal_pdf},
                {"ncdf", Kind::normal_cdf}};
            auto it = std::find_if(std::begin(table), std::end(table), [&](auto& p) { return p.first == op; });
            if (it == std::end(table)) fail("unknown operator '" + std::string(op) + "'");
            k = it->second;
            Expression a = expr();
            Expression out;
            if (kind_arity(k) == 2) {
                Expression b = expr();
                out = Expression::make(k, a, b);
            } else {
                out = Expression::make(k, a);
            }
            skip();
            if (i >= s.size() || s[i] != ')') fail("expected ')'");
            ++i;
            return out;
        }
        auto t = token();
        char c0 = t[0];
        if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == '-' || c0 == '+' || c0 == '.') {
            double v = 0.0;
            auto first = t.data() + (c0 == '+' ? 1 : 0);
            auto res = std::from_chars(first, t.data() + t.size(), v);
            if (res.ec != std::errc() || res.ptr != t.data() + t.size()) fail("bad number '" + std::string(t) + "'");
            return Expression(v);
        }
        return Expression::variable(t);
    }
};

}  // namespace

Expression parse(std::string_view text) {
    Parser p{text, 0, {}};
    Expression e = p.expr();
    p.skip();
    if (p.i != text.size()) p.fail("trailing input");
    return e;
}

// ---------------------------------------------------------------- evaluation

namespace {

std::string describe(const Expression& e) {
    std::string s = to_string(e);
    constexpr std::size_t cap = 240;
    if (s.size() > cap) s = s.substr(0, cap) + " ...";
    return s;
}

}  // namespace

Program::Program(std::vector<Expression> outputs) {
    std::unordered_map<const Node*, std::uint32_t> slot;
    std::unordered_map<std::string, std::uint32_t> input_index;
    struct Frame {
        const Node* n;
        bool expanded;
    };
    for (const auto& root : outputs) {
        std::vector<Frame> stack{{root.node(), false}};
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            if (slot.count(f.n)) continue;
            if (!f.expanded) {
                stack.push_back({f.n, true});
                for (int i = 1; i >= 0; --i)
                    if (f.n->c[i] && !slot.count(f.n->c[i])) stack.push_back({f.n->c[i], false});
                continue;
            }
            Instr ins{f.n->kind, 0, 0, 0.0};
            if (f.n->kind == Kind::constant) {
                ins.c = f.n->value;
            } else if (f.n->kind == Kind::variable) {
                auto [it, fresh] = input_index.emplace(*f.n->name, static_cast<std::uint32_t>(inputs_.size()));
                if (fresh) inputs_.push_back(*f.n->name);
                ins.a = it->second;
            } else {
                ins.a = slot.at(f.n->c[0]);
                if (f.n->c[1]) ins.b = slot.at(f.n->c[1]);
            }
            slot.emplace(f.n, static_cast<std::uint32_t>(code_.size()));
            code_.push_back(ins);
            nodes_.push_back(from(f.n));
        }
        out_.push_back(slot.at(root.node()));
    }
}

std::vector<double> Program::input_vector(const Binding& b) const {
    std::vector<double> in(inputs_.size());
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        auto it = b.find(inputs_[i]);
        if (it == b.end()) throw UnboundVariable(inputs_[i]);
        if (!std::isfinite(it->second))
            throw std::invalid_argument("symx: non-finite binding for '" + inputs_[i] + "'");
        in[i] = it->second;
    }
    return in;
}

std::vector<double> Program::run(const Binding& b) const {
    auto in = input_vector(b);
    std::vector<double> out(out_.size()), scratch;
    run(in, out, scratch);
    return out;
}

void Program::run(std::span<const double> in, std::span<double> out, std::vector<double>& v) const {
    v.resize(code_.size());
    const std::size_t n = code_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Instr& I = code_[i];
        double r;
        switch (I.op) {
            case Kind::constant: r = I.c; break;
            case Kind::variable: r = in[I.a]; break;
            case Kind::negate: r = -v[I.a]; break;
            case Kind::add: r = v[I.a] + v[I.b]; break;
            case Kind::subtract: r = v[I.a] - v[I.b]; break;
            case Kind::multiply: r = v[I.a] * v[I.b]; break;
            case Kind::divide: r = v[I.a] / v[I.b]; break;
            case Kind::power: r = std::pow(v[I.a], v[I.b]); break;
            case Kind::exp: r = std::exp(v[I.a]); break;
            case Kind::ln: r = std::log(v[I.a]); break;
            case Kind::sqrt: r = std::sqrt(v[I.a]); break;
            case Kind::abs: r = std::fabs(v[I.a]); break;
            case Kind::sign: r = v[I.a] > 0.0 ? 1.0 : (v[I.a] < 0.0 ? -1.0 : 0.0); break;
            case Kind::normal_pdf: r = inv_sqrt_2pi * std::exp(-0.5 * v[I.a] * v[I.a]); break;
            case Kind::normal_cdf: r = 0.5 * std::erfc(-v[I.a] * M_SQRT1_2); break;
            default: r = 0.0;
        }
        if (!std::isfinite(r)) {
            const char* what = "non-finite value";
            if (I.op == Kind::ln && v[I.a] <= 0.0) what = "log of non-positive value";
            if (I.op == Kind::divide && v[I.b] == 0.0) what = "division by zero";
            if (I.op == Kind::sqrt && v[I.a] < 0.0) what = "sqrt of negative value";
            throw DomainError(std::string("symx: ") + what, describe(nodes_[i]));
        }
        v[i] = r;
    }
    for (std::size_t k = 0; k < out_.size(); ++k) out[k] = v[out_[k]];
}

double evaluate(const Expression& e, const Binding& b) { return Program({e}).run(b)[0]; }

}  // namespace kmx::symx
