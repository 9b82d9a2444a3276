#include "siw/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <unordered_map>

namespace siw {

namespace {

bool is_integral(double x) {
    return std::isfinite(x) && x == std::nearbyint(x) && std::fabs(x) < 9.0e15;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

namespace {

// hash-consing: structurally identical nodes built from identical children
// collapse to one shared node, so repeated operator application keeps the
// expression a compact DAG instead of a exploding tree
struct InternKey {
    int kind;
    double num;
    std::vector<const void*> kids;
    bool operator==(const InternKey& o) const {
        return kind == o.kind && num == o.num && kids == o.kids;
    }
};

struct InternKeyHash {
    size_t operator()(const InternKey& k) const {
        size_t h = std::hash<int>()(k.kind) * 1000003u ^ std::hash<double>()(k.num);
        for (const void* p : k.kids) h = h * 1000003u ^ std::hash<const void*>()(p);
        return h;
    }
};

}  // namespace

Expr Expr::make(Kind k, double num, std::vector<Expr> kids) {
    static std::unordered_map<InternKey, std::weak_ptr<const Node>, InternKeyHash> table;
    static std::mutex mutex;

    InternKey key;
    key.kind = int(k);
    key.num = num;
    key.kids.reserve(kids.size());
    for (const auto& c : kids) key.kids.push_back(c.node_.get());

    std::lock_guard<std::mutex> lock(mutex);
    auto it = table.find(key);
    if (it != table.end()) {
        if (auto node = it->second.lock()) return Expr(std::move(node));
    }
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->num = num;
    n->kids = std::move(kids);
    table[key] = n;
    if (table.size() > (1u << 22)) table.clear();  // drop stale entries wholesale
    return Expr(std::move(n));
}

Expr Expr::constant(double v) { return make(Kind::constant, v, {}); }
Expr Expr::var() { return make(Kind::variable, 0.0, {}); }
Expr Expr::add(std::vector<Expr> terms) { return make(Kind::add, 0.0, std::move(terms)); }
Expr Expr::mul(std::vector<Expr> factors) { return make(Kind::mul, 0.0, std::move(factors)); }
Expr Expr::pow(const Expr& base, double exponent) { return make(Kind::pow, exponent, {base}); }
Expr Expr::logabs(const Expr& arg) { return make(Kind::logabs, 0.0, {arg}); }
Expr Expr::exp(const Expr& arg) { return make(Kind::exp, 0.0, {arg}); }
Expr Expr::div(const Expr& num, const Expr& den) { return make(Kind::div, 0.0, {num, den}); }

Expr Expr::poly(const std::vector<double>& coeffs) {
    std::vector<Expr> terms;
    for (size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0.0) continue;
        if (i == 0)
            terms.push_back(constant(coeffs[i]));
        else if (i == 1)
            terms.push_back(mul({constant(coeffs[i]), var()}));
        else
            terms.push_back(mul({constant(coeffs[i]), pow(var(), double(i))}));
    }
    if (terms.empty()) return constant(0.0);
    if (terms.size() == 1) return terms[0];
    return add(std::move(terms));
}

namespace {

// expressions built by repeated operator application share subtrees heavily;
// memoizing on node identity keeps every walk linear in the DAG size
using EvalCache = std::unordered_map<const void*, double>;

}  // namespace

double Expr::eval_cached(double z, EvalCache& cache) const {
    auto it = cache.find(node_.get());
    if (it != cache.end()) return it->second;
    double out = 0.0;
    switch (node_->kind) {
        case Kind::constant: out = node_->num; break;
        case Kind::variable: out = z; break;
        case Kind::add: {
            for (const auto& k : node_->kids) out += k.eval_cached(z, cache);
            break;
        }
        case Kind::mul: {
            out = 1.0;
            for (const auto& k : node_->kids) out *= k.eval_cached(z, cache);
            break;
        }
        case Kind::pow: {
            double b = node_->kids[0].eval_cached(z, cache);
            double e = node_->num;
            if (b == 0.0 && e < 0.0)
                throw singular_point_error("pow: zero base, negative exponent", z);
            if (b < 0.0 && !is_integral(e))
                throw singular_point_error("pow: negative base, non-integer exponent", z);
            out = std::pow(b, e);
            break;
        }
        case Kind::logabs: {
            double a = node_->kids[0].eval_cached(z, cache);
            if (a == 0.0) throw singular_point_error("logabs: zero argument", z);
            out = std::log(std::fabs(a));
            break;
        }
        case Kind::exp: out = std::exp(node_->kids[0].eval_cached(z, cache)); break;
        case Kind::div: {
            double num = node_->kids[0].eval_cached(z, cache);
            double den = node_->kids[1].eval_cached(z, cache);
            if (den == 0.0) throw singular_point_error("div: zero denominator", z);
            out = num / den;
            break;
        }
    }
    cache.emplace(node_.get(), out);
    return out;
}

double Expr::eval(double z) const {
    EvalCache cache;
    return eval_cached(z, cache);
}

bool Expr::defined_at(double z) const noexcept {
    try {
        double v = eval(z);
        return std::isfinite(v);
    } catch (const singular_point_error&) {
        return false;
    }
}

Expr Expr::diff_cached(DiffCache& cache) const {
    auto it = cache.find(node_.get());
    if (it != cache.end()) return it->second;
    Expr d = constant(0.0);
    switch (node_->kind) {
        case Kind::constant: d = constant(0.0); break;
        case Kind::variable: d = constant(1.0); break;
        case Kind::add: {
            std::vector<Expr> ds;
            ds.reserve(node_->kids.size());
            for (const auto& k : node_->kids) ds.push_back(k.diff_cached(cache));
            d = add(std::move(ds));
            break;
        }
        case Kind::mul: {
            std::vector<Expr> terms;
            for (size_t i = 0; i < node_->kids.size(); ++i) {
                std::vector<Expr> fac;
                for (size_t j = 0; j < node_->kids.size(); ++j)
                    fac.push_back(i == j ? node_->kids[j].diff_cached(cache) : node_->kids[j]);
                terms.push_back(mul(std::move(fac)));
            }
            d = add(std::move(terms));
            break;
        }
        case Kind::pow: {
            const Expr& b = node_->kids[0];
            double e = node_->num;
            d = mul({constant(e), pow(b, e - 1.0), b.diff_cached(cache)});
            break;
        }
        case Kind::logabs: d = div(node_->kids[0].diff_cached(cache), node_->kids[0]); break;
        case Kind::exp: d = mul({node_->kids[0].diff_cached(cache), *this}); break;
        case Kind::div: {
            const Expr& u = node_->kids[0];
            const Expr& v = node_->kids[1];
            d = div(add({mul({u.diff_cached(cache), v}),
                         mul({constant(-1.0), u, v.diff_cached(cache)})}),
                    pow(v, 2.0));
            break;
        }
    }
    d = d.normalized();
    cache.emplace(node_.get(), d);
    return d;
}

Expr Expr::diff() const {
    DiffCache cache;
    return diff_cached(cache);
}

Expr Expr::substitute(const Expr& inner) const {
    switch (node_->kind) {
        case Kind::constant: return *this;
        case Kind::variable: return inner;
        default: {
            std::vector<Expr> kids;
            kids.reserve(node_->kids.size());
            for (const auto& k : node_->kids) kids.push_back(k.substitute(inner));
            return make(node_->kind, node_->num, std::move(kids));
        }
    }
}

Expr Expr::normalized() const {
    NormCache cache;
    return normalized_cached(cache);
}

Expr Expr::normalized_cached(NormCache& cache) const {
    auto hit = cache.find(node_.get());
    if (hit != cache.end()) return hit->second;
    std::vector<Expr> kids;
    kids.reserve(node_->kids.size());
    for (const auto& k : node_->kids) kids.push_back(k.normalized_cached(cache));

    switch (node_->kind) {
        case Kind::constant:
        case Kind::variable:
            return cache.emplace(node_.get(), *this).first->second;
        case Kind::add: {
            std::vector<Expr> flat;
            double c = 0.0;
            for (auto& k : kids) {
                if (k.kind() == Kind::add) {
                    for (const auto& g : k.operands()) {
                        if (g.kind() == Kind::constant)
                            c += g.value();
                        else
                            flat.push_back(g);
                    }
                } else if (k.kind() == Kind::constant) {
                    c += k.value();
                } else {
                    flat.push_back(k);
                }
            }
            if (c != 0.0 || flat.empty()) flat.insert(flat.begin(), constant(c));
            if (flat.size() == 1) return cache.emplace(node_.get(), flat[0]).first->second;
            return cache.emplace(node_.get(), add(std::move(flat))).first->second;
        }
        case Kind::mul: {
            std::vector<Expr> flat;
            double c = 1.0;
            for (auto& k : kids) {
                if (k.kind() == Kind::mul) {
                    for (const auto& g : k.operands()) {
                        if (g.kind() == Kind::constant)
                            c *= g.value();
                        else
                            flat.push_back(g);
                    }
                } else if (k.kind() == Kind::constant) {
                    c *= k.value();
                } else {
                    flat.push_back(k);
                }
            }
            if (c == 0.0) return cache.emplace(node_.get(), constant(0.0)).first->second;
            if (c != 1.0 || flat.empty()) flat.insert(flat.begin(), constant(c));
            if (flat.size() == 1) return cache.emplace(node_.get(), flat[0]).first->second;
            return cache.emplace(node_.get(), mul(std::move(flat))).first->second;
        }
        case Kind::pow: {
            double e = node_->num;
            if (e == 0.0) return cache.emplace(node_.get(), constant(1.0)).first->second;
            if (e == 1.0) return cache.emplace(node_.get(), kids[0]).first->second;
            if (kids[0].kind() == Kind::constant) {
                double b = kids[0].value();
                if (b > 0.0 || (b != 0.0 && is_integral(e)) || (b == 0.0 && e > 0.0))
                    return cache.emplace(node_.get(), constant(std::pow(b, e))).first->second;
            }
            return cache.emplace(node_.get(), pow(kids[0], e)).first->second;
        }
        case Kind::logabs:
            if (kids[0].kind() == Kind::constant && kids[0].value() != 0.0)
                return cache.emplace(node_.get(), constant(std::log(std::fabs(kids[0].value())))).first->second;
            return cache.emplace(node_.get(), logabs(kids[0])).first->second;
        case Kind::exp:
            if (kids[0].kind() == Kind::constant) return cache.emplace(node_.get(), constant(std::exp(kids[0].value()))).first->second;
            return cache.emplace(node_.get(), exp(kids[0])).first->second;
        case Kind::div: {
            if (kids[0].is_constant(0.0)) return cache.emplace(node_.get(), constant(0.0)).first->second;
            if (kids[1].kind() == Kind::constant && kids[1].value() != 0.0) {
                double inv = 1.0 / kids[1].value();
                if (inv == 1.0) return cache.emplace(node_.get(), kids[0]).first->second;
                return cache.emplace(node_.get(), mul({constant(inv), kids[0]}).normalized()).first->second;
            }
            return cache.emplace(node_.get(), div(kids[0], kids[1])).first->second;
        }
    }
    return cache.emplace(node_.get(), *this).first->second;  // unreachable
}

std::string Expr::str() const {
    switch (node_->kind) {
        case Kind::constant: return format_double(node_->num);
        case Kind::variable: return "z";
        case Kind::add:
        case Kind::mul: {
            std::string s = node_->kind == Kind::add ? "(+" : "(*";
            for (const auto& k : node_->kids) s += " " + k.str();
            return s + ")";
        }
        case Kind::pow:
            return "(^ " + node_->kids[0].str() + " " + format_double(node_->num) + ")";
        case Kind::logabs: return "(log " + node_->kids[0].str() + ")";
        case Kind::exp: return "(exp " + node_->kids[0].str() + ")";
        case Kind::div: return "(/ " + node_->kids[0].str() + " " + node_->kids[1].str() + ")";
    }
    return "";  // unreachable
}

bool Expr::same_tree(const Expr& other) const {
    if (node_ == other.node_) return true;
    if (node_->kind != other.node_->kind) return false;
    if (node_->num != other.node_->num) return false;
    if (node_->kids.size() != other.node_->kids.size()) return false;
    for (size_t i = 0; i < node_->kids.size(); ++i)
        if (!node_->kids[i].same_tree(other.node_->kids[i])) return false;
    return true;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::add({a, Expr::mul({Expr::constant(-1.0), b})}); }
Expr operator-(const Expr& a) { return Expr::mul({Expr::constant(-1.0), a}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator*(double a, const Expr& b) { return Expr::mul({Expr::constant(a), b}); }
Expr operator+(const Expr& a, double b) { return Expr::add({a, Expr::constant(b)}); }
Expr operator+(double a, const Expr& b) { return Expr::add({Expr::constant(a), b}); }
Expr operator-(double a, const Expr& b) { return Expr::add({Expr::constant(a), Expr::mul({Expr::constant(-1.0), b})}); }
Expr operator-(const Expr& a, double b) { return Expr::add({a, Expr::constant(-b)}); }

}  // namespace siw
