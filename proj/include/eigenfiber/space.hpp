#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace eigenfiber {

using cplx = std::complex<double>;

/// A finite vertex set with a strictly positive measure attached to each
/// vertex. The vertex ordering is fixed at construction; all numeric code
/// indexes through it, so results are reproducible bit for bit.
class DiscreteMeasureSpace {
public:
    DiscreteMeasureSpace(std::vector<std::string> ids, std::vector<double> measure)
        : ids_(std::move(ids)), measure_(std::move(measure)) {
        if (ids_.size() != measure_.size())
            throw std::invalid_argument("space: id/measure length mismatch");
        if (ids_.empty())
            throw std::invalid_argument("space: empty vertex set");
        index_.reserve(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (!(measure_[i] > 0.0) || !std::isfinite(measure_[i]))
                throw std::invalid_argument("space: measure must be positive (vertex '" + ids_[i] + "')");
            if (!index_.emplace(ids_[i], static_cast<int>(i)).second)
                throw std::invalid_argument("space: duplicate vertex id '" + ids_[i] + "'");
        }
        sqrt_measure_.resize(measure_.size());
        for (std::size_t i = 0; i < measure_.size(); ++i)
            sqrt_measure_[i] = std::sqrt(measure_[i]);
    }

    int size() const { return static_cast<int>(ids_.size()); }
    const std::string& id(int i) const { return ids_[static_cast<std::size_t>(i)]; }
    double measure(int i) const { return measure_[static_cast<std::size_t>(i)]; }
    double sqrt_measure(int i) const { return sqrt_measure_[static_cast<std::size_t>(i)]; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<double>& measures() const { return measure_; }

    int index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw std::invalid_argument("space: unknown vertex id '" + id + "'");
        return it->second;
    }
    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    double total_mass() const {
        double s = 0.0;
        for (double m : measure_) s += m;
        return s;
    }

    bool same_content(const DiscreteMeasureSpace& other) const {
        return ids_ == other.ids_ && measure_ == other.measure_;
    }

private:
    std::vector<std::string> ids_;
    std::vector<double> measure_;
    std::vector<double> sqrt_measure_;
    std::unordered_map<std::string, int> index_;
};

using SpacePtr = std::shared_ptr<const DiscreteMeasureSpace>;

inline SpacePtr make_space(std::vector<std::string> ids, std::vector<double> measure) {
    return std::make_shared<const DiscreteMeasureSpace>(std::move(ids), std::move(measure));
}

/// Uniform-measure space with vertex ids "x0", "x1", ...
inline SpacePtr make_uniform_space(int n, double m = 1.0) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids.push_back("x" + std::to_string(i));
    return make_space(std::move(ids), std::vector<double>(static_cast<std::size_t>(n), m));
}

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->same_content(*b);
}

inline void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* who) {
    if (!same_space(a, b))
        throw std::invalid_argument(std::string(who) + ": domain mismatch, functions live on different spaces");
}

/// Complex-valued function defined on every vertex of one space.
struct VertexFunction {
    SpacePtr space;
    std::vector<cplx> values;

    VertexFunction() = default;
    VertexFunction(SpacePtr sp, std::vector<cplx> vals) : space(std::move(sp)), values(std::move(vals)) {
        if (!space || static_cast<int>(values.size()) != space->size())
            throw std::invalid_argument("vertex function: value vector does not match the vertex set");
    }
    static VertexFunction zero(SpacePtr sp) {
        auto n = static_cast<std::size_t>(sp->size());
        return VertexFunction(std::move(sp), std::vector<cplx>(n, cplx(0.0, 0.0)));
    }

    cplx operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    cplx& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(values.size()); }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// A vertex function together with its declared finite support. Values must
/// vanish off the support.
struct CompactFunction {
    VertexFunction f;
    std::vector<int> support;

    CompactFunction(VertexFunction fn, std::vector<int> supp) : f(std::move(fn)), support(std::move(supp)) {
        std::sort(support.begin(), support.end());
        std::vector<bool> in(static_cast<std::size_t>(f.size()), false);
        for (int i : support) {
            if (i < 0 || i >= f.size())
                throw std::invalid_argument("compact function: support index out of range");
            in[static_cast<std::size_t>(i)] = true;
        }
        for (int i = 0; i < f.size(); ++i)
            if (!in[static_cast<std::size_t>(i)] && f[i] != cplx(0.0, 0.0))
                throw std::invalid_argument("compact function: nonzero value outside declared support");
    }
};

/// Delta function at one vertex (value 1 there, 0 elsewhere).
inline CompactFunction delta(SpacePtr sp, int at) {
    auto f = VertexFunction::zero(std::move(sp));
    f[at] = cplx(1.0, 0.0);
    return CompactFunction(std::move(f), {at});
}

/// <v, u> = sum conj(v(x)) u(x) m(x); antilinear in the first argument.
inline cplx inner_product(const VertexFunction& v, const VertexFunction& u) {
    require_same_space(v.space, u.space, "inner_product");
    cplx s(0.0, 0.0);
    const int n = v.size();
    for (int i = 0; i < n; ++i)
        s += std::conj(v[i]) * u[i] * v.space->measure(i);
    return s;
}

inline double norm_sq(const VertexFunction& u) { return inner_product(u, u).real(); }

/// (g, u)_m over the support of u. Coincides with inner_product on finite
/// spaces; kept separate because it is the pairing the dual-side theory uses.
inline cplx dual_pairing(const VertexFunction& g, const CompactFunction& u) {
    require_same_space(g.space, u.f.space, "dual_pairing");
    cplx s(0.0, 0.0);
    for (int i : u.support)
        s += std::conj(g[i]) * u.f[i] * g.space->measure(i);
    return s;
}

/// sum_x omega(x)^2 |u(x)|^2 m(x). omega must be nonnegative and defined on
/// every vertex.
inline double weighted_norm_sq(const VertexFunction& u, const std::vector<double>& omega) {
    if (static_cast<int>(omega.size()) != u.size())
        throw std::invalid_argument("weighted_norm_sq: weight does not match the vertex set");
    double s = 0.0;
    const int n = u.size();
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(u[i]);
        s += omega[static_cast<std::size_t>(i)] * omega[static_cast<std::size_t>(i)] * a * a *
             u.space->measure(i);
    }
    return s;
}

}  // namespace eigenfiber
