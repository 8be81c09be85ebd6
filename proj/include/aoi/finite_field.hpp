#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

using fe_t = std::uint32_t;

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

/// Arithmetic in the prime field GF(q). Elements are integers in [0, q).
class PrimeField {
public:
    explicit PrimeField(std::uint32_t q) : q_(q) {
        if (!is_prime(q)) throw InvalidParams("field order " + std::to_string(q) + " is not prime");
        if (q >= (1u << 31)) throw InvalidParams("field order must be below 2^31");
    }

    std::uint32_t order() const { return q_; }

    fe_t reduce(std::int64_t v) const {
        auto r = v % static_cast<std::int64_t>(q_);
        return static_cast<fe_t>(r < 0 ? r + q_ : r);
    }
    fe_t add(fe_t a, fe_t b) const {
        auto s = a + b;
        return s >= q_ ? s - q_ : s;
    }
    fe_t sub(fe_t a, fe_t b) const { return a >= b ? a - b : a + q_ - b; }
    fe_t neg(fe_t a) const { return a == 0 ? 0 : q_ - a; }
    fe_t mul(fe_t a, fe_t b) const {
        return static_cast<fe_t>(static_cast<std::uint64_t>(a) * b % q_);
    }
    fe_t pow(fe_t a, std::uint64_t e) const {
        fe_t r = 1 % q_;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }
    fe_t inv(fe_t a) const {
        if (a % q_ == 0) throw DivisionByZero("inverse of zero in GF(" + std::to_string(q_) + ")");
        return pow(a, q_ - 2);
    }
    fe_t div(fe_t a, fe_t b) const { return mul(a, inv(b)); }

    bool operator==(const PrimeField&) const = default;

private:
    std::uint32_t q_;
};

/// Dense row-major matrix over GF(q); q is supplied by the caller's PrimeField.
class FieldMatrix {
public:
    FieldMatrix() = default;
    FieldMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    static FieldMatrix identity(std::size_t n) {
        FieldMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    /// Builds a matrix from nested rows, reducing every entry mod q.
    static FieldMatrix from_rows(const PrimeField& f, std::initializer_list<std::initializer_list<std::int64_t>> rows) {
        FieldMatrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() ? rows.begin()->size() : 0;
        for (const auto& r : rows) {
            if (r.size() != m.cols_) throw ShapeError("ragged rows");
            for (auto v : r) m.data_.push_back(f.reduce(v));
        }
        return m;
    }

    static FieldMatrix row_vector(std::span<const fe_t> v) {
        FieldMatrix m(1, v.size());
        std::copy(v.begin(), v.end(), m.data_.begin());
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    fe_t& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    fe_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<fe_t> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const fe_t> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const fe_t> data() const { return data_; }

    void append_row(std::span<const fe_t> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw ShapeError("append_row: length mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    void resize_rows(std::size_t rows) {
        rows_ = rows;
        data_.resize(rows_ * cols_);
    }

    bool operator==(const FieldMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<fe_t> data_;
};

inline FieldMatrix transpose(const FieldMatrix& a) {
    FieldMatrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    return t;
}

inline FieldMatrix mat_mul(const PrimeField& f, const FieldMatrix& a, const FieldMatrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("mat_mul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    const std::uint64_t q = f.order();
    FieldMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < b.cols(); ++c) {
            std::uint64_t acc = 0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc += static_cast<std::uint64_t>(a(r, k)) * b(k, c);
                if (acc >= (1ull << 62)) acc %= q;
            }
            out(r, c) = static_cast<fe_t>(acc % q);
        }
    }
    return out;
}

inline std::vector<fe_t> mat_vec(const PrimeField& f, const FieldMatrix& a, std::span<const fe_t> x) {
    if (a.cols() != x.size()) throw ShapeError("mat_vec: length mismatch");
    std::vector<fe_t> y(a.rows(), 0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        fe_t acc = 0;
        for (std::size_t c = 0; c < a.cols(); ++c) acc = f.add(acc, f.mul(a(r, c), x[c]));
        y[r] = acc;
    }
    return y;
}

inline FieldMatrix vstack(const FieldMatrix& a, const FieldMatrix& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) throw ShapeError("vstack: column mismatch");
    FieldMatrix out = a;
    for (std::size_t r = 0; r < b.rows(); ++r) out.append_row(b.row(r));
    return out;
}

struct Echelon {
    FieldMatrix reduced;               ///< reduced row echelon form, zero rows kept at the bottom
    std::vector<std::size_t> pivots;   ///< pivot column of each nonzero row
    std::size_t rank() const { return pivots.size(); }
};

/// Gauss-Jordan elimination on a copy. Columns are scanned left to right and the first
/// row holding a nonzero entry in the current column becomes the pivot.
/// Only the first `ncols` columns are eligible as pivots (all when ncols is npos), which
/// lets callers carry an augmented right-hand side along.
inline Echelon rref(const PrimeField& f, FieldMatrix a, std::size_t ncols = static_cast<std::size_t>(-1)) {
    Echelon e;
    const std::size_t limit = std::min(ncols, a.cols());
    std::size_t lead = 0;
    for (std::size_t c = 0; c < limit && lead < a.rows(); ++c) {
        std::size_t p = lead;
        while (p < a.rows() && a(p, c) == 0) ++p;
        if (p == a.rows()) continue;
        if (p != lead)
            for (std::size_t k = 0; k < a.cols(); ++k) std::swap(a(p, k), a(lead, k));
        const fe_t s = f.inv(a(lead, c));
        for (std::size_t k = 0; k < a.cols(); ++k) a(lead, k) = f.mul(a(lead, k), s);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            if (r == lead || a(r, c) == 0) continue;
            const fe_t factor = a(r, c);
            for (std::size_t k = 0; k < a.cols(); ++k) a(r, k) = f.sub(a(r, k), f.mul(factor, a(lead, k)));
        }
        e.pivots.push_back(c);
        ++lead;
    }
    e.reduced = std::move(a);
    return e;
}

inline std::size_t mat_rank(const PrimeField& f, const FieldMatrix& a) { return rref(f, a).rank(); }

inline FieldMatrix mat_inv(const PrimeField& f, const FieldMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("mat_inv: matrix is not square");
    const std::size_t n = a.rows();
    FieldMatrix aug(n, 2 * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) aug(r, c) = a(r, c);
        aug(r, n + r) = 1;
    }
    auto e = rref(f, std::move(aug), n);
    if (e.rank() != n) throw SingularMatrix("mat_inv: singular " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    FieldMatrix inv(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) inv(r, c) = e.reduced(r, n + c);
    return inv;
}

/// True iff v is a linear combination of the rows of a.
inline bool row_space_contains(const PrimeField& f, const FieldMatrix& a, std::span<const fe_t> v) {
    if (a.rows() == 0) {
        for (auto x : v)
            if (x != 0) return false;
        return true;
    }
    if (v.size() != a.cols()) throw ShapeError("row_space_contains: vector length differs from column count");
    FieldMatrix stacked = a;
    stacked.append_row(v);
    return mat_rank(f, stacked) == mat_rank(f, a);
}

/// Solves a x = b and returns one solution (free variables set to zero).
inline std::vector<fe_t> solve(const PrimeField& f, const FieldMatrix& a, std::span<const fe_t> b) {
    if (b.size() != a.rows()) throw ShapeError("solve: right-hand side length differs from row count");
    FieldMatrix aug(a.rows(), a.cols() + 1);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) aug(r, c) = a(r, c);
        aug(r, a.cols()) = b[r];
    }
    auto e = rref(f, std::move(aug), a.cols());
    for (std::size_t r = e.rank(); r < a.rows(); ++r)
        if (e.reduced(r, a.cols()) != 0) throw NoSolution("solve: inconsistent system");
    std::vector<fe_t> x(a.cols(), 0);
    for (std::size_t r = 0; r < e.rank(); ++r) x[e.pivots[r]] = e.reduced(r, a.cols());
    return x;
}

}  // namespace aoi
