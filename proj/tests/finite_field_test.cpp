#include <gtest/gtest.h>

#include <random>

#include "aoi/finite_field.hpp"

using namespace aoi;

namespace {

FieldMatrix random_matrix(std::mt19937_64& rng, const PrimeField& f, std::size_t r, std::size_t c) {
    std::uniform_int_distribution<fe_t> d(0, f.order() - 1);
    FieldMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = d(rng);
    return m;
}

// Inverse by exhaustive scan.
fe_t scan_inverse(std::uint32_t q, fe_t a) {
    for (fe_t x = 1; x < q; ++x)
        if (static_cast<std::uint64_t>(a) * x % q == 1) return x;
    return 0;
}

}  // namespace

TEST(PrimeField, RejectsComposite) {
    EXPECT_THROW(PrimeField(1), InvalidParams);
    EXPECT_THROW(PrimeField(4), InvalidParams);
    EXPECT_THROW(PrimeField(65535), InvalidParams);
    EXPECT_NO_THROW(PrimeField(65521));
}

TEST(PrimeField, InverseExamples) {
    PrimeField f7(7), f5(5);
    EXPECT_EQ(f7.inv(1), 1u);
    EXPECT_EQ(f7.inv(3), 5u);
    EXPECT_EQ(f5.inv(4), 4u);
    EXPECT_THROW(f7.inv(0), DivisionByZero);
}

TEST(PrimeField, InverseMatchesScan) {
    for (std::uint32_t q : {2u, 5u, 7u, 257u}) {
        PrimeField f(q);
        for (fe_t a = 1; a < q; ++a) EXPECT_EQ(f.inv(a), scan_inverse(q, a)) << "q=" << q << " a=" << a;
    }
    PrimeField f(65521);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<fe_t> d(1, 65520);
    for (int n = 0; n < 2000; ++n) {
        const fe_t a = d(rng);
        EXPECT_EQ(static_cast<std::uint64_t>(a) * f.inv(a) % 65521, 1u);
    }
}

TEST(PrimeField, AxiomsSmallFields) {
    for (std::uint32_t q : {2u, 5u, 7u}) {
        PrimeField f(q);
        for (fe_t a = 0; a < q; ++a) {
            EXPECT_EQ(f.add(a, f.neg(a)), 0u);
            EXPECT_EQ(f.sub(a, a), 0u);
            for (fe_t b = 0; b < q; ++b) {
                EXPECT_EQ(f.add(a, b), (a + b) % q);
                EXPECT_EQ(f.mul(a, b), f.mul(b, a));
                for (fe_t c = 0; c < q; ++c) {
                    EXPECT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    EXPECT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    EXPECT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }
}

TEST(PrimeField, ReduceNegative) {
    PrimeField f(7);
    EXPECT_EQ(f.reduce(-1), 6u);
    EXPECT_EQ(f.reduce(-14), 0u);
    EXPECT_EQ(f.reduce(15), 1u);
}

TEST(FieldMatrix, InverseExamples) {
    PrimeField f7(7), f5(5);
    EXPECT_EQ(mat_inv(f7, FieldMatrix::identity(3)), FieldMatrix::identity(3));
    const auto a = FieldMatrix::from_rows(f5, {{1, 1}, {0, 1}});
    EXPECT_EQ(mat_inv(f5, a), FieldMatrix::from_rows(f5, {{1, 4}, {0, 1}}));
    EXPECT_THROW(mat_inv(f5, FieldMatrix::from_rows(f5, {{1, 2}, {2, 4}})), SingularMatrix);
    EXPECT_THROW(mat_inv(f5, FieldMatrix(2, 3)), ShapeError);
}

TEST(FieldMatrix, RandomInverseProperty) {
    std::mt19937_64 rng(11);
    for (std::uint32_t q : {5u, 257u, 65521u}) {
        PrimeField f(q);
        int checked = 0;
        for (int n = 0; n < 1000; ++n) {
            const std::size_t sz = 1 + n % 5;
            const auto a = random_matrix(rng, f, sz, sz);
            FieldMatrix inv;
            try {
                inv = mat_inv(f, a);
            } catch (const SingularMatrix&) {
                EXPECT_LT(mat_rank(f, a), sz);
                continue;
            }
            ++checked;
            EXPECT_EQ(mat_mul(f, a, inv), FieldMatrix::identity(sz));
            EXPECT_EQ(mat_mul(f, inv, a), FieldMatrix::identity(sz));
        }
        EXPECT_GT(checked, 500);
    }
}

TEST(FieldMatrix, RankExamples) {
    PrimeField f5(5);
    EXPECT_EQ(mat_rank(f5, FieldMatrix(2, 3)), 0u);
    EXPECT_EQ(mat_rank(f5, FieldMatrix::identity(4)), 4u);
    // [2,4,1] = 2 * [1,2,3] mod 5, so these rows are dependent
    EXPECT_EQ(mat_rank(f5, FieldMatrix::from_rows(f5, {{1, 2, 3}, {2, 4, 1}})), 1u);
    EXPECT_EQ(mat_rank(f5, FieldMatrix::from_rows(f5, {{1, 2, 3}, {2, 4, 2}})), 2u);
}

TEST(FieldMatrix, RankOfTransposeAgrees) {
    std::mt19937_64 rng(5);
    PrimeField f(5);
    for (int n = 0; n < 500; ++n) {
        const auto a = random_matrix(rng, f, 1 + n % 4, 1 + (n / 4) % 5);
        EXPECT_EQ(mat_rank(f, a), mat_rank(f, transpose(a)));
    }
}

TEST(FieldMatrix, RowSpaceExamples) {
    PrimeField f5(5);
    const std::vector<fe_t> e2{0, 1, 0}, e1{1, 0, 0}, zero{0, 0, 0};
    EXPECT_TRUE(row_space_contains(f5, FieldMatrix::identity(3), e2));
    EXPECT_FALSE(row_space_contains(f5, FieldMatrix::from_rows(f5, {{1, 1, 0}}), e1));
    EXPECT_TRUE(row_space_contains(f5, FieldMatrix(0, 3), zero));
    EXPECT_THROW(row_space_contains(f5, FieldMatrix::identity(2), e1), ShapeError);
}

// Brute force over every coefficient vector c with c * A = v.
TEST(FieldMatrix, RowSpaceMatchesEnumeration) {
    std::mt19937_64 rng(9);
    PrimeField f(3);
    for (int n = 0; n < 300; ++n) {
        const std::size_t r = 1 + n % 3, c = 3;
        const auto a = random_matrix(rng, f, r, c);
        const auto vm = random_matrix(rng, f, 1, c);
        std::vector<fe_t> v(vm.row(0).begin(), vm.row(0).end());
        bool found = false;
        std::size_t combos = 1;
        for (std::size_t i = 0; i < r; ++i) combos *= 3;
        for (std::size_t code = 0; code < combos && !found; ++code) {
            std::vector<fe_t> coef(r);
            auto x = code;
            for (std::size_t i = 0; i < r; ++i, x /= 3) coef[i] = static_cast<fe_t>(x % 3);
            std::vector<fe_t> acc(c, 0);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) acc[j] = f.add(acc[j], f.mul(coef[i], a(i, j)));
            found = acc == v;
        }
        EXPECT_EQ(row_space_contains(f, a, v), found);
        // the same question asked through solve on the transposed system
        bool solvable = true;
        try {
            solve(f, transpose(a), v);
        } catch (const NoSolution&) {
            solvable = false;
        }
        EXPECT_EQ(solvable, found);
    }
}

TEST(FieldMatrix, MulAndSolve) {
    std::mt19937_64 rng(21);
    PrimeField f(65521);
    const auto a = random_matrix(rng, f, 4, 4);
    EXPECT_EQ(mat_mul(f, a, FieldMatrix::identity(4)), a);
    const std::vector<fe_t> b{1, 2, 3, 4};
    EXPECT_EQ(solve(f, FieldMatrix::identity(4), b), b);
    EXPECT_THROW(mat_mul(f, a, FieldMatrix(3, 2)), ShapeError);
    for (int n = 0; n < 200; ++n) {
        const auto m = random_matrix(rng, f, 5, 5);
        if (mat_rank(f, m) < 5) continue;
        const auto xm = random_matrix(rng, f, 1, 5);
        std::vector<fe_t> x(xm.row(0).begin(), xm.row(0).end());
        EXPECT_EQ(solve(f, m, mat_vec(f, m, x)), x);
    }
    PrimeField f5(5);
    const std::vector<fe_t> inconsistent{1, 2};
    EXPECT_THROW(solve(f5, FieldMatrix::from_rows(f5, {{1, 1}, {1, 1}}), inconsistent), NoSolution);
}

TEST(FieldMatrix, RrefPivotsAreFirstNonzero) {
    PrimeField f(7);
    const auto a = FieldMatrix::from_rows(f, {{0, 2, 4}, {0, 1, 2}, {3, 0, 1}});
    const auto e = rref(f, a);
    ASSERT_EQ(e.rank(), 2u);
    EXPECT_EQ(e.pivots[0], 0u);
    EXPECT_EQ(e.pivots[1], 1u);
    EXPECT_EQ(a(0, 1), 2u);  // input untouched
}
