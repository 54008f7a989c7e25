#include <catch2/catch_amalgamated.hpp>

#include "risnoma/linalg.hpp"
#include "risnoma/rng.hpp"

using namespace risnoma;

namespace {

CMat random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    CMat m(rows, cols);
    for (auto& v : m.data()) v = sample_cn(rng, 1.0);
    return m;
}

}  // namespace

TEST_CASE("matmul identity and annihilator") {
    Rng rng(1);
    const CMat a = random_matrix(rng, 2, 3);
    const CMat i2 = CMat::identity(2);
    CHECK(max_abs_diff(matmul(i2, a), a) == 0.0);

    const CMat zero(3, 4);
    const CMat prod = matmul(a, zero);
    for (const auto& v : prod.data()) CHECK(v == Cx{});
}

TEST_CASE("matmul 1x1 complex product") {
    CMat a(1, 1, {Cx{1.0, 1.0}});
    CMat b(1, 1, {Cx{1.0, -1.0}});
    const CMat c = matmul(a, b);
    CHECK(c(0, 0).real() == Catch::Approx(2.0));
    CHECK(c(0, 0).imag() == Catch::Approx(0.0));
}

TEST_CASE("matmul rejects mismatched shapes") {
    CMat a(2, 3), b(4, 2);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul is associative on conformable triples") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const CMat a = random_matrix(rng, 3, 4);
        const CMat b = random_matrix(rng, 4, 5);
        const CMat c = random_matrix(rng, 5, 2);
        const CMat left = matmul(matmul(a, b), c);
        const CMat right = matmul(a, matmul(b, c));
        const double scale = std::max(1.0, inf_norm(left));
        CHECK(max_abs_diff(left, right) / scale < 1e-9);
    }
}

TEST_CASE("conj_transpose basics") {
    CMat sym(2, 2, {Cx{1, 0}, Cx{2, 0}, Cx{2, 0}, Cx{5, 0}});
    CHECK(max_abs_diff(conj_transpose(sym), sym) == 0.0);

    CMat i1(1, 1, {Cx{0, 1}});
    CHECK(conj_transpose(i1)(0, 0) == Cx{0, -1});

    Rng rng(3);
    const CMat a = random_matrix(rng, 3, 5);
    CHECK(max_abs_diff(conj_transpose(conj_transpose(a)), a) == 0.0);
}

TEST_CASE("invert identity and diagonal") {
    const CMat i4 = CMat::identity(4);
    CHECK(max_abs_diff(invert(i4), i4) == 0.0);

    CMat d(1, 1, {Cx{2, 0}});
    CHECK(invert(d)(0, 0) == Cx{0.5, 0});
}

TEST_CASE("invert verified by multiplication") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const CMat a = random_matrix(rng, 4, 4);
        const CMat ainv = invert(a);
        CHECK(max_abs_diff(matmul(a, ainv), CMat::identity(4)) < 1e-10);
    }
}

TEST_CASE("invert of invert returns the original") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const CMat a = random_matrix(rng, 4, 4);
        const CMat back = invert(invert(a));
        const double scale = std::max(1.0, inf_norm(a));
        CHECK(max_abs_diff(back, a) / scale < 1e-8);
    }
}

TEST_CASE("invert rejects singular and ill-conditioned input") {
    CMat sing(2, 2, {Cx{1, 0}, Cx{2, 0}, Cx{2, 0}, Cx{4, 0}});
    CHECK_THROWS_AS(invert(sing), SingularMatrixError);

    // nearly dependent rows: condition ~ 1e14
    CMat ill(2, 2, {Cx{1, 0}, Cx{1, 0}, Cx{1, 0}, Cx{1 + 1e-14, 0}});
    try {
        invert(ill);
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.condition > 1e12);
    }

    CHECK_THROWS_AS(invert(CMat(2, 3)), ShapeError);
}

TEST_CASE("sample_cn zero variance and domain error") {
    Rng rng(6);
    CHECK(sample_cn(rng, 0.0) == Cx{});
    CHECK_THROWS_AS(sample_cn(rng, -1.0), std::invalid_argument);
}

TEST_CASE("sample_cn moments over 1e5 draws") {
    Rng rng(7);
    const std::size_t n = 100000;
    double mean_re = 0.0, mean_im = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Cx z = sample_cn(rng, 1.0);
        mean_re += z.real();
        mean_im += z.imag();
        var += std::norm(z);
    }
    mean_re /= n;
    mean_im /= n;
    var /= n;
    CHECK(std::abs(mean_re) < 0.02);
    CHECK(std::abs(mean_im) < 0.02);
    CHECK(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("identical seed reproduces the stream") {
    Rng a(42), b(42);
    CHECK(sample_cn(a, 1.0) == sample_cn(b, 1.0));
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(43);
    CHECK(c.next_u64() != Rng(42).next_u64());
}

TEST_CASE("uniform_int stays in range and covers values") {
    Rng rng(8);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) ++counts[rng.uniform_int(7)];
    for (int c : counts) CHECK(c > 0);
}
