#include <doctest.h>

#include "eitlog/errors.hpp"
#include "eitlog/sobolev.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>

using namespace eitlog;

namespace {

SobolevOperator make_op(Eigen::MatrixXd m, double r_in = 0, double r_out = 0) {
    SobolevOperator T;
    T.frequencies.resize(m.rows());
    for (int i = 0; i < m.rows(); ++i) T.frequencies[i] = i / 2 + 1;
    T.matrix = std::move(m);
    T.r_in = r_in;
    T.r_out = r_out;
    return T;
}

Eigen::MatrixXd random_matrix(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = static_cast<double>(gen() >> 11) * 0x1p-52 - 1.0;
    return m;
}

} // namespace

TEST_CASE("operator norm: identity with unweighted signature") {
    const auto T = make_op(Eigen::MatrixXd::Identity(4, 4));
    CHECK(sobolev_operator_norm(T, 0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("operator norm: identity between weighted spaces") {
    // D_{-eps} I D_{eps}^{-1} = diag((1+n^2)^{-eps}); the max sits at n = 1,
    // giving 2^{-eps}.
    const auto T = make_op(Eigen::MatrixXd::Identity(2, 2));
    const double eps = 0.5;
    CHECK(sobolev_operator_norm(T, eps, -eps) ==
          doctest::Approx(std::pow(2.0, -eps)).epsilon(1e-12));
    const auto T8 = make_op(Eigen::MatrixXd::Identity(8, 8));
    CHECK(sobolev_operator_norm(T8, 0.25, -0.25) ==
          doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));
}

TEST_CASE("operator norm: spectral norm of a diagonal") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    CHECK(sobolev_operator_norm(make_op(d), 0.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("operator norm: submultiplicative through composable signatures") {
    const int n = 6;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto S = make_op(random_matrix(n, seed));
        const auto T = make_op(random_matrix(n, seed + 1000));
        SobolevOperator ST = S;
        ST.matrix = S.matrix * T.matrix;
        const double r1 = -0.5, r2 = 0.25, r3 = 0.5;
        const double lhs = sobolev_operator_norm(ST, r1, r3);
        const double rhs = sobolev_operator_norm(S, r2, r3) *
                           sobolev_operator_norm(T, r1, r2);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("fourier weights invert pairwise") {
    for (int n : {1, 3, 17})
        CHECK(fourier_weight(n, -0.3) * fourier_weight(n, 0.3) ==
              doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sobolev operator CSV round trip") {
    auto T = make_op(random_matrix(4, 7), 0.25, -0.25);
    T.symmetric = false;
    const auto path =
        std::filesystem::temp_directory_path() / "eitlog_sobolev_op.csv";
    save_sobolev_operator(T, path);
    const SobolevOperator back = load_sobolev_operator(path);
    CHECK(back.r_in.r == doctest::Approx(0.25));
    CHECK(back.r_out.r == doctest::Approx(-0.25));
    CHECK(back.symmetric == false);
    CHECK((back.matrix - T.matrix).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(back.frequencies == T.frequencies);
    std::filesystem::remove(path);
}

TEST_CASE("operator norm: index range enforced") {
    const auto T = make_op(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(sobolev_operator_norm(T, 1.5, 0.0), eitlog::Error);
}
