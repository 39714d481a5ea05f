#include <doctest.h>

#include <cmath>

#include "cinc/autodiff.hpp"
#include "cinc/rng.hpp"
#include "support/finite_diff.hpp"

using namespace cinc;
using ad::Matrix;
using ad::Tape;
using ad::Value;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                     const char* tag = "m") {
    KeyedRng rng(seed, tag);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.next_gaussian();
    return m;
}

} // namespace

TEST_SUITE("autodiff") {

TEST_CASE("matmul forward: identity and annihilator") {
    Tape t;
    Matrix m = random_matrix(2, 2, 7);
    Value a = t.leaf(Matrix::Identity(2, 2));
    Value b = t.leaf(m);
    CHECK(t.matmul(a, b).data().isApprox(m));

    Value z = t.leaf(Matrix::Zero(1, 3));
    Value c = t.leaf(random_matrix(3, 2, 8));
    Value out = t.matmul(z, c);
    CHECK(out.rows() == 1);
    CHECK(out.cols() == 2);
    CHECK(out.data().isZero(0.0));
}

TEST_CASE("matmul shape error names both shapes") {
    Tape t;
    Value a = t.leaf(Matrix::Zero(2, 3));
    Value b = t.leaf(Matrix::Zero(4, 5));
    CHECK_THROWS_WITH_AS(t.matmul(a, b), doctest::Contains("[2x3]"), shape_error);
    try {
        t.matmul(a, b);
    } catch (const shape_error& e) {
        CHECK(std::string(e.what()).find("[4x5]") != std::string::npos);
    }
}

TEST_CASE("matmul gradients match central finite differences") {
    Matrix ma = random_matrix(3, 3, 21, "a");
    Matrix mb = random_matrix(3, 3, 22, "b");

    auto eval = [&]() {
        Tape t;
        return t.mean_square(t.matmul(t.leaf(ma), t.leaf(mb)), 0.5).scalar();
    };

    Tape t;
    Value a = t.leaf(ma), b = t.leaf(mb);
    t.backward(t.mean_square(t.matmul(a, b), 0.5));

    for (Matrix* m : {&ma, &mb}) {
        const Matrix grad = (m == &ma) ? a.grad() : b.grad();
        for (Eigen::Index r = 0; r < 3; ++r)
            for (Eigen::Index c = 0; c < 3; ++c) {
                const double numeric = testing::central_diff(eval, (*m)(r, c));
                CHECK(testing::grad_rel_err(grad(r, c), numeric) <= 1e-6);
            }
    }
}

TEST_CASE("relu forward") {
    Tape t;
    Matrix in(1, 3);
    in << -1.0, 0.0, 2.0;
    Matrix expect(1, 3);
    expect << 0.0, 0.0, 2.0;
    CHECK(t.relu(t.leaf(in)).data() == expect);

    Matrix pos = random_matrix(2, 4, 3).array().abs() + 0.1;
    CHECK(t.relu(t.leaf(pos)).data() == pos);
}

TEST_CASE("relu gradient at nonzero points") {
    Matrix in = random_matrix(2, 3, 5);
    in = in.unaryExpr([](double v) { return v >= 0 ? v + 0.5 : v - 0.5; }); // stay off the kink

    auto eval = [&]() {
        Tape t;
        return t.mean_square(t.relu(t.leaf(in)), 0.25).scalar();
    };
    Tape t;
    Value a = t.leaf(in);
    t.backward(t.mean_square(t.relu(a), 0.25));
    for (Eigen::Index r = 0; r < in.rows(); ++r)
        for (Eigen::Index c = 0; c < in.cols(); ++c) {
            const double numeric = testing::central_diff(eval, in(r, c));
            CHECK(testing::grad_rel_err(a.grad()(r, c), numeric) <= 1e-6);
        }
}

TEST_CASE("sigmoid forward: midpoint and saturation") {
    Tape t;
    Matrix zero = Matrix::Zero(1, 1);
    CHECK(t.sigmoid(t.leaf(zero)).scalar() == 0.5);

    Matrix big(1, 2);
    big << 800.0, -800.0;
    Value s = t.sigmoid(t.leaf(big));
    CHECK(std::isfinite(s.data()(0, 0)));
    CHECK(s.data()(0, 0) > 1.0 - 1e-12);
    CHECK(s.data()(0, 1) < 1e-12);
    CHECK(s.data()(0, 1) > 0.0);
}

TEST_CASE("sigmoid gradient matches finite differences") {
    Matrix in = random_matrix(2, 3, 11);
    auto eval = [&]() {
        Tape t;
        return t.mean_square(t.sigmoid(t.leaf(in)), 0.0).scalar();
    };
    Tape t;
    Value a = t.leaf(in);
    t.backward(t.mean_square(t.sigmoid(a), 0.0));
    for (Eigen::Index r = 0; r < in.rows(); ++r)
        for (Eigen::Index c = 0; c < in.cols(); ++c) {
            const double numeric = testing::central_diff(eval, in(r, c));
            CHECK(testing::grad_rel_err(a.grad()(r, c), numeric) <= 1e-6);
        }
}

TEST_CASE("mean_square values") {
    Tape t;
    Matrix m = Matrix::Constant(3, 2, 0.7);
    CHECK(t.mean_square(t.leaf(m), 0.7).scalar() == 0.0);

    Matrix ab(1, 2);
    ab << 0.0, 1.0;
    CHECK(t.mean_square(t.leaf(ab), 1.0).scalar() == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(t.mean_square(t.leaf(Matrix(0, 40)), 0.0), numeric_error);
}

TEST_CASE("mean_square gradient is 2(a-t)/N") {
    Matrix in = random_matrix(4, 3, 13);
    Tape t;
    Value a = t.leaf(in);
    t.backward(t.mean_square(a, 0.3));
    const Matrix expect = 2.0 / 12.0 * (in.array() - 0.3).matrix();
    CHECK(a.grad().isApprox(expect, 1e-12));

    auto eval = [&]() {
        Tape tt;
        return tt.mean_square(tt.leaf(in), 0.3).scalar();
    };
    const double numeric = testing::central_diff(eval, in(2, 1));
    CHECK(testing::grad_rel_err(expect(2, 1), numeric) <= 1e-6);
}

TEST_CASE("mean_abs_diff values and errors") {
    Tape t;
    Matrix m = random_matrix(2, 3, 17);
    CHECK(t.mean_abs_diff(t.leaf(m), t.leaf(m)).scalar() == 0.0);

    Matrix shifted = m.array() + 1.0;
    CHECK(t.mean_abs_diff(t.leaf(shifted), t.leaf(m)).scalar() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(t.mean_abs_diff(t.leaf(Matrix::Zero(2, 3)), t.leaf(Matrix::Zero(3, 2))),
                    shape_error);
}

TEST_CASE("mean_abs_diff gradient away from ties") {
    Matrix a = random_matrix(2, 3, 19, "a");
    Matrix b = random_matrix(2, 3, 19, "b");
    auto eval = [&]() {
        Tape t;
        return t.mean_abs_diff(t.leaf(a), t.leaf(b)).scalar();
    };
    Tape t;
    Value va = t.leaf(a), vb = t.leaf(b);
    t.backward(t.mean_abs_diff(va, vb));
    for (Eigen::Index r = 0; r < 2; ++r)
        for (Eigen::Index c = 0; c < 3; ++c) {
            CHECK(testing::grad_rel_err(va.grad()(r, c), testing::central_diff(eval, a(r, c))) <=
                  1e-6);
            CHECK(testing::grad_rel_err(vb.grad()(r, c), testing::central_diff(eval, b(r, c))) <=
                  1e-6);
        }
    // subgradient at a tie is 0
    Tape t2;
    Value ta = t2.leaf(Matrix::Constant(1, 1, 0.4));
    Value tb = t2.leaf(Matrix::Constant(1, 1, 0.4));
    t2.backward(t2.mean_abs_diff(ta, tb));
    CHECK(ta.grad()(0, 0) == 0.0);
}

TEST_CASE("backward seeds and isolates") {
    Tape t;
    Value p = t.leaf(random_matrix(2, 2, 23));
    Value q = t.leaf(random_matrix(2, 2, 29));
    t.backward(t.sum(p));
    CHECK(p.grad() == Matrix::Constant(2, 2, 1.0));
    CHECK(q.grad().isZero(0.0)); // loss independent of q
}

TEST_CASE("backward rejects non-scalar loss and consumed tape") {
    Tape t;
    Value v = t.leaf(random_matrix(2, 2, 31));
    CHECK_THROWS_AS(t.backward(v), shape_error);

    Value s = t.sum(v);
    t.backward(s);
    CHECK_THROWS_AS(t.backward(s), std::logic_error);
    t.reset();
    CHECK(t.size() == 0);
    CHECK_FALSE(t.consumed());
}

TEST_CASE("backward is linear in the loss") {
    Matrix in = random_matrix(3, 3, 37);
    const double alpha = 1.7, beta = -0.4;

    auto grads_for = [&](bool combined) {
        Tape t;
        Value a = t.leaf(in);
        Value l1 = t.mean_square(a, 0.2);
        Value l2 = t.mean_abs_diff(a, t.leaf(Matrix::Zero(3, 3)));
        if (combined) {
            t.backward(t.add(t.scale(l1, alpha), t.scale(l2, beta)));
            return Matrix(a.grad());
        }
        t.backward(l1);
        Matrix g1 = a.grad();
        Tape t2;
        Value a2 = t2.leaf(in);
        t2.backward(t2.mean_abs_diff(a2, t2.leaf(Matrix::Zero(3, 3))));
        return Matrix(alpha * g1 + beta * a2.grad());
    };

    const Matrix combined = grads_for(true);
    const Matrix separate = grads_for(false);
    CHECK((combined - separate).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("independent tapes produce bit-identical gradients") {
    Matrix in = random_matrix(4, 5, 41);
    auto run = [&]() {
        Tape t;
        Value a = t.leaf(in);
        Value loss = t.add(t.mean_square(t.relu(a), 0.1),
                           t.scale(t.mean_abs_diff(t.sigmoid(a), t.leaf(Matrix::Zero(4, 5))), 2.0));
        t.backward(loss);
        return Matrix(a.grad());
    };
    const Matrix g1 = run();
    const Matrix g2 = run();
    CHECK(g1 == g2);
}

TEST_CASE("empty batch flows through shape-preserving ops") {
    Tape t;
    Value empty = t.leaf(Matrix(0, 40));
    Value w = t.leaf(random_matrix(40, 8, 43));
    Value out = t.relu(t.matmul(empty, w));
    CHECK(out.rows() == 0);
    CHECK(out.cols() == 8);
}

} // TEST_SUITE
