#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "stochtube/system_model.hpp"

using namespace stochtube;

namespace {

// Diagonal LTV test model A_t = (-1 - 0.5 sin t) I, no rotation part.
SystemModel diag_ltv() {
    SystemModel m;
    m.name = "diag_ltv";
    m.state_dim = 2;
    m.input_dim = 0;
    m.sigma = 0.0;
    m.input = InputSignal(0);
    m.drift = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double t, Eigen::VectorXd& dx) {
        dx = (-1.0 - 0.5 * std::sin(t)) * x;
    };
    m.jacobian = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double t, Eigen::MatrixXd& j) {
        j = (-1.0 - 0.5 * std::sin(t)) * Eigen::Matrix2d::Identity();
    };
    return m;
}

SystemModel pvtol() {
    return make_builtin(
        "pvtol", {{"m", 0.486}, {"J", 0.00383}, {"l", 0.25}, {"g", 9.81}, {"sigma", 0.1}});
}

}  // namespace

TEST_SUITE_BEGIN("systems");

TEST_CASE("ou drift and jacobian") {
    const SystemModel m = make_builtin("ou", {{"c", -1.0}, {"sigma", 1.0}});
    CHECK(m.state_dim == 1);
    CHECK(m.sigma == 1.0);
    Eigen::VectorXd x(1);
    x << 1.0;
    CHECK(eval_drift(m, x, 0.0)[0] == doctest::Approx(-1.0));
    CHECK(eval_drift(m, x, 17.3)[0] == doctest::Approx(-1.0));
    CHECK(eval_jacobian(m, x, 5.0)(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("pvtol hover equilibrium") {
    const SystemModel m = pvtol();
    CHECK(m.state_dim == 6);
    CHECK(m.input_dim == 2);
    // Default input is the hover thrust (mg/2, mg/2).
    const Eigen::VectorXd dx = eval_drift(m, Eigen::VectorXd::Zero(6), 0.0);
    CHECK(dx.norm() < 1e-12);
}

TEST_CASE("diagonal ltv drift and jacobian") {
    const SystemModel m = diag_ltv();
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    const Eigen::VectorXd dx = eval_drift(m, x, 0.0);
    CHECK(dx[0] == doctest::Approx(-1.0));
    CHECK(dx[1] == doctest::Approx(-2.0));
    const Eigen::MatrixXd j = eval_jacobian(m, x, M_PI_2);
    CHECK(j(0, 0) == doctest::Approx(-1.5));
    CHECK(j(1, 1) == doctest::Approx(-1.5));
    CHECK(j(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("pvtol finite differences match the analytic jacobian") {
    const SystemModel m = pvtol();
    SystemModel fd = m;
    fd.jacobian = nullptr;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(6);
        for (int i = 0; i < 6; ++i) x[i] = u(gen);
        const Eigen::MatrixXd exact = eval_jacobian(m, x, 0.3);
        const Eigen::MatrixXd approx = eval_jacobian(fd, x, 0.3, 1e-5);
        CHECK((exact - approx).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("finite differences converge at second order on the pvtol") {
    const SystemModel m = pvtol();
    SystemModel fd = m;
    fd.jacobian = nullptr;
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double err_h = 0.0, err_h2 = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(6);
        for (int i = 0; i < 6; ++i) x[i] = u(gen);
        const Eigen::MatrixXd exact = eval_jacobian(m, x, 1.1);
        err_h = std::max(err_h, (eval_jacobian(fd, x, 1.1, 1e-3) - exact).cwiseAbs().maxCoeff());
        err_h2 = std::max(err_h2, (eval_jacobian(fd, x, 1.1, 5e-4) - exact).cwiseAbs().maxCoeff());
    }
    const double ratio = err_h / err_h2;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("finite differences are exact for the linear builtins") {
    for (const auto& m :
         {make_builtin("ou", {{"c", -0.7}, {"sigma", 0.5}}),
          make_builtin("ltv_decay", {{"base", -1.0}, {"amp", 0.5}, {"sigma", 0.5}})}) {
        SystemModel fd = m;
        fd.jacobian = nullptr;
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(m.state_dim, 0.8);
        CHECK((eval_jacobian(m, x, 2.0) - eval_jacobian(fd, x, 2.0)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("ltv_decay symmetric part certifies the decay rate") {
    const SystemModel m = make_builtin("ltv_decay", {{"base", -1.0}, {"amp", 0.5}, {"sigma", 0.5}});
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    for (double t : {0.0, 0.3, 1.7, M_PI, 6.1, 9.99}) {
        const Eigen::MatrixXd A = eval_jacobian(m, x, t);
        const Eigen::Matrix2d sym = 0.5 * (A + A.transpose());
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
        const double expected = -1.0 - 0.5 * std::sin(t);
        CHECK(es.eigenvalues()[0] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(es.eigenvalues()[1] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("builtin rejects unknown names and bad parameters") {
    CHECK_THROWS_AS(make_builtin("lorenz", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_builtin("ou", {{"sigma", 1.0}}), std::invalid_argument);  // missing c
    CHECK_THROWS_AS(make_builtin("ou", {{"c", -1.0}, {"sigma", 1.0}, {"extra", 0.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_builtin("ou", {{"c", -1.0}, {"sigma", -1.0}}), std::invalid_argument);
}

TEST_CASE("non-finite drift output reports the offending component") {
    SystemModel m;
    m.state_dim = 2;
    m.input = InputSignal(0);
    m.drift = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double, Eigen::VectorXd& dx) {
        dx[0] = 0.0;
        dx[1] = std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_WITH_AS(eval_drift(m, Eigen::VectorXd::Zero(2), 0.0),
                         doctest::Contains("component 1"), std::runtime_error);
}

TEST_CASE("input signal holds, interpolates and clamps") {
    std::vector<double> times{0.0, 1.0, 2.0};
    std::vector<Eigen::VectorXd> values;
    for (double v : {0.0, 2.0, -2.0}) values.push_back(Eigen::VectorXd::Constant(1, v));

    const InputSignal hold = InputSignal::sampled(times, values, InterpMode::Hold);
    CHECK(hold(0.5)[0] == doctest::Approx(0.0));
    CHECK(hold(1.5)[0] == doctest::Approx(2.0));

    const InputSignal lin = InputSignal::sampled(times, values, InterpMode::Linear);
    CHECK(lin(0.5)[0] == doctest::Approx(1.0));
    CHECK(lin(1.75)[0] == doctest::Approx(-1.0));
    CHECK(lin(-3.0)[0] == doctest::Approx(0.0));   // clamps low
    CHECK(lin(99.0)[0] == doctest::Approx(-2.0));  // clamps high

    CHECK_THROWS_AS(InputSignal::sampled({0.0, 0.0}, {values[0], values[1]}, InterpMode::Hold),
                    std::invalid_argument);
}

TEST_SUITE_END();
