#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "cylmart/cyl_martingale.hpp"
#include "cylmart/errors.hpp"
#include "cylmart/path_engine.hpp"

using namespace cylmart;

namespace {

CylModel frozen_model(int k_steps = 256) {
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 0.5,
         0.0, 1.0;
    return CylModel::simulate(OperatorPath(TimeGrid{1.0, k_steps}, g), {101, 0});
}

// Piecewise-left-endpoint approximation of the integrand f(t) = t against a
// scalar model, on `pieces` equal intervals.
ElementaryProcess ramp_stage(const TimeGrid& g, int pieces) {
    std::vector<double> times;
    std::vector<ElementaryInterval> ivs;
    for (int j = 0; j <= pieces; ++j)
        times.push_back(g.T * static_cast<double>(j) / pieces);
    for (int j = 0; j < pieces; ++j) {
        const double val = g.T * static_cast<double>(j) / pieces;
        ivs.push_back({{ElementaryEvent{
            1.0, {ElementaryTerm{Eigen::VectorXd::Constant(1, val),
                                 Eigen::VectorXd::Ones(1)}}}}});
    }
    return ElementaryProcess::from_times(g, times, std::move(ivs));
}

}  // namespace

TEST_CASE("functional evaluation is linear and reads native increments") {
    const CylModel m = frozen_model();
    const Eigen::Vector2d x(1.0, 0.0), y(-0.5, 2.0);

    const ScalarPath mx = eval_m(m, x);
    for (int k = 0; k < m.grid.K; ++k)
        CHECK(mx.values[k + 1] == mx.values[k] + m.dm(k)(0));

    const ScalarPath my = eval_m(m, y);
    const ScalarPath mix = eval_m(m, 2.0 * x + y);
    for (int k = 0; k <= m.grid.K; ++k)
        CHECK(std::abs(mix.values[k] - (2.0 * mx.values[k] + my.values[k])) <
              1e-12);

    CHECK_THROWS_AS(eval_m(m, Eigen::Vector3d::Zero()), DimensionMismatch);

    const IncrementFamily fam = make_increment_family(m);
    CHECK(fam(y, 17) == y.dot(m.dm(17)));
}

TEST_CASE("realized covariation tracks the deterministic bracket") {
    const CylModel m = frozen_model(20000);
    const Eigen::Vector2d x(1.0, 0.0), y(0.0, 1.0);
    const IdentityCheck chk = covariation_identity_check(m, x, y);

    // <G* e_1, G* e_2> = 0.5, so the bracket at T = 1 is 0.5 exactly.
    CHECK(std::abs(chk.rhs.values.back() - 0.5) < 1e-10);
    // Realized covariation fluctuates at the sqrt(dt) scale.
    CHECK(chk.sup_gap < 0.1);
    CHECK(chk.sup_gap > 0.0);

    // Self-covariation: bracket of M e_1 grows like |G* e_1|^2 t = 1.25 t.
    const IdentityCheck self = covariation_identity_check(m, x, x);
    CHECK(std::abs(self.rhs.values.back() - 1.25) < 1e-10);
    CHECK(self.sup_gap < 0.2);
}

TEST_CASE("stopping freezes evaluations bitwise") {
    const CylModel m = frozen_model(64);
    const CylModel s = m.stopped(40);
    const Eigen::Vector2d x(0.7, -0.2);
    const ScalarPath full = eval_m(m, x);
    const ScalarPath st = eval_m(s, x);
    for (int k = 0; k <= 64; ++k)
        CHECK(st.values[k] == full.values[std::min(k, 40)]);
    for (int k = 40; k < 64; ++k) CHECK(s.dm(k).isZero(0.0));

    const CylModel at0 = m.stopped(0);
    CHECK(eval_m(at0, x).values.back() == 0.0);
    CHECK_THROWS_AS(m.stopped(65), DimensionMismatch);
    CHECK_THROWS_AS(m.stopped(-1), DimensionMismatch);
}

TEST_CASE("constant-integrand integral equals its elementary counterpart") {
    const CylModel m = frozen_model(128);
    const Eigen::Vector2d f(0.3, -1.2);

    const ScalarPath direct =
        integrate_vs_m(m, IntegrandPath(m.grid, f));
    ElementaryInterval iv{{ElementaryEvent{
        1.0, {ElementaryTerm{f, Eigen::VectorXd::Ones(1)}}}}};
    const VectorPath elem = step_integral(
        ElementaryProcess::from_times(m.grid, {0.0, 1.0}, {iv}),
        make_increment_family(m));
    for (int k = 0; k <= m.grid.K; ++k)
        CHECK(direct.values[k] == elem.values[k](0));

    CHECK_THROWS_AS(
        integrate_vs_m(m, IntegrandPath(TimeGrid{2.0, 128}, f)),
        DimensionMismatch);
    CHECK_THROWS_AS(
        integrate_vs_m(m, IntegrandPath(m.grid, Eigen::Vector3d::Zero())),
        DimensionMismatch);
}

TEST_CASE("deterministic qv profile of an integrand") {
    const CylModel m = frozen_model(100);
    const Eigen::Vector2d f(0.0, 1.0);
    // |G^T f|^2 = 1; profile is t itself up to summation rounding.
    const ScalarPath q = integrand_qv_profile(m, IntegrandPath(m.grid, f));
    for (int k = 0; k <= 100; ++k)
        CHECK(std::abs(q.values[k] - m.grid.t(k)) < 1e-12);
}

TEST_CASE("composing an operator into the integrand changes nothing") {
    const CylModel m = frozen_model(64);
    std::vector<Eigen::MatrixXd> psis;
    std::vector<Eigen::VectorXd> phis;
    for (int k = 0; k < 64; ++k) {
        Eigen::MatrixXd p(2, 2);
        p << std::sin(0.1 * k), 0.4, -0.2, std::cos(0.05 * k);
        psis.push_back(p);
        phis.push_back(Eigen::Vector2d(std::cos(0.2 * k), 0.1 * k));
    }
    const IdentityCheck chk =
        compose_martingale(m, OperatorPath(m.grid, std::move(psis)),
                           IntegrandPath(m.grid, std::move(phis)));
    CHECK(chk.sup_gap < 1e-12);

    CHECK_THROWS_AS(
        compose_martingale(m, OperatorPath(m.grid, Eigen::MatrixXd::Zero(3, 3)),
                           IntegrandPath(m.grid, Eigen::Vector2d::Zero())),
        DimensionMismatch);
}

TEST_CASE("adopting an external driving path re-derives increments") {
    const TimeGrid g{2.0, 4};
    VectorPath w(g, 1);
    const double vals[5] = {0.0, 1.0, 0.5, 0.5, -1.0};
    for (int k = 0; k <= 4; ++k) w.values[k] << vals[k];

    const CylModel m = CylModel::from_brownian(
        OperatorPath(g, Eigen::MatrixXd::Constant(1, 1, 2.0)), w);
    const ScalarPath path = eval_m(m, Eigen::VectorXd::Ones(1));
    CHECK(path.values ==
          std::vector<double>{0.0, 2.0, 1.0, 1.0, -2.0});

    CHECK_THROWS_AS(CylModel::from_brownian(
                        OperatorPath(g, Eigen::MatrixXd::Identity(2, 2)), w),
                    DimensionMismatch);
}

TEST_CASE("model recipes survive a json round trip") {
    const CylModel m = frozen_model(32);
    const CylModel back = model_from_json(model_to_json(m));
    CHECK(back.d_h == m.d_h);
    CHECK(back.d_x == m.d_x);
    CHECK(back.grid == m.grid);
    CHECK(back.seed.seed == m.seed.seed);
    CHECK(back.seed.stream == m.seed.stream);

    // Same seed, same operator: the reproduced model is the same model.
    const Eigen::Vector2d x(0.25, 1.0);
    const ScalarPath a = eval_m(m, x), b = eval_m(back, x);
    CHECK(a.values == b.values);

    // Per-cell operator families round trip too.
    std::vector<Eigen::MatrixXd> cells;
    for (int k = 0; k < 8; ++k)
        cells.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0 + k));
    const CylModel pc = CylModel::simulate(
        OperatorPath(TimeGrid{1.0, 8}, std::move(cells)), {5, 5});
    const CylModel pcb = model_from_json(model_to_json(pc));
    for (int k = 0; k < 8; ++k)
        CHECK((pcb.g.cell(k).array() == pc.g.cell(k).array()).all());

    nlohmann::json j = model_to_json(m);
    j["surprise"] = 1;
    CHECK_THROWS_AS(model_from_json(j), ConfigError);

    nlohmann::json bad = model_to_json(m);
    bad["entries"].erase(0);
    CHECK_THROWS_AS(model_from_json(bad), ConfigError);
}

TEST_CASE("elementary stages converge to the grid integral of a ramp") {
    const TimeGrid g{1.0, 64};
    const OperatorPath ident(g, Eigen::MatrixXd::Identity(1, 1));

    std::vector<CylModel> models;
    std::vector<ScalarPath> reference;
    std::vector<Eigen::VectorXd> cells;
    for (int k = 0; k < g.K; ++k)
        cells.push_back(Eigen::VectorXd::Constant(1, g.t(k)));
    const IntegrandPath ramp(g, std::move(cells));
    for (int tr = 0; tr < 200; ++tr) {
        models.push_back(CylModel::simulate(ident, RngSeed{900, 0}.substream(tr)));
        reference.push_back(integrate_vs_m(models.back(), ramp));
    }

    const std::vector<ElementaryProcess> stages = {
        ramp_stage(g, 1), ramp_stage(g, 2), ramp_stage(g, 4), ramp_stage(g, 64)};
    const InttheoryReport rep =
        inttheory_limit_check(models, stages, reference, 1.0 / 3.0, 1);

    REQUIRE(rep.distances.size() == 4);
    CHECK(rep.distances_nonincreasing);
    // The final stage is the grid integrand itself.
    CHECK(rep.distances.back() == 0.0);
    CHECK(rep.distance_ses.back() == 0.0);
    CHECK(rep.distances.front() > rep.distances.back());
    CHECK(rep.qv_gaps.back() < 0.05);

    CHECK_THROWS_AS(
        inttheory_limit_check(models, stages, {reference.front()}, 0.0, 1),
        DimensionMismatch);
}
