// Acceptance gate: eight end-to-end criteria, one verdict line each.
// Every tolerance and seed is pinned here; exit code 0 iff all eight pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cylmart/counterexample.hpp"
#include "cylmart/cyl_martingale.hpp"
#include "cylmart/experiment.hpp"
#include "cylmart/grid.hpp"
#include "cylmart/operator_calculus.hpp"
#include "cylmart/path_engine.hpp"
#include "cylmart/reconstruction.hpp"
#include "cylmart/rng.hpp"
#include "cylmart/stats.hpp"
#include "cylmart/time_change.hpp"

namespace {

using namespace cylmart;

// Pinned tolerances.
constexpr double kAlgebraTol = 1e-9;    // exact-in-exact-arithmetic identities
constexpr double kClockTol = 1e-6;      // idealized clock value
constexpr double kKsLevel = 0.01;       // per-coordinate normality
constexpr double kQvBand = 0.05;        // relative band on mean realized qv
constexpr double kRmsRatioSlack = 0.2;  // around sqrt(2) for the dt-halving law
constexpr double kEnumRel = 1e-12;      // enumeration vs closed form

struct Criterion {
    std::vector<std::string> failures;
    long long checks = 0;

    void require(bool ok, const std::string& what) {
        ++checks;
        if (ok) return;
        if (failures.size() < 8) failures.push_back(what);
        else if (failures.size() == 8) failures.push_back("...");
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd gaussian_matrix(CounterRng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

// --- criterion 1: functional calculus and band algebra on random spectra ---

void calculus_suite(Criterion& c) {
    CounterRng rng({601, 0});
    for (int i = 0; i < 100; ++i) {
        const int d = 2 + i % 5;
        const Eigen::MatrixXd q =
            Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian_matrix(rng, d, d))
                .householderQ();
        Eigen::VectorXd lam(d);
        for (int j = 0; j < d; ++j)
            lam(j) = rng.next_uniform() < 0.25
                         ? 0.0
                         : std::exp2(-7.0 + 9.0 * rng.next_uniform());
        Eigen::MatrixXd smat = q * lam.asDiagonal() * q.transpose();
        smat = 0.5 * (smat + smat.transpose()).eval();
        const SymmetricPSD s(smat);
        const std::string tag = " (instance " + std::to_string(i) + ")";

        const SpectralDecomposition dec = SpectralDecomposition::compute(s);
        const auto norm_bounded = [&](const std::function<double(double)>& g,
                                      const char* name) {
            double sup = 0.0;
            for (int j = 0; j < d; ++j)
                sup = std::max(sup, std::abs(g(dec.eigenvalues(j))));
            c.require(sym_operator_norm(borel_calc(g, s)) <= sup + kAlgebraTol,
                      std::string("|g(S)| exceeds sup|g| for ") + name + tag);
        };
        norm_bounded([](double t) { return std::sin(t); }, "sin");
        norm_bounded([](double t) { return 1.0 / (1.0 + t * t); }, "resolvent");

        const BandFunctions bf = band_functions(s, 12);
        Eigen::MatrixXd total = bf.psi0;
        for (const Eigen::MatrixXd& cn : bf.c) total += cn;
        c.require(max_abs(total - Eigen::MatrixXd::Identity(d, d)) <= kAlgebraTol,
                  "psi0 + sum c_n != I" + tag);
        for (std::size_t n = 0; n < bf.psi.size(); ++n)
            c.require(max_abs(smat * bf.psi[n] - bf.c[n]) <= kAlgebraTol,
                      "S psi_n != c_n at band " + std::to_string(n + 1) + tag);

        const Eigen::MatrixXd direct = resolvent_oracle(s);
        const Eigen::MatrixXd spectral =
            borel_calc([](double t) { return 1.0 / (1.0 + t * t); }, s);
        c.require(max_abs(direct - spectral) <= kAlgebraTol,
                  "resolvent routes disagree" + tag);
    }
}

// --- criterion 2: projection left inverse vs an svd oracle ---

void left_inverse_suite(Criterion& c) {
    CounterRng rng({602, 0});
    for (int i = 0; i < 100; ++i) {
        const int m = 2 + i % 5;
        const int p = 1 + (i / 5) % m;
        Eigen::MatrixXd f;
        if (i % 3 == 0 && std::min(m, p) > 1) {
            const int r = std::min(m, p) - 1;  // forced rank deficiency
            f = gaussian_matrix(rng, m, r) * gaussian_matrix(rng, r, p);
        } else {
            f = gaussian_matrix(rng, m, p);
        }
        const std::string tag = " (instance " + std::to_string(i) + ")";

        const ProjectionLeftInverse pl =
            gram_schmidt_left_inverse(f, Eigen::MatrixXd::Identity(p, p));
        c.require(max_abs(pl.p * pl.p - pl.p) <= kAlgebraTol,
                  "P^2 != P" + tag);
        c.require(max_abs(pl.p - pl.p.transpose()) <= kAlgebraTol,
                  "P not symmetric" + tag);
        c.require(max_abs(f * pl.l - pl.p) <= kAlgebraTol, "F L != P" + tag);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeThinU);
        const double cutoff = 1e-8 * std::max(1.0, svd.singularValues()(0));
        int rank = 0;
        while (rank < svd.singularValues().size() &&
               svd.singularValues()(rank) > cutoff)
            ++rank;
        const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
        c.require(pl.rank == rank, "rank disagrees with svd" + tag);
        c.require(max_abs(pl.p - u * u.transpose()) <= kAlgebraTol,
                  "projector differs from svd oracle" + tag);
    }
}

// --- criterion 3: realized qv matches the integrated square ---

void isometry_suite(Criterion& c) {
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 0.5, 0.0, 1.0;
    const Eigen::Vector2d xstar(1.0, 1.0);
    const double predicted = (g.transpose() * xstar).squaredNorm();  // 3.25

    std::vector<double> rms;
    for (int half = 0; half < 2; ++half) {
        const TimeGrid grid{1.0, 10000 << half};
        std::vector<double> qv_t;
        qv_t.reserve(1000);
        for (int tr = 0; tr < 1000; ++tr) {
            const CylModel model = CylModel::simulate(
                OperatorPath(grid, g),
                RngSeed{603, static_cast<std::uint64_t>(half)}.substream(
                    static_cast<std::uint64_t>(tr)));
            qv_t.push_back(realized_qv(eval_m(model, xstar)).values.back());
        }
        if (half == 0) {
            const MeanSe ms = mean_se(qv_t);
            c.require(std::abs(ms.mean - predicted) <= 4.0 * ms.se,
                      "mean terminal qv " + fmt(ms.mean) + " vs " +
                          fmt(predicted) + " (se " + fmt(ms.se) + ")");
        }
        double sum2 = 0.0;
        for (double v : qv_t) sum2 += (v - predicted) * (v - predicted);
        rms.push_back(std::sqrt(sum2 / static_cast<double>(qv_t.size())));
    }

    const double ratio = rms[0] / rms[1];
    const double root2 = std::numbers::sqrt2;
    c.require(ratio >= root2 * (1.0 - kRmsRatioSlack) &&
                  ratio <= root2 * (1.0 + kRmsRatioSlack),
              "rms gap ratio " + fmt(ratio) + " not near sqrt(2)");
}

// --- criterion 4: rebuilding the driver from the martingale ---

void reconstruction_suite(Criterion& c) {
    const Eigen::Vector2d generic(1.0, -0.7);

    {  // identity operator: the rebuild is the driver itself
        const TimeGrid grid{1.0, 2000};
        const CylModel model = CylModel::simulate(
            OperatorPath(grid, Eigen::MatrixXd::Identity(2, 2)), {604, 0});
        const ReconstructionResult rec = reconstruct_w(model, 2, {605, 0});
        for (int i = 0; i < 2; ++i) {
            double gap = 0.0;
            for (std::size_t k = 0; k < rec.w_hat.values.size(); ++k)
                gap = std::max(gap, std::abs(rec.w_hat.values[k](i) -
                                             model.w.path.values[k](i)));
            c.require(gap <= kAlgebraTol,
                      "identity rebuild drifts from driver, coord " +
                          std::to_string(i));
        }
        c.require(roundtrip_check(model, rec, generic).sup_gap <= kAlgebraTol,
                  "identity roundtrip gap");
    }

    {  // constant invertible diagonal: pure band algebra
        const TimeGrid grid{1.0, 2000};
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
        g(0, 0) = 2.0;
        g(1, 1) = 0.5;
        const CylModel model =
            CylModel::simulate(OperatorPath(grid, g), {604, 1});
        const ReconstructionResult rec = reconstruct_w(model, 4, {605, 1});
        for (int i = 0; i < 2; ++i) {
            const IdentityCheck chk =
                roundtrip_check(model, rec, Eigen::Vector2d::Unit(i));
            c.require(chk.sup_gap <= kAlgebraTol,
                      "diagonal roundtrip gap on basis functional " +
                          std::to_string(i));
        }
        c.require(roundtrip_check(model, rec, generic).sup_gap <= kAlgebraTol,
                  "diagonal roundtrip gap on generic functional");
    }

    {  // time-varying diagonal with a dead coordinate: statistical laws
        const int d = 3, trials = 1000;
        const TimeGrid grid{1.0, 4000};
        std::vector<Eigen::MatrixXd> cells;
        cells.reserve(static_cast<std::size_t>(grid.K));
        for (int k = 0; k < grid.K; ++k) {
            Eigen::MatrixXd gk = Eigen::MatrixXd::Zero(d, d);
            gk(0, 0) = 1.25 + 0.7 * std::sin(2.0 * std::numbers::pi * grid.t(k));
            gk(1, 1) = 1.2 - 0.6 * std::cos(3.0 * grid.t(k));
            cells.push_back(gk);
        }
        const OperatorPath gpath(grid, std::move(cells));

        std::vector<std::vector<double>> w_t(static_cast<std::size_t>(d));
        std::vector<std::vector<double>> band_sum(static_cast<std::size_t>(d));
        bool kernel_seen = true;
        for (int tr = 0; tr < trials; ++tr) {
            const CylModel model = CylModel::simulate(
                gpath, RngSeed{604, 2}.substream(static_cast<std::uint64_t>(tr)));
            const ReconstructionResult rec = reconstruct_w(
                model, 4, RngSeed{605, 2}.substream(static_cast<std::uint64_t>(tr)));
            kernel_seen = kernel_seen && rec.kernel_active;
            for (int i = 0; i < d; ++i) {
                w_t[static_cast<std::size_t>(i)].push_back(
                    rec.w_hat.values.back()(i));
                double total = 0.0;
                for (const VectorPath& comp : rec.components)
                    total += realized_qv(comp.coordinate(i)).values.back();
                band_sum[static_cast<std::size_t>(i)].push_back(total);
            }
        }
        c.require(kernel_seen, "kernel component never engaged");

        for (int i = 0; i < d; ++i) {
            const KsResult ks = ks_normal_test(w_t[static_cast<std::size_t>(i)]);
            c.require(ks.p_value >= kKsLevel,
                      "coord " + std::to_string(i) + " fails normality (p " +
                          fmt(ks.p_value) + ")");
            const MeanSe ms = mean_se(band_sum[static_cast<std::size_t>(i)]);
            c.require(std::abs(ms.mean - grid.T) <= 4.0 * ms.se,
                      "coord " + std::to_string(i) + " band qv sum " +
                          fmt(ms.mean) + " vs " + fmt(grid.T));
        }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const double rho = correlation(w_t[static_cast<std::size_t>(i)],
                                               w_t[static_cast<std::size_t>(j)]);
                c.require(std::abs(rho) <= 4.0 / std::sqrt(double(trials)),
                          "coords " + std::to_string(i) + "," +
                              std::to_string(j) + " correlate (" + fmt(rho) +
                              ")");
            }
    }
}

// --- criterion 5: qv of integrals and elementary-stage convergence ---

IntegrandPath unit_integrand(const TimeGrid& grid) {
    std::vector<Eigen::VectorXd> cells;
    cells.reserve(static_cast<std::size_t>(grid.K));
    for (int k = 0; k < grid.K; ++k)
        cells.push_back(
            Eigen::Vector2d(std::cos(1.3 * grid.t(k)), std::sin(1.3 * grid.t(k))));
    return IntegrandPath(grid, std::move(cells));
}

void integral_suite(Criterion& c) {
    {  // unit-norm integrand against an identity model: qv target is T
        const TimeGrid grid{1.0, 10000};
        const OperatorPath ident(grid, Eigen::MatrixXd::Identity(2, 2));
        const IntegrandPath f = unit_integrand(grid);
        std::vector<double> qv_t;
        qv_t.reserve(1000);
        for (int tr = 0; tr < 1000; ++tr) {
            const CylModel model = CylModel::simulate(
                ident, RngSeed{606, 0}.substream(static_cast<std::uint64_t>(tr)));
            qv_t.push_back(realized_qv(integrate_vs_m(model, f)).values.back());
        }
        const MeanSe ms = mean_se(qv_t);
        c.require(std::abs(ms.mean - grid.T) + 1.96 * ms.se <= kQvBand * grid.T,
                  "integral qv " + fmt(ms.mean) + " +- " + fmt(ms.se) +
                      " outside 5% of " + fmt(grid.T));
    }

    {  // refining piecewise-frozen stages: the metric must come down
        const TimeGrid grid{1.0, 2048};
        const OperatorPath ident(grid, Eigen::MatrixXd::Identity(2, 2));
        const IntegrandPath f = unit_integrand(grid);

        std::vector<CylModel> models;
        std::vector<ScalarPath> reference;
        for (int tr = 0; tr < 200; ++tr) {
            models.push_back(CylModel::simulate(
                ident, RngSeed{607, 0}.substream(static_cast<std::uint64_t>(tr))));
            reference.push_back(integrate_vs_m(models.back(), f));
        }

        std::vector<ElementaryProcess> stages;
        for (int pieces : {1, 2, 4, 8, 16}) {
            std::vector<double> times;
            std::vector<ElementaryInterval> ivs;
            for (int j = 0; j <= pieces; ++j)
                times.push_back(grid.T * static_cast<double>(j) / pieces);
            for (int j = 0; j < pieces; ++j) {
                const double t = grid.T * static_cast<double>(j) / pieces;
                ivs.push_back({{ElementaryEvent{
                    1.0,
                    {ElementaryTerm{
                        Eigen::Vector2d(std::cos(1.3 * t), std::sin(1.3 * t)),
                        Eigen::VectorXd::Ones(1)}}}}});
            }
            stages.push_back(
                ElementaryProcess::from_times(grid, times, std::move(ivs)));
        }

        const InttheoryReport rep =
            inttheory_limit_check(models, stages, reference, grid.T, 1);
        c.require(rep.distances_nonincreasing, "stage distances increased");
        c.require(rep.distances.back() < rep.distances.front(),
                  "refinement never reduced the metric (" +
                      fmt(rep.distances.front()) + " -> " +
                      fmt(rep.distances.back()) + ")");
    }
}

// --- criterion 6: the clock, its inverse and the density certificate ---

void time_change_suite(Criterion& c) {
    const TimeGrid grid{1.0, 10000};
    const TimeGrid s_grid{0.9, 10000};

    {  // idealized unit-rate qv: closed-form clock value and the sandwich
        ScalarPath qv(grid);
        for (int k = 0; k <= grid.K; ++k) qv.values[static_cast<std::size_t>(k)] = grid.t(k);
        const ScalarPath f = build_f_from_qv({qv}, 1);
        const double want = 1.0 + std::numbers::pi / 8.0;
        c.require(std::abs(f.values.back() - want) <= kClockTol,
                  "F(1) = " + fmt(f.values.back()) + " vs 1 + pi/8");

        const TimeChange tc = invert_f(f, s_grid);
        long long bad = 0;
        for (int i = 0; i <= s_grid.K; ++i) {
            const int j = tc.tau[static_cast<std::size_t>(i)];
            const double s = s_grid.t(i);
            if (!(f.values[static_cast<std::size_t>(j)] > s) ||
                (j > 0 && !(f.values[static_cast<std::size_t>(j) - 1] <= s)))
                ++bad;
        }
        c.require(bad == 0, "idealized clock sandwich fails at " +
                                std::to_string(bad) + " points");
    }

    const OperatorPath unit(grid, Eigen::MatrixXd::Identity(1, 1));
    long long sandwich_bad = 0, cert_bad = 0, qv_bad = 0;
    for (int tr = 0; tr < 1000; ++tr) {
        const CylModel model = CylModel::simulate(
            unit, RngSeed{608, 0}.substream(static_cast<std::uint64_t>(tr)));
        const ScalarPath m = eval_m(model, Eigen::VectorXd::Ones(1));
        const TimeChange tc = make_time_change({m}, 1, s_grid);

        for (int i = 0; i <= s_grid.K; ++i) {
            const int j = tc.tau[static_cast<std::size_t>(i)];
            const double s = s_grid.t(i);
            if (!(tc.f.values[static_cast<std::size_t>(j)] > s) ||
                (j > 0 && !(tc.f.values[static_cast<std::size_t>(j) - 1] <= s)))
                ++sandwich_bad;
        }

        const AcCertificate cert = certify_ac(m, tc, 1);
        if (!cert.pass()) ++cert_bad;

        // Changed-time qv must be the input qv read through tau, give or
        // take the single boundary cell.
        const ScalarPath qv_in = realized_qv(m);
        const double changed =
            realized_qv(apply_time_change(m, tc)).values.back();
        const double through_tau =
            qv_in.values[static_cast<std::size_t>(tc.tau.back())] -
            qv_in.values[static_cast<std::size_t>(tc.tau.front())];
        const double one_cell = cert.slack * cert.ds;
        if (std::abs(changed - through_tau) > one_cell + kAlgebraTol) ++qv_bad;
    }
    c.require(sandwich_bad == 0, "sandwich violations: " +
                                     std::to_string(sandwich_bad));
    c.require(cert_bad == 0,
              "density certificate failed on " + std::to_string(cert_bad) +
                  " of 1000 trials");
    c.require(qv_bad == 0, "changed qv drifts from qv-through-tau on " +
                               std::to_string(qv_bad) + " trials");
}

// --- criterion 7: the ladder functional's quantitative facts ---

void ladder_suite(Criterion& c) {
    for (int n = 1; n <= 40; ++n) {
        const double closed = certificate_closed_form(n);
        const double ca = unboundedness_certificate(sample_ladder(n, {609, 0}));
        const double cb = unboundedness_certificate(sample_ladder(n, {610, 7}));
        c.require(ca == closed && cb == closed,
                  "certificate not seed-free/exact at N " + std::to_string(n));
    }
    c.require(std::abs(certificate_closed_form(4) -
                       (6.0 + 3.0 * std::numbers::sqrt2)) <= kAlgebraTol,
              "N=4 certificate misses 6 + 3 sqrt(2)");

    Eigen::VectorXd h(1 << kLadderEnumCap);
    for (int i = 0; i < h.size(); ++i) h(i) = std::sin(0.7 * i + 0.3);
    for (int n = 1; n <= kLadderEnumCap; ++n) {
        const double closed = majorant_closed_form(n, h);
        const double enumerated = enumerate_expectation(
            n, [&](const std::vector<std::int64_t>& xi) {
                double v = 0.0;
                for (int b = 1; b <= n; ++b)
                    v += ladder_c(b) * std::abs(h(xi[static_cast<std::size_t>(b) - 1] - 1));
                return v;
            });
        c.require(std::abs(enumerated - closed) <= kEnumRel * std::max(1.0, closed),
                  "enumeration vs closed majorant at N " + std::to_string(n));
    }

    double se = 0.0;
    const double mc = majorant_mc(kLadderEnumCap, h, 40000, {611, 0}, &se);
    c.require(std::abs(mc - majorant_closed_form(kLadderEnumCap, h)) <= 4.0 * se,
              "mc majorant " + fmt(mc) + " off closed form by > 4 se");

    double prev = -1.0;
    for (int n = 1; n <= 8; ++n) {
        const RankOneFit fit = rank_one_falsification(
            sample_ladder(n, {612, 0}), std::int64_t{1} << n);
        if (n == 1)
            c.require(fit.residual >= 0.0, "N=1 residual negative");
        else
            c.require(fit.residual > 0.0 && fit.residual > prev,
                      "residual not positive/increasing at N " +
                          std::to_string(n));
        prev = fit.residual;
    }
}

// --- criterion 8: campaigns are pure functions of (config, seed) ---

nlohmann::json scrubbed(const RunReport& rep) {
    nlohmann::json j = rep.to_json();
    j.erase("wall_clock_ms");
    return j;
}

void determinism_suite(Criterion& c) {
    std::vector<nlohmann::json> configs;
    configs.push_back({{"schema_version", 1}, {"kind", "calculus-selftest"}});
    configs.push_back({{"schema_version", 1},
                       {"kind", "simulate"},
                       {"k_steps", 500},
                       {"trials", 60}});
    configs.push_back({{"schema_version", 1},
                       {"kind", "reconstruct"},
                       {"d_h", 3},
                       {"d_x", 3},
                       {"k_steps", 400},
                       {"trials", 80}});
    configs.push_back({{"schema_version", 1},
                       {"kind", "timechange"},
                       {"k_steps", 400},
                       {"trials", 40}});
    configs.push_back({{"schema_version", 1},
                       {"kind", "counterexample"},
                       {"horizon", 3.0},
                       {"k_steps", 300},
                       {"trials", 60},
                       {"n_series", 5}});

    for (const nlohmann::json& j : configs) {
        const ExperimentConfig cfg = ExperimentConfig::from_json(j);
        const nlohmann::json a = scrubbed(run(cfg));
        const nlohmann::json b = scrubbed(run(cfg));
        c.require(a == b && a.dump() == b.dump(),
                  "rerun of '" + cfg.kind + "' changed the report");
    }
}

}  // namespace

int main() {
    struct Entry {
        const char* label;
        double budget_s;
        std::function<void(Criterion&)> fn;
    };
    const std::vector<Entry> entries = {
        {"functional calculus: norm bound, band algebra, resolvent", 5.0,
         calculus_suite},
        {"projection left inverse vs svd oracle", 5.0, left_inverse_suite},
        {"realized qv matches the integrated square", 60.0, isometry_suite},
        {"driver reconstruction: exact roundtrips, normality, completeness",
         120.0, reconstruction_suite},
        {"integral qv within 5% and elementary stages converge", 60.0,
         integral_suite},
        {"time change: clock value, sandwich, density certificate", 60.0,
         time_change_suite},
        {"ladder functional: certificates, enumeration, rank-one residual",
         60.0, ladder_suite},
        {"campaign reports are deterministic modulo wall clock", 0.0,
         determinism_suite},
    };

    int passed = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Criterion c;
        const auto start = std::chrono::steady_clock::now();
        entries[i].fn(c);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        const bool in_budget =
            entries[i].budget_s == 0.0 || elapsed < entries[i].budget_s;
        const bool ok = c.failures.empty() && in_budget;
        passed += ok ? 1 : 0;
        std::printf("criterion %zu/8: %-62s %s  (%lld checks, %.2fs)\n", i + 1,
                    entries[i].label, ok ? "PASS" : "FAIL", c.checks, elapsed);
        if (!in_budget)
            std::printf("    over budget: %.2fs >= %.0fs\n", elapsed,
                        entries[i].budget_s);
        for (const std::string& f : c.failures)
            std::printf("    %s\n", f.c_str());
    }

    std::printf("acceptance: %d/8 criteria passed\n", passed);
    return passed == 8 ? 0 : 1;
}
