#include "cylmart/counterexample.hpp"

#include <cmath>
#include <cstddef>

#include <json.hpp>

#include "cylmart/errors.hpp"
#include "cylmart/stats.hpp"

namespace cylmart {

LadderSample sample_ladder(int n_blocks, RngSeed seed) {
    if (n_blocks < 1) throw ConfigError("sample_ladder: N must be >= 1");
    LadderSample s;
    s.n_blocks = n_blocks;
    s.seed = seed;
    s.xi.resize(static_cast<std::size_t>(n_blocks));
    for (int n = 1; n <= n_blocks; ++n) {
        // Block n = [2^{n-1}, 2^n); size is a power of two, so masking the
        // raw draw is exactly uniform.
        const std::int64_t lo = std::int64_t{1} << (n - 1);
        CounterRng rng(seed.substream(static_cast<std::uint64_t>(n)));
        const std::uint64_t r = rng.next_u64();
        s.xi[static_cast<std::size_t>(n) - 1] =
            lo + static_cast<std::int64_t>(
                     r & static_cast<std::uint64_t>(lo - 1));
    }
    return s;
}

double ladder_c(int n) { return std::exp2(0.25 * n); }

double ell(const LadderSample& sample, const Eigen::VectorXd& h) {
    double acc = 0.0;
    for (int n = 1; n <= sample.n_blocks; ++n) {
        const std::int64_t i = sample.xi[static_cast<std::size_t>(n) - 1];
        if (i <= h.size()) acc += ladder_c(n) * h[i - 1];
    }
    return acc;
}

double ell_basis(const LadderSample& sample, std::int64_t i) {
    for (int n = 1; n <= sample.n_blocks; ++n)
        if (sample.xi[static_cast<std::size_t>(n) - 1] == i)
            return ladder_c(n);
    return 0.0;
}

AnchorVector anchor_vector(int n_blocks) {
    if (n_blocks < 1) throw ConfigError("anchor_vector: N must be >= 1");
    AnchorVector av;
    av.n_blocks = n_blocks;
    const std::int64_t dim = std::int64_t{1} << n_blocks;
    av.a = Eigen::VectorXd::Zero(dim);
    for (int n = 1; n <= n_blocks; ++n) {
        const double val = std::exp2(-0.75 * n);
        const std::int64_t lo = std::int64_t{1} << (n - 1);
        for (std::int64_t k = lo; k < 2 * lo; ++k) av.a[k - 1] = val;
        av.norm_sq += 0.5 * std::exp2(-0.5 * n);
    }
    return av;
}

double anchor_pairing(const Eigen::VectorXd& h, int n_blocks) {
    double acc = 0.0;
    for (int n = 1; n <= n_blocks; ++n) {
        const double val = std::exp2(-0.75 * n);
        const std::int64_t lo = std::int64_t{1} << (n - 1);
        const std::int64_t hi =
            std::min<std::int64_t>(2 * lo - 1, h.size());
        for (std::int64_t k = lo; k <= hi; ++k)
            acc += val * std::abs(h[k - 1]);
    }
    return acc;
}

double unboundedness_certificate(const LadderSample& sample) {
    // Only i in the realized support {xi_n} contribute (blocks disjoint),
    // and there l(e_i)^2 = c_n^2 = 2^{n/2} — accumulated in that exact
    // dyadic form rather than squaring fl(2^{n/4}).
    double acc = 0.0;
    for (int n = 1; n <= sample.n_blocks; ++n) {
        const std::int64_t i = sample.xi[static_cast<std::size_t>(n) - 1];
        if (ell_basis(sample, i) == 0.0) continue;  // unreachable by design
        acc += std::exp2(0.5 * n);
    }
    return acc;
}

double certificate_closed_form(int n_blocks) {
    double acc = 0.0;
    for (int n = 1; n <= n_blocks; ++n) acc += std::exp2(0.5 * n);
    return acc;
}

int blocks_needed_for(double bound) {
    double acc = 0.0;
    for (int n = 1;; ++n) {
        acc += std::exp2(0.5 * n);
        if (acc > bound) return n;
    }
}

double enumerate_expectation(
    int n_blocks,
    const std::function<double(const std::vector<std::int64_t>&)>& f) {
    if (n_blocks < 1) throw ConfigError("enumerate_expectation: N >= 1");
    if (n_blocks > kLadderEnumCap)
        throw ConfigError("enumerate_expectation: N > enumeration cap");

    std::vector<std::int64_t> xi(static_cast<std::size_t>(n_blocks));
    std::int64_t outcomes = 1;
    for (int n = 1; n <= n_blocks; ++n) {
        xi[static_cast<std::size_t>(n) - 1] = std::int64_t{1} << (n - 1);
        outcomes <<= (n - 1);
    }

    // Odometer over the product of blocks, block 1 fastest; the law is
    // uniform so the mean is a plain average.
    double acc = 0.0;
    for (std::int64_t o = 0;; ++o) {
        acc += f(xi);
        int n = 1;
        for (; n <= n_blocks; ++n) {
            std::int64_t& x = xi[static_cast<std::size_t>(n) - 1];
            ++x;
            if (x < (std::int64_t{1} << n)) break;
            x = std::int64_t{1} << (n - 1);
        }
        if (n > n_blocks) break;
    }
    return acc / static_cast<double>(outcomes);
}

double majorant_closed_form(int n_blocks, const Eigen::VectorXd& h) {
    return 2.0 * anchor_pairing(h, n_blocks);
}

namespace {

double majorant_draw(int n_blocks, const Eigen::VectorXd& h,
                     const LadderSample& s) {
    double v = 0.0;
    for (int n = 1; n <= n_blocks; ++n) {
        const std::int64_t i = s.xi[static_cast<std::size_t>(n) - 1];
        if (i <= h.size()) v += ladder_c(n) * std::abs(h[i - 1]);
    }
    return v;
}

}  // namespace

double majorant_mc(int n_blocks, const Eigen::VectorXd& h, int trials,
                   RngSeed seed, double* se_out) {
    if (trials < 2) throw ConfigError("majorant_mc: trials >= 2");
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t)
        draws.push_back(majorant_draw(
            n_blocks, h,
            sample_ladder(n_blocks,
                          seed.substream(static_cast<std::uint64_t>(t)))));
    const MeanSe ms = mean_se(draws);
    if (se_out) *se_out = ms.se;
    return ms.mean;
}

L2BoundCheck l2_bound_check(int n_blocks, const Eigen::VectorXd& h, int trials,
                            RngSeed seed) {
    if (trials < 2) throw ConfigError("l2_bound_check: trials >= 2");
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        const double v = majorant_draw(
            n_blocks, h,
            sample_ladder(n_blocks,
                          seed.substream(static_cast<std::uint64_t>(t))));
        draws.push_back(v * v);
    }
    const MeanSe ms = mean_se(draws);
    L2BoundCheck out;
    out.estimate = ms.mean;
    out.se = ms.se;
    const double pairing = anchor_pairing(h, n_blocks);
    out.bound = std::sqrt(2.0) * h.squaredNorm() + 4.0 * pairing * pairing;
    out.pass = out.estimate <= out.bound + 4.0 * out.se;
    return out;
}

CounterexamplePath simulate_counterexample_m(const LadderSample& sample,
                                             const Eigen::VectorXd& h,
                                             TimeGrid grid,
                                             RngSeed path_seed) {
    if (grid.T < 3.0 - 1e-9 * grid.dt())
        throw HorizonTooShort("simulate_counterexample_m: grid must reach 3");

    CounterexamplePath out;
    out.ladder = sample;
    out.ell_h = ell(sample, h);
    out.m = ScalarPath(grid);
    out.w = ScalarPath(grid);
    out.dw.resize(static_cast<std::size_t>(grid.K));

    CounterRng rng(path_seed);
    const double root_dt = std::sqrt(grid.dt());
    const double tol = 1e-9 * grid.dt();
    for (int k = 0; k < grid.K; ++k) {
        const double dwk = root_dt * rng.next_gaussian();
        out.dw[static_cast<std::size_t>(k)] = dwk;
        out.w.values[static_cast<std::size_t>(k) + 1] =
            out.w.values[static_cast<std::size_t>(k)] + dwk;
        // Support: cells (t_k, t_{k+1}] inside (1, 2]. Outside, the value is
        // copied, not incremented by 0 — frozen bitwise.
        const bool support =
            grid.t(k) >= 1.0 - tol && grid.t(k + 1) <= 2.0 + tol;
        out.m.values[static_cast<std::size_t>(k) + 1] =
            support ? out.m.values[static_cast<std::size_t>(k)] +
                          out.ell_h * dwk
                    : out.m.values[static_cast<std::size_t>(k)];
    }
    return out;
}

RankOneFit rank_one_falsification(const LadderSample& sample, std::int64_t d) {
    if (d < 1 || d > (std::int64_t{1} << sample.n_blocks))
        throw ConfigError("rank_one_falsification: d outside [1, 2^N]");
    RankOneFit fit;
    // The density diagonal has support {xi_n}; walk blocks, not all of
    // {1..d}.
    for (int n = 1; n <= sample.n_blocks; ++n) {
        const std::int64_t i = sample.xi[static_cast<std::size_t>(n) - 1];
        if (i > d) continue;
        const double c = ladder_c(n);
        const double dens = c * c;
        fit.total += dens;
        if (dens > fit.dominant) {
            fit.dominant = dens;
            fit.dominant_index = i;
        }
    }
    fit.residual = fit.total - fit.dominant;
    return fit;
}

std::string counterexample_to_json(const LadderSample& sample,
                                   double certificate, double bound,
                                   double estimate) {
    nlohmann::json j;
    j["N"] = sample.n_blocks;
    j["seed"] = {{"seed", sample.seed.seed}, {"stream", sample.seed.stream}};
    j["xi"] = sample.xi;
    j["certificate"] = certificate;
    j["bound"] = bound;
    j["estimate"] = estimate;
    return j.dump(2);
}

}  // namespace cylmart
