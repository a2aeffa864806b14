// Times the OpenMP ensemble kernels against their serial reference paths.
// The two paths must agree bit for bit; the tool exits nonzero if they do
// not, so it doubles as a determinism smoke test on real workloads.

#include "emq/catalog.hpp"
#include "emq/dynamics.hpp"
#include "emq/ghost.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>

#ifdef EMQ_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parallel vs serial benchmark for the ensemble kernels"};
    int samples = 20000;
    double hbar = 0.01;
    double tau_end = 8.0;
    double dtau = 0.01;
    int trials = 8;
    std::uint64_t seed = 2026;
    app.add_option("--samples", samples, "relaxation-flow samples per path")
        ->check(CLI::PositiveNumber);
    app.add_option("--hbar", hbar, "noise strength")->check(CLI::PositiveNumber);
    app.add_option("--tau-end", tau_end, "relaxation horizon");
    app.add_option("--dtau", dtau, "relaxation step");
    app.add_option("--trials", trials, "symmetry-sweep trials per grid size")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "generator seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

#ifdef EMQ_HAVE_OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    int bad = 0;

    {
        emq::GradientFn grad = [](const std::vector<double>& q,
                                  std::vector<double>& out) {
            out[0] = 2.0 * q[0];
        };
        auto t0 = std::chrono::steady_clock::now();
        auto par = emq::langevin_ensemble(grad, 1, {1.0}, hbar, samples, tau_end,
                                          dtau, seed, true);
        double tp = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        auto ser = emq::langevin_ensemble(grad, 1, {1.0}, hbar, samples, tau_end,
                                          dtau, seed, false);
        double ts = seconds_since(t0);

        bool same = par.msd == ser.msd && par.sq_dev == ser.sq_dev &&
                    par.det_final == ser.det_final;
        std::printf("relaxation ensemble: %d samples, msd %.12g\n", samples,
                    par.msd);
        std::printf("  parallel %8.3f s   serial %8.3f s   speedup %.2fx   "
                    "bitwise identical: %s\n",
                    tp, ts, ts / tp, same ? "yes" : "NO");
        if (!same) ++bad;
    }

    {
        auto b = emq::instantiate(emq::builtin("pendulum-free"));
        auto t0 = std::chrono::steady_clock::now();
        auto par = emq::brst_sweep(b.sys, 3, 6, trials, seed, {}, true);
        double tp = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        auto ser = emq::brst_sweep(b.sys, 3, 6, trials, seed, {}, false);
        double ts = seconds_since(t0);

        bool same = par.configs == ser.configs && par.failures == ser.failures &&
                    par.flags == ser.flags;
        std::printf("symmetry sweep: %d configurations, %d failures\n",
                    par.configs, par.failures);
        std::printf("  parallel %8.3f s   serial %8.3f s   speedup %.2fx   "
                    "bitwise identical: %s\n",
                    tp, ts, ts / tp, same ? "yes" : "NO");
        if (!same) ++bad;
    }

    return bad;
}
