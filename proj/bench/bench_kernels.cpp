// Timings for the data-parallel kernels: the reduced-space matvec (real and
// complex), the Schrodinger RHS, and the diagonal builds, serial vs OpenMP.
// Usage: cqa_bench [reps]

#include "cqa/hamiltonian.hpp"
#include "cqa/instances.hpp"
#include "cqa/prng.hpp"

#include <chrono>
#include <complex>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cqa;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_per_call(const std::function<void()>& fn, int reps) {
    fn(); // warm up
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

void bench_topology(const char* base, int reps) {
    Instance inst = generate_instance(builtin_topology(base), 1, 0, base);
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, DriverSign::Stoquastic);
    const uint64_t dim = space.dim();
    const size_t nnz = dim * (h.driver().generators.size() + 1);

    Splitmix64 rng(7);
    std::vector<double> xr(dim), yr(dim);
    for (auto& v : xr) v = rng.next_unit() - 0.5;
    std::vector<std::complex<double>> xc(dim), yc(dim);
    for (auto& v : xc) v = {rng.next_unit() - 0.5, rng.next_unit() - 0.5};

    struct Row {
        const char* name;
        std::function<void()> serial, parallel;
        double flops_per_nnz;
    };
    const double s = 0.6;
    Row rows[] = {
        {"matvec real", [&] { h.apply(s, xr, yr, Exec::Serial); },
         [&] { h.apply(s, xr, yr, Exec::Parallel); }, 2.0},
        {"matvec complex", [&] { h.apply(s, xc, yc, Exec::Serial); },
         [&] { h.apply(s, xc, yc, Exec::Parallel); }, 4.0},
        {"schrodinger rhs", [&] { h.apply_rhs(s, xc, yc, Exec::Serial); },
         [&] { h.apply_rhs(s, xc, yc, Exec::Parallel); }, 4.0},
    };

    printf("%s: dim=%llu, %zu flip generators\n", base, (unsigned long long)dim,
           h.driver().generators.size());
    printf("  %-18s %12s %12s %9s %12s\n", "kernel", "serial", "parallel", "speedup", "par GFLOP/s");
    for (Row& r : rows) {
        double ts = seconds_per_call(r.serial, reps);
        double tp = seconds_per_call(r.parallel, reps);
        printf("  %-18s %9.3f ms %9.3f ms %8.2fx %12.2f\n", r.name, ts * 1e3, tp * 1e3, ts / tp,
               r.flops_per_nnz * nnz / tp / 1e9);
    }

    double tb = seconds_per_call([&] { build_final(space); }, std::max(1, reps / 4));
    double tm = seconds_per_call([&] { mfd_bruteforce(inst); }, std::max(1, reps / 4));
    printf("  %-18s %9.3f ms (OpenMP)\n", "diagonal build", tb * 1e3);
    printf("  %-18s %9.3f ms (OpenMP)\n", "mfd scan", tm * 1e3);
}

} // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 20;
#ifdef _OPENMP
    printf("OpenMP: max %d threads\n", omp_get_max_threads());
#else
    printf("OpenMP: disabled in this build\n");
#endif
    bench_topology("c17", reps);
    bench_topology("c26", std::max(1, reps / 10));
    return 0;
}
