#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// The OpenMP kernels must match the serial reference bitwise: every output
// element is accumulated in the same fixed order regardless of thread count.

#include "cqa/hamiltonian.hpp"
#include "cqa/prng.hpp"

#include <complex>

using namespace cqa;

namespace {

Instance c17_instance(uint64_t inputs) {
    Instance inst;
    inst.circuit = builtin_topology("c17");
    inst.applied_inputs = inputs;
    uint64_t healthy = (propagate(inst.circuit, inputs) >> 15) & 0b11;
    inst.observed_outputs = healthy ^ 0b11;
    return inst;
}

} // namespace

TEST_CASE("serial and OpenMP matvec agree bitwise (real)") {
    Instance inst = c17_instance(0b01101);
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, DriverSign::Stoquastic);
    const uint64_t dim = space.dim();

    Splitmix64 rng(2);
    std::vector<double> x(dim), ys(dim), yp(dim);
    for (auto& v : x) v = rng.next_unit() - 0.5;

    for (double s : {0.0, 0.31, 0.5, 0.77, 1.0}) {
        h.apply(s, x, ys, Exec::Serial);
        h.apply(s, x, yp, Exec::Parallel);
        CHECK(ys == yp);
    }
}

TEST_CASE("serial and OpenMP matvec agree bitwise (complex)") {
    Instance inst = c17_instance(0b11100);
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, DriverSign::NonStoquastic);
    const uint64_t dim = space.dim();

    Splitmix64 rng(3);
    std::vector<std::complex<double>> x(dim), ys(dim), yp(dim);
    for (auto& v : x) v = {rng.next_unit() - 0.5, rng.next_unit() - 0.5};

    for (double s : {0.12, 0.5, 0.93}) {
        h.apply(s, x, ys, Exec::Serial);
        h.apply(s, x, yp, Exec::Parallel);
        CHECK(ys == yp);
        h.apply_rhs(s, x, ys, Exec::Serial);
        h.apply_rhs(s, x, yp, Exec::Parallel);
        CHECK(ys == yp);
    }
}

TEST_CASE("apply_rhs is exactly -i times apply") {
    Instance inst = c17_instance(0b00011);
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, DriverSign::Stoquastic);
    const uint64_t dim = space.dim();

    Splitmix64 rng(4);
    std::vector<std::complex<double>> x(dim), hy(dim), rhs(dim);
    for (auto& v : x) v = {rng.next_unit() - 0.5, rng.next_unit() - 0.5};

    h.apply(0.4, x, hy);
    h.apply_rhs(0.4, x, rhs);
    for (uint64_t i = 0; i < dim; ++i)
        CHECK(rhs[i] == std::complex<double>(hy[i].imag(), -hy[i].real()));
}

TEST_CASE("assembled combination matches the fused anneal operator") {
    Instance inst = c17_instance(0b10101);
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, DriverSign::Stoquastic);
    const uint64_t dim = space.dim();

    Splitmix64 rng(5);
    std::vector<double> x(dim), ya(dim), yb(dim);
    for (auto& v : x) v = rng.next_unit() - 0.5;

    for (double s : {0.2, 0.65}) {
        h.apply(s, x, ya);
        assemble(s, h.initial(), h.driver(), h.final_part()).apply(x, yb);
        for (uint64_t i = 0; i < dim; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-15));
    }
}
