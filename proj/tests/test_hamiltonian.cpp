#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cqa/errors.hpp"
#include "cqa/hamiltonian.hpp"
#include "cqa/instances.hpp"
#include "cqa/prng.hpp"
#include "support/synthetic.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <set>
#include <sstream>

using namespace cqa;

namespace {

Instance nand_instance(uint64_t inputs, uint64_t observed) {
    Instance inst;
    inst.circuit = parse_netlist("INPUT a\nINPUT b\nOUTPUT c\nGATE g1 NAND a b -> c\n");
    inst.applied_inputs = inputs;
    inst.observed_outputs = observed;
    return inst;
}

Instance c17_instance(uint64_t inputs, bool flip = true) {
    Instance inst;
    inst.circuit = builtin_topology("c17");
    inst.applied_inputs = inputs;
    uint64_t healthy = (propagate(inst.circuit, inputs) >> 15) & 0b11;
    inst.observed_outputs = flip ? healthy ^ 0b11 : healthy;
    return inst;
}

std::string local_state(const Circuit&, const Diagnosis& d, std::initializer_list<int> wires) {
    std::string vals, faults;
    for (int w : wires) {
        vals += ((d.wires >> w) & 1) ? '1' : '0';
        faults += ((d.faults >> w) & 1) ? '1' : '0';
    }
    return "(" + vals + ";" + faults + ")";
}

// Paper rule, stated on the full 2N bits: two valid diagnoses are driver
// neighbors iff they differ by flipping a nonempty subset S of one gate's
// input wires together with those wires' fault bits, plus possibly that
// gate's output fault bits, and nothing else.
bool neighbors_by_local_move(const Circuit& c, const Diagnosis& a, const Diagnosis& b) {
    uint64_t dw = a.wires ^ b.wires;
    uint64_t df = a.faults ^ b.faults;
    if (dw == 0) return false;
    for (const Gate& g : c.gates) {
        uint64_t in_mask = 0, out_mask = 0;
        for (int i = 0; i < gate_fan_in(g.kind); ++i) in_mask |= 1ull << g.in[i];
        for (int i = 0; i < gate_fan_out(g.kind); ++i) out_mask |= 1ull << g.out[i];
        if ((dw & ~in_mask) != 0) continue;            // only this gate's inputs moved
        if ((df & dw) != dw) continue;                 // moved wires flip their fault bits
        if ((df & ~(dw | out_mask)) != 0) continue;    // rest of the circuit untouched
        return true;
    }
    return false;
}

} // namespace

TEST_CASE("reduced space encodes free bits in wire order") {
    Instance inst = nand_instance(0b10, 0b0);
    ReducedSpace space(inst);
    CHECK(space.dim() == 4);
    for (uint64_t i = 0; i < 4; ++i) {
        Diagnosis d = space.decode(i);
        CHECK(is_valid(inst, d));
        CHECK(space.encode(d) == i);
        CHECK((d.wires & 0b11) == i);
    }

    Instance big = c17_instance(0b00101);
    ReducedSpace s17(big);
    CHECK(s17.dim() == 32768);
    Diagnosis d0 = s17.decode(0);
    CHECK((d0.wires & ((1ull << 15) - 1)) == 0);
    CHECK(is_valid(big, d0));
}

TEST_CASE("driver generator counts follow 3*G2 + G1") {
    auto single = driver_generators(nand_instance(0, 0).circuit);
    REQUIRE(single.size() == 3);
    std::set<uint64_t> masks;
    for (auto& g : single) masks.insert(g.mask);
    CHECK(masks == std::set<uint64_t>{0b01, 0b10, 0b11});

    auto c17 = driver_generators(builtin_topology("c17"));
    CHECK(c17.size() == 21); // 3*6 + 3
    auto c26 = driver_generators(builtin_topology("c26"));
    CHECK(c26.size() == 30); // 3*8 + 6

    for (auto* gens : {&c17, &c26}) {
        std::set<uint64_t> seen;
        for (auto& g : *gens) {
            CHECK(g.mask != 0);
            CHECK(seen.insert(g.mask).second); // all distinct
            CHECK(g.coeff == -1.0);
        }
        // Per 2-input gate the third mask is the XOR of the two singletons.
        std::map<int, std::vector<uint64_t>> by_gate;
        for (auto& g : *gens) by_gate[g.gate].push_back(g.mask);
        for (auto& [gate, ms] : by_gate) {
            if (ms.size() == 3) {
                std::sort(ms.begin(), ms.end());
                CHECK((ms[0] ^ ms[1]) == ms[2]);
            } else {
                CHECK(ms.size() == 1);
            }
        }
    }
}

TEST_CASE("driver moves reproduce the canonical NAND example") {
    // Local state (100;001): inputs (1,0) applied, output observed 0 while
    // the healthy NAND gives 1.
    Instance inst = nand_instance(0b01, 0b0);
    REQUIRE(((propagate(inst.circuit, 0b01) >> 2) & 1) == 1);
    ReducedSpace space(inst);
    Diagnosis d0 = trivial_diagnosis(inst);
    CHECK(local_state(inst.circuit, d0, {0, 1, 2}) == "(100;001)");

    uint64_t idx = space.encode(d0);
    std::set<std::string> moved;
    for (auto& g : driver_generators(inst.circuit))
        moved.insert(local_state(inst.circuit, space.decode(idx ^ g.mask), {0, 1, 2}));
    CHECK(moved == std::set<std::string>{"(000;101)", "(110;010)", "(010;111)"});
}

TEST_CASE("driver adjacency equals the brute-force local-move rule") {
    Splitmix64 rng(555);
    for (int trial = 0; trial < 8; ++trial) {
        Instance inst = trial == 0 ? nand_instance(0b01, 0b0)
                                   : testsupport::random_small_instance(rng, 8);
        ReducedSpace space(inst);
        const uint64_t dim = space.dim();
        auto gens = driver_generators(inst.circuit);

        std::vector<Diagnosis> ds(dim);
        for (uint64_t i = 0; i < dim; ++i) ds[i] = space.decode(i);

        for (uint64_t i = 0; i < dim; ++i)
            for (uint64_t j = 0; j < dim; ++j) {
                bool by_mask = false;
                for (auto& g : gens)
                    if ((i ^ g.mask) == j) by_mask = true;
                CHECK(by_mask == neighbors_by_local_move(inst.circuit, ds[i], ds[j]));
            }
    }
}

TEST_CASE("driver closure: every move lands on a valid diagnosis") {
    Splitmix64 rng(77);
    for (int trial = 0; trial < 6; ++trial) {
        Instance inst = testsupport::random_small_instance(rng, 9);
        ReducedSpace space(inst);
        auto gens = driver_generators(inst.circuit);
        for (uint64_t i = 0; i < space.dim(); ++i)
            for (auto& g : gens) CHECK(is_valid(inst, space.decode(i ^ g.mask)));
    }
}

TEST_CASE("initial Hamiltonian diagonal") {
    Instance inst = c17_instance(0b10011);
    ReducedSpace space(inst);
    ReducedOperator hi = build_initial(space);
    uint64_t i0 = space.encode(trivial_diagnosis(inst));
    CHECK(hi.diagonal[i0] == -34.0);

    double second = 1e300;
    int ground_count = 0;
    for (uint64_t i = 0; i < space.dim(); ++i) {
        double e = hi.diagonal[i];
        CHECK(std::fmod(e + 34.0, 2.0) == 0.0); // even spacing from the ground entry
        if (e == -34.0) ground_count++;
        else second = std::min(second, e);
    }
    CHECK(ground_count == 1);
    CHECK(second - (-34.0) >= 4.0); // valid diagnoses sit at Hamming distance >= 2
}

TEST_CASE("initial gap equals twice the minimum Hamming distance") {
    Splitmix64 rng(404);
    for (int trial = 0; trial < 6; ++trial) {
        Instance inst = testsupport::random_small_instance(rng, 9, true);
        ReducedSpace space(inst);
        ReducedOperator hi = build_initial(space);
        Diagnosis d0 = trivial_diagnosis(inst);
        uint64_t i0 = space.encode(d0);

        int dmin = 1 << 30;
        for (uint64_t i = 0; i < space.dim(); ++i) {
            if (i == i0) continue;
            Diagnosis d = space.decode(i);
            dmin = std::min(dmin, std::popcount(d.wires ^ d0.wires) +
                                      std::popcount(d.faults ^ d0.faults));
        }
        std::vector<double> sorted = hi.diagonal;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted[1] - sorted[0] == 2.0 * dmin);
        CHECK(dmin >= 2);
    }
}

TEST_CASE("final Hamiltonian diagonal") {
    SUBCASE("values") {
        Instance inst = c17_instance(0b01110);
        ReducedSpace space(inst);
        ReducedOperator hf = build_final(space);
        uint64_t i0 = space.encode(trivial_diagnosis(inst));
        CHECK(hf.diagonal[i0] == -13.0); // 2*2 - 17

        Instance clean = c17_instance(0b01110, false);
        ReducedSpace cspace(clean);
        ReducedOperator chf = build_final(cspace);
        CHECK(chf.diagonal[cspace.encode(trivial_diagnosis(clean))] == -17.0);
    }
    SUBCASE("argmin equals the brute-force MFD set") {
        Splitmix64 rng(808);
        for (int trial = 0; trial < 10; ++trial) {
            Instance inst = testsupport::random_small_instance(rng, 10);
            ReducedSpace space(inst);
            ReducedOperator hf = build_final(space);
            double lo = *std::min_element(hf.diagonal.begin(), hf.diagonal.end());
            std::vector<uint64_t> argmin;
            for (uint64_t i = 0; i < space.dim(); ++i)
                if (hf.diagonal[i] == lo) argmin.push_back(i);
            CHECK(argmin == mfd_bruteforce(inst).mfd_set);
        }
    }
}

TEST_CASE("assemble honors the envelope boundary conditions") {
    Instance inst = c17_instance(0b00110);
    ReducedSpace space(inst);
    ReducedOperator hi = build_initial(space);
    ReducedOperator hd = build_driver(space, DriverSign::Stoquastic);
    ReducedOperator hf = build_final(space);
    const uint64_t dim = space.dim();

    Splitmix64 rng(1);
    std::vector<double> x(dim), y(dim), yref(dim);
    for (auto& v : x) v = rng.next_unit() - 0.5;

    SUBCASE("s=0 is the initial Hamiltonian alone") {
        assemble(0.0, hi, hd, hf).apply(x, y);
        for (uint64_t i = 0; i < dim; ++i) yref[i] = hi.diagonal[i] * x[i];
        CHECK(y == yref);
    }
    SUBCASE("s=1 is the final Hamiltonian alone") {
        assemble(1.0, hi, hd, hf).apply(x, y);
        for (uint64_t i = 0; i < dim; ++i) yref[i] = hf.diagonal[i] * x[i];
        CHECK(y == yref);
    }
    SUBCASE("dimension mismatch is rejected") {
        std::vector<double> bad(dim / 2);
        CHECK_THROWS_AS(assemble(0.5, hi, hd, hf).apply(bad, y), std::invalid_argument);
    }
}

TEST_CASE("H(s) is Hermitian on random complex vectors") {
    Splitmix64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        Instance synth = testsupport::random_small_instance(rng, 8);
        ReducedSpace space(synth);
        AnnealHamiltonian h(space, DriverSign::Stoquastic);
        uint64_t dim = space.dim();
        std::vector<std::complex<double>> x(dim), y(dim), hx(dim), hy(dim);
        for (auto& v : x) v = {rng.next_unit() - 0.5, rng.next_unit() - 0.5};
        for (auto& v : y) v = {rng.next_unit() - 0.5, rng.next_unit() - 0.5};
        double s = rng.next_unit();
        h.apply(s, x, hx);
        h.apply(s, y, hy);
        std::complex<double> a = 0, b = 0;
        for (uint64_t i = 0; i < dim; ++i) {
            a += std::conj(x[i]) * hy[i];
            b += std::conj(hx[i]) * y[i];
        }
        CHECK(std::abs(a - b) < 1e-12 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("stoquastic sign: off-diagonal elements are non-positive") {
    Splitmix64 rng(11);
    Instance inst = testsupport::random_small_instance(rng, 8);
    ReducedSpace space(inst);
    ReducedOperator hi = build_initial(space);
    ReducedOperator hf = build_final(space);
    for (double s : {0.25, 0.5, 0.9}) {
        ReducedOperator hd = build_driver(space, DriverSign::Stoquastic);
        for (auto& [r, c, v] : sparse_coordinates(assemble(s, hi, hd, hf)))
            if (r != c) CHECK(v <= 0.0);
        ReducedOperator hn = build_driver(space, DriverSign::NonStoquastic);
        for (auto& [r, c, v] : sparse_coordinates(assemble(s, hi, hn, hf)))
            if (r != c) CHECK(v >= 0.0);
    }
}

TEST_CASE("transition graph: regular, connected, instance independent") {
    SUBCASE("single NAND") {
        Instance inst = nand_instance(0b11, 0b1);
        TransitionGraphReport rep = transition_graph_check(ReducedSpace(inst));
        CHECK(rep.dim == 4);
        CHECK(rep.degree == 3);
        CHECK(rep.regular);
        CHECK(rep.connected);
        CHECK(rep.reached == 4);
    }
    SUBCASE("c17 instances share one Cayley graph") {
        Instance a = c17_instance(0b00000);
        Instance b = c17_instance(0b11011);
        TransitionGraphReport ra = transition_graph_check(ReducedSpace(a));
        TransitionGraphReport rb = transition_graph_check(ReducedSpace(b));
        CHECK(ra.degree == 21);
        CHECK(ra.regular);
        CHECK(ra.connected);
        CHECK(ra.reached == 32768);
        CHECK(ra.masks == rb.masks);
        CHECK(ra.mask_fingerprint == rb.mask_fingerprint);
    }
}

TEST_CASE("coordinate dump matches the sparse materialization") {
    Instance inst = nand_instance(0b10, 0b1);
    ReducedSpace space(inst);
    auto h = assemble(0.5, build_initial(space), build_driver(space, DriverSign::Stoquastic),
                      build_final(space));
    auto coords = sparse_coordinates(h);
    std::ostringstream out;
    dump_coordinates(h, out);
    size_t lines = 0;
    std::string line;
    std::istringstream in(out.str());
    while (std::getline(in, line)) {
        ++lines;
        uint64_t r, c;
        double v;
        REQUIRE(sscanf(line.c_str(), "%llu %llu %lf", (unsigned long long*)&r,
                       (unsigned long long*)&c, &v) == 3);
    }
    CHECK(lines == coords.size());
}
