#pragma once

#include "cqa/diagnosis.hpp"
#include "cqa/schedule.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <tuple>
#include <vector>

namespace cqa {

/// Kernel execution policy. Parallel uses OpenMP over index ranges; every
/// element of the result is accumulated in one fixed order by exactly one
/// thread, so Serial and Parallel are bitwise identical.
enum class Exec { Serial, Parallel };

/// Bijection between reduced indices 0..2^(N-N_O)-1 and valid diagnoses.
/// Free bit k of an index is the value of canonical wire k (wire 0 = least
/// significant bit), matching the enumeration order of for_each_valid.
/// Fault bits are recomputed on demand, which is what keeps the driver
/// action a pure XOR of masks.
class ReducedSpace {
  public:
    explicit ReducedSpace(Instance inst, int cap = kDefaultEnumerationCap);

    uint64_t dim() const { return 1ull << free_bits_; }
    int free_bits() const { return free_bits_; }
    const Instance& instance() const { return inst_; }

    Diagnosis decode(uint64_t index) const;
    /// Inverse of decode; `d` must be a valid diagnosis of this instance.
    uint64_t encode(const Diagnosis& d) const { return d.wires & (dim() - 1); }

  private:
    Instance inst_;
    int free_bits_;
    uint64_t fixed_output_bits_;
};

/// A gate-local driver move: flip this subset of the gate's input wires
/// (together with their fault bits; fault bits of the gate's outputs follow
/// by induction). In the reduced space the move is index -> index ^ mask.
struct FlipGenerator {
    int gate = 0;       // index into circuit.gates
    uint64_t mask = 0;  // nonempty subset of that gate's input wires, as free bits
    double coeff = -1.0;
    bool operator==(const FlipGenerator&) const = default;
};

enum class DriverSign { Stoquastic, NonStoquastic };

/// One generator per nonempty subset of each gate's input wires: three for
/// a 2-input gate, one for FAN/INV, 3*G2 + G1 in total. Coefficients are
/// all -1 (the stoquastic assembly); masks depend on the topology only.
std::vector<FlipGenerator> driver_generators(const Circuit& c);

/// Hermitian operator on the reduced space: an optional diagonal plus XOR
/// flip generators. The off-diagonal action couples amplitude at index i to
/// i ^ mask with the generator's coefficient.
struct ReducedOperator {
    uint64_t dim = 0;
    std::vector<double> diagonal;          // empty when purely off-diagonal
    std::vector<FlipGenerator> generators; // empty when diagonal
};

/// Off-diagonal driver; every element is -1 (Stoquastic) or +1 (NonStoquastic).
ReducedOperator build_driver(const ReducedSpace& space, DriverSign sign);

/// Diagonal with entry -2N + 2 * HammingDistance_2N(d, d0) where d0 is the
/// trivial diagnosis; the unique ground entry -2N sits at d0.
ReducedOperator build_initial(const ReducedSpace& space);

/// Diagonal with entry 2 * fault_count(d) - N; ground entries are the MFDs.
ReducedOperator build_final(const ReducedSpace& space);

/// Fixed linear combination sum_k w_k P_k of operators on one space, with
/// the combined diagonal materialized once. Provides y = H x without ever
/// forming a dense matrix.
class LinearCombination {
  public:
    LinearCombination(std::span<const double> weights,
                      std::span<const ReducedOperator* const> parts);

    uint64_t dim() const { return dim_; }
    const std::vector<double>& diagonal() const { return diag_; }
    const std::vector<uint64_t>& flip_masks() const { return masks_; }
    const std::vector<double>& flip_weights() const { return weights_; }

    void apply(std::span<const double> x, std::span<double> y, Exec exec = Exec::Parallel) const;
    void apply(std::span<const std::complex<double>> x, std::span<std::complex<double>> y,
               Exec exec = Exec::Parallel) const;

  private:
    uint64_t dim_ = 0;
    std::vector<double> diag_;
    std::vector<uint64_t> masks_;    // flip masks
    std::vector<double> weights_;    // weight * coeff per mask
};

/// H(s) = A(s) H_I + B(s) H_D + C(s) H_F at one s, per the envelope functions.
LinearCombination assemble(double s, const ReducedOperator& initial,
                           const ReducedOperator& driver, const ReducedOperator& final_part);

/// The full anneal operator with its three parts prebuilt; apply() combines
/// the diagonals on the fly, so no per-s materialization happens.
class AnnealHamiltonian {
  public:
    AnnealHamiltonian(const ReducedSpace& space, DriverSign sign);

    uint64_t dim() const { return initial_.dim; }
    DriverSign sign() const { return sign_; }
    const ReducedOperator& initial() const { return initial_; }
    const ReducedOperator& driver() const { return driver_; }
    const ReducedOperator& final_part() const { return final_; }

    /// y = H(s) x.
    void apply(double s, std::span<const double> x, std::span<double> y,
               Exec exec = Exec::Parallel) const;
    void apply(double s, std::span<const std::complex<double>> x,
               std::span<std::complex<double>> y, Exec exec = Exec::Parallel) const;
    /// y = -i (H(s) - shift) x: the closed-system RHS, optionally in a frame
    /// rotating at a constant energy shift (a global phase the integrator
    /// removes again at output time).
    void apply_rhs(double s, std::span<const std::complex<double>> x,
                   std::span<std::complex<double>> y, Exec exec = Exec::Parallel,
                   double shift = 0.0) const;

  private:
    ReducedOperator initial_, driver_, final_;
    std::vector<uint64_t> masks_;
    std::vector<double> coeffs_;
    DriverSign sign_;
};

struct TransitionGraphReport {
    uint64_t dim = 0;
    int degree = 0;
    bool regular = false;
    bool connected = false;
    uint64_t reached = 0;          // BFS from the trivial diagnosis
    std::vector<uint64_t> masks;   // sorted generator masks
    std::string mask_fingerprint;  // hash over the sorted mask set
};

/// Degree/regularity/connectivity of the driver transition graph. The graph
/// is the Cayley graph of the free-bit group under the generator masks, so
/// identical mask sets across instances of one topology certify isomorphism.
TransitionGraphReport transition_graph_check(const ReducedSpace& space);

/// Coordinate triples (row, col, value) of the combination, diagonal
/// included; refuses dimensions above 2^16.
std::vector<std::tuple<uint64_t, uint64_t, double>> sparse_coordinates(const LinearCombination& h);

/// Text dump of sparse_coordinates, one "row col value" line each.
void dump_coordinates(const LinearCombination& h, std::ostream& out);

} // namespace cqa
