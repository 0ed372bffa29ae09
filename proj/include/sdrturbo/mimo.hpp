#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sdrturbo/prng.hpp"

namespace sdrturbo::mimo {

// Dimensions of one frame: a frame carries one codeword spread over
// num_snapshots channel uses, 2*num_tx coded bits per snapshot (QPSK).
struct FrameLayout {
    int num_tx = 4;
    int num_rx = 4;
    int num_snapshots = 32;

    int bits_per_snapshot() const { return 2 * num_tx; }
    int codeword_length() const { return 2 * num_tx * num_snapshots; }
    void validate() const;

    // Channel-order index of bit j (0-based, j < 2*num_tx) of snapshot k.
    int bit_index(int snapshot, int j) const { return 2 * num_tx * snapshot + j; }
};

// Real-valued view of one channel use: y = H*s + n with the stacked
// [[Re, -Im], [Im, Re]] block structure.
struct RealSnapshot {
    Eigen::VectorXd y;  // length 2*num_rx
    Eigen::MatrixXd H;  // 2*num_rx x 2*num_tx
    int index = 0;      // snapshot position within the frame
};

struct Frame {
    FrameLayout layout;
    std::vector<RealSnapshot> snapshots;
};

// Real expansion of a complex matrix: [[Re, -Im], [Im, Re]].
Eigen::MatrixXd real_expand(const Eigen::MatrixXcd& Hc);

// Stacks [Re; Im] of a complex vector.
Eigen::VectorXd real_stack(const Eigen::VectorXcd& v);

RealSnapshot complex_to_real(const Eigen::MatrixXcd& Hc, const Eigen::VectorXcd& yc, int index = 0);

// True iff H carries the [[Re, -Im], [Im, Re]] block structure (within tol).
bool has_real_expansion_structure(const Eigen::MatrixXd& H, double tol = 0.0);

// Maps 2*num_tx coded bits of one snapshot to the real symbol vector
// (Re of antennas 1..num_tx, then Im). Bit 2i-1 (1-based) drives the real
// part of antenna i, bit 2i the imaginary part; values are 1 - 2c.
Eigen::VectorXd map_bits_to_symbols(const std::vector<std::uint8_t>& coded_bits, int num_tx);

// Inverse hard demap: sign(s) -> coded bits.
std::vector<std::uint8_t> map_symbols_to_bits(const Eigen::VectorXd& s, int num_tx);

// Draws an independent Rayleigh channel per snapshot and transmits the
// given channel-order coded bits: y = H*s + n, noise components i.i.d.
// N(0, sigma_n2). Deterministic for a fixed seed.
Frame generate_frame(const FrameLayout& layout, std::uint64_t rng_seed, double sigma_n2,
                     const std::vector<std::uint8_t>& coded_bits);

// SNR convention: SNR(dB) = 10*log10(num_tx * Es / (2*sigma_n2)) with Es = 2,
// i.e. total received signal power per receive antenna over total noise power
// per receive antenna under unit-variance channel entries.
double sigma_n2_from_snr_db(double snr_db, int num_tx);
double snr_db_from_sigma_n2(double sigma_n2, int num_tx);

}  // namespace sdrturbo::mimo
