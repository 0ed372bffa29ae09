#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdrturbo/ldpc.hpp"
#include "sdrturbo/mimo.hpp"
#include "sdrturbo/turbo.hpp"

namespace sdrturbo::sim {

// Full description of one Monte Carlo sweep. Defaults follow the simulated
// system: 4x4 QPSK, (256,128) column-weight-3 code, P=2, clip 8, 3 turbo
// iterations, 20 inner decoder iterations.
struct SimConfig {
    int num_tx = 4;
    int num_rx = 4;
    std::vector<double> snr_grid_db = {4.0};
    turbo::Scheme scheme = turbo::Scheme::MultiSdr;
    int hamming_radius = 2;
    double llr_clip = 8.0;
    int turbo_iters = 3;
    int decoder_iters = 20;
    long max_frames = 5000;
    long min_bit_errors = 200;
    std::uint64_t master_seed = 1;
    // Monte Carlo default: anchors are insensitive to tighter solves, and a
    // maxiter iterate still gets rounded. Tighten for solver studies.
    double sdp_tol = 1e-3;
    int sdp_max_iters = 600;
    int code_n = 256;
    int code_k = 128;
    int code_col_weight = 3;
    std::uint64_t code_seed = 7;
    std::string alist_path;  // overrides the generated code when nonempty
    int threads = 1;

    void validate() const;
};

// key=value file, '#' comments. Unknown keys are an error.
SimConfig parse_config_file(const std::string& path);
SimConfig parse_config_text(const std::string& text);
std::string canonical_config_text(const SimConfig& cfg);

// FNV-1a over the canonical key=value rendering.
std::uint64_t config_hash(const SimConfig& cfg);

// "a:b:step" (inclusive) or a comma-separated list.
std::vector<double> parse_snr_grid(const std::string& text);

struct BerRecord {
    double snr_db = 0.0;
    int iteration = 0;
    long bit_errors = 0;
    long bits = 0;
    long frame_errors = 0;
    long frames = 0;
    double ber = 0.0;
    double fer = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash_hex;
};

// Everything constructed once per sweep; exposed so tools and tests can run
// single frames against the identical code/interleaver.
struct LinkObjects {
    ldpc::Generator generator;
    turbo::LinkSetup setup;  // owns the parity-check matrix
    mimo::FrameLayout layout;
};
LinkObjects build_link(const SimConfig& cfg);

// Per-frame sub-seed; deterministic in (master, snr index, frame index).
std::uint64_t frame_seed(std::uint64_t master, std::size_t snr_index, long frame_index);

// Runs frames per SNR point until min_bit_errors errors are seen at the
// final iteration or max_frames is reached. A frame that stops early keeps
// its converged error count for the remaining iteration records.
std::vector<BerRecord> run_ber_sweep(const SimConfig& cfg);

// Deterministic CSV: header comments carry config hash, seed and the SNR
// convention; columns follow BerRecord.
std::string ber_csv(const std::vector<BerRecord>& records, const SimConfig& cfg);

}  // namespace sdrturbo::sim
