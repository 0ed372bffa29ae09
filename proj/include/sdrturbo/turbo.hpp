#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdrturbo/detector.hpp"
#include "sdrturbo/ldpc.hpp"
#include "sdrturbo/llr.hpp"
#include "sdrturbo/mimo.hpp"

namespace sdrturbo::turbo {

// Bijection between decoder (codeword) order and channel order.
// interleave: decoder -> channel; deinterleave: channel -> decoder.
class Interleaver {
public:
    explicit Interleaver(int n);  // identity
    static Interleaver random(int n, std::uint64_t seed);

    int size() const { return static_cast<int>(perm_.size()); }
    // channel position of a decoder-order index
    int channel_pos(int decoder_pos) const { return inv_[decoder_pos]; }

    LlrFrame interleave(const LlrFrame& decoder_order) const;
    LlrFrame deinterleave(const LlrFrame& channel_order) const;
    std::vector<std::uint8_t> interleave_bits(const std::vector<std::uint8_t>& decoder_order) const;
    std::vector<std::uint8_t> deinterleave_bits(const std::vector<std::uint8_t>& channel_order) const;

private:
    std::vector<int> perm_;  // channel i carries decoder bit perm_[i]
    std::vector<int> inv_;
};

LlrFrame clip_llr(const LlrFrame& frame, double clip);

enum class Scheme { MultiSdr, SingleSdr, FullList };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct TurboConfig {
    Scheme scheme = Scheme::MultiSdr;
    int max_turbo_iters = 3;
    int hamming_radius = 2;
    double llr_clip = 8.0;
    int decoder_iters = 20;
    sdp::SolveOptions sdp;
    bool record_llrs = false;
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    bool parity_ok = false;
    long bit_errors = -1;  // vs truth codeword; -1 when no truth given
    int decoder_iterations = 0;
    int sdp_iterations = 0;      // 0 when no SDR was solved this iteration
    bool sdp_converged = true;   // false when the solve stopped at max_iters
    std::vector<std::uint8_t> hard_bits;
    // recorded when TurboConfig::record_llrs is set
    std::optional<LlrFrame> detector_prior;      // L into detector (channel order)
    std::optional<LlrFrame> detector_extrinsic;  // L out of detector, clipped
    std::optional<LlrFrame> decoder_prior;       // de-interleaved detector output
    std::optional<LlrFrame> decoder_extrinsic;   // L out of decoder
};

struct IterationTrace {
    std::vector<IterationRecord> iterations;
    bool decoded_ok = false;
};

// Everything fixed across frames of one simulation: the code, the
// interleaver, and the FS rows remapped to channel order.
struct LinkSetup {
    ldpc::ParityCheckMatrix code;
    Interleaver interleaver;
    std::vector<ldpc::FsConstraint> fs_channel;
};

std::vector<ldpc::FsConstraint> remap_to_channel_order(const std::vector<ldpc::FsConstraint>& fs,
                                                       const Interleaver& interleaver);

LinkSetup make_link_setup(const ldpc::ParityCheckMatrix& code, Interleaver interleaver);

// Runs detector/decoder iterations until the decoder satisfies all parity
// checks or the iteration budget is spent. The truth codeword (decoder
// order) is used for error counting only, never by the receiver.
IterationTrace run_turbo(const mimo::Frame& frame, const LinkSetup& setup, const TurboConfig& cfg,
                         double sigma_n2, const std::vector<std::uint8_t>* truth_codeword = nullptr);

// One JSON object per iteration.
std::string trace_to_jsonl(const IterationTrace& trace);

}  // namespace sdrturbo::turbo
