#pragma once

#include <cstdint>
#include <vector>

#include "sdrturbo/llr.hpp"
#include "sdrturbo/mimo.hpp"
#include "sdrturbo/sdp.hpp"

namespace sdrturbo::det {

// Polarized bit vector of one snapshot, packed as a sign mask:
// bit j set <=> b_j = -1. Bits are in channel bit order (Re/Im interleaved
// per antenna), matching prior LLR slices.
using SignMask = std::uint32_t;

std::vector<std::int8_t> unpack_polarized(SignMask mask, int num_bits);
SignMask pack_polarized(const std::vector<std::int8_t>& b);

// All polarized vectors within Hamming distance radius of the anchor.
struct CandidateList {
    int snapshot_index = 0;
    int num_bits = 0;
    int radius = 0;
    SignMask anchor = 0;
    std::vector<SignMask> members;

    std::size_t size() const { return members.size(); }
};

CandidateList hamming_ball_list(const std::vector<std::int8_t>& anchor, int radius,
                                int snapshot_index = 0);

// Cost matrix of one snapshot, [[H'H, -H'y], [-y'H, ||y||^2]], so that
// <C, X> equals ||y - H x||^2 on rank-1 points with unit homogenizing entry.
Eigen::MatrixXd cost_matrix(const mimo::RealSnapshot& snapshot);

// Builds the joint detection problem: one cost block per snapshot, linear
// cost 2*sigma_n2*prior on f, bit couplings from the frame layout, and the
// supplied FS rows. Both prior and FS indices must be in channel order.
sdp::BlockSdpProblem assemble_joint_map_sdr(const mimo::Frame& frame, const LlrFrame& prior,
                                            double sigma_n2,
                                            const std::vector<ldpc::FsConstraint>& fs);

// Hard anchors from the solved bit probabilities: f <= 0.5 rounds to +1
// (ties deterministically to +1, i.e. coded bit 0).
std::vector<std::vector<std::int8_t>> round_solution(const sdp::SdpSolution& solution,
                                                     const mimo::FrameLayout& layout);

// Max-log extrinsic LLRs of one snapshot over the candidate list. prior_slice
// is the per-snapshot channel-order prior (length 2*num_tx); the bit's own
// prior cancels out of the metric difference.
Eigen::VectorXd maxlog_extrinsic_llr(const CandidateList& list, const mimo::RealSnapshot& snapshot,
                                     int num_tx, double sigma_n2,
                                     const Eigen::VectorXd& prior_slice);

struct DetectorOutput {
    LlrFrame extrinsic;  // channel order, unclipped
};

// List detection over per-snapshot Hamming balls around the given anchors.
DetectorOutput list_detect(const mimo::Frame& frame, double sigma_n2, const LlrFrame& prior,
                           const std::vector<std::vector<std::int8_t>>& anchors, int radius);

// Exhaustive detection over the full QPSK list (guard: 4^num_tx <= 4096).
DetectorOutput full_list_detect(const mimo::Frame& frame, double sigma_n2, const LlrFrame& prior);

// Anchors of the simplified receiver: sign of (initial extrinsic + prior),
// with sign(0) = +1.
std::vector<std::vector<std::int8_t>> simplified_anchor(const LlrFrame& init_extrinsic,
                                                        const LlrFrame& prior,
                                                        const mimo::FrameLayout& layout);

}  // namespace sdrturbo::det
