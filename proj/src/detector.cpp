#include "sdrturbo/detector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdrturbo::det {

std::vector<std::int8_t> unpack_polarized(SignMask mask, int num_bits) {
    std::vector<std::int8_t> b(num_bits);
    for (int j = 0; j < num_bits; ++j) b[j] = (mask >> j) & 1u ? -1 : 1;
    return b;
}

SignMask pack_polarized(const std::vector<std::int8_t>& b) {
    SignMask mask = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (b[j] < 0) mask |= SignMask{1} << j;
    }
    return mask;
}

CandidateList hamming_ball_list(const std::vector<std::int8_t>& anchor, int radius,
                                int snapshot_index) {
    const int nb = static_cast<int>(anchor.size());
    if (nb <= 0 || nb > 24) throw std::invalid_argument("hamming_ball_list: unsupported bit count");
    if (radius < 0 || radius > nb) throw std::invalid_argument("hamming_ball_list: radius out of range");

    CandidateList list;
    list.snapshot_index = snapshot_index;
    list.num_bits = nb;
    list.radius = radius;
    list.anchor = pack_polarized(anchor);
    for (SignMask flips = 0; flips < (SignMask{1} << nb); ++flips) {
        if (__builtin_popcount(flips) <= radius) list.members.push_back(list.anchor ^ flips);
    }
    return list;
}

Eigen::MatrixXd cost_matrix(const mimo::RealSnapshot& snapshot) {
    const auto nb = snapshot.H.cols();
    Eigen::MatrixXd C(nb + 1, nb + 1);
    C.topLeftCorner(nb, nb) = snapshot.H.transpose() * snapshot.H;
    const Eigen::VectorXd hty = snapshot.H.transpose() * snapshot.y;
    C.topRightCorner(nb, 1) = -hty;
    C.bottomLeftCorner(1, nb) = -hty.transpose();
    C(nb, nb) = snapshot.y.squaredNorm();
    return C;
}

sdp::BlockSdpProblem assemble_joint_map_sdr(const mimo::Frame& frame, const LlrFrame& prior,
                                            double sigma_n2,
                                            const std::vector<ldpc::FsConstraint>& fs) {
    if (prior.order != LlrOrder::Channel) {
        throw std::invalid_argument("assemble_joint_map_sdr: prior must be in channel order");
    }
    const mimo::FrameLayout& layout = frame.layout;
    if (prior.size() != layout.codeword_length()) {
        throw std::invalid_argument("assemble_joint_map_sdr: prior length mismatch");
    }
    if (static_cast<int>(frame.snapshots.size()) != layout.num_snapshots) {
        throw std::invalid_argument("assemble_joint_map_sdr: snapshot count mismatch");
    }

    const int nb = layout.bits_per_snapshot();
    sdp::BlockSdpProblem problem;
    problem.block_dim = nb + 1;
    problem.num_f = layout.codeword_length();
    problem.f_cost = 2.0 * sigma_n2 * prior.values;
    problem.fs_rows = fs;
    problem.block_cost.reserve(layout.num_snapshots);
    problem.coupling.reserve(layout.num_snapshots);
    for (int k = 0; k < layout.num_snapshots; ++k) {
        Eigen::MatrixXd cost = cost_matrix(frame.snapshots[k]);
        problem.block_cost.push_back(0.5 * (cost + cost.transpose()));
        // symbol row i: real part of antenna i drives bit 2i, imag bit 2i+1
        std::vector<int> couple(nb);
        for (int i = 0; i < layout.num_tx; ++i) {
            couple[i] = layout.bit_index(k, 2 * i);
            couple[layout.num_tx + i] = layout.bit_index(k, 2 * i + 1);
        }
        problem.coupling.push_back(std::move(couple));
    }
    problem.validate();
    return problem;
}

std::vector<std::vector<std::int8_t>> round_solution(const sdp::SdpSolution& solution,
                                                     const mimo::FrameLayout& layout) {
    const int nb = layout.bits_per_snapshot();
    if (solution.f.size() != layout.codeword_length()) {
        throw std::invalid_argument("round_solution: solution length mismatch");
    }
    std::vector<std::vector<std::int8_t>> anchors(layout.num_snapshots, std::vector<std::int8_t>(nb));
    for (int k = 0; k < layout.num_snapshots; ++k) {
        for (int j = 0; j < nb; ++j) {
            anchors[k][j] = solution.f(layout.bit_index(k, j)) <= 0.5 ? 1 : -1;
        }
    }
    return anchors;
}

namespace {

// Symbol vector of a packed candidate: bit 2i -> real part of antenna i,
// bit 2i+1 -> imaginary part.
Eigen::VectorXd symbols_of(SignMask mask, int num_tx) {
    Eigen::VectorXd s(2 * num_tx);
    for (int i = 0; i < num_tx; ++i) {
        s(i) = (mask >> (2 * i)) & 1u ? -1.0 : 1.0;
        s(num_tx + i) = (mask >> (2 * i + 1)) & 1u ? -1.0 : 1.0;
    }
    return s;
}

}  // namespace

Eigen::VectorXd maxlog_extrinsic_llr(const CandidateList& list, const mimo::RealSnapshot& snapshot,
                                     int num_tx, double sigma_n2,
                                     const Eigen::VectorXd& prior_slice) {
    const int nb = list.num_bits;
    if (nb != 2 * num_tx) throw std::invalid_argument("maxlog_extrinsic_llr: bit count mismatch");
    if (prior_slice.size() != nb) throw std::invalid_argument("maxlog_extrinsic_llr: prior slice mismatch");
    if (sigma_n2 <= 0.0) throw std::invalid_argument("maxlog_extrinsic_llr: sigma_n2 must be positive");

    constexpr double kNoMetric = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_pos = Eigen::VectorXd::Constant(nb, kNoMetric);
    Eigen::VectorXd best_neg = Eigen::VectorXd::Constant(nb, kNoMetric);

    // Metric with the full prior term; the excluded own-bit prior is the
    // constant L(j)/2 per partition and is subtracted at the end.
    for (SignMask member : list.members) {
        const Eigen::VectorXd s = symbols_of(member, num_tx);
        double metric = -(snapshot.y - snapshot.H * s).squaredNorm() / (2.0 * sigma_n2);
        for (int j = 0; j < nb; ++j) {
            metric += 0.5 * prior_slice(j) * ((member >> j) & 1u ? -1.0 : 1.0);
        }
        for (int j = 0; j < nb; ++j) {
            if ((member >> j) & 1u) {
                best_neg(j) = std::max(best_neg(j), metric);
            } else {
                best_pos(j) = std::max(best_pos(j), metric);
            }
        }
    }

    Eigen::VectorXd llr(nb);
    for (int j = 0; j < nb; ++j) {
        if (best_pos(j) == kNoMetric || best_neg(j) == kNoMetric) {
            throw std::runtime_error(
                "maxlog_extrinsic_llr: empty candidate partition (radius must be >= 1)");
        }
        llr(j) = best_pos(j) - best_neg(j) - prior_slice(j);
    }
    return llr;
}

namespace {

DetectorOutput detect_with_lists(const mimo::Frame& frame, double sigma_n2, const LlrFrame& prior,
                                 const std::vector<CandidateList>& lists) {
    const mimo::FrameLayout& layout = frame.layout;
    const int nb = layout.bits_per_snapshot();
    LlrFrame out = LlrFrame::zeros(layout.codeword_length(), LlrOrder::Channel);
    for (int k = 0; k < layout.num_snapshots; ++k) {
        const Eigen::VectorXd slice = prior.values.segment(layout.bit_index(k, 0), nb);
        const Eigen::VectorXd llr =
            maxlog_extrinsic_llr(lists[k], frame.snapshots[k], layout.num_tx, sigma_n2, slice);
        out.values.segment(layout.bit_index(k, 0), nb) = llr;
    }
    return DetectorOutput{std::move(out)};
}

}  // namespace

DetectorOutput list_detect(const mimo::Frame& frame, double sigma_n2, const LlrFrame& prior,
                           const std::vector<std::vector<std::int8_t>>& anchors, int radius) {
    if (prior.order != LlrOrder::Channel) {
        throw std::invalid_argument("list_detect: prior must be in channel order");
    }
    if (static_cast<int>(anchors.size()) != frame.layout.num_snapshots) {
        throw std::invalid_argument("list_detect: one anchor per snapshot required");
    }
    std::vector<CandidateList> lists;
    lists.reserve(anchors.size());
    for (int k = 0; k < frame.layout.num_snapshots; ++k) {
        lists.push_back(hamming_ball_list(anchors[k], radius, k));
    }
    return detect_with_lists(frame, sigma_n2, prior, lists);
}

DetectorOutput full_list_detect(const mimo::Frame& frame, double sigma_n2, const LlrFrame& prior) {
    if (prior.order != LlrOrder::Channel) {
        throw std::invalid_argument("full_list_detect: prior must be in channel order");
    }
    const int nb = frame.layout.bits_per_snapshot();
    if (nb > 12) {
        throw std::invalid_argument("full_list_detect: full list exceeds the 4^num_tx <= 4096 guard");
    }
    const std::vector<std::int8_t> all_plus(nb, 1);
    std::vector<CandidateList> lists;
    lists.reserve(frame.layout.num_snapshots);
    for (int k = 0; k < frame.layout.num_snapshots; ++k) {
        lists.push_back(hamming_ball_list(all_plus, nb, k));
    }
    return detect_with_lists(frame, sigma_n2, prior, lists);
}

std::vector<std::vector<std::int8_t>> simplified_anchor(const LlrFrame& init_extrinsic,
                                                        const LlrFrame& prior,
                                                        const mimo::FrameLayout& layout) {
    if (init_extrinsic.order != LlrOrder::Channel || prior.order != LlrOrder::Channel) {
        throw std::invalid_argument("simplified_anchor: inputs must be in channel order");
    }
    if (init_extrinsic.size() != layout.codeword_length() || prior.size() != init_extrinsic.size()) {
        throw std::invalid_argument("simplified_anchor: length mismatch");
    }
    const int nb = layout.bits_per_snapshot();
    std::vector<std::vector<std::int8_t>> anchors(layout.num_snapshots, std::vector<std::int8_t>(nb));
    for (int k = 0; k < layout.num_snapshots; ++k) {
        for (int j = 0; j < nb; ++j) {
            const double combined =
                init_extrinsic.values(layout.bit_index(k, j)) + prior.values(layout.bit_index(k, j));
            anchors[k][j] = combined >= 0.0 ? 1 : -1;
        }
    }
    return anchors;
}

}  // namespace sdrturbo::det
