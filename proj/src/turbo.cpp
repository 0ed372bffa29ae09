#include "sdrturbo/turbo.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sdrturbo/prng.hpp"

namespace sdrturbo::turbo {

Interleaver::Interleaver(int n) : perm_(n), inv_(n) {
    std::iota(perm_.begin(), perm_.end(), 0);
    std::iota(inv_.begin(), inv_.end(), 0);
}

Interleaver Interleaver::random(int n, std::uint64_t seed) {
    Interleaver pi(n);
    Prng rng = Prng::derive(seed, {Prng::tag(StreamId::Interleaver)});
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(pi.perm_[i], pi.perm_[j]);
    }
    for (int i = 0; i < n; ++i) pi.inv_[pi.perm_[i]] = i;
    return pi;
}

LlrFrame Interleaver::interleave(const LlrFrame& decoder_order) const {
    if (decoder_order.order != LlrOrder::Decoder) {
        throw std::invalid_argument("interleave: expected decoder-order input");
    }
    if (decoder_order.size() != size()) throw std::invalid_argument("interleave: length mismatch");
    LlrFrame out = LlrFrame::zeros(size(), LlrOrder::Channel);
    for (int i = 0; i < size(); ++i) out.values(i) = decoder_order.values(perm_[i]);
    return out;
}

LlrFrame Interleaver::deinterleave(const LlrFrame& channel_order) const {
    if (channel_order.order != LlrOrder::Channel) {
        throw std::invalid_argument("deinterleave: expected channel-order input");
    }
    if (channel_order.size() != size()) throw std::invalid_argument("deinterleave: length mismatch");
    LlrFrame out = LlrFrame::zeros(size(), LlrOrder::Decoder);
    for (int i = 0; i < size(); ++i) out.values(perm_[i]) = channel_order.values(i);
    return out;
}

std::vector<std::uint8_t> Interleaver::interleave_bits(const std::vector<std::uint8_t>& decoder_order) const {
    if (static_cast<int>(decoder_order.size()) != size()) {
        throw std::invalid_argument("interleave_bits: length mismatch");
    }
    std::vector<std::uint8_t> out(decoder_order.size());
    for (int i = 0; i < size(); ++i) out[i] = decoder_order[perm_[i]];
    return out;
}

std::vector<std::uint8_t> Interleaver::deinterleave_bits(const std::vector<std::uint8_t>& channel_order) const {
    if (static_cast<int>(channel_order.size()) != size()) {
        throw std::invalid_argument("deinterleave_bits: length mismatch");
    }
    std::vector<std::uint8_t> out(channel_order.size());
    for (int i = 0; i < size(); ++i) out[perm_[i]] = channel_order[i];
    return out;
}

LlrFrame clip_llr(const LlrFrame& frame, double clip) {
    if (clip <= 0.0) throw std::invalid_argument("clip_llr: clip must be positive");
    return LlrFrame{frame.values.cwiseMax(-clip).cwiseMin(clip), frame.order};
}

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::MultiSdr: return "multi-sdr";
        case Scheme::SingleSdr: return "single-sdr";
        case Scheme::FullList: return "full-list";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "multi-sdr") return Scheme::MultiSdr;
    if (name == "single-sdr") return Scheme::SingleSdr;
    if (name == "full-list") return Scheme::FullList;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::vector<ldpc::FsConstraint> remap_to_channel_order(const std::vector<ldpc::FsConstraint>& fs,
                                                       const Interleaver& interleaver) {
    std::vector<ldpc::FsConstraint> out;
    out.reserve(fs.size());
    for (const auto& row : fs) {
        ldpc::FsConstraint mapped;
        mapped.check_index = row.check_index;
        for (int v : row.in_set) mapped.in_set.push_back(interleaver.channel_pos(v));
        for (int v : row.out_set) mapped.out_set.push_back(interleaver.channel_pos(v));
        out.push_back(std::move(mapped));
    }
    return out;
}

LinkSetup make_link_setup(const ldpc::ParityCheckMatrix& code, Interleaver interleaver) {
    if (interleaver.size() != code.var_count()) {
        throw std::invalid_argument("make_link_setup: interleaver length must equal codeword length");
    }
    LinkSetup setup{code, std::move(interleaver), {}};
    setup.fs_channel = remap_to_channel_order(ldpc::enumerate_fs_constraints(code), setup.interleaver);
    return setup;
}

IterationTrace run_turbo(const mimo::Frame& frame, const LinkSetup& setup, const TurboConfig& cfg,
                         double sigma_n2, const std::vector<std::uint8_t>* truth_codeword) {
    const mimo::FrameLayout& layout = frame.layout;
    const int n = layout.codeword_length();
    if (setup.code.var_count() != n) {
        throw std::invalid_argument("run_turbo: code/frame dimension mismatch");
    }
    if (cfg.max_turbo_iters < 1 || cfg.hamming_radius < 1) {
        throw std::invalid_argument("run_turbo: iterations and radius must be >= 1");
    }

    IterationTrace trace;
    LlrFrame det_prior = LlrFrame::zeros(n, LlrOrder::Channel);  // first iteration: no prior
    LlrFrame init_extrinsic;                                     // single-SDR anchor source
    sdp::SolverState sdp_state;

    for (int it = 1; it <= cfg.max_turbo_iters; ++it) {
        IterationRecord rec;
        rec.iteration = it;
        if (cfg.record_llrs) rec.detector_prior = det_prior;

        det::DetectorOutput det_out;
        if (cfg.scheme == Scheme::FullList) {
            det_out = det::full_list_detect(frame, sigma_n2, det_prior);
        } else if (cfg.scheme == Scheme::MultiSdr || it == 1) {
            const sdp::BlockSdpProblem problem =
                det::assemble_joint_map_sdr(frame, det_prior, sigma_n2, setup.fs_channel);
            const sdp::SdpSolution sol = sdp::solve(problem, cfg.sdp, &sdp_state);
            rec.sdp_iterations = sol.iterations;
            rec.sdp_converged = sol.status == sdp::SolveStatus::Converged;
            // a maxiter iterate still gets rounded: a degraded anchor beats
            // aborting the frame mid-sweep
            const auto anchors = det::round_solution(sol, layout);
            det_out = det::list_detect(frame, sigma_n2, det_prior, anchors, cfg.hamming_radius);
        } else {
            const auto anchors = det::simplified_anchor(init_extrinsic, det_prior, layout);
            det_out = det::list_detect(frame, sigma_n2, det_prior, anchors, cfg.hamming_radius);
        }

        const LlrFrame det_extrinsic = clip_llr(det_out.extrinsic, cfg.llr_clip);
        if (it == 1) init_extrinsic = det_extrinsic;
        if (cfg.record_llrs) rec.detector_extrinsic = det_extrinsic;

        const LlrFrame dec_prior = setup.interleaver.deinterleave(det_extrinsic);
        if (cfg.record_llrs) rec.decoder_prior = dec_prior;
        ldpc::SpaResult dec = ldpc::spa_decode(setup.code, dec_prior, cfg.decoder_iters);
        if (cfg.record_llrs) rec.decoder_extrinsic = dec.extrinsic;

        rec.parity_ok = dec.parity_ok;
        rec.decoder_iterations = dec.iterations;
        if (truth_codeword != nullptr) {
            long errs = 0;
            for (int v = 0; v < n; ++v) errs += dec.hard_bits[v] != (*truth_codeword)[v];
            rec.bit_errors = errs;
        }
        rec.hard_bits = std::move(dec.hard_bits);
        trace.iterations.push_back(std::move(rec));

        if (dec.parity_ok) {
            trace.decoded_ok = true;
            break;
        }
        det_prior = setup.interleaver.interleave(dec.extrinsic);
    }
    return trace;
}

std::string trace_to_jsonl(const IterationTrace& trace) {
    std::ostringstream os;
    for (const auto& rec : trace.iterations) {
        nlohmann::json j;
        j["iteration"] = rec.iteration;
        j["parity_ok"] = rec.parity_ok;
        j["bit_errors"] = rec.bit_errors;
        j["decoder_iterations"] = rec.decoder_iterations;
        j["sdp_iterations"] = rec.sdp_iterations;
        j["sdp_converged"] = rec.sdp_converged;
        j["hard_bits"] = rec.hard_bits;
        auto put = [&](const char* key, const std::optional<LlrFrame>& llr) {
            if (llr) j[key] = std::vector<double>(llr->values.begin(), llr->values.end());
        };
        put("detector_prior", rec.detector_prior);
        put("detector_extrinsic", rec.detector_extrinsic);
        put("decoder_prior", rec.decoder_prior);
        put("decoder_extrinsic", rec.decoder_extrinsic);
        os << j.dump() << '\n';
    }
    return os.str();
}

}  // namespace sdrturbo::turbo
