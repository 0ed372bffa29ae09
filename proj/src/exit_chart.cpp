#include "sdrturbo/exit_chart.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sdrturbo/detector.hpp"
#include "sdrturbo/sdp.hpp"

namespace sdrturbo::exitchart {

LlrFrame gen_apriori(const std::vector<std::int8_t>& polarized_bits, double sigma_a, Prng& rng) {
    if (sigma_a < 0.0) throw std::invalid_argument("gen_apriori: sigma_a must be nonnegative");
    const int n = static_cast<int>(polarized_bits.size());
    LlrFrame out = LlrFrame::zeros(n, LlrOrder::Channel);
    const double mean_scale = 0.5 * sigma_a * sigma_a;
    for (int i = 0; i < n; ++i) {
        out.values(i) = mean_scale * polarized_bits[i] + sigma_a * rng.normal();
    }
    return out;
}

MiEstimate mi_histogram(const Eigen::VectorXd& llrs, const std::vector<std::int8_t>& bits,
                        int n_bins) {
    if (llrs.size() != static_cast<Eigen::Index>(bits.size())) {
        throw std::invalid_argument("mi_histogram: length mismatch");
    }
    if (n_bins < 2) throw std::invalid_argument("mi_histogram: need at least 2 bins");

    MiEstimate est;
    est.bins = n_bins;
    est.samples = static_cast<long>(llrs.size());
    if (est.samples == 0) {
        est.degenerate = true;
        return est;
    }

    const double lmax = llrs.cwiseAbs().maxCoeff();
    long count_pos = 0;
    for (auto b : bits) count_pos += b > 0;
    const long count_neg = est.samples - count_pos;
    if (lmax == 0.0 || count_pos == 0 || count_neg == 0) {
        est.degenerate = true;
        return est;
    }

    const double width = 2.0 * lmax / n_bins;
    std::vector<double> hist_pos(n_bins, 0.0), hist_neg(n_bins, 0.0);
    for (Eigen::Index i = 0; i < llrs.size(); ++i) {
        int bin = static_cast<int>((llrs(i) + lmax) / width);
        bin = std::clamp(bin, 0, n_bins - 1);
        (bits[i] > 0 ? hist_pos : hist_neg)[bin] += 1.0;
    }
    for (auto& h : hist_pos) h /= static_cast<double>(count_pos);
    for (auto& h : hist_neg) h /= static_cast<double>(count_neg);

    double mi = 0.0;
    for (int bin = 0; bin < n_bins; ++bin) {
        const double mix = 0.5 * (hist_pos[bin] + hist_neg[bin]);
        if (hist_pos[bin] > 0.0) mi += 0.5 * hist_pos[bin] * std::log2(hist_pos[bin] / mix);
        if (hist_neg[bin] > 0.0) mi += 0.5 * hist_neg[bin] * std::log2(hist_neg[bin] / mix);
    }
    est.value = std::clamp(mi, 0.0, 1.0);
    return est;
}

namespace {

// log2(1 + e^{-x}) without overflow
double softplus_neg_log2(double x) {
    if (x > 0.0) return std::log1p(std::exp(-x)) / M_LN2;
    return (-x + std::log1p(std::exp(x))) / M_LN2;
}

}  // namespace

double j_function(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("j_function: sigma must be nonnegative");
    if (sigma == 0.0) return 0.0;
    // E over L = sigma^2/2 + sigma*Z of 1 - log2(1 + e^{-L}), Z standard normal
    const double mean = 0.5 * sigma * sigma;
    const int steps = 4000;
    const double zmax = 10.0;
    const double dz = 2.0 * zmax / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double z = -zmax + i * dz;
        const double weight = (i == 0 || i == steps) ? 0.5 : 1.0;
        const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        acc += weight * density * softplus_neg_log2(mean + sigma * z);
    }
    return std::clamp(1.0 - acc * dz, 0.0, 1.0);
}

double j_inverse(double i_target) {
    if (i_target < 0.0 || i_target >= 1.0) {
        throw std::invalid_argument("j_inverse: target must lie in [0, 1)");
    }
    if (i_target == 0.0) return 0.0;
    double lo = 1e-6, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (j_function(mid) < i_target ? lo : hi) = mid;
        if (hi - lo < 1e-10) break;
    }
    return 0.5 * (lo + hi);
}

std::vector<ExitPoint> exit_curve(const turbo::LinkSetup& setup, const ldpc::Generator& generator,
                                  const mimo::FrameLayout& layout, turbo::Scheme scheme,
                                  double snr_db, const std::vector<double>& i_a_grid, int frames,
                                  const turbo::TurboConfig& cfg, std::uint64_t seed) {
    if (frames < 1) throw std::invalid_argument("exit_curve: need at least one frame per point");
    const int n = layout.codeword_length();
    if (setup.code.var_count() != n) {
        throw std::invalid_argument("exit_curve: code/layout mismatch");
    }
    const double sigma_n2 = mimo::sigma_n2_from_snr_db(snr_db, layout.num_tx);

    std::vector<ExitPoint> points;
    points.reserve(i_a_grid.size());
    for (std::size_t pt = 0; pt < i_a_grid.size(); ++pt) {
        const double i_a = i_a_grid[pt];
        const double sigma_a = j_inverse(i_a);

        Eigen::VectorXd pooled_llrs(static_cast<Eigen::Index>(frames) * n);
        std::vector<std::int8_t> pooled_bits(static_cast<std::size_t>(frames) * n);
        for (int fr = 0; fr < frames; ++fr) {
            Prng msg_rng = Prng::derive(seed, {Prng::tag(StreamId::Message), pt, static_cast<std::uint64_t>(fr)});
            std::vector<std::uint8_t> msg(generator.k);
            for (auto& b : msg) b = msg_rng.coin();
            const std::vector<std::uint8_t> codeword = generator.encode(msg);
            const std::vector<std::uint8_t> channel_bits = setup.interleaver.interleave_bits(codeword);

            std::vector<std::int8_t> polarized(n);
            for (int i = 0; i < n; ++i) polarized[i] = channel_bits[i] ? -1 : 1;

            const std::uint64_t frame_seed =
                Prng::derive(seed, {pt, static_cast<std::uint64_t>(fr)}).next_u64();
            const mimo::Frame frame = mimo::generate_frame(layout, frame_seed, sigma_n2, channel_bits);

            Prng prior_rng =
                Prng::derive(seed, {Prng::tag(StreamId::ExitPrior), pt, static_cast<std::uint64_t>(fr)});
            const LlrFrame prior = gen_apriori(polarized, sigma_a, prior_rng);

            det::DetectorOutput out;
            if (scheme == turbo::Scheme::FullList) {
                out = det::full_list_detect(frame, sigma_n2, prior);
            } else {
                const sdp::BlockSdpProblem problem =
                    det::assemble_joint_map_sdr(frame, prior, sigma_n2, setup.fs_channel);
                const sdp::SdpSolution sol = sdp::solve(problem, cfg.sdp);
                const auto anchors = det::round_solution(sol, layout);
                out = det::list_detect(frame, sigma_n2, prior, anchors, cfg.hamming_radius);
            }
            const LlrFrame clipped = turbo::clip_llr(out.extrinsic, cfg.llr_clip);

            pooled_llrs.segment(static_cast<Eigen::Index>(fr) * n, n) = clipped.values;
            std::copy(polarized.begin(), polarized.end(), pooled_bits.begin() + static_cast<long>(fr) * n);
        }

        const MiEstimate mi = mi_histogram(pooled_llrs, pooled_bits);
        points.push_back(ExitPoint{i_a, mi.value, snr_db, turbo::scheme_name(scheme), mi.samples});
    }
    return points;
}

std::string exit_csv(const std::vector<ExitPoint>& points) {
    std::ostringstream os;
    os << "i_a,i_e,snr_db,scheme,samples\n";
    for (const auto& p : points) {
        os << p.i_a << ',' << p.i_e << ',' << p.snr_db << ',' << p.scheme << ',' << p.samples << '\n';
    }
    return os.str();
}

}  // namespace sdrturbo::exitchart
