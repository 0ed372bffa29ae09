#include "sdrturbo/mimo.hpp"

#include <cmath>
#include <stdexcept>

namespace sdrturbo::mimo {

void FrameLayout::validate() const {
    if (num_tx <= 0 || num_rx <= 0 || num_snapshots <= 0) {
        throw std::invalid_argument("FrameLayout: dimensions must be positive");
    }
}

Eigen::MatrixXd real_expand(const Eigen::MatrixXcd& Hc) {
    const auto nr = Hc.rows();
    const auto nt = Hc.cols();
    Eigen::MatrixXd H(2 * nr, 2 * nt);
    H.topLeftCorner(nr, nt) = Hc.real();
    H.topRightCorner(nr, nt) = -Hc.imag();
    H.bottomLeftCorner(nr, nt) = Hc.imag();
    H.bottomRightCorner(nr, nt) = Hc.real();
    return H;
}

Eigen::VectorXd real_stack(const Eigen::VectorXcd& v) {
    Eigen::VectorXd out(2 * v.size());
    out.head(v.size()) = v.real();
    out.tail(v.size()) = v.imag();
    return out;
}

RealSnapshot complex_to_real(const Eigen::MatrixXcd& Hc, const Eigen::VectorXcd& yc, int index) {
    if (yc.size() != Hc.rows()) {
        throw std::invalid_argument("complex_to_real: received vector length must match channel rows");
    }
    return RealSnapshot{real_stack(yc), real_expand(Hc), index};
}

bool has_real_expansion_structure(const Eigen::MatrixXd& H, double tol) {
    if (H.rows() % 2 != 0 || H.cols() % 2 != 0) return false;
    const auto nr = H.rows() / 2;
    const auto nt = H.cols() / 2;
    const double re_err = (H.topLeftCorner(nr, nt) - H.bottomRightCorner(nr, nt)).cwiseAbs().maxCoeff();
    const double im_err = (H.topRightCorner(nr, nt) + H.bottomLeftCorner(nr, nt)).cwiseAbs().maxCoeff();
    return re_err <= tol && im_err <= tol;
}

Eigen::VectorXd map_bits_to_symbols(const std::vector<std::uint8_t>& coded_bits, int num_tx) {
    if (static_cast<int>(coded_bits.size()) != 2 * num_tx) {
        throw std::invalid_argument("map_bits_to_symbols: expected 2*num_tx bits");
    }
    Eigen::VectorXd s(2 * num_tx);
    for (int i = 0; i < num_tx; ++i) {
        const std::uint8_t re_bit = coded_bits[2 * i];
        const std::uint8_t im_bit = coded_bits[2 * i + 1];
        if (re_bit > 1 || im_bit > 1) {
            throw std::invalid_argument("map_bits_to_symbols: bits must be 0 or 1");
        }
        s(i) = 1.0 - 2.0 * re_bit;
        s(num_tx + i) = 1.0 - 2.0 * im_bit;
    }
    return s;
}

std::vector<std::uint8_t> map_symbols_to_bits(const Eigen::VectorXd& s, int num_tx) {
    if (s.size() != 2 * num_tx) {
        throw std::invalid_argument("map_symbols_to_bits: expected length 2*num_tx");
    }
    std::vector<std::uint8_t> bits(2 * num_tx);
    for (int i = 0; i < num_tx; ++i) {
        bits[2 * i] = s(i) > 0.0 ? 0 : 1;
        bits[2 * i + 1] = s(num_tx + i) > 0.0 ? 0 : 1;
    }
    return bits;
}

Frame generate_frame(const FrameLayout& layout, std::uint64_t rng_seed, double sigma_n2,
                     const std::vector<std::uint8_t>& coded_bits) {
    layout.validate();
    if (sigma_n2 <= 0.0) {
        throw std::invalid_argument("generate_frame: sigma_n2 must be positive");
    }
    if (static_cast<int>(coded_bits.size()) != layout.codeword_length()) {
        throw std::invalid_argument("generate_frame: coded bit count must equal 2*num_tx*num_snapshots");
    }

    Prng channel_rng = Prng::derive(rng_seed, {Prng::tag(StreamId::Channel)});
    Prng noise_rng = Prng::derive(rng_seed, {Prng::tag(StreamId::Noise)});
    const double gain_std = std::sqrt(0.5);  // unit-variance complex entries
    const double noise_std = std::sqrt(sigma_n2);

    Frame frame{layout, {}};
    frame.snapshots.reserve(layout.num_snapshots);
    std::vector<std::uint8_t> slice(layout.bits_per_snapshot());
    for (int k = 0; k < layout.num_snapshots; ++k) {
        Eigen::MatrixXcd Hc(layout.num_rx, layout.num_tx);
        for (int r = 0; r < layout.num_rx; ++r) {
            for (int c = 0; c < layout.num_tx; ++c) {
                Hc(r, c) = std::complex<double>(gain_std * channel_rng.normal(),
                                                gain_std * channel_rng.normal());
            }
        }
        RealSnapshot snap;
        snap.index = k;
        snap.H = real_expand(Hc);

        for (int j = 0; j < layout.bits_per_snapshot(); ++j) {
            slice[j] = coded_bits[layout.bit_index(k, j)];
        }
        const Eigen::VectorXd s = map_bits_to_symbols(slice, layout.num_tx);

        Eigen::VectorXd noise(2 * layout.num_rx);
        for (int r = 0; r < 2 * layout.num_rx; ++r) noise(r) = noise_std * noise_rng.normal();
        snap.y = snap.H * s + noise;
        frame.snapshots.push_back(std::move(snap));
    }
    return frame;
}

double sigma_n2_from_snr_db(double snr_db, int num_tx) {
    // SNR = Nt*Es/(2*sigma^2) with Es = 2 reduces to Nt/sigma^2.
    return num_tx * std::pow(10.0, -snr_db / 10.0);
}

double snr_db_from_sigma_n2(double sigma_n2, int num_tx) {
    return 10.0 * std::log10(num_tx / sigma_n2);
}

}  // namespace sdrturbo::mimo
