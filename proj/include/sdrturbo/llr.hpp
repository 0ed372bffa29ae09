#pragma once

#include <Eigen/Dense>

namespace sdrturbo {

// Order tag for LLR vectors exchanged between detector and decoder.
// Channel order follows the bit-to-antenna mapping; decoder order is the
// codeword order seen by the LDPC code. The interleaver converts between them.
enum class LlrOrder { Channel, Decoder };

// Sign convention used throughout: positive LLR <=> coded bit c = 0
// <=> polarized bit b = +1 (b = 1 - 2c).
struct LlrFrame {
    Eigen::VectorXd values;
    LlrOrder order = LlrOrder::Channel;

    static LlrFrame zeros(int n, LlrOrder ord) {
        return LlrFrame{Eigen::VectorXd::Zero(n), ord};
    }
    int size() const { return static_cast<int>(values.size()); }
};

}  // namespace sdrturbo
