#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdrturbo/ldpc.hpp"
#include "sdrturbo/llr.hpp"
#include "sdrturbo/mimo.hpp"
#include "sdrturbo/prng.hpp"
#include "sdrturbo/turbo.hpp"

namespace sdrturbo::exitchart {

struct MiEstimate {
    double value = 0.0;  // bits, in [0, 1]
    int bins = 0;
    long samples = 0;
    bool degenerate = false;  // all-equal LLRs or a missing bit class
};

// Synthetic consistent-Gaussian prior: L ~ N(sigma_a^2/2 * b, sigma_a^2).
LlrFrame gen_apriori(const std::vector<std::int8_t>& polarized_bits, double sigma_a, Prng& rng);

// Histogram estimate of I(L; B) from conditional LLR densities with
// symmetric bin edges over the observed range, equal bit priors.
MiEstimate mi_histogram(const Eigen::VectorXd& llrs, const std::vector<std::int8_t>& bits,
                        int n_bins = 64);

// Mutual information of the consistent-Gaussian LLR model at std sigma,
// and its inverse (monotone in sigma).
double j_function(double sigma);
double j_inverse(double i_target);

struct ExitPoint {
    double i_a = 0.0;
    double i_e = 0.0;
    double snr_db = 0.0;
    std::string scheme;
    long samples = 0;
};

// One detection pass per a-priori MI point: synthesize priors at J^{-1}(I_A),
// transmit random codewords, measure the MI of the clipped detector output.
// MultiSdr and SingleSdr coincide here (both are one joint MAP-SDR pass).
std::vector<ExitPoint> exit_curve(const turbo::LinkSetup& setup, const ldpc::Generator& generator,
                                  const mimo::FrameLayout& layout, turbo::Scheme scheme,
                                  double snr_db, const std::vector<double>& i_a_grid, int frames,
                                  const turbo::TurboConfig& cfg, std::uint64_t seed);

std::string exit_csv(const std::vector<ExitPoint>& points);

}  // namespace sdrturbo::exitchart
