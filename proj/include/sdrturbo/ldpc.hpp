#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdrturbo/llr.hpp"

namespace sdrturbo::ldpc {

// Sparse binary parity-check matrix kept as check/variable adjacency lists.
class ParityCheckMatrix {
public:
    ParityCheckMatrix(int n, int m, std::vector<std::vector<int>> check_vars);

    int var_count() const { return n_; }
    int check_count() const { return m_; }
    const std::vector<int>& check_vars(int check) const { return check_vars_[check]; }
    const std::vector<int>& var_checks(int var) const { return var_checks_[var]; }
    int check_degree(int check) const { return static_cast<int>(check_vars_[check].size()); }
    int var_degree(int var) const { return static_cast<int>(var_checks_[var].size()); }
    int max_check_degree() const;
    int max_var_degree() const;
    std::size_t edge_count() const;

    // True iff H*c^T = 0 over GF(2).
    bool syndrome_ok(const std::vector<std::uint8_t>& bits) const;

    // True iff no two columns share two common checks.
    bool four_cycle_free() const;

private:
    int n_;
    int m_;
    std::vector<std::vector<int>> check_vars_;
    std::vector<std::vector<int>> var_checks_;
};

// Gallager-style random regular construction. Column weight is exact; row
// weight is n*col_weight/m for every check. Retries avoid 4-cycles; profiles
// too dense for a 4-cycle-free assignment fall back to plain regularity.
ParityCheckMatrix build_pcm(int n, int k, int col_weight, std::uint64_t seed);

// Systematic generator derived by Gaussian elimination over GF(2).
// info_positions records the column permutation: message bits occupy those
// columns, so the systematic sub-block is an identity up to that permutation.
struct Generator {
    int n = 0;
    int k = 0;     // n - rank(H); smaller than n - m when H is rank deficient
    int rank = 0;  // rank of H
    std::vector<int> info_positions;              // size k
    std::vector<std::vector<std::uint8_t>> rows;  // k rows of length n

    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& msg) const;
};

Generator derive_generator(const ParityCheckMatrix& H);

struct SpaResult {
    LlrFrame extrinsic;  // decoder order; total posterior minus input prior
    std::vector<std::uint8_t> hard_bits;
    bool parity_ok = false;
    int iterations = 0;
};

// Log-domain sum-product decoding with the exact tanh-product check rule.
// Messages are clipped at +/-30 before the tanh to avoid saturation. Stops
// early once the hard decisions satisfy every check.
SpaResult spa_decode(const ParityCheckMatrix& H, const LlrFrame& prior, int max_inner_iters);

// One forbidden-set row: sum_{n in F} f_n - sum_{n in N_m \ F} f_n <= |F| - 1.
struct FsConstraint {
    int check_index = 0;
    std::vector<int> in_set;   // F, odd cardinality
    std::vector<int> out_set;  // N_m \ F
};

// All odd-cardinality subsets of every check: 2^(deg-1) rows per check.
// Degrees above 16 exceed the enumeration guard and raise an error.
std::vector<FsConstraint> enumerate_fs_constraints(const ParityCheckMatrix& H);

// Violation of one row at the point f (positive means violated).
double fs_violation(const FsConstraint& row, const Eigen::VectorXd& f);

inline bool syndrome_check(const ParityCheckMatrix& H, const std::vector<std::uint8_t>& bits) {
    return H.syndrome_ok(bits);
}

// alist interchange format (1-indexed, zero-padded adjacency rows).
void write_alist(const ParityCheckMatrix& H, std::ostream& os);
ParityCheckMatrix read_alist(std::istream& is);
void write_alist_file(const ParityCheckMatrix& H, const std::string& path);
ParityCheckMatrix read_alist_file(const std::string& path);

}  // namespace sdrturbo::ldpc
