#include "sdrturbo/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sdrturbo/prng.hpp"

namespace sdrturbo::ldpc {

ParityCheckMatrix::ParityCheckMatrix(int n, int m, std::vector<std::vector<int>> check_vars)
    : n_(n), m_(m), check_vars_(std::move(check_vars)), var_checks_(n) {
    if (n <= 0 || m <= 0 || static_cast<int>(check_vars_.size()) != m) {
        throw std::invalid_argument("ParityCheckMatrix: inconsistent dimensions");
    }
    for (int c = 0; c < m_; ++c) {
        std::set<int> seen;
        for (int v : check_vars_[c]) {
            if (v < 0 || v >= n_) throw std::invalid_argument("ParityCheckMatrix: variable index out of range");
            if (!seen.insert(v).second) throw std::invalid_argument("ParityCheckMatrix: repeated edge");
            var_checks_[v].push_back(c);
        }
        std::sort(check_vars_[c].begin(), check_vars_[c].end());
    }
}

int ParityCheckMatrix::max_check_degree() const {
    int d = 0;
    for (const auto& row : check_vars_) d = std::max<int>(d, row.size());
    return d;
}

int ParityCheckMatrix::max_var_degree() const {
    int d = 0;
    for (const auto& col : var_checks_) d = std::max<int>(d, col.size());
    return d;
}

std::size_t ParityCheckMatrix::edge_count() const {
    std::size_t e = 0;
    for (const auto& row : check_vars_) e += row.size();
    return e;
}

bool ParityCheckMatrix::syndrome_ok(const std::vector<std::uint8_t>& bits) const {
    if (static_cast<int>(bits.size()) != n_) {
        throw std::invalid_argument("syndrome_ok: bit vector length mismatch");
    }
    for (const auto& row : check_vars_) {
        unsigned parity = 0;
        for (int v : row) parity ^= bits[v] & 1u;
        if (parity) return false;
    }
    return true;
}

bool ParityCheckMatrix::four_cycle_free() const {
    std::set<std::pair<int, int>> used;
    for (int v = 0; v < n_; ++v) {
        const auto& cks = var_checks_[v];
        for (std::size_t a = 0; a + 1 < cks.size(); ++a) {
            for (std::size_t b = a + 1; b < cks.size(); ++b) {
                auto key = std::minmax(cks[a], cks[b]);
                if (!used.insert({key.first, key.second}).second) return false;
            }
        }
    }
    return true;
}

namespace {

// One pass of the socket-filling construction. Returns empty on deadlock.
std::vector<std::vector<int>> try_construct(int n, int m, int col_weight, int row_weight,
                                            bool avoid_four_cycles, Prng& rng) {
    std::vector<std::vector<int>> check_vars(m);
    std::vector<int> capacity(m, row_weight);
    std::vector<std::uint8_t> pair_used(static_cast<std::size_t>(m) * m, 0);
    std::vector<int> pick(col_weight);

    auto pair_flag = [&](int a, int b) -> std::uint8_t& {
        return pair_used[static_cast<std::size_t>(std::min(a, b)) * m + std::max(a, b)];
    };

    for (int v = 0; v < n; ++v) {
        bool placed = false;
        for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
            // capacity-weighted draw of col_weight distinct checks
            int total = 0;
            for (int c = 0; c < m; ++c) total += capacity[c];
            bool ok = true;
            for (int j = 0; j < col_weight && ok; ++j) {
                if (total <= 0) {
                    ok = false;
                    break;
                }
                int r = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(total)));
                int chosen = -1;
                for (int c = 0; c < m; ++c) {
                    bool taken = false;
                    for (int q = 0; q < j; ++q) taken |= (pick[q] == c);
                    if (taken) continue;
                    if (r < capacity[c]) {
                        chosen = c;
                        break;
                    }
                    r -= capacity[c];
                }
                if (chosen < 0) {
                    ok = false;
                    break;
                }
                pick[j] = chosen;
                total -= capacity[chosen];
            }
            if (!ok) continue;
            if (avoid_four_cycles) {
                for (int a = 0; a < col_weight && ok; ++a) {
                    for (int b = a + 1; b < col_weight && ok; ++b) {
                        if (pair_flag(pick[a], pick[b])) ok = false;
                    }
                }
            }
            if (!ok) continue;
            for (int a = 0; a < col_weight; ++a) {
                check_vars[pick[a]].push_back(v);
                --capacity[pick[a]];
                if (avoid_four_cycles) {
                    for (int b = a + 1; b < col_weight; ++b) pair_flag(pick[a], pick[b]) = 1;
                }
            }
            placed = true;
        }
        if (!placed) return {};
    }
    return check_vars;
}

}  // namespace

ParityCheckMatrix build_pcm(int n, int k, int col_weight, std::uint64_t seed) {
    const int m = n - k;
    if (n <= 0 || k <= 0 || k >= n || col_weight <= 0 || col_weight > m) {
        throw std::invalid_argument("build_pcm: invalid code parameters");
    }
    if ((static_cast<long long>(n) * col_weight) % m != 0) {
        throw std::invalid_argument("build_pcm: n*col_weight must be divisible by n-k");
    }
    const int row_weight = static_cast<int>(static_cast<long long>(n) * col_weight / m);

    Prng rng = Prng::derive(seed, {Prng::tag(StreamId::Code)});
    for (int restart = 0; restart < 300; ++restart) {
        auto adj = try_construct(n, m, col_weight, row_weight, /*avoid_four_cycles=*/true, rng);
        if (!adj.empty()) return ParityCheckMatrix(n, m, std::move(adj));
    }
    // Dense toy profiles (e.g. more columns than check pairs) cannot be
    // 4-cycle free; keep regularity and give up on girth.
    for (int restart = 0; restart < 300; ++restart) {
        auto adj = try_construct(n, m, col_weight, row_weight, /*avoid_four_cycles=*/false, rng);
        if (!adj.empty()) return ParityCheckMatrix(n, m, std::move(adj));
    }
    throw std::runtime_error("build_pcm: construction failed after retries");
}

namespace {

using BitRow = std::vector<std::uint64_t>;

int words_for(int n) { return (n + 63) / 64; }

bool get_bit(const BitRow& row, int j) { return (row[j >> 6] >> (j & 63)) & 1u; }

void flip_bit(BitRow& row, int j) { row[j >> 6] ^= (std::uint64_t{1} << (j & 63)); }

void xor_rows(BitRow& dst, const BitRow& src) {
    for (std::size_t w = 0; w < dst.size(); ++w) dst[w] ^= src[w];
}

}  // namespace

Generator derive_generator(const ParityCheckMatrix& H) {
    const int n = H.var_count();
    const int m = H.check_count();
    const int nw = words_for(n);

    std::vector<BitRow> rows(m, BitRow(nw, 0));
    for (int c = 0; c < m; ++c) {
        for (int v : H.check_vars(c)) flip_bit(rows[c], v);
    }

    // Row-reduce, recording pivot columns.
    std::vector<int> pivot_cols;
    std::vector<int> pivot_row_of_col(n, -1);
    int r = 0;
    for (int col = 0; col < n && r < m; ++col) {
        int pivot = -1;
        for (int i = r; i < m; ++i) {
            if (get_bit(rows[i], col)) {
                pivot = i;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(rows[r], rows[pivot]);
        for (int i = 0; i < m; ++i) {
            if (i != r && get_bit(rows[i], col)) xor_rows(rows[i], rows[r]);
        }
        pivot_row_of_col[col] = r;
        pivot_cols.push_back(col);
        ++r;
    }
    const int rank = r;
    const int k = n - rank;

    Generator gen;
    gen.n = n;
    gen.rank = rank;
    gen.k = k;
    gen.info_positions.reserve(k);
    for (int col = 0; col < n; ++col) {
        if (pivot_row_of_col[col] < 0) gen.info_positions.push_back(col);
    }

    gen.rows.assign(k, std::vector<std::uint8_t>(n, 0));
    for (int i = 0; i < k; ++i) {
        const int free_col = gen.info_positions[i];
        gen.rows[i][free_col] = 1;
        // pivot variable p solves to the free column's coefficient in its row
        for (int p = 0; p < static_cast<int>(pivot_cols.size()); ++p) {
            if (get_bit(rows[p], free_col)) gen.rows[i][pivot_cols[p]] = 1;
        }
    }
    return gen;
}

std::vector<std::uint8_t> Generator::encode(const std::vector<std::uint8_t>& msg) const {
    if (static_cast<int>(msg.size()) != k) {
        throw std::invalid_argument("encode: message length must equal k");
    }
    std::vector<std::uint8_t> cw(n, 0);
    for (int i = 0; i < k; ++i) {
        if (!msg[i]) continue;
        for (int j = 0; j < n; ++j) cw[j] ^= rows[i][j];
    }
    return cw;
}

SpaResult spa_decode(const ParityCheckMatrix& H, const LlrFrame& prior, int max_inner_iters) {
    if (prior.order != LlrOrder::Decoder) {
        throw std::invalid_argument("spa_decode: prior must be in decoder order");
    }
    const int n = H.var_count();
    if (prior.size() != n) throw std::invalid_argument("spa_decode: prior length mismatch");

    static constexpr double kMsgClip = 30.0;
    static constexpr double kTanhCap = 1.0 - 1e-15;
    auto clip = [](double x) { return std::clamp(x, -kMsgClip, kMsgClip); };

    // flat edge storage, indexed per check
    const std::size_t edges = H.edge_count();
    std::vector<std::size_t> check_offset(H.check_count() + 1, 0);
    for (int c = 0; c < H.check_count(); ++c) {
        check_offset[c + 1] = check_offset[c] + H.check_vars(c).size();
    }
    std::vector<double> var_to_check(edges), check_to_var(edges, 0.0);
    for (int c = 0; c < H.check_count(); ++c) {
        const auto& vars = H.check_vars(c);
        for (std::size_t j = 0; j < vars.size(); ++j) {
            var_to_check[check_offset[c] + j] = clip(prior.values(vars[j]));
        }
    }

    Eigen::VectorXd total = prior.values;
    std::vector<std::uint8_t> hard(n, 0);
    bool parity_ok = false;
    int it = 0;
    std::vector<double> fwd, bwd;

    while (it < max_inner_iters && !parity_ok) {
        ++it;
        // check-node update: leave-one-out tanh products via prefix/suffix
        for (int c = 0; c < H.check_count(); ++c) {
            const std::size_t base = check_offset[c];
            const std::size_t deg = check_offset[c + 1] - base;
            if (deg == 0) continue;
            if (deg == 1) {
                // empty leave-one-out product: the check pins its only bit to 0
                check_to_var[base] = kMsgClip;
                continue;
            }
            fwd.assign(deg, 0.0);
            bwd.assign(deg, 0.0);
            fwd[0] = std::tanh(0.5 * var_to_check[base]);
            bwd[deg - 1] = std::tanh(0.5 * var_to_check[base + deg - 1]);
            for (std::size_t j = 1; j < deg; ++j) {
                fwd[j] = fwd[j - 1] * std::tanh(0.5 * var_to_check[base + j]);
                bwd[deg - 1 - j] = bwd[deg - j] * std::tanh(0.5 * var_to_check[base + deg - 1 - j]);
            }
            for (std::size_t j = 0; j < deg; ++j) {
                double prod = 1.0;
                if (j > 0) prod *= fwd[j - 1];
                if (j + 1 < deg) prod *= bwd[j + 1];
                prod = std::clamp(prod, -kTanhCap, kTanhCap);
                check_to_var[base + j] = 2.0 * std::atanh(prod);
            }
        }

        // variable-node update and posterior
        total = prior.values;
        for (int c = 0; c < H.check_count(); ++c) {
            const auto& vars = H.check_vars(c);
            for (std::size_t j = 0; j < vars.size(); ++j) {
                total(vars[j]) += check_to_var[check_offset[c] + j];
            }
        }
        for (int c = 0; c < H.check_count(); ++c) {
            const auto& vars = H.check_vars(c);
            for (std::size_t j = 0; j < vars.size(); ++j) {
                var_to_check[check_offset[c] + j] =
                    clip(total(vars[j]) - check_to_var[check_offset[c] + j]);
            }
        }

        for (int v = 0; v < n; ++v) hard[v] = total(v) < 0.0 ? 1 : 0;
        parity_ok = H.syndrome_ok(hard);
    }

    SpaResult res;
    res.extrinsic = LlrFrame{total - prior.values, LlrOrder::Decoder};
    res.hard_bits = std::move(hard);
    res.parity_ok = parity_ok;
    res.iterations = it;
    return res;
}

std::vector<FsConstraint> enumerate_fs_constraints(const ParityCheckMatrix& H) {
    constexpr int kGuardBits = 15;  // 2^(deg-1) subsets per check
    std::vector<FsConstraint> rows;
    for (int c = 0; c < H.check_count(); ++c) {
        const auto& vars = H.check_vars(c);
        const int deg = static_cast<int>(vars.size());
        if (deg - 1 > kGuardBits) {
            throw std::runtime_error(
                "enumerate_fs_constraints: 2^(deg-1) rows exceed the enumeration guard; "
                "reduce the row degree of the code");
        }
        const unsigned full = 1u << deg;
        for (unsigned mask = 1; mask < full; ++mask) {
            if (__builtin_popcount(mask) % 2 == 0) continue;
            FsConstraint row;
            row.check_index = c;
            for (int j = 0; j < deg; ++j) {
                if (mask & (1u << j)) {
                    row.in_set.push_back(vars[j]);
                } else {
                    row.out_set.push_back(vars[j]);
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

double fs_violation(const FsConstraint& row, const Eigen::VectorXd& f) {
    double lhs = 0.0;
    for (int v : row.in_set) lhs += f(v);
    for (int v : row.out_set) lhs -= f(v);
    return lhs - (static_cast<double>(row.in_set.size()) - 1.0);
}

void write_alist(const ParityCheckMatrix& H, std::ostream& os) {
    const int n = H.var_count();
    const int m = H.check_count();
    const int max_vd = H.max_var_degree();
    const int max_cd = H.max_check_degree();
    os << n << ' ' << m << '\n';
    os << max_vd << ' ' << max_cd << '\n';
    for (int v = 0; v < n; ++v) os << H.var_degree(v) << (v + 1 < n ? ' ' : '\n');
    for (int c = 0; c < m; ++c) os << H.check_degree(c) << (c + 1 < m ? ' ' : '\n');
    for (int v = 0; v < n; ++v) {
        const auto& cks = H.var_checks(v);
        for (int j = 0; j < max_vd; ++j) {
            os << (j < static_cast<int>(cks.size()) ? cks[j] + 1 : 0) << (j + 1 < max_vd ? ' ' : '\n');
        }
    }
    for (int c = 0; c < m; ++c) {
        const auto& vars = H.check_vars(c);
        for (int j = 0; j < max_cd; ++j) {
            os << (j < static_cast<int>(vars.size()) ? vars[j] + 1 : 0) << (j + 1 < max_cd ? ' ' : '\n');
        }
    }
}

ParityCheckMatrix read_alist(std::istream& is) {
    int n = 0, m = 0, max_vd = 0, max_cd = 0;
    if (!(is >> n >> m >> max_vd >> max_cd) || n <= 0 || m <= 0) {
        throw std::runtime_error("read_alist: bad header");
    }
    std::vector<int> var_deg(n), check_deg(m);
    long long var_edges = 0, check_edges = 0;
    for (int v = 0; v < n; ++v) {
        if (!(is >> var_deg[v])) throw std::runtime_error("read_alist: truncated degree list");
        var_edges += var_deg[v];
    }
    for (int c = 0; c < m; ++c) {
        if (!(is >> check_deg[c])) throw std::runtime_error("read_alist: truncated degree list");
        check_edges += check_deg[c];
    }
    if (var_edges != check_edges) throw std::runtime_error("read_alist: inconsistent degree lists");

    std::vector<long long> tokens;
    long long x;
    while (is >> x) tokens.push_back(x);

    // Adjacency rows may be zero-padded to the max degree or written bare.
    const long long padded = static_cast<long long>(n) * max_vd + static_cast<long long>(m) * max_cd;
    const long long bare = var_edges + check_edges;
    bool is_padded;
    if (static_cast<long long>(tokens.size()) == padded) {
        is_padded = true;
    } else if (static_cast<long long>(tokens.size()) == bare) {
        is_padded = false;
    } else {
        throw std::runtime_error("read_alist: adjacency token count matches neither padded nor bare layout");
    }

    std::size_t pos = 0;
    auto take = [&](int count, int pad_to) {
        std::vector<int> out;
        for (int j = 0; j < count; ++j) {
            const long long t = tokens[pos++];
            if (t <= 0) throw std::runtime_error("read_alist: expected 1-indexed entry");
            out.push_back(static_cast<int>(t - 1));
        }
        if (is_padded) {
            for (int j = count; j < pad_to; ++j) {
                if (tokens[pos++] != 0) throw std::runtime_error("read_alist: expected zero padding");
            }
        }
        return out;
    };

    for (int v = 0; v < n; ++v) take(var_deg[v], max_vd);  // reconstructed from check rows
    std::vector<std::vector<int>> check_vars(m);
    for (int c = 0; c < m; ++c) check_vars[c] = take(check_deg[c], max_cd);
    return ParityCheckMatrix(n, m, std::move(check_vars));
}

void write_alist_file(const ParityCheckMatrix& H, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_alist_file: cannot open " + path);
    write_alist(H, os);
}

ParityCheckMatrix read_alist_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_alist_file: cannot open " + path);
    return read_alist(is);
}

}  // namespace sdrturbo::ldpc
