#include "sdrturbo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sdrturbo/prng.hpp"

namespace sdrturbo::sim {

void SimConfig::validate() const {
    if (num_tx <= 0 || num_rx <= 0) throw std::invalid_argument("config: antenna counts must be positive");
    if (snr_grid_db.empty()) throw std::invalid_argument("config: snr grid is empty");
    if (hamming_radius < 1 || hamming_radius > 2 * num_tx) {
        throw std::invalid_argument("config: hamming_radius must lie in [1, 2*num_tx]");
    }
    if (llr_clip <= 0.0) throw std::invalid_argument("config: llr_clip must be positive");
    if (turbo_iters < 1 || decoder_iters < 1) throw std::invalid_argument("config: iteration counts must be >= 1");
    if (max_frames < 1) throw std::invalid_argument("config: max_frames must be >= 1");
    if (min_bit_errors < 0) throw std::invalid_argument("config: min_bit_errors must be >= 0");
    if (sdp_tol <= 0.0 || sdp_max_iters < 1) throw std::invalid_argument("config: bad sdp settings");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (alist_path.empty()) {
        if (code_n <= 0 || code_k <= 0 || code_k >= code_n) throw std::invalid_argument("config: bad code size");
        if (code_n % (2 * num_tx) != 0) {
            throw std::invalid_argument("config: codeword length must be divisible by 2*num_tx");
        }
    }
}

std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double a = 0.0, b = 0.0, step = 0.0;
        char c1 = 0, c2 = 0;
        std::istringstream is(text);
        if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0) {
            throw std::invalid_argument("snr grid: expected a:b:step");
        }
        for (double v = a; v <= b + 1e-9; v += step) grid.push_back(v);
    } else {
        std::istringstream is(text);
        std::string item;
        while (std::getline(is, item, ',')) {
            if (!item.empty()) grid.push_back(std::stod(item));
        }
    }
    if (grid.empty()) throw std::invalid_argument("snr grid: empty");
    return grid;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string grid_to_text(const std::vector<double>& grid) {
    std::ostringstream os;
    os << std::setprecision(12);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) os << ',';
        os << grid[i];
    }
    return os.str();
}

}  // namespace

SimConfig parse_config_text(const std::string& text) {
    SimConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value, got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "num_tx") cfg.num_tx = std::stoi(val);
        else if (key == "num_rx") cfg.num_rx = std::stoi(val);
        else if (key == "snr_db") cfg.snr_grid_db = parse_snr_grid(val);
        else if (key == "scheme") cfg.scheme = turbo::scheme_from_name(val);
        else if (key == "hamming_radius") cfg.hamming_radius = std::stoi(val);
        else if (key == "llr_clip") cfg.llr_clip = std::stod(val);
        else if (key == "turbo_iters") cfg.turbo_iters = std::stoi(val);
        else if (key == "decoder_iters") cfg.decoder_iters = std::stoi(val);
        else if (key == "max_frames") cfg.max_frames = std::stol(val);
        else if (key == "min_bit_errors") cfg.min_bit_errors = std::stol(val);
        else if (key == "master_seed") cfg.master_seed = std::stoull(val);
        else if (key == "sdp_tol") cfg.sdp_tol = std::stod(val);
        else if (key == "sdp_max_iters") cfg.sdp_max_iters = std::stoi(val);
        else if (key == "code_n") cfg.code_n = std::stoi(val);
        else if (key == "code_k") cfg.code_k = std::stoi(val);
        else if (key == "code_col_weight") cfg.code_col_weight = std::stoi(val);
        else if (key == "code_seed") cfg.code_seed = std::stoull(val);
        else if (key == "alist_path") cfg.alist_path = val;
        else if (key == "threads") cfg.threads = std::stoi(val);
        else throw std::invalid_argument("config: unknown key: " + key);
    }
    cfg.validate();
    return cfg;
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

std::string canonical_config_text(const SimConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "num_tx=" << cfg.num_tx << '\n';
    os << "num_rx=" << cfg.num_rx << '\n';
    os << "snr_db=" << grid_to_text(cfg.snr_grid_db) << '\n';
    os << "scheme=" << turbo::scheme_name(cfg.scheme) << '\n';
    os << "hamming_radius=" << cfg.hamming_radius << '\n';
    os << "llr_clip=" << cfg.llr_clip << '\n';
    os << "turbo_iters=" << cfg.turbo_iters << '\n';
    os << "decoder_iters=" << cfg.decoder_iters << '\n';
    os << "max_frames=" << cfg.max_frames << '\n';
    os << "min_bit_errors=" << cfg.min_bit_errors << '\n';
    os << "master_seed=" << cfg.master_seed << '\n';
    os << "sdp_tol=" << cfg.sdp_tol << '\n';
    os << "sdp_max_iters=" << cfg.sdp_max_iters << '\n';
    os << "code_n=" << cfg.code_n << '\n';
    os << "code_k=" << cfg.code_k << '\n';
    os << "code_col_weight=" << cfg.code_col_weight << '\n';
    os << "code_seed=" << cfg.code_seed << '\n';
    os << "alist_path=" << cfg.alist_path << '\n';
    // threads is an execution detail: results are thread-count invariant,
    // so it stays out of the canonical text and the config hash
    return os.str();
}

std::uint64_t config_hash(const SimConfig& cfg) {
    const std::string text = canonical_config_text(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

LinkObjects build_link(const SimConfig& cfg) {
    cfg.validate();
    ldpc::ParityCheckMatrix code = cfg.alist_path.empty()
                                       ? ldpc::build_pcm(cfg.code_n, cfg.code_k, cfg.code_col_weight, cfg.code_seed)
                                       : ldpc::read_alist_file(cfg.alist_path);
    const int n = code.var_count();
    if (n % (2 * cfg.num_tx) != 0) {
        throw std::invalid_argument("build_link: codeword length must be divisible by 2*num_tx");
    }
    ldpc::Generator generator = ldpc::derive_generator(code);
    mimo::FrameLayout layout{cfg.num_tx, cfg.num_rx, n / (2 * cfg.num_tx)};
    turbo::LinkSetup setup = turbo::make_link_setup(code, turbo::Interleaver::random(n, cfg.master_seed));
    return LinkObjects{std::move(generator), std::move(setup), layout};
}

std::uint64_t frame_seed(std::uint64_t master, std::size_t snr_index, long frame_index) {
    return Prng::derive(master, {static_cast<std::uint64_t>(snr_index),
                                 static_cast<std::uint64_t>(frame_index)})
        .next_u64();
}

namespace {

struct FrameResult {
    std::vector<long> errors;  // per turbo iteration, extended past early stop
};

turbo::TurboConfig turbo_config_of(const SimConfig& cfg) {
    turbo::TurboConfig tc;
    tc.scheme = cfg.scheme;
    tc.max_turbo_iters = cfg.turbo_iters;
    tc.hamming_radius = cfg.hamming_radius;
    tc.llr_clip = cfg.llr_clip;
    tc.decoder_iters = cfg.decoder_iters;
    tc.sdp.tol = cfg.sdp_tol;
    tc.sdp.max_iters = cfg.sdp_max_iters;
    return tc;
}

FrameResult simulate_frame(const SimConfig& cfg, const LinkObjects& link, const turbo::TurboConfig& tc,
                           double sigma_n2, std::size_t snr_index, long frame_index) {
    Prng msg_rng = Prng::derive(cfg.master_seed, {Prng::tag(StreamId::Message),
                                                  static_cast<std::uint64_t>(snr_index),
                                                  static_cast<std::uint64_t>(frame_index)});
    std::vector<std::uint8_t> msg(link.generator.k);
    for (auto& b : msg) b = msg_rng.coin();
    const std::vector<std::uint8_t> codeword = link.generator.encode(msg);
    const std::vector<std::uint8_t> channel_bits = link.setup.interleaver.interleave_bits(codeword);

    const mimo::Frame frame = mimo::generate_frame(
        link.layout, frame_seed(cfg.master_seed, snr_index, frame_index), sigma_n2, channel_bits);
    const turbo::IterationTrace trace = turbo::run_turbo(frame, link.setup, tc, sigma_n2, &codeword);

    FrameResult result;
    result.errors.resize(cfg.turbo_iters, 0);
    for (int it = 0; it < cfg.turbo_iters; ++it) {
        const std::size_t idx = std::min<std::size_t>(it, trace.iterations.size() - 1);
        result.errors[it] = trace.iterations[idx].bit_errors;
    }
    return result;
}

}  // namespace

std::vector<BerRecord> run_ber_sweep(const SimConfig& cfg) {
    cfg.validate();
    const LinkObjects link = build_link(cfg);
    const turbo::TurboConfig tc = turbo_config_of(cfg);
    const int n = link.setup.code.var_count();

    std::ostringstream hash_os;
    hash_os << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
    const std::string hash_hex = hash_os.str();

    std::vector<BerRecord> records;
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
        const double snr_db = cfg.snr_grid_db[si];
        const double sigma_n2 = mimo::sigma_n2_from_snr_db(snr_db, cfg.num_tx);

        std::vector<long> errors(cfg.turbo_iters, 0);
        std::vector<long> frame_errors(cfg.turbo_iters, 0);
        long frames_done = 0;

        // Fixed-size batches keep totals independent of the thread count.
        constexpr long kBatch = 8;
        while (frames_done < cfg.max_frames) {
            const long batch = std::min(kBatch, cfg.max_frames - frames_done);
            std::vector<FrameResult> results(batch);
            if (cfg.threads == 1 || batch == 1) {
                for (long b = 0; b < batch; ++b) {
                    results[b] = simulate_frame(cfg, link, tc, sigma_n2, si, frames_done + b);
                }
            } else {
                std::vector<std::thread> pool;
                const int workers = static_cast<int>(std::min<long>(cfg.threads, batch));
                pool.reserve(workers);
                for (int w = 0; w < workers; ++w) {
                    pool.emplace_back([&, w]() {
                        for (long b = w; b < batch; b += workers) {
                            results[b] = simulate_frame(cfg, link, tc, sigma_n2, si, frames_done + b);
                        }
                    });
                }
                for (auto& t : pool) t.join();
            }
            for (long b = 0; b < batch; ++b) {
                for (int it = 0; it < cfg.turbo_iters; ++it) {
                    errors[it] += results[b].errors[it];
                    frame_errors[it] += results[b].errors[it] > 0;
                }
            }
            frames_done += batch;
            if (cfg.min_bit_errors > 0 && errors[cfg.turbo_iters - 1] >= cfg.min_bit_errors) break;
        }

        for (int it = 0; it < cfg.turbo_iters; ++it) {
            BerRecord rec;
            rec.snr_db = snr_db;
            rec.iteration = it + 1;
            rec.bit_errors = errors[it];
            rec.bits = frames_done * n;
            rec.frame_errors = frame_errors[it];
            rec.frames = frames_done;
            rec.ber = rec.bits > 0 ? static_cast<double>(rec.bit_errors) / rec.bits : 0.0;
            rec.fer = rec.frames > 0 ? static_cast<double>(rec.frame_errors) / rec.frames : 0.0;
            rec.seed = cfg.master_seed;
            rec.config_hash_hex = hash_hex;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::string ber_csv(const std::vector<BerRecord>& records, const SimConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(12);
    std::ostringstream hash_os;
    hash_os << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
    os << "# sdrturbo ber sweep v1\n";
    os << "# config_hash=" << hash_os.str() << "\n";
    os << "# master_seed=" << cfg.master_seed << "\n";
    os << "# snr_convention=10*log10(num_tx*Es/(2*sigma_n2)), Es=2\n";
    os << "# scheme=" << turbo::scheme_name(cfg.scheme) << "\n";
    os << "snr_db,iteration,bit_errors,bits,frame_errors,frames,ber,fer,seed,config_hash\n";
    for (const auto& r : records) {
        os << r.snr_db << ',' << r.iteration << ',' << r.bit_errors << ',' << r.bits << ','
           << r.frame_errors << ',' << r.frames << ',' << r.ber << ',' << r.fer << ',' << r.seed
           << ',' << r.config_hash_hex << '\n';
    }
    return os.str();
}

}  // namespace sdrturbo::sim
