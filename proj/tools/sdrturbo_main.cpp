#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdrturbo/exit_chart.hpp"
#include "sdrturbo/sim.hpp"

namespace {

using namespace sdrturbo;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << content;
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string scheme;
    std::string snr;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long frames = -1;
    long min_errors = -1;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--out", opts.out_path, "output path ('-' for stdout)");
    cmd->add_option("--scheme", opts.scheme, "multi-sdr | single-sdr | full-list");
    cmd->add_option("--snr", opts.snr, "SNR grid in dB: a:b:step or comma list");
    cmd->add_option("--seed", opts.seed, "master seed")->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--frames", opts.frames, "max frames per point");
    cmd->add_option("--min-errors", opts.min_errors, "stop a point after this many bit errors");
    cmd->add_option("--threads", opts.threads, "worker threads for frame-level parallelism");
}

sim::SimConfig load_config(const CommonOpts& opts) {
    sim::SimConfig cfg = opts.config_path.empty() ? sim::SimConfig{} : sim::parse_config_file(opts.config_path);
    if (!opts.scheme.empty()) cfg.scheme = turbo::scheme_from_name(opts.scheme);
    if (!opts.snr.empty()) cfg.snr_grid_db = sim::parse_snr_grid(opts.snr);
    if (opts.seed_set) cfg.master_seed = opts.seed;
    if (opts.frames > 0) cfg.max_frames = opts.frames;
    if (opts.min_errors >= 0) cfg.min_bit_errors = opts.min_errors;
    if (opts.threads > 0) cfg.threads = opts.threads;
    cfg.validate();
    return cfg;
}

int cmd_ber(const CommonOpts& opts) {
    const sim::SimConfig cfg = load_config(opts);
    const auto records = sim::run_ber_sweep(cfg);
    write_output(opts.out_path, sim::ber_csv(records, cfg));
    return 0;
}

int cmd_exit(const CommonOpts& opts, const std::string& ia_grid_text, int frames_per_point) {
    sim::SimConfig cfg = load_config(opts);
    const sim::LinkObjects link = sim::build_link(cfg);

    std::vector<double> ia_grid;
    {
        std::istringstream is(ia_grid_text);
        std::string item;
        while (std::getline(is, item, ',')) ia_grid.push_back(std::stod(item));
    }

    turbo::TurboConfig tc;
    tc.hamming_radius = cfg.hamming_radius;
    tc.llr_clip = cfg.llr_clip;
    tc.sdp.tol = cfg.sdp_tol;
    tc.sdp.max_iters = cfg.sdp_max_iters;

    std::vector<exitchart::ExitPoint> points;
    for (double snr_db : cfg.snr_grid_db) {
        auto part = exitchart::exit_curve(link.setup, link.generator, link.layout, cfg.scheme, snr_db,
                                          ia_grid, frames_per_point, tc, cfg.master_seed);
        points.insert(points.end(), part.begin(), part.end());
    }
    write_output(opts.out_path, exitchart::exit_csv(points));
    return 0;
}

int cmd_trace(const CommonOpts& opts) {
    sim::SimConfig cfg = load_config(opts);
    const sim::LinkObjects link = sim::build_link(cfg);
    const double snr_db = cfg.snr_grid_db.front();
    const double sigma_n2 = mimo::sigma_n2_from_snr_db(snr_db, cfg.num_tx);

    Prng msg_rng = Prng::derive(cfg.master_seed, {Prng::tag(StreamId::Message), 0, 0});
    std::vector<std::uint8_t> msg(link.generator.k);
    for (auto& b : msg) b = msg_rng.coin();
    const auto codeword = link.generator.encode(msg);
    const auto channel_bits = link.setup.interleaver.interleave_bits(codeword);
    const mimo::Frame frame =
        mimo::generate_frame(link.layout, sim::frame_seed(cfg.master_seed, 0, 0), sigma_n2, channel_bits);

    turbo::TurboConfig tc;
    tc.scheme = cfg.scheme;
    tc.max_turbo_iters = cfg.turbo_iters;
    tc.hamming_radius = cfg.hamming_radius;
    tc.llr_clip = cfg.llr_clip;
    tc.decoder_iters = cfg.decoder_iters;
    tc.sdp.tol = cfg.sdp_tol;
    tc.sdp.max_iters = cfg.sdp_max_iters;
    tc.record_llrs = true;

    const auto trace = turbo::run_turbo(frame, link.setup, tc, sigma_n2, &codeword);
    write_output(opts.out_path, turbo::trace_to_jsonl(trace));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"link-level simulator for the joint MAP-SDR turbo receiver"};
    app.require_subcommand(1);

    CommonOpts ber_opts, exit_opts, trace_opts;
    auto* ber = app.add_subcommand("ber", "run a Monte Carlo BER sweep and write CSV");
    add_common(ber, ber_opts);

    auto* exit_cmd = app.add_subcommand("exit", "measure detector EXIT points and write CSV");
    add_common(exit_cmd, exit_opts);
    std::string ia_grid = "0,0.25,0.5,0.75";
    int exit_frames = 50;
    exit_cmd->add_option("--ia-grid", ia_grid, "comma list of a-priori MI points in [0,1)");
    exit_cmd->add_option("--frames-per-point", exit_frames, "frames per grid point");

    auto* trace = app.add_subcommand("trace", "dump one frame's iteration trace as JSON lines");
    add_common(trace, trace_opts);

    auto* pcm = app.add_subcommand("pcm", "parity-check matrix utilities");
    pcm->require_subcommand(1);
    auto* gen = pcm->add_subcommand("gen", "construct a regular code and write alist");
    int gen_n = 256, gen_k = 128, gen_w = 3;
    std::uint64_t gen_seed = 7;
    std::string gen_out;
    gen->add_option("--n", gen_n, "codeword length");
    gen->add_option("--k", gen_k, "message length");
    gen->add_option("--col-weight", gen_w, "column weight");
    gen->add_option("--seed", gen_seed, "construction seed");
    gen->add_option("--out", gen_out, "alist output path")->required();

    auto* inspect = pcm->add_subcommand("inspect", "print the degree profile of an alist file");
    std::string inspect_path;
    inspect->add_option("path", inspect_path, "alist file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ber->parsed()) return cmd_ber(ber_opts);
        if (exit_cmd->parsed()) return cmd_exit(exit_opts, ia_grid, exit_frames);
        if (trace->parsed()) return cmd_trace(trace_opts);
        if (gen->parsed()) {
            const auto H = sdrturbo::ldpc::build_pcm(gen_n, gen_k, gen_w, gen_seed);
            sdrturbo::ldpc::write_alist_file(H, gen_out);
            std::cout << "wrote " << gen_out << " (" << H.var_count() << " x " << H.check_count()
                      << ", 4-cycle free: " << (H.four_cycle_free() ? "yes" : "no") << ")\n";
            return 0;
        }
        if (inspect->parsed()) {
            const auto H = sdrturbo::ldpc::read_alist_file(inspect_path);
            std::cout << "n=" << H.var_count() << " m=" << H.check_count()
                      << " edges=" << H.edge_count() << "\n";
            std::cout << "max_col_degree=" << H.max_var_degree()
                      << " max_row_degree=" << H.max_check_degree() << "\n";
            std::cout << "four_cycle_free=" << (H.four_cycle_free() ? "yes" : "no") << "\n";
            std::vector<long> col_hist(H.max_var_degree() + 1, 0), row_hist(H.max_check_degree() + 1, 0);
            for (int v = 0; v < H.var_count(); ++v) ++col_hist[H.var_degree(v)];
            for (int c = 0; c < H.check_count(); ++c) ++row_hist[H.check_degree(c)];
            for (std::size_t d = 0; d < col_hist.size(); ++d) {
                if (col_hist[d]) std::cout << "columns_deg_" << d << "=" << col_hist[d] << "\n";
            }
            for (std::size_t d = 0; d < row_hist.size(); ++d) {
                if (row_hist[d]) std::cout << "rows_deg_" << d << "=" << row_hist[d] << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
