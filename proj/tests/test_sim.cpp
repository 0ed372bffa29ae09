#include <doctest.h>

#include "sdrturbo/sim.hpp"

using namespace sdrturbo;

namespace {

// Small fast configuration used throughout: (64,32) code over 4x4.
sim::SimConfig small_config() {
    sim::SimConfig cfg;
    cfg.code_n = 64;
    cfg.code_k = 32;
    cfg.code_seed = 5;
    cfg.scheme = turbo::Scheme::FullList;
    cfg.snr_grid_db = {6.0};
    cfg.max_frames = 4;
    cfg.min_bit_errors = 0;
    cfg.master_seed = 9;
    return cfg;
}

}  // namespace

TEST_CASE("config: parse, defaults and canonical round-trip") {
    const std::string text =
        "# example sweep\n"
        "num_tx = 4\n"
        "snr_db = 2:4:1\n"
        "scheme = single-sdr\n"
        "hamming_radius = 3\n"
        "master_seed = 42\n";
    const auto cfg = sim::parse_config_text(text);
    CHECK(cfg.num_tx == 4);
    CHECK(cfg.snr_grid_db == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(cfg.scheme == turbo::Scheme::SingleSdr);
    CHECK(cfg.hamming_radius == 3);
    CHECK(cfg.master_seed == 42);
    // untouched defaults follow the simulated system
    CHECK(cfg.num_rx == 4);
    CHECK(cfg.code_n == 256);
    CHECK(cfg.code_k == 128);
    CHECK(cfg.code_col_weight == 3);
    CHECK(cfg.llr_clip == 8.0);
    CHECK(cfg.turbo_iters == 3);
    CHECK(cfg.decoder_iters == 20);
    CHECK(cfg.max_frames == 5000);
    CHECK(cfg.min_bit_errors == 200);

    const auto cfg2 = sim::parse_config_text(sim::canonical_config_text(cfg));
    CHECK(sim::config_hash(cfg2) == sim::config_hash(cfg));
}

TEST_CASE("config: unknown keys and invalid values are rejected") {
    CHECK_THROWS(sim::parse_config_text("bogus_key = 1\n"));
    CHECK_THROWS(sim::parse_config_text("hamming_radius = 0\n"));
    CHECK_THROWS(sim::parse_config_text("scheme = wat\n"));
    CHECK_THROWS(sim::parse_config_text("snr_db = 5:1:1\n"));
}

TEST_CASE("config hash is sensitive to every field change") {
    sim::SimConfig a;
    const auto base = sim::config_hash(a);
    a.hamming_radius = 3;
    CHECK(sim::config_hash(a) != base);
}

TEST_CASE("parse_snr_grid forms") {
    CHECK(sim::parse_snr_grid("1:3:0.5") == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK(sim::parse_snr_grid("4") == std::vector<double>{4.0});
    CHECK(sim::parse_snr_grid("-2,0,2") == std::vector<double>{-2.0, 0.0, 2.0});
    CHECK_THROWS(sim::parse_snr_grid(""));
}

TEST_CASE("run_ber_sweep: record count is iterations x grid points") {
    auto cfg = small_config();
    cfg.snr_grid_db = {2.0, 6.0};
    cfg.max_frames = 1;
    cfg.turbo_iters = 3;
    const auto records = sim::run_ber_sweep(cfg);
    CHECK(records.size() == 6);
    for (const auto& r : records) {
        CHECK(r.frames == 1);
        CHECK(r.bits == 64);
        CHECK(r.ber == doctest::Approx(static_cast<double>(r.bit_errors) / r.bits));
    }
}

TEST_CASE("run_ber_sweep: byte-identical CSV for a fixed seed") {
    const auto cfg = small_config();
    const auto a = sim::ber_csv(sim::run_ber_sweep(cfg), cfg);
    const auto b = sim::ber_csv(sim::run_ber_sweep(cfg), cfg);
    CHECK(a == b);
    CHECK(a.find("# config_hash=") != std::string::npos);
    CHECK(a.find("snr_convention") != std::string::npos);
}

TEST_CASE("run_ber_sweep: thread count does not change the records or the CSV") {
    auto cfg = small_config();
    cfg.max_frames = 8;
    const auto seq = sim::run_ber_sweep(cfg);
    const auto seq_csv = sim::ber_csv(seq, cfg);
    cfg.threads = 3;
    const auto par = sim::run_ber_sweep(cfg);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq[i].bit_errors == par[i].bit_errors);
        CHECK(seq[i].frame_errors == par[i].frame_errors);
        CHECK(seq[i].frames == par[i].frames);
    }
    CHECK(sim::ber_csv(par, cfg) == seq_csv);
}

TEST_CASE("run_ber_sweep: noiseless point has zero BER") {
    auto cfg = small_config();
    cfg.snr_grid_db = {120.0};
    const auto records = sim::run_ber_sweep(cfg);
    for (const auto& r : records) {
        CHECK(r.bit_errors == 0);
        CHECK(r.ber == 0.0);
        CHECK(r.fer == 0.0);
    }
}

TEST_CASE("run_ber_sweep: deep-noise limit behaves like coin flipping") {
    auto cfg = small_config();
    cfg.snr_grid_db = {-30.0};
    cfg.max_frames = 40;
    cfg.turbo_iters = 1;
    cfg.decoder_iters = 2;
    const auto records = sim::run_ber_sweep(cfg);
    REQUIRE(records.size() == 1);
    CHECK(records[0].ber == doctest::Approx(0.5).epsilon(0.04));
    CHECK(records[0].fer == 1.0);
}

TEST_CASE("run_ber_sweep: early stop on the error budget") {
    auto cfg = small_config();
    cfg.snr_grid_db = {-30.0};
    cfg.max_frames = 1000;
    cfg.min_bit_errors = 50;
    cfg.turbo_iters = 1;
    cfg.decoder_iters = 2;
    const auto records = sim::run_ber_sweep(cfg);
    REQUIRE(records.size() == 1);
    CHECK(records[0].bit_errors >= 50);
    CHECK(records[0].frames < 1000);       // stopped well before the cap
    CHECK(records[0].frames % 8 == 0);     // batch-aligned, thread-invariant
    CHECK(records[0].bits == records[0].frames * 64);
}

TEST_CASE("run_ber_sweep: totals equal the sum of independently re-run frames") {
    auto cfg = small_config();
    cfg.max_frames = 6;
    cfg.turbo_iters = 2;
    const auto records = sim::run_ber_sweep(cfg);

    const auto link = sim::build_link(cfg);
    const double sigma_n2 = mimo::sigma_n2_from_snr_db(cfg.snr_grid_db[0], cfg.num_tx);
    turbo::TurboConfig tc;
    tc.scheme = cfg.scheme;
    tc.max_turbo_iters = cfg.turbo_iters;
    tc.hamming_radius = cfg.hamming_radius;
    tc.llr_clip = cfg.llr_clip;
    tc.decoder_iters = cfg.decoder_iters;
    tc.sdp.tol = cfg.sdp_tol;
    tc.sdp.max_iters = cfg.sdp_max_iters;

    std::vector<long> totals(cfg.turbo_iters, 0);
    for (long fr = 0; fr < cfg.max_frames; ++fr) {
        Prng msg_rng = Prng::derive(cfg.master_seed, {Prng::tag(StreamId::Message), 0,
                                                      static_cast<std::uint64_t>(fr)});
        std::vector<std::uint8_t> msg(link.generator.k);
        for (auto& b : msg) b = msg_rng.coin();
        const auto codeword = link.generator.encode(msg);
        const auto channel_bits = link.setup.interleaver.interleave_bits(codeword);
        const auto frame = mimo::generate_frame(link.layout, sim::frame_seed(cfg.master_seed, 0, fr),
                                                sigma_n2, channel_bits);
        const auto trace = turbo::run_turbo(frame, link.setup, tc, sigma_n2, &codeword);
        for (int it = 0; it < cfg.turbo_iters; ++it) {
            const std::size_t idx = std::min<std::size_t>(it, trace.iterations.size() - 1);
            totals[it] += trace.iterations[idx].bit_errors;
        }
    }
    for (int it = 0; it < cfg.turbo_iters; ++it) {
        CHECK(records[it].bit_errors == totals[it]);
    }
}

TEST_CASE("build_link rejects incompatible code and antenna dimensions") {
    sim::SimConfig cfg;
    cfg.code_n = 60;  // not divisible by 2*num_tx = 8
    cfg.code_k = 30;
    CHECK_THROWS(sim::build_link(cfg));
}
