#include <stdexcept>

#include <json.hpp>

#include "sdrturbo/sdp.hpp"

namespace sdrturbo::sdp {

namespace {
constexpr const char* kFormatId = "sdrturbo-sdp-problem";
constexpr int kFormatVersion = 1;
}  // namespace

std::string dump_problem(const BlockSdpProblem& problem) {
    nlohmann::json j;
    j["format"] = kFormatId;
    j["version"] = kFormatVersion;
    j["block_dim"] = problem.block_dim;
    j["num_f"] = problem.num_f;
    j["f_cost"] = std::vector<double>(problem.f_cost.begin(), problem.f_cost.end());
    j["coupling"] = problem.coupling;
    for (const auto& c : problem.block_cost) {
        std::vector<double> flat(c.data(), c.data() + c.size());  // column-major
        j["block_cost"].push_back(flat);
    }
    for (const auto& row : problem.fs_rows) {
        j["fs_rows"].push_back({{"check", row.check_index}, {"in", row.in_set}, {"out", row.out_set}});
    }
    if (problem.fs_rows.empty()) j["fs_rows"] = nlohmann::json::array();
    if (problem.block_cost.empty()) j["block_cost"] = nlohmann::json::array();
    return j.dump();
}

BlockSdpProblem load_problem(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != kFormatId || j.value("version", 0) != kFormatVersion) {
        throw std::runtime_error("load_problem: unknown container format/version");
    }
    BlockSdpProblem p;
    p.block_dim = j.at("block_dim").get<int>();
    p.num_f = j.at("num_f").get<int>();
    const auto fc = j.at("f_cost").get<std::vector<double>>();
    p.f_cost = Eigen::Map<const Eigen::VectorXd>(fc.data(), fc.size());
    p.coupling = j.at("coupling").get<std::vector<std::vector<int>>>();
    for (const auto& flat_j : j.at("block_cost")) {
        const auto flat = flat_j.get<std::vector<double>>();
        if (static_cast<int>(flat.size()) != p.block_dim * p.block_dim) {
            throw std::runtime_error("load_problem: block size mismatch");
        }
        p.block_cost.push_back(
            Eigen::Map<const Eigen::MatrixXd>(flat.data(), p.block_dim, p.block_dim));
    }
    for (const auto& row_j : j.at("fs_rows")) {
        ldpc::FsConstraint row;
        row.check_index = row_j.at("check").get<int>();
        row.in_set = row_j.at("in").get<std::vector<int>>();
        row.out_set = row_j.at("out").get<std::vector<int>>();
        p.fs_rows.push_back(std::move(row));
    }
    p.validate();
    return p;
}

}  // namespace sdrturbo::sdp
