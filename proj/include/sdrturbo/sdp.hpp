#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdrturbo/ldpc.hpp"

namespace sdrturbo::sdp {

// K small PSD blocks coupled to shared bit-probability variables f:
//
//   min  sum_k <block_cost[k], X_k> + f_cost' f
//   s.t. X_k(i,i) = 1,  X_k >= 0 (PSD)
//        X_k(i, d-1) = 1 - 2 f_coupling[k][i]   (last column <-> bits)
//        forbidden-set rows on f, 0 <= f <= 1
//
// fs_rows must hold complete odd-subset families per check (the rows of one
// check together with the box describe that check's parity polytope, which
// is what the solver projects onto).
struct BlockSdpProblem {
    int block_dim = 0;  // 2*num_tx + 1
    int num_f = 0;
    std::vector<Eigen::MatrixXd> block_cost;  // symmetric, one per snapshot
    Eigen::VectorXd f_cost;                   // length num_f
    std::vector<std::vector<int>> coupling;   // [block][i] -> f index, i < block_dim-1
    std::vector<ldpc::FsConstraint> fs_rows;

    int num_blocks() const { return static_cast<int>(block_cost.size()); }
    std::size_t fs_row_count() const { return fs_rows.size(); }
    std::size_t box_row_count() const { return 2 * static_cast<std::size_t>(num_f); }
    std::size_t coupling_row_count() const;
    void validate() const;
};

enum class SolveStatus { Converged, MaxIters };

// Primal feasibility of a reported solution, recomputable from scratch.
struct ResidualReport {
    double diag_eq = 0.0;       // max |X_k(i,i) - 1|
    double coupling_eq = 0.0;   // max |X_k(i,d-1) - (1 - 2 f_n)|
    double fs_ineq = 0.0;       // max positive FS row violation
    double box = 0.0;           // max distance of f from [0,1]
    double min_block_eigenvalue = 0.0;

    double max_primal() const;
};

struct SdpSolution {
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::VectorXd f;  // in [0,1] by construction
    double objective = 0.0;
    SolveStatus status = SolveStatus::MaxIters;
    int iterations = 0;
    ResidualReport primal;
    double fixed_point_residual = 0.0;  // ADMM primal/dual residual (inf-norm)
    double gap_surrogate = 0.0;         // |objective(u-side) - objective(v-side)|
};

struct SolveOptions {
    double tol = 1e-6;
    int max_iters = 5000;
    double rho = 0.0;  // 0 = pick from problem scale
    double over_relax = 1.6;
    bool adaptive_rho = true;
    int check_every = 25;
};

// Consensus copies and scaled duals, kept so turbo iterations can warm-start
// the solve for the same frame when only the linear cost changed.
struct SolverState {
    bool valid = false;
    double rho = 0.0;
    std::vector<Eigen::MatrixXd> psd_copy, psd_dual;
    std::vector<Eigen::VectorXd> check_copy, check_dual;
    Eigen::VectorXd box_copy, box_dual;
};

SdpSolution solve(const BlockSdpProblem& problem, const SolveOptions& opts = {},
                  SolverState* state = nullptr);
inline SdpSolution solve(const BlockSdpProblem& problem, double tol, int max_iters) {
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iters = max_iters;
    return solve(problem, opts);
}

// Recomputes every primal residual directly from (problem, solution),
// independent of solver internals.
ResidualReport residuals(const BlockSdpProblem& problem, const SdpSolution& solution);

double objective_of(const BlockSdpProblem& problem, const std::vector<Eigen::MatrixXd>& blocks,
                    const Eigen::VectorXd& f);

// Exact Euclidean projection onto the parity polytope
// conv{ b in {0,1}^d : sum b even }.
Eigen::VectorXd project_parity_polytope(const Eigen::VectorXd& v);

// Certified bounds for min <C,X> s.t. diag(X)=1, X PSD, from a dual barrier
// method: lower is a dual-feasible value, upper comes from a primal-feasible
// point. Reference path for validating the splitting solver on single blocks.
struct ElliptopeBounds {
    double lower = 0.0;
    double upper = 0.0;
};
ElliptopeBounds solve_elliptope_reference(const Eigen::MatrixXd& C, double gap_tol = 1e-9);

// Debug container (versioned JSON, not bit-critical).
std::string dump_problem(const BlockSdpProblem& problem);
BlockSdpProblem load_problem(const std::string& text);

}  // namespace sdrturbo::sdp
