#include "sdrturbo/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace sdrturbo::sdp {

std::size_t BlockSdpProblem::coupling_row_count() const {
    std::size_t c = 0;
    for (const auto& row : coupling) c += row.size();
    return c;
}

void BlockSdpProblem::validate() const {
    const int d = block_dim;
    const int kblocks = num_blocks();
    if (d < 2) throw std::invalid_argument("BlockSdpProblem: block_dim must be >= 2");
    if (static_cast<int>(coupling.size()) != kblocks) {
        throw std::invalid_argument("BlockSdpProblem: one coupling row list per block required");
    }
    if (f_cost.size() != num_f) throw std::invalid_argument("BlockSdpProblem: f_cost length mismatch");
    std::vector<int> hits(num_f, 0);
    for (int k = 0; k < kblocks; ++k) {
        if (block_cost[k].rows() != d || block_cost[k].cols() != d) {
            throw std::invalid_argument("BlockSdpProblem: block cost dimension mismatch");
        }
        if (static_cast<int>(coupling[k].size()) != d - 1) {
            throw std::invalid_argument("BlockSdpProblem: expected block_dim-1 coupled entries per block");
        }
        for (int idx : coupling[k]) {
            if (idx < 0 || idx >= num_f) throw std::invalid_argument("BlockSdpProblem: coupling index out of range");
            ++hits[idx];
        }
    }
    for (int h : hits) {
        if (h != 1) throw std::invalid_argument("BlockSdpProblem: every f index must couple to exactly one block entry");
    }
    for (const auto& row : fs_rows) {
        for (int v : row.in_set) {
            if (v < 0 || v >= num_f) throw std::invalid_argument("BlockSdpProblem: FS index out of range");
        }
        for (int v : row.out_set) {
            if (v < 0 || v >= num_f) throw std::invalid_argument("BlockSdpProblem: FS index out of range");
        }
        if (row.in_set.size() % 2 == 0 || row.in_set.empty()) {
            throw std::invalid_argument("BlockSdpProblem: FS in-set must have odd cardinality");
        }
    }
}

double ResidualReport::max_primal() const {
    double worst = std::max({diag_eq, coupling_eq, fs_ineq, box});
    return std::max(worst, std::max(0.0, -min_block_eigenvalue));
}

double objective_of(const BlockSdpProblem& problem, const std::vector<Eigen::MatrixXd>& blocks,
                    const Eigen::VectorXd& f) {
    double obj = problem.f_cost.dot(f);
    for (int k = 0; k < problem.num_blocks(); ++k) {
        obj += problem.block_cost[k].cwiseProduct(blocks[k]).sum();
    }
    return obj;
}

// ---------------------------------------------------------------------------
// consensus splitting solver
// ---------------------------------------------------------------------------

namespace {

struct CheckGroup {
    std::vector<int> vars;  // sorted f indices of one check
};

// Groups FS rows per check and verifies each family is the complete set of
// odd subsets, which is what licenses the parity-polytope projection.
std::vector<CheckGroup> group_checks(const BlockSdpProblem& problem) {
    std::map<int, std::vector<const ldpc::FsConstraint*>> by_check;
    for (const auto& row : problem.fs_rows) by_check[row.check_index].push_back(&row);

    std::vector<CheckGroup> groups;
    groups.reserve(by_check.size());
    for (const auto& [check, rows] : by_check) {
        std::vector<int> vars(rows.front()->in_set);
        vars.insert(vars.end(), rows.front()->out_set.begin(), rows.front()->out_set.end());
        std::sort(vars.begin(), vars.end());
        const int deg = static_cast<int>(vars.size());
        if (deg > 20) throw std::invalid_argument("sdp::solve: check degree too large");

        std::set<std::uint32_t> masks;
        for (const auto* row : rows) {
            std::vector<int> all(row->in_set);
            all.insert(all.end(), row->out_set.begin(), row->out_set.end());
            std::sort(all.begin(), all.end());
            if (all != vars) {
                throw std::invalid_argument("sdp::solve: FS rows of one check cover different variables");
            }
            std::uint32_t mask = 0;
            for (int v : row->in_set) {
                const auto it = std::lower_bound(vars.begin(), vars.end(), v);
                mask |= 1u << static_cast<std::uint32_t>(it - vars.begin());
            }
            masks.insert(mask);
        }
        if (masks.size() != rows.size() || masks.size() != (std::size_t{1} << (deg - 1))) {
            throw std::invalid_argument(
                "sdp::solve: FS rows per check must form the complete odd-subset family");
        }
        groups.push_back(CheckGroup{std::move(vars)});
    }
    return groups;
}

// Reusable eigendecomposition workspace for the per-block projections.
struct PsdProjector {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Eigen::MatrixXd scaled;

    void project(const Eigen::MatrixXd& shifted, Eigen::MatrixXd& out) {
        es.compute(shifted);
        scaled.noalias() = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal();
        out.noalias() = scaled * es.eigenvectors().transpose();
    }
};

// Exact parity polytope projection with caller-owned scratch.
// The candidate facet is {i : boxed(i) > 1/2} with a parity fix at the entry
// closest to 1/2; at most one facet can be violated by a boxed point. When it
// is, the result is the projection of the original point onto
// {z in [0,1]^d : theta' z = |F| - 1}, found by walking the breakpoints of
// the piecewise-linear, nonincreasing map mu -> theta' clamp(v - mu*theta).
struct ParityProjector {
    std::vector<char> in_f;
    std::vector<double> knots;

    void project(const Eigen::VectorXd& v, Eigen::VectorXd& z) {
        const int d = static_cast<int>(v.size());
        z = v.cwiseMax(0.0).cwiseMin(1.0);
        in_f.assign(d, 0);
        int card = 0;
        for (int i = 0; i < d; ++i) {
            in_f[i] = z(i) > 0.5;
            card += in_f[i];
        }
        if (card % 2 == 0) {
            int flip = 0;
            double best = std::abs(z(0) - 0.5);
            for (int i = 1; i < d; ++i) {
                const double dist = std::abs(z(i) - 0.5);
                if (dist < best) {
                    best = dist;
                    flip = i;
                }
            }
            in_f[flip] = !in_f[flip];
            card += in_f[flip] ? 1 : -1;
        }
        const double beta = card - 1.0;
        double lhs = 0.0;
        for (int i = 0; i < d; ++i) lhs += in_f[i] ? z(i) : -z(i);
        if (lhs <= beta) return;

        auto h_of = [&](double mu) {
            double h = 0.0;
            for (int i = 0; i < d; ++i) {
                const double th = in_f[i] ? 1.0 : -1.0;
                h += th * std::clamp(v(i) - mu * th, 0.0, 1.0);
            }
            return h;
        };
        knots.clear();
        for (int i = 0; i < d; ++i) {
            const double lo = in_f[i] ? v(i) - 1.0 : -v(i);
            const double hi = in_f[i] ? v(i) : 1.0 - v(i);
            if (lo > 0.0) knots.push_back(lo);
            if (hi > 0.0) knots.push_back(hi);
        }
        std::sort(knots.begin(), knots.end());
        double mu_prev = 0.0;
        double h_prev = h_of(0.0);
        double mu = knots.empty() ? 0.0 : knots.back();
        for (double knot : knots) {
            const double h_knot = h_of(knot);
            if (h_knot <= beta) {
                const double slope = (h_knot - h_prev) / (knot - mu_prev);
                mu = slope != 0.0 ? mu_prev + (beta - h_prev) / slope : knot;
                break;
            }
            mu_prev = knot;
            h_prev = h_knot;
        }
        for (int i = 0; i < d; ++i) {
            const double th = in_f[i] ? 1.0 : -1.0;
            z(i) = std::clamp(v(i) - mu * th, 0.0, 1.0);
        }
    }
};

// Largest FS violation of one check at f (max over all odd subsets),
// attained at the canonical most-violating subset.
double max_check_violation(const CheckGroup& group, const Eigen::VectorXd& f) {
    double dist = 0.0;
    double best_flip = std::numeric_limits<double>::infinity();
    int card = 0;
    for (int v : group.vars) {
        const double zi = f(v);
        const bool member = zi > 0.5;
        card += member;
        dist += member ? 1.0 - zi : zi;
        best_flip = std::min(best_flip, std::abs(1.0 - 2.0 * zi));
    }
    if (card % 2 == 0) dist += best_flip;
    return 1.0 - dist;  // positive means the facet is violated
}

double default_rho(const BlockSdpProblem& problem) {
    double acc = 0.0;
    for (const auto& c : problem.block_cost) acc += c.norm();
    const double scale = problem.num_blocks() > 0
                             ? 2.0 * acc / problem.num_blocks() / std::sqrt(problem.block_dim)
                             : 1.0;
    return std::max(1e-3, scale);
}

struct Candidate {
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::VectorXd f;
};

// Reported point: f clamped to the box, coupled entries and diagonal set
// exactly, so diag/coupling/box residuals vanish by construction.
Candidate make_candidate(const BlockSdpProblem& problem, const std::vector<Eigen::MatrixXd>& x_u,
                         const Eigen::VectorXd& f_u) {
    Candidate cand;
    cand.f = f_u.cwiseMax(0.0).cwiseMin(1.0);
    cand.blocks = x_u;
    const int d = problem.block_dim;
    for (int k = 0; k < problem.num_blocks(); ++k) {
        for (int i = 0; i < d - 1; ++i) {
            const double val = 1.0 - 2.0 * cand.f(problem.coupling[k][i]);
            cand.blocks[k](i, d - 1) = val;
            cand.blocks[k](d - 1, i) = val;
        }
        for (int i = 0; i < d; ++i) cand.blocks[k](i, i) = 1.0;
    }
    return cand;
}

}  // namespace

Eigen::VectorXd project_parity_polytope(const Eigen::VectorXd& v) {
    if (v.size() == 0) return v;
    ParityProjector proj;
    Eigen::VectorXd z;
    proj.project(v, z);
    return z;
}

SdpSolution solve(const BlockSdpProblem& problem, const SolveOptions& opts, SolverState* state) {
    problem.validate();
    if (opts.tol <= 0.0) throw std::invalid_argument("sdp::solve: tol must be positive");
    const int d = problem.block_dim;
    const int kblocks = problem.num_blocks();
    const int nf = problem.num_f;
    const std::vector<CheckGroup> checks = group_checks(problem);
    const int nchecks = static_cast<int>(checks.size());

    // copy multiplicity of each f entry: one box copy plus one per check
    Eigen::VectorXd copy_weight = Eigen::VectorXd::Ones(nf);
    for (const auto& g : checks) {
        for (int v : g.vars) copy_weight(v) += 1.0;
    }

    SolverState local;
    SolverState& st = state ? *state : local;
    bool dims_match = st.valid && static_cast<int>(st.psd_copy.size()) == kblocks &&
                      static_cast<int>(st.check_copy.size()) == nchecks && st.box_copy.size() == nf &&
                      (kblocks == 0 || st.psd_copy.front().rows() == d);
    for (int m = 0; dims_match && m < nchecks; ++m) {
        dims_match = st.check_copy[m].size() == static_cast<Eigen::Index>(checks[m].vars.size());
    }
    if (!dims_match) {
        st.psd_copy.assign(kblocks, Eigen::MatrixXd::Identity(d, d));
        st.psd_dual.assign(kblocks, Eigen::MatrixXd::Zero(d, d));
        st.check_copy.clear();
        st.check_dual.clear();
        for (const auto& g : checks) {
            st.check_copy.push_back(Eigen::VectorXd::Constant(g.vars.size(), 0.5));
            st.check_dual.push_back(Eigen::VectorXd::Zero(g.vars.size()));
        }
        st.box_copy = Eigen::VectorXd::Constant(nf, 0.5);
        st.box_dual = Eigen::VectorXd::Zero(nf);
        st.rho = opts.rho > 0.0 ? opts.rho : default_rho(problem);
        st.valid = true;
    } else if (opts.rho > 0.0) {
        st.rho = opts.rho;
    }

    std::vector<Eigen::MatrixXd> x_u(kblocks, Eigen::MatrixXd::Identity(d, d));
    Eigen::VectorXd f_u = Eigen::VectorXd::Constant(nf, 0.5);
    const double alpha = opts.over_relax;

    double primal_res = 0.0, dual_res = 0.0;
    int iter = 0;
    bool converged = false;

    // hot-loop workspaces
    PsdProjector psd;
    ParityProjector parity;
    Eigen::MatrixXd q_ws(d, d), shifted_ws(d, d), projected_ws(d, d);
    Eigen::VectorXd b_sum(nf), dual_accum(nf);
    std::vector<Eigen::VectorXd> slice_ws(nchecks), vshift_ws(nchecks), vproj_ws(nchecks);
    for (int m = 0; m < nchecks; ++m) {
        slice_ws[m].resize(checks[m].vars.size());
        vshift_ws[m].resize(checks[m].vars.size());
    }
    Eigen::VectorXd fshift_ws(nf), fproj_ws(nf);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_check;

    while (iter < opts.max_iters && !converged) {
        ++iter;
        const double rho = st.rho;

        // --- u-update: minimize cost + (rho/2) * distance to shifted copies
        // over the affine set {diag = 1, coupled column = 1 - 2f}.
        b_sum = st.box_copy - st.box_dual;
        for (int m = 0; m < nchecks; ++m) {
            const auto& vars = checks[m].vars;
            for (std::size_t j = 0; j < vars.size(); ++j) {
                b_sum(vars[j]) += st.check_copy[m](j) - st.check_dual[m](j);
            }
        }
        for (int k = 0; k < kblocks; ++k) {
            const Eigen::MatrixXd& cost = problem.block_cost[k];
            Eigen::MatrixXd& X = x_u[k];
            q_ws = st.psd_copy[k] - st.psd_dual[k];
            for (int i = 0; i < d; ++i) X(i, i) = 1.0;
            for (int i = 0; i < d - 2; ++i) {
                for (int j = i + 1; j < d - 1; ++j) {
                    const double target = 0.5 * (q_ws(i, j) + q_ws(j, i));
                    const double val = target - cost(i, j) / rho;
                    X(i, j) = val;
                    X(j, i) = val;
                }
            }
            for (int i = 0; i < d - 1; ++i) {
                const int n = problem.coupling[k][i];
                const double wphi = copy_weight(n);
                const double target = 0.5 * (q_ws(i, d - 1) + q_ws(d - 1, i));
                const double lin = problem.f_cost(n) - 4.0 * cost(i, d - 1);
                // argmin of lin*phi + (rho/2)[2(1-2phi-target)^2 + sum_c (phi-q_c)^2]
                const double phi =
                    (rho * (b_sum(n) + 4.0 * (1.0 - target)) - lin) / (rho * (8.0 + wphi));
                f_u(n) = phi;
                const double val = 1.0 - 2.0 * phi;
                X(i, d - 1) = val;
                X(d - 1, i) = val;
            }
        }

        // --- v-update with over-relaxation, then scaled dual ascent
        primal_res = 0.0;
        dual_res = 0.0;
        for (int k = 0; k < kblocks; ++k) {
            shifted_ws = alpha * x_u[k] + (1.0 - alpha) * st.psd_copy[k] + st.psd_dual[k];
            psd.project(shifted_ws, projected_ws);
            st.psd_dual[k] = shifted_ws - projected_ws;
            dual_res = std::max(dual_res, rho * (projected_ws - st.psd_copy[k]).cwiseAbs().maxCoeff());
            st.psd_copy[k].swap(projected_ws);
            primal_res = std::max(primal_res, (x_u[k] - st.psd_copy[k]).cwiseAbs().maxCoeff());
        }
        dual_accum.setZero(nf);
        for (int m = 0; m < nchecks; ++m) {
            const auto& vars = checks[m].vars;
            Eigen::VectorXd& slice = slice_ws[m];
            for (std::size_t j = 0; j < vars.size(); ++j) slice(j) = f_u(vars[j]);
            vshift_ws[m] = alpha * slice + (1.0 - alpha) * st.check_copy[m] + st.check_dual[m];
            parity.project(vshift_ws[m], vproj_ws[m]);
            st.check_dual[m] = vshift_ws[m] - vproj_ws[m];
            for (std::size_t j = 0; j < vars.size(); ++j) {
                dual_accum(vars[j]) += vproj_ws[m](j) - st.check_copy[m](j);
            }
            st.check_copy[m].swap(vproj_ws[m]);
            primal_res = std::max(primal_res, (slice - st.check_copy[m]).cwiseAbs().maxCoeff());
        }
        {
            fshift_ws = alpha * f_u + (1.0 - alpha) * st.box_copy + st.box_dual;
            fproj_ws = fshift_ws.cwiseMax(0.0).cwiseMin(1.0);
            st.box_dual = fshift_ws - fproj_ws;
            dual_accum += fproj_ws - st.box_copy;
            st.box_copy.swap(fproj_ws);
            primal_res = std::max(primal_res, (f_u - st.box_copy).cwiseAbs().maxCoeff());
        }
        if (nf > 0) dual_res = std::max(dual_res, rho * dual_accum.cwiseAbs().maxCoeff());

        // --- convergence test on the actual reported candidate
        if (iter % opts.check_every == 0 || iter == opts.max_iters) {
            const double fixed_point = std::max(primal_res, dual_res);
            if (fixed_point <= opts.tol) {
                Candidate cand = make_candidate(problem, x_u, f_u);
                double fs_worst = 0.0;
                for (const auto& g : checks) {
                    fs_worst = std::max(fs_worst, max_check_violation(g, cand.f));
                }
                double min_eig = 0.0;
                if (fs_worst <= opts.tol) {
                    for (const auto& blk : cand.blocks) {
                        eig_check.compute(blk, Eigen::EigenvaluesOnly);
                        min_eig = std::min(min_eig, eig_check.eigenvalues().minCoeff());
                        if (min_eig < -opts.tol) break;
                    }
                    converged = min_eig >= -opts.tol;
                }
            }
        }

        // --- residual balancing (scaled duals shrink when rho grows)
        if (opts.adaptive_rho && !converged && iter % 50 == 0 && iter < 2000) {
            double scale = 0.0;
            if (primal_res > 10.0 * dual_res) {
                scale = 2.0;
            } else if (dual_res > 10.0 * primal_res) {
                scale = 0.5;
            }
            if (scale != 0.0) {
                st.rho *= scale;
                for (auto& lam : st.psd_dual) lam /= scale;
                for (auto& lam : st.check_dual) lam /= scale;
                st.box_dual /= scale;
            }
        }
    }

    Candidate cand = make_candidate(problem, x_u, f_u);
    SdpSolution sol;
    sol.blocks = std::move(cand.blocks);
    sol.f = std::move(cand.f);
    sol.objective = objective_of(problem, sol.blocks, sol.f);
    sol.status = converged ? SolveStatus::Converged : SolveStatus::MaxIters;
    sol.iterations = iter;
    sol.fixed_point_residual = std::max(primal_res, dual_res);
    sol.primal = residuals(problem, sol);
    sol.gap_surrogate = std::abs(sol.objective - objective_of(problem, st.psd_copy, st.box_copy));
    return sol;
}

ResidualReport residuals(const BlockSdpProblem& problem, const SdpSolution& solution) {
    const int d = problem.block_dim;
    if (static_cast<int>(solution.blocks.size()) != problem.num_blocks() ||
        solution.f.size() != problem.num_f) {
        throw std::invalid_argument("sdp::residuals: solution/problem shape mismatch");
    }
    ResidualReport rep;
    rep.min_block_eigenvalue = std::numeric_limits<double>::infinity();
    for (int k = 0; k < problem.num_blocks(); ++k) {
        const Eigen::MatrixXd& X = solution.blocks[k];
        for (int i = 0; i < d; ++i) rep.diag_eq = std::max(rep.diag_eq, std::abs(X(i, i) - 1.0));
        for (int i = 0; i < d - 1; ++i) {
            const double want = 1.0 - 2.0 * solution.f(problem.coupling[k][i]);
            rep.coupling_eq = std::max({rep.coupling_eq, std::abs(X(i, d - 1) - want),
                                        std::abs(X(d - 1, i) - want)});
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
        rep.min_block_eigenvalue = std::min(rep.min_block_eigenvalue, es.eigenvalues().minCoeff());
    }
    if (problem.num_blocks() == 0) rep.min_block_eigenvalue = 0.0;
    for (const auto& row : problem.fs_rows) {
        rep.fs_ineq = std::max(rep.fs_ineq, ldpc::fs_violation(row, solution.f));
    }
    for (int n = 0; n < problem.num_f; ++n) {
        rep.box = std::max({rep.box, -solution.f(n), solution.f(n) - 1.0});
    }
    rep.box = std::max(rep.box, 0.0);
    rep.fs_ineq = std::max(rep.fs_ineq, 0.0);
    return rep;
}

// ---------------------------------------------------------------------------
// dual barrier reference for a single diagonally-constrained block
// ---------------------------------------------------------------------------

ElliptopeBounds solve_elliptope_reference(const Eigen::MatrixXd& C_in, double gap_tol) {
    const int d = static_cast<int>(C_in.rows());
    const Eigen::MatrixXd C = 0.5 * (C_in + C_in.transpose());

    // dual: max 1'nu  s.t.  C - Diag(nu) >= 0
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(C, Eigen::EigenvaluesOnly);
    Eigen::VectorXd nu = Eigen::VectorXd::Constant(d, es0.eigenvalues().minCoeff() - 1.0);

    double t = 1.0;
    Eigen::MatrixXd S, Sinv;
    for (int outer = 0; outer < 64; ++outer) {
        for (int inner = 0; inner < 80; ++inner) {
            S = C - Eigen::MatrixXd(nu.asDiagonal());
            Sinv = S.llt().solve(Eigen::MatrixXd::Identity(d, d));
            const Eigen::VectorXd grad = Eigen::VectorXd::Ones(d) - Sinv.diagonal() / t;
            const Eigen::MatrixXd hess = Sinv.cwiseProduct(Sinv) / t;
            const Eigen::VectorXd step = hess.ldlt().solve(grad);
            const double decrement = grad.dot(step);
            if (decrement < 1e-18) break;
            double scale = 1.0;
            for (int ls = 0; ls < 60; ++ls) {
                const Eigen::MatrixXd trial = C - Eigen::MatrixXd((nu + scale * step).asDiagonal());
                if (Eigen::LLT<Eigen::MatrixXd>(trial).info() == Eigen::Success) break;
                scale *= 0.5;
            }
            nu += scale * step;
        }
        const double gap = d / t;
        if (gap <= gap_tol * std::max(1.0, std::abs(nu.sum()))) break;
        t *= 10.0;
    }

    S = C - Eigen::MatrixXd(nu.asDiagonal());
    Sinv = S.llt().solve(Eigen::MatrixXd::Identity(d, d));
    // rescale the centered primal point to exact unit diagonal
    Eigen::MatrixXd X = Sinv / t;
    const Eigen::VectorXd scale = X.diagonal().cwiseSqrt().cwiseInverse();
    X = scale.asDiagonal() * X * scale.asDiagonal();

    ElliptopeBounds bounds;
    bounds.lower = nu.sum();
    bounds.upper = C.cwiseProduct(X).sum();
    return bounds;
}

}  // namespace sdrturbo::sdp
