#include "rta/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rta {

namespace {

constexpr double kFeasTol = 1e-9;    // declared infeasible beyond this violation
constexpr double kActiveTol = 1e-12; // residual treated as "on the boundary"
constexpr double kStepTol = 1e-13;
constexpr double kLambdaTol = 1e-10;
constexpr int kMaxIter = 10000;

struct LdpResult {
    Eigen::VectorXd z;
    Eigen::VectorXd lambda;
    bool converged = false;
    int iters = 0;
};

// Projection of z0 onto {z : A z >= c} by a primal active-set walk, starting
// from a feasible z. The identity Hessian makes each equality subproblem a
// plain null-space projection, so one step per working set is exact. After a
// stretch of zero-length steps the drop rule switches to Bland's (smallest
// index) to rule out cycling on degenerate vertices.
LdpResult ldp_active_set(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                         const Eigen::VectorXd& z0, Eigen::VectorXd z, int max_iter) {
    const int m = static_cast<int>(A.rows());
    const int d = static_cast<int>(A.cols());

    std::vector<int> work;
    std::vector<char> in_work(static_cast<size_t>(m), 0);
    {
        const Eigen::VectorXd res = A * z - c;
        for (int i = 0; i < m; ++i)
            if (res[i] <= kActiveTol) {
                work.push_back(i);
                in_work[static_cast<size_t>(i)] = 1;
            }
    }

    LdpResult out;
    auto gather_t = [&](const std::vector<int>& w) {
        Eigen::MatrixXd At(d, static_cast<int>(w.size()));
        for (size_t r = 0; r < w.size(); ++r) At.col(static_cast<int>(r)) = A.row(w[r]).transpose();
        return At;
    };
    // Orthogonal projector onto the span of the active rows; QR of the
    // transposed active matrix keeps the conditioning of A itself.
    auto range_project = [&](const Eigen::MatrixXd& At, const Eigen::VectorXd& v) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
        const int rk = static_cast<int>(qr.rank());
        Eigen::MatrixXd Q1 = qr.householderQ() * Eigen::MatrixXd::Identity(d, rk);
        return Eigen::VectorXd(Q1 * (Q1.transpose() * v));
    };

    int stalled = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        out.iters = iter + 1;
        const Eigen::VectorXd r = z0 - z;
        // Cancellation noise in the projected direction scales with |r|;
        // every smallness test below is relative to that.
        const double scale = std::max(1.0, r.lpNorm<Eigen::Infinity>());

        Eigen::VectorXd p;
        if (work.empty()) {
            p = r;
        } else {
            p = r - range_project(gather_t(work), r);
        }

        if (p.lpNorm<Eigen::Infinity>() <= kStepTol * scale) {
            if (work.empty()) {
                out.z = z;
                out.lambda = Eigen::VectorXd::Zero(m);
                out.converged = true;
                return out;
            }
            // Minimal-norm multipliers of A_w' lam = z - z0.
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gather_t(work));
            const Eigen::VectorXd lam = cod.solve(z - z0);
            int drop = -1;
            const double lam_tol = kLambdaTol * scale;
            if (stalled > 2 * m) {
                // Bland's rule: smallest index with a negative multiplier.
                for (int r2 = 0; r2 < lam.size(); ++r2)
                    if (lam[r2] < -lam_tol) {
                        drop = r2;
                        break;
                    }
            } else {
                double worst = -lam_tol;
                for (int r2 = 0; r2 < lam.size(); ++r2)
                    if (lam[r2] < worst) {
                        worst = lam[r2];
                        drop = r2;
                    }
            }
            if (drop < 0) {
                out.z = z;
                out.lambda = Eigen::VectorXd::Zero(m);
                for (size_t r2 = 0; r2 < work.size(); ++r2)
                    out.lambda[work[r2]] = std::max(lam[static_cast<int>(r2)], 0.0);
                out.converged = true;
                return out;
            }
            in_work[static_cast<size_t>(work[static_cast<size_t>(drop)])] = 0;
            work.erase(work.begin() + drop);
            ++stalled;
            continue;
        }

        // Step toward the subproblem optimum, stopping at the first blocking row.
        const double dir_tol = 1e-12 * p.lpNorm<Eigen::Infinity>();
        double alpha = 1.0;
        int blocker = -1;
        for (int i = 0; i < m; ++i) {
            if (in_work[static_cast<size_t>(i)]) continue;
            const double dir = A.row(i).dot(p);
            if (dir >= -dir_tol) continue;
            const double ratio = (c[i] - A.row(i).dot(z)) / dir;
            if (ratio < alpha) {
                alpha = std::max(ratio, 0.0);
                blocker = i;
            }
        }
        z += alpha * p;
        stalled = alpha > 0.0 ? 0 : stalled + 1;
        if (blocker >= 0) {
            work.push_back(blocker);
            in_work[static_cast<size_t>(blocker)] = 1;
            std::sort(work.begin(), work.end());
        }
    }

    out.z = z;
    out.lambda = Eigen::VectorXd::Zero(m);
    out.converged = false;
    return out;
}

struct NormalizedRows {
    Eigen::MatrixXd A;        // normalized rows, a.z >= c
    Eigen::VectorXd c;
    std::vector<int> source;  // index into the combined multiplier vector
    std::vector<double> scale;
    int num_ineq = 0;         // leading rows that came from problem.ineq
    bool trivially_infeasible = false;
    double trivial_violation = 0.0;
};

// Stack inequality rows and box bounds as one normalized row system.
NormalizedRows assemble(const QpProblem& prob) {
    NormalizedRows out;
    const int d = prob.dim;
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> offs;

    for (size_t k = 0; k < prob.ineq.size(); ++k) {
        const auto& [a, b] = prob.ineq[k];
        if (a.size() != d) throw std::invalid_argument("qp row dimension mismatch");
        if (!a.allFinite() || !std::isfinite(b)) throw std::invalid_argument("qp row not finite");
        const double norm = a.norm();
        if (norm < 1e-14) {
            // No control authority in this row; it either holds or nothing can fix it.
            if (b < -kFeasTol) {
                out.trivially_infeasible = true;
                out.trivial_violation = std::max(out.trivial_violation, -b);
            }
            continue;
        }
        rows.push_back(a / norm);
        offs.push_back(-b / norm);
        out.source.push_back(static_cast<int>(k));
        out.scale.push_back(norm);
    }
    out.num_ineq = static_cast<int>(rows.size());

    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[k] = 1.0;
        rows.push_back(e);
        offs.push_back(prob.lower[k]);
        out.source.push_back(static_cast<int>(prob.ineq.size()) + k);
        out.scale.push_back(1.0);
        rows.push_back(-e);
        offs.push_back(-prob.upper[k]);
        out.source.push_back(static_cast<int>(prob.ineq.size()) + d + k);
        out.scale.push_back(1.0);
    }

    out.A.resize(static_cast<int>(rows.size()), d);
    out.c.resize(static_cast<int>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        out.A.row(static_cast<int>(r)) = rows[r];
        out.c[static_cast<int>(r)] = offs[r];
    }
    return out;
}

double row_violation(const QpProblem& prob, const Eigen::VectorXd& u) {
    double worst = 0.0;
    for (const auto& [a, b] : prob.ineq) worst = std::max(worst, -(a.dot(u) + b));
    return worst;
}

// One proximal step of the least-violation problem: rows in `slack` get a
// slack variable, every other row and the box stay hard (the reference point
// already satisfies them, and the walk cannot leave them). Minimizes
// ||s||^2 + eps ||u - center||^2; iterating with center <- u converges to the
// exact least-violation point because the proximal term has zero gradient at
// the fixed point.
Eigen::VectorXd phase1_prox_step(const NormalizedRows& nr, const QpProblem& prob,
                                 const std::vector<int>& slack, const Eigen::VectorXd& center,
                                 int* iters) {
    const int d = prob.dim;
    const int r = static_cast<int>(slack.size());
    const int dim = d + r;
    const double w_u = 0.1;  // sqrt of the proximal weight
    std::vector<char> slacked(static_cast<size_t>(nr.num_ineq), 0);
    for (int i : slack) slacked[static_cast<size_t>(i)] = 1;

    // Scaled variables: zu = w_u * u, zs = s. Rows are rescaled to match.
    const int rows_total = nr.num_ineq + r + 2 * d;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows_total, dim);
    Eigen::VectorXd c(rows_total);
    int row = 0;
    for (int i = 0; i < nr.num_ineq; ++i) {
        A.block(row, 0, 1, d) = nr.A.row(i) / w_u;
        c[row] = nr.c[i];
        ++row;
    }
    for (int k = 0; k < r; ++k) {
        A(slack[static_cast<size_t>(k)], d + k) = 1.0;  // slack joins its row
        A(row, d + k) = 1.0;                            // s >= 0
        c[row] = 0.0;
        ++row;
    }
    for (int k = 0; k < d; ++k) {
        A(row, k) = 1.0 / w_u;
        c[row] = prob.lower[k];
        ++row;
        A(row, k) = -1.0 / w_u;
        c[row] = -prob.upper[k];
        ++row;
    }
    for (int i = 0; i < A.rows(); ++i) {
        const double nrm = A.row(i).norm();
        A.row(i) /= nrm;
        c[i] /= nrm;
    }

    Eigen::VectorXd z0(dim), z(dim);
    z0.head(d) = w_u * center;
    z0.tail(r).setZero();
    z.head(d) = w_u * center;
    for (int k = 0; k < r; ++k) {
        const int i = slack[static_cast<size_t>(k)];
        z[d + k] = std::max(0.0, nr.c[i] - nr.A.row(i).dot(center));
    }

    const LdpResult res = ldp_active_set(A, c, z0, z, kMaxIter);
    if (iters) *iters += res.iters;
    Eigen::VectorXd u = res.z.head(d) / w_u;
    // Guard against roundoff drifting outside the hard box.
    for (int k = 0; k < d; ++k) u[k] = std::clamp(u[k], prob.lower[k], prob.upper[k]);
    return u;
}

// Exact least-violation point via proximal re-centering, slacking only the
// rows the reference point violates.
Eigen::VectorXd phase1(const NormalizedRows& nr, const QpProblem& prob,
                       const Eigen::VectorXd& u_ref, int* iters) {
    std::vector<int> slack;
    for (int i = 0; i < nr.num_ineq; ++i)
        if (nr.A.row(i).dot(u_ref) < nr.c[i] - 1e-14) slack.push_back(i);

    Eigen::VectorXd center = u_ref;
    for (int outer = 0; outer < 60; ++outer) {
        const Eigen::VectorXd next = phase1_prox_step(nr, prob, slack, center, iters);
        const double moved = (next - center).lpNorm<Eigen::Infinity>();
        center = next;
        if (row_violation(prob, center) <= 1e-12 || moved <= 1e-12) break;
    }
    return center;
}

}  // namespace

QpSolution solve_qp(const QpProblem& prob) {
    if (prob.dim <= 0) throw std::invalid_argument("qp dimension must be positive");
    if (prob.u_des.size() != prob.dim || prob.lower.size() != prob.dim ||
        prob.upper.size() != prob.dim)
        throw std::invalid_argument("qp vector sizes do not match dim");
    if (!prob.u_des.allFinite() || !prob.lower.allFinite() || !prob.upper.allFinite())
        throw std::invalid_argument("qp data not finite");
    for (int k = 0; k < prob.dim; ++k)
        if (prob.lower[k] > prob.upper[k]) throw std::invalid_argument("qp bounds inverted");

    const NormalizedRows nr = assemble(prob);
    const int total = static_cast<int>(prob.ineq.size()) + 2 * prob.dim;

    QpSolution sol;
    sol.lambda = Eigen::VectorXd::Zero(total);

    Eigen::VectorXd clamped = prob.u_des.cwiseMax(prob.lower).cwiseMin(prob.upper);

    if (nr.trivially_infeasible) {
        sol.u_act = clamped;
        sol.status = QpStatus::infeasible;
        sol.max_violation = std::max(nr.trivial_violation, row_violation(prob, sol.u_act));
        return sol;
    }

    int iters = 0;
    Eigen::VectorXd start = clamped;
    if (nr.A.rows() > 0 && (nr.A * start - nr.c).minCoeff() < -kFeasTol) {
        // A zero command (boxed if needed) often satisfies every row; prefer
        // it as the walk's origin before paying for a least-violation solve.
        const Eigen::VectorXd rest =
            Eigen::VectorXd::Zero(prob.dim).cwiseMax(prob.lower).cwiseMin(prob.upper);
        if ((nr.A * rest - nr.c).minCoeff() >= -kFeasTol) {
            start = rest;
        } else {
            const auto violations = [&](const Eigen::VectorXd& u) {
                int count = 0;
                for (int i = 0; i < nr.A.rows(); ++i)
                    if (nr.A.row(i).dot(u) < nr.c[i] - kFeasTol) ++count;
                return count;
            };
            const Eigen::VectorXd& ref = violations(rest) <= violations(clamped) ? rest : clamped;
            start = phase1(nr, prob, ref, &iters);
            const double viol = row_violation(prob, start);
            if (viol > kFeasTol) {
                sol.u_act = start;
                sol.status = QpStatus::infeasible;
                sol.max_violation = viol;
                sol.iterations = iters;
                return sol;
            }
        }
    }

    const LdpResult res = ldp_active_set(nr.A, nr.c, prob.u_des, start, kMaxIter - iters);
    sol.iterations = iters + res.iters;
    sol.u_act = res.z;
    sol.max_violation = row_violation(prob, sol.u_act);
    if (!res.converged) {
        sol.status = QpStatus::max_iter;
        return sol;
    }
    sol.status = QpStatus::optimal;
    for (int r = 0; r < res.lambda.size(); ++r) {
        if (res.lambda[r] == 0.0) continue;
        const auto rs = static_cast<size_t>(r);
        sol.lambda[nr.source[rs]] += res.lambda[r] / nr.scale[rs];
    }
    return sol;
}

QpKktResidual kkt_residual(const QpProblem& prob, const QpSolution& sol) {
    QpKktResidual out;
    const int d = prob.dim;
    const int ni = static_cast<int>(prob.ineq.size());
    Eigen::VectorXd grad = sol.u_act - prob.u_des;
    for (int k = 0; k < ni; ++k) {
        const auto& [a, b] = prob.ineq[static_cast<size_t>(k)];
        grad -= sol.lambda[k] * a;
        const double slack = a.dot(sol.u_act) + b;
        out.feasibility = std::max(out.feasibility, -slack);
        out.complementarity = std::max(out.complementarity, std::abs(sol.lambda[k] * slack));
    }
    for (int k = 0; k < d; ++k) {
        const double lam_lo = sol.lambda[ni + k];
        const double lam_hi = sol.lambda[ni + d + k];
        grad[k] -= lam_lo;
        grad[k] += lam_hi;
        const double slack_lo = sol.u_act[k] - prob.lower[k];
        const double slack_hi = prob.upper[k] - sol.u_act[k];
        out.feasibility = std::max({out.feasibility, -slack_lo, -slack_hi});
        out.complementarity =
            std::max({out.complementarity, std::abs(lam_lo * slack_lo), std::abs(lam_hi * slack_hi)});
    }
    out.stationarity = grad.lpNorm<Eigen::Infinity>();
    return out;
}

}  // namespace rta
