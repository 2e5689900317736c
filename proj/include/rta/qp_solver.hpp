#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace rta {

/// Least-distance quadratic program: minimize ||u_des - u||^2 subject to
/// a.u + b >= 0 rows and box bounds.
struct QpProblem {
    int dim = 0;
    Eigen::VectorXd u_des;
    std::vector<std::pair<Eigen::VectorXd, double>> ineq;  // a.u + b >= 0
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class QpStatus { optimal, infeasible, max_iter };

struct QpSolution {
    Eigen::VectorXd u_act;
    QpStatus status = QpStatus::optimal;
    int iterations = 0;
    /// Worst violation of the inequality rows at u_act (box is always met).
    double max_violation = 0.0;
    /// Multipliers for [ineq rows, lower bounds, upper bounds]; zero unless
    /// the solve ended optimal.
    Eigen::VectorXd lambda;
};

struct QpKktResidual {
    double stationarity = 0.0;
    double feasibility = 0.0;
    double complementarity = 0.0;
};

/// Primal active-set projection. Infeasible problems return the least-violation
/// control (box bounds kept hard) with status infeasible.
QpSolution solve_qp(const QpProblem& problem);

QpKktResidual kkt_residual(const QpProblem& problem, const QpSolution& solution);

}  // namespace rta
