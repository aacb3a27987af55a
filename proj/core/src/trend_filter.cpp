#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "qkdline/losscontrol.hpp"

namespace qkdline::losscontrol {

namespace {

constexpr double kEpsAbs = 1e-6;
constexpr double kEpsRel = 1e-6;
constexpr std::size_t kMaxIterations = 10000;

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

std::vector<double> l1_trend_filter(std::span<const double> y, double lambda) {
    if (lambda < 0) throw std::invalid_argument("trend filter lambda must be nonnegative");
    const std::size_t n = y.size();
    if (n < 3 || lambda == 0.0) return {y.begin(), y.end()};
    const Eigen::Index ni = static_cast<Eigen::Index>(n);

    using Sparse = Eigen::SparseMatrix<double>;
    Sparse d(ni - 2, ni);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(3 * (n - 2));
        for (Eigen::Index i = 0; i < ni - 2; ++i) {
            trip.emplace_back(i, i, 1.0);
            trip.emplace_back(i, i + 1, -2.0);
            trip.emplace_back(i, i + 2, 1.0);
        }
        d.setFromTriplets(trip.begin(), trip.end());
    }
    const Sparse dt = d.transpose();
    const Sparse dtd = dt * d;
    Sparse identity(ni, ni);
    identity.setIdentity();

    Eigen::VectorXd yv(ni);
    for (std::size_t i = 0; i < n; ++i) yv[static_cast<Eigen::Index>(i)] = y[i];

    double rho = std::max(1.0, lambda);
    Eigen::SimplicialLDLT<Sparse> solver;
    auto refactor = [&] {
        const Sparse a = identity + rho * dtd;
        solver.compute(a);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("trend filter: factorization failed");
    };
    refactor();
    constexpr double kRelax = 1.8;

    Eigen::VectorXd x = yv;
    Eigen::VectorXd dx = d * x;
    Eigen::VectorXd z = dx;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(ni - 2);

    double r_norm = 0.0, s_norm = 0.0;
    for (std::size_t iter = 1; iter <= kMaxIterations; ++iter) {
        x = solver.solve(yv + rho * (dt * (z - u)));
        dx = d * x;
        const Eigen::VectorXd z_old = z;
        const Eigen::VectorXd dx_hat = kRelax * dx + (1.0 - kRelax) * z_old;
        const double t = lambda / rho;
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = soft_threshold(dx_hat[i] + u[i], t);
        u += dx_hat - z;

        r_norm = (dx - z).norm();
        s_norm = (rho * (dt * (z - z_old))).norm();
        const double eps_pri =
            std::sqrt(double(n - 2)) * kEpsAbs + kEpsRel * std::max(dx.norm(), z.norm());
        const double eps_dual =
            std::sqrt(double(n)) * kEpsAbs + kEpsRel * (rho * (dt * u)).norm();
        if (r_norm < eps_pri && s_norm < eps_dual) {
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = x[static_cast<Eigen::Index>(i)];
            return out;
        }
        if (r_norm > 10.0 * s_norm) {
            rho *= 2.0;
            u *= 0.5;
            refactor();
        } else if (s_norm > 10.0 * r_norm) {
            rho *= 0.5;
            u *= 2.0;
            refactor();
        }
    }
    std::ostringstream msg;
    msg << "trend filter did not converge in " << kMaxIterations
        << " iterations (primal residual " << r_norm << ", dual residual " << s_norm << ")";
    throw std::runtime_error(msg.str());
}

OTDRTrace l1_trend_filter(const OTDRTrace& trace, double lambda) {
    OTDRTrace out = trace;
    out.power_db = l1_trend_filter(std::span<const double>(trace.power_db), lambda);
    return out;
}

}  // namespace qkdline::losscontrol
