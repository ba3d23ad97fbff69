#include "semvec/surface.hpp"

#include <cmath>

namespace semvec {

static void check_prob_vector(const Eigen::VectorXd& v, const char* name) {
    if (v.size() < 2) throw ConfigError("probability vector too short");
    if ((v.array() <= 0.0).any())
        throw NumericalError(std::string(name) + " has a zero or negative component");
    if (std::abs(v.sum() - 1.0) > 1e-9)
        throw NumericalError(std::string(name) + " does not sum to 1");
}

SurfacePoint surface_point(const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
    if (q.size() != p.size()) throw ConfigError("surface_point: size mismatch");
    check_prob_vector(q, "q");
    check_prob_vector(p, "p");
    SurfacePoint pt;
    pt.q = q;
    pt.p = p;
    pt.s = (q.array() / p.array()).log().matrix();
    return pt;
}

double tangent_normal_residual(const SurfacePoint& pt) {
    const auto& q = pt.q;
    const int n = static_cast<int>(q.size());
    // J_ii = 1/q_i (i < n), J_nj = -1/q_n, zero elsewhere; q^T J evaluated as written.
    double worst = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
        double v = q[j] * (1.0 / q[j]) + q[n - 1] * (-1.0 / q[n - 1]);
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

const char* orthant_name(Orthant o) {
    switch (o) {
        case Orthant::mixed_sign: return "mixed_sign";
        case Orthant::all_positive: return "all_positive";
        case Orthant::all_negative: return "all_negative";
        default: return "zero";
    }
}

Orthant orthant_check(const Eigen::VectorXd& s, double tol) {
    bool pos = false, neg = false;
    for (int i = 0; i < s.size(); ++i) {
        if (s[i] > tol) pos = true;
        else if (s[i] < -tol) neg = true;
    }
    if (pos && neg) return Orthant::mixed_sign;
    if (pos) return Orthant::all_positive;
    if (neg) return Orthant::all_negative;
    return Orthant::zero;
}

double sum_closure_residual(const SurfacePoint& a, const SurfacePoint& b) {
    if (a.p.size() != b.p.size() || (a.p - b.p).lpNorm<Eigen::Infinity>() > 1e-12)
        throw ConfigError("sum_closure_residual: points have different base marginals");
    return ((a.q.array() / a.p.array() - 1.0) * b.q.array()).sum();
}

double off_surface_deviation(const Eigen::VectorXd& s, const Eigen::VectorXd& p) {
    if (s.size() != p.size()) throw ConfigError("off_surface_deviation: size mismatch");
    return std::abs((p.array() * s.array().exp()).sum() - 1.0);
}

SurfacePoint random_surface_point(const Eigen::VectorXd& p, double alpha, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    Eigen::VectorXd q(p.size());
    double sum = 0.0;
    for (int i = 0; i < q.size(); ++i) {
        q[i] = gamma(rng) + 1e-12;
        sum += q[i];
    }
    q /= sum;
    return surface_point(q, p);
}

SurfacePoint closure_partner(const SurfacePoint& a, std::mt19937_64& rng) {
    const int n = static_cast<int>(a.p.size());
    Eigen::VectorXd ratio = (a.q.array() / a.p.array()).matrix();
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 64; ++attempt) {
        Eigen::VectorXd d(n);
        for (int i = 0; i < n; ++i) d[i] = gauss(rng);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        // Project out 1 and q_a/p so q_b keeps unit mass and closes the sum.
        Eigen::VectorXd r = ratio - ones * (ratio.dot(ones) / n);
        d -= ones * (d.dot(ones) / n);
        double rr = r.squaredNorm();
        if (rr > 0) d -= r * (d.dot(r) / rr);
        double mx = d.lpNorm<Eigen::Infinity>();
        if (mx == 0.0) continue;
        double eps = 0.5 * a.p.minCoeff() / mx;
        Eigen::VectorXd qb = a.p + eps * d;
        if ((qb.array() > 0).all()) {
            qb /= qb.sum();  // sum is 1 up to rounding already
            return surface_point(qb, a.p);
        }
    }
    throw NumericalError("closure_partner: could not construct a positive partner");
}

}  // namespace semvec
