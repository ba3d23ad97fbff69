// Geometry of the PMI hyper-surface S = { log(q/p) : q on the simplex }.
#pragma once

#include <Eigen/Dense>

#include "semvec/common.hpp"

namespace semvec {

struct SurfacePoint {
    Eigen::VectorXd s;  // log(q/p), elementwise
    Eigen::VectorXd q;  // inducing probability vector
    Eigen::VectorXd p;  // base marginal
};

// Requires strictly positive probability vectors of equal length summing to 1.
SurfacePoint surface_point(const Eigen::VectorXd& q, const Eigen::VectorXd& p);

// Deviation of q from being normal to the tangent plane: max |q^T J| with
// J the Jacobian of s w.r.t. the free parameters q_{j<n}.
double tangent_normal_residual(const SurfacePoint& pt);

enum class Orthant { mixed_sign, all_positive, all_negative, zero };
const char* orthant_name(Orthant o);
Orthant orthant_check(const Eigen::VectorXd& s, double tol);

// (q_a/p - 1)^T q_b; zero iff a + b stays on the surface.
double sum_closure_residual(const SurfacePoint& a, const SurfacePoint& b);

// |sum_j p_j exp(s_j) - 1|: the off-surface deviation of an arbitrary vector
// relative to base p (0 iff exp(s)*p renormalises to a probability vector).
double off_surface_deviation(const Eigen::VectorXd& s, const Eigen::VectorXd& p);

// Random point on the surface with the given base, Dirichlet(alpha) inducing vector.
SurfacePoint random_surface_point(const Eigen::VectorXd& p, double alpha, std::mt19937_64& rng);

// q_b = p + eps*d with d orthogonal to both 1 and q_a/p: an exact closure partner of a.
SurfacePoint closure_partner(const SurfacePoint& a, std::mt19937_64& rng);

}  // namespace semvec
