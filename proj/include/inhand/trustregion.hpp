#pragma once

#include <Eigen/Dense>
#include <functional>

namespace inhand {

// a . x >= b
struct LinearConstraint {
  Eigen::VectorXd a;
  double b{0.0};
};

struct TrustRegionOptions {
  int max_evals{200};
  double rho_begin{0.5};
  double rho_end{1e-5};
};

struct TrustRegionResult {
  Eigen::VectorXd x;
  double fx{0.0};
  int evals{0};
  double f0{0.0};  // objective at the initial point
};

// Derivative-free minimizer for linearly constrained problems: builds a
// linear model of the objective from forward differences at scale rho, takes
// a constrained regularized model step, and shrinks rho when the step stops
// paying off. Returns the best feasible point seen; never worse than x0.
// x0 must be feasible.
TrustRegionResult minimize_trust_region(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x0,
                                        const std::vector<LinearConstraint>& constraints,
                                        const TrustRegionOptions& options = {});

// Euclidean projection onto the constraint polytope.
Eigen::VectorXd project_to_constraints(const Eigen::VectorXd& x,
                                       const std::vector<LinearConstraint>& constraints);

}  // namespace inhand
