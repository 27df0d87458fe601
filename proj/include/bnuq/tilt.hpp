#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnuq/kernels.hpp"

namespace bnuq {

enum class CgfKind { closed_form, discrete, mc_estimate, mixture };

struct CgfValue {
  double value = 0.0;   // Lambda(c)
  double first = 0.0;   // Lambda'(c), the tilted mean of f-bar
  double second = 0.0;  // Lambda''(c), the tilted variance
  double ess = std::numeric_limits<double>::infinity();
};

// CGF of a centered QoI f-bar under P_A. Immutable; copies share state.
class CgfHandle {
 public:
  struct Impl;

  static CgfHandle gaussian(double variance);
  // Centered gamma(shape, scale): Lambda(c) = -a log(1 - b c) - a b c, d+ = 1/b.
  static CgfHandle gamma(double shape, double scale);
  // Finite distribution; values are centered internally.
  static CgfHandle discrete(std::vector<double> values, std::vector<double> probs);
  // Equal-variance Gaussian mixture (a Gaussian KDE); weights are normalized.
  static CgfHandle gaussian_mixture(std::vector<double> means, double variance, std::vector<double> weights);
  // Mixture of uniforms on [lo_i, hi_i] (a histogram density).
  static CgfHandle uniform_mixture(std::vector<double> lo, std::vector<double> hi, std::vector<double> weights);
  // Empirical CGF of a fixed sample set, centered by its sample mean.
  static CgfHandle from_samples(std::vector<double> values, Exec exec = Exec::parallel);
  // Average of several empirical CGFs (one per conditioning configuration).
  static CgfHandle mixture(std::vector<std::vector<double>> sample_sets, Exec exec = Exec::parallel);
  // User-supplied Lambda on (d_minus, d_plus); derivatives by central
  // differences when not given. lambda_at_d_plus may be finite (truncated domain).
  struct Custom {
    std::function<double(double)> lambda;
    std::function<double(double)> first;
    double d_minus = -std::numeric_limits<double>::infinity();
    double d_plus = std::numeric_limits<double>::infinity();
    std::optional<double> lambda_at_d_plus;
    std::optional<double> first_at_d_plus;
  };
  static CgfHandle custom(Custom spec);

  CgfKind kind() const;
  // Handle of -f-bar: Lambda_-(c) = Lambda(-c).
  CgfHandle negated() const;

  // Throws DomainExceeded outside (d_minus, d_plus).
  double eval(double c) const;
  CgfValue derivatives(double c) const;

  double d_minus() const;
  double d_plus() const;
  // Lambda and Lambda' at a finite d_plus when finite there.
  std::optional<CgfValue> at_d_plus() const;
  // ess sup of f-bar and its probability mass (0 for an unattained bound).
  std::optional<std::pair<double, double>> sup_atom() const;
  std::size_t sample_count() const;

 private:
  std::shared_ptr<const Impl> impl_;
  double sign_ = 1.0;
};

enum class BoundaryCase { interior, eta_saturated_ess_sup, eta_saturated_finite_d, c_capped_mc };
const char* to_string(BoundaryCase b);

struct TiltSolution {
  double value = 0.0;
  double c = 0.0;  // +inf for the ess-sup boundary
  BoundaryCase boundary = BoundaryCase::interior;
  double eta_achieved = 0.0;
  std::size_t iterations = 0;
  double ess = std::numeric_limits<double>::infinity();
  bool converged = true;
  bool lower_bound = false;  // MC ess sup / capped c: true index may be larger in magnitude
  std::vector<std::string> warnings;
};

struct SolveOptions {
  double ess_threshold = 100.0;
  std::size_t max_iterations = 200;
};

// sign = +1 gives I+ = inf_c (Lambda(c)+eta)/c, sign = -1 gives I- = -inf_c (Lambda(-c)+eta)/c.
TiltSolution solve_index(const CgfHandle& handle, double eta, int sign, const SolveOptions& opt = {});

double cgf_eval(const CgfHandle& handle, double c);
// c Lambda'(c) - Lambda(c): the KL of the tilted law from P.
double eta_of_tilt(const CgfHandle& handle, double c);

struct TiltWeights {
  std::vector<double> weights;  // normalized
  double ess = 0.0;
  double tilted_mean = 0.0;
  bool degenerate = false;  // WeightDegeneracy: ess below threshold
};
// Self-normalized weights proportional to exp(c f_j).
TiltWeights tilt_weights(std::span<const double> f, double c, double ess_threshold = 100.0);

struct GaussianTilt {
  double mean;
  double variance;
};
// Tilting N(mean, variance) of X by exp(c a X) gives N(mean + c a variance, variance).
GaussianTilt tilt_gaussian(double mean, double variance, double a, double c);

}  // namespace bnuq
