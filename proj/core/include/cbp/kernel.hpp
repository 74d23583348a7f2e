#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbp {

// Thrown when a model object (kernel, distribution, graph, ...) is invalid
// or an operation on it cannot produce a meaningful result.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelFamily { constant, linear, custom };

// Tail behaviour declared for tabulated kernels; drives the certified
// remainder rules for the reproduction transform series.
enum class GrowthClass { bounded, asymptotically_linear };

struct CustomKernelSpec {
  std::vector<double> values;  // f(1), f(2), ..., f(values.size())
  GrowthClass growth = GrowthClass::bounded;
  double growth_param = 0.0;  // bound B, or asymptotic slope s
};

// Attachment rate function f: a node in state k reproduces at rate f(k+1).
// Carries the linear-domination constant C_f (f(k) <= C_f k on checked
// range) and the infimum f_star (f(k) >= f_star > 0).
class AttachmentKernel {
 public:
  static AttachmentKernel constant(double beta);
  static AttachmentKernel linear(double slope, double offset);
  static AttachmentKernel custom(CustomKernelSpec spec);

  // f(k), k >= 1. Pure. Custom kernels throw past their table.
  double operator()(std::int64_t k) const;

  KernelFamily family() const { return family_; }
  double slope() const { return slope_; }
  double offset() const { return offset_; }
  double cf() const { return cf_; }
  double f_star() const { return f_star_; }
  GrowthClass growth() const { return growth_; }
  double growth_param() const { return growth_param_; }

  // lower edge of the theta-domain on which the series tail can be
  // certified (0 when the whole positive axis is certifiable)
  double theta_lower() const;

  // size of the value table (0 = analytic family, unbounded evaluation)
  std::int64_t table_size() const {
    return static_cast<std::int64_t>(table_.size());
  }

  std::string describe() const;

 private:
  AttachmentKernel() = default;

  KernelFamily family_ = KernelFamily::constant;
  double slope_ = 0.0;
  double offset_ = 0.0;
  double cf_ = 0.0;
  double f_star_ = 0.0;
  GrowthClass growth_ = GrowthClass::bounded;
  double growth_param_ = 0.0;
  std::vector<double> table_;
};

// One evaluation of the series  sum_{n>=1} prod_{i<=n} f(i)/(theta + f(i)).
// `value` is the bare partial sum; the dropped tail lies in
// [remainder_lower, remainder_bound], both certified.
struct RhoEvaluation {
  double theta = 0.0;
  double value = 0.0;
  std::int64_t truncation_index = 0;
  double remainder_bound = 0.0;
  double remainder_lower = 0.0;
  bool divergent = false;
  bool certified = false;  // remainder_bound <= requested eps

  double estimate() const {
    return value + 0.5 * (remainder_lower + remainder_bound);
  }
  double half_width() const {
    return 0.5 * (remainder_bound - remainder_lower);
  }
};

struct MalthusianResult {
  double lambda = 0.0;
  double residual = 0.0;  // series estimate at lambda, minus 1
  std::pair<double, double> bracket{0.0, 0.0};
};

// Truncated series with a certified remainder <= eps where the family's
// tail rule permits; otherwise the result carries certified=false and the
// best available bounds. Flags divergence when certifiable (linear family
// with theta <= slope).
RhoEvaluation rho_hat(const AttachmentKernel& kernel, double theta, double eps,
                      std::int64_t max_terms = (std::int64_t{1} << 26));

// Fixed-index evaluation: partial sum over exactly min(n_terms, table)
// terms plus the family tail bounds. Used by the solver, where the interval
// [value+lower, value+bound] matters rather than the bound's absolute size.
RhoEvaluation rho_eval_fixed(const AttachmentKernel& kernel, double theta,
                             std::int64_t n_terms);

// Root of rho(theta) = 1 by bracket doubling from [f_star/2, 2 C_f]
// followed by bisection. Throws ModelError when no root exists on the
// certifiable domain or the requested tolerance cannot be certified.
MalthusianResult malthusian_rate(const AttachmentKernel& kernel,
                                 double tol = 1e-10);

struct AssumptionReport {
  std::int64_t check_bound = 0;
  bool positivity_ok = true;
  std::int64_t first_nonpositive = 0;
  bool linear_bound_ok = true;  // f(k) <= C_f k
  std::int64_t first_linear_violation = 0;
  bool lower_bound_ok = true;  // f(k) >= f_star
  std::int64_t first_lower_violation = 0;
  bool malthusian_ok = false;
  double lambda = 0.0;
  std::string malthusian_note;

  bool all_ok() const {
    return positivity_ok && linear_bound_ok && lower_bound_ok && malthusian_ok;
  }
};

// Checks f(k) > 0, f(k) <= C_f k and f(k) >= f_star for k <= check_bound
// (clamped to the table for custom kernels), and records the solver's
// evidence for the existence of the Malthusian root.
AssumptionReport validate_assumptions(const AttachmentKernel& kernel,
                                      std::int64_t check_bound);

}  // namespace cbp
