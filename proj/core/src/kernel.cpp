#include "cbp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cbp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// relative margin applied to analytically exact tail values so the reported
// interval certifiably contains the true remainder despite fp rounding
constexpr double kFpMargin = 1e-12;

// Exact tail of the linear-family series after N terms, by telescoping:
//   sum_{n>N} prod_{i<=n} (i+a)/(i+b)
//     = Gamma(1+b)/Gamma(1+a) * Gamma(N+2+a) / ((s-1) Gamma(N+1+b)),
// with a = offset/slope, b = (theta+offset)/slope, s = b - a = theta/slope.
// Finite iff s > 1.
double linear_tail_exact(double a, double b, std::int64_t n) {
  const double s = b - a;
  const double lg = std::lgamma(1.0 + b) - std::lgamma(1.0 + a) +
                    std::lgamma(static_cast<double>(n) + 2.0 + a) -
                    std::lgamma(static_cast<double>(n) + 1.0 + b);
  return std::exp(lg) / (s - 1.0);
}

}  // namespace

AttachmentKernel AttachmentKernel::constant(double beta) {
  if (!(beta > 0.0)) throw ModelError("constant kernel requires beta > 0");
  AttachmentKernel k;
  k.family_ = KernelFamily::constant;
  k.offset_ = beta;
  k.cf_ = beta;  // binding at k = 1
  k.f_star_ = beta;
  return k;
}

AttachmentKernel AttachmentKernel::linear(double slope, double offset) {
  if (!(slope >= 0.0)) throw ModelError("linear kernel requires slope >= 0");
  if (!(slope + offset > 0.0))
    throw ModelError("linear kernel requires slope + offset > 0");
  if (slope == 0.0) return constant(offset);
  AttachmentKernel k;
  k.family_ = KernelFamily::linear;
  k.slope_ = slope;
  k.offset_ = offset;
  k.cf_ = slope + std::max(offset, 0.0);
  k.f_star_ = slope + offset;  // increasing in k, minimum at k = 1
  return k;
}

AttachmentKernel AttachmentKernel::custom(CustomKernelSpec spec) {
  if (spec.values.empty()) throw ModelError("custom kernel table is empty");
  double fmin = kInf;
  for (const double v : spec.values) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ModelError("custom kernel values must be positive and finite");
    fmin = std::min(fmin, v);
  }
  if (!(spec.growth_param > 0.0))
    throw ModelError("custom kernel growth parameter must be positive");
  AttachmentKernel k;
  k.family_ = KernelFamily::custom;
  k.growth_ = spec.growth;
  k.growth_param_ = spec.growth_param;
  k.table_ = std::move(spec.values);
  k.f_star_ = fmin;
  // C_f is the declared domination constant; validate_assumptions reports
  // whether the table actually honors it
  k.cf_ = spec.growth_param;
  return k;
}

double AttachmentKernel::operator()(std::int64_t k) const {
  if (k < 1) throw ModelError("attachment function argument must be >= 1");
  switch (family_) {
    case KernelFamily::constant:
      return offset_;
    case KernelFamily::linear:
      return slope_ * static_cast<double>(k) + offset_;
    case KernelFamily::custom:
      if (k > static_cast<std::int64_t>(table_.size())) {
        std::ostringstream os;
        os << "custom kernel evaluated at k=" << k << " past its table of "
           << table_.size() << " values";
        throw ModelError(os.str());
      }
      return table_[static_cast<std::size_t>(k - 1)];
  }
  return 0.0;  // unreachable
}

double AttachmentKernel::theta_lower() const {
  switch (family_) {
    case KernelFamily::constant:
      return 0.0;
    case KernelFamily::linear:
      return slope_;
    case KernelFamily::custom:
      return growth_ == GrowthClass::bounded ? 0.0 : growth_param_;
  }
  return 0.0;
}

std::string AttachmentKernel::describe() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::constant:
      os << "constant(" << offset_ << ")";
      break;
    case KernelFamily::linear:
      os << "linear(" << slope_ << ", " << offset_ << ")";
      break;
    case KernelFamily::custom:
      os << "custom[" << table_.size() << " values, "
         << (growth_ == GrowthClass::bounded ? "bounded " : "asym-linear ")
         << growth_param_ << "]";
      break;
  }
  return os.str();
}

namespace {

struct TailBounds {
  double lower = 0.0;
  double upper = kInf;
  bool divergent = false;
};

// Certified bounds on the tail after `n` terms, where `term` is the n-th
// term of the series. All bounds shrink to zero as n grows, except for the
// asymptotically-linear rule at theta <= slope (upper stays infinite).
TailBounds tail_bounds(const AttachmentKernel& k, double theta,
                       std::int64_t n, double term) {
  TailBounds tb;
  if (term <= 0.0) {  // underflowed to zero: tail is numerically zero
    tb.lower = 0.0;
    tb.upper = term < 0 ? kInf : 5e-324;
    return tb;
  }
  switch (k.family()) {
    case KernelFamily::constant: {
      const double r = k.offset() / (theta + k.offset());
      const double t = term * r / (1.0 - r);  // exact geometric tail
      tb.lower = t * (1.0 - kFpMargin);
      tb.upper = t * (1.0 + kFpMargin);
      return tb;
    }
    case KernelFamily::linear: {
      const double c = k.slope();
      if (theta <= c * (1.0 + 1e-14)) {
        tb.divergent = true;
        return tb;
      }
      const double a = k.offset() / c;
      const double b = (theta + k.offset()) / c;
      const double t = linear_tail_exact(a, b, n);
      tb.lower = t * (1.0 - kFpMargin);
      tb.upper = t * (1.0 + kFpMargin) + 5e-324;
      return tb;
    }
    case KernelFamily::custom: {
      // lower bound from f >= f_star (factors >= f_star/(theta+f_star))
      const double rlo = k.f_star() / (theta + k.f_star());
      tb.lower = term * rlo / (1.0 - rlo) * (1.0 - kFpMargin);
      if (k.growth() == GrowthClass::bounded) {
        const double big = k.growth_param();
        const double r = big / (theta + big);
        tb.upper = term * r / (1.0 - r) * (1.0 + kFpMargin);
      } else {
        const double s = k.growth_param();
        if (theta <= s * (1.0 + 1e-14)) {
          tb.upper = kInf;  // not certifiable from above
        } else {
          // f(i) <= s i gives factor_i <= i/(i + theta/s); integral test:
          //   tail <= term_n (n + 1 + theta/s) / (theta/s - 1)
          const double p = theta / s;
          tb.upper = term * (static_cast<double>(n) + 1.0 + p) / (p - 1.0) *
                     (1.0 + kFpMargin);
        }
      }
      return tb;
    }
  }
  return tb;
}

// log-space partial sum of the first n terms (Kahan-compensated)
RhoEvaluation partial_sum(const AttachmentKernel& k, double theta,
                          std::int64_t n) {
  RhoEvaluation ev;
  ev.theta = theta;
  double sum = 0.0, comp = 0.0, log_term = 0.0, term = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    const double f = k(i);
    log_term += std::log(f) - std::log(theta + f);
    term = std::exp(log_term);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  ev.value = sum;
  ev.truncation_index = n;
  const TailBounds tb = tail_bounds(k, theta, n, term);
  ev.remainder_lower = tb.lower;
  ev.remainder_bound = tb.upper;
  ev.divergent = tb.divergent;
  return ev;
}

}  // namespace

RhoEvaluation rho_eval_fixed(const AttachmentKernel& kernel, double theta,
                             std::int64_t n_terms) {
  if (!(theta > 0.0)) throw ModelError("rho_hat requires theta > 0");
  if (kernel.table_size() > 0)
    n_terms = std::min(n_terms, kernel.table_size());
  return partial_sum(kernel, theta, std::max<std::int64_t>(n_terms, 1));
}

RhoEvaluation rho_hat(const AttachmentKernel& kernel, double theta, double eps,
                      std::int64_t max_terms) {
  if (!(theta > 0.0)) throw ModelError("rho_hat requires theta > 0");
  if (!(eps > 0.0)) throw ModelError("rho_hat requires eps > 0");

  // divergent linear series: certified, no summation needed
  if (kernel.family() == KernelFamily::linear &&
      theta <= kernel.slope() * (1.0 + 1e-14)) {
    RhoEvaluation ev;
    ev.theta = theta;
    ev.divergent = true;
    ev.remainder_bound = kInf;
    return ev;
  }

  std::int64_t cap = max_terms;
  if (kernel.table_size() > 0) cap = std::min(cap, kernel.table_size());

  // grow the truncation index geometrically until the certified tail bound
  // drops below eps; the quadrupling keeps the total summation work within
  // a constant factor of the final index
  std::int64_t n = 32;
  for (;;) {
    n = std::min(n, cap);
    RhoEvaluation ev = partial_sum(kernel, theta, n);
    if (ev.remainder_bound <= eps) {
      ev.certified = true;
      return ev;
    }
    if (n >= cap) {
      ev.certified = false;
      return ev;
    }
    n *= 4;
  }
}

namespace {

enum class Side { above, below, root_zone, unknown };

Side classify(const RhoEvaluation& ev, double tol) {
  if (ev.divergent) return Side::above;
  if (std::isfinite(ev.remainder_bound)) {
    const double lo = ev.value + ev.remainder_lower;
    const double hi = ev.value + ev.remainder_bound;
    if (lo > 1.0) return Side::above;
    if (hi < 1.0) return Side::below;
    return Side::root_zone;
  }
  // uncertified from above: the bare partial sum is still a valid lower bound
  if (ev.value >= 1.0 + tol) return Side::above;
  return Side::unknown;
}

}  // namespace

MalthusianResult malthusian_rate(const AttachmentKernel& kernel, double tol) {
  if (!(tol > 0.0)) throw ModelError("malthusian_rate requires tol > 0");
  const std::int64_t n_solver = 512;
  const auto eval = [&](double theta) {
    return rho_eval_fixed(kernel, theta, n_solver);
  };

  double lo = kernel.f_star() / 2.0;
  double hi = 2.0 * kernel.cf();

  // the series dominates f_star/theta, so rho(f_star/2) >= 2: lo is always
  // on the >=1 side when evaluable; divergence counts as above as well
  {
    const Side s = classify(eval(lo), tol);
    if (s == Side::below)
      throw ModelError("rho already below 1 at theta = f_star/2; no root");
    if (s == Side::unknown)
      throw ModelError("rho not certifiable at the lower bracket end");
  }

  int doublings = 0;
  for (; doublings < 200; ++doublings) {
    const Side s = classify(eval(hi), tol);
    if (s == Side::below) break;
    if (s == Side::unknown) {
      std::ostringstream os;
      os << "no Malthusian root certifiable: rho cannot be evaluated above "
            "theta="
         << hi << " (certifiable domain edge " << kernel.theta_lower() << ")";
      throw ModelError(os.str());
    }
    if (s == Side::root_zone) {
      const RhoEvaluation ev = eval(hi);
      if (std::abs(ev.estimate() - 1.0) <= tol && ev.half_width() <= tol)
        return {hi, ev.estimate() - 1.0, {lo, hi}};
    }
    lo = hi;
    hi *= 2.0;
  }
  if (doublings == 200)
    throw ModelError(
        "no Malthusian root: rho stays >= 1 over the searched domain");

  const std::pair<double, double> bracket{lo, hi};
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    const RhoEvaluation ev = eval(mid);
    const Side s = classify(ev, tol);
    if (s == Side::unknown) {
      std::ostringstream os;
      os << "no Malthusian root on the certifiable domain: rho < 1 for theta "
            ">= "
         << hi << " but theta=" << mid
         << " is below the certifiable edge (growth class limits evaluation "
            "to theta > "
         << kernel.theta_lower() << ")";
      throw ModelError(os.str());
    }
    if (s == Side::above) {
      lo = mid;
      continue;
    }
    if (s == Side::below) {
      hi = mid;
      continue;
    }
    if (std::abs(ev.estimate() - 1.0) <= tol * 0.5) break;
    // inside the root zone the interval straddles 1: shrink on the estimate
    if (ev.estimate() > 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }

  const RhoEvaluation fin = eval(mid);
  const double residual = fin.estimate() - 1.0;
  if (!(std::abs(residual) <= tol) || fin.half_width() > tol) {
    std::ostringstream os;
    os << "malthusian_rate: tolerance " << tol
       << " not certifiable (residual " << residual << ", half width "
       << fin.half_width() << ")";
    throw ModelError(os.str());
  }
  return {mid, residual, bracket};
}

AssumptionReport validate_assumptions(const AttachmentKernel& kernel,
                                      std::int64_t check_bound) {
  if (check_bound < 1)
    throw ModelError("validate_assumptions requires check_bound >= 1");
  AssumptionReport rep;
  std::int64_t bound = check_bound;
  if (kernel.table_size() > 0) bound = std::min(bound, kernel.table_size());
  rep.check_bound = bound;

  for (std::int64_t k = 1; k <= bound; ++k) {
    const double f = kernel(k);
    if (rep.positivity_ok && !(f > 0.0)) {
      rep.positivity_ok = false;
      rep.first_nonpositive = k;
    }
    if (rep.linear_bound_ok &&
        f > kernel.cf() * static_cast<double>(k) * (1.0 + 1e-12)) {
      rep.linear_bound_ok = false;
      rep.first_linear_violation = k;
    }
    if (rep.lower_bound_ok && f < kernel.f_star() * (1.0 - 1e-12)) {
      rep.lower_bound_ok = false;
      rep.first_lower_violation = k;
    }
  }

  try {
    const MalthusianResult mr = malthusian_rate(kernel, 1e-9);
    rep.malthusian_ok = true;
    rep.lambda = mr.lambda;
    std::ostringstream os;
    os << "rho(lambda)=1 at lambda=" << mr.lambda << " (residual "
       << mr.residual << ")";
    rep.malthusian_note = os.str();
  } catch (const ModelError& e) {
    rep.malthusian_ok = false;
    rep.malthusian_note = e.what();
  }
  return rep;
}

}  // namespace cbp
