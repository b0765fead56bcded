#include "lrp/kernel.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lrp/rng.hpp"

namespace lrp {

double eta(double beta, double k, double s) {
  if (!(k > 0)) throw std::domain_error("eta: k must be positive");
  if (beta < 0) throw std::domain_error("eta: beta must be nonnegative");
  return -std::expm1(-beta * std::pow(k, -s));
}

namespace {

Coord canonical_offset(const Coord& k, int d) {
  for (int i = 0; i < d; ++i) {
    if (k[i] > 0) return k;
    if (k[i] < 0) {
      Coord m = {0, 0, 0, 0};
      for (int j = 0; j < d; ++j) m[j] = -k[j];
      return m;
    }
  }
  throw std::domain_error("Kernel: P_0 is undefined");
}

std::int64_t l1_norm(const Coord& k, int d) {
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) s += k[i] < 0 ? -k[i] : k[i];
  return s;
}

}  // namespace

Kernel Kernel::make_eta(int d, double s, double beta) {
  Kernel k;
  k.form_ = KernelForm::Eta;
  k.d_ = d;
  k.s_ = s;
  k.beta_ = beta;
  k.validate();
  return k;
}

Kernel Kernel::make_table(int d, double s, double tail_beta, std::int64_t table_radius,
                          const std::vector<std::pair<Coord, double>>& entries,
                          std::optional<std::int64_t> declared_zero_radius) {
  Kernel k;
  k.form_ = KernelForm::Table;
  k.d_ = d;
  k.s_ = s;
  k.beta_ = tail_beta;
  k.table_radius_ = table_radius;
  k.declared_zero_radius_ = declared_zero_radius;
  for (const auto& [off, p] : entries) {
    const Coord c = canonical_offset(off, d);
    auto [it, inserted] = k.table_.emplace(c, p);
    if (!inserted && it->second != p)
      throw std::invalid_argument("Kernel: asymmetric table pair at a +/-k offset");
  }
  k.validate();
  return k;
}

void Kernel::validate() const {
  if (d_ < 1 || d_ > kMaxDim) throw std::invalid_argument("Kernel: dimension out of range");
  if (!(s_ > static_cast<double>(d_)))
    throw std::invalid_argument("Kernel: requires s > d (decay exponent too small)");
  if (beta_ < 0) throw std::invalid_argument("Kernel: beta must be nonnegative");
  if (form_ == KernelForm::Table) {
    if (table_radius_ < 0) throw std::invalid_argument("Kernel: negative table radius");
    for (const auto& [off, p] : table_) {
      if (p < 0 || p >= 1)
        throw std::invalid_argument("Kernel: table entry outside [0,1)");
      if (l1_norm(off, d_) > table_radius_)
        throw std::invalid_argument("Kernel: table entry beyond declared radius");
      if (declared_zero_radius_ && l1_norm(off, d_) <= *declared_zero_radius_ && p != 0)
        throw std::invalid_argument("Kernel: nonzero entry inside declared zero radius");
    }
  }
}

double Kernel::prob_l1(std::int64_t l1) const {
  if (l1 <= 0) throw std::domain_error("Kernel: P_0 is undefined");
  if (form_ != KernelForm::Eta)
    throw std::logic_error("Kernel::prob_l1 is only defined for the eta form");
  if (beta_ == 0) return 0.0;
  return eta(beta_, static_cast<double>(l1), s_);
}

double Kernel::prob(const Coord& k) const {
  const Coord c = canonical_offset(k, d_);
  const std::int64_t l1 = l1_norm(c, d_);
  if (form_ == KernelForm::Eta) {
    if (beta_ == 0) return 0.0;
    return eta(beta_, static_cast<double>(l1), s_);
  }
  if (l1 <= table_radius_) {
    auto it = table_.find(c);
    if (it != table_.end()) return it->second;
    return 0.0;  // absent entries inside the radius are hard zeros
  }
  if (beta_ == 0) return 0.0;
  return eta(beta_, static_cast<double>(l1), s_);
}

std::uint64_t Kernel::hash() const {
  std::uint64_t h = derive_key(0x6b65726e656cULL, describe());
  return h;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (form_ == KernelForm::Eta) {
    os << "eta d=" << d_ << " s=" << s_ << " beta=" << beta_;
  } else {
    os << "table d=" << d_ << " s=" << s_ << " tail_beta=" << beta_
       << " radius=" << table_radius_;
    if (declared_zero_radius_) os << " zero_radius=" << *declared_zero_radius_;
    for (const auto& [off, p] : table_) {
      os << " (";
      for (int i = 0; i < d_; ++i) os << off[i] << (i + 1 < d_ ? "," : "");
      os << ")=" << p;
    }
  }
  return os.str();
}

namespace {

// Enumerate canonical offsets with |k|_1 <= radius in dimension d.
void for_each_canonical_offset(int d, std::int64_t radius,
                               const std::function<void(const Coord&)>& fn);

void enumerate_rec(int d, int axis, std::int64_t budget, Coord& cur, bool leading_set,
                   const std::function<void(const Coord&)>& fn) {
  if (axis == d) {
    if (leading_set) fn(cur);
    return;
  }
  for (std::int64_t v = -budget; v <= budget; ++v) {
    if (!leading_set && v < 0) continue;  // canonical: first nonzero positive
    cur[axis] = v;
    const bool now_set = leading_set || v > 0;
    enumerate_rec(d, axis + 1, budget - (v < 0 ? -v : v), cur, now_set, fn);
  }
  cur[axis] = 0;
}

void for_each_canonical_offset(int d, std::int64_t radius,
                               const std::function<void(const Coord&)>& fn) {
  Coord cur = {0, 0, 0, 0};
  enumerate_rec(d, 0, radius, cur, false, fn);
}

}  // namespace

DerivedConstants derive_constants(const Kernel& kernel) {
  DerivedConstants out;
  const double s = kernel.s();
  const int d = kernel.dim();
  out.zeta = std::pow(2.0, -s - 1.0) * std::pow(static_cast<double>(d), -s);

  if (kernel.form() == KernelForm::Eta) {
    if (kernel.beta() == 0) {
      out.k0 = 0;
      out.gamma = 0;
      out.liminf_ok = false;
      return out;
    }
    // -log(1 - eta(beta,k)) / k^-s == beta identically
    out.k0 = 0;
    out.gamma = kernel.beta();
    out.liminf_ok = true;
    return out;
  }

  // Tabulated: k0 = largest radius holding a zero entry; gamma = min over the
  // remaining finite support, combined with the analytic tail value (= tail
  // beta, exact for the eta tail).
  std::int64_t k0 = 0;
  for_each_canonical_offset(d, kernel.table_radius(), [&](const Coord& off) {
    std::int64_t l1 = 0;
    for (int i = 0; i < d; ++i) l1 += off[i] < 0 ? -off[i] : off[i];
    if (kernel.prob(off) == 0 && l1 > k0) k0 = l1;
  });
  out.k0 = k0;

  double gamma = std::numeric_limits<double>::infinity();
  for_each_canonical_offset(d, kernel.table_radius(), [&](const Coord& off) {
    std::int64_t l1 = 0;
    for (int i = 0; i < d; ++i) l1 += off[i] < 0 ? -off[i] : off[i];
    if (l1 <= k0) return;
    const double p = kernel.prob(off);
    const double ratio = -std::log1p(-p) / std::pow(static_cast<double>(l1), -s);
    if (ratio < gamma) gamma = ratio;
  });
  if (kernel.beta() > 0 || kernel.table_radius() >= 1) {
    if (kernel.beta() < gamma) gamma = kernel.beta();  // eta tail contributes exactly tail beta
  }
  out.gamma = std::isfinite(gamma) ? gamma : 0.0;
  out.liminf_ok = out.gamma > 0;
  return out;
}

double connect_bound(const DerivedConstants& consts, double rho, std::int64_t l, double s, int d) {
  if (l < 1) throw std::domain_error("connect_bound: l must be >= 1");
  const double threshold = 2.0 * std::pow(2.0 * static_cast<double>(consts.k0),
                                          static_cast<double>(d));
  if (!(rho > threshold))
    throw std::invalid_argument("connect_bound: rho must exceed 2(2 k0)^d = " +
                                std::to_string(threshold));
  const double amplitude = consts.zeta * consts.gamma * rho * rho;
  if (amplitude == 0) return 0.0;
  return eta(amplitude, static_cast<double>(l), s);
}

}  // namespace lrp
