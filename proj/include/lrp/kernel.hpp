#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrp/box.hpp"

namespace lrp {

// Canonical connection-probability family: eta_s(beta, k) = 1 - exp(-beta k^-s).
double eta(double beta, double k, double s);

enum class KernelForm { Eta, Table };

// Symmetric connection-probability family P_k on Z^d. Two forms:
//   Eta   - P_k = eta_s(beta, |k|_1) everywhere;
//   Table - explicit offsets up to an L1 radius, eta tail (same s, tail_beta)
//           beyond it. Tables must declare the tail so the derived constants
//           and sampling stay well defined.
// Offsets in the table are stored canonically (first nonzero component
// positive); lookups fold k and -k together, so symmetry holds by
// construction and asymmetric input pairs are rejected at build time.
class Kernel {
 public:
  static Kernel make_eta(int d, double s, double beta);
  static Kernel make_table(int d, double s, double tail_beta, std::int64_t table_radius,
                           const std::vector<std::pair<Coord, double>>& entries,
                           std::optional<std::int64_t> declared_zero_radius = std::nullopt);

  int dim() const { return d_; }
  double s() const { return s_; }
  double beta() const { return beta_; }
  KernelForm form() const { return form_; }
  std::int64_t table_radius() const { return table_radius_; }

  // P_k for a lattice offset; k = 0 is undefined and rejected.
  double prob(const Coord& k) const;
  double prob_l1(std::int64_t l1) const;  // eta form only (isotropic in |k|_1)

  // sum over k != 0 of P_k; finite iff s > d for the forms representable here
  bool summable() const { return s_ > static_cast<double>(d_); }

  // stable content hash for manifests and serialized headers
  std::uint64_t hash() const;
  std::string describe() const;

 private:
  Kernel() = default;
  void validate() const;

  KernelForm form_ = KernelForm::Eta;
  int d_ = 1;
  double s_ = 2.0;
  double beta_ = 1.0;  // eta amplitude, or tail amplitude for tables
  std::int64_t table_radius_ = 0;
  std::optional<std::int64_t> declared_zero_radius_;
  std::map<Coord, double> table_;  // canonical offsets only
};

// Constants derived from a kernel per the connection-probability lemma:
//   k0    - smallest radius such that |k|_1 > k0 implies P_k > 0
//   gamma - inf over |k|_1 > k0 of -log(1 - P_k) / |k|_1^-s
//   zeta  - 2^(-s-1) d^-s
// liminf_ok is false when gamma degenerates to 0 (reported, never silent).
struct DerivedConstants {
  std::int64_t k0 = 0;
  double gamma = 0;
  double zeta = 0;
  bool liminf_ok = true;
};

DerivedConstants derive_constants(const Kernel& kernel);

// Analytic lower bound eta_s(zeta * gamma * rho^2, l) on the probability that
// planted clusters of size rho N^(s/2) in cubes l cubes apart are joined by
// an open bond. Requires rho > 2 (2 k0)^d.
double connect_bound(const DerivedConstants& consts, double rho, std::int64_t l, double s, int d);

}  // namespace lrp
