#include "lrp/config.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lrp {

Configuration Configuration::from_bonds(const Box& box, std::vector<Bond> bonds) {
  Configuration c;
  c.box = box;
  const std::uint32_t nsites = box.site_count();
  for (auto& b : bonds) {
    if (b.u > b.v) std::swap(b.u, b.v);
    if (b.u == b.v || b.v >= nsites)
      throw std::invalid_argument("Configuration: bond endpoint outside box or self-loop");
  }
  std::sort(bonds.begin(), bonds.end());
  bonds.erase(std::unique(bonds.begin(), bonds.end()), bonds.end());
  c.bonds = std::move(bonds);
  return c;
}

Configuration::Adjacency Configuration::adjacency() const {
  Adjacency adj;
  const std::uint32_t n = box.site_count();
  adj.offsets.assign(n + 1, 0);
  for (const Bond& b : bonds) {
    ++adj.offsets[b.u + 1];
    ++adj.offsets[b.v + 1];
  }
  for (std::uint32_t i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
  adj.neighbors.resize(2 * bonds.size());
  std::vector<std::uint32_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const Bond& b : bonds) {
    adj.neighbors[cursor[b.u]++] = b.v;
    adj.neighbors[cursor[b.v]++] = b.u;
  }
  return adj;
}

namespace {

// Iterate canonical offsets (first nonzero component positive) with
// |k_i| <= n-1 per axis, in a fixed lexicographic order.
template <typename Fn>
void for_each_box_offset(int d, std::int64_t n, Fn&& fn) {
  Coord k = {0, 0, 0, 0};
  for (int i = 0; i < d; ++i) k[i] = 0;
  // mixed-radix counter over [-(n-1), n-1]^d, skipping non-canonical entries
  const std::int64_t lo = -(n - 1), hi = n - 1;
  for (int i = 0; i < d; ++i) k[i] = lo;
  while (true) {
    bool canonical = false;
    for (int i = 0; i < d; ++i) {
      if (k[i] > 0) { canonical = true; break; }
      if (k[i] < 0) break;
    }
    if (canonical) fn(k);
    int axis = d - 1;
    while (axis >= 0) {
      if (++k[axis] <= hi) break;
      k[axis] = lo;
      --axis;
    }
    if (axis < 0) break;
  }
}

std::uint64_t class_population(int d, std::int64_t n, const Coord& k) {
  std::uint64_t c = 1;
  for (int i = 0; i < d; ++i) {
    const std::int64_t a = k[i] < 0 ? -k[i] : k[i];
    c *= static_cast<std::uint64_t>(n - a);
  }
  return c;
}

// Map an in-class ordinal to the base site u of the pair (u, u+k).
Coord base_site_of(const Box& box, const Coord& k, std::uint64_t ordinal) {
  Coord u = {0, 0, 0, 0};
  std::uint64_t rem = ordinal;
  for (int i = box.d - 1; i >= 0; --i) {
    const std::int64_t a = k[i] < 0 ? -k[i] : k[i];
    const std::uint64_t extent = static_cast<std::uint64_t>(box.n - a);
    const std::int64_t base = static_cast<std::int64_t>(rem % extent);
    rem /= extent;
    u[i] = box.origin[i] + base + (k[i] < 0 ? -k[i] : 0);
  }
  return u;
}

}  // namespace

Configuration sample_config(const Kernel& kernel, const Box& box, const SeedRecord& seed,
                            double max_expected_bonds) {
  if (kernel.dim() != box.d)
    throw std::invalid_argument("sample_config: kernel/box dimension mismatch");
  if (!kernel.summable())
    throw std::invalid_argument("sample_config: kernel not summable (s <= d)");
  seed.require_supported();

  double expected = 0;
  for_each_box_offset(box.d, box.n, [&](const Coord& k) {
    expected += static_cast<double>(class_population(box.d, box.n, k)) * kernel.prob(k);
  });
  if (expected > max_expected_bonds) {
    std::ostringstream os;
    os << "sample_config: expected bond count " << expected << " exceeds limit "
       << max_expected_bonds << " (box side " << box.n << ", d=" << box.d << ")";
    throw std::invalid_argument(os.str());
  }

  Configuration out;
  out.box = box;
  out.kernel_hash = kernel.hash();
  out.seed = seed;
  out.bonds.reserve(static_cast<std::size_t>(expected * 1.1) + 16);

  Rng rng(derive_key(seed.seed, "sample"));
  for_each_box_offset(box.d, box.n, [&](const Coord& k) {
    const double p = kernel.prob(k);
    if (p <= 0) return;
    const std::uint64_t population = class_population(box.d, box.n, k);
    std::uint64_t next = rng.geometric_gap(p);
    while (next < population) {
      const Coord u = base_site_of(box, k, next);
      Coord v = u;
      for (int i = 0; i < box.d; ++i) v[i] += k[i];
      Bond b{box.index_of(u), box.index_of(v)};
      if (b.u > b.v) std::swap(b.u, b.v);
      out.bonds.push_back(b);
      const std::uint64_t gap = rng.geometric_gap(p);
      if (population - next <= gap) break;  // avoid overflow at huge gaps
      next += gap + 1;
    }
  });

  std::sort(out.bonds.begin(), out.bonds.end());
  return out;
}

Configuration sample_config_perpair(const Kernel& kernel, const Box& box,
                                    const SeedRecord& seed) {
  if (kernel.dim() != box.d)
    throw std::invalid_argument("sample_config_perpair: kernel/box dimension mismatch");
  seed.require_supported();
  const std::uint32_t n = box.site_count();
  Configuration out;
  out.box = box;
  out.kernel_hash = kernel.hash();
  out.seed = seed;
  const std::uint64_t pair_key = derive_key(seed.seed, "pair");
  for (std::uint32_t i = 0; i < n; ++i) {
    const Coord ci = box.coord_of(i);
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const Coord cj = box.coord_of(j);
      Coord k = {0, 0, 0, 0};
      for (int a = 0; a < box.d; ++a) k[a] = cj[a] - ci[a];
      const double p = kernel.prob(k);
      if (p <= 0) continue;
      const std::uint64_t ordinal = static_cast<std::uint64_t>(i) * n + j;
      Rng pair_rng(derive_key(pair_key, ordinal));
      if (pair_rng.next_unit() < p) out.bonds.push_back({i, j});
    }
  }
  return out;  // already sorted by construction
}

Configuration thin_config(const Configuration& config, double eps, const SeedRecord& seed) {
  if (eps < 0 || eps > 1) throw std::invalid_argument("thin_config: eps outside [0,1]");
  seed.require_supported();
  Configuration out;
  out.box = config.box;
  out.kernel_hash = config.kernel_hash;
  out.seed = seed;
  if (eps == 0) {
    out.bonds = config.bonds;
    return out;
  }
  Rng rng(derive_key(seed.seed, "thin"));
  out.bonds.reserve(config.bonds.size());
  for (const Bond& b : config.bonds) {
    const double u = rng.next_unit();
    if (eps < 1 && u >= eps) out.bonds.push_back(b);
  }
  return out;
}

Configuration truncate_config(const Configuration& config, std::int64_t max_len) {
  if (max_len < 0) throw std::invalid_argument("truncate_config: L must be >= 0");
  Configuration out;
  out.box = config.box;
  out.kernel_hash = config.kernel_hash;
  out.seed = config.seed;
  out.bonds.reserve(config.bonds.size());
  for (const Bond& b : config.bonds)
    if (config.box.bond_length(b.u, b.v) < max_len) out.bonds.push_back(b);
  return out;
}

void write_config_csv(std::ostream& os, const Configuration& config) {
  os << "# lrp-config v1\n";
  os << "d," << config.box.d << "\nn," << config.box.n << "\norigin";
  for (int i = 0; i < config.box.d; ++i) os << "," << config.box.origin[i];
  os << "\nkernel_hash," << config.kernel_hash;
  os << "\nseed," << config.seed.algorithm << "," << config.seed.seed;
  os << "\nbonds," << config.bonds.size() << "\n";
  for (const Bond& b : config.bonds) os << b.u << "," << b.v << "\n";
}

Configuration read_config_csv(std::istream& is) {
  std::string line;
  auto expect_prefix = [&](const char* prefix) {
    if (!std::getline(is, line) || line.rfind(prefix, 0) != 0)
      throw std::runtime_error(std::string("config csv: expected line starting with ") + prefix);
  };
  expect_prefix("# lrp-config");
  Configuration c;
  expect_prefix("d,");
  c.box.d = std::stoi(line.substr(2));
  expect_prefix("n,");
  c.box.n = std::stoll(line.substr(2));
  expect_prefix("origin");
  {
    std::stringstream ss(line.substr(7));
    std::string tok;
    for (int i = 0; i < c.box.d && std::getline(ss, tok, ','); ++i)
      c.box.origin[i] = std::stoll(tok);
  }
  expect_prefix("kernel_hash,");
  c.kernel_hash = std::stoull(line.substr(12));
  expect_prefix("seed,");
  {
    std::stringstream ss(line.substr(5));
    std::string alg, val;
    std::getline(ss, alg, ',');
    std::getline(ss, val, ',');
    c.seed.algorithm = alg;
    c.seed.seed = std::stoull(val);
  }
  expect_prefix("bonds,");
  const std::size_t count = std::stoull(line.substr(6));
  c.bonds.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("config csv: truncated bond list");
    const auto comma = line.find(',');
    c.bonds.push_back({static_cast<std::uint32_t>(std::stoul(line.substr(0, comma))),
                       static_cast<std::uint32_t>(std::stoul(line.substr(comma + 1)))});
  }
  return c;
}

}  // namespace lrp
