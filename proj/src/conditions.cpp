#include "lipext/conditions.hpp"

#include <algorithm>
#include <random>

namespace lipext {

void VectorFieldSample::validate() const {
  if (domain.cols() != values.cols())
    throw DimensionError("sample: domain and value counts differ");
  if (domain.cols() == 0)
    throw PreconditionError("sample: empty");
  if (domain.rows() < 1 || values.rows() < 1)
    throw DimensionError("sample: dimensions must be positive");
  require_finite(domain, "sample domain");
  require_finite(values, "sample values");
}

std::string to_string(ConditionKind kind) {
  switch (kind) {
  case ConditionKind::Lipschitz:
    return "lipschitz";
  case ConditionKind::Monotone:
    return "monotone";
  case ConditionKind::Strain:
    return "strain";
  case ConditionKind::PairwiseLipschitz:
    return "pairwise_lipschitz";
  }
  return "unknown";
}

VectorFieldSample identity_minus(const VectorFieldSample& s) {
  if (s.domain_dim() != s.value_dim())
    throw DimensionError("identity_minus: domain and value dimensions differ");
  return {s.domain, s.domain - s.values};
}

namespace {

void differences(const VectorFieldSample& s, Eigen::Index base, std::span<const Eigen::Index> tuple,
                 Mat& dx, Mat& dv) {
  const auto k = static_cast<Eigen::Index>(tuple.size());
  dx.resize(s.domain_dim(), k);
  dv.resize(s.value_dim(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index j = tuple[static_cast<std::size_t>(i)];
    if (j < 0 || j >= s.size())
      throw PreconditionError("tuple index out of range");
    dx.col(i) = s.domain.col(base) - s.domain.col(j);
    dv.col(i) = s.values.col(base) - s.values.col(j);
  }
}

bool certificate_before(const ViolationCertificate& a, const ViolationCertificate& b) {
  if (a.margin != b.margin)
    return a.margin > b.margin;
  if (a.base_index != b.base_index)
    return a.base_index < b.base_index;
  return a.tuple_indices < b.tuple_indices;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n)
    return 0;
  long double r = 1;
  for (std::uint64_t i = 1; i <= k; ++i)
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  return static_cast<std::uint64_t>(r + 0.5L);
}

class Collector {
public:
  Collector(ConditionReport& report, std::size_t cap, double feas_tol)
      : report_(report), cap_(cap), feas_tol_(feas_tol) {}

  void add(ConditionKind kind, Eigen::Index base, std::span<const Eigen::Index> tuple, double margin,
           const Vec& weights) {
    if (first_ || margin > report_.max_margin)
      report_.max_margin = margin;
    first_ = false;
    if (margin <= feas_tol_)
      return;
    ++report_.violating_tuples;
    ViolationCertificate c{kind, base, {tuple.begin(), tuple.end()}, weights, margin};
    auto& certs = report_.certificates;
    if (certs.size() == cap_ && !certificate_before(c, certs.back()))
      return;
    certs.insert(std::upper_bound(certs.begin(), certs.end(), c, certificate_before), std::move(c));
    if (certs.size() > cap_)
      certs.pop_back();
  }

private:
  ConditionReport& report_;
  std::size_t cap_;
  double feas_tol_;
  bool first_ = true;
};

int effective_m_max(const VectorFieldSample& s, const EnumerationPolicy& policy) {
  const auto m = static_cast<int>(s.value_dim());
  const int m_max = policy.m_max > 0 ? policy.m_max : std::min(m, 3);
  if (m_max > static_cast<int>(kMaxSimplexSize))
    throw DimensionError("m_max " + std::to_string(m_max) + " exceeds " + std::to_string(kMaxSimplexSize));
  return m_max;
}

// Walks every tuple (base; strictly increasing index set of size 1..m_max),
// or a seeded uniform sample of them when the count exceeds the cap. Repeated
// indices would only restate a smaller tuple and are not generated.
ConditionReport run_check(const VectorFieldSample& s, ConditionKind kind,
                          const EnumerationPolicy& policy, const Tolerances& tol) {
  s.validate();
  tol.validate();
  const int m_max = effective_m_max(s, policy);
  const auto n = static_cast<std::uint64_t>(s.size());
  const int k_top = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(m_max), n));

  ConditionReport report;
  report.kind = kind;
  for (int k = 1; k <= m_max; ++k)
    report.m_checked.push_back(k);
  Collector collect(report, policy.max_certificates, tol.feas_tol);

  std::vector<std::uint64_t> per_k;
  std::uint64_t total = 0;
  for (int k = 1; k <= k_top; ++k) {
    per_k.push_back(n * binomial(n, static_cast<std::uint64_t>(k)));
    total += per_k.back();
  }

  Vec weights;
  auto visit = [&](Eigen::Index base, std::span<const Eigen::Index> tuple) {
    const double margin = tuple_margin(s, kind, base, tuple, &weights);
    collect.add(kind, base, tuple, margin, weights);
  };

  if (total <= policy.exhaustive_cap) {
    std::vector<Eigen::Index> tuple;
    for (int k = 1; k <= k_top; ++k) {
      tuple.resize(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i)
        tuple[static_cast<std::size_t>(i)] = i;
      const auto last = static_cast<Eigen::Index>(n);
      while (true) {
        for (Eigen::Index base = 0; base < last; ++base) {
          visit(base, tuple);
          ++report.tuples_enumerated;
        }
        int i = k - 1;
        while (i >= 0 && tuple[static_cast<std::size_t>(i)] == last - k + i)
          --i;
        if (i < 0)
          break;
        ++tuple[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
          tuple[static_cast<std::size_t>(j)] = tuple[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  } else {
    report.probabilistic = true;
    std::mt19937_64 rng(policy.seed);
    std::discrete_distribution<int> pick_k(per_k.begin(), per_k.end());
    std::uniform_int_distribution<Eigen::Index> pick_point(0, static_cast<Eigen::Index>(n) - 1);
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    for (std::uint64_t draw = 0; draw < policy.sample_count; ++draw) {
      const int k = pick_k(rng) + 1;
      for (std::size_t i = 0; i < pool.size(); ++i)
        pool[i] = static_cast<Eigen::Index>(i);
      for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
      }
      std::vector<Eigen::Index> tuple(pool.begin(), pool.begin() + k);
      std::sort(tuple.begin(), tuple.end());
      visit(pick_point(rng), tuple);
      ++report.tuples_sampled;
    }
  }
  report.status = report.certificates.empty() ? ConditionStatus::Satisfied : ConditionStatus::Violated;
  return report;
}

} // namespace

SimplexQuadratic tuple_quadratic(const VectorFieldSample& s, ConditionKind kind, Eigen::Index base,
                                 std::span<const Eigen::Index> tuple) {
  if (base < 0 || base >= s.size())
    throw PreconditionError("base index out of range");
  if (tuple.empty())
    throw PreconditionError("empty tuple");
  Mat dx, dv;
  differences(s, base, tuple, dx, dv);
  switch (kind) {
  case ConditionKind::Lipschitz:
  case ConditionKind::PairwiseLipschitz:
    return SimplexQuadratic(Mat(dv.transpose() * dv - dx.transpose() * dx));
  case ConditionKind::Monotone: {
    if (dx.rows() != dv.rows())
      throw DimensionError("monotone condition needs equal domain and value dimensions");
    const Mat cross = dv.transpose() * dx;
    return SimplexQuadratic(Mat((cross + cross.transpose()) / 2.0));
  }
  case ConditionKind::Strain: {
    if (dx.rows() != dv.rows())
      throw DimensionError("strain condition needs equal domain and value dimensions");
    const Mat shifted = dx - dv;
    const Mat cross = shifted.transpose() * dx;
    return SimplexQuadratic(Mat((cross + cross.transpose()) / 2.0));
  }
  }
  throw PreconditionError("unknown condition kind");
}

double tuple_margin(const VectorFieldSample& s, ConditionKind kind, Eigen::Index base,
                    std::span<const Eigen::Index> tuple, Vec* weights) {
  const SimplexQuadratic q = tuple_quadratic(s, kind, base, tuple);
  if (kind == ConditionKind::Lipschitz || kind == ConditionKind::PairwiseLipschitz) {
    StationaryWitness w = maximize_over_simplex(q);
    if (weights)
      *weights = std::move(w.t);
    return w.value;
  }
  StationaryWitness w = minimize_over_simplex(q);
  if (weights)
    *weights = std::move(w.t);
  return -w.value;
}

double evaluate_margin(const VectorFieldSample& s, const ViolationCertificate& c) {
  if (static_cast<std::size_t>(c.weights.size()) != c.tuple_indices.size())
    throw PreconditionError("certificate weights do not match tuple size");
  Vec ax = s.domain.col(c.base_index);
  Vec av = s.values.col(c.base_index);
  for (std::size_t i = 0; i < c.tuple_indices.size(); ++i) {
    const double t = c.weights(static_cast<Eigen::Index>(i));
    ax -= t * s.domain.col(c.tuple_indices[i]);
    av -= t * s.values.col(c.tuple_indices[i]);
  }
  switch (c.kind) {
  case ConditionKind::Lipschitz:
  case ConditionKind::PairwiseLipschitz:
    return av.squaredNorm() - ax.squaredNorm();
  case ConditionKind::Monotone:
    return -av.dot(ax);
  case ConditionKind::Strain:
    return av.dot(ax) - ax.squaredNorm();
  }
  return 0.0;
}

ConditionReport check_lipschitz_condition(const VectorFieldSample& s, const EnumerationPolicy& policy,
                                          const Tolerances& tol) {
  return run_check(s, ConditionKind::Lipschitz, policy, tol);
}

ConditionReport check_monotone_condition(const VectorFieldSample& s, const EnumerationPolicy& policy,
                                         const Tolerances& tol) {
  if (s.domain_dim() != s.value_dim())
    throw DimensionError("monotone condition needs equal domain and value dimensions");
  return run_check(s, ConditionKind::Monotone, policy, tol);
}

ConditionReport check_strain_condition(const VectorFieldSample& s, const EnumerationPolicy& policy,
                                       const Tolerances& tol) {
  ConditionReport r = check_monotone_condition(identity_minus(s), policy, tol);
  r.kind = ConditionKind::Strain;
  for (auto& c : r.certificates)
    c.kind = ConditionKind::Strain;
  return r;
}

ConditionReport check_pairwise_lipschitz(const VectorFieldSample& s, const Tolerances& tol) {
  s.validate();
  tol.validate();
  ConditionReport report;
  report.kind = ConditionKind::PairwiseLipschitz;
  report.m_checked = {1};
  Collector collect(report, EnumerationPolicy{}.max_certificates, tol.feas_tol);
  const Vec one = Vec::Ones(1);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = i + 1; j < s.size(); ++j) {
      const double margin = (s.values.col(i) - s.values.col(j)).squaredNorm() -
                            (s.domain.col(i) - s.domain.col(j)).squaredNorm();
      const Eigen::Index tuple[1] = {j};
      collect.add(ConditionKind::PairwiseLipschitz, i, tuple, margin, one);
      ++report.tuples_enumerated;
    }
  if (s.size() == 1)
    report.max_margin = 0.0;
  report.status = report.certificates.empty() ? ConditionStatus::Satisfied : ConditionStatus::Violated;
  return report;
}

} // namespace lipext
