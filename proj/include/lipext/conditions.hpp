#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lipext/geometry.hpp"
#include "lipext/simplex_quadratic.hpp"

namespace lipext {

/// Finite samples of a map v: domain column j is x_j in R^n, values column j
/// is v(x_j) in R^m.
struct VectorFieldSample {
  PointSet domain;
  PointSet values;

  Eigen::Index size() const { return domain.cols(); }
  Eigen::Index domain_dim() const { return domain.rows(); }
  Eigen::Index value_dim() const { return values.rows(); }

  void validate() const;
};

enum class ConditionKind { Lipschitz, Monotone, Strain, PairwiseLipschitz };

std::string to_string(ConditionKind kind);

/// Tuple (x; x_1..x_k) with simplex weights at which a condition fails.
/// margin > 0 is the size of the violation:
///   Lipschitz:  |v(x) - sum t_i v(x_i)|^2 - |x - sum t_i x_i|^2
///   Monotone:   -<v(x) - sum t_i v(x_i), x - sum t_i x_i>
///   Strain:     <v(x) - sum t_i v(x_i), x - sum t_i x_i> - |x - sum t_i x_i|^2
struct ViolationCertificate {
  ConditionKind kind = ConditionKind::Lipschitz;
  Eigen::Index base_index = 0;
  std::vector<Eigen::Index> tuple_indices;
  Vec weights;
  double margin = 0.0;
};

struct EnumerationPolicy {
  int m_max = 0; // 0 selects min(value dimension, 3)
  std::uint64_t exhaustive_cap = 2'000'000;
  std::uint64_t sample_count = 200'000;
  std::uint64_t seed = 0;
  std::size_t max_certificates = 16;
};

enum class ConditionStatus { Satisfied, Violated };

struct ConditionReport {
  ConditionKind kind = ConditionKind::Lipschitz;
  ConditionStatus status = ConditionStatus::Satisfied;
  std::vector<ViolationCertificate> certificates; // decreasing margin
  std::uint64_t tuples_enumerated = 0;
  std::uint64_t tuples_sampled = 0;
  std::uint64_t violating_tuples = 0;
  bool probabilistic = false;
  std::vector<int> m_checked;
  double max_margin = 0.0; // over every tuple checked

  bool satisfied() const { return status == ConditionStatus::Satisfied; }
};

/// Averaged-Lipschitz condition: |v(x) - sum t_i v(x_i)| <= |x - sum t_i x_i|
/// over every enumerated tuple of at most m_max points.
ConditionReport check_lipschitz_condition(const VectorFieldSample& s, const EnumerationPolicy& policy,
                                          const Tolerances& tol);

/// Averaged-monotone condition: <v(x) - sum t_i v(x_i), x - sum t_i x_i> >= 0.
ConditionReport check_monotone_condition(const VectorFieldSample& s, const EnumerationPolicy& policy,
                                         const Tolerances& tol);

/// Averaged strain bound, checked as monotonicity of x -> x - v(x).
ConditionReport check_strain_condition(const VectorFieldSample& s, const EnumerationPolicy& policy,
                                       const Tolerances& tol);

/// Plain pairwise 1-Lipschitz check, margins |dv|^2 - |dx|^2.
ConditionReport check_pairwise_lipschitz(const VectorFieldSample& s, const Tolerances& tol);

/// The simplex quadratic whose maximum (Lipschitz) or minimum (Monotone,
/// Strain) decides the condition on one tuple.
SimplexQuadratic tuple_quadratic(const VectorFieldSample& s, ConditionKind kind, Eigen::Index base,
                                 std::span<const Eigen::Index> tuple);

/// Exact worst-case margin of one tuple; optionally returns the weights.
double tuple_margin(const VectorFieldSample& s, ConditionKind kind, Eigen::Index base,
                    std::span<const Eigen::Index> tuple, Vec* weights = nullptr);

/// Margin recomputed directly from the sample at the certificate's weights.
double evaluate_margin(const VectorFieldSample& s, const ViolationCertificate& c);

/// Sample with values x - v(x).
VectorFieldSample identity_minus(const VectorFieldSample& s);

} // namespace lipext
