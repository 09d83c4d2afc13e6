#pragma once

// Problem-file schema and report serialization (JSON).

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipext/conditions.hpp"
#include "lipext/extension.hpp"
#include "lipext/necessity.hpp"

namespace lipext::io {

using json = nlohmann::json;

struct ProblemPoint {
  std::string id;
  Vec x;
  Vec v;
  std::optional<Vec> u;
  bool in_a = false;
};

/// Tuple for the `necessity` command, by point id.
struct TupleSpec {
  std::vector<std::string> base;
  std::string extra;
  Vec t;
};

struct ProblemFile {
  int dim_domain = 0;
  int dim_target = 0;
  ExtensionMode mode = ExtensionMode::Lipschitz;
  std::vector<ProblemPoint> points;
  std::optional<ConvexBody> body;
  std::optional<EnumerationPolicy> policy;
  std::optional<Tolerances> tolerances;
  std::optional<OrderStrategy> order;
  std::vector<TupleSpec> necessity_tuples;
  std::optional<double> necessity_c;

  Eigen::Index index_of(const std::string& id) const;
};

bool operator==(const ProblemFile& a, const ProblemFile& b);

/// Parses and validates a problem document; throws SchemaError listing every
/// violation with its path.
ProblemFile parse_problem(const std::string& text);
ProblemFile problem_from_json(const json& doc);

json to_json(const ProblemFile& p);
std::string serialize_problem(const ProblemFile& p);

json to_json(const ConvexBody& b);
ConvexBody body_from_json(const json& j, Eigen::Index dim, const std::string& path,
                          std::vector<std::string>& issues);

ExtensionMode parse_mode(const std::string& s);
OrderStrategy parse_order(const std::string& s, std::uint64_t seed);

VectorFieldSample sample_of(const ProblemFile& p);

/// Extension problem described by the file. Without a body, K is the ball of
/// radius `delta` (default: sup over A of |u - v|) about the origin; with a
/// ball body, `delta` replaces its radius.
ExtensionProblem extension_problem_of(const ProblemFile& p, std::optional<double> delta = std::nullopt);

json to_json(const Tolerances& t);
json to_json(const EnumerationPolicy& p);
json to_json(const FeasibilityOutcome& o);
json to_json(const ConditionReport& r, const ProblemFile& p);
json to_json(const VerificationReport& r);
json to_json(const NecessityReport& r);
json to_json(const SquareDemoReport& r);

json vector_json(const Vec& v);

} // namespace lipext::io
