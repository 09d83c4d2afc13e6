#include "lipext/io.hpp"

#include <cmath>
#include <set>

namespace lipext::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Issues = std::vector<std::string>;

std::optional<Vec> read_vec(const json& j, const std::string& path, Eigen::Index dim, Issues& issues,
                            const std::string& who = "") {
  const std::string tag = who.empty() ? path : path + " (id '" + who + "')";
  if (!j.is_array()) {
    issues.push_back(tag + ": expected an array of numbers");
    return std::nullopt;
  }
  if (dim >= 0 && static_cast<Eigen::Index>(j.size()) != dim) {
    issues.push_back(tag + ": expected " + std::to_string(dim) + " coordinates, got " + std::to_string(j.size()));
    return std::nullopt;
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      issues.push_back(tag + "[" + std::to_string(i) + "]: not a number");
      return std::nullopt;
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::optional<double> read_number(const json& j, const std::string& key, const std::string& path, Issues& issues,
                                  bool required) {
  if (!j.contains(key)) {
    if (required)
      issues.push_back(path + "." + key + ": missing");
    return std::nullopt;
  }
  if (!j[key].is_number() || !std::isfinite(j[key].get<double>())) {
    issues.push_back(path + "." + key + ": expected a finite number");
    return std::nullopt;
  }
  return j[key].get<double>();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path, Issues& issues) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      issues.push_back(path + "." + it.key() + ": unknown field");
}

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; }

bool same(const ConvexBody& a, const ConvexBody& b) {
  return std::visit(overloaded{[&](const Ball& x) {
                                 const auto* y = std::get_if<Ball>(&b.variant());
                                 return y && same(x.center, y->center) && x.radius == y->radius;
                               },
                               [&](const HalfspaceIntersection& x) {
                                 const auto* y = std::get_if<HalfspaceIntersection>(&b.variant());
                                 if (!y || x.dimension != y->dimension || x.constraints.size() != y->constraints.size())
                                   return false;
                                 for (std::size_t i = 0; i < x.constraints.size(); ++i)
                                   if (!same(x.constraints[i].normal, y->constraints[i].normal) ||
                                       x.constraints[i].offset != y->constraints[i].offset)
                                     return false;
                                 return true;
                               },
                               [&](const WholeSpace& x) {
                                 const auto* y = std::get_if<WholeSpace>(&b.variant());
                                 return y && x.dimension == y->dimension;
                               }},
                    a.variant());
}

} // namespace

ExtensionMode parse_mode(const std::string& s) {
  if (s == "lipschitz")
    return ExtensionMode::Lipschitz;
  if (s == "monotone")
    return ExtensionMode::Monotone;
  if (s == "strain")
    return ExtensionMode::Strain;
  throw SchemaError({"mode: expected lipschitz, monotone or strain, got '" + s + "'"});
}

OrderStrategy parse_order(const std::string& s, std::uint64_t seed) {
  if (s == "input")
    return OrderStrategy::input();
  if (s == "nearest")
    return OrderStrategy::nearest();
  if (s == "farthest")
    return OrderStrategy::farthest();
  if (s == "seeded")
    return OrderStrategy::seeded(seed);
  throw SchemaError({"order: expected input, nearest, farthest or seeded, got '" + s + "'"});
}

Eigen::Index ProblemFile::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].id == id)
      return static_cast<Eigen::Index>(i);
  return -1;
}

bool operator==(const ProblemFile& a, const ProblemFile& b) {
  if (a.dim_domain != b.dim_domain || a.dim_target != b.dim_target || a.mode != b.mode ||
      a.points.size() != b.points.size() || a.necessity_tuples.size() != b.necessity_tuples.size() ||
      a.necessity_c != b.necessity_c)
    return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto &p = a.points[i], &q = b.points[i];
    if (p.id != q.id || p.in_a != q.in_a || !same(p.x, q.x) || !same(p.v, q.v) || p.u.has_value() != q.u.has_value())
      return false;
    if (p.u && !same(*p.u, *q.u))
      return false;
  }
  if (a.body.has_value() != b.body.has_value() || (a.body && !same(*a.body, *b.body)))
    return false;
  if (a.policy.has_value() != b.policy.has_value())
    return false;
  if (a.policy && (a.policy->m_max != b.policy->m_max || a.policy->exhaustive_cap != b.policy->exhaustive_cap ||
                   a.policy->sample_count != b.policy->sample_count || a.policy->seed != b.policy->seed ||
                   a.policy->max_certificates != b.policy->max_certificates))
    return false;
  if (a.tolerances.has_value() != b.tolerances.has_value())
    return false;
  if (a.tolerances && (a.tolerances->feas_tol != b.tolerances->feas_tol ||
                       a.tolerances->solve_tol != b.tolerances->solve_tol ||
                       a.tolerances->max_iter != b.tolerances->max_iter))
    return false;
  if (a.order.has_value() != b.order.has_value() ||
      (a.order && (a.order->kind != b.order->kind || a.order->seed != b.order->seed)))
    return false;
  for (std::size_t i = 0; i < a.necessity_tuples.size(); ++i) {
    const auto &p = a.necessity_tuples[i], &q = b.necessity_tuples[i];
    if (p.base != q.base || p.extra != q.extra || !same(p.t, q.t))
      return false;
  }
  return true;
}

ConvexBody body_from_json(const json& j, Eigen::Index dim, const std::string& path, Issues& issues) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    issues.push_back(path + ".type: missing or not a string");
    return ConvexBody::whole_space(std::max<Eigen::Index>(dim, 1));
  }
  const std::string type = j["type"];
  if (type == "ball") {
    check_keys(j, {"type", "center", "radius"}, path, issues);
    std::optional<Vec> c = j.contains("center") ? read_vec(j["center"], path + ".center", dim, issues)
                                                : std::optional<Vec>(Vec::Zero(dim));
    auto r = read_number(j, "radius", path, issues, true);
    if (r && *r < 0.0)
      issues.push_back(path + ".radius: must be nonnegative");
    if (c && r && *r >= 0.0)
      return ConvexBody::ball(*c, *r);
  } else if (type == "halfspaces") {
    check_keys(j, {"type", "constraints"}, path, issues);
    if (!j.contains("constraints") || !j["constraints"].is_array()) {
      issues.push_back(path + ".constraints: expected an array");
    } else {
      std::vector<Halfspace> hs;
      bool ok = true;
      for (std::size_t i = 0; i < j["constraints"].size(); ++i) {
        const json& c = j["constraints"][i];
        const std::string cp = path + ".constraints[" + std::to_string(i) + "]";
        if (!c.is_object() || !c.contains("normal")) {
          issues.push_back(cp + ": expected {normal, offset}");
          ok = false;
          continue;
        }
        auto n = read_vec(c["normal"], cp + ".normal", dim, issues);
        auto o = read_number(c, "offset", cp, issues, true);
        if (n && n->squaredNorm() == 0.0) {
          issues.push_back(cp + ".normal: must be nonzero");
          n.reset();
        }
        if (!n || !o) {
          ok = false;
          continue;
        }
        hs.push_back({*n, *o});
      }
      if (ok && dim >= 1)
        return ConvexBody::halfspaces(std::move(hs), dim);
    }
  } else if (type == "whole") {
    check_keys(j, {"type"}, path, issues);
  } else {
    issues.push_back(path + ".type: expected ball, halfspaces or whole, got '" + type + "'");
  }
  return ConvexBody::whole_space(std::max<Eigen::Index>(dim, 1));
}

ProblemFile problem_from_json(const json& doc) {
  Issues issues;
  ProblemFile p;
  if (!doc.is_object())
    throw SchemaError({"document: expected an object"});
  check_keys(doc,
             {"dim_domain", "dim_target", "mode", "points", "body", "policy", "tolerances", "order", "seed",
              "necessity"},
             "$", issues);

  auto read_dim = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long>() < 1) {
      issues.push_back(std::string("$.") + key + ": expected a positive integer");
      return -1;
    }
    return doc[key].get<int>();
  };
  p.dim_domain = read_dim("dim_domain");
  p.dim_target = read_dim("dim_target");

  if (doc.contains("mode")) {
    if (!doc["mode"].is_string())
      issues.push_back("$.mode: expected a string");
    else
      try {
        p.mode = parse_mode(doc["mode"]);
      } catch (const SchemaError& e) {
        issues.push_back("$." + e.issues().front());
      }
  }

  std::set<std::string> ids;
  if (!doc.contains("points") || !doc["points"].is_array() || doc["points"].empty()) {
    issues.push_back("$.points: expected a nonempty array");
  } else {
    for (std::size_t i = 0; i < doc["points"].size(); ++i) {
      const json& r = doc["points"][i];
      const std::string path = "$.points[" + std::to_string(i) + "]";
      if (!r.is_object()) {
        issues.push_back(path + ": expected an object");
        continue;
      }
      check_keys(r, {"id", "x", "v", "u", "in_A"}, path, issues);
      ProblemPoint pt;
      if (!r.contains("id") || !r["id"].is_string() || r["id"].get<std::string>().empty()) {
        issues.push_back(path + ".id: expected a nonempty string");
      } else {
        pt.id = r["id"];
        if (!ids.insert(pt.id).second)
          issues.push_back(path + ".id: duplicate id '" + pt.id + "'");
      }
      if (r.contains("in_A")) {
        if (!r["in_A"].is_boolean())
          issues.push_back(path + ".in_A (id '" + pt.id + "'): expected a boolean");
        else
          pt.in_a = r["in_A"];
      }
      if (!r.contains("x"))
        issues.push_back(path + ".x (id '" + pt.id + "'): missing");
      else if (auto x = read_vec(r["x"], path + ".x", p.dim_domain, issues, pt.id))
        pt.x = *x;
      if (!r.contains("v"))
        issues.push_back(path + ".v (id '" + pt.id + "'): missing");
      else if (auto v = read_vec(r["v"], path + ".v", p.dim_target, issues, pt.id))
        pt.v = *v;
      if (r.contains("u") && !r["u"].is_null())
        pt.u = read_vec(r["u"], path + ".u", p.dim_target, issues, pt.id);
      if (pt.in_a && !pt.u)
        issues.push_back(path + ".u (id '" + pt.id + "'): in_A is true but u is absent");
      for (const Vec* vec : {&pt.x, &pt.v})
        if (!vec->allFinite())
          issues.push_back(path + " (id '" + pt.id + "'): non-finite coordinate");
      p.points.push_back(std::move(pt));
    }
  }

  if (doc.contains("body") && !doc["body"].is_null() && p.dim_target >= 1)
    p.body = body_from_json(doc["body"], p.dim_target, "$.body", issues);

  if (doc.contains("policy")) {
    const json& j = doc["policy"];
    EnumerationPolicy pol;
    if (!j.is_object()) {
      issues.push_back("$.policy: expected an object");
    } else {
      check_keys(j, {"m_max", "exhaustive_cap", "sample_count", "seed", "max_certificates"}, "$.policy", issues);
      auto read_uint = [&](const char* key, auto& field) {
        if (!j.contains(key))
          return;
        if (!j[key].is_number_unsigned())
          issues.push_back(std::string("$.policy.") + key + ": expected a nonnegative integer");
        else
          field = j[key].get<std::remove_reference_t<decltype(field)>>();
      };
      read_uint("m_max", pol.m_max);
      read_uint("exhaustive_cap", pol.exhaustive_cap);
      read_uint("sample_count", pol.sample_count);
      read_uint("seed", pol.seed);
      read_uint("max_certificates", pol.max_certificates);
    }
    p.policy = pol;
  }

  if (doc.contains("tolerances")) {
    const json& j = doc["tolerances"];
    Tolerances t;
    if (!j.is_object()) {
      issues.push_back("$.tolerances: expected an object");
    } else {
      check_keys(j, {"feas_tol", "solve_tol", "max_iter"}, "$.tolerances", issues);
      if (auto v = read_number(j, "feas_tol", "$.tolerances", issues, false))
        t.feas_tol = *v;
      if (auto v = read_number(j, "solve_tol", "$.tolerances", issues, false))
        t.solve_tol = *v;
      if (j.contains("max_iter")) {
        if (!j["max_iter"].is_number_integer())
          issues.push_back("$.tolerances.max_iter: expected an integer");
        else
          t.max_iter = j["max_iter"].get<long>();
      }
      try {
        t.validate();
      } catch (const Error& e) {
        issues.push_back(std::string("$.tolerances: ") + e.what());
      }
    }
    p.tolerances = t;
  }

  if (doc.contains("order")) {
    std::uint64_t seed = 0;
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned())
        issues.push_back("$.seed: expected a nonnegative integer");
      else
        seed = doc["seed"];
    }
    if (!doc["order"].is_string())
      issues.push_back("$.order: expected a string");
    else
      try {
        p.order = parse_order(doc["order"], seed);
      } catch (const SchemaError& e) {
        issues.push_back("$." + e.issues().front());
      }
  }

  if (doc.contains("necessity")) {
    const json& j = doc["necessity"];
    if (!j.is_object()) {
      issues.push_back("$.necessity: expected an object");
    } else {
      check_keys(j, {"C", "tuples"}, "$.necessity", issues);
      if (auto c = read_number(j, "C", "$.necessity", issues, false)) {
        if (*c <= 0.0)
          issues.push_back("$.necessity.C: must be positive");
        p.necessity_c = *c;
      }
      if (j.contains("tuples")) {
        if (!j["tuples"].is_array())
          issues.push_back("$.necessity.tuples: expected an array");
        else
          for (std::size_t i = 0; i < j["tuples"].size(); ++i) {
            const json& tj = j["tuples"][i];
            const std::string path = "$.necessity.tuples[" + std::to_string(i) + "]";
            TupleSpec ts;
            if (!tj.is_object() || !tj.contains("base") || !tj["base"].is_array() || !tj.contains("extra") ||
                !tj["extra"].is_string()) {
              issues.push_back(path + ": expected {base: [ids], extra: id, t: [weights]}");
              continue;
            }
            for (const auto& b : tj["base"]) {
              if (!b.is_string() || !ids.count(b.get<std::string>()))
                issues.push_back(path + ".base: unknown id " + b.dump());
              else
                ts.base.push_back(b);
            }
            ts.extra = tj["extra"];
            if (!ids.count(ts.extra))
              issues.push_back(path + ".extra: unknown id '" + ts.extra + "'");
            const auto m = static_cast<Eigen::Index>(tj["base"].size());
            if (tj.contains("t")) {
              if (auto t = read_vec(tj["t"], path + ".t", m, issues))
                ts.t = *t;
            } else {
              ts.t = Vec::Constant(m, 1.0 / static_cast<double>(std::max<Eigen::Index>(m, 1)));
            }
            p.necessity_tuples.push_back(std::move(ts));
          }
      }
    }
  }

  if (!issues.empty())
    throw SchemaError(std::move(issues));
  return p;
}

ProblemFile parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError({std::string("document: not valid JSON: ") + e.what()});
  }
  return problem_from_json(doc);
}

json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(v(i));
  return out;
}

json to_json(const ConvexBody& b) {
  return std::visit(overloaded{[](const Ball& x) {
                                 return json{{"type", "ball"}, {"center", vector_json(x.center)}, {"radius", x.radius}};
                               },
                               [](const HalfspaceIntersection& x) {
                                 json cs = json::array();
                                 for (const auto& c : x.constraints)
                                   cs.push_back({{"normal", vector_json(c.normal)}, {"offset", c.offset}});
                                 return json{{"type", "halfspaces"}, {"constraints", cs}};
                               },
                               [](const WholeSpace&) { return json{{"type", "whole"}}; }},
                    b.variant());
}

json to_json(const Tolerances& t) {
  return {{"feas_tol", t.feas_tol}, {"solve_tol", t.solve_tol}, {"max_iter", t.max_iter}};
}

json to_json(const EnumerationPolicy& p) {
  return {{"m_max", p.m_max},
          {"exhaustive_cap", p.exhaustive_cap},
          {"sample_count", p.sample_count},
          {"seed", p.seed},
          {"max_certificates", p.max_certificates}};
}

json to_json(const ProblemFile& p) {
  json doc{{"dim_domain", p.dim_domain}, {"dim_target", p.dim_target}, {"mode", to_string(p.mode)}};
  json pts = json::array();
  for (const auto& pt : p.points) {
    json r{{"id", pt.id}, {"x", vector_json(pt.x)}, {"v", vector_json(pt.v)}, {"in_A", pt.in_a}};
    if (pt.u)
      r["u"] = vector_json(*pt.u);
    pts.push_back(std::move(r));
  }
  doc["points"] = std::move(pts);
  if (p.body)
    doc["body"] = to_json(*p.body);
  if (p.policy)
    doc["policy"] = to_json(*p.policy);
  if (p.tolerances)
    doc["tolerances"] = to_json(*p.tolerances);
  if (p.order) {
    doc["order"] = to_string(*p.order);
    doc["seed"] = p.order->seed;
  }
  if (!p.necessity_tuples.empty() || p.necessity_c) {
    json n = json::object();
    if (p.necessity_c)
      n["C"] = *p.necessity_c;
    if (!p.necessity_tuples.empty()) {
      json ts = json::array();
      for (const auto& t : p.necessity_tuples)
        ts.push_back({{"base", t.base}, {"extra", t.extra}, {"t", vector_json(t.t)}});
      n["tuples"] = std::move(ts);
    }
    doc["necessity"] = std::move(n);
  }
  return doc;
}

std::string serialize_problem(const ProblemFile& p) { return to_json(p).dump(2); }

VectorFieldSample sample_of(const ProblemFile& p) {
  const auto n = static_cast<Eigen::Index>(p.points.size());
  VectorFieldSample s{PointSet(p.dim_domain, n), PointSet(p.dim_target, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.domain.col(i) = p.points[static_cast<std::size_t>(i)].x;
    s.values.col(i) = p.points[static_cast<std::size_t>(i)].v;
  }
  return s;
}

ExtensionProblem extension_problem_of(const ProblemFile& p, std::optional<double> delta) {
  const auto n = static_cast<Eigen::Index>(p.points.size());
  ExtensionProblem prob;
  prob.sample = sample_of(p);
  prob.mode = p.mode;
  prob.a_mask.resize(static_cast<std::size_t>(n));
  prob.u_partial = PointSet::Zero(p.dim_target, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = p.points[static_cast<std::size_t>(i)];
    prob.a_mask[static_cast<std::size_t>(i)] = pt.in_a;
    if (pt.in_a)
      prob.u_partial.col(i) = *pt.u;
  }
  if (p.body) {
    prob.body = *p.body;
    if (delta) {
      const auto* b = std::get_if<Ball>(&p.body->variant());
      if (!b)
        throw PreconditionError("--delta only applies to ball bodies");
      prob.body = ConvexBody::ball(b->center, *delta);
    }
  } else {
    prob.body = ConvexBody::ball(Vec::Zero(p.dim_target), delta ? *delta : prob.sup_offset_on_a());
  }
  return prob;
}

json to_json(const FeasibilityOutcome& o) {
  json j{{"status", to_string(o.status)},
         {"point", vector_json(o.point)},
         {"residual", o.residual},
         {"iterations", o.iterations}};
  if (o.probe)
    j["probe"] = {{"residual_lb", o.probe->residual_lb},
                  {"rms_bound", o.probe->rms_bound},
                  {"witness", vector_json(o.probe->witness)},
                  {"iterations", o.probe->iterations},
                  {"converged", o.probe->converged}};
  return j;
}

json to_json(const ConditionReport& r, const ProblemFile& p) {
  json certs = json::array();
  for (const auto& c : r.certificates) {
    json tuple = json::array();
    for (Eigen::Index i : c.tuple_indices)
      tuple.push_back(p.points[static_cast<std::size_t>(i)].id);
    certs.push_back({{"kind", to_string(c.kind)},
                     {"base", p.points[static_cast<std::size_t>(c.base_index)].id},
                     {"tuple", tuple},
                     {"weights", vector_json(c.weights)},
                     {"margin", c.margin}});
  }
  return {{"kind", to_string(r.kind)},
          {"status", r.satisfied() ? "satisfied" : "violated"},
          {"certificates", certs},
          {"statistics",
           {{"tuples_enumerated", r.tuples_enumerated},
            {"tuples_sampled", r.tuples_sampled},
            {"violating_tuples", r.violating_tuples},
            {"probabilistic", r.probabilistic},
            {"m_checked", r.m_checked},
            {"max_margin", r.max_margin}}}};
}

json to_json(const VerificationReport& r) {
  json pairs = json::array();
  for (const auto& f : r.violating_pairs)
    pairs.push_back({{"i", f.i}, {"j", f.j}, {"residual", f.residual}});
  return {{"mode", to_string(r.mode)},
          {"passed", r.passed()},
          {"max_a_deviation", r.max_a_deviation},
          {"max_pair_residual", r.max_pair_residual},
          {"violating_pairs", pairs},
          {"max_body_distance", r.max_body_distance},
          {"offsets_outside_body", r.offsets_outside_body},
          {"sup_dist_A", r.sup_dist_a},
          {"sup_dist_X", r.sup_dist_x},
          {"ball_body", r.ball_body},
          {"ball_radius", r.ball_radius},
          {"uniform_bound_holds", r.uniform_bound_holds}};
}

json to_json(const NecessityReport& r) {
  json iso = json::array();
  for (Eigen::Index i = 0; i < r.isometry.cols(); ++i)
    iso.push_back(vector_json(r.isometry.col(i)));
  json j{{"verdict", to_string(r.verdict)},
         {"gap", r.gap},
         {"delta_v", vector_json(r.delta_v)},
         {"delta_x", vector_json(r.delta_x)},
         {"delta_x_norm", r.delta_x_norm},
         {"diam", r.diam},
         {"C_used", r.c_used},
         {"threshold", r.threshold},
         {"delta_used", r.delta_used},
         {"w", vector_json(r.w)},
         {"isometry", iso},
         {"diagnostics", r.diagnostics}};
  if (r.extension_outcome)
    j["extension_outcome"] = to_json(*r.extension_outcome);
  return j;
}

json to_json(const SquareDemoReport& r) {
  json obs = json::array();
  for (const auto& o : r.obstructions)
    obs.push_back({{"C", o.c},
                   {"chain_lower_bound", o.lower_bound},
                   {"chain_upper_bound", o.upper_bound},
                   {"forbidden_by_chain", o.forbidden_by_chain},
                   {"search_min_deviation", o.search_min_deviation},
                   {"embedding_found", o.embedding_found}});
  return {{"lipschitz_check",
           {{"status", r.lipschitz_check.satisfied() ? "satisfied" : "violated"},
            {"m_checked", r.lipschitz_check.m_checked},
            {"max_margin", r.lipschitz_check.max_margin},
            {"tuples_enumerated", r.lipschitz_check.tuples_enumerated}}},
          {"vertex_hull_distances", r.vertex_hull_distances},
          {"hull_distance", r.hull_distance},
          {"affinity_defects", r.affinity.defects},
          {"affinity_defect", r.affinity_defect},
          {"affinity_consistent", r.affinity.consistent},
          {"forbidden_C_threshold", r.forbidden_c_threshold},
          {"parallelogram_residual", r.parallelogram_residual},
          {"obstructions", obs}};
}

} // namespace lipext::io
