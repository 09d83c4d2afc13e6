#include "lipext/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "lipext/io.hpp"

namespace lipext {

namespace {

using io::json;

struct Options {
  std::string mode;
  int m_max = -1;
  double tol = -1.0;
  long max_iter = -1;
  std::string order;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::optional<double> c;
  std::string input;
  std::string output;
  std::string format = "json";
};

struct Outcome {
  int status = 0;
  json report;
};

std::string read_text(const std::string& path) {
  if (path.empty())
    throw PreconditionError("--input is required for this command");
  std::ifstream in(path);
  if (!in)
    throw PreconditionError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw PreconditionError("cannot write '" + tmp.string() + "'");
    f << text;
    f.flush();
    if (!f)
      throw PreconditionError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

Tolerances effective_tolerances(const io::ProblemFile* p, const Options& o) {
  Tolerances t = p && p->tolerances ? *p->tolerances : Tolerances{};
  if (o.tol >= 0.0)
    t.feas_tol = o.tol;
  if (o.max_iter >= 0)
    t.max_iter = o.max_iter;
  t.validate();
  return t;
}

EnumerationPolicy effective_policy(const io::ProblemFile& p, const Options& o) {
  EnumerationPolicy pol = p.policy ? *p.policy : EnumerationPolicy{};
  if (o.m_max >= 0)
    pol.m_max = o.m_max;
  if (o.seed)
    pol.seed = *o.seed;
  return pol;
}

OrderStrategy effective_order(const io::ProblemFile& p, const Options& o) {
  OrderStrategy ord = p.order ? *p.order : OrderStrategy{};
  if (!o.order.empty())
    ord = io::parse_order(o.order, ord.seed);
  if (o.seed)
    ord.seed = *o.seed;
  return ord;
}

json values_json(const io::ProblemFile& p, const PointSet& u) {
  json vals = json::array();
  for (Eigen::Index i = 0; i < u.cols(); ++i)
    vals.push_back({{"id", p.points[static_cast<std::size_t>(i)].id}, {"u", io::vector_json(u.col(i))}});
  return vals;
}

json log_json(const io::ProblemFile& p, const std::vector<PointLogEntry>& log) {
  json out = json::array();
  for (const auto& e : log)
    out.push_back({{"id", p.points[static_cast<std::size_t>(e.index)].id},
                   {"outcome", io::to_json(e.outcome)},
                   {"hull_weights", io::vector_json(e.hull_weights)}});
  return out;
}

// Distance of each offset u - v to the hull of the offsets on A.
double max_hull_distance(const ExtensionProblem& prob, const PointSet& u) {
  const auto a = prob.a_indices();
  PointSet gens(u.rows(), static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k)
    gens.col(static_cast<Eigen::Index>(k)) = prob.u_partial.col(a[k]) - prob.sample.values.col(a[k]);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    const Vec off = u.col(i) - prob.sample.values.col(i);
    worst = std::max(worst, (project_hull(off, gens).point - off).norm());
  }
  return worst;
}

// The problem actually solved: body made explicit, v zeroed for kirszbraun.
io::ProblemFile effective_problem(io::ProblemFile p, const ExtensionProblem& prob) {
  p.mode = prob.mode;
  p.body = prob.body;
  for (std::size_t i = 0; i < p.points.size(); ++i)
    p.points[i].v = prob.sample.values.col(static_cast<Eigen::Index>(i));
  return p;
}

Outcome run_check(const Options& o) {
  const io::ProblemFile p = io::parse_problem(read_text(o.input));
  const Tolerances tol = effective_tolerances(&p, o);
  const EnumerationPolicy pol = effective_policy(p, o);
  const ExtensionMode mode = o.mode.empty() ? p.mode : io::parse_mode(o.mode);
  const VectorFieldSample s = io::sample_of(p);
  ConditionReport r;
  switch (mode) {
  case ExtensionMode::Lipschitz:
    r = check_lipschitz_condition(s, pol, tol);
    break;
  case ExtensionMode::Monotone:
    r = check_monotone_condition(s, pol, tol);
    break;
  case ExtensionMode::Strain:
    r = check_strain_condition(s, pol, tol);
    break;
  }
  json rep{{"config", {{"mode", to_string(mode)}, {"policy", io::to_json(pol)}, {"tolerances", io::to_json(tol)}}},
           {"problem", io::to_json(p)},
           {"result", io::to_json(r, p)}};
  return {r.satisfied() ? 0 : 2, rep};
}

Outcome run_extend(const Options& o, bool kirszbraun) {
  io::ProblemFile p = io::parse_problem(read_text(o.input));
  if (!o.mode.empty())
    p.mode = io::parse_mode(o.mode);
  const Tolerances tol = effective_tolerances(&p, o);
  const OrderStrategy order = effective_order(p, o);

  ExtensionProblem prob;
  if (kirszbraun) {
    prob = io::extension_problem_of(p);
    prob.mode = ExtensionMode::Lipschitz;
    prob.sample.values.setZero();
    double radius = 0.0;
    for (Eigen::Index i : prob.a_indices())
      radius = std::max(radius, prob.u_partial.col(i).norm());
    prob.body = ConvexBody::ball(Vec::Zero(p.dim_target), radius);
  } else {
    prob = io::extension_problem_of(p, o.delta);
  }

  json rep{{"config",
            {{"mode", kirszbraun ? "kirszbraun" : to_string(prob.mode)},
             {"order", {{"strategy", to_string(order)}, {"seed", order.seed}}},
             {"tolerances", io::to_json(tol)}}},
           {"problem", io::to_json(p)},
           {"effective_problem", io::to_json(effective_problem(p, prob))}};
  try {
    const ExtensionResult res = kirszbraun ? kirszbraun_extend(prob.sample.domain, prob.a_mask, prob.u_partial,
                                                               order, tol)
                                           : extend(prob, order, tol);
    const VerificationReport ver = verify_extension(res, prob, tol);
    json v = io::to_json(ver);
    v["max_hull_distance"] = max_hull_distance(prob, res.u_full);
    rep["result"] = {{"status", "extended"},
                     {"values", values_json(p, res.u_full)},
                     {"sup_dist_A", res.sup_dist_a},
                     {"sup_dist_X", res.sup_dist_x},
                     {"log", log_json(p, res.per_point_log)},
                     {"verification", v}};
    return {ver.passed() ? 0 : 1, rep};
  } catch (const FeasibilityFailed& e) {
    const bool infeasible = e.outcome().status == FeasibilityStatus::Infeasible;
    rep["result"] = {{"status", infeasible ? "infeasible" : "failed"},
                     {"failed_point", p.points[static_cast<std::size_t>(e.index())].id},
                     {"outcome", io::to_json(e.outcome())},
                     {"log", log_json(p, e.partial().per_point_log)},
                     {"diagnostics", e.what()}};
    return {infeasible ? 2 : 1, rep};
  }
}

Outcome run_necessity(const Options& o) {
  const io::ProblemFile p = io::parse_problem(read_text(o.input));
  const Tolerances tol = effective_tolerances(&p, o);
  const double c = o.c ? *o.c : p.necessity_c.value_or(1.0);
  if (!(c > 0.0))
    throw PreconditionError("--C must be positive");
  const VectorFieldSample s = io::sample_of(p);

  std::vector<NecessityProbeInput> inputs;
  json source;
  if (!p.necessity_tuples.empty()) {
    source = "file";
    for (const auto& t : p.necessity_tuples) {
      NecessityProbeInput in{s, {}, p.index_of(t.extra), t.t, c};
      for (const auto& id : t.base)
        in.base_indices.push_back(p.index_of(id));
      inputs.push_back(std::move(in));
    }
  } else {
    EnumerationPolicy pol = effective_policy(p, o);
    const int cap = static_cast<int>(std::min<Eigen::Index>(3, s.value_dim()));
    if (pol.m_max <= 0 || pol.m_max > cap)
      pol.m_max = cap;
    const ConditionReport r = check_lipschitz_condition(s, pol, tol);
    source = {{"checker", io::to_json(r, p)}};
    for (const auto& cert : r.certificates)
      inputs.push_back({s, cert.tuple_indices, cert.base_index, cert.weights, c});
  }

  json probes = json::array();
  bool confirmed = false;
  for (const auto& in : inputs) {
    const NecessityReport r = necessity_probe(in, tol);
    confirmed = confirmed || r.verdict == NecessityVerdict::ViolationConfirmed;
    json base = json::array();
    for (Eigen::Index i : in.base_indices)
      base.push_back(p.points[static_cast<std::size_t>(i)].id);
    json j = io::to_json(r);
    j["tuple"] = {{"base", base},
                  {"extra", p.points[static_cast<std::size_t>(in.extra_index)].id},
                  {"t", io::vector_json(in.t)}};
    probes.push_back(std::move(j));
  }
  json rep{{"config", {{"C", c}, {"tolerances", io::to_json(tol)}}},
           {"problem", io::to_json(p)},
           {"result", {{"status", confirmed ? "violation_confirmed" : "no_violation_detected"},
                       {"tuple_source", source},
                       {"probes", probes}}}};
  return {confirmed ? 2 : 0, rep};
}

Outcome run_square_demo(const Options& o) {
  const Tolerances tol = effective_tolerances(nullptr, o);
  std::vector<double> cs = {0.1, 0.2};
  if (o.c)
    cs = {*o.c};
  const SquareDemoReport r = square_demo(tol, cs);
  json rep{{"config", {{"C_values", cs}, {"tolerances", io::to_json(tol)}}}, {"result", io::to_json(r)}};
  rep["result"]["status"] = "ok";
  return {0, rep};
}

Outcome run_verify(const Options& o) {
  json prior;
  try {
    prior = json::parse(read_text(o.input));
  } catch (const json::parse_error& e) {
    throw SchemaError({std::string("report: not valid JSON: ") + e.what()});
  }
  if (!prior.contains("effective_problem") || !prior.contains("result") ||
      !prior["result"].contains("values"))
    throw SchemaError({"report: expected an extend or kirszbraun report with result.values"});
  const io::ProblemFile p = io::problem_from_json(prior["effective_problem"]);
  Tolerances tol = Tolerances{};
  if (prior.contains("config") && prior["config"].contains("tolerances")) {
    const json& t = prior["config"]["tolerances"];
    tol.feas_tol = t.at("feas_tol");
    tol.solve_tol = t.at("solve_tol");
    tol.max_iter = t.at("max_iter");
  }
  if (o.tol >= 0.0)
    tol.feas_tol = o.tol;
  const ExtensionProblem prob = io::extension_problem_of(p);

  ExtensionResult res;
  res.u_full = PointSet(p.dim_target, static_cast<Eigen::Index>(p.points.size()));
  const json& vals = prior["result"]["values"];
  if (vals.size() != p.points.size())
    throw SchemaError({"report: result.values has the wrong length"});
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const std::string id = vals[i].at("id");
    const Eigen::Index k = p.index_of(id);
    if (k < 0) {
      issues.push_back("result.values[" + std::to_string(i) + "]: unknown id '" + id + "'");
      continue;
    }
    const json& u = vals[i].at("u");
    if (!u.is_array() || static_cast<int>(u.size()) != p.dim_target) {
      issues.push_back("result.values[" + std::to_string(i) + "].u (id '" + id + "'): expected " +
                       std::to_string(p.dim_target) + " coordinates");
      continue;
    }
    for (int r = 0; r < p.dim_target; ++r)
      res.u_full(r, k) = u[static_cast<std::size_t>(r)].get<double>();
  }
  if (!issues.empty())
    throw SchemaError(issues);

  const VerificationReport ver = verify_extension(res, prob, tol);
  json v = io::to_json(ver);
  v["max_hull_distance"] = max_hull_distance(prob, res.u_full);

  bool reproduced = true;
  json mismatches = json::array();
  if (prior["result"].contains("verification")) {
    const json& old = prior["result"]["verification"];
    for (const char* key : {"max_a_deviation", "max_pair_residual", "max_body_distance", "sup_dist_A", "sup_dist_X",
                            "max_hull_distance"}) {
      if (!old.contains(key))
        continue;
      const double a = old[key], b = v[key];
      if (std::abs(a - b) > 1e-10) {
        reproduced = false;
        mismatches.push_back({{"field", key}, {"recorded", a}, {"recomputed", b}});
      }
    }
  }
  v["reproduces_recorded"] = reproduced;
  v["mismatches"] = mismatches;
  json rep{{"config", {{"tolerances", io::to_json(tol)}}},
           {"problem", io::to_json(p)},
           {"result", {{"status", ver.passed() ? "verified" : "findings"}, {"verification", v}}}};
  if (!reproduced)
    return {1, rep};
  return {ver.passed() ? 0 : 2, rep};
}

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array() && !j.empty() && !j.front().is_primitive()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << ": " << j.dump() << "\n";
  }
}

} // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite extension problems for Lipschitz, monotone and strain-bounded maps", "lipext"};
  app.set_version_flag("--version", LIPEXT_VERSION);
  app.require_subcommand(1);

  Options o;
  app.add_option("--mode", o.mode, "lipschitz, monotone or strain")
      ->check(CLI::IsMember({"lipschitz", "monotone", "strain"}));
  app.add_option("--m-max", o.m_max, "largest tuple size checked")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", o.tol, "feasibility tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--order", o.order, "input, nearest, farthest or seeded")
      ->check(CLI::IsMember({"input", "nearest", "farthest", "seeded"}));
  app.add_option("--seed", o.seed, "seed for tuple sampling and seeded orders");
  app.add_option("--delta", o.delta, "radius of K")->check(CLI::NonNegativeNumber);
  app.add_option("--C", o.c, "slack constant")->check(CLI::PositiveNumber);
  app.add_option("--input", o.input, "problem file or prior report");
  app.add_option("--output", o.output, "write the report here instead of stdout");
  app.add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"check", "check the averaged condition on the sample"},
      {"extend", "extend u from A to all points"},
      {"kirszbraun", "classical 1-Lipschitz extension into the hull of u(A)"},
      {"necessity", "probe violating tuples with the offset isometry construction"},
      {"square-demo", "the unit-square examples"},
      {"verify", "recheck an extend report"}};
  for (const auto& [name, desc] : commands)
    app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << LIPEXT_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  Outcome res;
  try {
    if (cmd == "check")
      res = run_check(o);
    else if (cmd == "extend")
      res = run_extend(o, false);
    else if (cmd == "kirszbraun")
      res = run_extend(o, true);
    else if (cmd == "necessity")
      res = run_necessity(o);
    else if (cmd == "square-demo")
      res = run_square_demo(o);
    else
      res = run_verify(o);
  } catch (const SchemaError& e) {
    err << "error: invalid input\n";
    for (const auto& issue : e.issues())
      err << "  " << issue << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  json& rep = res.report;
  rep["tool"] = {{"name", "lipext"}, {"version", LIPEXT_VERSION}};
  rep["command"] = cmd;
  rep["exit_status"] = res.status;
  if (o.seed)
    rep["config"]["seed"] = *o.seed;

  std::string text;
  if (o.format == "json") {
    text = rep.dump(2) + "\n";
  } else {
    std::ostringstream ss;
    flatten(rep.contains("result") ? rep["result"] : rep, "", ss);
    ss << "exit_status: " << res.status << "\n";
    text = ss.str();
  }
  try {
    if (o.output.empty())
      out << text;
    else
      write_atomic(o.output, text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return res.status;
}

} // namespace lipext
