// mixmap command-line tool: solve, check, gen, bench.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixmap/bench.hpp"
#include "mixmap/errors.hpp"
#include "mixmap/factor_model.hpp"
#include "mixmap/generators.hpp"
#include "mixmap/jgraph.hpp"
#include "mixmap/mp.hpp"
#include "mixmap/uai.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitResource = 3;
constexpr int kExitUsage = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string model_path;
  std::string query_path;
  std::string evid_path;
  std::string alg = "mixed-bethe";
  int max_iters = 50;
  double damping = 0.1;
  int inits = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  std::uint64_t cap = mixmap::EnumerationLimits{}.max_states;
  bool perturb = false;

  mixmap::AlgorithmOptions options() const {
    mixmap::AlgorithmOptions o;
    o.max_iters = max_iters;
    o.damping = damping;
    o.num_random_inits = inits;
    o.seed = seed;
    o.limits.max_states = cap;
    return o;
  }
};

std::string load(const std::string& path) {
  try {
    return mixmap::read_text_file(path);
  } catch (const mixmap::Error& e) {
    throw UsageError(e.what());
  }
}

mixmap::FactorModel load_factor_model(const CommonFlags& f) {
  auto fm = mixmap::parse_uai(load(f.model_path));
  fm = mixmap::apply_query(fm, mixmap::parse_query(load(f.query_path), fm.num_vars()));
  if (!f.evid_path.empty()) fm = mixmap::apply_evidence(fm, mixmap::parse_evidence(load(f.evid_path), fm.cards()));
  return fm;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out);
  if (!file) throw UsageError("cannot write " + out);
  file << text;
}

std::string csv_line(const mixmap::SolveReport& r) {
  std::ostringstream s;
  s.precision(17);
  s << "algorithm,q_value,converged,iterations,decode\n" << r.algorithm << ",";
  if (r.q_exact) {
    s << *r.q_exact;
  } else if (r.q_approx) {
    s << *r.q_approx;
  }
  s << "," << (r.converged ? 1 : 0) << "," << r.iterations << ",";
  for (std::size_t k = 0; k < r.decode.size(); ++k) s << (k ? " " : "") << r.decode[k];
  s << "\n";
  return s.str();
}

mixmap::SolveReport solve(const CommonFlags& f, std::optional<mixmap::PairwiseModel>& pairwise) {
  const auto fm = load_factor_model(f);
  const auto opts = f.options();
  if (f.alg == "mixed-jg") {
    mixmap::SolverOptions so;
    so.max_iters = opts.max_iters;
    so.damping = opts.damping;
    so.seed = opts.seed;
    so.limits = opts.limits;
    auto out = mixmap::run_mixed_jgbp(mixmap::build_junction_graph(fm), so);
    try {
      pairwise = mixmap::to_pairwise(fm);
      mixmap::ConfigScorer(*pairwise, opts.limits).annotate(out.report);
    } catch (const mixmap::StructuralError&) {
      out.report.notes.push_back("higher-order factors: Q of the decode not evaluated");
    }
    return out.report;
  }
  pairwise = mixmap::to_pairwise(fm);
  return mixmap::run_algorithm(*pairwise, f.alg, opts);
}

nlohmann::json residual_json(const mixmap::Residuals& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"message_change", r.message_change},
          {"reparam", opt(r.reparam)},
          {"a", opt(r.consistency_a)},
          {"b", opt(r.consistency_b)},
          {"c", opt(r.consistency_c)}};
}

/// Recomputes the fixed-point residuals from a perturbed copy of the beliefs.
mixmap::Residuals perturbed_residuals(const mixmap::PairwiseModel& model, const std::string& alg,
                                      const mixmap::SolveReport& report) {
  using mixmap::Role;
  const mixmap::BeliefSet* source = report.mixed_beliefs ? &*report.mixed_beliefs
                                    : report.beliefs     ? &*report.beliefs
                                                         : nullptr;
  if (!source) throw UsageError("algorithm '" + alg + "' produces no beliefs to perturb");
  mixmap::PairwiseModel roles_model = model;
  if (alg == "sum-product") roles_model = model.with_roles(std::vector<Role>(model.num_vars(), Role::Sum));
  if (alg == "max-product") roles_model = model.with_roles(std::vector<Role>(model.num_vars(), Role::Max));
  const auto b = mixmap::perturb_beliefs(*source);
  const std::vector<double> ones(model.num_edges(), 1.0);
  mixmap::Residuals r = report.residuals;
  const auto c = mixmap::check_mixed_consistency(roles_model, b);
  r.consistency_a = c.a;
  r.consistency_b = c.b;
  r.consistency_c = c.c;
  r.reparam = mixmap::check_reparameterization(roles_model, ones, b);
  return r;
}

void add_model_flags(CLI::App* cmd, CommonFlags& f, bool query_required) {
  cmd->add_option("--model", f.model_path, "UAI model file")->required()->check(CLI::ExistingFile);
  auto* q = cmd->add_option("--query", f.query_path, "Max-variable query file")->check(CLI::ExistingFile);
  if (query_required) q->required();
  cmd->add_option("--evid", f.evid_path, "evidence file")->check(CLI::ExistingFile);
}

void add_solver_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--alg", f.alg, "algorithm")->check(CLI::IsMember(mixmap::algorithm_names()));
  cmd->add_option("--max-iters", f.max_iters, "undamped sweeps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--damping", f.damping, "damping factor in [0,1)")->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--inits", f.inits, "random restarts")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--cap", f.cap, "enumeration cap in joint states")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output file (default stdout)");
}

int run(int argc, char** argv) {
  CLI::App app{"Marginal MAP inference for discrete pairwise and factor models"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance and print a JSON report");
  add_model_flags(solve_cmd, solve_flags, true);
  add_solver_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--format", solve_flags.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  CommonFlags check_flags;
  auto* check_cmd = app.add_subcommand("check", "run to convergence and report fixed-point residuals");
  add_model_flags(check_cmd, check_flags, true);
  add_solver_flags(check_cmd, check_flags);
  check_cmd->add_flag("--perturb", check_flags.perturb, "perturb the beliefs before checking");

  std::string family;
  int n = 20;
  int side = 10;
  int card = 3;
  int max_leaves = -1;
  double sigma = 1.0;
  std::uint64_t gen_seed = 0;
  std::string pattern = "sum-loopy";
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "write a generated model and its query file");
  gen_cmd->add_option("family", family, "hmm, tree or grid")->required()->check(CLI::IsMember({"hmm", "tree", "grid"}));
  gen_cmd->add_option("--n", n, "node count (hmm, tree)");
  gen_cmd->add_option("--side", side, "grid side");
  gen_cmd->add_option("--card", card, "cardinality (tree, grid)");
  gen_cmd->add_option("--max-leaves", max_leaves, "tree: leaves kept as Max");
  gen_cmd->add_option("--pattern", pattern, "grid role pattern")->check(CLI::IsMember({"sum-loopy", "max-loopy"}));
  gen_cmd->add_option("--sigma", sigma, "pairwise standard deviation")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen_seed, "random seed");
  gen_cmd->add_option("--out", gen_out, "output prefix; writes <prefix>.uai and <prefix>.query")->required();

  CommonFlags bench_flags;
  bench_flags.format = "csv";
  std::string bench_family = "hmm";
  std::string reference = "oracle";
  std::vector<double> sigmas;
  std::vector<std::string> algs{"mixed-bethe", "proximal-bethe", "taboo"};
  int size = 20;
  int trials = 100;
  int jobs = 1;
  auto* bench_cmd = app.add_subcommand("bench", "seeded benchmark sweep");
  bench_cmd->add_option("--family", bench_family, "hmm, tree, grid or uai-file")
      ->check(CLI::IsMember({"hmm", "tree", "grid", "uai-file"}));
  bench_cmd->add_option("--size", size, "nodes (hmm, tree) or side (grid)");
  bench_cmd->add_option("--card", card, "cardinality (tree, grid)");
  bench_cmd->add_option("--max-leaves", max_leaves, "tree: leaves kept as Max");
  bench_cmd->add_option("--pattern", pattern, "grid role pattern")->check(CLI::IsMember({"sum-loopy", "max-loopy"}));
  bench_cmd->add_option("--sigmas", sigmas, "comma-separated sigma grid")->delimiter(',');
  bench_cmd->add_option("--trials", trials, "trials per sigma")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--algs", algs, "comma-separated algorithms")->delimiter(',');
  bench_cmd->add_option("--reference", reference, "oracle or best")->check(CLI::IsMember({"oracle", "best"}));
  bench_cmd->add_option("--jobs", jobs, "concurrent trials")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--format", bench_flags.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));
  bench_cmd->add_option("--model", bench_flags.model_path, "UAI model (uai-file family)")->check(CLI::ExistingFile);
  bench_cmd->add_option("--query", bench_flags.query_path, "query file (uai-file family)")->check(CLI::ExistingFile);
  bench_cmd->add_option("--evid", bench_flags.evid_path, "evidence file (uai-file family)")->check(CLI::ExistingFile);
  bench_cmd->add_option("--max-iters", bench_flags.max_iters, "undamped sweeps")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--damping", bench_flags.damping, "damping factor")->check(CLI::Range(0.0, 0.999999));
  bench_cmd->add_option("--inits", bench_flags.inits, "random restarts")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--seed", bench_flags.seed, "seed base");
  bench_cmd->add_option("--cap", bench_flags.cap, "enumeration cap")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench_flags.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*solve_cmd) {
    std::optional<mixmap::PairwiseModel> pairwise;
    const auto report = solve(solve_flags, pairwise);
    emit(solve_flags.format == "csv" ? csv_line(report) : mixmap::to_json(report).dump(2) + "\n", solve_flags.out);
  } else if (*check_cmd) {
    std::optional<mixmap::PairwiseModel> pairwise;
    const auto report = solve(check_flags, pairwise);
    nlohmann::json j{{"algorithm", report.algorithm}, {"converged", report.converged}, {"perturbed", check_flags.perturb}};
    if (check_flags.perturb) {
      if (!pairwise) throw UsageError("--perturb needs a pairwise model");
      j["residuals"] = residual_json(perturbed_residuals(*pairwise, check_flags.alg, report));
    } else {
      j["residuals"] = residual_json(report.residuals);
    }
    emit(j.dump(2) + "\n", check_flags.out);
  } else if (*gen_cmd) {
    mixmap::PairwiseModel model;
    if (family == "hmm") {
      model = mixmap::gen_hmm(n, sigma, gen_seed);
    } else if (family == "tree") {
      model = mixmap::gen_latent_tree(n, sigma, gen_seed, card, max_leaves);
    } else {
      const auto p = pattern == "sum-loopy" ? mixmap::GridPattern::SumLoopy : mixmap::GridPattern::MaxLoopy;
      model = mixmap::gen_grid(side, p, sigma, gen_seed, card);
    }
    emit(mixmap::serialize_uai(mixmap::to_factor_model(model)), gen_out + ".uai");
    emit(mixmap::serialize_query(model.max_nodes()), gen_out + ".query");
  } else if (*bench_cmd) {
    static const std::map<std::string, mixmap::BenchFamily> families{{"hmm", mixmap::BenchFamily::Hmm},
                                                                     {"tree", mixmap::BenchFamily::Tree},
                                                                     {"grid", mixmap::BenchFamily::Grid},
                                                                     {"uai-file", mixmap::BenchFamily::UaiFile}};
    mixmap::BenchSpec spec;
    spec.family = families.at(bench_family);
    spec.size = size;
    spec.card = card;
    spec.max_leaves = max_leaves;
    spec.pattern = pattern == "sum-loopy" ? mixmap::GridPattern::SumLoopy : mixmap::GridPattern::MaxLoopy;
    spec.sigmas = sigmas.empty() ? mixmap::BenchSpec::default_sigmas() : sigmas;
    spec.trials = trials;
    spec.algorithms = algs;
    spec.seed_base = bench_flags.seed;
    spec.reference = reference == "oracle" ? mixmap::BenchReference::Oracle : mixmap::BenchReference::BestOfAlgorithms;
    spec.jobs = jobs;
    spec.solver = bench_flags.options();
    if (spec.family == mixmap::BenchFamily::UaiFile) {
      if (bench_flags.model_path.empty() || bench_flags.query_path.empty()) {
        throw UsageError("uai-file family needs --model and --query");
      }
      spec.file_model = mixmap::to_pairwise(load_factor_model(bench_flags));
    }
    const auto result = mixmap::run_bench(spec);
    emit(bench_flags.format == "csv" ? mixmap::bench_csv(result) : mixmap::bench_json(spec, result).dump(2) + "\n",
         bench_flags.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mixmap::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const mixmap::StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
    return kExitParse;
  } catch (const mixmap::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mixmap::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
