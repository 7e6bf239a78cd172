#include "mixmap/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "mixmap/baselines.hpp"
#include "mixmap/errors.hpp"
#include "mixmap/factor_model.hpp"
#include "mixmap/jgraph.hpp"
#include "mixmap/mp.hpp"
#include "mixmap/proximal.hpp"

namespace mixmap {

namespace {

SolverOptions solver_options(const AlgorithmOptions& o) {
  SolverOptions s;
  s.max_iters = o.max_iters;
  s.extra_damped_iters = o.extra_damped_iters;
  s.damping = o.damping;
  s.num_random_inits = o.num_random_inits;
  s.seed = o.seed;
  s.limits = o.limits;
  s.compute_residuals = o.compute_residuals;
  return s;
}

ProximalOptions proximal_options(const AlgorithmOptions& o) {
  ProximalOptions p;
  p.damping = o.damping;
  p.seed = o.seed;
  p.limits = o.limits;
  p.compute_residuals = o.compute_residuals;
  return p;
}

SolveReport run_exact(const PairwiseModel& model, const EnumerationLimits& limits) {
  SolveReport r;
  r.algorithm = "exact";
  const auto mm = marginal_map_exact(model, limits);
  r.decode = mm.config;
  r.q_exact = mm.value;
  r.converged = true;
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

PairwiseModel make_model(const BenchSpec& spec, double sigma, std::uint64_t seed) {
  switch (spec.family) {
    case BenchFamily::Hmm:
      return gen_hmm(spec.size, sigma, seed);
    case BenchFamily::Tree:
      return gen_latent_tree(spec.size, sigma, seed, spec.card, spec.max_leaves);
    case BenchFamily::Grid:
      return gen_grid(spec.size, spec.pattern, sigma, seed, spec.card);
    case BenchFamily::UaiFile:
      break;
  }
  return spec.file_model;
}

}  // namespace

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"sum-product", "max-product",    "mixed-bethe", "jiang",
                                              "annealed-bethe", "proximal-bethe", "proximal-trw", "em",
                                              "taboo",       "mixed-jg",       "exact"};
  return names;
}

namespace {

SolveReport dispatch(const PairwiseModel& model, const std::string& name, const AlgorithmOptions& opts) {
  const std::vector<double> ones(model.num_edges(), 1.0);
  if (name == "sum-product") return run_sum_product(model, solver_options(opts));
  if (name == "max-product") return run_max_product(model, solver_options(opts));
  if (name == "mixed-bethe") return run_mixed_product(model, ones, solver_options(opts));
  if (name == "jiang") return run_jiang(model, ones, solver_options(opts));
  if (name == "annealed-bethe") return run_annealed(model, ones, solver_options(opts));
  if (name == "proximal-bethe") return run_proximal(model, ProximalFlavor::Bethe, proximal_options(opts));
  if (name == "proximal-trw") return run_proximal(model, ProximalFlavor::Trw, proximal_options(opts));
  if (name == "em") {
    EmOptions e;
    e.num_random_inits = opts.num_random_inits;
    e.seed = opts.seed;
    e.limits = opts.limits;
    return run_em(model, e);
  }
  if (name == "taboo") {
    TabooOptions t;
    t.num_random_inits = opts.num_random_inits;
    t.seed = opts.seed;
    t.limits = opts.limits;
    return run_taboo(model, t);
  }
  if (name == "mixed-jg") {
    auto jg = build_junction_graph(to_factor_model(model));
    auto out = run_mixed_jgbp(jg, solver_options(opts));
    ConfigScorer(model, opts.limits).annotate(out.report);
    return out.report;
  }
  if (name == "exact") return run_exact(model, opts.limits);
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

}  // namespace

SolveReport run_algorithm(const PairwiseModel& model, const std::string& name, const AlgorithmOptions& opts) {
  SolveReport r = dispatch(model, name, opts);
  r.algorithm = name;
  return r;
}

std::vector<double> BenchSpec::default_sigmas() {
  std::vector<double> s;
  for (int k = 1; k <= 20; ++k) s.push_back(k / 10.0);
  return s;
}

void BenchSpec::validate() const {
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (jobs < 1) throw InvalidArgument("jobs must be at least 1");
  if (sigmas.empty()) throw InvalidArgument("sigma grid is empty");
  for (double s : sigmas) {
    if (!(s > 0.0) || std::isinf(s)) throw InvalidArgument("sigma must be positive and finite");
  }
  if (algorithms.empty()) throw InvalidArgument("no algorithms selected");
  const auto& names = algorithm_names();
  for (const auto& a : algorithms) {
    if (std::find(names.begin(), names.end(), a) == names.end()) {
      throw InvalidArgument("unknown algorithm '" + a + "'");
    }
  }
}

std::string family_name(BenchFamily family) {
  switch (family) {
    case BenchFamily::Hmm:
      return "hmm";
    case BenchFamily::Tree:
      return "tree";
    case BenchFamily::Grid:
      return "grid";
    case BenchFamily::UaiFile:
      return "uai-file";
  }
  return "";
}

BenchResult run_bench(const BenchSpec& spec) {
  spec.validate();
  const int na = static_cast<int>(spec.algorithms.size());
  const int nt = static_cast<int>(spec.sigmas.size()) * spec.trials;
  std::vector<TrialRecord> records(static_cast<std::size_t>(nt) * na);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const int task = next.fetch_add(1);
      if (task >= nt) return;
      const double sigma = spec.sigmas[task / spec.trials];
      const int trial = task % spec.trials;
      try {
        const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(trial);
        const PairwiseModel model = make_model(spec, sigma, seed);
        AlgorithmOptions opts = spec.solver;
        opts.seed = seed;
        std::optional<ConfigScorer> scorer;
        double reference = -std::numeric_limits<double>::infinity();
        if (spec.reference == BenchReference::Oracle) {
          reference = marginal_map_exact(model, spec.solver.limits).value;
          scorer.emplace(model, spec.solver.limits);
        }
        for (int a = 0; a < na; ++a) {
          const SolveReport r = run_algorithm(model, spec.algorithms[a], opts);
          TrialRecord& rec = records[static_cast<std::size_t>(task) * na + a];
          rec.sigma = sigma;
          rec.trial = trial;
          rec.algorithm = spec.algorithms[a];
          rec.q = scorer ? (*scorer)(r.decode) : r.score();
          rec.converged = r.converged;
          if (r.bound && r.bound->valid) rec.bound = r.bound->value;
          reference = std::max(reference, rec.q);
        }
        for (int a = 0; a < na; ++a) records[static_cast<std::size_t>(task) * na + a].reference = reference;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(nt);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::min(spec.jobs, nt); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  BenchResult out;
  out.records = records;
  for (std::size_t s = 0; s < spec.sigmas.size(); ++s) {
    for (int a = 0; a < na; ++a) {
      BenchRow row;
      row.family = family_name(spec.family);
      row.sigma = spec.sigmas[s];
      row.algorithm = spec.algorithms[a];
      row.trials = spec.trials;
      double err = 0.0;
      double gap = 0.0;
      int bounds = 0;
      int hits = 0;
      int converged = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const auto& rec = records[(s * spec.trials + t) * na + a];
        const double e = rec.reference - rec.q;
        err += e;
        hits += e <= kSuccessTol ? 1 : 0;
        converged += rec.converged ? 1 : 0;
        if (rec.bound) {
          gap += *rec.bound - rec.reference;
          ++bounds;
        }
      }
      row.success_rate = static_cast<double>(hits) / spec.trials;
      row.mean_rel_error = err / spec.trials;
      row.mean_bound_gap = bounds ? gap / bounds : std::numeric_limits<double>::quiet_NaN();
      row.converged_rate = static_cast<double>(converged) / spec.trials;
      out.rows.push_back(row);
    }
  }
  return out;
}

std::string bench_csv(const BenchResult& result) {
  std::string out = "# mixmap-bench v1\n";
  out += "family,sigma,algorithm,trials,success_rate,mean_rel_error,mean_bound_gap,converged_rate\n";
  for (const auto& r : result.rows) {
    out += r.family + "," + format_double(r.sigma) + "," + r.algorithm + "," + std::to_string(r.trials) + "," +
           format_double(r.success_rate) + "," + format_double(r.mean_rel_error) + "," +
           format_double(r.mean_bound_gap) + "," + format_double(r.converged_rate) + "\n";
  }
  return out;
}

nlohmann::json bench_json(const BenchSpec& spec, const BenchResult& result) {
  nlohmann::json j;
  j["schema"] = "mixmap-bench v1";
  j["family"] = family_name(spec.family);
  j["size"] = spec.size;
  j["trials"] = spec.trials;
  j["seed_base"] = spec.seed_base;
  j["reference"] = spec.reference == BenchReference::Oracle ? "oracle" : "best-of-algorithms";
  j["algorithms"] = spec.algorithms;
  j["sigmas"] = spec.sigmas;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row{{"family", r.family},
                       {"sigma", r.sigma},
                       {"algorithm", r.algorithm},
                       {"trials", r.trials},
                       {"success_rate", r.success_rate},
                       {"mean_rel_error", r.mean_rel_error},
                       {"converged_rate", r.converged_rate}};
    row["mean_bound_gap"] = std::isnan(r.mean_bound_gap) ? nlohmann::json(nullptr) : nlohmann::json(r.mean_bound_gap);
    rows.push_back(row);
  }
  return j;
}

}  // namespace mixmap
