// hyperpart: command-line front end.
//
//   hyperpart generate    sample an instance, write tensor + partition files
//   hyperpart norms       entrywise / spectral norms and nuclear bounds
//   hyperpart certify     optimality certificate for a planted partition
//   hyperpart solve       maximize <A, Y> over equal-size partitions
//   hyperpart experiment run|report

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperpart/hyperpart.hpp"

namespace hp = hyperpart;

namespace {

struct ModelFlags {
  int n = 0, m = 3, r = 1, k = 1;
  double p = 1.0, q = 0.0;
  std::string diagonal = "bernoulli";
  std::string preset;

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "number of vertices (0: r*k)");
    app->add_option("--m", m, "tensor order");
    app->add_option("--r", r, "number of clusters");
    app->add_option("--k", k, "cluster size");
    app->add_option("--p", p, "within-cluster hyperedge probability");
    app->add_option("--q", q, "hyperedge probability otherwise");
    app->add_option("--diagonal", diagonal, "zeroed | bernoulli");
    app->add_option("--preset", preset, "hyperclique | densest | hsbm");
  }

  hp::ModelParams params(const CLI::App* app) const {
    const auto diag = hp::parse_diagonal_policy(diagonal);
    if (!preset.empty()) {
      hp::PresetArgs args;
      args.diagonal = diag;
      if (app->count("--n")) args.n = n;
      if (app->count("--m")) args.m = m;
      if (app->count("--r")) args.r = r;
      if (app->count("--k")) args.k = k;
      if (app->count("--p")) args.p = p;
      if (app->count("--q")) args.q = q;
      return hp::preset(preset, args);
    }
    hp::ModelParams mp{n > 0 ? n : r * k, m, r, k, p, q, diag};
    mp.validate();
    return mp;
  }
};

template <class T>
std::vector<T> split_list(const std::string& s, T (*parse)(std::string_view)) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse(tok));
  return out;
}

void append_csv(const std::string& path, const std::string& header, const std::string& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("cannot write " + path);
  if (fresh) f << header << '\n';
  f << row << '\n';
}

std::vector<hp::Atom> read_atoms(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw hp::ParseError("cannot open " + path);
  std::vector<hp::Atom> atoms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ls(line);
    hp::Atom a;
    if (!(ls >> a.weight)) continue;
    double x;
    while (ls >> x) a.u.push_back(x);
    if (a.u.empty()) throw hp::ParseError("atom without vector", lineno);
    atoms.push_back(std::move(a));
  }
  return atoms;
}

void print_certificate(const hp::CertificateReport& rep, std::ostream& os) {
  os << "p " << rep.p << "\nq " << rep.q << "\nlambda " << rep.lambda
     << (rep.lambda_zero ? " (zero noise)" : "") << "\nspectral_method "
     << to_string(rep.spectral_method) << "\nnoise_spectral " << rep.noise_spectral
     << "\nnoise_upper " << rep.noise_upper << "\nz_spectral_bound " << rep.z_spectral_bound
     << "\nlemma1_rhs " << rep.lemma1_rhs << "\nlinf_projected " << rep.linf_projected
     << "\nlinf_bound " << rep.linf_bound << "\nmargin " << rep.margin << "\n";
  for (const auto& c : rep.sub_checks)
    os << "check " << c.name << ' ' << (c.passed ? "pass" : "FAIL") << ' ' << c.value << '\n';
  os << "verdict " << (rep.passes ? "PASS" : "FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact partitioning of high-order planted hypergraph models"};
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int threads = hp::default_thread_count();
  app.add_option("--seed", seed, "base random seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (default $HYPERPART_THREADS or 1)");

  // generate
  auto* gen = app.add_subcommand("generate", "sample an instance from the planted model");
  ModelFlags gen_model;
  gen_model.add_to(gen);
  std::string gen_out = "instance.tensor", gen_part;
  gen->add_option("--out", gen_out, "tensor output path")->capture_default_str();
  gen->add_option("--partition-out", gen_part, "partition sidecar path (default <out>.partition)");

  // norms
  auto* norms = app.add_subcommand("norms", "entrywise, spectral and nuclear-norm estimates");
  std::string norms_tensor, norms_atoms, norms_witness;
  int norms_restarts = 64;
  bool norms_oracle = false, norms_strict = false;
  norms->add_option("tensor", norms_tensor, "tensor file")->required();
  norms->add_option("--restarts", norms_restarts, "power-iteration restarts")->capture_default_str();
  norms->add_flag("--oracle", norms_oracle, "also run the brute-force oracle (small n)");
  norms->add_flag("--strict", norms_strict, "reject asymmetric input");
  norms->add_option("--atoms", norms_atoms, "decomposition file: 'weight u_1 .. u_n' per line");
  norms->add_option("--witness", norms_witness, "witness tensor file for the nuclear lower bound");

  // certify
  auto* cert = app.add_subcommand("certify", "verify the optimality certificate of a planted partition");
  ModelFlags cert_model;
  cert_model.add_to(cert);
  std::string cert_tensor, cert_part, cert_mode = "measured", cert_csv;
  double cert_safety = 1.25, cert_c = 1.0;
  bool cert_estimate = false;
  cert->add_option("--tensor", cert_tensor, "adjacency tensor file (else regenerate from --seed)");
  cert->add_option("--partition", cert_part, "planted partition sidecar");
  cert->add_option("--lambda-mode", cert_mode, "measured | constant")->capture_default_str();
  cert->add_option("--safety", cert_safety, "spectral safety factor")->capture_default_str();
  cert->add_option("--constant-C", cert_c, "C for constant lambda mode")->capture_default_str();
  cert->add_flag("--estimate", cert_estimate, "estimate p, q from the partition (audit mode)");
  cert->add_option("--csv", cert_csv, "append a CSV row to this file");

  // solve
  auto* solve = app.add_subcommand("solve", "recover a partition maximizing <A, Y>");
  ModelFlags solve_model;
  solve_model.add_to(solve);
  std::string solve_tensor, solve_truth, solve_method = "local-search", solve_csv;
  hp::SolverConfig solve_cfg;
  solve->add_option("--tensor", solve_tensor, "adjacency tensor file (else regenerate from --seed)");
  solve->add_option("--truth", solve_truth, "planted partition sidecar for exactness scoring");
  solve->add_option("--method", solve_method, "exhaustive | local-search | conditional-gradient")
      ->capture_default_str();
  solve->add_option("--restarts", solve_cfg.restarts, "local-search restarts")->capture_default_str();
  solve->add_option("--max-iters", solve_cfg.max_iters, "iteration cap")->capture_default_str();
  solve->add_option("--budget", solve_cfg.exhaustive_budget, "exhaustive enumeration budget")
      ->capture_default_str();
  solve->add_option("--csv", solve_csv, "append a CSV row to this file");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo experiment grids");
  exp->require_subcommand(1);
  auto* run = exp->add_subcommand("run", "run a parameter grid and write CSV");
  std::vector<int> g_n, g_m{3}, g_r{1}, g_k{1};
  std::vector<double> g_p{1.0}, g_q{0.0}, g_gaps;
  double g_center = 0.5;
  bool g_nauto = false;
  int g_trials = 10;
  std::string g_tasks = "certify,solve", g_methods = "exhaustive", g_out = "experiment.csv";
  std::string g_diag = "bernoulli", g_mode = "measured";
  double g_safety = 1.25, g_c = 1.0, g_lemma_c = 3.0, g_cap = 30.0;
  int g_restarts = 16;
  double g_budget = 1e6;
  run->add_option("--n", g_n, "vertex counts")->delimiter(',');
  run->add_option("--m", g_m, "orders")->capture_default_str()->delimiter(',');
  run->add_option("--r", g_r, "cluster counts")->capture_default_str()->delimiter(',');
  run->add_option("--k", g_k, "cluster sizes")->capture_default_str()->delimiter(',');
  run->add_option("--p", g_p, "within-cluster probabilities")->capture_default_str()->delimiter(',');
  run->add_option("--q", g_q, "across probabilities")->capture_default_str()->delimiter(',');
  run->add_option("--gaps", g_gaps, "p - q values around --gap-center (replaces --p x --q)")->delimiter(',');
  run->add_option("--gap-center", g_center, "center for --gaps")->capture_default_str();
  run->add_flag("--n-auto", g_nauto, "set n = r k");
  run->add_option("--trials", g_trials, "trials per cell")->capture_default_str();
  run->add_option("--tasks", g_tasks, "comma list of certify,solve,lemma1,bernstein")
      ->capture_default_str();
  run->add_option("--methods", g_methods, "comma list of solver methods")->capture_default_str();
  run->add_option("--restarts", g_restarts, "local-search restarts")->capture_default_str();
  run->add_option("--budget", g_budget, "exhaustive budget")->capture_default_str();
  run->add_option("--diagonal", g_diag, "zeroed | bernoulli")->capture_default_str();
  run->add_option("--lambda-mode", g_mode, "measured | constant")->capture_default_str();
  run->add_option("--safety", g_safety, "spectral safety factor")->capture_default_str();
  run->add_option("--constant-C", g_c, "C for constant lambda mode")->capture_default_str();
  run->add_option("--lemma1-C", g_lemma_c, "C for the concentration check")->capture_default_str();
  run->add_option("--time-cap", g_cap, "per-trial wall-time cap in seconds")->capture_default_str();
  run->add_option("--out", g_out, "CSV output path")->capture_default_str();

  auto* report = exp->add_subcommand("report", "align success rates with the recovery threshold");
  std::string r_csv, r_metric = "auto";
  std::optional<double> r_c;
  report->add_option("csv", r_csv, "CSV written by 'experiment run'")->required();
  report->add_option("--metric", r_metric,
                     "auto | certificate | exhaustive | local-search | conditional-gradient")
      ->capture_default_str();
  report->add_option("--constant-C", r_c, "evaluate predicates at this C instead of calibrating");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto mp = gen_model.params(gen);
      const auto inst = hp::make_instance(mp, seed);
      if (gen_part.empty()) gen_part = gen_out + ".partition";
      hp::save_tensor(gen_out, inst.adjacency);
      hp::save_partition(gen_part, inst.truth);
      std::cout << "wrote " << gen_out << " and " << gen_part << " (n=" << mp.n << " m=" << mp.m
                << " r=" << mp.r << " k=" << mp.k << " p=" << mp.p << " q=" << mp.q
                << " diagonal=" << to_string(mp.diagonal) << " seed=" << seed << ")\n";
      return 0;
    }

    if (*norms) {
      const auto t = hp::load_tensor(norms_tensor, norms_strict ? hp::SymmetryCheck::strict
                                                                : hp::SymmetryCheck::none);
      std::cout << "order " << t.order() << "\ndim " << t.dim() << "\nsymmetric "
                << (t.is_symmetric(1e-12) ? "yes" : "no") << "\nl1 " << hp::l1_norm(t)
                << "\nlinf " << hp::linf_norm(t) << "\nfrobenius " << hp::frobenius_norm(t) << '\n';
      const auto est = hp::power_iteration(t, {.restarts = norms_restarts, .seed = seed});
      std::cout << "spectral " << hp::format_double(est.value) << " (power-iteration, "
                << (est.converged ? "converged" : "not converged") << ")\nwitness";
      for (double x : est.witness) std::cout << ' ' << x;
      std::cout << '\n';
      if (norms_oracle) {
        const auto o = hp::spectral_oracle(t);
        std::cout << "spectral_oracle " << hp::format_double(o.value) << '\n';
      }
      if (!norms_atoms.empty()) {
        const auto atoms = read_atoms(norms_atoms);
        const auto up = hp::nuclear_upper_from_decomposition(atoms, t.order());
        std::cout << "nuclear_upper " << hp::format_double(up.bound)
                  << "\ndecomposition_residual " << hp::linf_norm(up.reconstruction - t) << '\n';
      }
      if (!norms_witness.empty()) {
        const auto w = hp::load_tensor(norms_witness);
        std::cout << "nuclear_lower " << hp::format_double(hp::nuclear_lower_from_witness(t, w))
                  << '\n';
      }
      return 0;
    }

    if (*cert) {
      auto mp = cert_model.params(cert);
      hp::ModelInstance inst;
      if (!cert_tensor.empty()) {
        if (cert_part.empty()) throw hp::ParameterError("--tensor requires --partition");
        auto a = hp::load_tensor(cert_tensor, hp::SymmetryCheck::strict);
        auto truth = hp::load_partition(cert_part);
        mp.n = a.dim();
        mp.m = a.order();
        mp.r = truth.r();
        mp.k = truth.k();
        inst = hp::make_instance(mp, std::move(truth), std::move(a), seed);
      } else {
        inst = hp::make_instance(mp, seed);
      }
      hp::CertificateOptions co;
      co.lambda_mode = hp::parse_lambda_mode(cert_mode);
      co.safety = cert_safety;
      co.constant_c = cert_c;
      co.estimate_params = cert_estimate;
      co.spectral.seed = seed;
      const auto rep = hp::certificate(inst, co);
      print_certificate(rep, std::cout);
      if (!cert_csv.empty()) {
        std::ostringstream row;
        row << seed << ',' << mp.n << ',' << mp.m << ',' << mp.r << ',' << mp.k << ','
            << hp::format_double(rep.p) << ',' << hp::format_double(rep.q) << ','
            << to_string(mp.diagonal) << ',' << cert_mode << ',' << to_string(rep.spectral_method)
            << ',' << hp::format_double(rep.lambda) << ',' << hp::format_double(rep.noise_spectral)
            << ',' << hp::format_double(rep.z_spectral_bound) << ','
            << hp::format_double(rep.linf_projected) << ',' << hp::format_double(rep.linf_bound)
            << ',' << hp::format_double(rep.margin) << ',' << (rep.passes ? 1 : 0);
        append_csv(cert_csv,
                   "seed,n,m,r,k,p,q,diagonal,lambda_mode,spectral_method,lambda,noise_spectral,"
                   "z_spectral_bound,linf_projected,linf_bound,margin,passes",
                   row.str());
      }
      return rep.passes ? 0 : 2;
    }

    if (*solve) {
      hp::Tensor a;
      std::optional<hp::Partition> truth;
      int r = 0, k = 0;
      if (!solve_tensor.empty()) {
        a = hp::load_tensor(solve_tensor, hp::SymmetryCheck::strict);
        r = solve_model.r;
        k = solve_model.k;
        if (!solve_truth.empty()) {
          truth = hp::load_partition(solve_truth);
          if (!solve->count("--r")) r = truth->r();
          if (!solve->count("--k")) k = truth->k();
        }
      } else {
        const auto mp = solve_model.params(solve);
        auto inst = hp::make_instance(mp, seed);
        a = std::move(inst.adjacency);
        truth = std::move(inst.truth);
        r = mp.r;
        k = mp.k;
      }
      solve_cfg.method = hp::parse_solver_method(solve_method);
      solve_cfg.seed = seed;
      const auto res = hp::solve(a, r, k, solve_cfg);
      std::cout << "method " << to_string(res.method) << "\nobjective "
                << hp::format_double(res.objective) << "\niterations " << res.iterations
                << "\nconverged " << (res.converged ? "yes" : "no") << "\nnuclear_upper "
                << res.feasibility.nuclear_upper << " (radius " << res.feasibility.nuclear_radius
                << ")\naffine_sum " << res.feasibility.affine_sum << " (target "
                << res.feasibility.affine_target << ")\nbox_violation "
                << res.feasibility.box_violation << "\npartition";
      for (int c : res.partition.assignment()) std::cout << ' ' << c;
      std::cout << '\n';
      std::optional<bool> exact;
      if (truth) {
        exact = hp::exactness(res.partition, *truth);
        std::cout << "exact " << (*exact ? "yes" : "no") << '\n';
      }
      if (!solve_csv.empty()) {
        std::ostringstream row;
        row << seed << ',' << a.dim() << ',' << a.order() << ',' << r << ',' << k << ','
            << to_string(res.method) << ',' << hp::format_double(res.objective) << ','
            << hp::format_double(res.feasibility.nuclear_upper) << ','
            << hp::format_double(res.feasibility.affine_sum) << ','
            << hp::format_double(res.feasibility.box_violation) << ','
            << (exact ? (*exact ? "1" : "0") : "");
        append_csv(solve_csv,
                   "seed,n,m,r,k,method,objective,nuclear_upper,affine_sum,box_violation,exact",
                   row.str());
      }
      return 0;
    }

    if (*run) {
      hp::ExperimentGrid g;
      g.n = g_n;
      g.m = g_m;
      g.r = g_r;
      g.k = g_k;
      g.p = g_p;
      g.q = g_q;
      g.gaps = g_gaps;
      g.gap_center = g_center;
      g.n_auto = g_nauto || g_n.empty();
      g.trials = g_trials;
      g.base_seed = seed;
      g.diagonal = hp::parse_diagonal_policy(g_diag);
      g.tasks.clear();
      for (auto t : split_list<hp::Task>(g_tasks, hp::parse_task)) g.tasks.insert(t);
      g.methods = split_list<hp::SolverMethod>(g_methods, hp::parse_solver_method);
      g.solver.restarts = g_restarts;
      g.solver.exhaustive_budget = g_budget;
      g.certificate.lambda_mode = hp::parse_lambda_mode(g_mode);
      g.certificate.safety = g_safety;
      g.certificate.constant_c = g_c;
      g.lemma1_c = g_lemma_c;
      g.trial_time_cap = g_cap;
      const auto out = hp::run_grid(g, threads);
      hp::write_grid_output(out, g_out);
      std::cout << "wrote " << g_out << " (" << hp::expand_cells(g).size() << " cells x "
                << g.trials << " trials)\n";
      return 0;
    }

    if (*report) {
      std::ifstream f(r_csv);
      if (!f) throw hp::ParseError("cannot open " + r_csv);
      const auto table = hp::parse_csv(f);
      const auto rep = hp::phase_report(table, hp::parse_success_metric(r_metric), r_c);
      std::cout << hp::format_phase_report(rep);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
