// sigw: command-line front end for the sliced IGW library.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "sigw/sigw.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace sigw;

constexpr const char* kSchema = "sliced-igw/1";

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return kUsage;
    case ErrorKind::NonFinite:
    case ErrorKind::RankDeficient:
    case ErrorKind::InfeasibleInit:
    case ErrorKind::InfeasiblePoint:
    case ErrorKind::NotPSD:
    case ErrorKind::DegenerateAffinity:
    case ErrorKind::ZeroMatrix: return kNumerical;
    default: return kData;
  }
}

struct OptimizerFlags {
  std::string optimizer = "riemannian";
  std::string init = "gaussian";
  std::optional<double> beta;
  std::optional<std::size_t> max_iters;

  void attach(CLI::App* cmd, bool with_init = true) {
    cmd->add_option("--optimizer", optimizer, "cd or riemannian")
        ->check(CLI::IsMember({"cd", "riemannian"}))
        ->capture_default_str();
    if (with_init)
      cmd->add_option("--init", init, "identity or gaussian")
          ->check(CLI::IsMember({"identity", "gaussian"}))
          ->capture_default_str();
    cmd->add_option("--beta", beta, "penalty weight for the cd optimizer")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters, "iteration cap")->check(CLI::PositiveNumber);
  }

  OptimizerKind kind() const {
    return optimizer == "cd" ? OptimizerKind::ConstraintDissolving : OptimizerKind::Riemannian;
  }

  OptimizerConfig config() const {
    OptimizerConfig cfg = optimizer == "cd" ? OptimizerConfig::constraint_dissolving_defaults()
                                            : OptimizerConfig::riemannian_defaults();
    cfg.init = init == "identity" ? Initialization::padded_identity() : Initialization::gaussian_alignment();
    if (beta) cfg.beta = *beta;
    if (max_iters) cfg.max_iters = *max_iters;
    return cfg;
  }
};

/// Writes to the path, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  auto out = open_output(path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json fit_json(const LineFit& f) {
  return {{"intercept", f.intercept}, {"slope", f.slope}, {"r_squared", f.r_squared}, {"rms_residual", f.rms_residual}};
}

UnivariateSample read_univariate(const std::string& path) {
  const auto t = read_csv(path);
  require(t.values.cols() == 1, ErrorKind::DimensionMismatch,
          path + ": expected one column, found " + std::to_string(t.values.cols()));
  return UnivariateSample(Vector(t.values.data().begin(), t.values.data().end()));
}

std::string stem_of(const std::string& path) { return std::filesystem::path(path).stem().string(); }

// ---------------------------------------------------------------------------

struct Igw1dArgs {
  std::string a, b, out;
};

int run_igw1d(const Igw1dArgs& args) {
  const auto x = read_univariate(args.a);
  const auto y = read_univariate(args.b);
  const auto r = igw_1d(x, y);
  json j;
  j["schema"] = kSchema;
  j["igw"] = std::sqrt(r.igw_squared);
  j["igw_squared"] = r.igw_squared;
  j["chosen_orientation"] = r.chosen == Orientation::Monotone ? "monotone" : "antitone";
  j["m2_mu"] = second_moment(x);
  j["m2_nu"] = second_moment(y);
  emit(args.out, dump(j));
  return kOk;
}

struct SlicedArgs {
  std::string a, b, out, trace;
  std::size_t m = 3000;
  std::uint64_t seed = 0;
  OptimizerFlags opt;
};

int run_sliced(const SlicedArgs& args) {
  auto mu = ingest_csv(args.a);
  auto nu = ingest_csv(args.b);
  json j;
  j["schema"] = kSchema;
  const bool swapped = mu.dim() > nu.dim();
  if (swapped) {
    std::swap(mu, nu);
    std::cerr << "note: swapped inputs so the lower-dimensional file is the source (" << args.b << " has dimension "
              << mu.dim() << ", " << args.a << " has dimension " << nu.dim() << ")\n";
  }
  const auto dirs = sample_directions(nu.dim(), args.m, args.seed);
  const SliceObjective objective(mu, nu, dirs);
  const auto trace = run_optimizer(objective, args.opt.kind(), args.opt.config());
  const std::size_t ties = slices_with_ties(objective, trace.final.matrix());
  if (ties > 0)
    std::cerr << "note: " << ties << " of " << args.m
              << " slices have duplicate projected values; the reported value uses one coupling among ties\n";

  j["estimate"] = std::sqrt(std::max(trace.final_objective, 0.0));
  j["estimate_squared"] = trace.final_objective;
  j["m"] = args.m;
  j["seed"] = args.seed;
  j["n_a"] = swapped ? nu.size() : mu.size();
  j["n_b"] = swapped ? mu.size() : nu.size();
  j["d_a"] = swapped ? nu.dim() : mu.dim();
  j["d_b"] = swapped ? mu.dim() : nu.dim();
  j["swapped"] = swapped;
  j["slices_with_ties"] = ties;
  j["optimizer"] = {{"method", args.opt.optimizer},
                    {"init", args.opt.init},
                    {"iterations", trace.iterates.size()},
                    {"converged_reason", to_string(trace.converged_reason)},
                    {"initial_objective", trace.iterates.empty() ? 0.0 : trace.iterates.front().objective},
                    {"final_feasibility_residual", trace.final.feasibility_residual()}};
  j["wall_time"] = trace.wall_time_seconds;
  emit(args.out, dump(j));
  if (!args.trace.empty()) {
    auto out = open_output(args.trace);
    write_trace_csv(out, trace);
  }
  return kOk;
}

struct ValidateArgs {
  std::string out;
  std::vector<std::size_t> grid;
  std::size_t m = 3000;
  std::size_t reps = 25;
  std::size_t dx = 5;
  std::size_t dy = 10;
  std::uint64_t seed = 0;
  OptimizerFlags opt;
};

std::string report_csv(const ValidationReport& r, const char* size_name) {
  std::ostringstream s;
  s << size_name << ",mean,median,min,max\n";
  for (const auto& row : r.rows)
    s << row.size << ',' << format_number(row.mean) << ',' << format_number(row.median) << ','
      << format_number(row.min) << ',' << format_number(row.max) << '\n';
  return s.str();
}

/// CSV to --out (or stdout); the JSON summary goes next to it, or to stderr.
void emit_report(const ValidateArgs& args, const ValidationReport& r, const char* size_name, json summary) {
  emit(args.out, report_csv(r, size_name));
  summary["closed_form_squared"] = r.closed_form_squared;
  summary["fit"] = fit_json(r.fit);
  if (args.out.empty())
    std::cerr << dump(summary);
  else
    emit(args.out + ".json", dump(summary));
}

ExperimentSetup setup_from(const ValidateArgs& args) {
  ExperimentSetup s;
  s.source_dim = args.dx;
  s.target_dim = args.dy;
  s.seed = args.seed;
  s.optimizer = args.opt.kind();
  s.config = args.opt.config();
  return s;
}

int run_validate_mc(ValidateArgs args) {
  if (args.grid.empty()) args.grid = power_grid(5, 13);
  require(args.dx <= args.dy, ErrorKind::InvalidArgument, "--dx must not exceed --dy");
  const auto r = validate_mc(setup_from(args), args.grid, args.reps);
  json s;
  s["schema"] = kSchema;
  s["command"] = "validate-mc";
  s["seed"] = args.seed;
  s["reps"] = args.reps;
  s["error"] = "|estimate^2 - closed_form^2|";
  emit_report(args, r, "m", s);
  return kOk;
}

int run_validate_rate(ValidateArgs args) {
  if (args.grid.empty()) args.grid = power_grid(5, 12);
  require(args.dx <= args.dy, ErrorKind::InvalidArgument, "--dx must not exceed --dy");
  const auto r = validate_rate(setup_from(args), args.grid, args.m, args.reps);
  json s;
  s["schema"] = kSchema;
  s["command"] = "validate-rate";
  s["seed"] = args.seed;
  s["reps"] = args.reps;
  s["m"] = args.m;
  s["error"] = "|estimate - closed_form|";
  double lo = r.rows.front().median;
  double hi = lo;
  for (const auto& row : r.rows) {
    lo = std::min(lo, row.median);
    hi = std::max(hi, row.median);
  }
  s["median_range"] = hi - lo;
  s["rms_residual_over_range"] = hi > lo ? r.fit.rms_residual / (hi - lo) : 0.0;
  emit_report(args, r, "n", s);
  return kOk;
}

struct PairwiseArgs {
  std::vector<std::string> files;
  std::string method = "sliced";
  std::string out;
  std::size_t m = 200;
  std::uint64_t seed = 0;
  OptimizerFlags opt;
};

int run_pairwise(const PairwiseArgs& args) {
  std::vector<EmpiricalMeasure> measures;
  std::vector<std::string> labels;
  for (const auto& f : args.files) {
    measures.push_back(ingest_csv(f));
    labels.push_back(stem_of(f));
  }
  PairwiseMethod method = args.method == "gaussian-igw"      ? PairwiseMethod::gaussian_igw()
                          : args.method == "gaussian-sliced" ? PairwiseMethod::gaussian_sliced()
                                                             : PairwiseMethod::sliced(args.m, args.opt.kind(),
                                                                                      args.opt.config());
  std::vector<PairSummary> summaries;
  const auto d = pairwise_distances(measures, labels, method, args.seed, &summaries);

  std::ostringstream csv;
  write_distance_csv(csv, d);
  emit(args.out, csv.str());

  json j;
  j["schema"] = kSchema;
  j["command"] = "pairwise";
  j["method"] = to_string(method.kind);
  j["seed"] = args.seed;
  j["m"] = args.m;
  j["labels"] = labels;
  j["pairs"] = json::array();
  for (const auto& s : summaries) {
    json p{{"a", labels[s.i]}, {"b", labels[s.j]}, {"swapped", s.swapped}, {"distance", s.distance}};
    if (s.objective) p["objective"] = *s.objective;
    if (s.converged_reason) {
      p["iterations"] = s.iterations;
      p["converged_reason"] = to_string(*s.converged_reason);
    }
    p["wall_time"] = s.wall_time_seconds;
    j["pairs"].push_back(p);
  }
  if (args.out.empty())
    std::cerr << dump(j);
  else
    emit(args.out + ".json", dump(j));
  return kOk;
}

struct ClusterArgs {
  std::string distances, truth, out, mds;
  std::size_t k = 2;
  std::uint64_t seed = 0;
};

int run_cluster(const ClusterArgs& args) {
  const auto d = read_distance_csv(args.distances);
  const auto affinity = self_tuning_affinity(d);
  auto result = spectral_cluster(affinity, args.k, args.seed);
  json j;
  j["schema"] = kSchema;
  j["command"] = "cluster";
  j["k"] = args.k;
  j["seed"] = args.seed;
  j["labels"] = d.labels();
  j["assignments"] = result.assignments;
  if (!args.truth.empty()) {
    const auto truth = read_partition(args.truth);
    j["ari"] = adjusted_rand_index(result.assignments, truth);
    j["purity"] = purity(result.assignments, truth);
  }
  const auto mds = classical_mds_2d(d);
  if (mds.warning) {
    std::cerr << "warning: " << *mds.warning << '\n';
    j["mds_warning"] = *mds.warning;
  }
  j["mds_truncated_fraction"] = mds.truncated_fraction;
  emit(args.out, dump(j));

  std::string mds_path = args.mds;
  if (mds_path.empty() && !args.out.empty()) mds_path = args.out + ".mds.csv";
  if (!mds_path.empty()) {
    auto out = open_output(mds_path);
    out << "label,x,y,cluster\n";
    for (std::size_t i = 0; i < d.size(); ++i)
      out << d.labels()[i] << ',' << format_number(mds.coordinates(i, 0)) << ','
          << format_number(mds.coordinates(i, 1)) << ',' << result.assignments[i] << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliced inner-product Gromov-Wasserstein distances"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

  Igw1dArgs igw;
  auto* c_igw = app.add_subcommand("igw1d", "exact IGW between two one-column samples");
  c_igw->add_option("file_a", igw.a)->required()->check(CLI::ExistingFile);
  c_igw->add_option("file_b", igw.b)->required()->check(CLI::ExistingFile);
  c_igw->add_option("--out", igw.out, "JSON output path (default stdout)");

  SlicedArgs sl;
  auto* c_sl = app.add_subcommand("sliced", "sliced IGW estimate between two samples");
  c_sl->add_option("file_a", sl.a)->required()->check(CLI::ExistingFile);
  c_sl->add_option("file_b", sl.b)->required()->check(CLI::ExistingFile);
  c_sl->add_option("--m", sl.m, "number of slices")->check(CLI::PositiveNumber)->capture_default_str();
  c_sl->add_option("--seed", sl.seed, "direction seed")->required();
  c_sl->add_option("--out", sl.out, "JSON output path (default stdout)");
  c_sl->add_option("--trace", sl.trace, "per-iteration CSV path");
  sl.opt.attach(c_sl);

  ValidateArgs vm;
  auto* c_vm = app.add_subcommand("validate-mc", "slice-count sweep against the Gaussian closed form");
  c_vm->add_option("--m-grid", vm.grid, "slice counts (default 2^5..2^13)")->delimiter(',');
  c_vm->add_option("--reps", vm.reps)->check(CLI::PositiveNumber)->capture_default_str();
  c_vm->add_option("--dx", vm.dx)->check(CLI::PositiveNumber)->capture_default_str();
  c_vm->add_option("--dy", vm.dy)->check(CLI::PositiveNumber)->capture_default_str();
  c_vm->add_option("--seed", vm.seed)->required();
  c_vm->add_option("--out", vm.out, "CSV output path (default stdout)");
  vm.opt.attach(c_vm, false);

  ValidateArgs vr;
  auto* c_vr = app.add_subcommand("validate-rate", "sample-size sweep against the Gaussian closed form");
  c_vr->add_option("--n-grid", vr.grid, "sample sizes (default 2^5..2^12)")->delimiter(',');
  c_vr->add_option("--m", vr.m, "number of slices")->check(CLI::PositiveNumber)->capture_default_str();
  c_vr->add_option("--reps", vr.reps)->check(CLI::PositiveNumber)->capture_default_str();
  c_vr->add_option("--dx", vr.dx)->check(CLI::PositiveNumber)->capture_default_str();
  c_vr->add_option("--dy", vr.dy)->check(CLI::PositiveNumber)->capture_default_str();
  c_vr->add_option("--seed", vr.seed)->required();
  c_vr->add_option("--out", vr.out, "CSV output path (default stdout)");
  vr.opt.attach(c_vr, false);

  PairwiseArgs pw;
  auto* c_pw = app.add_subcommand("pairwise", "distance matrix between sample files");
  c_pw->add_option("files", pw.files)->required()->expected(2, -1)->check(CLI::ExistingFile);
  c_pw->add_option("--method", pw.method)
      ->check(CLI::IsMember({"sliced", "gaussian-sliced", "gaussian-igw"}))
      ->capture_default_str();
  c_pw->add_option("--m", pw.m, "number of slices")->check(CLI::PositiveNumber)->capture_default_str();
  c_pw->add_option("--seed", pw.seed)->required();
  c_pw->add_option("--out", pw.out, "CSV output path (default stdout); summaries go to <out>.json");
  pw.opt.attach(c_pw);

  ClusterArgs cl;
  auto* c_cl = app.add_subcommand("cluster", "spectral clustering and 2D MDS of a distance CSV");
  c_cl->add_option("distances", cl.distances)->required()->check(CLI::ExistingFile);
  c_cl->add_option("--k", cl.k, "number of clusters")->required()->check(CLI::PositiveNumber);
  c_cl->add_option("--seed", cl.seed)->required();
  c_cl->add_option("--truth", cl.truth, "file with one true label per line")->check(CLI::ExistingFile);
  c_cl->add_option("--out", cl.out, "JSON output path (default stdout)");
  c_cl->add_option("--mds", cl.mds, "MDS coordinates CSV (default <out>.mds.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  set_thread_count(threads);
  try {
    if (*c_igw) return run_igw1d(igw);
    if (*c_sl) return run_sliced(sl);
    if (*c_vm) return run_validate_mc(vm);
    if (*c_vr) return run_validate_rate(vr);
    if (*c_pw) return run_pairwise(pw);
    if (*c_cl) return run_cluster(cl);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
