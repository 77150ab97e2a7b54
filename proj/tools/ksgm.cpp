// ksgm: simulate panels, estimate label-indexed graphs, sweep ROC curves and
// print theoretical rates.
//
// Exit codes: 0 success, 1 numerical or estimation failure, 2 usage or
// configuration error. Failures are reported on stderr as one JSON object.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ksgm/experiment.hpp"

namespace {

using ksgm::Error;
using ksgm::ErrorCode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigMismatch:
    case ErrorCode::BadBlocks:
    case ErrorCode::BadPermutation:
    case ErrorCode::EdgeBudgetExceeded:
    case ErrorCode::UnknownLabel:
    case ErrorCode::NoSubjectAtLabel:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotStationary:
    case ErrorCode::TooFewObservations:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

int report(const std::string& code, const std::string& message, int exit_code) {
  json j{{"error", code}, {"message", message}, {"exit_code", exit_code}};
  std::cerr << j.dump() << '\n';
  return exit_code;
}

int report(const Error& e) {
  return report(std::string(ksgm::to_string(e.code())), e.what(), exit_code_for(e.code()));
}

// Assigns `value` at a dotted path such as "transition.rho". The value is
// read as JSON when it parses, otherwise kept as a string.
void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ParseError, "override must look like key=value: '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw Error(ErrorCode::ParseError, "bad override key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

struct ExperimentArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<std::string> setting;
  int threads = 1;
};

void add_experiment_options(CLI::App* cmd, ExperimentArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment configuration")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set transition.rho=0.4");
  cmd->add_option("--output-dir", args.output_dir, "Output directory (env KSGM_OUTPUT_DIR)");
  cmd->add_option("--seed", args.seed, "Root seed");
  cmd->add_option("--replicates", args.replicates, "Number of replicates");
  cmd->add_option("--setting", args.setting, "simultaneous, sequential or random");
  cmd->add_option("--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ksgm::ExperimentConfig build_config(const ExperimentArgs& args) {
  json j = json::object();
  if (!args.config_path.empty()) {
    try {
      j = json::parse(ksgm::io::read_text_file(args.config_path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, args.config_path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  }
  if (const char* env = std::getenv("KSGM_OUTPUT_DIR"); env && *env) j["output_dir"] = env;
  if (args.seed) j["seed"] = *args.seed;
  if (args.replicates) j["replicates"] = *args.replicates;
  if (args.setting) j["setting"] = *args.setting;
  for (const auto& o : args.overrides) apply_override(j, o);
  if (args.output_dir) j["output_dir"] = *args.output_dir;
  return ksgm::parse_config(j);
}

struct EstimateArgs {
  std::string panel;
  double u0 = 0.0;
  std::string h = "0.5";
  std::string kernel = "epanechnikov";
  double eta = 2.0;
  double lambda = 0.1;
  double gamma = ksgm::kDefaultGamma;
  std::string method = "KSE";
  bool normalize = false;
  bool center = false;
  std::optional<double> xi, sigma_op, a_op;
  std::string output_dir = "ksgm_estimate";
  bool output_dir_set = false;
};

int run_estimate(EstimateArgs& args) {
  namespace fs = std::filesystem;
  if (!args.output_dir_set) {
    if (const char* env = std::getenv("KSGM_OUTPUT_DIR"); env && *env) args.output_dir = env;
  }
  auto family = ksgm::parse_kernel_family(args.kernel);
  if (!family) throw Error(ErrorCode::ParseError, "unknown kernel '" + args.kernel + "'");
  auto method = ksgm::parse_method(args.method);
  if (!method) throw Error(ErrorCode::ParseError, "unknown method '" + args.method + "'");
  if (!(args.lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  if (!(args.gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be nonnegative");
  if (!(args.u0 >= 0.0 && args.u0 <= 1.0)) throw Error(ErrorCode::InvalidArgument, "u0 must lie in [0, 1]");

  const auto file = ksgm::io::read_panel_file(args.panel);
  const auto& panel = file.panel;

  ksgm::EstimatorOptions opt;
  opt.kernel = {*family, args.eta};
  opt.normalize = args.normalize;
  opt.center = args.center;
  opt.gamma = args.gamma;

  // Bandwidth rules use the number of subjects, the smallest series length
  // and the dimension of the panel.
  const int n = static_cast<int>(panel.size());
  long long t_min = panel[0].observations.rows();
  for (const auto& s : panel.subjects()) t_min = std::min<long long>(t_min, s.observations.rows());
  const int T = static_cast<int>(t_min);
  const int d = panel.dim();
  if (args.h == "auto-iid") {
    opt.h = ksgm::theoretical_bandwidth_iid(n, T, d, args.eta);
  } else if (args.h == "auto-dependent") {
    if (!args.xi || !args.sigma_op || !args.a_op) {
      throw Error(ErrorCode::InvalidArgument, "auto-dependent needs --xi, --sigma-op and --a-op");
    }
    ksgm::RateParams p{*args.xi, *args.sigma_op, *args.a_op, args.eta};
    p.validate();
    opt.h = ksgm::theoretical_bandwidth_dependent(n, T, d, args.eta, p.xi, p.sigma_op, p.a_op);
  } else {
    const char* begin = args.h.c_str();
    char* end = nullptr;
    opt.h = std::strtod(begin, &end);
    if (args.h.empty() || end != begin + args.h.size() || !(opt.h > 0.0)) {
      throw Error(ErrorCode::ParseError, "h must be a positive number, auto-iid or auto-dependent");
    }
  }

  const auto covs = ksgm::subject_covariances(panel, opt.center);
  const ksgm::Matrix s = ksgm::method_covariance(*method, panel, covs, args.u0, opt);
  const auto estimate = ksgm::estimate_precision(s, args.lambda, opt.tol);
  const auto graph = ksgm::threshold_graph(estimate, opt.gamma);

  fs::create_directories(args.output_dir);
  const fs::path dir = args.output_dir;

  std::ostringstream precision;
  ksgm::io::write_matrix(precision, estimate.matrix);
  ksgm::io::write_text_file(dir / "precision.csv", precision.str());

  std::vector<ksgm::Edge> edges;
  for (const auto& [j, k] : graph.edges()) edges.push_back({j, k, estimate.matrix(j, k)});
  std::ostringstream graph_csv;
  ksgm::io::write_edges_header(graph_csv);
  ksgm::io::write_edges(graph_csv, args.u0, edges);
  ksgm::io::write_text_file(dir / "graph.csv", graph_csv.str());

  json columns = json::array();
  for (const auto& c : estimate.column_status) {
    columns.push_back({{"pivots", c.pivots}, {"objective", c.objective}});
  }
  json prov;
  prov["version"] = ksgm::kVersion;
  prov["inputs"] = {{"panel", args.panel},
                    {"subjects", n},
                    {"dimension", d},
                    {"min_series_length", T},
                    {"u0", args.u0},
                    {"h", args.h},
                    {"bandwidth", opt.h},
                    {"kernel", {{"name", args.kernel}, {"eta", args.eta}}},
                    {"method", args.method},
                    {"lambda", args.lambda},
                    {"gamma", args.gamma},
                    {"normalize_weights", args.normalize},
                    {"center", args.center}};
  if (auto it = file.comments.find("config_hash"); it != file.comments.end()) {
    prov["inputs"]["panel_config_hash"] = it->second;
  }
  prov["tolerances"] = {{"lp", ksgm::kLpTol},
                        {"lp_pivot_cap", ksgm::kLpPivotCap},
                        {"symmetry", ksgm::kSymmetryTol},
                        {"cholesky_pivot_floor", ksgm::kPivotFloor}};
  prov["columns"] = columns;
  prov["edge_count"] = graph.edge_count();
  ksgm::io::write_text_file(dir / "provenance.json", prov.dump(2) + "\n");
  std::cout << "edges: " << graph.edge_count() << '\n' << "output_dir: " << dir.string() << '\n';
  return kExitOk;
}

struct RatesArgs {
  int n = 0, T = 0, d = 0;
  double eta = 2.0;
  std::optional<double> xi, sigma_op, a_op;
};

int run_rates(const RatesArgs& a) {
  if (a.n < 1 || a.T < 1 || a.d < 1) throw Error(ErrorCode::InvalidArgument, "n, T and d must be positive");
  if (!(a.eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  const int given = int(a.xi.has_value()) + int(a.sigma_op.has_value()) + int(a.a_op.has_value());
  if (given != 0 && given != 3) {
    throw Error(ErrorCode::InvalidArgument, "--xi, --sigma-op and --a-op go together");
  }
  auto line = [](const char* key, double v) { std::cout << key << ": " << ksgm::io::format_real(v) << '\n'; };
  line("bias_rate", ksgm::bias_rate(a.n, a.eta));
  line("iid_variance_rate", ksgm::iid_variance_rate(a.n, a.T, a.d));
  line("kappa_star", ksgm::kappa_star(a.n, a.T, a.d, a.eta));
  line("h_iid", ksgm::theoretical_bandwidth_iid(a.n, a.T, a.d, a.eta));
  if (given == 3) {
    ksgm::RateParams p{*a.xi, *a.sigma_op, *a.a_op, a.eta};
    p.validate();
    line("dependent_variance_rate",
         ksgm::dependent_variance_rate(a.n, a.T, a.d, p.xi, p.sigma_op, p.a_op));
    line("kappa", ksgm::kappa(a.n, a.T, a.d, p));
    line("h_dependent",
         ksgm::theoretical_bandwidth_dependent(a.n, a.T, a.d, a.eta, p.xi, p.sigma_op, p.a_op));
  }
  return kExitOk;
}

void print_summary(const std::vector<ksgm::SummaryRow>& rows) {
  std::cout << "target,method,auc_mean,auc_sd,l1,l2,frobenius\n";
  for (const auto& r : rows) {
    std::cout << ksgm::io::format_real(r.target_label) << ',' << ksgm::to_string(r.method) << ','
              << ksgm::io::format_real(r.auc_mean) << ',' << ksgm::io::format_real(r.auc_sd) << ','
              << ksgm::io::format_real(r.l1) << ',' << ksgm::io::format_real(r.l2) << ','
              << ksgm::io::format_real(r.frobenius) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-smoothed graphical model estimation for labelled time series panels"};
  app.set_version_flag("--version", ksgm::kVersion);
  app.require_subcommand(1);

  ExperimentArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate panels and truth files from a config");
  add_experiment_options(sim, sim_args);

  ExperimentArgs roc_args;
  std::string panel_dir;
  auto* roc = app.add_subcommand("roc", "Sweep lambda and write ROC, error and summary CSVs");
  add_experiment_options(roc, roc_args);
  roc->add_option("--panel-dir", panel_dir, "Read panels written by `simulate` instead of resampling")
      ->check(CLI::ExistingDirectory);

  EstimateArgs est_args;
  auto* est = app.add_subcommand("estimate", "Estimate the precision matrix and graph at one label");
  est->set_help_flag("--help", "Print this help message and exit");
  est->add_option("--panel", est_args.panel, "Panel CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--u0", est_args.u0, "Target label");
  est->add_option("--h", est_args.h, "Bandwidth: number, auto-iid or auto-dependent");
  est->add_option("--kernel", est_args.kernel, "uniform, triangular, epanechnikov or cosine");
  est->add_option("--eta", est_args.eta, "Smoothness exponent");
  est->add_option("--lambda", est_args.lambda, "Constraint level");
  est->add_option("--gamma", est_args.gamma, "Edge threshold");
  est->add_option("--method", est_args.method, "KSE or Naive");
  est->add_flag("--normalize", est_args.normalize, "Normalize kernel weights to sum to one");
  est->add_flag("--center", est_args.center, "Center each subject before computing covariances");
  est->add_option("--xi", est_args.xi, "Diagonal ratio bound (auto-dependent)");
  est->add_option("--sigma-op", est_args.sigma_op, "Covariance spectral norm bound (auto-dependent)");
  est->add_option("--a-op", est_args.a_op, "Transition spectral norm bound (auto-dependent)");
  auto* est_out = est->add_option("--output-dir", est_args.output_dir, "Output directory");

  RatesArgs rate_args;
  auto* rates = app.add_subcommand("rates", "Print convergence rates and bandwidth suggestions");
  rates->add_option("--n", rate_args.n, "Number of subjects")->required();
  rates->add_option("--T", rate_args.T, "Series length")->required();
  rates->add_option("--d", rate_args.d, "Dimension")->required();
  rates->add_option("--eta", rate_args.eta, "Smoothness exponent");
  rates->add_option("--xi", rate_args.xi, "Diagonal ratio bound");
  rates->add_option("--sigma-op", rate_args.sigma_op, "Covariance spectral norm bound");
  rates->add_option("--a-op", rate_args.a_op, "Transition spectral norm bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), kExitUsage);
  }

  try {
    if (*sim) {
      const auto config = build_config(sim_args);
      ksgm::cmd_simulate(config, sim_args.threads);
      std::cout << "config_hash: " << ksgm::config_hash(config) << '\n'
                << "output_dir: " << config.output_dir << '\n';
    } else if (*roc) {
      const auto config = build_config(roc_args);
      std::optional<std::filesystem::path> dir;
      if (!panel_dir.empty()) dir = panel_dir;
      print_summary(ksgm::cmd_roc(config, roc_args.threads, dir));
    } else if (*est) {
      est_args.output_dir_set = est_out->count() > 0;
      return run_estimate(est_args);
    } else if (*rates) {
      return run_rates(rate_args);
    }
  } catch (const Error& e) {
    return report(e);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("IoError", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), kExitNumerical);
  }
  return kExitOk;
}
