#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ksgm/clime.hpp"
#include "ksgm/covariance.hpp"
#include "ksgm/error.hpp"
#include "ksgm/evaluate.hpp"
#include "ksgm/io.hpp"
#include "ksgm/kernels.hpp"
#include "ksgm/matstat.hpp"
#include "ksgm/parallel.hpp"
#include "ksgm/rng.hpp"
#include "ksgm/simulate.hpp"

namespace ksgm {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct Bandwidth {
  enum class Kind { Fixed, AutoDependent, AutoIid };
  Kind kind = Kind::Fixed;
  double value = 0.5;
};

enum class PermutationMode { None, Random, Explicit };

//! Full description of a simulation + estimation experiment.
struct ExperimentConfig {
  PathSetting setting = PathSetting::Simultaneous;
  SimConfig sim;
  std::vector<double> target_labels{0.0};
  Bandwidth h;
  KernelSpec kernel;
  bool normalize_weights = false;
  bool center = false;
  double lambda_lo = 0.01;
  double lambda_hi = 1.0;
  int lambda_count = 15;
  double error_lambda = 0.1;
  double gamma = kDefaultGamma;
  int replicates = 1;
  std::vector<Method> methods{Method::KSE, Method::Naive};
  PermutationMode permutation = PermutationMode::None;
  std::vector<std::size_t> permutation_indices;
  std::string output_dir = "ksgm_out";

  std::vector<double> grid() const { return lambda_grid(lambda_lo, lambda_hi, lambda_count); }
  std::vector<double> labels() const { return equispaced_labels(sim.n); }
};

// ---------------------------------------------------------------------------
// JSON schema

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("key '") + key + "': " + e.what());
  }
}

inline void invalid(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  using detail::read;
  detail::reject_unknown(j,
                         {"setting", "d", "n", "T", "n_fix", "n_grow", "n_decay", "n_ed",
                          "transition", "strength_range", "diag_boost", "target_labels", "h",
                          "kernel", "normalize_weights", "center", "lambda_grid", "error_lambda",
                          "gamma", "replicates", "methods", "permutation", "seed", "output_dir"},
                         "config");
  ExperimentConfig c;
  c.sim.d = 20;
  c.sim.n = 21;
  c.sim.T = 50;

  if (j.contains("setting")) {
    std::string s;
    read(j, "setting", s);
    auto parsed = parse_path_setting(s);
    if (!parsed || *parsed == PathSetting::ConstantCustom) {
      throw Error(ErrorCode::ParseError, "setting must be simultaneous, sequential or random");
    }
    c.setting = *parsed;
  }
  read(j, "d", c.sim.d);
  read(j, "n", c.sim.n);
  read(j, "T", c.sim.T);
  read(j, "n_fix", c.sim.n_fix);
  read(j, "n_grow", c.sim.n_grow);
  read(j, "n_decay", c.sim.n_decay);
  read(j, "n_ed", c.sim.n_ed);
  read(j, "diag_boost", c.sim.diag_boost);
  read(j, "seed", c.sim.seed);
  if (j.contains("strength_range")) {
    std::vector<double> r;
    read(j, "strength_range", r);
    if (r.size() != 2) throw Error(ErrorCode::ParseError, "strength_range needs two values");
    c.sim.strength_lo = r[0];
    c.sim.strength_hi = r[1];
  }

  c.sim.transition.structure = TransitionStructure::RandomSparse;
  if (j.contains("transition")) {
    const auto& t = j.at("transition");
    detail::reject_unknown(t, {"structure", "rho", "blocks", "target_norm", "scale", "entries"},
                           "transition");
    auto& spec = c.sim.transition;
    if (t.contains("structure")) {
      std::string s;
      read(t, "structure", s);
      auto parsed = parse_transition_structure(s);
      if (!parsed) throw Error(ErrorCode::ParseError, "unknown transition structure '" + s + "'");
      spec.structure = *parsed;
    }
    read(t, "rho", spec.rho);
    read(t, "blocks", spec.blocks);
    if (t.contains("target_norm") && !t.at("target_norm").is_null()) {
      double v = 0.0;
      read(t, "target_norm", v);
      spec.target_norm = v;
    }
    if (t.contains("scale") && !t.at("scale").is_null()) {
      double v = 0.0;
      read(t, "scale", v);
      spec.scale = v;
    }
    if (t.contains("entries") && !t.at("entries").is_null()) {
      std::vector<std::vector<double>> rows;
      read(t, "entries", rows);
      Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw Error(ErrorCode::ParseError, "entries must be square");
        for (std::size_t k = 0; k < rows.size(); ++k) {
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
        }
      }
      spec.entries = std::move(m);
    }
  }

  read(j, "target_labels", c.target_labels);

  if (j.contains("h")) {
    const auto& h = j.at("h");
    if (h.is_number()) {
      c.h = {Bandwidth::Kind::Fixed, h.get<double>()};
    } else if (h == "auto-dependent") {
      c.h = {Bandwidth::Kind::AutoDependent, 0.0};
    } else if (h == "auto-iid") {
      c.h = {Bandwidth::Kind::AutoIid, 0.0};
    } else {
      throw Error(ErrorCode::ParseError, "h must be a number, \"auto-dependent\" or \"auto-iid\"");
    }
  }

  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    detail::reject_unknown(k, {"name", "eta"}, "kernel");
    if (k.contains("name")) {
      std::string name;
      read(k, "name", name);
      auto f = parse_kernel_family(name);
      if (!f) throw Error(ErrorCode::ParseError, "unknown kernel '" + name + "'");
      c.kernel.family = *f;
    }
    read(k, "eta", c.kernel.eta);
  }
  read(j, "normalize_weights", c.normalize_weights);
  read(j, "center", c.center);

  if (j.contains("lambda_grid")) {
    const auto& g = j.at("lambda_grid");
    detail::reject_unknown(g, {"lo", "hi", "count"}, "lambda_grid");
    read(g, "lo", c.lambda_lo);
    read(g, "hi", c.lambda_hi);
    read(g, "count", c.lambda_count);
  }
  read(j, "error_lambda", c.error_lambda);
  read(j, "gamma", c.gamma);
  read(j, "replicates", c.replicates);

  if (j.contains("methods")) {
    std::vector<std::string> names;
    read(j, "methods", names);
    c.methods.clear();
    for (const auto& n : names) {
      auto m = parse_method(n);
      if (!m) throw Error(ErrorCode::ParseError, "unknown method '" + n + "'");
      for (auto existing : c.methods) {
        if (existing == *m) throw Error(ErrorCode::ParseError, "duplicate method '" + n + "'");
      }
      c.methods.push_back(*m);
    }
  }

  if (j.contains("permutation")) {
    const auto& p = j.at("permutation");
    if (p.is_null()) {
      c.permutation = PermutationMode::None;
    } else if (p == "random") {
      c.permutation = PermutationMode::Random;
    } else if (p.is_array()) {
      c.permutation = PermutationMode::Explicit;
      read(j, "permutation", c.permutation_indices);
    } else {
      throw Error(ErrorCode::ParseError, "permutation must be null, \"random\" or an index array");
    }
  }
  read(j, "output_dir", c.output_dir);

  // semantic checks
  const auto& s = c.sim;
  if (s.d < 1 || s.n < 1 || s.T < 1) detail::invalid("d, n and T must be positive");
  if (c.replicates < 1) detail::invalid("replicates must be positive");
  if (c.target_labels.empty()) detail::invalid("target_labels must not be empty");
  for (double u : c.target_labels) {
    if (!(u >= 0.0 && u <= 1.0)) detail::invalid("target labels must lie in [0, 1]");
  }
  if (c.h.kind == Bandwidth::Kind::Fixed && !(c.h.value > 0.0)) detail::invalid("h must be positive");
  if (!(c.kernel.eta > 0.0)) detail::invalid("kernel eta must be positive");
  lambda_grid(c.lambda_lo, c.lambda_hi, c.lambda_count);
  if (!(c.error_lambda >= 0.0)) detail::invalid("error_lambda must be nonnegative");
  if (!(c.gamma >= 0.0)) detail::invalid("gamma must be nonnegative");
  if (c.methods.empty()) detail::invalid("methods must not be empty");
  if (c.setting == PathSetting::Sequential && s.n_decay != 0) {
    detail::invalid("sequential setting requires n_decay = 0");
  }
  const long long pairs = static_cast<long long>(s.d) * (s.d - 1) / 2;
  const long long needed = c.setting == PathSetting::Random
                               ? s.n_ed
                               : static_cast<long long>(s.n_fix) + s.n_grow + s.n_decay;
  if (needed > pairs) {
    throw Error(ErrorCode::EdgeBudgetExceeded,
                std::to_string(needed) + " edges requested, " + std::to_string(pairs) + " available");
  }
  if (c.permutation == PermutationMode::Explicit) {
    if (c.permutation_indices.size() != static_cast<std::size_t>(s.n)) {
      throw Error(ErrorCode::BadPermutation, "permutation must have n entries");
    }
    std::vector<char> seen(s.n, 0);
    for (auto p : c.permutation_indices) {
      if (p >= seen.size() || seen[p]) throw Error(ErrorCode::BadPermutation, "not a bijection");
      seen[p] = 1;
    }
  }
  if (std::find(c.methods.begin(), c.methods.end(), Method::Naive) != c.methods.end()) {
    const auto labels = c.labels();
    for (double u : c.target_labels) {
      bool found = false;
      for (double l : labels) found = found || std::abs(l - u) <= 1e-12;
      if (!found) {
        throw Error(ErrorCode::NoSubjectAtLabel,
                    "Naive needs a subject at target label " + io::format_real(u));
      }
    }
  }
  return c;
}

//! Canonical JSON form (all keys explicit, output_dir excluded).
inline json to_json(const ExperimentConfig& c) {
  json t;
  const auto& spec = c.sim.transition;
  t["structure"] = std::string(to_string(spec.structure));
  t["rho"] = spec.rho;
  t["blocks"] = spec.blocks;
  t["target_norm"] = spec.target_norm ? json(*spec.target_norm) : json(nullptr);
  t["scale"] = spec.scale ? json(*spec.scale) : json(nullptr);
  if (spec.entries) {
    std::vector<std::vector<double>> rows(spec.entries->rows());
    for (Eigen::Index r = 0; r < spec.entries->rows(); ++r) {
      for (Eigen::Index k = 0; k < spec.entries->cols(); ++k) rows[r].push_back((*spec.entries)(r, k));
    }
    t["entries"] = rows;
  } else {
    t["entries"] = nullptr;
  }

  json j;
  j["setting"] = std::string(to_string(c.setting));
  j["d"] = c.sim.d;
  j["n"] = c.sim.n;
  j["T"] = c.sim.T;
  j["n_fix"] = c.sim.n_fix;
  j["n_grow"] = c.sim.n_grow;
  j["n_decay"] = c.sim.n_decay;
  j["n_ed"] = c.sim.n_ed;
  j["transition"] = t;
  j["strength_range"] = {c.sim.strength_lo, c.sim.strength_hi};
  j["diag_boost"] = c.sim.diag_boost;
  j["target_labels"] = c.target_labels;
  switch (c.h.kind) {
    case Bandwidth::Kind::Fixed: j["h"] = c.h.value; break;
    case Bandwidth::Kind::AutoDependent: j["h"] = "auto-dependent"; break;
    case Bandwidth::Kind::AutoIid: j["h"] = "auto-iid"; break;
  }
  j["kernel"] = {{"name", std::string(to_string(c.kernel.family))}, {"eta", c.kernel.eta}};
  j["normalize_weights"] = c.normalize_weights;
  j["center"] = c.center;
  j["lambda_grid"] = {{"lo", c.lambda_lo}, {"hi", c.lambda_hi}, {"count", c.lambda_count}};
  j["error_lambda"] = c.error_lambda;
  j["gamma"] = c.gamma;
  j["replicates"] = c.replicates;
  std::vector<std::string> methods;
  for (auto m : c.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  switch (c.permutation) {
    case PermutationMode::None: j["permutation"] = nullptr; break;
    case PermutationMode::Random: j["permutation"] = "random"; break;
    case PermutationMode::Explicit: j["permutation"] = c.permutation_indices; break;
  }
  j["seed"] = c.sim.seed;
  return j;
}

//! FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Replicates
//
// Replicate r draws from root seed derive_seed(seed, r); within it the path,
// transition and permutation use the stream ids in ksgm::stream, and subject
// i uses stream::subject_base + i.

struct ReplicateTruth {
  PrecisionPath path;
  TransitionMatrix transition;
  std::vector<double> labels;
};

struct ReplicateData {
  ReplicateTruth truth;
  Panel panel;
};

inline std::uint64_t replicate_seed(const ExperimentConfig& c, int replicate) {
  return derive_seed(c.sim.seed, static_cast<std::uint64_t>(replicate));
}

inline ReplicateTruth simulate_truth(const ExperimentConfig& c, int replicate) {
  const auto root = replicate_seed(c, replicate);
  auto labels = c.labels();
  Rng rng(derive_seed(root, stream::path));
  auto path = [&] {
    switch (c.setting) {
      case PathSetting::Sequential: return path_sequential(c.sim, rng);
      case PathSetting::Random: return path_random(c.sim, labels, rng);
      default: return path_simultaneous(c.sim, rng);
    }
  }();
  auto a = build_transition(c.sim.transition, c.sim.d, derive_seed(root, stream::transition));
  return {std::move(path), std::move(a), std::move(labels)};
}

inline ReplicateData simulate_replicate(const ExperimentConfig& c, int replicate, int threads = 1) {
  auto truth = simulate_truth(c, replicate);
  auto panel = sample_panel(truth.path, truth.labels, c.sim.T, truth.transition,
                            replicate_seed(c, replicate), threads);
  return {std::move(truth), std::move(panel)};
}

/// Permutation applied before estimation. "random" shuffles every subject
/// whose label is not a target label; targets keep their own data.
inline std::vector<std::size_t> replicate_permutation(const ExperimentConfig& c, int replicate,
                                                      const Panel& panel) {
  std::vector<std::size_t> perm(panel.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (c.permutation == PermutationMode::Explicit) return c.permutation_indices;
  if (c.permutation == PermutationMode::None) return perm;

  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    bool target = false;
    for (double u : c.target_labels) target = target || std::abs(panel[i].label - u) <= 1e-12;
    if (!target) movable.push_back(i);
  }
  Rng rng(derive_seed(replicate_seed(c, replicate), stream::permutation));
  std::vector<std::size_t> shuffled = movable;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
  for (std::size_t m = 0; m < movable.size(); ++m) perm[movable[m]] = shuffled[m];
  return perm;
}

inline double resolve_bandwidth(const ExperimentConfig& c, const ReplicateTruth& truth) {
  switch (c.h.kind) {
    case Bandwidth::Kind::Fixed: return c.h.value;
    case Bandwidth::Kind::AutoIid:
      return theoretical_bandwidth_iid(c.sim.n, c.sim.T, c.sim.d, c.kernel.eta);
    case Bandwidth::Kind::AutoDependent: {
      const auto p = rate_params_from_path(truth.path, truth.labels, truth.transition, c.kernel.eta);
      return theoretical_bandwidth_dependent(c.sim.n, c.sim.T, c.sim.d, c.kernel.eta, p.xi,
                                             p.sigma_op, p.a_op);
    }
  }
  return c.h.value;
}

struct MethodResult {
  Method method = Method::KSE;
  double target_label = 0.0;
  double bandwidth = 0.0;
  RocCurve roc;
  std::optional<double> auc;
  std::optional<EstimationErrors> errors;
  std::string error_note;
};

struct ReplicateReport {
  int replicate = 0;
  std::vector<MethodResult> results;  // target-major, then method order
};

inline ReplicateReport evaluate_replicate(const ExperimentConfig& c, int replicate,
                                          const ReplicateTruth& truth, const Panel& sampled) {
  const Panel panel = permute_labels(sampled, replicate_permutation(c, replicate, sampled));
  const auto covs = subject_covariances(panel, c.center);
  const auto grid = c.grid();

  EstimatorOptions opt;
  opt.h = resolve_bandwidth(c, truth);
  opt.kernel = c.kernel;
  opt.normalize = c.normalize_weights;
  opt.center = c.center;
  opt.gamma = c.gamma;

  ReplicateReport report;
  report.replicate = replicate;
  for (double u0 : c.target_labels) {
    const auto truth_edges = truth.path.edge_ledger(u0);
    const auto truth_graph = graph_from_edges(c.sim.d, truth_edges);
    const Matrix truth_omega = truth.path.precision(u0);
    for (auto method : c.methods) {
      MethodResult res;
      res.method = method;
      res.target_label = u0;
      res.bandwidth = opt.h;
      const Matrix s = method_covariance(method, panel, covs, u0, opt);
      res.roc = roc_from_covariance(s, grid, truth_graph, opt);
      try {
        res.auc = auc(res.roc.points);
      } catch (const Error&) {
        res.auc.reset();
      }
      try {
        res.errors = estimation_errors(estimate_precision(s, c.error_lambda, opt.tol), truth_omega);
      } catch (const Error& e) {
        res.error_note = e.what();
      }
      report.results.push_back(std::move(res));
    }
  }
  return report;
}

inline std::vector<ReplicateReport> run_experiment(const ExperimentConfig& c, int threads = 1) {
  std::vector<ReplicateReport> out(c.replicates);
  parallel_for(static_cast<std::size_t>(c.replicates), threads, [&](std::size_t r) {
    const auto data = simulate_replicate(c, static_cast<int>(r));
    out[r] = evaluate_replicate(c, static_cast<int>(r), data.truth, data.panel);
  });
  return out;
}

struct SummaryRow {
  Method method = Method::KSE;
  double target_label = 0.0;
  double auc_mean = NAN;
  double auc_sd = NAN;
  double l1 = NAN;
  double l2 = NAN;
  double frobenius = NAN;
  int auc_count = 0;
  int error_count = 0;
};

//! Per (target, method) means in replicate order; sd uses the n-1 divisor.
inline std::vector<SummaryRow> summarize(const ExperimentConfig& c,
                                         const std::vector<ReplicateReport>& reports) {
  std::vector<SummaryRow> rows;
  for (double u0 : c.target_labels) {
    for (auto method : c.methods) {
      SummaryRow row;
      row.method = method;
      row.target_label = u0;
      std::vector<double> aucs;
      double l1 = 0, l2 = 0, fro = 0;
      for (const auto& rep : reports) {
        for (const auto& res : rep.results) {
          if (res.method != method || res.target_label != u0) continue;
          if (res.auc) aucs.push_back(*res.auc);
          if (res.errors) {
            l1 += res.errors->l1;
            l2 += res.errors->l2;
            fro += res.errors->frobenius;
            ++row.error_count;
          }
        }
      }
      row.auc_count = static_cast<int>(aucs.size());
      if (!aucs.empty()) {
        double sum = 0;
        for (double a : aucs) sum += a;
        row.auc_mean = sum / aucs.size();
        double ss = 0;
        for (double a : aucs) ss += (a - row.auc_mean) * (a - row.auc_mean);
        row.auc_sd = aucs.size() > 1 ? std::sqrt(ss / (aucs.size() - 1)) : 0.0;
      }
      if (row.error_count > 0) {
        row.l1 = l1 / row.error_count;
        row.l2 = l2 / row.error_count;
        row.frobenius = fro / row.error_count;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline std::filesystem::path target_dir(const ExperimentConfig& c, std::size_t target) {
  std::filesystem::path dir = c.output_dir;
  if (c.target_labels.size() > 1) dir /= "target_" + std::to_string(target);
  return dir;
}

inline std::string hash_line(const std::string& hash) { return "# config_hash: " + hash + "\n"; }

inline void write_config_record(const ExperimentConfig& c, const std::string& hash) {
  json j;
  j["config"] = to_json(c);
  j["config_hash"] = hash;
  j["version"] = kVersion;
  io::write_text_file(std::filesystem::path(c.output_dir) / "config.json", j.dump(2) + "\n");
}

inline std::string panel_name(int r) { return "panel_r" + std::to_string(r) + ".csv"; }

}  // namespace detail

/// Writes panel_r<r>.csv and truth_r<r>.csv per replicate plus config.json.
inline void cmd_simulate(const ExperimentConfig& c, int threads = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(c.output_dir);
  const std::string hash = config_hash(c);
  detail::write_config_record(c, hash);

  parallel_for(static_cast<std::size_t>(c.replicates), threads, [&](std::size_t ri) {
    const int r = static_cast<int>(ri);
    const auto data = simulate_replicate(c, r);
    const io::Comments comments{{"config_hash", hash}, {"replicate", std::to_string(r)}};

    std::ostringstream panel;
    io::write_panel(panel, data.panel, comments);
    io::write_text_file(fs::path(c.output_dir) / detail::panel_name(r), panel.str());

    std::ostringstream truth;
    io::write_comments(truth, comments);
    io::write_edges_header(truth);
    for (double u : data.truth.labels) io::write_edges(truth, u, data.truth.path.edge_ledger(u));
    io::write_text_file(fs::path(c.output_dir) / ("truth_r" + std::to_string(r) + ".csv"),
                        truth.str());
  });
}

/// ROC sweep over all replicates. When `panel_dir` is set, panels are read
/// from a previous `cmd_simulate` run and must carry this config's hash.
inline std::vector<SummaryRow> cmd_roc(const ExperimentConfig& c, int threads = 1,
                                       const std::optional<std::filesystem::path>& panel_dir = {}) {
  namespace fs = std::filesystem;
  const std::string hash = config_hash(c);

  std::vector<Panel> loaded;
  if (panel_dir) {
    loaded.resize(c.replicates);
    for (int r = 0; r < c.replicates; ++r) {
      auto file = io::read_panel_file(*panel_dir / detail::panel_name(r));
      auto it = file.comments.find("config_hash");
      if (it == file.comments.end() || it->second != hash) {
        throw Error(ErrorCode::ConfigMismatch,
                    detail::panel_name(r) + " was not produced by this configuration");
      }
      loaded[r] = std::move(file.panel);
    }
  }

  fs::create_directories(c.output_dir);
  detail::write_config_record(c, hash);
  for (std::size_t t = 0; t < c.target_labels.size(); ++t) {
    fs::create_directories(detail::target_dir(c, t));
  }

  std::vector<ReplicateReport> reports(c.replicates);
  parallel_for(static_cast<std::size_t>(c.replicates), threads, [&](std::size_t ri) {
    const int r = static_cast<int>(ri);
    if (panel_dir) {
      reports[ri] = evaluate_replicate(c, r, simulate_truth(c, r), loaded[ri]);
    } else {
      const auto data = simulate_replicate(c, r);
      reports[ri] = evaluate_replicate(c, r, data.truth, data.panel);
    }
    for (std::size_t t = 0; t < c.target_labels.size(); ++t) {
      std::ostringstream roc, err;
      roc << detail::hash_line(hash) << "method,replicate,lambda,tpr,fpr\n";
      err << detail::hash_line(hash) << "method,replicate,lambda,l1,l2,frobenius\n";
      for (const auto& res : reports[ri].results) {
        if (res.target_label != c.target_labels[t]) continue;
        for (const auto& p : res.roc.points) {
          roc << to_string(res.method) << ',' << r << ',' << io::format_real(p.lambda) << ','
              << io::format_optional(p.tpr) << ',' << io::format_optional(p.fpr) << '\n';
        }
        err << to_string(res.method) << ',' << r << ',' << io::format_real(c.error_lambda) << ',';
        if (res.errors) {
          err << io::format_real(res.errors->l1) << ',' << io::format_real(res.errors->l2) << ','
              << io::format_real(res.errors->frobenius) << '\n';
        } else {
          err << "NA,NA,NA\n";
        }
      }
      const auto dir = detail::target_dir(c, t);
      io::write_text_file(dir / ("roc_r" + std::to_string(r) + ".csv"), roc.str());
      io::write_text_file(dir / ("errors_r" + std::to_string(r) + ".csv"), err.str());
    }
  });

  const auto summary = summarize(c, reports);
  for (std::size_t t = 0; t < c.target_labels.size(); ++t) {
    std::ostringstream sum, skipped;
    sum << detail::hash_line(hash) << "method,auc_mean,auc_sd,l1,l2,frobenius\n";
    for (const auto& row : summary) {
      if (row.target_label != c.target_labels[t]) continue;
      sum << to_string(row.method) << ',' << io::format_real(row.auc_mean) << ','
          << io::format_real(row.auc_sd) << ',' << io::format_real(row.l1) << ','
          << io::format_real(row.l2) << ',' << io::format_real(row.frobenius) << '\n';
    }
    skipped << detail::hash_line(hash) << "method,replicate,lambda,reason\n";
    for (const auto& rep : reports) {
      for (const auto& res : rep.results) {
        if (res.target_label != c.target_labels[t]) continue;
        for (const auto& s : res.roc.skipped) {
          std::string reason = s.reason;
          for (auto& ch : reason) {
            if (ch == ',' || ch == '\n') ch = ';';
          }
          skipped << to_string(res.method) << ',' << rep.replicate << ','
                  << io::format_real(s.lambda) << ',' << reason << '\n';
        }
      }
    }
    const auto dir = detail::target_dir(c, t);
    io::write_text_file(dir / "summary.csv", sum.str());
    io::write_text_file(dir / "skipped.csv", skipped.str());
  }
  return summary;
}

}  // namespace ksgm
