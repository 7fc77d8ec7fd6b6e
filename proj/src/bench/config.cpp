#include "rmes/bench/config.hpp"

#include "rmes/bench/external_objective.hpp"
#include "rmes/bench/grid_dataset.hpp"
#include "rmes/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

namespace rmes::bench {
namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "objective",         "lower",           "upper",          "acquisitions",      "sigma_n",
    "iterations",        "repetitions",     "init_points",    "max_value_count",   "nu_samples",
    "seed",              "output",          "gp_seed",        "gp_lengthscale",    "gp_signal_variance",
    "gp_dim",            "dataset",         "command",        "true_max",          "maximizer",
    "hyperparameters",   "lengthscales",    "signal_variance", "mle_starts",       "restarts",
    "optimizer_steps",   "scan_points",     "rerank_nu_samples", "rerank_candidates", "feature_count",
    "sampler_restarts",  "sampler_steps",   "ucb_beta",       "threads",           "record_wall_time",
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.push_back(trim(std::string_view(value).substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

class Reader {
 public:
  Reader(const ConfigMap& entries, std::string source) : entries_(entries), source_(std::move(source)) {}

  [[nodiscard]] bool has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

  [[nodiscard]] const ConfigEntry& entry(std::string_view key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(source_, 0, "missing required key '" + std::string(key) + "'");
    return it->second;
  }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    throw ParseError(source_, entry(key).line, std::string(key) + ": " + message);
  }

  [[nodiscard]] std::string text(std::string_view key) const {
    const std::string v = entry(key).value;
    if (v.empty()) fail(key, "value is empty");
    return v;
  }

  [[nodiscard]] double real(std::string_view key) const { return to_real(key, text(key)); }

  template <class Int>
  [[nodiscard]] Int integer(std::string_view key) const {
    const std::string v = text(key);
    Int out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
    return out;
  }

  [[nodiscard]] bool boolean(std::string_view key) const {
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  [[nodiscard]] Eigen::VectorXd vector(std::string_view key) const {
    const std::vector<std::string> items = split_list(text(key));
    Eigen::VectorXd out(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) out[static_cast<Eigen::Index>(i)] = to_real(key, items[i]);
    return out;
  }

  [[nodiscard]] const std::string& source() const noexcept { return source_; }

 private:
  [[nodiscard]] double to_real(std::string_view key, const std::string& v) const {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      fail(key, "expected a finite number, got '" + v + "'");
    }
    return out;
  }

  const ConfigMap& entries_;
  std::string source_;
};

std::optional<Domain> read_domain(const Reader& r) {
  if (!r.has("lower") && !r.has("upper")) return std::nullopt;
  if (!r.has("lower")) r.fail("upper", "'lower' must be given together with 'upper'");
  if (!r.has("upper")) r.fail("lower", "'upper' must be given together with 'lower'");
  Domain domain(r.vector("lower"), r.vector("upper"));
  try {
    domain.validate();
  } catch (const InputError& e) {
    r.fail("upper", e.what());
  }
  return domain;
}

}  // namespace

ConfigMap parse_key_values(std::istream& in, const std::string& source) {
  ConfigMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string content = trim(std::string_view(line).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "missing key before '='");
    if (out.find(key) != out.end()) {
      throw ParseError(source, line_no, "key '" + key + "' repeats line " + std::to_string(out[key].line));
    }
    out.emplace(key, ConfigEntry{value, line_no});
  }
  return out;
}

std::shared_ptr<const ObjectiveSpec> make_objective(const ConfigMap& entries, const std::string& source,
                                                    const std::string& base_dir) {
  const Reader r(entries, source);
  const std::string name = r.text("objective");
  const std::optional<Domain> domain = read_domain(r);
  if (domain && domain->dim() != 2 && (name == "branin" || name == "eggholder" || name == "michalewicz2")) {
    r.fail("lower", name + " is two-dimensional");
  }

  if (name == "branin") return std::make_shared<const ObjectiveSpec>(make_branin(domain));
  if (name == "eggholder") return std::make_shared<const ObjectiveSpec>(make_eggholder(domain));
  if (name == "michalewicz2") return std::make_shared<const ObjectiveSpec>(make_michalewicz2(domain));
  if (name == "gp_sample") {
    const auto seed = r.has("gp_seed") ? r.integer<std::uint64_t>("gp_seed") : std::uint64_t{1};
    const double ell = r.has("gp_lengthscale") ? r.real("gp_lengthscale") : 0.33;
    const double var = r.has("gp_signal_variance") ? r.real("gp_signal_variance") : 1.0;
    const int dim = r.has("gp_dim") ? r.integer<int>("gp_dim") : (domain ? domain->dim() : 2);
    if (dim < 1) r.fail("gp_dim", "must be at least 1");
    if (!(ell > 0.0) || !(var > 0.0)) r.fail("objective", "gp_sample needs positive gp_lengthscale and gp_signal_variance");
    return std::make_shared<const ObjectiveSpec>(make_gp_sample(seed, ell, var, dim, domain));
  }
  if (name == "dataset" || name == "dataset_mean") {
    if (domain) r.fail("lower", "dataset objectives take their domain from the grid file");
    std::filesystem::path path = r.text("dataset");
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    return std::make_shared<const ObjectiveSpec>(load_dataset_objective(path.string()));
  }
  if (name == "external") {
    if (!domain) r.fail("objective", "external objectives need 'lower' and 'upper'");
    std::optional<GroundTruth> truth;
    if (r.has("true_max") || r.has("maximizer")) {
      GroundTruth t;
      t.max_value = r.real("true_max");
      t.maximizer = r.vector("maximizer");
      if (t.maximizer.size() != domain->dim()) r.fail("maximizer", "dimension does not match the domain");
      truth = std::move(t);
    }
    return std::make_shared<const ObjectiveSpec>(make_external(r.text("command"), *domain, std::move(truth)));
  }
  r.fail("objective", "unknown objective '" + name + "'");
}

RunConfig parse_run_config(std::istream& in, const std::string& source, const std::string& base_dir) {
  const ConfigMap entries = parse_key_values(in, source);
  for (const auto& [key, entry] : entries) {
    if (kKnownKeys.find(key) == kKnownKeys.end()) throw ParseError(source, entry.line, "unknown key '" + key + "'");
  }
  const Reader r(entries, source);

  RunConfig run;
  BenchmarkConfig& b = run.bench;
  if (r.has("acquisitions")) {
    b.acquisitions.clear();
    for (const std::string& name : split_list(r.text("acquisitions"))) {
      AcquisitionKind kind{};
      try {
        kind = parse_acquisition_kind(name);
      } catch (const InputError&) {
        r.fail("acquisitions", "unknown acquisition '" + name + "'");
      }
      if (std::find(b.acquisitions.begin(), b.acquisitions.end(), kind) != b.acquisitions.end()) {
        r.fail("acquisitions", "'" + name + "' is listed twice");
      }
      b.acquisitions.push_back(kind);
    }
  }
  if (r.has("sigma_n")) {
    b.sigma_n = r.real("sigma_n");
    if (b.sigma_n < 0.0) r.fail("sigma_n", "must be nonnegative");
  }
  auto positive = [&](std::string_view key, int& field, int minimum) {
    if (!r.has(key)) return;
    field = r.integer<int>(key);
    if (field < minimum) r.fail(key, "must be at least " + std::to_string(minimum));
  };
  positive("iterations", b.iterations, 0);
  positive("repetitions", b.repetitions, 1);
  positive("init_points", b.init_points, 1);
  positive("max_value_count", b.max_value_count, 1);
  positive("nu_samples", b.optimizer.nu_samples, 1);
  positive("rerank_nu_samples", b.optimizer.rerank_nu_samples, 1);
  positive("rerank_candidates", b.optimizer.rerank_candidates, 1);
  positive("restarts", b.optimizer.restarts, 1);
  positive("optimizer_steps", b.optimizer.steps, 0);
  positive("scan_points", b.optimizer.scan_points, 1);
  positive("feature_count", b.sampler.feature_count, 1);
  positive("sampler_restarts", b.sampler.restarts, 1);
  positive("sampler_steps", b.sampler.steps, 0);
  positive("mle_starts", b.mle_starts, 1);
  positive("threads", b.threads, 1);
  if (r.has("seed")) b.seed = r.integer<std::uint64_t>("seed");
  if (r.has("ucb_beta")) {
    b.ucb_beta = r.real("ucb_beta");
    if (b.ucb_beta < 0.0) r.fail("ucb_beta", "must be nonnegative");
  }
  if (r.has("record_wall_time")) b.record_wall_time = r.boolean("record_wall_time");
  if (r.has("output")) run.output = r.text("output");

  if (r.has("hyperparameters")) {
    const std::string policy = r.text("hyperparameters");
    if (policy == "mle") {
      b.hyper_policy = HyperPolicy::mle_every_iteration;
    } else if (policy == "fixed") {
      b.hyper_policy = HyperPolicy::fixed;
    } else {
      r.fail("hyperparameters", "expected mle or fixed, got '" + policy + "'");
    }
  }
  if (r.has("lengthscales") || r.has("signal_variance")) {
    KernelHyperparams h;
    h.lengthscales = r.vector("lengthscales");
    h.signal_variance = r.real("signal_variance");
    if ((h.lengthscales.array() <= 0.0).any()) r.fail("lengthscales", "must be positive");
    if (!(h.signal_variance > 0.0)) r.fail("signal_variance", "must be positive");
    b.fixed_hyperparams = h;
  }
  if (b.hyper_policy == HyperPolicy::fixed && !b.fixed_hyperparams) {
    r.fail("hyperparameters", "fixed hyperparameters need 'lengthscales' and 'signal_variance'");
  }

  b.objective = make_objective(entries, source, base_dir);
  if (b.fixed_hyperparams && b.fixed_hyperparams->lengthscales.size() != b.objective->domain().dim()) {
    r.fail("lengthscales", "dimension does not match the objective domain");
  }
  b.validate();
  return run;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return parse_run_config(in, path, parent.empty() ? "." : parent.string());
}

std::shared_ptr<const ObjectiveSpec> objective_by_name(std::string_view name) {
  ConfigMap entries;
  entries.emplace("objective", ConfigEntry{std::string(name), 1});
  return make_objective(entries, "<command line>");
}

}  // namespace rmes::bench
