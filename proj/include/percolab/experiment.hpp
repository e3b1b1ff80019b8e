#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "percolab/cheeger.hpp"
#include "percolab/flow_constant.hpp"
#include "percolab/geometry.hpp"

namespace percolab {

enum class ExperimentKind { Sample, Tau, Beta, Quantiles, Theta, Scan, Wulff, Cheeger, Regularity };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

// Inclusive validated p range for dimension d; ParameterError outside d = 2, 3.
std::pair<double, double> validated_p_range(int d);

// Fully resolved experiment. Every field has a value after resolution; the
// flat key=value form is produced by `render`.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Beta;
  int d = 2;
  std::vector<double> p_grid{0.7};
  std::vector<int> n_grid{8};
  std::vector<int> t_grid{4, 8};
  std::vector<Direction> directions;  // empty: default_directions(d)
  int replicas = 20;
  std::uint64_t seed = 1;
  int theta_radius = 0;  // 0: 64 in d = 2, 16 in d = 3
  std::string coupling = "monotone";
  CheegerMode cheeger_mode = CheegerMode::Heuristic;
  std::size_t cheeger_exact_cap = kDefaultExactCap;
  std::size_t cheeger_budget = 20000;
  double cheeger_t_start = 0.25;
  double cheeger_t_end = 0.05;
  int cheeger_conditioning_radius = 0;
  int prediction_n = 8;  // 0 disables the Wulff prediction column
  int prediction_replicas = 20;
  GeometryTolerances tolerances{};
  std::filesystem::path output = "results";

  int effective_theta_radius() const;
  std::vector<Direction> effective_directions() const;
};

// Schema entry: key, type name, one-line description.
struct SchemaKey {
  std::string key;
  std::string type;
  std::string description;
};
const std::vector<SchemaKey>& config_schema();

// Flat key=value text: one pair per line, '#' starts a comment, lists are
// comma-separated, direction lists separate vectors with ';'.
std::map<std::string, std::string> parse_key_values(std::string_view text);

// Applies `values` over the defaults. Collects unknown keys, unparseable
// values and failed range checks into one SchemaError. `kind` fixes the
// experiment when the text does not, and must agree with it when it does.
ExperimentConfig resolve_config(const std::map<std::string, std::string>& values,
                                std::optional<ExperimentKind> kind = std::nullopt);

// Throws CapabilityError for unsupported (d, kind) pairs.
void check_capability(const ExperimentConfig& config);

// Canonical text of every key that influences results (not `output`).
std::string render(const ExperimentConfig& config);

// Content-addressed store of finished output directories.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path root);
  // From the PERCOLAB_CACHE_DIR environment variable; nullopt when unset.
  static std::optional<ResultCache> from_environment();

  // SHA-256 of the rendered config and the version tag, as hex.
  static std::string key(const ExperimentConfig& config);

  const std::filesystem::path& root() const { return root_; }
  bool contains(const std::string& key) const;
  // Copies a cached entry's files into `dest`; false on a miss.
  bool restore(const std::string& key, const std::filesystem::path& dest) const;
  // Copies `files` into a staging directory, then renames it into place. A
  // concurrent publisher of the same key wins silently.
  void publish(const std::string& key, const std::vector<std::filesystem::path>& files) const;

 private:
  std::filesystem::path root_;
};

inline constexpr std::string_view kVersionTag = "percolab-1.0.0";

struct RunOutcome {
  bool cache_hit = false;
  std::vector<std::filesystem::path> files;  // written into config.output
};

// Runs the experiment, writing outputs and resolved.cfg into config.output.
RunOutcome run_experiment(const ExperimentConfig& config, const ResultCache* cache = nullptr);

enum class PlotKind { Decay, Slopes, Crystal };
std::optional<PlotKind> parse_plot_kind(std::string_view name);

// Reads results from `result_dir` and writes plot_<kind>.csv there.
//   decay:   p,t,frequency,log_frequency        (from scan.csv)
//   slopes:  quantity,n,p_lo,p_hi,p_mid,slope,ci_lo,ci_hi (from *slopes*.csv)
//   crystal: p,index,x,y  closed counterclockwise loops, d = 2 (crystals.ndjson)
// Throws LookupError when the input file is missing.
std::filesystem::path emit_plotdata(const std::filesystem::path& result_dir, PlotKind kind);

}  // namespace percolab
