#ifdef _OPENMP
#include <omp.h>
#endif

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "percolab/errors.hpp"
#include "percolab/experiment.hpp"

using namespace percolab;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out;
  std::vector<std::string> overrides;
  bool no_cache = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_kind(ExperimentKind kind, const RunFlags& flags) {
  auto values = flags.config.empty() ? std::map<std::string, std::string>{} : parse_key_values(read_file(flags.config));
  std::string override_text;
  for (const auto& o : flags.overrides) override_text += o + "\n";
  for (const auto& [k, v] : parse_key_values(override_text)) values[k] = v;
  if (flags.seed) values["seed"] = std::to_string(*flags.seed);
  if (!flags.out.empty()) values["output"] = flags.out;
  const auto config = resolve_config(values, kind);
#ifdef _OPENMP
  if (flags.jobs > 0) omp_set_num_threads(flags.jobs);
#endif
  std::optional<ResultCache> cache;
  if (!flags.no_cache) cache = ResultCache::from_environment();
  const auto outcome = run_experiment(config, cache ? &*cache : nullptr);
  for (const auto& f : outcome.files) std::cout << f.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Percolation laboratory: cutsets, flow constants, Wulff crystals, Cheeger profiles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersionTag));

  RunFlags flags;
  ExperimentKind selected = ExperimentKind::Beta;
  const std::pair<const char*, const char*> commands[] = {
      {"sample", "sample configurations as NDJSON"},
      {"tau", "minimal open cutsets of cylinders"},
      {"beta", "flow-constant estimates and coupled slopes"},
      {"quantiles", "quantiles of minimal-cutset cardinality"},
      {"theta", "finite-volume theta estimates"},
      {"scan", "atypical-event frequencies against box scale"},
      {"wulff", "norm table and scaled Wulff crystals"},
      {"cheeger", "anchored isoperimetric profiles"},
      {"regularity", "Lipschitz slope reports"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "flat key=value experiment file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed (overrides the config)");
    sub->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--override", flags.overrides, "key=value, repeatable");
    sub->add_flag("--no-cache", flags.no_cache, "ignore PERCOLAB_CACHE_DIR");
    const auto kind = *parse_kind(name);
    sub->callback([&selected, kind] { selected = kind; });
  }
  std::string plot_dir, plot_kind;
  auto* plot = app.add_subcommand("plotdata", "plot-ready CSV from a result directory");
  plot->add_option("--out", plot_dir, "result directory")->required();
  plot->add_option("--kind", plot_kind, "decay | slopes | crystal")->required();
  auto* schema = app.add_subcommand("schema", "print the experiment config schema");

  CLI11_PARSE(app, argc, argv);
  try {
    if (schema->parsed()) {
      for (const auto& k : config_schema()) std::cout << k.key << '\t' << k.type << '\t' << k.description << '\n';
      return 0;
    }
    if (plot->parsed()) {
      const auto kind = parse_plot_kind(plot_kind);
      if (!kind) throw SchemaError("unknown plot kind '" + plot_kind + "'", {"kind"});
      std::cout << emit_plotdata(plot_dir, *kind).string() << '\n';
      return 0;
    }
    return run_kind(selected, flags);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 2;
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return 3;
  } catch (const LookupError& e) {
    std::cerr << "lookup error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
