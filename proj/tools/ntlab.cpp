#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ntlab/config.hpp"
#include "ntlab/error.hpp"
#include "ntlab/experiments.hpp"
#include "ntlab/table.hpp"

namespace {

using Runner = std::function<ntlab::ExperimentOutput(const ntlab::ExperimentConfig&)>;

const std::map<std::string, std::pair<std::string, Runner>>& runners() {
  static const std::map<std::string, std::pair<std::string, Runner>> table{
      {"epsilon-family",
       {"Concentrating family: norms, nodal length, exact W1 and uncertainty products",
        [](const ntlab::ExperimentConfig& c) { return ntlab::render(ntlab::run_epsilon_family(c)); }}},
      {"uncertainty",
       {"Uncertainty product over random cosine fields and fixed examples",
        [](const ntlab::ExperimentConfig& c) { return ntlab::render(ntlab::run_uncertainty_suite(c)); }}},
      {"staircase",
       {"Signed staircase plan costs against (2n)^(1-p)",
        [](const ntlab::ExperimentConfig& c) { return ntlab::render(ntlab::run_staircase(c)); }}},
      {"sturm-scaling",
       {"Exact W1 and kernel plan cost for random eigenfunction sums on the torus",
        [](const ntlab::ExperimentConfig& c) { return ntlab::render(ntlab::run_sturm_scaling(c)); }}},
      {"decompose",
       {"Stopping-cube decomposition with the verified inequality chain",
        [](const ntlab::ExperimentConfig& c) { return ntlab::render(ntlab::run_decomposition_demo(c)); }}},
  };
  return table;
}

int run(const std::string& name, const std::string& config_path, const std::string& out_dir) {
  const ntlab::KeyValueConfig kv = ntlab::KeyValueConfig::load(config_path);
  const ntlab::ExperimentConfig cfg = ntlab::experiment_config(kv, name);
  const auto start = std::chrono::steady_clock::now();
  const ntlab::ExperimentOutput output = runners().at(name).second(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ntlab::write_experiment(out_dir, name, kv, cfg, output, wall);
  std::cout << output.summary_json << '\n';
  std::cerr << name << ": wrote " << output.files.size() + 1 << " files to " << out_dir << " in " << wall << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal sets and signed transport experiments"};
  app.set_version_flag("--version", std::string(ntlab::library_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  for (const auto& [name, entry] : runners()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("config", config_path, "key=value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
  }

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run(name, config_path, out_dir);
  } catch (const ntlab::Error& e) {
    std::cerr << "ntlab " << name << ": " << e.what() << '\n';
    return e.code() == ntlab::ErrorCode::ConfigError || e.code() == ntlab::ErrorCode::IoError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "ntlab " << name << ": " << e.what() << '\n';
    return 1;
  }
}
