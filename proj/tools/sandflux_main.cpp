#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sandflux/config.hpp"
#include "sandflux/pipeline.hpp"

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sandflux::Error("cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal transport by sandpile evolution on a staggered grid"};
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "Solve the problem described by a config file");
  std::string config_path;
  std::string out_dir;
  std::optional<int> resolution;
  std::optional<long long> max_steps;
  bool accurate = false;
  std::string preset;
  solve->add_option("config", config_path, "Config file (optional with --preset)");
  solve->add_option("--out", out_dir, "Output directory");
  solve->add_option("--resolution", resolution, "Cells on the short axis of the domain");
  solve->add_option("--max-steps", max_steps, "Time step limit");
  solve->add_flag("--accurate-potential", accurate, "Tighter inner solves per time level");
  solve->add_option("--preset", preset, "Base preset: example1, example2, example3, accurate-potential");

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_path.empty() && preset.empty()) {
      throw sandflux::Error("a config path or --preset is required");
    }
    const std::string text = config_path.empty() ? std::string() : read_text(config_path);
    sandflux::RunConfig config =
        sandflux::parse_config(text, preset.empty() ? std::nullopt : std::optional(preset));
    if (accurate) sandflux::apply_config_text(config, sandflux::preset_text("accurate-potential"));
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (resolution) config.resolution = *resolution;
    if (max_steps) config.solver.max_steps = *max_steps;
    config.validate();

    std::filesystem::path base_dir;
    if (!config_path.empty()) base_dir = std::filesystem::path(config_path).parent_path();
    return sandflux::run(config, base_dir, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
