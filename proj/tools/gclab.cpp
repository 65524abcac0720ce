#include "gclab/commands.hpp"
#include "gclab/error.hpp"
#include "gclab/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for interior estimates of the prescribed Gauss curvature equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;

  for (const std::string& name : gclab::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed, overrides the config");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(gclab::ExitCode::config_error);
  }

  gclab::CommandRequest request;
  request.command = app.get_subcommands().front()->get_name();
  request.out_dir = out_dir;
  request.seed = seed;
  try {
    request.config_text = gclab::read_text(config_path);
  } catch (const gclab::Error& e) {
    std::cerr << request.command << ": " << e.what() << "\n";
    return static_cast<int>(gclab::ExitCode::config_error);
  }
  return gclab::run_command(request, std::cerr);
}
