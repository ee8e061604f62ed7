#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pimd_kubo/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Path-integral Kubo correlation laboratory"};
  std::string config_path;
  std::string output_dir;
  int verbose = 0;
  app.add_option("config", config_path, "run configuration file")->required();
  app.add_option("-o,--output-dir", output_dir, "override output_dir from the config");
  app.add_flag("-v,--verbose", verbose, "report progress on stderr");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << config_path << '\n';
    return pimd_kubo::kExitValidation;
  }
  std::ostringstream text;
  text << in.rdbuf();

  pimd_kubo::RunOptions options;
  if (!output_dir.empty()) options.output_dir = output_dir;
  options.verbosity = verbose;
  return pimd_kubo::run(text.str(), options, std::cerr);
}
