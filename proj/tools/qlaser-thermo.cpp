// Copyright 2026 The qlaser-thermo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  namespace cli = qlt::cli;
  CLI::App app{"Quantum thermodynamics of a laser-driven qubit: scenario runner"};
  std::string scenario, config_path, out_dir = "out";
  std::vector<std::string> sets;
  app.add_option("scenario", scenario, "scenario name")->required();
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", sets, "override, key=value")->take_all();
  app.footer(cli::usage());
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cli::Config cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw cli::ConfigError("cannot open " + config_path);
      cfg = cli::parse_config(in, config_path);
    }
    for (const auto& kv : sets) cli::apply_override(cfg, kv);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return cli::run(scenario, cfg, out_dir, std::cerr);
}
