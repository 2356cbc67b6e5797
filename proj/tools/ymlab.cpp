#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ym/io.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for spherically symmetric Yang-Mills "
               "blowup in d+1 dimensions"};
  app.require_subcommand(1);

  struct SubArgs {
    std::string config_file;
    std::string out_dir;
    std::vector<std::string> sets;
  };
  const std::pair<const char*, const char*> cmds[] = {
      {"evolve", "run one evolution and classify its outcome"},
      {"bisect", "bisect the critical amplitude"},
      {"sweep-subcritical", "fit the subcritical peak-density scaling law"},
      {"departure-scaling", "fit the attractor-departure scaling law"},
      {"fit-lambda", "fit the blowup rate exponent of one run"},
      {"shoot", "solve for self-similar profiles"},
      {"cone-energy", "evaluate the light-cone energy limit of one run"},
  };
  std::map<std::string, SubArgs> args;
  for (const auto& [name, desc] : cmds) {
    CLI::App* sub = app.add_subcommand(name, desc);
    SubArgs& a = args[name];
    sub->add_option("-c,--config", a.config_file,
                    "manifest file (key = value lines, # comments)");
    sub->add_option("-o,--out", a.out_dir, "output directory");
    sub->add_option("-s,--set", a.sets,
                    "override one manifest key, e.g. --set A=0.2");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const SubArgs& a = args[name];
  try {
    ym::RunManifest m = a.config_file.empty()
                            ? ym::RunManifest{}
                            : ym::parse_manifest(slurp(a.config_file));
    m.command = ym::command_from_string(name);
    for (const std::string& kv : a.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("--set expects key=value, got '" + kv + "'");
      ym::apply_setting(m, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!a.out_dir.empty()) m.output_dir = a.out_dir;
    m.config.validate();
    return ym::run_manifest(m);
  } catch (const std::exception& e) {
    std::cerr << "ymlab: " << e.what() << "\n";
    return 1;
  }
}
