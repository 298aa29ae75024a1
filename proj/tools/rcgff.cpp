// Command-line front end for the experiment lab.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rcgff/errors.hpp"
#include "rcgff/lab.hpp"

namespace {

struct FlagSpec {
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"law", "conductance law, e.g. const:1, exp:1, bernoulli:0.7, lines:exp:1"},
    {"box", "box side for gen/theta/figure1 (0 = default)"},
    {"d", "dimension (2..4)"},
    {"boundary", "free or torus"},
    {"seed", "master seed"},
    {"domain", "square or ball"},
    {"n-ladder", "comma-separated increasing scales"},
    {"eps", "minimal pair distance in the K grid"},
    {"delta", "minimal boundary distance in the K grid"},
    {"grid", "K grid spacing"},
    {"replicas", "Monte Carlo replicas or field samples"},
    {"tol", "relative residual tolerance of the linear solver"},
    {"t", "diffusive time for walk/sigma/qfclt"},
    {"q", "exponent of the nu norm in exit-bound"},
    {"ensemble", "environments per ladder point in exit-bound"},
    {"theta", "override the cluster density (0 = derive)"},
    {"sigma2", "override Sigma^2 = s I (0 = derive)"},
    {"threads", "worker threads (0 = hardware)"},
    {"out", "output directory"},
};

const std::map<std::string, std::string> kDescriptions{
    {"gen", "generate an environment and export it (RCGF, CSV, cluster)"},
    {"theta", "estimate the density of the largest cluster"},
    {"green", "solve one Green column at the domain centre"},
    {"sample", "draw DGFF samples on nD"},
    {"walk", "simulate a trajectory and compare mean exit times"},
    {"sigma", "estimate the effective diffusivity along the ladder"},
    {"lclt", "discrete vs continuum Green function on the K grid"},
    {"cov-scale", "empirical field covariances vs solved and limit kernels"},
    {"var-limit", "variance of the field functional vs its continuum limit"},
    {"ondiag2d", "log growth of the on-diagonal Green function in a disk"},
    {"exit-bound", "mean exit time over |nu|_q n^2 along the ladder"},
    {"max2d", "maximum of the 2D field and its centring (exploratory)"},
    {"qfclt", "diffusivity plus goodness of fit of rescaled endpoints"},
    {"figure1", "three DGFF heatmaps from one seed on a common scale"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random conductance Gaussian free field lab"};
  app.require_subcommand(1);
  std::map<std::string, std::string> values;
  std::string config_file;

  for (const auto& name : rcgff::lab::experiment_names()) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    for (const auto& f : kFlags)
      sub->add_option_function<std::string>(
          std::string("--") + f.key,
          [&values, key = std::string(f.key)](const std::string& v) {
            values[key] = v;
          },
          f.help);
    sub->add_option("--config", config_file,
                    "key=value file; its entries override flags");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    rcgff::lab::ExperimentConfig cfg;
    cfg.experiment = app.get_subcommands().front()->get_name();
    for (const auto& f : kFlags) {
      const auto it = values.find(f.key);
      if (it != values.end()) cfg.set(it->first, it->second);
    }
    if (!config_file.empty()) cfg.load_file(config_file);
    cfg.experiment = app.get_subcommands().front()->get_name();
    const auto files = rcgff::lab::run(cfg);
    for (const auto& f : files) std::cout << f << '\n';
    return 0;
  } catch (const rcgff::Error& e) {
    std::cerr << "rcgff: " << e.what() << '\n';
    return rcgff::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rcgff: " << e.what() << '\n';
    return 1;
  }
}
