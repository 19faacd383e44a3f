// llhomog <command> --config <path> [--out <dir>] [--eps <v>] [--J <n>] [--sigma <v>]

#include <iostream>

#include "CLI11.hpp"
#include "llhomog/config.hpp"
#include "llhomog/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-scale homogenization experiments for the 1D Landau-Lifshitz equation"};
  std::string command, config, out, eps;
  std::optional<int> J;
  std::optional<double> sigma;
  app.add_option("command", command, "cell | fine | hom | correct | compare | sweep | fig1")
      ->required()
      ->check(CLI::IsMember({"cell", "fine", "hom", "correct", "compare", "sweep", "fig1"}));
  app.add_option("--config", config, "configuration file")->required();
  app.add_option("--out", out, "output directory (overrides [output] dir)");
  app.add_option("--eps", eps, "eps value or comma-separated list, e.g. 1/70");
  app.add_option("--J", J, "corrector order 0, 1 or 2");
  app.add_option("--sigma", sigma, "time-scale exponent, T_eps = eps^sigma T");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  try {
    llh::SimConfig cfg = llh::parse_config(config);
    if (!out.empty()) cfg.out_dir = out;
    if (!eps.empty()) {
      cfg.eps.clear();
      std::stringstream ss(eps);
      std::string item;
      while (std::getline(ss, item, ',')) cfg.eps.push_back(llh::parse_real(item));
    }
    if (J) cfg.J = *J;
    if (sigma) cfg.sigma = *sigma;
    llh::validate(cfg);
    return llh::run_command(command, cfg);
  } catch (const llh::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const llh::ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const llh::ResolutionError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const llh::GridMismatchError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const llh::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
