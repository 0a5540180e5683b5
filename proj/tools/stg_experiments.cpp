#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stg/experiments.hpp"

namespace {

struct LevelRange {
  int lo = 0;
  int hi = 0;
};

LevelRange parse_levels(const std::string& text) {
  LevelRange r;
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(text);
    } else {
      r.lo = std::stoi(text.substr(0, dots));
      r.hi = std::stoi(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("--levels", "expected a..b, got " + text);
  }
  if (r.hi < r.lo) throw CLI::ValidationError("--levels", "empty range " + text);
  return r;
}

void parse_compression(const std::string& text, stg::OdeConfig& config) {
  if (text == "dense") {
    config.compress = false;
    return;
  }
  config.compress = true;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--compress", "expected key=value in " + item);
    const std::string key = item.substr(0, eq);
    const double value = std::stod(item.substr(eq + 1));
    if (key == "a")
      config.a = value;
    else if (key == "delta")
      config.delta = value;
    else
      throw CLI::ValidationError("--compress", "unknown key " + key);
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) out.push_back(std::stod(item));
  return out;
}

template <class Write>
void emit(const std::string& path, Write write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write(out);
  std::cerr << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time Galerkin experiments for the heat equation"};
  app.require_subcommand(1);

  stg::OdeConfig ode;
  std::string ode_levels = "4..10", ode_compress = "a=1.25", ode_out;
  auto* ode_cmd = app.add_subcommand("ode1d", "u' + mu u = f on (0,2), errors and rates per level");
  ode_cmd->add_option("--moments", ode.moments, "vanishing moments of the wavelets")
      ->check(CLI::IsMember({2, 4}));
  ode_cmd->add_option("--levels", ode_levels, "level range a..b");
  ode_cmd->add_option("--mu", ode.mu, "reaction coefficient");
  ode_cmd->add_option("--compress", ode_compress,
                      "a=F,delta=F (stiffness pattern, defaults a=1.25 and the midpoint delta) or dense");
  ode_cmd->add_option("--hhalf-terms", ode.hhalf_terms, "modes of the spectral H^1/2 error");
  ode_cmd->add_option("--out", ode_out, "CSV file, default standard output");

  stg::CondConfig cond;
  std::string cond_levels = "3..12", cond_mus = "1,10,100", cond_out;
  auto* cond_cmd = app.add_subcommand("cond", "condition numbers of the diagonally scaled A_t + mu M_t");
  cond_cmd->add_option("--mus", cond_mus, "comma separated values of mu");
  cond_cmd->add_option("--levels", cond_levels, "level range a..b, dof = 2^level");
  cond_cmd->add_option("--coarsest", cond.coarsest, "coarsest level, 0 for the minimal one");
  cond_cmd->add_option("--out", cond_out, "CSV file, default standard output");

  stg::HeatConfig heat;
  std::string heat_levels = "4..7", heat_mode = "full", heat_out, heat_history;
  double bpx_scale = 0.0;
  auto* heat_cmd = app.add_subcommand("heat2d", "heat equation on the unit square, full or sparse tensor space");
  heat_cmd->add_option("--mode", heat_mode, "full or sparse")->check(CLI::IsMember({"full", "sparse"}));
  heat_cmd->add_option("--levels", heat_levels, "level range a..b");
  heat_cmd->add_option("--tol", heat.tol, "relative residual of GMRES");
  heat_cmd->add_option("--max-iterations", heat.max_iterations, "GMRES iteration cap");
  heat_cmd->add_option("--bpx-scale", bpx_scale, "weight c of A_t + c 4^l M_t in the preconditioner");
  heat_cmd->add_option("--out", heat_out, "CSV file, default standard output");
  heat_cmd->add_option("--history", heat_history, "CSV file for the residual histories");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ode_cmd) {
      const auto r = parse_levels(ode_levels);
      ode.level_min = r.lo;
      ode.level_max = r.hi;
      if (r.hi > 13) throw CLI::ValidationError("--levels", "ode1d supports levels up to 13");
      parse_compression(ode_compress, ode);
      const auto rows = stg::run_ode1d(ode);
      emit(ode_out, [&](std::ostream& out) { stg::write_csv(out, ode, rows); });
    } else if (*cond_cmd) {
      const auto r = parse_levels(cond_levels);
      cond.level_min = r.lo;
      cond.level_max = r.hi;
      cond.mus = parse_list(cond_mus);
      const auto rows = stg::run_cond(cond);
      emit(cond_out, [&](std::ostream& out) { stg::write_csv(out, cond, rows); });
    } else if (*heat_cmd) {
      const auto r = parse_levels(heat_levels);
      heat.level_min = r.lo;
      heat.level_max = r.hi;
      if (r.hi > 10) throw CLI::ValidationError("--levels", "heat2d supports levels up to 10");
      heat.mode = heat_mode == "full" ? stg::TensorMode::Full : stg::TensorMode::Sparse;
      if (bpx_scale > 0.0) heat.bpx_scale = bpx_scale;
      const auto rows = stg::run_heat2d(heat);
      emit(heat_out, [&](std::ostream& out) { stg::write_csv(out, heat, rows); });
      if (!heat_history.empty())
        emit(heat_history, [&](std::ostream& out) { stg::write_history_csv(out, rows); });
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
