// Batch driver: run configuration, validation and subcommands.
#pragma once

#include "turing/continuation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace turing::cli {

struct ModelConfig {
  double lambda0{3.0};
  double d{60};
  double sigma{0};
};

struct DomainConfig {
  double l1{2};
  double l2{2};
  int nx{65};
  int ny{49};
  bool quasi1d{false};
};

struct ContConfig {
  double ds0{0.02};
  double dsmin{1e-5};
  double dsmax{0.1};
  double newton_tol{1e-8};
  int max_newton{10};
  int n_eigs{20};
  double bif_loc_tol{1e-4};
  double shift{1e-3};
  bool stability{true};
  bool locate_events{true};
};

struct DispConfig {
  double k_min{0};
  double k_max{2};
  int k_count{401};
};

struct LandauConfig {
  std::string sweep{"lambda"};  // lambda | sigma
  double from{2.4};
  double to{3.3};
  int count{91};
};

struct MaxwellConfig {
  std::vector<double> sigma_values{0.0};
};

struct GLFrontConfig {
  std::string kind{"hot"};  // hot | cold | mixed
  double lambda{0};         // 0: the Maxwell point of the kind
  double half_length{0};
  int nodes{4001};
  bool free_lambda{true};
};

struct StartConfig {
  std::string type{"homogeneous"};  // homogeneous | snapshot | ansatz | tint
  double lambda{3.3};
  int direction{-1};
  std::string snapshot;
  std::vector<double> amplitudes{0, 0, 0};
  std::string order{"full"};
  double A{0.3};
  double B{0.15};
  double L{12};
  double dt{0.1};
  int max_steps{20000};
  double residual_target{1e-3};
};

struct BranchConfig {
  std::string label{"branch"};
  std::string parent;  // empty: start point
  int event{-1};
  int direction{0};  // 0: the start direction for a root branch, +1 after a switch
  double perturbation{0.02};
  double lambda_min{0.5};
  double lambda_max{5};
  int max_points{200};
};

struct CmdContConfig {
  StartConfig start;
  std::vector<BranchConfig> branches{BranchConfig{}};
  int snapshot_every{0};
};

struct TintConfig {
  std::string initial{"guess"};  // guess | snapshot
  std::string snapshot;
  double A{0.3};
  double B{0.15};
  double L{12};
  double lambda_override{0};
  double dt{0.1};
  int max_steps{20000};
  double residual_target{1e-3};
  int snapshot_every{0};
  int trace_every{10};
  bool newton{true};
};

struct RunConfig {
  ModelConfig model;
  DomainConfig domain;
  ContConfig cont;
  DispConfig disp;
  LandauConfig landau;
  MaxwellConfig maxwell;
  GLFrontConfig glfront;
  CmdContConfig continuation;
  TintConfig tint;
  std::string output_dir{"out"};
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::filesystem::path& path);

/// Checks the parts of the configuration the command uses.
/// Throws std::invalid_argument with a readable message.
void validate(const RunConfig& c, const std::string& command);

ContSettings cont_settings(const RunConfig& c);
DomainSpec domain_spec(const RunConfig& c);

struct Options {
  std::string command;
  std::filesystem::path config;
  std::filesystem::path out;
  std::filesystem::path snapshot;  // render
  int threads{1};
  bool verbose{false};
};

/// Runs a subcommand; returns the process exit code
/// (0 success, 1 validation error, 2 numerical failure).
int run(const Options& opt, std::ostream& log);

}  // namespace turing::cli
