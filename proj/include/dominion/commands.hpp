#pragma once

#include "dominion/cone.hpp"
#include "dominion/config.hpp"
#include "dominion/integrate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dominion {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitCheckFailed = 2 };

using Report = nlohmann::ordered_json;

struct CommandResult {
  Report report;
  int exit_code = kExitOk;
  std::vector<std::string> summary;  // human-readable lines
};

struct CommandOptions {
  bool timestamp = true;
};

/// splitmix64; uniform doubles take the top 53 bits.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Worker count from DOMINION_THREADS, else the hardware count.
unsigned worker_count();

/// Slow (A0) and fast (D) polytopes the certificate is checked against, and
/// the full-A polytope with coupling blocks used by the eps search.
struct CertificationInputs {
  MatrixPolytope slow;
  MatrixPolytope fast;
  MatrixPolytope a_full;
  Matrix B;
  Matrix C;
  Report hull;  // provenance of the polytopes
};
CertificationInputs certification_inputs(const SystemConfig& cfg);

VectorField make_field(const SystemConfig& cfg);

CommandResult cmd_certify(const SystemConfig& cfg, const CommandOptions& opt = {});
CommandResult cmd_decouple(const SystemConfig& cfg, double eps, const CommandOptions& opt = {});
CommandResult cmd_epsilon_star(const SystemConfig& cfg, const CommandOptions& opt = {});
CommandResult cmd_simulate(const SystemConfig& cfg, double t_final, const std::filesystem::path& out_dir,
                           const CommandOptions& opt = {});

inline constexpr int kProbeSamples = 200;
inline constexpr double kProbeBoundaryAllowance = 0.01;
inline constexpr int kProbeMaxAttempts = 100000;

struct PairProbe {
  int interior = 0;
  int boundary = 0;
  int outside = 0;
  double worst_ratio = 0.0;  // max over samples of d^T P d / |d|^2
  double min_weighted_ratio = 0.0;  // p = 0 mode: min W(t_k)/W(t_{k-1}); 1 when never decreasing
  int weighted_increases = 0;       // p = 0 mode
};

/// Integrates both initial states and classifies their difference at
/// t_k = k t_final / samples, k = 1..samples. Throws InvalidArgument when the
/// initial difference is zero.
PairProbe probe_pair(const VectorField& field, const MatrixConeSpec& cone, const Vector& a, const Vector& b,
                     double t_final, double h, int samples = kProbeSamples, double lambda = 0.0);

CommandResult cmd_monotone_probe(const SystemConfig& cfg, int n_pairs, double t_final, std::uint64_t seed,
                                 const CommandOptions& opt = {});

struct ReproduceOverrides {
  std::optional<double> eps;
  std::optional<double> sigma_r;
};

CommandResult cmd_reproduce_paper(const std::filesystem::path& out_dir, const ReproduceOverrides& overrides,
                                  const CommandOptions& opt = {});

/// Writes the report with 2-space indentation and a trailing newline.
void write_report(const Report& report, const std::filesystem::path& path);

}  // namespace dominion
