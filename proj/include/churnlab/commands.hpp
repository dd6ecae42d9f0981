#pragma once

#include <cstdint>
#include <string>

namespace churnlab {

inline constexpr const char* kToolVersion = "churnlab 0.1.0";

// Each command returns a process exit code: 0 on success, 1 when any checker
// reports a violation or any run fails. Argument errors throw.

struct LosscurveArgs {
  std::string loss;  // entropic | kl | reject | link | xex | xex_<variant>
  std::string out_dir = ".";
};
int cmd_losscurve(const LosscurveArgs& args);

struct BoundsArgs {
  long long samples = 100000;
  std::uint64_t seed = 7;
  std::string out_dir = ".";
};
int cmd_bounds(const BoundsArgs& args);

struct RunArgs {
  std::string config_path;
  std::string out_dir;  // overrides the config's "out" when nonempty
};
int cmd_churn(const RunArgs& args);
int cmd_retrieval(const RunArgs& args);

struct RejectmapArgs {
  std::string out_dir = ".";
  double d = 0.3;
};
int cmd_rejectmap(const RejectmapArgs& args);

}  // namespace churnlab
