#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "farm/app/config.hpp"

namespace farm::app {

/// A stage threw; carries the stage name and the log to look at.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, std::filesystem::path log, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what + " (log: " + log.string() + ")"),
        stage_(std::move(stage)),
        log_(std::move(log)) {}
  const std::string& stage() const { return stage_; }
  const std::filesystem::path& log() const { return log_; }

 private:
  std::string stage_;
  std::filesystem::path log_;
};

struct StageOutcome {
  std::string stage;
  bool skipped = false;
  double seconds = 0.0;
  nlohmann::json summary;
};

/// Layout of a run directory.
struct RunLayout {
  std::filesystem::path root;
  std::filesystem::path data;

  std::filesystem::path checkpoint(const std::string& stage) const { return root / "checkpoints" / stage; }
  std::filesystem::path predictions(const std::string& label) const { return root / "predictions" / label; }
  std::filesystem::path metrics(const std::string& label) const { return root / "metrics" / (label + ".json"); }
  std::filesystem::path stamp(const std::string& stage) const { return root / "stamps" / (stage + ".json"); }
  std::filesystem::path log(const std::string& stage) const { return root / "logs" / (stage + ".ndjson"); }
  std::filesystem::path report() const { return root / "report"; }
};

RunLayout run_layout(const RunConfig& config, const std::filesystem::path& out_dir);

/// Runs the configured stages in order. A stage whose stamp records the same input
/// hash is skipped unless force is set.
std::vector<StageOutcome> run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir, bool force,
                                       std::ostream& progress);

}  // namespace farm::app
