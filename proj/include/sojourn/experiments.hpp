#pragma once

#include <stdexcept>
#include <string>

#include "sojourn/experiment_config.hpp"
#include "sojourn/report.hpp"

namespace sojourn {

// Computational failure inside a named stage of an experiment.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what), stage_(std::move(stage)), kind_(kind) {}
  const std::string& stage() const { return stage_; }
  ErrorKind kind() const { return kind_; }

 private:
  std::string stage_;
  ErrorKind kind_;
};

// A small configuration for the named experiment (under a minute on one core).
ExperimentConfig default_config(const std::string& experiment);

// Validates, sets the worker count, runs, writes the artifacts into
// config.output_dir and returns the report (not yet emitted).
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace sojourn
