#pragma once

#include <iosfwd>

#include "config.hpp"

namespace cbpcli {

// Each command validates the configuration, runs, writes its files under
// cfg.out_dir and prints a one-line JSON summary. Exceptions propagate to
// main, which maps them onto exit codes.
void cmd_malthusian(const ExperimentConfig& cfg, std::ostream& out);
void cmd_generate(const ExperimentConfig& cfg, std::ostream& out);
void cmd_couple(const ExperimentConfig& cfg, std::ostream& out);
void cmd_limit_sample(const ExperimentConfig& cfg, std::ostream& out);
void cmd_compare(const ExperimentConfig& cfg, std::ostream& out);
void cmd_pmf(const ExperimentConfig& cfg, std::ostream& out);
void cmd_diagnose(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace cbpcli
