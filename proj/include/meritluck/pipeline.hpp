#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "meritluck/config.hpp"

namespace meritluck {

// One study arm: an environment crossed with the information toggle.
struct ArmSpec {
    std::string name;
    LuckKind env_kind = LuckKind::Outcomes;
    Timing timing = Timing::ExAnte;
    bool informed = false;

    LuckEnvironment environment(const RunConfig& config) const;
    SpectatorMixture mixture(const RunConfig& config) const;
    std::uint64_t seed(const RunConfig& config) const;
};

// The six default arms: outcomes, opportunities and ex-post opportunities,
// each with an informed variant.
std::vector<ArmSpec> default_arms();
ArmSpec arm_by_name(const std::string& name);

// Commands throw Error subclasses on failure; partially written outputs are
// removed before the exception propagates.
void cmd_pi_curve(const RunConfig& config);
void cmd_design(const RunConfig& config);
void cmd_run_study(const RunConfig& config);
void cmd_analyze(const RunConfig& config);
void cmd_reproduce(const RunConfig& config);
void cmd_validate(const RunConfig& config);

}  // namespace meritluck
