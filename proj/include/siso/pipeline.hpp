#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "siso/evaluation.hpp"
#include "siso/fusion.hpp"
#include "siso/io.hpp"
#include "siso/propagation.hpp"
#include "siso/tracking.hpp"
#include "siso/types.hpp"

namespace siso {

/// Every tunable of a run. Defaults are the full configuration.
struct RunConfig {
    FusionParams fusion;
    PropagationParams propagation;
    TrackingParams tracking;
    bool enable_sequential_fusion = true;   ///< off: random-order merge
    bool enable_recurrent_propagation = true;
    bool enable_identity_propagation = true;
    bool enable_reid = true;
    std::uint64_t seed = 0;  ///< drives the random-order merge only
    int jobs = 0;            ///< worker threads, <= 0 means one per CPU

    void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json to_json(const RunConfig& c);

struct PipelineResult {
    std::vector<FrameFusion> fusion;
    PropagationReport propagation;
    TrackingResult tracking;
    LabeledVideo labels;
    RunReport report;
};

/// Fuser used for a config: sequential, or random order seeded per frame.
Fuser make_fuser(const RunConfig& c);

PipelineResult run_pipeline(std::span<const FrameBundle> video, const RunConfig& c);

}  // namespace siso
