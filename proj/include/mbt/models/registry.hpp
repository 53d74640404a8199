#pragma once

// Name-based access to the example systems for the CLI and the acceptance
// suite: explore a model at given bounds, build the matching emulator.

#include "mbt/explorer.hpp"
#include "mbt/graph_io.hpp"
#include "mbt/models/kv.hpp"
#include "mbt/models/vr_model.hpp"
#include "mbt/models/vr_replica.hpp"

#include <string>
#include <vector>

namespace mbt::models {

inline const std::vector<std::string>& names()
{
    static const std::vector<std::string> n{"kv", "vr"};
    return n;
}

inline void require_known(const std::string& model)
{
    if (model != "kv" && model != "vr") fail(ErrorCode::Usage, "unknown model '" + model + "' (expected kv or vr)");
}

/// Fills in defaults so that the bounds recorded in files are complete.
inline Bounds normalize_bounds(const std::string& model, const Bounds& b)
{
    require_known(model);
    return model == "kv" ? kv::KvBounds::from(b).to_bounds() : vr::VrBounds::from(b).to_bounds();
}

struct Exploration {
    ExploreResult result;
    LabeledGraph graph;
    ProgressReport progress; // VR only; empty for kv
};

inline Exploration explore(const std::string& model, const Bounds& bounds, const ExploreOptions& options = {})
{
    Exploration x;
    Bounds full = normalize_bounds(model, bounds);
    if (model == "kv") {
        x.result = mbt::explore(kv::KvModel(kv::KvBounds::from(full)), options);
    } else {
        vr::VrModel m(vr::VrBounds::from(full));
        x.result = mbt::explore(m, options);
        if (x.result.ok())
            x.progress = check_quiescent_progress(
                x.result.graph, [&](const SystemState& s) { return m.exhausted(s); },
                [&](const SystemState& s) { return m.progress_complaint(s); });
    }
    x.graph = to_labeled(x.result.graph, model, full);
    return x;
}

inline EmulatorConfig emulator_config(const std::string& model, const Bounds& bounds,
                                      vr::Mutation mutation = vr::Mutation::None)
{
    Bounds full = normalize_bounds(model, bounds);
    if (model == "kv") {
        if (mutation != vr::Mutation::None) fail(ErrorCode::Usage, "mutations exist only for vr");
        return kv::emulator_config(kv::KvBounds::from(full).actors);
    }
    return vr::emulator_config(vr::VrBounds::from(full).replicas, mutation);
}

} // namespace mbt::models
