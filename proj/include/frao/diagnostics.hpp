#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace frao {

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Accumulates non-fatal numerical events (arccos clamps, support
// violations, truncated-mass warnings). Operations that can clamp take an
// optional pointer; passing nullptr discards the events.
struct Diagnostics {
    int clamp_events = 0;
    double worst_clamp = 0.0;  // largest (argument - 1) seen before clamping
    int support_violations = 0;
    std::vector<std::string> warnings;

    void warn(std::string msg) { warnings.push_back(std::move(msg)); }

    // arccos argument above 1: clamp silently inside `quiet_band`, warn beyond.
    void record_clamp(double arg, double quiet_band = 1e-6) {
        double excess = arg - 1.0;
        if (excess > worst_clamp) worst_clamp = excess;
        ++clamp_events;
        if (excess > quiet_band)
            warn("arccos argument " + std::to_string(arg) + " clamped to 1");
    }

    void merge(const Diagnostics& o) {
        clamp_events += o.clamp_events;
        if (o.worst_clamp > worst_clamp) worst_clamp = o.worst_clamp;
        support_violations += o.support_violations;
        warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
    }
};

inline void record_clamp(Diagnostics* d, double arg, double quiet_band = 1e-6) {
    if (d) d->record_clamp(arg, quiet_band);
}

}  // namespace frao
