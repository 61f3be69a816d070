#pragma once

#include <stdexcept>

namespace coexsim {

// The URLLC service contract: one transmission of a 32-byte packet delivered
// with the target reliability inside the one-way latency bound, in both link
// directions.
struct UrllcRequirement {
    int payloadBits = 256;
    double reliability = 0.99999;
    double latencyBound_ms = 1.0;

    double max_failure_probability() const { return 1.0 - reliability; }

    void validate() const {
        if (reliability <= 0.0 || reliability >= 1.0)
            throw std::invalid_argument("reliability out of (0,1)");
        if (latencyBound_ms <= 0.0) throw std::invalid_argument("latency bound must be > 0");
        if (payloadBits <= 0) throw std::invalid_argument("payload must be > 0 bits");
    }
};

struct UeDirectionEval {
    double pFail = 1.0;
    double latency_ms = 0.0;
    bool cellFeasible = false;
};

// Satisfaction predicate; both thresholds are inclusive. The reliability
// bound uses a relative epsilon so that a failure probability of exactly
// 1 - reliability passes despite the rounding of (1 - reliability).
inline bool satisfied(const UeDirectionEval& eval, const UrllcRequirement& req) {
    return eval.pFail <= req.max_failure_probability() * (1.0 + 1e-9) &&
           eval.latency_ms <= req.latencyBound_ms && eval.cellFeasible;
}

} // namespace coexsim
