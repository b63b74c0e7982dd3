#pragma once

#include <cmath>
#include <string>

#include "feederopt/errors.hpp"

namespace feederopt {

// Split of a bus's homes into solar-only residences (whose generation is
// injected into the feeder) and battery-backed residences (whose storage the
// utility may dispatch). alpha is the solar-only fraction.
struct MixConfig {
    double alpha = 0.0;
    int n_nbbsr = 0; // solar-only homes
    int n_bbsr = 0;  // battery-backed homes

    static MixConfig from_counts(int n_nbbsr, int n_bbsr) {
        if (n_nbbsr < 0 || n_bbsr < 0)
            throw ConfigError("home counts must be non-negative");
        if (n_nbbsr + n_bbsr == 0)
            throw ConfigError("degenerate mix: no homes at the bus");
        return {static_cast<double>(n_nbbsr) / (n_nbbsr + n_bbsr), n_nbbsr, n_bbsr};
    }

    // Realize a target fraction over an integer number of homes. The stored
    // alpha is the rounded ratio, so the reported and applied fractions agree.
    // A bus with no homes yields the empty mix (no solar, no storage).
    static MixConfig for_bus(double alpha_target, int n_residences) {
        if (alpha_target < 0.0 || alpha_target > 1.0)
            throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha_target));
        if (n_residences < 0)
            throw ConfigError("n_residences must be non-negative");
        if (n_residences == 0)
            return {0.0, 0, 0};
        int n_nbbsr = static_cast<int>(std::lround(alpha_target * n_residences));
        n_nbbsr = std::min(std::max(n_nbbsr, 0), n_residences);
        return from_counts(n_nbbsr, n_residences - n_nbbsr);
    }

    int total_homes() const { return n_nbbsr + n_bbsr; }
};

inline double alpha_from_counts(int n_nbbsr, int n_bbsr) {
    return MixConfig::from_counts(n_nbbsr, n_bbsr).alpha;
}

} // namespace feederopt
