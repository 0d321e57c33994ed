#pragma once

#include "wulfflab/errors.hpp"
#include "wulfflab/gridfun.hpp"

namespace wulfflab {

enum class ProjectionMode { exact, gauge_rescale };

struct SolverConfig {
    double tol = 1e-6;
    double inner_tol = 1e-6;
    int max_outer = 60;
    int max_inner = 4000;
    uint64_t seed = 1;
    int threads = 1;
    ProjectionMode projection_mode = ProjectionMode::exact;
    /// Smoothing passes of the discrete gradient used for perimeters and TV.
    int passes = kDefaultSmoothingPasses;
    /// Seed pairs for the coupled (second Cheeger) search.
    int seeds = 8;

    void validate() const {
        if (tol <= 0.0 || inner_tol <= 0.0) throw ConfigError("tolerances must be positive");
        if (max_outer < 1 || max_inner < 1) throw ConfigError("iteration caps must be >= 1");
        if (passes < 0) throw ConfigError("passes must be >= 0");
        if (seeds < 1) throw ConfigError("seeds must be >= 1");
    }
};

}  // namespace wulfflab
