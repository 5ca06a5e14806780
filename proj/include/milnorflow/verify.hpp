#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milnorflow/dynamics.hpp"
#include "milnorflow/milnor_bundle.hpp"

namespace milnorflow {

/** @brief One invariant check: measured value against its tolerance. */
struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    /** @brief Suites to run; empty means all. */
    std::vector<std::string> only;
    TransitionFault fault = TransitionFault::None;
    std::uint64_t seed = 20240601;
    IntegratorConfig integrator;
};

/** @brief geom, curve, sullivan, bundle, multicentre, dynamics. */
const std::vector<std::string>& suite_names();

/** @brief Runs the selected suites; failures are collected, never thrown. */
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

/** @brief Sample of frame points: random x, y orthogonal to x, fiber angle in [0, 2 pi). */
std::vector<FramePoint> random_frames(std::size_t n, std::uint64_t seed);

/** @brief Sample of S^7 points with u5 and |z1(theta)|^2 on the given levels. */
std::vector<Vec8> stratified_s7(const std::vector<double>& u5_levels, const std::vector<double>& z1sq_levels,
                                std::size_t per_level, std::uint64_t seed);

}  // namespace milnorflow
