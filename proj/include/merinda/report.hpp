#pragma once

#include <cstdint>
#include <string>

#include "merinda/library.hpp"
#include "merinda/train.hpp"

namespace merinda {

/// Machine-readable record of one recovery run; serialized against
/// schema/report.json.
struct ExperimentReport {
    std::string system;
    std::string method;  // "sindy" | "merinda"
    std::uint64_t seed = 0;
    std::string config_json;  // snapshot sufficient to replay the run
    double reconstruction_mse = 0.0;
    double coefficient_mse = -1.0;
    double support_precision = -1.0;
    double support_recall = -1.0;
    double mse_epsilon = -1.0;  // -1 when no gate requested
    bool pass = true;
    double wall_time_seconds = 0.0;
    std::uint64_t peak_memory_bytes = 0;

    std::string to_json() const;
};

void write_report(const ExperimentReport& report, const std::string& path);

/// Support precision/recall of `recovered` against `truth` (nonzero
/// entries over the same library).
void support_metrics(const CoefficientMatrix& recovered, const CoefficientMatrix& truth,
                     double& precision, double& recall);

/// Current process peak RSS in bytes.
std::uint64_t peak_memory_bytes();

}  // namespace merinda
