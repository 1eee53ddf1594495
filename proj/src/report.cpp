#include "merinda/report.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>
#include <sys/resource.h>

#include "merinda/errors.hpp"

namespace merinda {

std::string ExperimentReport::to_json() const {
    nlohmann::json j;
    j["system"] = system;
    j["method"] = method;
    j["seed"] = seed;
    j["config"] = config_json.empty() ? nlohmann::json::object()
                                      : nlohmann::json::parse(config_json);
    j["reconstruction_mse"] = reconstruction_mse;
    j["coefficient_mse"] = coefficient_mse;
    j["support_precision"] = support_precision;
    j["support_recall"] = support_recall;
    j["mse_epsilon"] = mse_epsilon;
    j["pass"] = pass;
    j["wall_time_seconds"] = wall_time_seconds;
    j["peak_memory_bytes"] = peak_memory_bytes;
    return j.dump(2);
}

void write_report(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << report.to_json() << "\n";
}

void support_metrics(const CoefficientMatrix& recovered, const CoefficientMatrix& truth,
                     double& precision, double& recall) {
    const auto rec = recovered.support();
    const auto tru = truth.support();
    std::size_t hits = 0;
    for (const auto& entry : rec)
        if (std::find(tru.begin(), tru.end(), entry) != tru.end()) ++hits;
    precision = rec.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rec.size());
    recall = tru.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(tru.size());
}

std::uint64_t peak_memory_bytes() {
    struct rusage usage {};
    getrusage(RUSAGE_SELF, &usage);
    // ru_maxrss is kilobytes on Linux
    return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024ULL;
}

}  // namespace merinda
