#pragma once

// Monte Carlo harness: exact-formula checks, variance identities, exponent
// regressions, stationarity tests, CLT and tail checks. Results reproduce
// bit-identically from (config, seed) regardless of worker count: replica r
// always owns RNG streams derived from r, and reductions run in replica
// order.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "polymer/models.hpp"

namespace polymer::experiments {

enum class DirectionMode { Characteristic, Explicit, OffCharacteristic };

const char* direction_name(DirectionMode d);
DirectionMode direction_from_name(const std::string& s);

struct ExperimentConfig {
    models::ModelSpec spec{};
    DirectionMode direction = DirectionMode::Characteristic;
    long m_override = -1;  // Explicit mode
    long n_override = -1;
    double alpha = 1.0;  // OffCharacteristic: m = N var2 + c1 N^alpha
    double c1 = 0.0;
    std::vector<long> n_grid = {64};
    long replicas = 1000;
    uint64_t seed = 0;
    int threads = 0;  // 0: POLYMER_THREADS or hardware_concurrency
    double lambda = 0.0;
    double gamma = 1.0;  // tolerance of the direction condition
    double tau = 0.5;    // interior row fraction for path statistics
    int paths_per_env = 1;
    std::vector<double> b_grid = {1.0, 1.5, 2.0, 3.0};
};

// (m, n) for scale N under the configured direction mode; validates the
// characteristic-direction condition |m - N var2| v |n - N var1| <= gamma N^{2/3}.
std::pair<long, long> direction_for(const ExperimentConfig& cfg, long N);

struct StatRow {
    long N = 0;
    std::string name;
    double value = 0.0;
    double se = 0.0;
    long count = 0;
};

struct TestRow {
    long N = 0;
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    bool pass = false;
};

struct ExperimentResult {
    std::string op;
    ExperimentConfig config;
    std::vector<StatRow> rows;
    std::vector<TestRow> tests;
    std::vector<std::string> notes;
    double wall_seconds = 0.0;  // in-memory only; never emitted

    double value(const std::string& name, long N = 0) const;
    double se_of(const std::string& name, long N = 0) const;
    const TestRow* test(const std::string& name, long N = 0) const;
    bool all_tests_pass() const;

    std::string to_csv() const;
    std::string to_json() const;
};

// Round trip of the provenance block (used by the config echo invariant).
ExperimentConfig config_from_json(const std::string& json_text);

ExperimentResult free_energy_stats(const ExperimentConfig& cfg);
ExperimentResult variance_identity(const ExperimentConfig& cfg);
ExperimentResult exponent_fit(const ExperimentConfig& cfg);
ExperimentResult burke_test(const models::ModelSpec& spec, long samples,
                            uint64_t seed, bool negative_control = false);
ExperimentResult clt_check(const ExperimentConfig& cfg);
ExperimentResult lln_check(const ExperimentConfig& cfg);
ExperimentResult tail_check(const ExperimentConfig& cfg);

// Replica scheduler: runs fn(r) for r in [0, replicas) on a small pool.
void parallel_replicas(long replicas, int threads,
                       const std::function<void(long)>& fn);
int resolve_threads(int requested);

// Write content to path atomically (temp file + rename).
void write_atomic(const std::string& path, const std::string& content);

}  // namespace polymer::experiments
