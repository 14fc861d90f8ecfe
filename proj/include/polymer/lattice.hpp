#pragma once

// Environment generation, log-space forward/backward dynamic programming,
// exact quenched exit distributions, path sampling, and ratio fields.
//
// All partition arithmetic lives in log space; Z itself is never formed.
// Raster order of random draws within an environment: horizontal boundary
// (i = 1..m), vertical boundary (j = 1..n), then bulk row-major (j outer,
// i inner), with each of the three groups on its own RNG channel so the
// coupled construction can replay boundary uniforms across parameters.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polymer/models.hpp"
#include "polymer/rng.hpp"

namespace polymer::lattice {

struct Environment {
    models::ModelSpec spec{};
    long m = 0, n = 0;
    uint64_t seed = 0;
    uint64_t stream = 0;  // replica id
    double lambda = 0.0;
    bool coupled = false;
    std::vector<double> log_r1;  // m entries, site (i,0), i = 1..m
    std::vector<double> log_r2;  // n entries, site (0,j), j = 1..n
    std::vector<double> log_y1;  // m*n entries, row-major by j
    std::vector<double> log_y2;

    double ly1(long i, long j) const { return log_y1[(j - 1) * m + (i - 1)]; }
    double ly2(long i, long j) const { return log_y2[(j - 1) * m + (i - 1)]; }
};

Environment generate(const models::ModelSpec& spec, long m, long n,
                     uint64_t seed, double lambda = 0.0, bool coupled = false,
                     uint64_t stream = 0);

struct LogPartitionGrid {
    long m = 0, n = 0;
    std::vector<double> forward;  // (m+1)*(n+1), index j*(m+1)+i
    std::vector<double> reverse;  // filled by reverse_dp
    bool has_reverse = false;

    double fwd(long i, long j) const { return forward[j * (m + 1) + i]; }
    double& fwd(long i, long j) { return forward[j * (m + 1) + i]; }
    double rev(long i, long j) const { return reverse[j * (m + 1) + i]; }
    double& rev(long i, long j) { return reverse[j * (m + 1) + i]; }
    double log_z() const { return fwd(m, n); }
};

// Full forward grid, using the active DP kernel.
LogPartitionGrid forward_dp(const Environment& env);

// Plain row-sweep reference; bit-identical to the scalar kernel path.
LogPartitionGrid forward_dp_rowsweep(const Environment& env);

// Rolling (two-diagonal) forward pass: log Z_{m,n} in O(m+n) memory.
// Optionally captures the top row log Z_{i,n} and right column log Z_{m,j},
// and log Z at requested (m_k, n_k) corners lying on the sweep.
struct RollingCapture {
    bool want_edges = false;
    std::vector<double> top_row;    // size m+1 when want_edges
    std::vector<double> right_col;  // size n+1 when want_edges
    std::vector<std::pair<long, long>> corners;
    std::vector<double> corner_log_z;
};
double forward_log_z(const Environment& env, RollingCapture* cap = nullptr);

// Bulk-weight-only partition functions log Z_{(i,j),(m,n)}. Edges inside
// the axes carry no bulk weight, so row j=0 / column i=0 values use the
// up/right step only and rev(0,0) is -inf for m,n >= 1.
void reverse_dp(const Environment& env, LogPartitionGrid& grid);

// Exact quenched exit distributions: q1[r] = Q(t1 = r), q2[s] = Q(t2 = s).
// q1[0] = q2[0] = 0 for m,n >= 1; degenerate extents collapse to the forced
// axis path.
struct ExitDistribution {
    std::vector<double> q1;  // size m+1
    std::vector<double> q2;  // size n+1
    double mean_t1() const;
    double mean_t2() const;
    double tail_t1(double u) const;  // Q(t1 >= u)
    double tail_t2(double u) const;
};
ExitDistribution exit_distribution(const Environment& env,
                                   const LogPartitionGrid& grid);

struct PathSample {
    std::vector<std::pair<long, long>> vertices;  // (0,0) ... (m,n)
    long t1 = 0, t2 = 0;
    std::vector<long> v0, v1;  // per row l = 0..n: min/max column
    std::vector<long> w0, w1;  // per column k = 0..m: min/max row
};
PathSample sample_path(const Environment& env, const LogPartitionGrid& grid,
                       rng::Philox& gen);

// log R^1_{i,j} = fwd(i,j) - fwd(i-1,j) (i >= 1), log R^2 analogous.
struct RatioFields {
    long m = 0, n = 0;
    std::vector<double> log_r1;  // (n+1) rows of m entries
    std::vector<double> log_r2;  // n rows of (m+1) entries
    double r1(long i, long j) const { return log_r1[j * m + (i - 1)]; }
    double r2(long i, long j) const { return log_r2[(j - 1) * (m + 1) + i]; }
};
RatioFields ratio_fields(const LogPartitionGrid& grid);

// Text dump/load, bit-exact round trip, arrays in raster order.
void dump_env(const Environment& env, const std::string& path);
Environment load_env(const std::string& path);

}  // namespace polymer::lattice
