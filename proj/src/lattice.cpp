#include "polymer/lattice.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "polymer/kernels.hpp"

namespace polymer::lattice {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum Channel : uint64_t { kChanR1 = 0, kChanR2 = 1, kChanBulk = 2, kChanCount = 4 };

rng::Philox channel_rng(const Environment& env, uint64_t channel) {
    return rng::Philox(env.seed, env.stream * kChanCount + channel);
}
}  // namespace

Environment generate(const models::ModelSpec& spec, long m, long n,
                     uint64_t seed, double lambda, bool coupled,
                     uint64_t stream) {
    if (m < 0 || n < 0) throw std::invalid_argument("generate: m,n must be >= 0");
    const models::ModelParams params = models::resolve(spec, lambda);

    Environment env;
    env.spec = spec;
    env.m = m;
    env.n = n;
    env.seed = seed;
    env.stream = stream;
    env.lambda = lambda;
    env.coupled = coupled;
    env.log_r1.resize(m);
    env.log_r2.resize(n);
    env.log_y1.resize(m * n);
    env.log_y2.resize(m * n);

    const meldist::MellinLaw law1 = params.boundary1();
    const meldist::MellinLaw law2 = params.boundary2();

    {
        rng::Philox g = channel_rng(env, kChanR1);
        for (long i = 0; i < m; ++i)
            env.log_r1[i] = coupled ? std::log(law1.quantile(g.uniform()))
                                    : law1.sample_log(g);
    }
    {
        rng::Philox g = channel_rng(env, kChanR2);
        for (long j = 0; j < n; ++j)
            env.log_r2[j] = coupled ? std::log(law2.quantile(g.uniform()))
                                    : law2.sample_log(g);
    }
    {
        rng::Philox g = channel_rng(env, kChanBulk);
        for (long idx = 0; idx < m * n; ++idx) {
            const auto [ly1, ly2] = models::sample_bulk_log(spec, g);
            env.log_y1[idx] = ly1;
            env.log_y2[idx] = ly2;
        }
    }
    return env;
}

namespace {

void boundary_prefixes(const Environment& env, std::vector<double>& pr1,
                       std::vector<double>& pr2) {
    pr1.assign(env.m + 1, 0.0);
    pr2.assign(env.n + 1, 0.0);
    for (long i = 1; i <= env.m; ++i) pr1[i] = pr1[i - 1] + env.log_r1[i - 1];
    for (long j = 1; j <= env.n; ++j) pr2[j] = pr2[j - 1] + env.log_r2[j - 1];
}

// Shared anti-diagonal sweep. Visit(d, buf) sees the completed diagonal d,
// where buf[i] = log Z_{i, d-i} for i in [max(0,d-n), min(m,d)].
template <typename Visit>
void diagonal_sweep(const Environment& env, Visit&& visit) {
    const long m = env.m, n = env.n;
    std::vector<double> pr1, pr2;
    boundary_prefixes(env, pr1, pr2);

    std::vector<double> prev(m + 1, 0.0), cur(m + 1, 0.0);
    prev[0] = 0.0;
    visit(0L, prev);
    const kernels::DiagStepFn step = kernels::diag_step();
    for (long d = 1; d <= m + n; ++d) {
        const long ilo = std::max(1L, d - n);
        const long ihi = std::min(m, d - 1);
        if (ilo <= ihi) {
            // weights of cell (i, d-i): log_y*[(d-i-1)*m + (i-1)]
            const std::ptrdiff_t base = (d - ilo - 1) * m + (ilo - 1);
            step(prev.data(), cur.data(), ilo, ihi, env.log_y1.data() + base,
                 env.log_y2.data() + base, 1 - m);
        }
        if (d <= m) cur[d] = pr1[d];
        if (d <= n) cur[0] = pr2[d];
        visit(d, cur);
        std::swap(prev, cur);
    }
}

}  // namespace

LogPartitionGrid forward_dp_rowsweep(const Environment& env) {
    const long m = env.m, n = env.n;
    LogPartitionGrid grid;
    grid.m = m;
    grid.n = n;
    grid.forward.assign((m + 1) * (n + 1), 0.0);
    std::vector<double> pr1, pr2;
    boundary_prefixes(env, pr1, pr2);
    for (long i = 0; i <= m; ++i) grid.fwd(i, 0) = pr1[i];
    for (long j = 0; j <= n; ++j) grid.fwd(0, j) = pr2[j];
    for (long j = 1; j <= n; ++j)
        for (long i = 1; i <= m; ++i)
            grid.fwd(i, j) = kernels::lse(env.ly1(i, j) + grid.fwd(i - 1, j),
                                          env.ly2(i, j) + grid.fwd(i, j - 1));
    return grid;
}

LogPartitionGrid forward_dp(const Environment& env) {
    if (kernels::active_isa() == kernels::Isa::Scalar)
        return forward_dp_rowsweep(env);
    const long m = env.m, n = env.n;
    LogPartitionGrid grid;
    grid.m = m;
    grid.n = n;
    grid.forward.assign((m + 1) * (n + 1), 0.0);
    diagonal_sweep(env, [&](long d, const std::vector<double>& buf) {
        const long lo = std::max(0L, d - n);
        const long hi = std::min(m, d);
        for (long i = lo; i <= hi; ++i) grid.fwd(i, d - i) = buf[i];
    });
    return grid;
}

double forward_log_z(const Environment& env, RollingCapture* cap) {
    const long m = env.m, n = env.n;
    if (cap && cap->want_edges) {
        cap->top_row.assign(m + 1, 0.0);
        cap->right_col.assign(n + 1, 0.0);
    }
    if (cap) cap->corner_log_z.assign(cap->corners.size(), 0.0);
    double log_z = 0.0;
    diagonal_sweep(env, [&](long d, const std::vector<double>& buf) {
        if (cap) {
            if (cap->want_edges) {
                if (d >= n && d - n <= m) cap->top_row[d - n] = buf[d - n];
                if (d >= m && d - m <= n) cap->right_col[d - m] = buf[m];
            }
            for (size_t k = 0; k < cap->corners.size(); ++k) {
                const auto [mk, nk] = cap->corners[k];
                if (mk + nk == d && mk <= m && nk <= n)
                    cap->corner_log_z[k] = buf[mk];
            }
        }
        if (d == m + n) log_z = buf[m];
    });
    return log_z;
}

void reverse_dp(const Environment& env, LogPartitionGrid& grid) {
    const long m = env.m, n = env.n;
    if (grid.m != m || grid.n != n)
        throw std::invalid_argument("reverse_dp: grid extents mismatch");
    grid.reverse.assign((m + 1) * (n + 1), kNegInf);
    grid.has_reverse = true;
    grid.rev(m, n) = 0.0;
    for (long i = m - 1; i >= 0; --i)
        grid.rev(i, n) = (n >= 1) ? env.ly1(i + 1, n) + grid.rev(i + 1, n)
                                  : kNegInf;
    for (long j = n - 1; j >= 0; --j)
        grid.rev(m, j) = (m >= 1) ? env.ly2(m, j + 1) + grid.rev(m, j + 1)
                                  : kNegInf;
    for (long j = n - 1; j >= 0; --j) {
        for (long i = m - 1; i >= 0; --i) {
            const double right =
                (j >= 1) ? env.ly1(i + 1, j) + grid.rev(i + 1, j) : kNegInf;
            const double up =
                (i >= 1) ? env.ly2(i, j + 1) + grid.rev(i, j + 1) : kNegInf;
            grid.rev(i, j) = kernels::lse(right, up);
        }
    }
}

double ExitDistribution::mean_t1() const {
    double s = 0.0;
    for (size_t r = 1; r < q1.size(); ++r) s += r * q1[r];
    return s;
}

double ExitDistribution::mean_t2() const {
    double s = 0.0;
    for (size_t r = 1; r < q2.size(); ++r) s += r * q2[r];
    return s;
}

double ExitDistribution::tail_t1(double u) const {
    double s = 0.0;
    for (size_t r = 0; r < q1.size(); ++r)
        if (static_cast<double>(r) >= u) s += q1[r];
    return s;
}

double ExitDistribution::tail_t2(double u) const {
    double s = 0.0;
    for (size_t r = 0; r < q2.size(); ++r)
        if (static_cast<double>(r) >= u) s += q2[r];
    return s;
}

ExitDistribution exit_distribution(const Environment& env,
                                   const LogPartitionGrid& grid) {
    const long m = env.m, n = env.n;
    ExitDistribution ed;
    ed.q1.assign(m + 1, 0.0);
    ed.q2.assign(n + 1, 0.0);
    if (n == 0) {
        ed.q1[m] = 1.0;  // forced axis path; covers m = n = 0 as q1[0] = 1
        return ed;
    }
    if (m == 0) {
        ed.q2[n] = 1.0;
        return ed;
    }
    if (!grid.has_reverse)
        throw std::invalid_argument("exit_distribution: reverse field missing");
    const double log_z = grid.log_z();
    for (long r = 1; r <= m; ++r)
        ed.q1[r] =
            std::exp(grid.fwd(r, 0) + env.ly2(r, 1) + grid.rev(r, 1) - log_z);
    for (long s = 1; s <= n; ++s)
        ed.q2[s] =
            std::exp(grid.fwd(0, s) + env.ly1(1, s) + grid.rev(1, s) - log_z);
    return ed;
}

PathSample sample_path(const Environment& env, const LogPartitionGrid& grid,
                       rng::Philox& gen) {
    const long m = env.m, n = env.n;
    PathSample path;
    path.vertices.reserve(m + n + 1);
    long i = m, j = n;
    path.vertices.emplace_back(i, j);
    while (i > 0 && j > 0) {
        const double p_left =
            std::exp(env.ly1(i, j) + grid.fwd(i - 1, j) - grid.fwd(i, j));
        if (gen.uniform() < p_left)
            --i;
        else
            --j;
        path.vertices.emplace_back(i, j);
    }
    while (i > 0) path.vertices.emplace_back(--i, 0);
    while (j > 0) path.vertices.emplace_back(0, --j);
    std::reverse(path.vertices.begin(), path.vertices.end());

    path.v0.assign(n + 1, m + 1);
    path.v1.assign(n + 1, -1);
    path.w0.assign(m + 1, n + 1);
    path.w1.assign(m + 1, -1);
    for (const auto& [vi, vj] : path.vertices) {
        path.v0[vj] = std::min(path.v0[vj], vi);
        path.v1[vj] = std::max(path.v1[vj], vi);
        path.w0[vi] = std::min(path.w0[vi], vj);
        path.w1[vi] = std::max(path.w1[vi], vj);
    }
    path.t1 = path.v1[0];
    path.t2 = path.w1[0];
    return path;
}

RatioFields ratio_fields(const LogPartitionGrid& grid) {
    const long m = grid.m, n = grid.n;
    RatioFields rf;
    rf.m = m;
    rf.n = n;
    rf.log_r1.assign((n + 1) * m, 0.0);
    rf.log_r2.assign((m + 1) * n, 0.0);
    for (long j = 0; j <= n; ++j)
        for (long i = 1; i <= m; ++i)
            rf.log_r1[j * m + (i - 1)] = grid.fwd(i, j) - grid.fwd(i - 1, j);
    for (long j = 1; j <= n; ++j)
        for (long i = 0; i <= m; ++i)
            rf.log_r2[(j - 1) * (m + 1) + i] =
                grid.fwd(i, j) - grid.fwd(i, j - 1);
    return rf;
}

void dump_env(const Environment& env, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("dump_env: cannot open " + path);
    std::fprintf(f, "# polymer environment v1\n");
    std::fprintf(f, "model=%s\n", models::model_name(env.spec.kind));
    std::fprintf(f, "mu=%.17g\n", env.spec.mu);
    std::fprintf(f, "theta=%.17g\n", env.spec.theta);
    std::fprintf(f, "beta=%.17g\n", env.spec.beta);
    std::fprintf(f, "lambda=%.17g\n", env.lambda);
    std::fprintf(f, "coupled=%d\n", env.coupled ? 1 : 0);
    std::fprintf(f, "m=%ld\n", env.m);
    std::fprintf(f, "n=%ld\n", env.n);
    std::fprintf(f, "seed=%" PRIu64 "\n", env.seed);
    std::fprintf(f, "stream=%" PRIu64 "\n", env.stream);
    auto dump_array = [&](const char* name, const std::vector<double>& v) {
        std::fprintf(f, "%s\n", name);
        for (double x : v) std::fprintf(f, "%.17g\n", x);
    };
    dump_array("log_r1", env.log_r1);
    dump_array("log_r2", env.log_r2);
    dump_array("log_y1", env.log_y1);
    dump_array("log_y2", env.log_y2);
    std::fclose(f);
}

Environment load_env(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_env: cannot open " + path);
    Environment env;
    std::string line;
    auto expect_kv = [&](const std::string& key) -> std::string {
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos || line.substr(0, eq) != key)
                throw std::runtime_error("load_env: expected key " + key);
            return line.substr(eq + 1);
        }
        throw std::runtime_error("load_env: truncated file at key " + key);
    };
    env.spec.kind = models::model_from_name(expect_kv("model"));
    env.spec.mu = std::stod(expect_kv("mu"));
    env.spec.theta = std::stod(expect_kv("theta"));
    env.spec.beta = std::stod(expect_kv("beta"));
    env.lambda = std::stod(expect_kv("lambda"));
    env.coupled = std::stoi(expect_kv("coupled")) != 0;
    env.m = std::stol(expect_kv("m"));
    env.n = std::stol(expect_kv("n"));
    env.seed = std::stoull(expect_kv("seed"));
    env.stream = std::stoull(expect_kv("stream"));
    auto read_array = [&](const std::string& name, std::vector<double>& v,
                          long count) {
        if (!std::getline(in, line) || line != name)
            throw std::runtime_error("load_env: expected section " + name);
        v.resize(count);
        for (long k = 0; k < count; ++k) {
            if (!std::getline(in, line))
                throw std::runtime_error("load_env: truncated " + name);
            v[k] = std::stod(line);
        }
    };
    read_array("log_r1", env.log_r1, env.m);
    read_array("log_r2", env.log_r2, env.n);
    read_array("log_y1", env.log_y1, env.m * env.n);
    read_array("log_y2", env.log_y2, env.m * env.n);
    return env;
}

}  // namespace polymer::lattice
