#include "locsim/sim/outputs.hpp"

#include "locsim/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace locsim {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path &p) {
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw IoError("cannot write " + p.string());
    return f;
}

json json_finite(double v) {
    // JSON has no infinity; failures are visible through failure_rate.
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

} // namespace

void emit_outputs(const Scenario &scn, const RunResult &run,
                  const std::string &out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir);

    {
        auto f = open_out(fs::path(out_dir) / "trials.csv");
        f << "trial,ue,solver,error_m,iterations,converged,failed,gdop,"
             "ref_snr_db,peb_m,madds,inversions\n";
        for (const auto &r : run.records) {
            f << r.trial << ',' << r.ue << ',' << r.solver << ','
              << format_double(r.error_m) << ',' << r.iterations << ','
              << (r.converged ? 1 : 0) << ',' << (r.failed ? 1 : 0) << ','
              << format_double(r.gdop) << ',' << format_double(r.ref_snr_db)
              << ',' << format_double(r.peb_m) << ',' << r.madds << ','
              << r.inversions << '\n';
        }
    }

    for (const auto &[name, ss] : run.summary.solvers) {
        auto f = open_out(fs::path(out_dir) / ("cdf_" + name + ".csv"));
        f << "error_m,cumulative_prob\n";
        const std::size_t n = ss.cdf_errors_m.size();
        for (std::size_t i = 0; i < n; ++i)
            f << format_double(ss.cdf_errors_m[i]) << ','
              << format_double(static_cast<double>(i + 1) /
                               static_cast<double>(n))
              << '\n';
    }

    {
        json solvers_j;
        for (const auto &[name, ss] : run.summary.solvers) {
            solvers_j[name] = {
                {"median_error_m", json_finite(ss.median_error_m)},
                {"p90_error_m", json_finite(ss.p90_error_m)},
                {"rmse_m", json_finite(ss.rmse_m)},
                {"mean_iterations", ss.mean_iterations},
                {"failure_rate", ss.failure_rate},
                {"convergence_rate", ss.convergence_rate},
                {"n_records", ss.n_records},
            };
        }
        const json doc{
            {"solvers", solvers_j},
            {"peb", {{"rms_m", run.summary.peb_rms_m},
                     {"median_m", run.summary.peb_median_m}}},
            {"gdop",
             {{"min", run.summary.gdop_min},
              {"max", run.summary.gdop_max},
              {"median", run.summary.gdop_median},
              {"frac_above_2", run.summary.gdop_frac_above_2},
              {"frac_above_5", run.summary.gdop_frac_above_5}}},
            {"simd_lane", run.summary.simd_lane},
            {"threads", run.summary.threads},
        };
        auto f = open_out(fs::path(out_dir) / "summary.json");
        f << doc.dump(2) << '\n';
    }

    {
        const json doc{
            {"scenario", scn.to_json()},
            {"master_seed", scn.master_seed},
            {"code_version", "locsim 0.1.0"},
        };
        auto f = open_out(fs::path(out_dir) / "run_manifest.json");
        f << doc.dump(2) << '\n';
    }
}

} // namespace locsim
