#include "locsim/sim/monte_carlo.hpp"

#include "locsim/analysis.hpp"
#include "locsim/crlb.hpp"
#include "locsim/errors.hpp"
#include "locsim/kernels.hpp"
#include "locsim/measurements.hpp"
#include "locsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace locsim {

namespace {

enum Salt : std::uint64_t {
    kUePos = 1,
    kShadow = 2,
    kCdl = 3,
    kPrs = 4,
    kToaNoise = 5,
    kCoopSel = 6,
    kTwtoaNoise = 7,
};

constexpr double kVarCeiling_m2 = 1e12; // dead-link variance clamp

struct LinkDraw {
    double snr_db_v = 0.0;
    double var_m2 = 0.0;  // variance used by the active channel mode
    double bias_m = 0.0;  // NLOS offset (multipath mode only)
};

// SNR -> CRLB variance (and bias) pipeline for one link.
LinkDraw draw_link(const Scenario &scn, double dist_m, int n_ext_walls,
                   double tx_power_dbm, RngStream &sf_rng, RngStream &cdl_rng,
                   RngStream &prs_rng) {
    const auto &lb = scn.link_budget;
    LinkGeometry geom;
    geom.distance_3d_m = std::max(dist_m, 1e-6);
    geom.indoor_distance_2d_m = scn.path_loss.indoor_distance_2d_m;
    geom.n_floors = scn.path_loss.n_floors;
    geom.n_internal_walls = scn.path_loss.n_internal_walls;
    geom.n_external_walls = n_ext_walls;

    LinkBudget budget = lb;
    budget.tx_power_dbm = tx_power_dbm;

    LinkDraw out;
    const double pl = path_loss_db(geom);
    const double sf = sample_shadow_db(sf_rng, lb.shadow_std_db);
    out.snr_db_v = snr_db(budget, pl, sf);
    const double gamma = db_to_linear(out.snr_db_v);

    const double var_awgn = std::min(
        toa_variance_m2(fim_toa_awgn(gamma, lb.scs_hz, lb.n_subcarriers)),
        kVarCeiling_m2);

    if (scn.channel_mode == ChannelMode::awgn) {
        out.var_m2 = var_awgn;
        return out;
    }

    const auto cir = sample_cdl_a(cdl_rng, scn.channel.delay_spread_s,
                                  scn.channel.max_taps);
    const auto sampled =
        quantize_to_grid(cir, lb.scs_hz * lb.n_subcarriers);
    const auto prs = make_qpsk_grid(prs_rng, lb.n_subcarriers, lb.scs_hz);
    const double fim = fim_toa_multipath(sampled, prs, gamma);
    double var_mp =
        fim > 0.0 ? std::min(toa_variance_m2(fim), kVarCeiling_m2)
                  : kVarCeiling_m2;
    // A favorable fade can land the multipath bound below the flat-channel
    // bound; the bias model needs var_mp >= var_awgn, so clamp (bias = 0).
    var_mp = std::max(var_mp, var_awgn);
    out.var_m2 = var_mp;
    out.bias_m = nlos_bias_offset_m(var_mp, var_awgn);
    return out;
}

struct SolverOutcome {
    SolverResult result;
    bool failed = false;
    std::string failure;
};

SolverOutcome run_one_solver(const std::string &name, const TdoaSet &tdoa,
                             const AnchorSet &anchors,
                             const WeightVector &weights,
                             const SolverConfig &cfg, Position init,
                             double init_range) {
    SolverOutcome o;
    try {
        if (name == "tswpm")
            o.result = ts_wpm(tdoa, anchors, weights, cfg, init, init_range);
        else if (name == "wnls")
            o.result = wnls(tdoa, anchors, cfg, init);
        else if (name == "nls")
            o.result = nls(tdoa, anchors, cfg, init);
        else if (name == "ippm")
            o.result = ippm(tdoa, anchors, cfg, init);
        else
            throw InvalidInput("unknown solver: " + name);
    } catch (const IllConditioned &e) {
        o.failed = true;
        o.failure = e.what();
    } catch (const DegenerateGeometry &e) {
        o.failed = true;
        o.failure = e.what();
    }
    return o;
}

// Indices of the k nearest anchors to p (all anchors when k == 0).
std::vector<int> visible_anchors(const std::vector<Position> &anchors,
                                 Position p, int k) {
    std::vector<int> idx(anchors.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (k <= 0 || k >= static_cast<int>(anchors.size()))
        return idx;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return distance(anchors[a], p) < distance(anchors[b], p);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void run_trial_noncoop(const Scenario &scn, int trial,
                       std::vector<TrialRecord> &records, std::size_t base) {
    const int B = static_cast<int>(scn.anchors.size());
    const int n_solvers = static_cast<int>(scn.solvers.size());

    for (int ue = 0; ue < scn.n_ues; ++ue) {
        auto pos_rng = RngStream::derive(scn.master_seed, trial, ue, kUePos);
        const Position truth{pos_rng.uniform(scn.ue_area.xmin, scn.ue_area.xmax),
                             pos_rng.uniform(scn.ue_area.ymin, scn.ue_area.ymax)};

        std::vector<double> snrs(B), vars(B), biases(B), toas(B);
        for (int b = 0; b < B; ++b) {
            const std::uint64_t link = (static_cast<std::uint64_t>(ue) << 20) | b;
            auto sf_rng = RngStream::derive(scn.master_seed, trial, link, kShadow);
            auto cdl_rng = RngStream::derive(scn.master_seed, trial, link, kCdl);
            auto prs_rng = RngStream::derive(scn.master_seed, trial, link, kPrs);
            const LinkDraw d = draw_link(
                scn, distance(truth, scn.anchors[b]),
                scn.path_loss.n_external_walls, scn.link_budget.tx_power_dbm,
                sf_rng, cdl_rng, prs_rng);
            snrs[b] = d.snr_db_v;
            vars[b] = d.var_m2;
            biases[b] = d.bias_m;

            LinkModel lm;
            lm.true_range_m = distance(truth, scn.anchors[b]);
            lm.snr_linear = db_to_linear(d.snr_db_v);
            lm.var_awgn_m2 = d.var_m2;
            lm.var_multipath_m2 = d.var_m2;
            lm.nlos_bias_m = d.bias_m;
            auto noise_rng =
                RngStream::derive(scn.master_seed, trial, link, kToaNoise);
            toas[b] = scn.channel_mode == ChannelMode::multipath
                          ? synth_toa_multipath(lm, noise_rng)
                          : synth_toa_awgn(lm, noise_rng);
        }

        const int ref = select_reference(snrs);
        const AnchorSet anchors(scn.anchors, ref);
        ToaSet toa_set{toas, vars};
        const TdoaSet tdoa = form_tdoa(toa_set, ref);
        const WeightVector weights = projection_weights(vars);
        const Position init = nearest_anchor_init(anchors, truth);
        const double init_range = distance(init, scn.anchors[ref]);

        double gdop_v = 0.0, peb_v = 0.0;
        try {
            gdop_v = dop(jacobian_toa(anchors, truth)).gdop;
            const Eigen::MatrixXd meas_fim =
                fim_tdoa_from_toa(vars, tdoa_transform(B, ref));
            const Eigen::Matrix2d f1 =
                fim_position(jacobian_tdoa(anchors, truth), meas_fim);
            peb_v = peb_m(f1);
        } catch (const Error &) {
            // degenerate drop; bounds stay 0 and solvers report themselves
        }

        for (int s = 0; s < n_solvers; ++s) {
            TrialRecord &rec =
                records[base + static_cast<std::size_t>(ue) * n_solvers + s];
            rec.trial = trial;
            rec.ue = ue;
            rec.solver = scn.solvers[s];
            rec.gdop = gdop_v;
            rec.peb_m = peb_v;
            rec.ref_snr_db = snrs[ref];
            const SolverOutcome o =
                run_one_solver(scn.solvers[s], tdoa, anchors, weights,
                               scn.solver_config, init, init_range);
            if (o.failed) {
                rec.failed = true;
                rec.error_m = std::numeric_limits<double>::infinity();
            } else {
                rec.failed = false;
                rec.error_m = distance(o.result.estimate, truth);
                rec.iterations = o.result.iterations;
                rec.converged = o.result.converged;
                rec.madds = o.result.ops.scalar_madds;
                rec.inversions = o.result.ops.matrix_inversions;
            }
        }
    }
}

void run_trial_coop(const Scenario &scn, int trial,
                    std::vector<TrialRecord> &records, std::size_t base) {
    const int n_ues = scn.n_ues;
    const int n_solvers = static_cast<int>(scn.solvers.size());
    const double coop_tx = scn.coop.tx_power_dbm != 0.0
                               ? scn.coop.tx_power_dbm
                               : scn.link_budget.tx_power_dbm;

    // UE drops
    std::vector<Position> truth(n_ues);
    for (int ue = 0; ue < n_ues; ++ue) {
        auto pos_rng = RngStream::derive(scn.master_seed, trial, ue, kUePos);
        truth[ue] = {pos_rng.uniform(scn.ue_area.xmin, scn.ue_area.xmax),
                     pos_rng.uniform(scn.ue_area.ymin, scn.ue_area.ymax)};
    }

    // cooperation sets: n_coop distinct partners per UE
    std::vector<std::vector<int>> coop_set(n_ues);
    for (int ue = 0; ue < n_ues; ++ue) {
        auto sel_rng = RngStream::derive(scn.master_seed, trial, ue, kCoopSel);
        std::vector<int> others;
        for (int j = 0; j < n_ues; ++j)
            if (j != ue)
                others.push_back(j);
        for (int k = 0; k < scn.coop.n_coop; ++k) {
            const std::size_t pick = static_cast<std::size_t>(
                sel_rng.uniform() * static_cast<double>(others.size()));
            const std::size_t at = std::min(pick, others.size() - 1);
            coop_set[ue].push_back(others[at]);
            others.erase(others.begin() + static_cast<long>(at));
        }
        std::sort(coop_set[ue].begin(), coop_set[ue].end());
    }

    // TW-TOA once per unordered pair that appears in any cooperation set
    std::map<std::pair<int, int>, TwToaPair> pair_meas;
    for (int ue = 0; ue < n_ues; ++ue) {
        for (int peer : coop_set[ue]) {
            const std::pair<int, int> key{std::min(ue, peer),
                                          std::max(ue, peer)};
            if (pair_meas.count(key))
                continue;
            const std::uint64_t link =
                (static_cast<std::uint64_t>(key.first) << 20) | key.second;
            auto sf_rng =
                RngStream::derive(scn.master_seed, trial, link, kShadow);
            auto cdl_rng = RngStream::derive(scn.master_seed, trial, link, kCdl);
            auto prs_rng = RngStream::derive(scn.master_seed, trial, link, kPrs);
            const double dist_uu = distance(truth[key.first], truth[key.second]);
            const LinkDraw d =
                draw_link(scn, dist_uu, scn.coop.n_external_walls, coop_tx,
                          sf_rng, cdl_rng, prs_rng);
            LinkModel lm;
            lm.true_range_m = dist_uu;
            lm.var_awgn_m2 = d.var_m2;
            lm.var_multipath_m2 = d.var_m2;
            lm.nlos_bias_m = d.bias_m;
            auto noise_rng =
                RngStream::derive(scn.master_seed, trial, link, kTwtoaNoise);
            TwToaPair p;
            p.ue_i = key.first;
            p.ue_j = key.second;
            p.variance_m2 = d.var_m2;
            p.range_m = scn.channel_mode == ChannelMode::multipath
                            ? synth_toa_multipath(lm, noise_rng)
                            : synth_toa_awgn(lm, noise_rng);
            pair_meas[key] = p;
        }
    }

    // per-UE anchor links and measurement sets
    CoopScenario coop;
    coop.ues.reserve(n_ues);
    std::vector<Position> inits(n_ues);
    std::vector<double> init_ranges(n_ues);
    std::vector<double> ref_snrs(n_ues);
    std::vector<double> gdops(n_ues, 0.0), pebs(n_ues, 0.0);

    for (int ue = 0; ue < n_ues; ++ue) {
        const std::vector<int> vis = visible_anchors(
            scn.anchors, truth[ue], scn.coop.anchors_visible_per_ue);
        const int B = static_cast<int>(vis.size());
        std::vector<Position> apos(B);
        std::vector<double> snrs(B), vars(B), toas(B);
        for (int i = 0; i < B; ++i) {
            apos[i] = scn.anchors[vis[i]];
            const std::uint64_t link =
                (static_cast<std::uint64_t>(ue) << 20) | vis[i];
            auto sf_rng =
                RngStream::derive(scn.master_seed, trial, link, kShadow);
            auto cdl_rng = RngStream::derive(scn.master_seed, trial, link, kCdl);
            auto prs_rng = RngStream::derive(scn.master_seed, trial, link, kPrs);
            const LinkDraw d = draw_link(
                scn, distance(truth[ue], apos[i]),
                scn.path_loss.n_external_walls, scn.link_budget.tx_power_dbm,
                sf_rng, cdl_rng, prs_rng);
            snrs[i] = d.snr_db_v;
            vars[i] = d.var_m2;
            LinkModel lm;
            lm.true_range_m = distance(truth[ue], apos[i]);
            lm.var_awgn_m2 = d.var_m2;
            lm.var_multipath_m2 = d.var_m2;
            lm.nlos_bias_m = d.bias_m;
            auto noise_rng =
                RngStream::derive(scn.master_seed, trial, link, kToaNoise);
            toas[i] = scn.channel_mode == ChannelMode::multipath
                          ? synth_toa_multipath(lm, noise_rng)
                          : synth_toa_awgn(lm, noise_rng);
        }
        const int ref = select_reference(snrs);
        ref_snrs[ue] = snrs[ref];

        CoopUe cu{.tdoa = form_tdoa(ToaSet{toas, vars}, ref),
                  .anchors = AnchorSet(apos, ref),
                  .anchor_variances_m2 = vars,
                  .neighbors = {}};
        for (int peer : coop_set[ue]) {
            const std::pair<int, int> key{std::min(ue, peer),
                                          std::max(ue, peer)};
            const TwToaPair &p = pair_meas.at(key);
            cu.neighbors.push_back({peer, p.range_m, p.variance_m2});
        }
        inits[ue] = nearest_anchor_init(cu.anchors, truth[ue]);
        init_ranges[ue] = distance(inits[ue], apos[ref]);
        try {
            gdops[ue] = dop(jacobian_toa(cu.anchors, truth[ue])).gdop;
        } catch (const Error &) {
            // two-anchor GDOP is rank-deficient by construction; leave 0
        }
        coop.ues.push_back(std::move(cu));
    }

    for (int s = 0; s < n_solvers; ++s) {
        const std::string &name = scn.solvers[s];
        std::vector<SolverResult> results;
        if (name == "tswpm") {
            results = ts_wpm_coop(coop, scn.solver_config, inits, init_ranges);
        } else if (name == "wnls") {
            results = wnls_coop(coop, scn.solver_config, inits);
        } else {
            throw InvalidInput("cooperative mode supports tswpm and wnls only");
        }
        for (int ue = 0; ue < n_ues; ++ue) {
            TrialRecord &rec =
                records[base + static_cast<std::size_t>(ue) * n_solvers + s];
            rec.trial = trial;
            rec.ue = ue;
            rec.solver = name;
            rec.gdop = gdops[ue];
            rec.peb_m = pebs[ue];
            rec.ref_snr_db = ref_snrs[ue];
            const SolverResult &r = results[ue];
            if (r.failed) {
                rec.failed = true;
                rec.error_m = std::numeric_limits<double>::infinity();
            } else {
                rec.error_m = distance(r.estimate, truth[ue]);
                rec.iterations = r.iterations;
                rec.converged = r.converged;
                rec.madds = r.ops.scalar_madds;
                rec.inversions = r.ops.matrix_inversions;
            }
        }
    }
}

} // namespace

double quantile(std::vector<double> values, double q) {
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size())
        return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

RunResult run_monte_carlo(const Scenario &scn) {
    scn.validate();
    if (scn.coop.enabled) {
        for (const auto &s : scn.solvers)
            if (s != "tswpm" && s != "wnls")
                throw ValidationError(
                    "cooperative mode supports solvers tswpm and wnls only");
    }

    const int n_solvers = static_cast<int>(scn.solvers.size());
    const std::size_t per_trial =
        static_cast<std::size_t>(scn.n_ues) * n_solvers;
    RunResult out;
    out.records.resize(static_cast<std::size_t>(scn.trials) * per_trial);

    auto worker = [&](int t0, int t1) {
        for (int t = t0; t < t1; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * per_trial;
            if (scn.coop.enabled)
                run_trial_coop(scn, t, out.records, base);
            else
                run_trial_noncoop(scn, t, out.records, base);
        }
    };

    const int n_threads = std::max(1, scn.threads);
    if (n_threads == 1) {
        worker(0, scn.trials);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (scn.trials + n_threads - 1) / n_threads;
        for (int i = 0; i < n_threads; ++i) {
            const int t0 = i * chunk;
            const int t1 = std::min(scn.trials, t0 + chunk);
            if (t0 < t1)
                pool.emplace_back(worker, t0, t1);
        }
        for (auto &th : pool)
            th.join();
    }

    // summary
    RunSummary &sum = out.summary;
    sum.simd_lane = std::string(kern::lane_name(kern::active_lane()));
    sum.threads = n_threads;

    std::vector<double> pebs, gdops;
    for (const auto &r : out.records) {
        if (r.solver == scn.solvers[0]) { // once per (trial, ue)
            if (r.peb_m > 0.0)
                pebs.push_back(r.peb_m);
            if (r.gdop > 0.0)
                gdops.push_back(r.gdop);
        }
    }
    if (!pebs.empty()) {
        double s2 = 0.0;
        for (double p : pebs)
            s2 += p * p;
        sum.peb_rms_m = std::sqrt(s2 / static_cast<double>(pebs.size()));
        sum.peb_median_m = quantile(pebs, 0.5);
    }
    if (!gdops.empty()) {
        sum.gdop_min = *std::min_element(gdops.begin(), gdops.end());
        sum.gdop_max = *std::max_element(gdops.begin(), gdops.end());
        sum.gdop_median = quantile(gdops, 0.5);
        double a2 = 0.0, a5 = 0.0;
        for (double g : gdops) {
            a2 += g > 2.0 ? 1.0 : 0.0;
            a5 += g > 5.0 ? 1.0 : 0.0;
        }
        sum.gdop_frac_above_2 = a2 / static_cast<double>(gdops.size());
        sum.gdop_frac_above_5 = a5 / static_cast<double>(gdops.size());
    }

    for (const auto &name : scn.solvers) {
        SolverSummary ss;
        std::vector<double> all_err;
        double it_sum = 0.0, conv = 0.0, fail = 0.0, se = 0.0;
        long long n_ok = 0;
        for (const auto &r : out.records) {
            if (r.solver != name)
                continue;
            ++ss.n_records;
            all_err.push_back(r.error_m);
            if (r.failed) {
                fail += 1.0;
                continue;
            }
            ss.cdf_errors_m.push_back(r.error_m);
            it_sum += r.iterations;
            conv += r.converged ? 1.0 : 0.0;
            se += r.error_m * r.error_m;
            ++n_ok;
        }
        std::sort(ss.cdf_errors_m.begin(), ss.cdf_errors_m.end());
        ss.median_error_m = quantile(all_err, 0.5);
        ss.p90_error_m = quantile(all_err, 0.9);
        if (n_ok > 0) {
            ss.mean_iterations = it_sum / static_cast<double>(n_ok);
            ss.convergence_rate = conv / static_cast<double>(ss.n_records);
            ss.rmse_m = std::sqrt(se / static_cast<double>(n_ok));
        }
        ss.failure_rate =
            ss.n_records > 0 ? fail / static_cast<double>(ss.n_records) : 0.0;
        sum.solvers[name] = std::move(ss);
    }
    return out;
}

std::vector<BoundRow> bounds_table(const Scenario &scn, int n_drops) {
    scn.validate();
    std::vector<BoundRow> rows;
    rows.reserve(n_drops);
    const int B = static_cast<int>(scn.anchors.size());
    const auto &lb = scn.link_budget;

    for (int i = 0; i < n_drops; ++i) {
        auto pos_rng = RngStream::derive(scn.master_seed, i, 0, kUePos);
        const Position p{pos_rng.uniform(scn.ue_area.xmin, scn.ue_area.xmax),
                         pos_rng.uniform(scn.ue_area.ymin, scn.ue_area.ymax)};
        BoundRow row;
        row.ue = i;
        row.position = p;

        // nominal per-link variances: no shadow fading, AWGN bound
        std::vector<double> snrs(B), vars(B);
        for (int b = 0; b < B; ++b) {
            LinkGeometry geom;
            geom.distance_3d_m = std::max(distance(p, scn.anchors[b]), 1e-6);
            geom.indoor_distance_2d_m = scn.path_loss.indoor_distance_2d_m;
            geom.n_floors = scn.path_loss.n_floors;
            geom.n_internal_walls = scn.path_loss.n_internal_walls;
            geom.n_external_walls = scn.path_loss.n_external_walls;
            snrs[b] = snr_db(lb, path_loss_db(geom), 0.0);
            vars[b] = toa_variance_m2(fim_toa_awgn(
                db_to_linear(snrs[b]), lb.scs_hz, lb.n_subcarriers));
        }
        const int ref = select_reference(snrs);
        const AnchorSet anchors(scn.anchors, ref);
        try {
            const auto rep = dop(jacobian_toa(anchors, p));
            row.gdop = rep.gdop;
            row.hdop = rep.hdop;
            row.rating = std::string(dop_rating_name(dop_rating(rep.gdop)));

            const Eigen::MatrixXd tdoa_fim =
                fim_tdoa_from_toa(vars, tdoa_transform(B, ref));
            row.peb_tdoa_m = peb_m(
                fim_position(jacobian_tdoa(anchors, p), tdoa_fim));

            Eigen::VectorXd toa_inv(B);
            for (int b = 0; b < B; ++b)
                toa_inv(b) = 1.0 / vars[b];
            row.peb_toa_m = peb_m(fim_position(
                jacobian_toa(anchors, p),
                Eigen::MatrixXd(toa_inv.asDiagonal())));
        } catch (const Error &) {
            row.rating = "Degenerate";
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace locsim
