#include "qdsim/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "qdsim/bloch.hpp"
#include "qdsim/constants.hpp"
#include "qdsim/correlator.hpp"
#include "qdsim/csvio.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/fitkit.hpp"
#include "qdsim/liouville.hpp"
#include "qdsim/montecarlo.hpp"
#include "qdsim/spinmodel.hpp"

namespace qd {
namespace {

namespace fs = std::filesystem;

void ensure_outdir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw SchemaError("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_effective_config(const RunConfig& cfg, const std::string& dir) {
    cfg.to_doc().save(join(dir, "effective_config.cfg"));
}

std::string b_label(double B_T) { return format_double(B_T * 1000.0, 10) + "mT"; }

void require_b_sweep(const RunConfig& cfg) {
    if (cfg.grid.B_list.empty()) throw SchemaError("B sweep list is empty");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&]() {
        try {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// Pull "key=value" out of a CSV metadata comment; empty when absent.
std::string meta_token(const std::string& comment, const std::string& key) {
    const std::string needle = key + "=";
    auto pos = comment.find(needle);
    if (pos == std::string::npos) return "";
    pos += needle.size();
    auto end = comment.find_first_of(" |", pos);
    return comment.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

}  // namespace

int cmd_spectrum(const RunConfig& cfg, const std::string& out_dir) {
    require_b_sweep(cfg);
    ensure_outdir(out_dir);
    write_effective_config(cfg, out_dir);
    const std::uint64_t hash = cfg.hash();
    const int prec = cfg.output.precision;
    auto f = [&](double v) { return format_double(v, prec); };

    CsvTable zeeman;
    zeeman.comment = csv_comment(hash, "B_T:T; line:label; split_ueV:ueV");
    zeeman.columns = {"B_T", "line", "split_ueV"};
    CsvTable eigen;
    eigen.comment =
        csv_comment(hash, "B_T:T; qubit:label; e_minus_ueV,e_plus_ueV,delta_ueV:ueV; "
                          "theta_B_rad:rad");
    eigen.columns = {"B_T", "qubit", "e_minus_ueV", "e_plus_ueV", "delta_ueV", "theta_B_rad"};

    for (double B : cfg.grid.B_list) {
        PhysicalParams p = cfg.params;
        p.B = B;
        validate_params(p);
        for (Line line : {Line::X0, Line::Xpm, Line::XXT3, Line::XD})
            zeeman.rows.push_back({f(B), line_name(line), f(zeeman_line_splitting(line, p))});
        for (Qubit q : {Qubit::DE, Qubit::XX}) {
            const QubitEigenpair e = qubit_eigensystem(q, p);
            eigen.rows.push_back({f(B), q == Qubit::DE ? "DE" : "XX", f(e.e_minus), f(e.e_plus),
                                  f(e.delta_B), f(e.theta_B)});
        }
    }
    write_csv(join(out_dir, "zeeman.csv"), zeeman);
    write_csv(join(out_dir, "eigen.csv"), eigen);
    return 0;
}

int cmd_g2(const RunConfig& cfg, const std::string& out_dir) {
    require_b_sweep(cfg);
    ensure_outdir(out_dir);
    write_effective_config(cfg, out_dir);
    const std::uint64_t hash = cfg.hash();
    const int prec = cfg.output.precision;
    const std::vector<double> taus = cfg.tau_grid();

    parallel_for(cfg.grid.B_list.size(), cfg.run.jobs, [&](std::size_t bi) {
        auto f = [&](double v) { return format_double(v, prec); };
        PhysicalParams p = cfg.params;
        p.B = cfg.grid.B_list[bi];
        validate_params(p);
        const LevelModel m = build_level_model(p, cfg.variant);
        const CorrelationCurve raw = g2_polarized(m, cfg.herald, taus);
        const CorrelationCurve smeared = convolve_irf(raw, cfg.detector.irf_fwhm);
        const MaskedSeries spin = heralded_spin_dcp(m, cfg.herald, taus);

        const std::string label = b_label(p.B);
        const std::string meta = " | B_T=" + format_double(p.B, 17) +
                                 " | variant=" + variant_name(cfg.variant) +
                                 " | herald=" + pol_name(cfg.herald) +
                                 " | rate_par=" + f(raw.rate_par) +
                                 " | rate_cross=" + f(raw.rate_cross);

        auto curve_table = [&](const CorrelationCurve& c, const std::string& extra) {
            CsvTable t;
            t.comment = csv_comment(hash, "tau_ns:ns; g2_par,g2_cross,dcp:1") + meta + extra;
            t.columns = {"tau_ns", "g2_par", "g2_cross", "dcp"};
            for (size_t i = 0; i < c.taus.size(); ++i)
                t.rows.push_back({f(c.taus[i]), f(c.g2_par[i]), f(c.g2_cross[i]), f(c.dcp[i])});
            return t;
        };
        write_csv(join(out_dir, "g2_B" + label + ".csv"), curve_table(raw, " | irf_fwhm=0"));
        write_csv(join(out_dir, "g2_B" + label + "_irf.csv"),
                  curve_table(smeared, " | irf_fwhm=" + f(cfg.detector.irf_fwhm)));

        CsvTable st;
        st.comment = csv_comment(hash, "tau_ns:ns; dcp:1") + meta + " | observable=spin";
        st.columns = {"tau_ns", "dcp"};
        for (size_t i = 0; i < spin.taus.size(); ++i)
            st.rows.push_back({f(spin.taus[i]), f(spin.values[i])});
        write_csv(join(out_dir, "spin_dcp_B" + label + ".csv"), st);
    });
    return 0;
}

int cmd_fit(const RunConfig& cfg, const std::vector<std::string>& data_files,
            const std::string& out_dir) {
    if (data_files.empty()) throw SchemaError("no data files given to fit");
    ensure_outdir(out_dir);
    write_effective_config(cfg, out_dir);
    const std::uint64_t hash = cfg.hash();
    const int prec = cfg.output.precision;
    auto f = [&](double v) { return format_double(v, prec); };

    ConfigDoc report;
    CsvTable summary;
    summary.comment = csv_comment(
        hash, "file:label; B_T:T; converged,oscillation:bool; visibility:1; T_D,T_D_err:ns");
    summary.columns = {"file", "B_T", "converged", "visibility", "oscillation", "T_D", "T_D_err"};
    bool all_converged = true;

    for (const auto& path : data_files) {
        const CsvTable data = read_csv(path);
        const std::string stem = fs::path(path).stem().string();
        const std::vector<double> taus_all = data.numeric_column("tau_ns");
        const std::vector<double> vals_all = data.numeric_column(cfg.fit.observable);
        std::vector<double> weights_all;
        if (data.column_index("counts") >= 0) {
            for (double c : data.numeric_column("counts"))
                weights_all.push_back(1.0 / std::max(c, 1.0));
        }

        FitProblem prob;
        prob.model = cfg.fit.model == "g2_numeric" ? FitModel::g2_numeric : FitModel::dcp_damped;
        prob.free = cfg.fit.free;
        prob.bounds = cfg.fit.bounds;
        prob.base = cfg.params;
        prob.variant = cfg.variant;
        prob.first = cfg.herald;
        prob.second = cfg.fit.observable == "g2_cross" ? opposite(cfg.herald) : cfg.herald;
        for (size_t i = 0; i < taus_all.size(); ++i) {
            if (!std::isfinite(vals_all[i])) continue;  // masked rows
            prob.taus.push_back(taus_all[i]);
            prob.values.push_back(vals_all[i]);
            if (!weights_all.empty()) prob.weights.push_back(weights_all[i]);
        }
        if (prob.taus.empty()) throw SchemaError("'" + path + "' has no usable points");

        const std::string b_meta = meta_token(data.comment, "B_T");
        PhysicalParams file_params = cfg.params;
        if (!b_meta.empty()) file_params.B = to_double(b_meta, "metadata B_T");
        prob.base = file_params;

        // Frequency seed from the curve's own spectrum, overridable per config.
        double delta2_seed = PhysicalConstants::hbar * file_params.omega2;
        try {
            const SpectrumResult s = fft_spectrum(Series{prob.taus, prob.values}, Window::hann);
            if (s.has_peak && s.peak_freq > 0.0)
                delta2_seed = PhysicalConstants::hbar * 2.0 * std::numbers::pi * s.peak_freq * 1e-3;
        } catch (const Error&) {
        }
        const double span = prob.taus.back() - prob.taus.front();
        std::map<std::string, double> init;
        for (const auto& name : prob.free) {
            auto it = cfg.fit.init.find(name);
            if (it != cfg.fit.init.end()) {
                init[name] = it->second;
            } else if (name == "A_V") {
                init[name] = std::clamp(std::abs(prob.values.front()), 0.1, 3.0);
            } else if (name == "T_D") {
                init[name] = std::clamp(span / 3.0, 0.5, 1e4);
            } else if (name == "theta_B") {
                init[name] = 0.4;
            } else if (name == "delta2") {
                init[name] = delta2_seed;
            } else if (const ParamField* pf = find_param_field(name)) {
                init[name] = file_params.*(pf->member);
            }
        }

        // The mixing angle is the one free parameter without a data-driven
        // seed, and curves dominated by their decay baseline have a shallow
        // false minimum at the pi/2 wall. Unless the config pins the seed,
        // descend from a short ladder of angles and keep the best attempt:
        // converged beats not, then lower weighted residual.
        FitResult res;
        const bool ladder = prob.model == FitModel::dcp_damped &&
                            std::find(prob.free.begin(), prob.free.end(), "theta_B") !=
                                prob.free.end() &&
                            cfg.fit.init.find("theta_B") == cfg.fit.init.end();
        if (!ladder) {
            res = fit(prob, init);
        } else {
            bool have = false;
            std::exception_ptr first_err;
            for (double th : {0.4, 0.9, 1.3}) {
                auto start = init;
                start["theta_B"] = th;
                try {
                    FitResult r = fit(prob, start);
                    const bool better =
                        !have || (r.converged && !res.converged) ||
                        (r.converged == res.converged && r.residual_norm < res.residual_norm);
                    if (better) {
                        res = r;
                        have = true;
                    }
                } catch (const Error&) {
                    if (!first_err) first_err = std::current_exception();
                }
            }
            if (!have) std::rethrow_exception(first_err);
        }
        all_converged = all_converged && res.converged;

        const auto model_curve = eval_model(prob, res.estimates);
        CsvTable resid;
        resid.comment = csv_comment(hash, "tau_ns:ns; data,model,residual:1") +
                        " | source=" + stem;
        resid.columns = {"tau_ns", "data", "model", "residual"};
        for (size_t i = 0; i < prob.taus.size(); ++i)
            resid.rows.push_back({f(prob.taus[i]), f(prob.values[i]), f(model_curve[i]),
                                  f(prob.values[i] - model_curve[i])});
        write_csv(join(out_dir, "residuals_" + stem + ".csv"), resid);

        const VisibilityEstimate vis = visibility_estimate(Series{prob.taus, prob.values});
        double t_d = std::numeric_limits<double>::quiet_NaN();
        double t_d_err = std::numeric_limits<double>::quiet_NaN();
        const auto it_td = res.estimates.find("T_D");
        if (it_td != res.estimates.end()) {
            t_d = it_td->second;
            const auto pos = std::find(prob.free.begin(), prob.free.end(), std::string("T_D"));
            t_d_err = res.std_errors[static_cast<size_t>(pos - prob.free.begin())];
        } else if (vis.fit.estimates.count("T_D")) {
            t_d = vis.fit.estimates.at("T_D");
            t_d_err = vis.fit.std_errors.size() > 1 ? vis.fit.std_errors[1]
                                                    : std::numeric_limits<double>::quiet_NaN();
        }

        const std::string sec = "fit " + stem;
        report.set(sec, "source", path);
        report.set(sec, "converged", res.converged ? "true" : "false");
        report.set(sec, "n_iter", std::to_string(res.n_iter));
        report.set(sec, "residual_norm", format_double(res.residual_norm, 17));
        report.set(sec, "grad_norm", format_double(res.grad_norm, 17));
        for (size_t j = 0; j < prob.free.size(); ++j) {
            report.set(sec, "est_" + prob.free[j],
                       format_double(res.estimates.at(prob.free[j]), 17));
            report.set(sec, "err_" + prob.free[j], format_double(res.std_errors[j], 17));
        }
        report.set(sec, "visibility", f(vis.value));
        report.set(sec, "oscillation", vis.oscillation ? "true" : "false");
        if (!b_meta.empty()) report.set(sec, "B_T", b_meta);

        summary.rows.push_back({stem, b_meta.empty() ? "nan" : b_meta,
                                res.converged ? "true" : "false", f(vis.value),
                                vis.oscillation ? "true" : "false", f(t_d), f(t_d_err)});
    }

    report.save(join(out_dir, "fit_report.cfg"));
    write_csv(join(out_dir, "fit_summary.csv"), summary);
    return all_converged ? 0 : static_cast<int>(ExitCode::fit);
}

int cmd_mc(const RunConfig& cfg, const std::string& out_dir) {
    require_b_sweep(cfg);
    ensure_outdir(out_dir);
    write_effective_config(cfg, out_dir);
    const std::uint64_t hash = cfg.hash();
    const int prec = cfg.output.precision;
    auto f = [&](double v) { return format_double(v, prec); };

    PhysicalParams p = cfg.params;
    p.B = cfg.grid.B_list.front();
    validate_params(p);
    const LevelModel m = build_level_model(p, cfg.variant);
    const Liouvillian L = build_liouvillian(m);
    const Eigen::MatrixXcd rho_ss = steady_state(L);

    int ch_pol[2] = {-1, -1};  // channel index of emit_R, emit_L
    for (size_t k = 0; k < m.channels.size(); ++k) {
        if (m.channels[k].label == "emit_R") ch_pol[0] = static_cast<int>(k);
        if (m.channels[k].label == "emit_L") ch_pol[1] = static_cast<int>(k);
    }

    const std::size_t nbins = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(cfg.mc.tau_max / cfg.mc.bin_width)));
    const double dt = cfg.mc.bin_width;
    const double span = static_cast<double>(nbins) * dt;

    std::vector<std::vector<JumpEvent>> records(cfg.mc.n_traj);
    McOptions opt;
    opt.t_max = cfg.mc.t_max;
    opt.n_traj = cfg.mc.n_traj;
    opt.seed = cfg.run.seed;
    opt.jobs = cfg.run.jobs;
    if (cfg.mc.n_traj > 0) {
        mc_trajectories(m, rho_ss, opt,
                        [&](std::uint64_t i, const std::vector<JumpEvent>& jumps) {
                            records[i] = jumps;
                        });
    }

    // Ordered photon pairs binned by delay; first index is the first photon.
    std::array<std::vector<std::uint64_t>, 4> hist;
    for (auto& h : hist) h.assign(nbins, 0);
    std::uint64_t total_pairs = 0;
    std::vector<std::pair<double, int>> photons;
    for (const auto& jumps : records) {
        photons.clear();
        for (const auto& j : jumps) {
            if (j.channel == ch_pol[0]) photons.emplace_back(j.t, 0);
            else if (j.channel == ch_pol[1]) photons.emplace_back(j.t, 1);
        }
        for (size_t i = 0; i < photons.size(); ++i) {
            for (size_t j = i + 1; j < photons.size(); ++j) {
                const double delay = photons[j].first - photons[i].first;
                if (delay >= span) break;
                hist[static_cast<size_t>(photons[i].second * 2 + photons[j].second)]
                    [static_cast<size_t>(delay / dt)]++;
                ++total_pairs;
            }
        }
    }

    // Regression-theorem prediction on half-bin points for Simpson averaging.
    std::vector<double> fine(2 * nbins + 1);
    for (size_t i = 0; i < fine.size(); ++i) fine[i] = 0.5 * dt * static_cast<double>(i);
    const CorrelationCurve curve_R = g2_polarized(m, Pol::R, fine);
    const CorrelationCurve curve_L = g2_polarized(m, Pol::L, fine);
    const double rate[2] = {curve_R.rate_par, curve_L.rate_par};
    const std::vector<double>* g2_of[4] = {&curve_R.g2_par, &curve_R.g2_cross,
                                           &curve_L.g2_cross, &curve_L.g2_par};

    const char* pair_names[4] = {"RR", "RL", "LR", "LL"};
    ConfigDoc mc_report;
    mc_report.set("mc", "n_traj", std::to_string(cfg.mc.n_traj));
    mc_report.set("mc", "total_pairs", std::to_string(total_pairs));
    const bool insufficient = cfg.mc.n_traj == 0 || total_pairs == 0;
    mc_report.set("mc", "insufficient_statistics", insufficient ? "true" : "false");

    double global_max_dev = 0.0;
    for (int pr = 0; pr < 4; ++pr) {
        const double r1 = rate[pr / 2];
        const double r2 = rate[pr % 2];
        CsvTable t;
        t.comment = csv_comment(hash, "tau_lo_ns,tau_hi_ns:ns; count:1; expected:1; sigma_dev:1") +
                    std::string(" | pair=") + pair_names[pr] +
                    " | B_T=" + format_double(p.B, 17);
        t.columns = {"tau_lo_ns", "tau_hi_ns", "count", "expected", "sigma_dev"};
        double max_dev = 0.0;
        for (size_t k = 0; k < nbins; ++k) {
            auto integrand = [&](size_t fi) {
                return (*g2_of[pr])[fi] * (cfg.mc.t_max - fine[fi]);
            };
            const double integral =
                dt / 6.0 * (integrand(2 * k) + 4.0 * integrand(2 * k + 1) + integrand(2 * k + 2));
            const double expected =
                static_cast<double>(cfg.mc.n_traj) * r1 * r2 * integral;
            double dev = 0.0;
            if (expected > 0.0)
                dev = (static_cast<double>(hist[static_cast<size_t>(pr)][k]) - expected) /
                      std::sqrt(expected);
            max_dev = std::max(max_dev, std::abs(dev));
            t.rows.push_back({f(fine[2 * k]), f(fine[2 * k + 2]),
                              std::to_string(hist[static_cast<size_t>(pr)][k]), f(expected),
                              f(dev)});
        }
        global_max_dev = std::max(global_max_dev, max_dev);
        mc_report.set("mc", std::string("max_sigma_dev_") + pair_names[pr], f(max_dev));
        write_csv(join(out_dir, std::string("pairs_") + pair_names[pr] + ".csv"), t);
    }
    mc_report.set("mc", "max_sigma_dev", f(global_max_dev));
    mc_report.save(join(out_dir, "mc_report.cfg"));

    CsvTable jumps_csv;
    jumps_csv.comment =
        csv_comment(hash, "traj:index; t_ns:ns; channel:label") + " | seed=" +
        std::to_string(cfg.run.seed);
    jumps_csv.columns = {"traj", "t_ns", "channel"};
    std::uint64_t rows = 0;
    for (std::uint64_t i = 0; i < records.size() && rows < cfg.mc.max_jump_rows; ++i) {
        for (const auto& j : records[i]) {
            if (rows++ >= cfg.mc.max_jump_rows) break;
            jumps_csv.rows.push_back({std::to_string(i), format_double(j.t, 17),
                                      m.channels[static_cast<size_t>(j.channel)].label});
        }
    }
    write_csv(join(out_dir, "jumps.csv"), jumps_csv);
    return 0;
}

}  // namespace qd
