#include "qdsim/runconfig.hpp"

#include <algorithm>
#include <cmath>

#include "qdsim/errors.hpp"

namespace qd {
namespace {

void check_known_sections(const ConfigDoc& doc) {
    static const std::vector<std::string> known = {"params", "model",  "grid", "detector",
                                                   "output", "run",    "mc",   "fit"};
    for (const auto& sec : doc.sections)
        if (std::find(known.begin(), known.end(), sec.name) == known.end())
            throw SchemaError("unknown config section [" + sec.name + "]");
}

void parse_params(const ConfigDoc& doc, PhysicalParams& p) {
    const auto* sec = doc.find("params");
    if (!sec) return;
    for (const auto& e : sec->entries) {
        const ParamField* f = find_param_field(e.key);
        if (!f) throw SchemaError("[params] has unknown key '" + e.key + "'");
        p.*(f->member) = to_double(e.value, "[params] " + e.key);
    }
}

void parse_model(const ConfigDoc& doc, RunConfig& rc) {
    const auto* sec = doc.find("model");
    if (!sec) return;
    for (const auto& e : sec->entries) {
        if (e.key == "variant") {
            rc.variant = parse_variant(e.value);
        } else if (e.key == "herald") {
            if (e.value == "R")
                rc.herald = Pol::R;
            else if (e.value == "L")
                rc.herald = Pol::L;
            else
                throw SchemaError("[model] herald must be R or L");
        } else {
            throw SchemaError("[model] has unknown key '" + e.key + "'");
        }
    }
}

void parse_grid(const ConfigDoc& doc, GridConfig& g) {
    const auto* sec = doc.find("grid");
    if (!sec) return;
    bool have_list = false, have_span = false;
    double b_min = 0.0, b_max = 0.0;
    long long b_points = 0;
    for (const auto& e : sec->entries) {
        if (e.key == "tau_max") {
            g.tau_max = to_double(e.value, "[grid] tau_max");
        } else if (e.key == "tau_points") {
            g.tau_points = static_cast<int>(to_int(e.value, "[grid] tau_points"));
        } else if (e.key == "B_list") {
            g.B_list.clear();
            for (const auto& item : split_list(e.value))
                g.B_list.push_back(to_double(item, "[grid] B_list"));
            have_list = true;
        } else if (e.key == "B_min") {
            b_min = to_double(e.value, "[grid] B_min");
            have_span = true;
        } else if (e.key == "B_max") {
            b_max = to_double(e.value, "[grid] B_max");
            have_span = true;
        } else if (e.key == "B_points") {
            b_points = to_int(e.value, "[grid] B_points");
            have_span = true;
        } else {
            throw SchemaError("[grid] has unknown key '" + e.key + "'");
        }
    }
    if (have_list && have_span)
        throw SchemaError("[grid] B_list and B_min/B_max/B_points are mutually exclusive");
    if (have_span) {
        if (b_points < 1) throw SchemaError("[grid] B_points must be >= 1");
        g.B_list.clear();
        for (long long i = 0; i < b_points; ++i) {
            const double f = b_points == 1 ? 0.0
                                           : static_cast<double>(i) /
                                                 static_cast<double>(b_points - 1);
            g.B_list.push_back(b_min + f * (b_max - b_min));
        }
    }
    if (!(g.tau_max > 0.0)) throw SchemaError("[grid] tau_max must be > 0");
    if (g.tau_points < 2) throw SchemaError("[grid] tau_points must be >= 2");
}

void parse_scalar_sections(const ConfigDoc& doc, RunConfig& rc) {
    if (const auto* sec = doc.find("detector")) {
        for (const auto& e : sec->entries) {
            if (e.key == "irf_fwhm")
                rc.detector.irf_fwhm = to_double(e.value, "[detector] irf_fwhm");
            else
                throw SchemaError("[detector] has unknown key '" + e.key + "'");
        }
        if (rc.detector.irf_fwhm < 0.0) throw SchemaError("[detector] irf_fwhm must be >= 0");
    }
    if (const auto* sec = doc.find("output")) {
        for (const auto& e : sec->entries) {
            if (e.key == "precision")
                rc.output.precision = static_cast<int>(to_int(e.value, "[output] precision"));
            else
                throw SchemaError("[output] has unknown key '" + e.key + "'");
        }
        if (rc.output.precision < 1 || rc.output.precision > 17)
            throw SchemaError("[output] precision must be in [1, 17]");
    }
    if (const auto* sec = doc.find("run")) {
        for (const auto& e : sec->entries) {
            if (e.key == "seed")
                rc.run.seed = static_cast<std::uint64_t>(to_int(e.value, "[run] seed"));
            else if (e.key == "jobs")
                rc.run.jobs = static_cast<int>(to_int(e.value, "[run] jobs"));
            else
                throw SchemaError("[run] has unknown key '" + e.key + "'");
        }
        if (rc.run.jobs < 1) throw SchemaError("[run] jobs must be >= 1");
    }
    if (const auto* sec = doc.find("mc")) {
        for (const auto& e : sec->entries) {
            if (e.key == "n_traj")
                rc.mc.n_traj = static_cast<std::uint64_t>(to_int(e.value, "[mc] n_traj"));
            else if (e.key == "t_max")
                rc.mc.t_max = to_double(e.value, "[mc] t_max");
            else if (e.key == "bin_width")
                rc.mc.bin_width = to_double(e.value, "[mc] bin_width");
            else if (e.key == "tau_max")
                rc.mc.tau_max = to_double(e.value, "[mc] tau_max");
            else if (e.key == "max_jump_rows")
                rc.mc.max_jump_rows =
                    static_cast<std::uint64_t>(to_int(e.value, "[mc] max_jump_rows"));
            else
                throw SchemaError("[mc] has unknown key '" + e.key + "'");
        }
        if (!(rc.mc.t_max > 0.0) || !(rc.mc.bin_width > 0.0) || !(rc.mc.tau_max > 0.0))
            throw SchemaError("[mc] t_max, bin_width, tau_max must be > 0");
        if (rc.mc.tau_max > rc.mc.t_max)
            throw SchemaError("[mc] tau_max cannot exceed t_max");
    }
}

void parse_fit(const ConfigDoc& doc, FitSection& f) {
    const auto* sec = doc.find("fit");
    if (!sec) return;
    std::map<std::string, double> lo, hi;
    for (const auto& e : sec->entries) {
        if (e.key == "model") {
            if (e.value != "dcp_damped" && e.value != "g2_numeric")
                throw SchemaError("[fit] model must be dcp_damped or g2_numeric");
            f.model = e.value;
        } else if (e.key == "free") {
            f.free = split_list(e.value);
            if (f.free.empty()) throw SchemaError("[fit] free list is empty");
        } else if (e.key == "observable") {
            f.observable = e.value;
        } else if (e.key.rfind("init_", 0) == 0) {
            f.init[e.key.substr(5)] = to_double(e.value, "[fit] " + e.key);
        } else if (e.key.rfind("lo_", 0) == 0) {
            lo[e.key.substr(3)] = to_double(e.value, "[fit] " + e.key);
        } else if (e.key.rfind("hi_", 0) == 0) {
            hi[e.key.substr(3)] = to_double(e.value, "[fit] " + e.key);
        } else {
            throw SchemaError("[fit] has unknown key '" + e.key + "'");
        }
    }
    for (const auto& kv : lo) {
        auto it = hi.find(kv.first);
        if (it == hi.end())
            throw SchemaError("[fit] lo_" + kv.first + " has no matching hi_" + kv.first);
        f.bounds[kv.first] = {kv.second, it->second};
        hi.erase(it);
    }
    if (!hi.empty())
        throw SchemaError("[fit] hi_" + hi.begin()->first + " has no matching lo_" +
                          hi.begin()->first);
}

std::string fmt17(double v) { return format_double(v, 17); }

}  // namespace

RunConfig RunConfig::from_doc(const ConfigDoc& doc) {
    check_known_sections(doc);
    RunConfig rc;
    parse_params(doc, rc.params);
    parse_model(doc, rc);
    parse_grid(doc, rc.grid);
    parse_scalar_sections(doc, rc);
    parse_fit(doc, rc.fit);
    validate_params(rc.params);
    return rc;
}

ConfigDoc RunConfig::to_doc() const {
    ConfigDoc doc;
    for (const auto& f : param_fields()) doc.set("params", f.name, fmt17(params.*(f.member)));
    doc.set("model", "variant", variant_name(variant));
    doc.set("model", "herald", pol_name(herald));
    doc.set("grid", "tau_max", fmt17(grid.tau_max));
    doc.set("grid", "tau_points", std::to_string(grid.tau_points));
    std::string blist;
    for (size_t i = 0; i < grid.B_list.size(); ++i)
        blist += (i ? ", " : "") + fmt17(grid.B_list[i]);
    doc.set("grid", "B_list", blist);
    doc.set("detector", "irf_fwhm", fmt17(detector.irf_fwhm));
    doc.set("output", "precision", std::to_string(output.precision));
    doc.set("run", "seed", std::to_string(run.seed));
    doc.set("run", "jobs", std::to_string(run.jobs));
    doc.set("mc", "n_traj", std::to_string(mc.n_traj));
    doc.set("mc", "t_max", fmt17(mc.t_max));
    doc.set("mc", "bin_width", fmt17(mc.bin_width));
    doc.set("mc", "tau_max", fmt17(mc.tau_max));
    doc.set("mc", "max_jump_rows", std::to_string(mc.max_jump_rows));
    doc.set("fit", "model", fit.model);
    std::string freelist;
    for (size_t i = 0; i < fit.free.size(); ++i) freelist += (i ? ", " : "") + fit.free[i];
    doc.set("fit", "free", freelist);
    doc.set("fit", "observable", fit.observable);
    for (const auto& kv : fit.init) doc.set("fit", "init_" + kv.first, fmt17(kv.second));
    for (const auto& kv : fit.bounds) {
        doc.set("fit", "lo_" + kv.first, fmt17(kv.second.first));
        doc.set("fit", "hi_" + kv.first, fmt17(kv.second.second));
    }
    return doc;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_doc().serialize()); }

std::vector<double> RunConfig::tau_grid() const {
    std::vector<double> taus(static_cast<size_t>(grid.tau_points));
    for (int i = 0; i < grid.tau_points; ++i)
        taus[static_cast<size_t>(i)] =
            grid.tau_max * static_cast<double>(i) / static_cast<double>(grid.tau_points - 1);
    return taus;
}

}  // namespace qd
