#include "spinproj/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spinproj/projection.hpp"

namespace spinproj {

std::vector<double> make_grid(double lo, double hi, double step) {
    if (step <= 0.0)
        throw DomainError("make_grid: step must be positive");
    std::vector<double> grid;
    for (double t = lo; t <= hi + 1e-9; t += step)
        grid.push_back(std::min(t, hi));
    if (!grid.empty() && hi - grid.back() > 1e-9)
        grid.push_back(hi);
    return grid;
}

namespace {

struct ScanState {
    std::optional<CUHFSolution> warm;
    CUHFSolution uhf;
    int evaluations = 0;
};

ScanPoint evaluate_point(double target, const ScanConfig& cfg,
                         const SystemSpec& spec, const IntegralSet& ints,
                         ScanState& st) {
    ScanPoint pt;
    pt.s2_target = target;

    std::optional<CUHFSolution> sol;
    std::string error;
    const std::optional<CUHFSolution> uhf_warm = st.uhf;
    const std::optional<CUHFSolution> prev_warm = st.warm;
    for (const auto* w : {&prev_warm, &uhf_warm}) {
        ++st.evaluations;
        try {
            CUHFSolution cand = cuhf_solve(ints, spec, target, *w, cfg.scf);
            if (!sol || cand.energy < sol->energy)
                sol = cand;
        } catch (const std::exception& e) {
            error = e.what();
        }
    }
    if (!sol) {
        pt.ok = false;
        pt.message = error;
        return pt;
    }
    if (st.warm && std::abs(sol->lambda - st.warm->lambda) > 1.0)
        pt.branch_switch = true;
    st.warm = sol;

    pt.e_cuhf = sol->energy;
    pt.lambda = sol->lambda;
    pt.s2_achieved = sol->s2_achieved;
    const Eigen::VectorXd gd = sol->g_occ.diagonal();
    pt.g_diag.assign(gd.data(), gd.data() + gd.size());

    try {
        const NociBasis basis = build_noci_basis(*sol, cfg.epsilon_pair);
        pt.k_eff = basis.k_eff;
        pt.m_unpaired = basis.m_unpaired;
        const NociSpectrum spec_out = solve_noci(basis, ints, cfg.noci);
        pt.effective_rank = spec_out.effective_rank;
        for (const auto& c : classify_states(spec_out)) {
            pt.noci_energies[c.ell] = c.energy;
            pt.s2_per_sector[c.ell] = c.s2;
            pt.contaminated = pt.contaminated || c.contaminated;
        }
        pt.ok = true;
    } catch (const std::exception& e) {
        pt.ok = false;
        pt.message = e.what();
    }
    return pt;
}

double point_ground(const ScanPoint& pt) {
    double e = 1e300;
    for (const auto& [ell, energy] : pt.noci_energies)
        e = std::min(e, energy);
    return e;
}

void finalize(SpinScan& scan) {
    scan.min_energy = 1e300;
    for (const auto& pt : scan.points) {
        if (!pt.ok)
            continue;
        const double e = point_ground(pt);
        if (e < scan.min_energy) {
            scan.min_energy = e;
            scan.min_target = pt.s2_target;
        }
    }
    if (scan.min_energy >= 1e300)
        throw ConvergenceError("scan: no grid point succeeded");
    if (scan.e_fci) {
        scan.capture_rhf = 100.0 * (scan.min_energy - scan.e_rhf)
                           / (*scan.e_fci - scan.e_rhf);
        scan.capture_uhf = 100.0 * (scan.min_energy - scan.e_uhf)
                           / (*scan.e_fci - scan.e_uhf);
    }
}

void compute_baselines(SpinScan& scan, const ScanConfig& cfg,
                       const SystemSpec& spec, const IntegralSet& ints,
                       ScanState& st) {
    st.uhf = uhf_ground(ints, spec, cfg.scf);
    scan.e_uhf = st.uhf.energy;
    scan.s2_uhf = st.uhf.s2_achieved;
    try {
        scan.e_rhf = cuhf_solve(ints, spec, 0.0, st.uhf, cfg.scf).energy;
    } catch (const std::exception&) {
        scan.e_rhf = rhf_scf(ints, spec, cfg.scf).energy;
    }
    if (spec.n_alpha == spec.n_beta) {
        // the lower of the closed-shell solvers is the honest closed-shell bound
        try {
            scan.e_rhf = std::min(scan.e_rhf, rhf_scf(ints, spec, cfg.scf).energy);
        } catch (const std::exception&) {
        }
    }
    if (cfg.with_fci) {
        try {
            FciOptions fopts;
            fopts.det_cap = cfg.fci_cap;
            const FciResult fci = solve_fci(spec, ints, cfg.fci_states, fopts);
            scan.e_fci = fci.energies.front();
        } catch (const SizeCapError&) {
            // FCI baseline skipped above the cap
        }
    }
}

std::vector<double> full_grid(const ScanConfig& cfg, const SystemSpec& spec) {
    if (!cfg.grid.empty())
        return cfg.grid;
    const double hi = cfg.interval_hi >= 0.0 ? cfg.interval_hi
                                             : 0.5 * spec.n_electrons();
    return make_grid(cfg.interval_lo, hi, cfg.step);
}

} // namespace

SpinScan run_scan(const ScanConfig& cfg, const SystemSpec& spec,
                  const IntegralSet& ints) {
    SpinScan scan;
    ScanState st;
    compute_baselines(scan, cfg, spec, ints, st);

    const auto grid = full_grid(cfg, spec);
    for (double target : grid)
        scan.points.push_back(evaluate_point(target, cfg, spec, ints, st));

    if (cfg.refine) {
        double best_t = 0.0, best_e = 1e300;
        for (const auto& pt : scan.points)
            if (pt.ok && point_ground(pt) < best_e) {
                best_e = point_ground(pt);
                best_t = pt.s2_target;
            }
        if (best_e < 1e300) {
            const double lo = std::max(grid.front(), best_t - cfg.refine_window);
            const double hi = std::min(grid.back(), best_t + cfg.refine_window);
            for (double t = lo; t <= hi + 1e-9; t += cfg.refine_step) {
                const bool seen = std::any_of(
                    scan.points.begin(), scan.points.end(),
                    [&](const ScanPoint& p) { return std::abs(p.s2_target - t) < 1e-9; });
                if (!seen)
                    scan.points.push_back(evaluate_point(t, cfg, spec, ints, st));
            }
            std::sort(scan.points.begin(), scan.points.end(),
                      [](const ScanPoint& a, const ScanPoint& b) {
                          return a.s2_target < b.s2_target;
                      });
        }
    }
    scan.cuhf_evaluations = st.evaluations;
    scan.intervals_processed = 1;
    finalize(scan);
    return scan;
}

SpinScan run_restricted_scan(const ScanConfig& cfg, const SystemSpec& spec,
                             const IntegralSet& ints) {
    SpinScan scan;
    ScanState st;
    compute_baselines(scan, cfg, spec, ints, st);

    const auto all = full_grid(cfg, spec);
    const int n_intervals = static_cast<int>(std::ceil(0.5 * spec.n_electrons()));
    double running_best = 1e300;
    std::size_t consumed = 0;
    for (int k = 0; k < n_intervals; ++k) {
        const double lo = k, hi = k + 1.0;
        double interval_best = 1e300;
        bool any = false;
        while (consumed < all.size() && all[consumed] <= hi + 1e-9) {
            const double t = all[consumed++];
            if (t < lo - 1e-9)
                continue;
            scan.points.push_back(evaluate_point(t, cfg, spec, ints, st));
            if (scan.points.back().ok) {
                interval_best = std::min(interval_best, point_ground(scan.points.back()));
                any = true;
            }
        }
        ++scan.intervals_processed;
        if (!any)
            continue;
        const double gain = running_best - interval_best;
        running_best = std::min(running_best, interval_best);
        if (k > 0 && gain <= cfg.de_tol) {
            scan.terminating_interval = k;
            break;
        }
    }
    scan.cuhf_evaluations = st.evaluations;
    scan.cuhf_evaluations_saved =
        2 * static_cast<int>(all.size()) - st.evaluations;
    finalize(scan);
    return scan;
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string render_csv(const SpinScan& scan) {
    std::size_t n_gdiag = 0;
    for (const auto& pt : scan.points)
        n_gdiag = std::max(n_gdiag, pt.g_diag.size());
    std::ostringstream out;
    out << "s2_target,lambda,e_cuhf,k_eff,spin_label,e_noci,s2_state";
    for (std::size_t i = 0; i < n_gdiag; ++i)
        out << ",g_diag_" << i;
    out << "\n";
    for (const auto& pt : scan.points) {
        if (!pt.ok)
            continue;
        for (const auto& [ell, energy] : pt.noci_energies) {
            out << fmt(pt.s2_target) << ',' << fmt(pt.lambda) << ','
                << fmt(pt.e_cuhf) << ',' << pt.k_eff << ',' << ell << ','
                << fmt(energy) << ',' << fmt(pt.s2_per_sector.at(ell));
            for (std::size_t i = 0; i < n_gdiag; ++i)
                out << ',' << (i < pt.g_diag.size() ? fmt(pt.g_diag[i]) : "");
            out << "\n";
        }
    }
    return out.str();
}

nlohmann::json render_json_obj(const SpinScan& scan) {
    nlohmann::json j;
    j["schema"] = "spinproj/1";
    j["baselines"] = {{"e_rhf", scan.e_rhf},
                      {"e_uhf", scan.e_uhf},
                      {"s2_uhf", scan.s2_uhf}};
    if (scan.e_fci)
        j["baselines"]["e_fci"] = *scan.e_fci;
    else
        j["baselines"]["e_fci"] = nullptr;
    j["minimum"] = {{"s2_target", scan.min_target}, {"e_noci", scan.min_energy}};
    if (scan.capture_rhf) {
        j["correlation_capture_percent"] = {{"rhf_baseline", *scan.capture_rhf},
                                            {"uhf_baseline", *scan.capture_uhf}};
    } else {
        j["correlation_capture_percent"] = nullptr;
    }
    j["restricted"] = {{"intervals_processed", scan.intervals_processed},
                       {"terminating_interval", scan.terminating_interval},
                       {"cuhf_evaluations", scan.cuhf_evaluations},
                       {"cuhf_evaluations_saved", scan.cuhf_evaluations_saved}};
    j["points"] = nlohmann::json::array();
    for (const auto& pt : scan.points) {
        nlohmann::json p;
        p["s2_target"] = pt.s2_target;
        p["ok"] = pt.ok;
        if (!pt.ok) {
            p["message"] = pt.message;
            j["points"].push_back(p);
            continue;
        }
        p["e_cuhf"] = pt.e_cuhf;
        p["lambda"] = pt.lambda;
        p["s2_achieved"] = pt.s2_achieved;
        p["k_eff"] = pt.k_eff;
        p["m_unpaired"] = pt.m_unpaired;
        p["effective_rank"] = pt.effective_rank;
        p["branch_switch"] = pt.branch_switch;
        p["contaminated"] = pt.contaminated;
        p["g_diag"] = pt.g_diag;
        p["noci"] = nlohmann::json::array();
        for (const auto& [ell, energy] : pt.noci_energies) {
            p["noci"].push_back({{"spin", ell},
                                 {"e_noci", energy},
                                 {"s2", pt.s2_per_sector.at(ell)},
                                 {"e_noci_pt2", nullptr}});
        }
        j["points"].push_back(p);
    }
    return j;
}

} // namespace

std::string render_report(const SpinScan& scan, ReportFormat format) {
    if (format == ReportFormat::Csv)
        return render_csv(scan);
    return render_json_obj(scan).dump(1) + "\n";
}

void emit_report(const SpinScan& scan, ReportFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("emit_report: cannot open output path " + path);
    out << render_report(scan, format);
    if (!out)
        throw ParseError("emit_report: write failed for " + path);
}

} // namespace spinproj
