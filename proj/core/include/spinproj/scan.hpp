#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinproj/fci.hpp"
#include "spinproj/noci.hpp"
#include "spinproj/scf.hpp"

namespace spinproj {

enum class ScanMode { Full, Restricted };
enum class ReportFormat { Csv, Json };

struct ScanConfig {
    std::vector<double> grid;      ///< explicit targets; else interval+step
    double interval_lo = 0.0;
    double interval_hi = -1.0;     ///< < 0 means "up to N/2"
    double step = 0.05;
    bool refine = false;           ///< refine +-window at refine_step
    double refine_step = 0.01;
    double refine_window = 0.1;
    double epsilon_pair = 1e-6;
    ScfOptions scf;
    NociOptions noci;
    int n_states = 6;
    ScanMode mode = ScanMode::Full;
    double de_tol = 1e-6;          ///< restricted-scan gain threshold
    bool with_fci = true;          ///< compute FCI baseline when under cap
    std::size_t fci_cap = 2'000'000;
    int fci_states = 4;
};

struct ScanPoint {
    double s2_target = 0.0;
    bool ok = false;
    std::string message;           ///< failure reason when !ok
    double e_cuhf = 0.0;
    double lambda = 0.0;
    double s2_achieved = 0.0;
    int k_eff = 0;
    int m_unpaired = 0;
    int effective_rank = 0;
    std::map<int, double> noci_energies;  ///< spin label -> lowest energy
    std::map<int, double> s2_per_sector;  ///< spin label -> achieved <S^2>
    std::vector<double> g_diag;
    bool branch_switch = false;
    bool contaminated = false;
};

struct SpinScan {
    std::vector<ScanPoint> points;
    double min_target = 0.0;
    double min_energy = 0.0;
    double e_rhf = 0.0;
    double e_uhf = 0.0;
    double s2_uhf = 0.0;
    std::optional<double> e_fci;
    /// capture % per baseline, when FCI is available
    std::optional<double> capture_rhf;
    std::optional<double> capture_uhf;
    /// restricted-mode bookkeeping
    int intervals_processed = 0;
    int terminating_interval = -1;
    int cuhf_evaluations = 0;
    int cuhf_evaluations_saved = 0;
};

SpinScan run_scan(const ScanConfig& cfg, const SystemSpec& spec,
                  const IntegralSet& ints);

/// Algorithm: process unit intervals in order while each one keeps lowering
/// the best NOCI energy by more than de_tol.
SpinScan run_restricted_scan(const ScanConfig& cfg, const SystemSpec& spec,
                             const IntegralSet& ints);

void emit_report(const SpinScan& scan, ReportFormat format, const std::string& path);
std::string render_report(const SpinScan& scan, ReportFormat format);

std::vector<double> make_grid(double lo, double hi, double step);

} // namespace spinproj
