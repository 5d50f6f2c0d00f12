#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siegel/report.hpp"

namespace siegel::driver {

enum class Suite { identities, bounds, characters, quadforms, kernels, lfuncs, all };
enum class SignFilter { neg, pos, both };
enum class OutputFormat { json, csv };

struct RunConfig {
    Suite suite = Suite::all;
    int64_t disc_min = -50;
    int64_t disc_max = 50;
    SignFilter sign = SignFilter::both;
    std::vector<int64_t> M_grid = {1, 3, 5, 8, 12};
    std::vector<int> kappa_grid = {2, 3};
    std::vector<int64_t> N_grid = {6, 8};
    std::vector<int64_t> T_grid = {4};
    std::string out_path; // empty = stdout
    OutputFormat format = OutputFormat::json;
    int workers = 0;      // 0 = hardware concurrency
    int64_t sieve_limit = 0; // 0 = default / SIEGEL_LAB_SIEVE_LIMIT

    void validate() const; // throws std::invalid_argument
};

Suite parse_suite(const std::string& s);
SignFilter parse_sign(const std::string& s);
OutputFormat parse_format(const std::string& s);

// Fundamental discriminants in [disc_min, disc_max] passing the sign filter.
std::vector<int64_t> fundamental_range(const RunConfig& cfg);

// Runs the selected suites over the config grid; reports come back sorted by
// check_id so that parallel and serial runs emit identical bytes.
std::vector<VerificationReport> run_verify(const RunConfig& cfg);

std::string serialize_reports(const std::vector<VerificationReport>& reports,
                              OutputFormat format);

struct ScanRow {
    int64_t delta = 0;
    int64_t h = 0;
    double l_one = 0.0;
    double inv_a_or_log_eta = 0.0; // sum 1/a for delta < 0, log eta for > 0
    double pv_ratio = 0.0;         // max |S| / (sqrt(D) log D)
    int64_t p0 = 0;
    int64_t z0_count = 0;
};

struct ScanResult {
    std::vector<ScanRow> rows; // sorted by delta
    int64_t min_delta = 0;     // argmin of L(1,chi) sqrt(D)/log D
    double min_normalized_l = 0.0;
};

ScanResult run_scan(const RunConfig& cfg);
std::string serialize_scan(const ScanResult& scan, OutputFormat format);

// Kernel table emission: B_l rows, weight rows, mass footer.
std::string run_kernel_table(int kappa, int64_t n);

// exit 0 iff no fail verdicts.
int exit_status(const std::vector<VerificationReport>& reports);

} // namespace siegel::driver
