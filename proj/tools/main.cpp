// siegel-lab: batch driver for the verification suites, discriminant scans,
// and kernel table emission.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "siegel/driver.hpp"

namespace {

int write_output(const std::string& path, const std::string& data) {
    if (path.empty()) {
        std::fputs(data.c_str(), stdout);
        return 0;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "error: cannot open output file '%s'\n", path.c_str());
        return 3;
    }
    f << data;
    if (!f.good()) {
        std::fprintf(stderr, "error: write failed for '%s'\n", path.c_str());
        return 3;
    }
    return 0;
}

struct Options {
    siegel::driver::RunConfig cfg;
    std::string suite = "all";
    std::string sign = "both";
    std::string format = "json";
    std::string config_path;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--suite", o.suite,
                    "identities|bounds|characters|quadforms|kernels|lfuncs|all");
    cmd->add_option("--disc-min", o.cfg.disc_min, "lower end of the discriminant range");
    cmd->add_option("--disc-max", o.cfg.disc_max, "upper end of the discriminant range");
    cmd->add_option("--sign", o.sign, "neg|pos|both");
    cmd->add_option("--M", o.cfg.M_grid, "engine M grid")->delimiter(',');
    cmd->add_option("--kappa", o.cfg.kappa_grid, "engine kappa grid")->delimiter(',');
    cmd->add_option("--N", o.cfg.N_grid, "engine N grid")->delimiter(',');
    cmd->add_option("--T", o.cfg.T_grid, "engine T grid")->delimiter(',');
    cmd->add_option("--out", o.cfg.out_path, "output path (default stdout)");
    cmd->add_option("--format", o.format, "json|csv");
    cmd->add_option("--workers", o.cfg.workers, "worker count (0 = hardware)");
    cmd->add_option("--config", o.config_path,
                    "flat key=value config file; flags override");
}

template <typename T>
std::vector<T> parse_list(const std::string& v) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(static_cast<T>(std::stoll(item)));
    return out;
}

// Flat key=value file with the same keys as the long flags; a flag given on
// the command line wins over the file.
void apply_config_file(CLI::App* cmd, Options& o) {
    std::ifstream f(o.config_path);
    if (!f) throw std::invalid_argument("cannot read config file: " + o.config_path);
    auto flag_given = [&](const char* name) { return cmd->count(name) > 0; };
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        size_t h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
            line.pop_back();
        size_t b = line.find_first_not_of(' ');
        if (b == std::string::npos) continue;
        line.erase(0, b);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "suite") { if (!flag_given("--suite")) o.suite = val; }
        else if (key == "disc-min") { if (!flag_given("--disc-min")) o.cfg.disc_min = std::stoll(val); }
        else if (key == "disc-max") { if (!flag_given("--disc-max")) o.cfg.disc_max = std::stoll(val); }
        else if (key == "sign") { if (!flag_given("--sign")) o.sign = val; }
        else if (key == "M") { if (!flag_given("--M")) o.cfg.M_grid = parse_list<int64_t>(val); }
        else if (key == "kappa") { if (!flag_given("--kappa")) o.cfg.kappa_grid = parse_list<int>(val); }
        else if (key == "N") { if (!flag_given("--N")) o.cfg.N_grid = parse_list<int64_t>(val); }
        else if (key == "T") { if (!flag_given("--T")) o.cfg.T_grid = parse_list<int64_t>(val); }
        else if (key == "out") { if (!flag_given("--out")) o.cfg.out_path = val; }
        else if (key == "format") { if (!flag_given("--format")) o.format = val; }
        else if (key == "workers") { if (!flag_given("--workers")) o.cfg.workers = std::stoi(val); }
        else throw std::invalid_argument("config line " + std::to_string(lineno) +
                                         ": unknown key '" + key + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"siegel-lab: identity and explicit-bound verification suites"};
    app.require_subcommand(1);

    Options o;
    auto* verify = app.add_subcommand("verify", "run verification suites");
    add_common(verify, o);
    auto* scan = app.add_subcommand("scan", "per-discriminant summary table");
    add_common(scan, o);
    auto* kernel = app.add_subcommand("kernel", "emit smoothing-kernel tables");
    add_common(kernel, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    CLI::App* active = verify->parsed() ? verify : (scan->parsed() ? scan : kernel);
    try {
        if (!o.config_path.empty()) apply_config_file(active, o);
        o.cfg.suite = siegel::driver::parse_suite(o.suite);
        o.cfg.sign = siegel::driver::parse_sign(o.sign);
        o.cfg.format = siegel::driver::parse_format(o.format);
        // a bare --disc-max bounds |delta| on both sides
        if (active->count("--disc-min") == 0 && o.cfg.disc_max > 0 &&
            o.cfg.disc_min == -50)
            o.cfg.disc_min = -o.cfg.disc_max;
        o.cfg.validate();

        if (verify->parsed()) {
            auto reports = siegel::driver::run_verify(o.cfg);
            int io = write_output(o.cfg.out_path,
                                  siegel::driver::serialize_reports(reports, o.cfg.format));
            if (io) return io;
            return siegel::driver::exit_status(reports);
        }
        if (scan->parsed()) {
            auto result = siegel::driver::run_scan(o.cfg);
            return write_output(o.cfg.out_path,
                                siegel::driver::serialize_scan(result, o.cfg.format));
        }
        if (kernel->parsed()) {
            int kappa = o.cfg.kappa_grid.front();
            int64_t n = o.cfg.N_grid.front();
            return write_output(o.cfg.out_path,
                                siegel::driver::run_kernel_table(kappa, n));
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
