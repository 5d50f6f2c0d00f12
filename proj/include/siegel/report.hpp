#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace siegel {

// One lemma/identity check: parameters, both sides, bound, margin, verdict.
// report_only records never fail a suite.
struct VerificationReport {
    enum class Verdict { pass, fail, report_only };

    std::string check_id; // e.g. "lemma3.1/D=7/n=100/l=3"
    std::vector<std::pair<std::string, std::string>> params;
    double lhs = 0.0;
    double rhs = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    Verdict verdict = Verdict::report_only;

    bool failed() const { return verdict == Verdict::fail; }
};

inline const char* verdict_name(VerificationReport::Verdict v) {
    switch (v) {
    case VerificationReport::Verdict::pass: return "pass";
    case VerificationReport::Verdict::fail: return "fail";
    default: return "report_only";
    }
}

// Fixed 12-significant-digit float formatting: rerunning a suite must
// produce byte-identical reports.
inline std::string format_real(double x) {
    if (x == 0.0) x = 0.0; // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline std::string make_check_id(
    const std::string& base,
    const std::vector<std::pair<std::string, std::string>>& params) {
    std::string id = base;
    for (const auto& kv : params) {
        id += '/';
        id += kv.first;
        id += '=';
        id += kv.second;
    }
    return id;
}

inline VerificationReport make_report(
    const std::string& base,
    std::vector<std::pair<std::string, std::string>> params,
    double lhs, double rhs, double bound, double margin,
    VerificationReport::Verdict verdict) {
    VerificationReport r;
    r.check_id = make_check_id(base, params);
    r.params = std::move(params);
    r.lhs = lhs;
    r.rhs = rhs;
    r.bound = bound;
    r.margin = margin;
    r.verdict = verdict;
    return r;
}

// margin >= 0 <=> pass, for bounded checks
inline VerificationReport::Verdict verdict_from_margin(double margin) {
    return margin >= 0 ? VerificationReport::Verdict::pass
                       : VerificationReport::Verdict::fail;
}

} // namespace siegel
