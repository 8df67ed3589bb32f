#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "robin/beta_table.hpp"
#include "robin/colossally_abundant.hpp"
#include "robin/exact.hpp"
#include "robin/exceptions.hpp"
#include "robin/mertens.hpp"
#include "robin/sigma_sieve.hpp"
#include "robin/version.hpp"

namespace robin {

using Json = nlohmann::ordered_json;

/// Provenance block embedded into every artifact.  Scheduling knobs
/// (thread count) are deliberately left out so that identical inputs give
/// byte-identical artifacts at any parallelism.
struct Provenance {
    int precision_digits = kDefaultDigits;
    std::map<std::string, uint64_t> caps;
    std::string command;

    Json to_json() const {
        Json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["precision_digits"] = precision_digits;
        Json c = Json::object();
        for (const auto& [k, v] : caps) c[k] = v;
        j["caps"] = c;
        j["command"] = command;
        j["input_digest"] = fnv1a64_hex(command);
        return j;
    }
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw std::runtime_error("short write to " + path);
}

// ---------------------------------------------------------------------------
// Exceptions artifact: CSV + JSON sidecar.

inline std::string exceptions_csv_header() { return "n,omega,factorization,f_log,rhs_log\n"; }

inline std::string exceptions_csv_row(const ExceptionRecord& rec) {
    std::string row = rec.n.get_str();
    row += ",";
    row += std::to_string(rec.omega);
    row += ",";
    row += rec.factorization.to_string();
    row += ",";
    row += rec.f_log.midpoint_string(20);
    row += ",";
    row += rec.rhs_log ? rec.rhs_log->midpoint_string(20) : "nan";
    row += "\n";
    return row;
}

inline Json exceptions_sidecar_json(const BetaTable& table, const EnumerationSummary& summary,
                                    const Provenance& prov, bool truncated,
                                    const std::string& resume_token) {
    Json j;
    j["provenance"] = prov.to_json();
    j["epsilon"] = table.eps.get_num().get_str() + "/" + table.eps.get_den().get_str();
    j["beta_max"] = table.beta_max;
    j["table_digest"] = table.digest();
    j["max_n_alpha_floor"] = summary.max_n_alpha_floor;
    j["total_exceptions"] = summary.total;
    Json per = Json::array();
    for (size_t a = 0; a < summary.per_alpha.size(); ++a) {
        Json e;
        e["alpha"] = a + 1;
        e["count"] = summary.per_alpha[a];
        per.push_back(e);
    }
    j["per_alpha"] = per;
    if (truncated) {
        j["truncated"] = true;
        j["resume_token"] = resume_token;
    }
    return j;
}

// ---------------------------------------------------------------------------
// CA verification artifact: CSV + JSON summary.

inline std::string ca_report_csv_header() {
    return "index,loglog_n,sigma_ratio,rhs,margin,verdict\n";
}

inline std::string ca_report_csv_row(const CAVerifyRow& row) {
    std::string s = std::to_string(row.index);
    s += ",";
    s += row.loglog_n;
    s += ",";
    s += row.sigma_ratio;
    s += ",";
    s += row.rhs;
    s += ",";
    s += row.margin;
    s += ",";
    s += to_string(row.verdict);
    if (!row.in_theorem_domain) s += "(out-of-domain)";
    s += "\n";
    return s;
}

inline Json ca_summary_json(const CAVerifySummary& sum, double max_loglog,
                            const Provenance& prov) {
    Json j;
    j["provenance"] = prov.to_json();
    j["max_loglog_n"] = max_loglog;
    j["count"] = sum.count;
    j["holds"] = sum.holds;
    j["fails_above_5040"] = sum.fails_above_5040;
    j["fails_at_or_below_5040"] = sum.fails_at_or_below_5040;
    j["undecided"] = sum.undecided;
    if (sum.min_margin_set) {
        char lo[40], hi[40];
        snprintf(lo, sizeof lo, "%.17e", sum.min_margin_lo);
        snprintf(hi, sizeof hi, "%.17e", sum.min_margin_hi);
        j["min_margin_above_5040"] = Json{{"lo", lo}, {"hi", hi}};
        j["min_margin_index"] = sum.min_margin_index;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Range scan artifact.

inline Json range_report_json(const RangeReport& rep, const std::string& inequality,
                              const Provenance& prov) {
    Json j;
    j["provenance"] = prov.to_json();
    j["inequality"] = inequality;
    j["lo"] = rep.lo;
    j["hi"] = rep.hi;
    j["checked"] = rep.checked;
    j["violator_count"] = rep.violators.size();
    j["violators"] = rep.violators;
    j["min_margin"] = Json{{"lo", rep.min_margin.lo_string(20)},
                           {"hi", rep.min_margin.hi_string(20)},
                           {"n", rep.min_margin_n}};
    j["guard_band_escalations"] = rep.escalations;
    j["undecided"] = rep.undecided;
    return j;
}

inline std::string violators_csv(const RangeReport& rep) {
    std::string s = "n\n";
    for (uint64_t v : rep.violators) s += std::to_string(v) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// beta-max artifact.

inline Json beta_max_json(const BetaMaxResult& r, const ExactRatio& eps, const Provenance& prov) {
    Json j;
    j["provenance"] = prov.to_json();
    j["epsilon"] = eps.get_num().get_str() + "/" + eps.get_den().get_str();
    j["beta_max"] = r.beta_max;
    j["p_beta_max"] = r.p_beta_max;
    j["loglog_n_beta_max"] = Json{{"lo", r.loglog_n_beta_max.lo_string(20)},
                                  {"hi", r.loglog_n_beta_max.hi_string(20)},
                                  {"midpoint", r.loglog_n_beta_max.midpoint_string(20)}};
    j["logsum"] = Json{{"lo", r.state.logsum.lo_string(20)}, {"hi", r.state.logsum.hi_string(20)}};
    j["theta"] = Json{{"lo", r.state.theta.lo_string(20)}, {"hi", r.state.theta.hi_string(20)}};
    j["overshoot_checked"] = r.overshoot_checked;
    j["reversal_anomaly"] = r.reversal_anomaly;
    if (r.reversal_anomaly) j["reversal_beta"] = r.reversal_beta;
    return j;
}

} // namespace robin
