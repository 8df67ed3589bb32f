// Command-line front end for the Robin inequality toolkit.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "robin/robin.hpp"

namespace {

using robin::Json;

enum ExitCode : int {
    kOk = 0,
    kFinding = 1,   // verified failure finding (e.g. unexpected violator)
    kUsage = 2,     // usage or domain error
    kPrecision = 3, // precision exhaustion
    kCapacity = 4,  // resource cap refusal
};

struct GlobalOptions {
    int digits = robin::kDefaultDigits;
    int threads = robin::default_thread_count();
    std::string format = "human"; // human | json
    uint64_t scan_cap = 1'000'000'000;
    uint64_t enum_cap = 10'000'000;
    double loglog_budget = 20.0;
    std::string checkpoint_dir;
};

void apply_env_overrides(GlobalOptions& g) {
    if (const char* p = std::getenv("ROBINTOOL_PRECISION")) g.digits = std::atoi(p);
    if (const char* t = std::getenv("ROBINTOOL_THREADS")) g.threads = std::atoi(t);
}

void render_human(const Json& j, std::ostream& os, int indent = 0) {
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (v.is_object() || (v.is_array() && !v.empty() && v[0].is_object())) {
                os << pad << k << ":\n";
                render_human(v, os, indent + 1);
            } else if (v.is_array()) {
                os << pad << k << ": " << v.dump() << "\n";
            } else if (v.is_string()) {
                os << pad << k << ": " << v.get<std::string>() << "\n";
            } else {
                os << pad << k << ": " << v.dump() << "\n";
            }
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            render_human(v, os, indent);
            os << "\n";
        }
    } else {
        os << pad << j.dump() << "\n";
    }
}

void emit(const Json& j, const GlobalOptions& g) {
    if (g.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        render_human(j, std::cout);
}

robin::ExactRatio parse_epsilon(const std::string& text) {
    size_t slash = text.find('/');
    if (slash == std::string::npos)
        throw std::invalid_argument("epsilon must be given as P/Q, e.g. 1/1771560");
    mpz_class num(text.substr(0, slash));
    mpz_class den(text.substr(slash + 1));
    robin::ExactRatio eps = robin::make_ratio(num, den);
    if (eps <= 0 || eps >= 1) throw std::invalid_argument("epsilon must satisfy 0 < eps < 1");
    return eps;
}

Json interval_json(const robin::Interval& x) {
    return Json{{"lo", x.lo_string(20)}, {"hi", x.hi_string(20)}, {"midpoint", x.midpoint_string(20)}};
}

// --------------------------------------------------------------------------

int cmd_factor(const std::string& n_text, const GlobalOptions& g) {
    mpz_class n(n_text);
    robin::Factorization f = robin::factorize(n);
    Json j;
    j["n"] = n.get_str();
    j["factorization"] = f.to_string();
    j["omega"] = f.omega();
    j["sigma"] = robin::sigma(f).get_str();
    j["phi"] = robin::phi(f).get_str();
    j["sigma_over_n"] = robin::sigma_over_n(f).get_str();
    j["n_over_phi"] = robin::n_over_phi(f).get_str();
    j["lemma1_product"] = robin::lemma1_product(f).get_str();
    Json nu = Json::array();
    for (const auto& pp : f.factors())
        nu.push_back(Json{{"p", pp.prime.get_str()}, {"nu_p", pp.exponent}});
    j["p_adic_orders"] = nu;
    emit(j, g);
    return kOk;
}

int cmd_robin_single(const std::string& n_text, const GlobalOptions& g) {
    mpz_class n(n_text);
    robin::Factorization f = robin::factorize(n);
    robin::RobinResult r = robin::robin_check(f, g.digits);
    Json j;
    j["n"] = n.get_str();
    j["verdict"] = robin::to_string(r.verdict);
    j["in_theorem_domain"] = r.in_theorem_domain;
    j["lhs_log_sigma_over_n"] = interval_json(r.lhs_log);
    j["rhs_exp_gamma_loglog_n"] = interval_json(r.rhs);
    emit(j, g);
    return kOk;
}

int cmd_robin_range(uint64_t lo, uint64_t hi, const GlobalOptions& g, const std::string& out,
                    const std::string& violators_out) {
    robin::ScanOptions opt;
    opt.thread_count = g.threads;
    opt.cap = g.scan_cap;
    opt.digits = g.digits;
    robin::RangeReport rep = robin::robin_scan(lo, hi, opt);
    robin::Provenance prov;
    prov.precision_digits = g.digits;
    prov.caps["scan_cap"] = g.scan_cap;
    prov.command = "robin --range " + std::to_string(lo) + " " + std::to_string(hi);
    Json j = robin::range_report_json(rep, "sigma(n)/n < e^gamma log log n", prov);
    if (!out.empty()) robin::write_text_file(out, j.dump(2) + "\n");
    if (!violators_out.empty()) robin::write_text_file(violators_out, robin::violators_csv(rep));
    emit(j, g);
    bool unexpected = false;
    for (uint64_t v : rep.violators)
        if (v > 5040) unexpected = true;
    if (rep.undecided > 0) unexpected = true;
    return unexpected ? kFinding : kOk;
}

int cmd_beta_max(const std::string& eps_text, const GlobalOptions& g, uint64_t segment_size,
                 bool resume, const std::string& out) {
    robin::ExactRatio eps = parse_epsilon(eps_text);
    robin::SieveConfig cfg;
    cfg.segment_size = segment_size;
    cfg.thread_count = g.threads;
    cfg.checkpoint_every_segments = 16;
    if (!g.checkpoint_dir.empty()) {
        std::filesystem::create_directories(g.checkpoint_dir);
        cfg.checkpoint_path = std::filesystem::path(g.checkpoint_dir) /
                              ("beta_" + eps.get_num().get_str() + "_" + eps.get_den().get_str() +
                               ".ckpt");
    }
    robin::FindBetaMaxOptions opt;
    opt.resume = resume;
    robin::BetaMaxResult r = robin::find_beta_max(eps, cfg, g.digits, opt);
    robin::Provenance prov;
    prov.precision_digits = g.digits;
    prov.command = "beta-max --epsilon " + eps.get_num().get_str() + "/" +
                   eps.get_den().get_str() + " --segment-size " + std::to_string(segment_size);
    Json j = robin::beta_max_json(r, eps, prov);
    if (!out.empty()) robin::write_text_file(out, j.dump(2) + "\n");
    emit(j, g);
    return r.reversal_anomaly ? kFinding : kOk;
}

int cmd_exceptions(const std::string& eps_text, const GlobalOptions& g, const std::string& out,
                   std::string sidecar) {
    robin::ExactRatio eps = parse_epsilon(eps_text);
    robin::BetaTable table = robin::build_beta_table(eps, g.digits);
    robin::EnumerationConfig cfg;
    cfg.thread_count = g.threads;
    cfg.value_cap = g.enum_cap;
    if (sidecar.empty()) sidecar = out + ".json";
    robin::Provenance prov;
    prov.precision_digits = g.digits;
    prov.caps["enumeration_cap"] = g.enum_cap;
    prov.command = "exceptions --epsilon " + eps.get_num().get_str() + "/" +
                   eps.get_den().get_str();

    std::string csv = robin::exceptions_csv_header();
    bool truncated = false;
    std::string token;
    robin::EnumerationSummary summary;
    try {
        summary = robin::enumerate_exceptions(
            table, cfg, [&](const robin::ExceptionRecord& rec) { csv += robin::exceptions_csv_row(rec); });
    } catch (const robin::CapacityError& e) {
        truncated = true;
        token = e.what();
        robin::write_text_file(out, csv);
        Json side = robin::exceptions_sidecar_json(table, summary, prov, truncated, token);
        robin::write_text_file(sidecar, side.dump(2) + "\n");
        throw;
    }
    robin::write_text_file(out, csv);
    Json side = robin::exceptions_sidecar_json(table, summary, prov, false, "");
    robin::write_text_file(sidecar, side.dump(2) + "\n");
    emit(side, g);
    return kOk;
}

int cmd_ca(double max_loglog, bool do_gap_check, uint64_t gap_limit, const GlobalOptions& g,
           const std::string& report_path, std::string summary_path) {
    robin::CAVerifyOptions opt;
    opt.thread_count = g.threads;
    opt.sequence.digits = g.digits;
    robin::Provenance prov;
    prov.precision_digits = g.digits;
    prov.caps["loglog_budget"] = static_cast<uint64_t>(g.loglog_budget);
    prov.command = "ca --max-loglog " + std::to_string(max_loglog);

    std::ofstream report;
    if (!report_path.empty()) {
        report.open(report_path, std::ios::binary | std::ios::trunc);
        if (!report) throw std::runtime_error("cannot open " + report_path);
        report << robin::ca_report_csv_header();
    }
    robin::CAVerifySummary sum = robin::verify_robin_on_ca(
        max_loglog, opt, [&](const robin::CAVerifyRow& row) {
            if (report.is_open()) report << robin::ca_report_csv_row(row);
        });
    if (report.is_open() && !report.flush())
        throw std::runtime_error("short write to " + report_path);

    Json j = robin::ca_summary_json(sum, max_loglog, prov);

    bool finding = sum.fails_above_5040 > 0 || sum.undecided > 0;
    if (do_gap_check) {
        // Consecutive CA pairs with the upper element within the limit.
        std::vector<mpz_class> values;
        robin::CAOptions seq_opt;
        seq_opt.digits = g.digits;
        double gap_loglog = std::log(std::log(static_cast<double>(gap_limit))) + 0.01;
        robin::ca_sequence(gap_loglog, seq_opt,
                           [&](const robin::CANumber&, const std::vector<robin::CAGroup>& groups) {
                               values.push_back(robin::ca_value(groups));
                           });
        Json gaps = Json::array();
        robin::ScanOptions scan_opt;
        scan_opt.thread_count = g.threads;
        scan_opt.digits = g.digits;
        for (size_t i = 0; i + 1 < values.size(); ++i) {
            if (values[i + 1] > gap_limit) break;
            robin::GapReport rep = robin::gap_check(values[i], values[i + 1], gap_limit, scan_opt);
            Json e;
            e["n1"] = rep.n1.get_str();
            e["n2"] = rep.n2.get_str();
            e["checked"] = rep.checked;
            e["violators_above_5040"] = rep.violators_above_5040;
            e["undecided"] = rep.undecided;
            gaps.push_back(e);
            if (!rep.violators_above_5040.empty() || rep.undecided > 0) finding = true;
        }
        j["gap_checks"] = gaps;
    }
    if (summary_path.empty() && !report_path.empty()) summary_path = report_path + ".json";
    if (!summary_path.empty()) robin::write_text_file(summary_path, j.dump(2) + "\n");
    emit(j, g);
    return finding ? kFinding : kOk;
}

int cmd_classify(const std::string& n_text, const std::string& factored, const GlobalOptions& g) {
    robin::Factorization f =
        factored.empty() ? robin::factorize(mpz_class(n_text)) : robin::Factorization::parse(factored);
    robin::FamilyVerdict v = robin::classify(f, g.digits);
    Json j;
    j["n"] = f.to_string();
    j["guaranteed"] = v.guaranteed;
    j["witnesses"] = v.witnesses;
    j["nu2"] = v.nu2;
    j["nu3"] = v.nu3;
    j["nu5"] = v.nu5;
    j["nu7"] = v.nu7;
    j["nu11"] = v.nu11;
    j["nu2_threshold_real"] = v.nu2_threshold_real;
    j["nu2_threshold_ceiled"] = v.nu2_threshold_ceiled;
    emit(j, g);
    return kOk;
}

int cmd_constants(const GlobalOptions& g) {
    robin::ConstantsReport rep = robin::verify_proof_constants(g.digits);
    Json j;
    Json checks = Json::array();
    for (const auto& c : rep.checks)
        checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = checks;
    j["all_pass"] = rep.all_pass;
    emit(j, g);
    return rep.all_pass ? kOk : kFinding;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact and certified computations around Robin's inequality"};
    app.set_version_flag("--version", std::string(robin::kToolName) + " " + robin::kToolVersion);
    app.require_subcommand(1);

    GlobalOptions g;
    apply_env_overrides(g);
    app.add_option("--digits", g.digits, "working precision in decimal digits")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
    app.add_option("--format", g.format, "output format: human | json")
        ->check(CLI::IsMember({"human", "json"}))
        ->capture_default_str();
    app.add_option("--scan-cap", g.scan_cap, "largest allowed bulk-scan bound")
        ->capture_default_str();
    app.add_option("--enum-cap", g.enum_cap, "largest allowed n_alpha for enumeration")
        ->capture_default_str();
    app.add_option("--checkpoint-dir", g.checkpoint_dir, "directory for checkpoint files");

    // factor
    auto* factor = app.add_subcommand("factor", "factorization and divisor ratios");
    std::string factor_n;
    factor->add_option("n", factor_n, "positive integer")->required();

    // robin
    auto* robin_cmd = app.add_subcommand("robin", "Robin inequality verdicts");
    std::string robin_n;
    std::vector<uint64_t> robin_range;
    std::string robin_out, robin_violators;
    robin_cmd->add_option("n", robin_n, "single integer to check");
    robin_cmd->add_option("--range", robin_range, "scan an inclusive range LO HI")
        ->expected(2);
    robin_cmd->add_option("--out", robin_out, "write the range report JSON here");
    robin_cmd->add_option("--violators-csv", robin_violators, "write violators as CSV");

    // beta-max
    auto* beta = app.add_subcommand("beta-max", "first beta with primorial(p_beta) >= n_beta");
    std::string beta_eps;
    uint64_t beta_segment = 1ULL << 25;
    bool beta_resume = false;
    std::string beta_out;
    beta->add_option("--epsilon", beta_eps, "epsilon as P/Q")->required();
    beta->add_option("--segment-size", beta_segment, "sieve segment size")->capture_default_str();
    beta->add_flag("--resume", beta_resume, "resume from checkpoint");
    beta->add_option("--out", beta_out, "write result JSON here");

    // exceptions
    auto* exc = app.add_subcommand("exceptions", "enumerate exceptions for an epsilon");
    std::string exc_eps, exc_out, exc_sidecar;
    exc->add_option("--epsilon", exc_eps, "epsilon as P/Q")->required();
    exc->add_option("--out", exc_out, "CSV output file")->required();
    exc->add_option("--sidecar", exc_sidecar, "JSON sidecar path (default <out>.json)");

    // ca
    auto* ca = app.add_subcommand("ca", "colossally abundant sequence verification");
    double ca_maxloglog = 20.0;
    bool ca_gap = false;
    uint64_t ca_gap_limit = 100'000'000;
    std::string ca_report, ca_summary;
    ca->add_option("--max-loglog", ca_maxloglog, "log log n budget")->capture_default_str();
    ca->add_flag("--gap-check", ca_gap, "exhaustively verify gaps between consecutive CA numbers");
    ca->add_option("--gap-limit", ca_gap_limit, "largest CA value for gap checks")
        ->capture_default_str();
    ca->add_option("--report", ca_report, "per-element CSV report path");
    ca->add_option("--summary", ca_summary, "summary JSON path (default <report>.json)");

    // classify
    auto* cls = app.add_subcommand("classify", "family membership for n > 5040");
    std::string cls_n, cls_factored;
    cls->add_option("n", cls_n, "integer to classify");
    cls->add_option("--factored", cls_factored, "factored input, e.g. \"2^25*3^2\"");

    // constants
    app.add_subcommand("constants", "verify the exact constant chains of the proofs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (factor->parsed()) return cmd_factor(factor_n, g);
        if (robin_cmd->parsed()) {
            if (!robin_range.empty())
                return cmd_robin_range(robin_range[0], robin_range[1], g, robin_out,
                                       robin_violators);
            if (robin_n.empty()) throw std::invalid_argument("robin needs n or --range LO HI");
            return cmd_robin_single(robin_n, g);
        }
        if (beta->parsed()) return cmd_beta_max(beta_eps, g, beta_segment, beta_resume, beta_out);
        if (exc->parsed()) return cmd_exceptions(exc_eps, g, exc_out, exc_sidecar);
        if (ca->parsed()) return cmd_ca(ca_maxloglog, ca_gap, ca_gap_limit, g, ca_report, ca_summary);
        if (cls->parsed()) {
            if (cls_n.empty() && cls_factored.empty())
                throw std::invalid_argument("classify needs n or --factored");
            return cmd_classify(cls_n, cls_factored, g);
        }
        if (app.get_subcommand("constants")->parsed()) return cmd_constants(g);
        std::cerr << "no subcommand\n";
        return kUsage;
    } catch (const robin::PrecisionError& e) {
        std::cerr << "precision error: " << e.what() << "\n";
        return kPrecision;
    } catch (const robin::CapacityError& e) {
        std::cerr << "capacity refusal: " << e.what() << "\n";
        return kCapacity;
    } catch (const robin::CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
