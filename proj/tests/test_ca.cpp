#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "oracles.hpp"
#include "robin/colossally_abundant.hpp"
#include "robin/divisors.hpp"
#include "robin/report.hpp"

using robin::CAGroup;
using robin::CANumber;
using robin::CAOptions;

namespace {

struct Element {
    CANumber ca;
    std::vector<CAGroup> groups;
};

std::vector<Element> sequence_to(double max_loglog) {
    CAOptions opt;
    opt.track_digits = 40;
    std::vector<Element> out;
    robin::ca_sequence(max_loglog, opt, [&](const CANumber& ca, const std::vector<CAGroup>& gs) {
        out.push_back({ca, gs});
    });
    return out;
}

} // namespace

TEST_CASE("first CA numbers match the exhaustive epsilon-grid oracle") {
    auto seq = sequence_to(3.2);
    REQUIRE(seq.size() >= 10);
    std::vector<uint64_t> got;
    for (size_t i = 0; i < seq.size() && got.size() < 10; ++i)
        got.push_back(mpz_get_ui(robin::ca_value(seq[i].groups).get_mpz_t()));
    auto oracle = oracles::brute_force_ca(1000000);
    REQUIRE(oracle == std::vector<uint64_t>{2, 6, 12, 60, 120, 360, 2520, 5040, 55440, 720720});
    REQUIRE(got == oracle);
}

TEST_CASE("structural invariants along the sequence") {
    auto seq = sequence_to(3.2);
    mpz_class prev = 1;
    for (const auto& e : seq) {
        // Exponents non-increasing as primes increase.
        for (size_t i = 1; i < e.groups.size(); ++i)
            REQUIRE(e.groups[i].exponent < e.groups[i - 1].exponent);
        for (const auto& g : e.groups) REQUIRE(g.p_lo <= g.p_hi);
        mpz_class v = robin::ca_value(e.groups);
        // Single-prime step and divisibility chain.
        REQUIRE(v % prev == 0);
        mpz_class step = v / prev;
        REQUIRE(robin::is_prime(step));
        REQUIRE(step == e.ca.transition_prime);
        prev = v;
    }
}

TEST_CASE("enclosures agree with exact arithmetic on materializable elements") {
    auto seq = sequence_to(3.1);
    for (const auto& e : seq) {
        mpz_class v = robin::ca_value(e.groups);
        if (mpz_sizeinbase(v.get_mpz_t(), 2) > 40) continue;
        robin::Factorization f = robin::ca_factorization(e.groups);
        REQUIRE(f.value() == v);
        mpq_class exact = robin::sigma_over_n(f);
        REQUIRE(e.ca.sigma_ratio.contains(exact));
        REQUIRE(e.ca.log_sigma_ratio.exp().contains(exact));
        REQUIRE(e.ca.log_n.exp().contains(mpq_class(v)));
    }
}

TEST_CASE("sequence respects the loglog budget") {
    auto seq = sequence_to(2.0);
    REQUIRE(!seq.empty());
    for (const auto& e : seq) {
        REQUIRE(mpfr_cmp_d(e.ca.log_n.log().hi(), 2.0) <= 0);
    }
    // The next element would have exceeded the budget: generating with a
    // bigger budget yields strictly more elements.
    REQUIRE(sequence_to(2.5).size() > seq.size());
}

TEST_CASE("verify_robin_on_ca: small budget summary") {
    robin::CAVerifyOptions opt;
    opt.sequence.track_digits = 40;
    opt.thread_count = 2;
    std::vector<robin::CAVerifyRow> rows;
    auto sum = robin::verify_robin_on_ca(3.0, opt,
                                         [&](const robin::CAVerifyRow& r) { rows.push_back(r); });
    REQUIRE(sum.count == rows.size());
    REQUIRE(sum.undecided == 0);
    REQUIRE(sum.fails_above_5040 == 0);
    // All CA numbers <= 5040 violate Robin's inequality: 2,6,12,60,120,360,2520,5040.
    REQUIRE(sum.fails_at_or_below_5040 == 8);
    REQUIRE(sum.holds == sum.count - 8);
    REQUIRE(sum.min_margin_set);
    REQUIRE(sum.min_margin_lo > 0);
    // Rows arrive in index order.
    for (size_t i = 0; i < rows.size(); ++i) REQUIRE(rows[i].index == i + 1);
    // 55440 is element 9: margin ~ 0.0711.
    REQUIRE(rows[8].verdict == robin::Verdict::Holds);
    REQUIRE(std::abs(std::stod(rows[8].margin) - 0.0711) < 1e-3);
}

TEST_CASE("verification output is byte-identical across thread counts") {
    std::string ref;
    for (int threads : {1, 4}) {
        robin::CAVerifyOptions opt;
        opt.sequence.track_digits = 40;
        opt.thread_count = threads;
        opt.batch_size = 3; // force many batches
        std::string csv = robin::ca_report_csv_header();
        robin::verify_robin_on_ca(3.0, opt, [&](const robin::CAVerifyRow& r) {
            csv += robin::ca_report_csv_row(r);
        });
        if (ref.empty()) ref = csv;
        REQUIRE(csv == ref);
    }
}

TEST_CASE("gap checks: fixed gaps are clean above 5040") {
    auto rep1 = robin::gap_check(mpz_class(5040), mpz_class(55440), 100000000);
    REQUIRE(rep1.checked == 50400);
    REQUIRE(rep1.violators_above_5040.empty());
    REQUIRE(rep1.undecided == 0);

    auto rep2 = robin::gap_check(mpz_class(720720), mpz_class(1441440), 100000000);
    REQUIRE(rep2.checked == 720720);
    REQUIRE(rep2.violators_above_5040.empty());

    auto degenerate = robin::gap_check(mpz_class(5040), mpz_class(5040), 100000000);
    REQUIRE(degenerate.checked == 0);
    REQUIRE(degenerate.violators.empty());

    REQUIRE_THROWS_AS(robin::gap_check(mpz_class(2), mpz_class("1000000000000"), 100000000),
                      robin::CapacityError);
}

TEST_CASE("ca_value refuses oversized materializations") {
    std::vector<CAGroup> groups{{2, 1000003, 1}};
    REQUIRE_THROWS_AS(robin::ca_value(groups, 1024), robin::CapacityError);
}
