#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "robin/errors.hpp"

namespace robin {

/// Default working precision in decimal digits.
inline constexpr int kDefaultDigits = 200;
inline constexpr int kMinGammaDigits = 10;

/// Outcome of a certified comparison: Less/Greater only when the two
/// enclosures are disjoint.
enum class Order { Less, Greater, Undecided };

inline const char* to_string(Order o) {
    switch (o) {
        case Order::Less: return "Less";
        case Order::Greater: return "Greater";
        default: return "Undecided";
    }
}

namespace detail {

inline mpfr_prec_t prec_bits(int digits) {
    if (digits < 1) throw std::invalid_argument("precision_digits must be >= 1");
    // 10^d needs d*log2(10) bits; guard bits keep primitive-op widths
    // well under the promised 10^(2-d) envelope.
    return static_cast<mpfr_prec_t>(digits * 3.3219280948873623 + 1.0) + 16;
}

/// RAII wrapper for a single mpfr_t.
class Real {
public:
    explicit Real(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

} // namespace detail

/// Certified real enclosure [lo, hi] at a given working precision.
///
/// Every operation returns an enclosure containing the exact mathematical
/// result: lower bounds are computed rounding down, upper bounds rounding
/// up.  Strict inequalities are decided only through disjoint enclosures
/// (see compare below), never through point arithmetic.
class Interval {
public:
    explicit Interval(int digits = kDefaultDigits)
        : digits_(digits), lo_(detail::prec_bits(digits)), hi_(detail::prec_bits(digits)) {}

    static Interval from_int(long v, int digits = kDefaultDigits) {
        Interval r(digits);
        mpfr_set_si(r.lo_.get(), v, MPFR_RNDD);
        mpfr_set_si(r.hi_.get(), v, MPFR_RNDU);
        return r;
    }

    static Interval from_uint(unsigned long v, int digits = kDefaultDigits) {
        Interval r(digits);
        mpfr_set_ui(r.lo_.get(), v, MPFR_RNDD);
        mpfr_set_ui(r.hi_.get(), v, MPFR_RNDU);
        return r;
    }

    static Interval from_bigint(const mpz_class& v, int digits = kDefaultDigits) {
        Interval r(digits);
        mpfr_set_z(r.lo_.get(), v.get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(r.hi_.get(), v.get_mpz_t(), MPFR_RNDU);
        return r;
    }

    static Interval from_ratio(const mpq_class& q, int digits = kDefaultDigits) {
        Interval r(digits);
        mpfr_set_q(r.lo_.get(), q.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(r.hi_.get(), q.get_mpq_t(), MPFR_RNDU);
        return r;
    }

    /// Outward-rounded enclosure of a decimal literal.
    static Interval from_decimal(const std::string& s, int digits = kDefaultDigits) {
        Interval r(digits);
        if (mpfr_set_str(r.lo_.get(), s.c_str(), 10, MPFR_RNDD) != 0)
            throw std::invalid_argument("not a decimal literal: " + s);
        mpfr_set_str(r.hi_.get(), s.c_str(), 10, MPFR_RNDU);
        return r;
    }

    static Interval from_bounds(const detail::Real& lo, const detail::Real& hi, int digits) {
        Interval r(digits);
        mpfr_set(r.lo_.get(), lo.get(), MPFR_RNDD);
        mpfr_set(r.hi_.get(), hi.get(), MPFR_RNDU);
        if (mpfr_greater_p(r.lo_.get(), r.hi_.get()))
            throw std::invalid_argument("interval bounds out of order");
        return r;
    }

    /// Enclosure of the Euler-Mascheroni constant.
    static Interval euler_gamma(int digits) {
        if (digits < kMinGammaDigits)
            throw std::invalid_argument("euler_gamma requires at least 10 digits");
        Interval r(digits);
        mpfr_const_euler(r.lo_.get(), MPFR_RNDD);
        mpfr_const_euler(r.hi_.get(), MPFR_RNDU);
        return r;
    }

    /// Enclosure of e^gamma.
    static Interval exp_euler_gamma(int digits) { return euler_gamma(digits).exp(); }

    int digits() const { return digits_; }
    mpfr_srcptr lo() const { return lo_.get(); }
    mpfr_srcptr hi() const { return hi_.get(); }
    mpfr_ptr lo_mut() { return lo_.get(); }
    mpfr_ptr hi_mut() { return hi_.get(); }

    bool valid() const { return mpfr_lessequal_p(lo_.get(), hi_.get()); }
    bool strictly_positive() const { return mpfr_sgn(lo_.get()) > 0; }
    bool strictly_negative() const { return mpfr_sgn(hi_.get()) < 0; }
    bool contains_zero() const {
        return mpfr_sgn(lo_.get()) <= 0 && mpfr_sgn(hi_.get()) >= 0;
    }
    bool contains(const mpq_class& q) const {
        return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) <= 0 &&
               mpfr_cmp_q(hi_.get(), q.get_mpq_t()) >= 0;
    }
    bool contains(double x) const {
        return mpfr_cmp_d(lo_.get(), x) <= 0 && mpfr_cmp_d(hi_.get(), x) >= 0;
    }
    bool encloses(const Interval& inner) const {
        return mpfr_lessequal_p(lo_.get(), inner.lo()) &&
               mpfr_greaterequal_p(hi_.get(), inner.hi());
    }

    /// Upper bound on hi - lo, as a double rounded up.
    double width_ub() const {
        detail::Real w(mpfr_get_prec(lo_.get()));
        mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
        return mpfr_get_d(w.get(), MPFR_RNDU);
    }

    double midpoint_d() const {
        detail::Real m(mpfr_get_prec(lo_.get()));
        mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
        mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
        return mpfr_get_d(m.get(), MPFR_RNDN);
    }

    Interval operator-() const {
        Interval r(digits_);
        mpfr_neg(r.lo_.get(), hi_.get(), MPFR_RNDD);
        mpfr_neg(r.hi_.get(), lo_.get(), MPFR_RNDU);
        return r;
    }

    friend Interval operator+(const Interval& a, const Interval& b) {
        Interval r(std::max(a.digits_, b.digits_));
        mpfr_add(r.lo_.get(), a.lo(), b.lo(), MPFR_RNDD);
        mpfr_add(r.hi_.get(), a.hi(), b.hi(), MPFR_RNDU);
        return r;
    }

    friend Interval operator-(const Interval& a, const Interval& b) {
        Interval r(std::max(a.digits_, b.digits_));
        mpfr_sub(r.lo_.get(), a.lo(), b.hi(), MPFR_RNDD);
        mpfr_sub(r.hi_.get(), a.hi(), b.lo(), MPFR_RNDU);
        return r;
    }

    friend Interval operator*(const Interval& a, const Interval& b) {
        Interval r(std::max(a.digits_, b.digits_));
        mpfr_prec_t p = detail::prec_bits(r.digits_);
        detail::Real t(p), best_lo(p), best_hi(p);
        bool first = true;
        mpfr_srcptr as[2] = {a.lo(), a.hi()};
        mpfr_srcptr bs[2] = {b.lo(), b.hi()};
        for (auto x : as) {
            for (auto y : bs) {
                mpfr_mul(t.get(), x, y, MPFR_RNDD);
                if (first || mpfr_less_p(t.get(), best_lo.get())) mpfr_set(best_lo.get(), t.get(), MPFR_RNDD);
                mpfr_mul(t.get(), x, y, MPFR_RNDU);
                if (first || mpfr_greater_p(t.get(), best_hi.get())) mpfr_set(best_hi.get(), t.get(), MPFR_RNDU);
                first = false;
            }
        }
        mpfr_set(r.lo_.get(), best_lo.get(), MPFR_RNDD);
        mpfr_set(r.hi_.get(), best_hi.get(), MPFR_RNDU);
        return r;
    }

    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains_zero())
            throw std::domain_error("interval division: divisor encloses zero");
        Interval r(std::max(a.digits_, b.digits_));
        mpfr_prec_t p = detail::prec_bits(r.digits_);
        detail::Real t(p), best_lo(p), best_hi(p);
        bool first = true;
        mpfr_srcptr as[2] = {a.lo(), a.hi()};
        mpfr_srcptr bs[2] = {b.lo(), b.hi()};
        for (auto x : as) {
            for (auto y : bs) {
                mpfr_div(t.get(), x, y, MPFR_RNDD);
                if (first || mpfr_less_p(t.get(), best_lo.get())) mpfr_set(best_lo.get(), t.get(), MPFR_RNDD);
                mpfr_div(t.get(), x, y, MPFR_RNDU);
                if (first || mpfr_greater_p(t.get(), best_hi.get())) mpfr_set(best_hi.get(), t.get(), MPFR_RNDU);
                first = false;
            }
        }
        mpfr_set(r.lo_.get(), best_lo.get(), MPFR_RNDD);
        mpfr_set(r.hi_.get(), best_hi.get(), MPFR_RNDU);
        return r;
    }

    Interval& operator+=(const Interval& o) { *this = *this + o; return *this; }
    Interval& operator-=(const Interval& o) { *this = *this - o; return *this; }
    Interval& operator*=(const Interval& o) { *this = *this * o; return *this; }
    Interval& operator/=(const Interval& o) { *this = *this / o; return *this; }

    Interval exp() const {
        Interval r(digits_);
        mpfr_exp(r.lo_.get(), lo_.get(), MPFR_RNDD);
        mpfr_exp(r.hi_.get(), hi_.get(), MPFR_RNDU);
        return r;
    }

    Interval log() const {
        if (mpfr_sgn(lo_.get()) <= 0)
            throw std::domain_error("interval log: operand not strictly positive");
        Interval r(digits_);
        mpfr_log(r.lo_.get(), lo_.get(), MPFR_RNDD);
        mpfr_log(r.hi_.get(), hi_.get(), MPFR_RNDU);
        return r;
    }

    /// x^y = exp(y * log x); requires x strictly positive.
    Interval pow(const Interval& y) const {
        if (mpfr_sgn(lo_.get()) <= 0)
            throw std::domain_error("interval pow: base not strictly positive");
        return (y * this->log()).exp();
    }

    Interval sqrt() const {
        if (mpfr_sgn(lo_.get()) < 0)
            throw std::domain_error("interval sqrt: operand negative");
        Interval r(digits_);
        mpfr_sqrt(r.lo_.get(), lo_.get(), MPFR_RNDD);
        mpfr_sqrt(r.hi_.get(), hi_.get(), MPFR_RNDU);
        return r;
    }

    /// this * (num/den) for non-negative intervals and machine-word ratios;
    /// four directed ops instead of a general interval multiply.
    Interval mul_ratio_ui(unsigned long num, unsigned long den) const {
        if (mpfr_sgn(lo_.get()) < 0)
            throw std::domain_error("mul_ratio_ui requires a non-negative interval");
        Interval r(digits_);
        mpfr_mul_ui(r.lo_.get(), lo_.get(), num, MPFR_RNDD);
        mpfr_div_ui(r.lo_.get(), r.lo_.get(), den, MPFR_RNDD);
        mpfr_mul_ui(r.hi_.get(), hi_.get(), num, MPFR_RNDU);
        mpfr_div_ui(r.hi_.get(), r.hi_.get(), den, MPFR_RNDU);
        return r;
    }

    /// Same enclosure re-rounded outward at a new working precision.
    Interval at_digits(int digits) const {
        Interval r(digits);
        mpfr_set(r.lo_.get(), lo_.get(), MPFR_RNDD);
        mpfr_set(r.hi_.get(), hi_.get(), MPFR_RNDU);
        return r;
    }

    /// Midpoint as a decimal string with the given significant digits
    /// (normalized scientific form, deterministic).
    std::string midpoint_string(int sig_digits = 20) const {
        detail::Real m(mpfr_get_prec(lo_.get()) + 8);
        mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
        mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
        return format_real(m.get(), sig_digits);
    }

    std::string lo_string(int sig_digits = 20) const { return format_real(lo_.get(), sig_digits); }
    std::string hi_string(int sig_digits = 20) const { return format_real(hi_.get(), sig_digits); }

    /// Deterministic scientific rendering of an mpfr value.
    static std::string format_real(mpfr_srcptr v, int sig_digits) {
        if (mpfr_nan_p(v)) return "nan";
        if (mpfr_inf_p(v)) return mpfr_sgn(v) < 0 ? "-inf" : "inf";
        if (mpfr_zero_p(v)) return "0";
        mpfr_exp_t e;
        char* raw = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(sig_digits), v, MPFR_RNDN);
        std::string digits(raw);
        mpfr_free_str(raw);
        std::string sign;
        if (!digits.empty() && digits[0] == '-') {
            sign = "-";
            digits.erase(0, 1);
        }
        std::string out = sign + digits.substr(0, 1) + "." + digits.substr(1);
        long exp10 = static_cast<long>(e) - 1;
        out += "e";
        out += (exp10 < 0 ? "-" : "+");
        std::string mag = std::to_string(exp10 < 0 ? -exp10 : exp10);
        if (mag.size() < 2) mag = "0" + mag;
        return out + mag;
    }

private:
    int digits_;
    detail::Real lo_;
    detail::Real hi_;
};

/// Disjoint-enclosure comparison.
inline Order compare(const Interval& a, const Interval& b) {
    if (mpfr_less_p(a.hi(), b.lo())) return Order::Less;
    if (mpfr_greater_p(a.lo(), b.hi())) return Order::Greater;
    return Order::Undecided;
}

/// Recomputes both operands at a given precision; used to refine an
/// Undecided comparison.
using RefineFn = std::function<std::pair<Interval, Interval>(int digits)>;

/// Certified comparison with geometric refinement: starting from the
/// operands' own precision, doubles the digit count per round (via the
/// caller-supplied recomputation) up to max_digits, then reports Undecided.
inline Order compare(const Interval& a, const Interval& b, int max_digits,
                     const RefineFn& refine = nullptr) {
    Order o = compare(a, b);
    if (o != Order::Undecided || !refine) return o;
    int d = std::max(a.digits(), b.digits());
    while (d < max_digits) {
        d = std::min(d * 2, max_digits);
        auto [ra, rb] = refine(d);
        o = compare(ra, rb);
        if (o != Order::Undecided) return o;
    }
    return Order::Undecided;
}

namespace detail {

/// log(1 + num/den) for exact machine integers with num/den <= 1/4,
/// as 2*atanh(y) with y = num/(2*den + num); all series terms positive,
/// so directed rounding gives a certified enclosure directly.
/// Much cheaper than a full mpfr_log in per-prime hot loops.
inline void log1p_ratio(mpfr_ptr out_lo, mpfr_ptr out_hi, unsigned long num, unsigned long den) {
    mpfr_prec_t p = mpfr_get_prec(out_lo);
    Real y_lo(p), y_hi(p), y2_lo(p), y2_hi(p), t_lo(p), t_hi(p), term(p), acc_lo(p), acc_hi(p);

    mpfr_set_ui(y_lo.get(), num, MPFR_RNDD);
    mpfr_div_ui(y_lo.get(), y_lo.get(), 2 * den + num, MPFR_RNDD);
    mpfr_set_ui(y_hi.get(), num, MPFR_RNDU);
    mpfr_div_ui(y_hi.get(), y_hi.get(), 2 * den + num, MPFR_RNDU);

    mpfr_sqr(y2_lo.get(), y_lo.get(), MPFR_RNDD);
    mpfr_sqr(y2_hi.get(), y_hi.get(), MPFR_RNDU);

    // Number of odd-power terms so that the tail is below one ulp.
    long e = mpfr_get_exp(y_hi.get()); // y ~ 2^(e-1)
    long bits_per_step = 2 * (1 - e) > 2 ? 2 * (1 - e) : 2;
    long k_terms = static_cast<long>(p + 8) / bits_per_step + 2;

    mpfr_set(t_lo.get(), y_lo.get(), MPFR_RNDD);
    mpfr_set(acc_lo.get(), y_lo.get(), MPFR_RNDD);
    mpfr_set(t_hi.get(), y_hi.get(), MPFR_RNDU);
    mpfr_set(acc_hi.get(), y_hi.get(), MPFR_RNDU);
    for (long k = 1; k <= k_terms; ++k) {
        mpfr_mul(t_lo.get(), t_lo.get(), y2_lo.get(), MPFR_RNDD);
        mpfr_div_ui(term.get(), t_lo.get(), 2 * k + 1, MPFR_RNDD);
        mpfr_add(acc_lo.get(), acc_lo.get(), term.get(), MPFR_RNDD);
        mpfr_mul(t_hi.get(), t_hi.get(), y2_hi.get(), MPFR_RNDU);
        mpfr_div_ui(term.get(), t_hi.get(), 2 * k + 1, MPFR_RNDU);
        mpfr_add(acc_hi.get(), acc_hi.get(), term.get(), MPFR_RNDU);
    }
    // Tail of the upper sum: sum_{j>k} y^(2j+1)/(2j+1) <= t_hi*y2/(1-y2) <= 2*t_hi*y2 for y2 <= 1/2.
    mpfr_mul(t_hi.get(), t_hi.get(), y2_hi.get(), MPFR_RNDU);
    mpfr_mul_2ui(t_hi.get(), t_hi.get(), 1, MPFR_RNDU);
    mpfr_add(acc_hi.get(), acc_hi.get(), t_hi.get(), MPFR_RNDU);

    mpfr_mul_2ui(out_lo, acc_lo.get(), 1, MPFR_RNDD);
    mpfr_mul_2ui(out_hi, acc_hi.get(), 1, MPFR_RNDU);
}

} // namespace detail

/// log(1 + num/den) as an Interval (series path needs num/den <= 1/4).
inline Interval log1p_ratio(unsigned long num, unsigned long den, int digits) {
    if (num > den / 4 + 1 || den >= (1UL << 62)) {
        mpq_class q(num, den);
        q.canonicalize();
        return (Interval::from_ratio(q, digits) + Interval::from_int(1, digits)).log();
    }
    Interval r(digits);
    detail::log1p_ratio(r.lo_mut(), r.hi_mut(), num, den);
    return r;
}

} // namespace robin
