#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace gfomc {

// Exact rational scalar. mpq_class keeps values canonical (lowest terms,
// positive denominator) as long as arithmetic goes through its operators.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Parses "num", "num/den" or "-num/den". Rejects empty input and zero
// denominators.
inline Rational rat_parse(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  for (char ch : s) {
    if (!(ch == '-' || ch == '/' || (ch >= '0' && ch <= '9')))
      throw std::invalid_argument("bad rational literal: " + s);
  }
  Rational r;
  if (r.set_str(s, 10) != 0)
    throw std::invalid_argument("bad rational literal: " + s);
  if (r.get_den() == 0)
    throw std::invalid_argument("zero denominator: " + s);
  r.canonicalize();
  return r;
}

// Prints num/den in lowest terms; integers print without the "/1".
inline std::string rat_str(const Rational& r) {
  return r.get_str();
}

inline bool rat_is_integer(const Rational& r) {
  return r.get_den() == 1;
}

// r^e for integer e (negative allowed when r != 0).
inline Rational rat_pow(const Rational& r, long e) {
  if (e == 0) return Rational(1);
  bool inv = e < 0;
  unsigned long k = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  if (inv && r == 0) throw std::domain_error("negative power of zero");
  Rational num, den;
  mpz_pow_ui(num.get_num_mpz_t(), r.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_num_mpz_t(), r.get_den_mpz_t(), k);
  Rational out;
  if (inv) {
    out = Rational(den.get_num()) / Rational(num.get_num());
  } else {
    out = Rational(num.get_num()) / Rational(den.get_num());
  }
  out.canonicalize();
  return out;
}

// Exact integer square root when r is a perfect square of a rational.
inline std::optional<Rational> rat_sqrt_exact(const Rational& r) {
  if (r < 0) return std::nullopt;
  mpz_class n = r.get_num(), d = r.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t()))
    return std::nullopt;
  mpz_class sn, sd;
  mpz_sqrt(sn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(sd.get_mpz_t(), d.get_mpz_t());
  Rational out(sn, sd);
  out.canonicalize();
  return out;
}

}  // namespace gfomc
