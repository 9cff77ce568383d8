#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmrope {

// Exact dyadic rational with denominator 2^8, the finest stride any
// position design uses (visual strides down to 1/256, temporal stride 1/2).
// Stored as raw = value * 256, so addition, comparison and scaling by an
// integer are exact and equality is decidable.
class Dyadic {
 public:
  static constexpr int kDenomExp = 8;
  static constexpr std::int64_t kDenom = std::int64_t{1} << kDenomExp;

  constexpr Dyadic() = default;
  constexpr Dyadic(std::int64_t whole) : raw_(whole * kDenom) {}  // NOLINT: implicit

  static constexpr Dyadic from_raw(std::int64_t raw) {
    Dyadic d;
    d.raw_ = raw;
    return d;
  }

  // num/den with den a power of two in [1, 256].
  static Dyadic from_fraction(std::int64_t num, std::int64_t den) {
    if (den <= 0 || den > kDenom || (den & (den - 1)) != 0) {
      throw std::invalid_argument("dyadic denominator must be a power of two in [1, 256], got " +
                                  std::to_string(den));
    }
    return from_raw(num * (kDenom / den));
  }

  // Nearest representable value; ties round away from zero (llround).
  static Dyadic nearest(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("cannot round non-finite value to dyadic");
    return from_raw(std::llround(x * static_cast<double>(kDenom)));
  }

  // Accepts "3", "-2", "1/2", "1.5". Decimal forms must be exactly
  // representable (e.g. "0.1" is rejected).
  static Dyadic parse(std::string_view text);

  constexpr std::int64_t raw() const { return raw_; }
  constexpr bool is_integer() const { return raw_ % kDenom == 0; }
  double to_double() const { return static_cast<double>(raw_) / static_cast<double>(kDenom); }

  // Exact finite decimal rendering: "3", "1.5", "0.25", "-0.00390625".
  std::string to_decimal() const;

  friend constexpr Dyadic operator+(Dyadic a, Dyadic b) { return from_raw(a.raw_ + b.raw_); }
  friend constexpr Dyadic operator-(Dyadic a, Dyadic b) { return from_raw(a.raw_ - b.raw_); }
  friend constexpr Dyadic operator-(Dyadic a) { return from_raw(-a.raw_); }
  friend constexpr Dyadic operator*(Dyadic a, std::int64_t k) { return from_raw(a.raw_ * k); }
  friend constexpr Dyadic operator*(std::int64_t k, Dyadic a) { return a * k; }
  Dyadic& operator+=(Dyadic o) {
    raw_ += o.raw_;
    return *this;
  }
  Dyadic& operator-=(Dyadic o) {
    raw_ -= o.raw_;
    return *this;
  }
  friend constexpr auto operator<=>(Dyadic, Dyadic) = default;

 private:
  std::int64_t raw_ = 0;
};

inline Dyadic max(Dyadic a, Dyadic b) { return a < b ? b : a; }
inline Dyadic min(Dyadic a, Dyadic b) { return b < a ? b : a; }

inline Dyadic Dyadic::parse(std::string_view text) {
  const auto fail = [&]() -> Dyadic {
    throw std::invalid_argument("invalid rational literal: '" + std::string(text) + "'");
  };
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail();
    return v;
  };
  if (text.empty()) fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t num = parse_int(text.substr(0, slash));
    std::int64_t den = parse_int(text.substr(slash + 1));
    if (den <= 0 || den > kDenom || (den & (den - 1)) != 0) fail();
    return from_fraction(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    bool neg = text.front() == '-';
    std::string_view ip = text.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
    std::string_view fp = text.substr(dot + 1);
    if (fp.empty() || fp.size() > 8) fail();
    std::int64_t whole = ip.empty() ? 0 : parse_int(ip);
    std::int64_t frac = parse_int(fp);
    if (whole < 0 || frac < 0) fail();
    std::int64_t pow10 = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) pow10 *= 10;
    // value = whole + frac/10^n ; raw fraction must divide exactly
    if ((frac * kDenom) % pow10 != 0) fail();
    std::int64_t raw = whole * kDenom + (frac * kDenom) / pow10;
    return from_raw(neg ? -raw : raw);
  }
  return Dyadic(parse_int(text));
}

inline std::string Dyadic::to_decimal() const {
  std::int64_t u = raw_ < 0 ? -raw_ : raw_;
  std::int64_t whole = u >> kDenomExp;
  std::int64_t frac = u & (kDenom - 1);
  std::string s = raw_ < 0 ? "-" : "";
  s += std::to_string(whole);
  if (frac != 0) {
    // n/256 = n*5^8 / 10^8, rendered with trailing zeros trimmed
    constexpr std::int64_t kFive8 = 390625;
    std::string digits = std::to_string(frac * kFive8);
    digits.insert(0, 8 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    s += '.';
    s += digits;
  }
  return s;
}

}  // namespace mmrope
