#include "melcomp/rational_time.h"

#include <charconv>
#include <limits>

#include "melcomp/error.h"

namespace melcomp {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("RationalTime overflow");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

RationalTime::RationalTime(std::int64_t numerator, std::int64_t denominator) {
  *this = from_wide(numerator, denominator);
}

RationalTime RationalTime::from_wide(__int128 numerator, __int128 denominator) {
  if (denominator == 0) throw std::domain_error("RationalTime with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  __int128 g = gcd128(numerator, denominator);
  if (g > 1) {
    numerator /= g;
    denominator /= g;
  }
  RationalTime r;
  r.num_ = narrow(numerator);
  r.den_ = narrow(denominator);
  return r;
}

std::int64_t RationalTime::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

RationalTime RationalTime::mod1() const { return *this - RationalTime(floor()); }

std::string RationalTime::to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

RationalTime RationalTime::parse(std::string_view text) {
  auto slash = text.find('/');
  std::int64_t n = 0;
  std::int64_t d = 1;
  auto parse_int = [&](std::string_view part, std::int64_t& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw ParseError("invalid rational '" + std::string(text) + "'");
    }
  };
  if (slash == std::string_view::npos) {
    parse_int(text, n);
  } else {
    parse_int(text.substr(0, slash), n);
    parse_int(text.substr(slash + 1), d);
  }
  if (d <= 0) throw ParseError("invalid rational '" + std::string(text) + "': denominator must be positive");
  return RationalTime(n, d);
}

RationalTime& RationalTime::operator+=(const RationalTime& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_ + static_cast<__int128>(rhs.num_) * den_,
                    static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

RationalTime& RationalTime::operator-=(const RationalTime& rhs) { return *this += -rhs; }

RationalTime& RationalTime::operator*=(const RationalTime& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.num_, static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

RationalTime& RationalTime::operator/=(const RationalTime& rhs) {
  if (rhs.num_ == 0) throw std::domain_error("RationalTime division by zero");
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_, static_cast<__int128>(den_) * rhs.num_);
  return *this;
}

std::strong_ordering operator<=>(const RationalTime& lhs, const RationalTime& rhs) {
  __int128 l = static_cast<__int128>(lhs.num_) * rhs.den_;
  __int128 r = static_cast<__int128>(rhs.num_) * lhs.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace melcomp
