// Exact musical time measured in quarter notes.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace melcomp {

/// A reduced fraction of a quarter note. All onsets, durations and
/// off-beats are expressed with this type so that phrase lengths add up
/// without rounding.
class RationalTime {
 public:
  constexpr RationalTime() = default;
  RationalTime(std::int64_t numerator, std::int64_t denominator = 1);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Largest integer not greater than this value.
  std::int64_t floor() const;

  /// Fractional part in [0, 1).
  RationalTime mod1() const;

  /// "num/den", always with an explicit denominator ("0/1", "3/4").
  std::string to_string() const;
  static RationalTime parse(std::string_view text);

  RationalTime operator-() const { return RationalTime(-num_, den_); }
  RationalTime& operator+=(const RationalTime& rhs);
  RationalTime& operator-=(const RationalTime& rhs);
  RationalTime& operator*=(const RationalTime& rhs);
  RationalTime& operator/=(const RationalTime& rhs);

  friend RationalTime operator+(RationalTime lhs, const RationalTime& rhs) { return lhs += rhs; }
  friend RationalTime operator-(RationalTime lhs, const RationalTime& rhs) { return lhs -= rhs; }
  friend RationalTime operator*(RationalTime lhs, const RationalTime& rhs) { return lhs *= rhs; }
  friend RationalTime operator/(RationalTime lhs, const RationalTime& rhs) { return lhs /= rhs; }

  friend bool operator==(const RationalTime&, const RationalTime&) = default;
  friend std::strong_ordering operator<=>(const RationalTime& lhs, const RationalTime& rhs);

 private:
  static RationalTime from_wide(__int128 numerator, __int128 denominator);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Position of a count relative to the preceding beat: count mod 1.
inline RationalTime offbeat(const RationalTime& count) { return count.mod1(); }

}  // namespace melcomp
