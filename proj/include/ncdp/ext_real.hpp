#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ncdp {

/// A value in (-inf, +inf]. Minus infinity and NaN are rejected at construction.
///
/// Addition follows a + (+inf) = +inf. Scaling is only defined for factors
/// >= 0, with the convention 0 * (+inf) = 0 used for probability weights.
class ExtReal {
public:
    constexpr ExtReal() noexcept = default;
    constexpr ExtReal(double v) : v_(v) {  // NOLINT(google-explicit-constructor)
        if (v != v || v == -std::numeric_limits<double>::infinity()) {
            throw std::domain_error("ExtReal: value must be finite or +inf");
        }
    }

    [[nodiscard]] static constexpr ExtReal inf() noexcept {
        ExtReal r;
        r.v_ = std::numeric_limits<double>::infinity();
        return r;
    }

    [[nodiscard]] constexpr bool is_finite() const noexcept {
        return v_ != std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] constexpr bool is_inf() const noexcept { return !is_finite(); }
    [[nodiscard]] constexpr double value() const noexcept { return v_; }

    constexpr ExtReal& operator+=(ExtReal o) noexcept {
        v_ += o.v_;
        return *this;
    }

    /// Scale by a nonnegative factor; 0 * inf = 0.
    [[nodiscard]] ExtReal scaled(double factor) const {
        if (factor < 0.0 || factor != factor) {
            throw std::domain_error("ExtReal: negative scale factor");
        }
        if (factor == 0.0) return ExtReal(0.0);
        ExtReal r;
        r.v_ = v_ * factor;
        return r;
    }

    friend constexpr ExtReal operator+(ExtReal a, ExtReal b) noexcept { return a += b; }
    friend constexpr bool operator==(ExtReal a, ExtReal b) noexcept { return a.v_ == b.v_; }
    friend constexpr auto operator<=>(ExtReal a, ExtReal b) noexcept { return a.v_ <=> b.v_; }

    friend std::ostream& operator<<(std::ostream& os, ExtReal x) {
        if (x.is_inf()) return os << "+inf";
        return os << x.v_;
    }

private:
    double v_ = 0.0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative-or-absolute closeness with +inf equal only to +inf.
[[nodiscard]] inline bool close(ExtReal a, ExtReal b, double tol) noexcept {
    if (a.is_inf() || b.is_inf()) return a.is_inf() && b.is_inf();
    const double scale = std::max({1.0, std::abs(a.value()), std::abs(b.value())});
    return std::abs(a.value() - b.value()) <= tol * scale;
}

}  // namespace ncdp
