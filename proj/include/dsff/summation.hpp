#pragma once

#include <cmath>
#include <complex>

namespace dsff {

/// Neumaier compensated accumulator. Results depend only on the order of
/// the added terms, never on thread count.
template <class T = double>
class CompensatedSum {
public:
    void add(T x) noexcept {
        const T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(T x) noexcept {
        add(x);
        return *this;
    }

    T value() const noexcept { return sum_ + comp_; }

private:
    T sum_{0};
    T comp_{0};
};

class ComplexCompensatedSum {
public:
    void add(std::complex<double> z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }

    ComplexCompensatedSum& operator+=(std::complex<double> z) noexcept {
        add(z);
        return *this;
    }

    std::complex<double> value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum<double> re_;
    CompensatedSum<double> im_;
};

}  // namespace dsff
