#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace sstlab {

using Complex = std::complex<double>;

/// Running sums for the mean and standard error of complex samples.
///
/// Samples may arrive one at a time or as batch sums. With batch sums S_i of
/// b_i samples each, sum_sq accumulates |S_i|^2 / b_i, and
/// (sum_sq - |sum|^2 / count) / (batches - 1) is an unbiased estimate of the
/// per-sample variance (of the complex modulus spread).
struct ComplexMoments {
    Complex sum{0.0, 0.0};
    double sum_sq = 0.0;
    std::int64_t count = 0;
    std::int64_t batches = 0;

    void add(Complex z) { add_batch(z, 1); }
    void add_batch(Complex batch_sum, std::int64_t size) {
        sum += batch_sum;
        sum_sq += std::norm(batch_sum) / static_cast<double>(size);
        count += size;
        ++batches;
    }
    void merge(const ComplexMoments& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        count += o.count;
        batches += o.batches;
    }
    Complex mean() const { return count > 0 ? sum / static_cast<double>(count) : Complex{}; }
    /// Sample standard deviation over sqrt(count).
    double stderr_of_mean() const {
        if (batches < 2) return 0.0;
        const double n = static_cast<double>(count);
        const double var = (sum_sq - std::norm(sum) / n) / static_cast<double>(batches - 1);
        return var > 0.0 ? std::sqrt(var / n) : 0.0;
    }
};

/// Structure-of-arrays version of ComplexMoments for many statistics that
/// share the same samples.
class VectorMoments {
public:
    VectorMoments() = default;
    explicit VectorMoments(std::size_t dim) : re_(dim), im_(dim), sq_(dim) {}

    std::size_t dim() const { return re_.size(); }
    std::int64_t count() const { return count_; }

    /// Adds one sample vector (length dim()).
    void add(const Complex* z) { add_batch(z, 1); }
    /// Adds the componentwise sum of `size` sample vectors.
    void add_batch(const Complex* z, std::int64_t size) {
        const std::size_t d = re_.size();
        const double inv = 1.0 / static_cast<double>(size);
        for (std::size_t i = 0; i < d; ++i) {
            const double a = z[i].real(), b = z[i].imag();
            re_[i] += a;
            im_[i] += b;
            sq_[i] += (a * a + b * b) * inv;
        }
        count_ += size;
        ++batches_;
    }
    void merge(const VectorMoments& o) {
        if (re_.empty()) {
            *this = o;
            return;
        }
        for (std::size_t i = 0; i < re_.size(); ++i) {
            re_[i] += o.re_[i];
            im_[i] += o.im_[i];
            sq_[i] += o.sq_[i];
        }
        count_ += o.count_;
        batches_ += o.batches_;
    }
    ComplexMoments at(std::size_t i) const {
        ComplexMoments m;
        m.sum = {re_[i], im_[i]};
        m.sum_sq = sq_[i];
        m.count = count_;
        m.batches = batches_;
        return m;
    }

private:
    std::vector<double> re_, im_, sq_;
    std::int64_t count_ = 0;
    std::int64_t batches_ = 0;
};

}  // namespace sstlab
