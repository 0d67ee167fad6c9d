#pragma once

#include "ssm/types.hpp"

#include <functional>
#include <memory>
#include <string>

namespace ssm {

/// A non-Gaussian disturbance or observation density, handled through a
/// Gaussian approximation with time-varying variance.
class Distribution {
public:
    enum class Kind { ExpFamily, AdditiveNoise };

    virtual ~Distribution() = default;
    [[nodiscard]] virtual Kind kind() const = 0;
    [[nodiscard]] virtual std::string code() const = 0;
    /// Number of disturbance elements governed.
    [[nodiscard]] virtual Eigen::Index dim() const { return 1; }
};

/// p(y | theta) = exp(y'theta - b(theta) + c(y)).
class ExpFamily : public Distribution {
public:
    [[nodiscard]] Kind kind() const override { return Kind::ExpFamily; }

    [[nodiscard]] virtual double b(const Vector& theta, Eigen::Index t) const = 0;
    [[nodiscard]] virtual double c(const Vector& y, Eigen::Index t) const = 0;
    /// Second derivative of b.
    [[nodiscard]] virtual Matrix d2b(const Vector& theta, Eigen::Index t) const = 0;
    /// d2b(theta)^{-1} times the first derivative of b.
    [[nodiscard]] virtual Vector id2bdb(const Vector& theta, Eigen::Index t) const = 0;

    [[nodiscard]] double logp(const Vector& y, const Vector& theta, Eigen::Index t) const {
        return y.dot(theta) - b(theta, t) + c(y, t);
    }

    /// Signal used to start the approximation when no state path is given.
    [[nodiscard]] virtual Vector start(const Vector& y, Eigen::Index t) const;
    /// Linearisation at theta: approximating variance and pseudo-observation.
    void approximate(const Vector& y, const Vector& theta, Eigen::Index t, Matrix& h, Vector& ytilde) const;
};

/// y = theta + eps with a non-Gaussian eps; also used for state disturbances.
class AdditiveNoise : public Distribution {
public:
    [[nodiscard]] Kind kind() const override { return Kind::AdditiveNoise; }
    [[nodiscard]] virtual double logp(const Vector& eps) const = 0;
    /// Gaussian variance matching the log-density gradient at eps.
    [[nodiscard]] virtual Matrix approx_var(const Vector& eps) const = 0;
    /// Variance used before any approximation has been made.
    [[nodiscard]] virtual Matrix nominal_var() const = 0;
};

class Poisson final : public ExpFamily {
public:
    [[nodiscard]] std::string code() const override { return "poisson"; }
    [[nodiscard]] double b(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] double c(const Vector& y, Eigen::Index) const override;
    [[nodiscard]] Matrix d2b(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] Vector id2bdb(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] Vector start(const Vector& y, Eigen::Index t) const override;
};

/// Trial counts may vary with time; times beyond the vector reuse its last entry.
class Binomial final : public ExpFamily {
public:
    explicit Binomial(Vector k, bool binary = false);
    [[nodiscard]] std::string code() const override { return binary_ ? "binary" : "binomial"; }
    [[nodiscard]] double b(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] double c(const Vector& y, Eigen::Index t) const override;
    [[nodiscard]] Matrix d2b(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] Vector id2bdb(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] Vector start(const Vector& y, Eigen::Index t) const override;
    [[nodiscard]] double trials(Eigen::Index t) const;

private:
    Vector k_;
    bool binary_;
};

/// Number of successes y before the k-th failure, success probability exp(theta), theta < 0.
class NegBinomial final : public ExpFamily {
public:
    explicit NegBinomial(Vector k);
    [[nodiscard]] std::string code() const override { return "negbinomial"; }
    [[nodiscard]] double b(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] double c(const Vector& y, Eigen::Index t) const override;
    [[nodiscard]] Matrix d2b(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] Vector id2bdb(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] Vector start(const Vector& y, Eigen::Index t) const override;
    [[nodiscard]] double trials(Eigen::Index t) const;

private:
    Vector k_;
};

/// Exponential with rate -theta, theta < 0.
class Exponential final : public ExpFamily {
public:
    [[nodiscard]] std::string code() const override { return "exp"; }
    [[nodiscard]] double b(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] double c(const Vector&, Eigen::Index) const override { return 0.0; }
    [[nodiscard]] Matrix d2b(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] Vector id2bdb(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] Vector start(const Vector& y, Eigen::Index t) const override;
};

/// h cells; the signal and observation are the counts of the first h-1 cells.
class Multinomial final : public ExpFamily {
public:
    Multinomial(Eigen::Index h, Vector k);
    [[nodiscard]] std::string code() const override { return "multinomial"; }
    [[nodiscard]] Eigen::Index dim() const override { return h_ - 1; }
    [[nodiscard]] double b(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] double c(const Vector& y, Eigen::Index t) const override;
    [[nodiscard]] Matrix d2b(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] Vector id2bdb(const Vector& theta, Eigen::Index t) const override;
    [[nodiscard]] Vector start(const Vector& y, Eigen::Index t) const override;
    [[nodiscard]] double trials(Eigen::Index t) const;
    [[nodiscard]] Eigen::Index cells() const { return h_; }

private:
    Eigen::Index h_;
    Vector k_;
};

/// Scalar exponential family from user functions.
class CustomExpFamily final : public ExpFamily {
public:
    using Fn = std::function<double(double)>;
    CustomExpFamily(Fn b, Fn d2b, Fn id2bdb, Fn c);
    [[nodiscard]] std::string code() const override { return "expfamily"; }
    [[nodiscard]] double b(const Vector& theta, Eigen::Index) const override { return b_(theta(0)); }
    [[nodiscard]] double c(const Vector& y, Eigen::Index) const override { return c_(y(0)); }
    [[nodiscard]] Matrix d2b(const Vector& theta, Eigen::Index) const override;
    [[nodiscard]] Vector id2bdb(const Vector& theta, Eigen::Index) const override;

private:
    Fn b_, d2b_, id2bdb_, c_;
};

/// Student t noise with variance sigma2 and nu > 2 degrees of freedom.
class StudentT final : public AdditiveNoise {
public:
    StudentT(double variance, double nu);
    [[nodiscard]] std::string code() const override { return "t"; }
    [[nodiscard]] double logp(const Vector& eps) const override;
    [[nodiscard]] Matrix approx_var(const Vector& eps) const override;
    [[nodiscard]] Matrix nominal_var() const override;
    [[nodiscard]] double variance() const { return variance_; }
    [[nodiscard]] double nu() const { return nu_; }

private:
    double variance_;
    double nu_;
};

using DistributionPtr = std::shared_ptr<const Distribution>;

/// Arguments for make_distribution; fields irrelevant to a code are ignored.
struct DistributionArgs {
    Vector k;               // trials for binomial, negbinomial, multinomial
    Eigen::Index h = 0;     // multinomial cell count
    double variance = 1.0;  // t
    double nu = 0.0;        // t; zero or less means estimated
    CustomExpFamily::Fn b, d2b, id2bdb, c;
};

/// Codes: poisson, binary, binomial, negbinomial, exp, multinomial, expfamily, t.
[[nodiscard]] DistributionPtr make_distribution(const std::string& code, const DistributionArgs& args = {});

} // namespace ssm
