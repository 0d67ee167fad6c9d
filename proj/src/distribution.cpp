#include "ssm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ssm {

namespace {

double clamp_at(const Vector& k, Eigen::Index t) {
    return k(std::min<Eigen::Index>(std::max<Eigen::Index>(t, 0), k.size() - 1));
}

Vector check_trials(Vector k) {
    if (k.size() == 0) throw ArgumentError("number of trials must be given");
    for (Eigen::Index i = 0; i < k.size(); ++i)
        if (!(k(i) > 0.0) || !std::isfinite(k(i))) throw ArgumentError("number of trials must be positive");
    return k;
}

double log_choose(double n, double r) { return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0); }

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void require_negative(double theta, const char* what) {
    if (!(theta < 0.0)) throw DomainError(std::string(what) + " signal must be negative, got " + std::to_string(theta));
}

} // namespace

Vector ExpFamily::start(const Vector& y, Eigen::Index) const { return Vector::Zero(y.size()); }

void ExpFamily::approximate(const Vector& y, const Vector& theta, Eigen::Index t, Matrix& h, Vector& ytilde) const {
    const Matrix curv = d2b(theta, t);
    Eigen::LLT<Matrix> llt(curv);
    if (llt.info() != Eigen::Success || !curv.allFinite())
        throw DomainError(code() + ": curvature of b is not positive at time " + std::to_string(t + 1));
    h = llt.solve(Matrix::Identity(curv.rows(), curv.cols()));
    h = 0.5 * (h + h.transpose());
    ytilde = theta - id2bdb(theta, t) + h * y;
}

double Poisson::b(const Vector& theta, Eigen::Index) const { return std::exp(theta(0)); }
double Poisson::c(const Vector& y, Eigen::Index) const { return -std::lgamma(y(0) + 1.0); }
Matrix Poisson::d2b(const Vector& theta, Eigen::Index) const { return Matrix::Constant(1, 1, std::exp(theta(0))); }
Vector Poisson::id2bdb(const Vector&, Eigen::Index) const { return Vector::Ones(1); }

Binomial::Binomial(Vector k, bool binary) : k_(check_trials(std::move(k))), binary_(binary) {}
double Binomial::trials(Eigen::Index t) const { return clamp_at(k_, t); }
double Binomial::b(const Vector& theta, Eigen::Index t) const { return trials(t) * softplus(theta(0)); }
double Binomial::c(const Vector& y, Eigen::Index t) const { return log_choose(trials(t), y(0)); }
Matrix Binomial::d2b(const Vector& theta, Eigen::Index t) const {
    const double pi = 1.0 / (1.0 + std::exp(-theta(0)));
    return Matrix::Constant(1, 1, trials(t) * pi * (1.0 - pi));
}
Vector Binomial::id2bdb(const Vector& theta, Eigen::Index) const {
    return Vector::Constant(1, 1.0 + std::exp(theta(0)));
}

NegBinomial::NegBinomial(Vector k) : k_(check_trials(std::move(k))) {}
double NegBinomial::trials(Eigen::Index t) const { return clamp_at(k_, t); }
double NegBinomial::b(const Vector& theta, Eigen::Index t) const {
    require_negative(theta(0), "negative binomial");
    return -trials(t) * std::log1p(-std::exp(theta(0)));
}
double NegBinomial::c(const Vector& y, Eigen::Index t) const { return log_choose(y(0) + trials(t) - 1.0, y(0)); }
Matrix NegBinomial::d2b(const Vector& theta, Eigen::Index t) const {
    require_negative(theta(0), "negative binomial");
    const double e = std::exp(theta(0));
    return Matrix::Constant(1, 1, trials(t) * e / ((1.0 - e) * (1.0 - e)));
}
Vector NegBinomial::id2bdb(const Vector& theta, Eigen::Index) const {
    return Vector::Constant(1, 1.0 - std::exp(theta(0)));
}

double Exponential::b(const Vector& theta, Eigen::Index) const {
    require_negative(theta(0), "exponential");
    return -std::log(-theta(0));
}
Matrix Exponential::d2b(const Vector& theta, Eigen::Index) const {
    require_negative(theta(0), "exponential");
    return Matrix::Constant(1, 1, 1.0 / (theta(0) * theta(0)));
}
Vector Exponential::id2bdb(const Vector& theta, Eigen::Index) const { return -theta; }

Multinomial::Multinomial(Eigen::Index h, Vector k) : h_(h), k_(check_trials(std::move(k))) {
    if (h < 2) throw ArgumentError("multinomial needs at least 2 cells");
}
double Multinomial::trials(Eigen::Index t) const { return clamp_at(k_, t); }

double Multinomial::b(const Vector& theta, Eigen::Index t) const {
    const double mx = std::max(0.0, theta.maxCoeff());
    const double s = std::exp(-mx) + (theta.array() - mx).exp().sum();
    return trials(t) * (mx + std::log(s));
}

double Multinomial::c(const Vector& y, Eigen::Index t) const {
    const double k = trials(t);
    double out = std::lgamma(k + 1.0) - std::lgamma(k - y.sum() + 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) out -= std::lgamma(y(i) + 1.0);
    return out;
}

Matrix Multinomial::d2b(const Vector& theta, Eigen::Index t) const {
    const double mx = std::max(0.0, theta.maxCoeff());
    const Vector e = (theta.array() - mx).exp().matrix();
    const Vector pi = e / (std::exp(-mx) + e.sum());
    Matrix out = -pi * pi.transpose();
    out.diagonal() += pi;
    return trials(t) * out;
}

Vector Multinomial::id2bdb(const Vector& theta, Eigen::Index) const {
    // (diag pi - pi pi')^{-1} pi = 1 / pi_0 in every cell, pi_0 the last cell probability
    const double mx = std::max(0.0, theta.maxCoeff());
    const double e0 = std::exp(-mx);
    const double total = e0 + (theta.array() - mx).exp().sum();
    return Vector::Constant(theta.size(), total / e0);
}

CustomExpFamily::CustomExpFamily(Fn b, Fn d2b, Fn id2bdb, Fn c)
    : b_(std::move(b)), d2b_(std::move(d2b)), id2bdb_(std::move(id2bdb)), c_(std::move(c)) {
    if (!b_ || !d2b_ || !id2bdb_ || !c_) throw ArgumentError("expfamily needs b, d2b, id2bdb and c");
}
Matrix CustomExpFamily::d2b(const Vector& theta, Eigen::Index) const {
    return Matrix::Constant(1, 1, d2b_(theta(0)));
}
Vector CustomExpFamily::id2bdb(const Vector& theta, Eigen::Index) const {
    return Vector::Constant(1, id2bdb_(theta(0)));
}

StudentT::StudentT(double variance, double nu) : variance_(variance), nu_(nu) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("t variance must be positive");
    if (!(nu > 2.0)) throw DomainError("t degrees of freedom must exceed 2");
}

double StudentT::logp(const Vector& eps) const {
    const double scale2 = (nu_ - 2.0) * variance_;
    const double e = eps(0);
    return std::lgamma((nu_ + 1.0) / 2.0) - std::lgamma(nu_ / 2.0) - 0.5 * std::log(std::numbers::pi * scale2) -
           (nu_ + 1.0) / 2.0 * std::log1p(e * e / scale2);
}

Matrix StudentT::approx_var(const Vector& eps) const {
    const double e = eps(0);
    return Matrix::Constant(1, 1, ((nu_ - 2.0) * variance_ + e * e) / (nu_ + 1.0));
}

Matrix StudentT::nominal_var() const { return Matrix::Constant(1, 1, variance_); }

DistributionPtr make_distribution(const std::string& code, const DistributionArgs& args) {
    if (code == "poisson") return std::make_shared<Poisson>();
    if (code == "binary") return std::make_shared<Binomial>(Vector::Ones(1), true);
    if (code == "binomial") return std::make_shared<Binomial>(args.k);
    if (code == "negbinomial") return std::make_shared<NegBinomial>(args.k);
    if (code == "exp") return std::make_shared<Exponential>();
    if (code == "multinomial") return std::make_shared<Multinomial>(args.h, args.k);
    if (code == "expfamily") return std::make_shared<CustomExpFamily>(args.b, args.d2b, args.id2bdb, args.c);
    if (code == "t") return std::make_shared<StudentT>(args.variance, args.nu > 0.0 ? args.nu : 4.0);
    if (code == "zmsv" || code == "mix" || code == "error")
        throw OutOfScopeError("catalog: out of scope distribution '" + code + "'");
    throw ArgumentError("unknown distribution '" + code + "'");
}

} // namespace ssm

namespace ssm {

// Empirical link of the observation, shrunk away from the boundary.
Vector Poisson::start(const Vector& y, Eigen::Index) const { return Vector::Constant(1, std::log(std::max(y(0), 0.0) + 0.5)); }

Vector Binomial::start(const Vector& y, Eigen::Index t) const {
    const double k = trials(t);
    return Vector::Constant(1, std::log((y(0) + 0.5) / (k - y(0) + 0.5)));
}

Vector Multinomial::start(const Vector& y, Eigen::Index t) const {
    const double rest = trials(t) - y.sum();
    return ((y.array() + 0.5) / (rest + 0.5)).log().matrix();
}

Vector NegBinomial::start(const Vector& y, Eigen::Index t) const {
    const double k = trials(t);
    return Vector::Constant(1, std::log((y(0) + 0.5) / (y(0) + k + 0.5)));
}

Vector Exponential::start(const Vector& y, Eigen::Index) const { return Vector::Constant(1, -1.0 / std::max(y(0), 1e-2)); }

} // namespace ssm
