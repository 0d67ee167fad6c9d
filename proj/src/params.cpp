#include "ssm/params.hpp"

#include <cmath>

namespace ssm {

std::string Transform::code() const {
    switch (kind) {
    case Kind::HalfLog: return "1/2 log";
    case Kind::Log: return "log";
    case Kind::Identity: return "identity";
    case Kind::Arma: return sign > 0 ? "arma" : "arma ma";
    case Kind::Df: return "df";
    case Kind::Logistic: return "logistic";
    case Kind::Cov: return "cov";
    }
    return "identity";
}

Transform Transform::from_code(const std::string& code) {
    if (code == "1/2 log") return half_log();
    if (code == "log") return log();
    if (code == "identity") return identity();
    if (code == "arma") return ar();
    if (code == "arma ma") return ma();
    if (code == "df") return df();
    if (code == "logistic") return logistic();
    if (code == "cov") return cov();
    throw ArgumentError("unknown parameter transform '" + code + "'");
}

Vector durbin_levinson(const Vector& partial) {
    const Eigen::Index p = partial.size();
    Vector phi = Vector::Zero(p);
    Vector prev(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        prev.head(k) = phi.head(k);
        phi(k) = partial(k);
        for (Eigen::Index j = 0; j < k; ++j) phi(j) = prev(j) - partial(k) * prev(k - 1 - j);
    }
    return phi;
}

Vector inverse_durbin_levinson(const Vector& phi) {
    const Eigen::Index p = phi.size();
    Vector partial(p);
    Vector cur = phi;
    for (Eigen::Index k = p - 1; k >= 0; --k) {
        const double kk = cur(k);
        if (!(std::abs(kk) < 1.0)) throw DomainError("polynomial coefficients are outside the stationary region");
        partial(k) = kk;
        Vector next(k);
        for (Eigen::Index j = 0; j < k; ++j) next(j) = (cur(j) + kk * cur(k - 1 - j)) / (1.0 - kk * kk);
        cur.head(k) = next;
    }
    return partial;
}

Matrix cov_from_values(const Vector& values) {
    const auto k = static_cast<Eigen::Index>(std::lround((std::sqrt(8.0 * values.size() + 1.0) - 1.0) / 2.0));
    if (cov_param_count(k) != values.size()) throw StructuralError("covariance group has an invalid size");
    Matrix s(k, k);
    for (Eigen::Index i = 0; i < k; ++i) s(i, i) = values(i);
    Eigen::Index idx = k;
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = j + 1; i < k; ++i) {
            s(i, j) = values(idx);
            s(j, i) = values(idx);
            ++idx;
        }
    return s;
}

Vector values_from_cov(const Matrix& cov) {
    const Eigen::Index k = cov.rows();
    Vector v(cov_param_count(k));
    for (Eigen::Index i = 0; i < k; ++i) v(i) = cov(i, i);
    Eigen::Index idx = k;
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = j + 1; i < k; ++i) v(idx++) = cov(i, j);
    return v;
}

namespace {

std::string name_at(const std::vector<std::string>& names, Eigen::Index i) {
    const auto u = static_cast<std::size_t>(i);
    return u < names.size() ? names[u] : "#" + std::to_string(i + 1);
}

} // namespace

Vector to_unconstrained(const Transform& tr, const Vector& values, const std::vector<std::string>& names) {
    Vector psi(values.size());
    switch (tr.kind) {
    case Transform::Kind::HalfLog:
    case Transform::Kind::Log:
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            if (!(values(i) > 0.0) || !std::isfinite(values(i)))
                throw DomainError("parameter '" + name_at(names, i) + "' must be positive, got " +
                                  std::to_string(values(i)));
            psi(i) = tr.kind == Transform::Kind::HalfLog ? 0.5 * std::log(values(i)) : std::log(values(i));
        }
        return psi;
    case Transform::Kind::Identity:
        for (Eigen::Index i = 0; i < values.size(); ++i)
            if (!std::isfinite(values(i)))
                throw DomainError("parameter '" + name_at(names, i) + "' must be finite");
        return values;
    case Transform::Kind::Arma: {
        Vector partial;
        try {
            partial = inverse_durbin_levinson(static_cast<double>(tr.sign) * values);
        } catch (const DomainError&) {
            throw DomainError("parameters '" + name_at(names, 0) + "'... are outside the " +
                              (tr.sign > 0 ? "stationary" : "invertible") + " region");
        }
        for (Eigen::Index i = 0; i < partial.size(); ++i) psi(i) = std::atanh(partial(i));
        return psi;
    }
    case Transform::Kind::Df:
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            if (!(values(i) > 2.0) || !std::isfinite(values(i)))
                throw DomainError("parameter '" + name_at(names, i) + "' must exceed 2");
            psi(i) = std::log(values(i) - 2.0);
        }
        return psi;
    case Transform::Kind::Logistic:
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            const double u = values(i) / tr.scale;
            if (!(u > 0.0 && u < 1.0))
                throw DomainError("parameter '" + name_at(names, i) + "' must lie in (0, " + std::to_string(tr.scale) +
                                  ")");
            psi(i) = std::log(u / (1.0 - u));
        }
        return psi;
    case Transform::Kind::Cov: {
        const Matrix s = cov_from_values(values);
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() != Eigen::Success || !s.allFinite())
            throw DomainError("covariance parameters starting at '" + name_at(names, 0) +
                              "' are not positive definite");
        const Matrix l = llt.matrixL();
        const Eigen::Index k = s.rows();
        for (Eigen::Index i = 0; i < k; ++i) psi(i) = std::log(l(i, i));
        Eigen::Index idx = k;
        for (Eigen::Index j = 0; j < k; ++j)
            for (Eigen::Index i = j + 1; i < k; ++i) psi(idx++) = l(i, j);
        return psi;
    }
    }
    return psi;
}

Vector from_unconstrained(const Transform& tr, const Vector& psi) {
    Vector v(psi.size());
    switch (tr.kind) {
    case Transform::Kind::HalfLog: return (2.0 * psi.array()).exp().matrix();
    case Transform::Kind::Log: return psi.array().exp().matrix();
    case Transform::Kind::Identity: return psi;
    case Transform::Kind::Arma: {
        Vector partial = psi.array().tanh().matrix();
        return static_cast<double>(tr.sign) * durbin_levinson(partial);
    }
    case Transform::Kind::Df: return (2.0 + psi.array().exp()).matrix();
    case Transform::Kind::Logistic:
        for (Eigen::Index i = 0; i < psi.size(); ++i) v(i) = tr.scale / (1.0 + std::exp(-psi(i)));
        return v;
    case Transform::Kind::Cov: {
        const auto k = static_cast<Eigen::Index>(std::lround((std::sqrt(8.0 * psi.size() + 1.0) - 1.0) / 2.0));
        Matrix l = Matrix::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) l(i, i) = std::exp(psi(i));
        Eigen::Index idx = k;
        for (Eigen::Index j = 0; j < k; ++j)
            for (Eigen::Index i = j + 1; i < k; ++i) l(i, j) = psi(idx++);
        return values_from_cov(l * l.transpose());
    }
    }
    return v;
}

void ParamSet::add_group(const std::vector<std::string>& names, const Transform& tr, const Vector& values) {
    const auto count = static_cast<Eigen::Index>(names.size());
    if (count == 0) return;
    Vector v = values.size() == 0 ? from_unconstrained(tr, Vector::Zero(count)) : values;
    if (v.size() != count) throw StructuralError("parameter group values do not match its names");
    (void)to_unconstrained(tr, v, names);
    groups_.push_back({size(), count, tr});
    names_.insert(names_.end(), names.begin(), names.end());
    Vector all(values_.size() + count);
    all << values_, v;
    values_ = std::move(all);
}

void ParamSet::set_values(const Vector& values) {
    if (values.size() != size())
        throw StructuralError("expected " + std::to_string(size()) + " parameter values, got " +
                              std::to_string(values.size()));
    for (const auto& g : groups_) {
        std::vector<std::string> gn(names_.begin() + g.start, names_.begin() + g.start + g.count);
        (void)to_unconstrained(g.transform, values.segment(g.start, g.count), gn);
    }
    values_ = values;
}

Vector ParamSet::psi() const {
    Vector psi(size());
    for (const auto& g : groups_) {
        std::vector<std::string> gn(names_.begin() + g.start, names_.begin() + g.start + g.count);
        psi.segment(g.start, g.count) = to_unconstrained(g.transform, values_.segment(g.start, g.count), gn);
    }
    return psi;
}

Vector ParamSet::values_for_psi(const Vector& psi) const {
    if (psi.size() != size())
        throw StructuralError("expected " + std::to_string(size()) + " transformed parameters, got " +
                              std::to_string(psi.size()));
    Vector v(size());
    for (const auto& g : groups_) v.segment(g.start, g.count) = from_unconstrained(g.transform, psi.segment(g.start, g.count));
    return v;
}

void ParamSet::set_psi(const Vector& psi) { values_ = values_for_psi(psi); }

Eigen::Index ParamSet::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<Eigen::Index>(i);
    return -1;
}

ParamSet ParamSet::subset(const BoolVector& keep) const {
    if (static_cast<Eigen::Index>(keep.size()) != size()) throw StructuralError("parameter mask has the wrong length");
    ParamSet out;
    for (const auto& g : groups_) {
        Eigen::Index kept = 0;
        for (Eigen::Index i = g.start; i < g.start + g.count; ++i) kept += keep[static_cast<std::size_t>(i)] ? 1 : 0;
        if (kept == 0) continue;
        if (kept != g.count) throw StructuralError("cannot remove part of a parameter group");
        std::vector<std::string> gn(names_.begin() + g.start, names_.begin() + g.start + g.count);
        out.add_group(gn, g.transform, values_.segment(g.start, g.count));
    }
    return out;
}

ParamSet ParamSet::concat(const std::vector<const ParamSet*>& sets, std::vector<std::vector<Eigen::Index>>* pmasks) {
    ParamSet out;
    if (pmasks) pmasks->clear();
    for (const ParamSet* s : sets) {
        std::vector<Eigen::Index> idx;
        for (const auto& g : s->groups_) {
            std::vector<std::string> gn(s->names_.begin() + g.start, s->names_.begin() + g.start + g.count);
            const Eigen::Index base = out.size();
            out.add_group(gn, g.transform, s->values_.segment(g.start, g.count));
            for (Eigen::Index i = 0; i < g.count; ++i) idx.push_back(base + i);
        }
        if (pmasks) pmasks->push_back(std::move(idx));
    }
    return out;
}

} // namespace ssm
