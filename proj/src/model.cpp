#include "ssm/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ssm {

namespace {

constexpr std::array<const char*, kElementCount> kCodes = {"H",  "Z",  "T",  "R",  "Q",  "c",  "a1",  "P1",
                                                             "Hd", "Zd", "Td", "Rd", "Qd", "cd", "Hng", "Qng"};

DynamicMatrix& matrix_for(StateSpaceModel& m, int e) {
    switch (e % 8) {
    case 0: return m.H;
    case 1: return m.Z;
    case 2: return m.T;
    case 3: return m.R;
    case 4: return m.Q;
    case 5: return m.c;
    case 6: return m.a1;
    default: return m.P1;
    }
}

void apply_param(StateSpaceModel& model, const Vector& param) {
    const auto nb = model.updates.size();
    std::vector<UpdateOutput> outs(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        const auto& b = model.updates[i];
        Vector sub(static_cast<Eigen::Index>(b.pmask.size()));
        for (std::size_t j = 0; j < b.pmask.size(); ++j) sub(static_cast<Eigen::Index>(j)) = param(b.pmask[j]);
        outs[i] = b.fn(sub);
        for (int e = 0; e < kMatrixElementCount; ++e) {
            if (!b.adj.test(static_cast<Element>(e))) continue;
            if (!outs[i].has[static_cast<std::size_t>(e)])
                throw StructuralError("update function #" + std::to_string(i + 1) + " did not produce " + kCodes[e]);
            if (!outs[i].mats[static_cast<std::size_t>(e)].allFinite())
                throw NumericError("update function #" + std::to_string(i + 1) + " produced non-finite " + kCodes[e]);
        }
        if (b.adj.test(Element::Hng) && !outs[i].has_hng)
            throw StructuralError("update function #" + std::to_string(i + 1) + " did not produce Hng");
        if (b.adj.test(Element::Qng) && !outs[i].has_qng)
            throw StructuralError("update function #" + std::to_string(i + 1) + " did not produce Qng");
    }

    for (int e = 0; e < kMatrixElementCount; ++e) {
        std::vector<const Matrix*> parts;
        for (std::size_t i = 0; i < nb; ++i)
            if (model.updates[i].adj.test(static_cast<Element>(e))) parts.push_back(&outs[i].mats[static_cast<std::size_t>(e)]);
        if (parts.empty()) continue;
        Eigen::Index rows = 0;
        const Eigen::Index cols = parts.front()->cols();
        for (const Matrix* m : parts) {
            if (e < 8 && m->cols() != 1)
                throw StructuralError(std::string("stationary update of ") + kCodes[e] + " must be a single column");
            if (m->cols() != cols)
                throw StructuralError(std::string("dynamic updates of ") + kCodes[e] + " have differing lengths");
            rows += m->rows();
        }
        Matrix stacked(rows, cols);
        Eigen::Index at = 0;
        for (const Matrix* m : parts) {
            stacked.middleRows(at, m->rows()) = *m;
            at += m->rows();
        }
        DynamicMatrix& target = matrix_for(model, e);
        if (e < 8)
            target.set_variable(stacked.col(0));
        else
            target.set_dynamic_variable(stacked);
    }

    auto replace_ng = [&](std::vector<NonGaussianSpec>& specs, Element el, bool hng) {
        std::vector<DistributionPtr> all;
        for (std::size_t i = 0; i < nb; ++i)
            if (model.updates[i].adj.test(el)) {
                const auto& src = hng ? outs[i].hng : outs[i].qng;
                all.insert(all.end(), src.begin(), src.end());
            }
        std::size_t k = 0;
        bool any = false;
        for (std::size_t i = 0; i < nb; ++i) any = any || model.updates[i].adj.test(el);
        if (!any) return;
        for (auto& s : specs) {
            if (!s.variable) continue;
            if (k >= all.size()) throw StructuralError(std::string("too few ") + kCodes[static_cast<int>(el)] + " outputs");
            s.dist = all[k++];
        }
        if (k != all.size()) throw StructuralError(std::string("too many ") + kCodes[static_cast<int>(el)] + " outputs");
    };
    replace_ng(model.Hng, Element::Hng, true);
    replace_ng(model.Qng, Element::Qng, false);
}

bool is_null_noise(const StateSpaceModel& m) {
    if (!m.Hng.empty() || m.H.variable_count() > 0 || m.H.dynamic_variable_count() > 0) return false;
    if (!m.H.mat().isZero(0.0)) return false;
    return m.H.is_stationary() || m.H.dvec().isZero(0.0);
}

} // namespace

const char* element_code(Element e) { return kCodes[static_cast<std::size_t>(e)]; }

AdjacencyRow::AdjacencyRow(std::initializer_list<Element> elems) {
    for (Element e : elems) set(e);
}

AdjacencyRow AdjacencyRow::parse(const std::string& text) {
    AdjacencyRow row;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == ' ' || text[i] == ',') {
            ++i;
            continue;
        }
        std::size_t best = 0;
        int which = -1;
        for (int e = 0; e < kElementCount; ++e) {
            const std::string code = kCodes[static_cast<std::size_t>(e)];
            if (code.size() > best && text.compare(i, code.size(), code) == 0) {
                best = code.size();
                which = e;
            }
        }
        if (text.compare(i, 3, "Znl") == 0 || text.compare(i, 3, "Tnl") == 0)
            throw OutOfScopeError("adjacency '" + text + "': nonlinear unsupported (" + text.substr(i, 3) + ")");
        if (which < 0) throw ArgumentError("adjacency '" + text + "': unknown element at '" + text.substr(i) + "'");
        row.set(static_cast<Element>(which));
        i += best;
    }
    return row;
}

std::string AdjacencyRow::str() const {
    std::string out;
    for (int e = 0; e < kElementCount; ++e)
        if (test(static_cast<Element>(e))) out += kCodes[static_cast<std::size_t>(e)];
    return out;
}

void UpdateOutput::set(Element e, Matrix value) {
    const auto i = static_cast<std::size_t>(e);
    if (i >= static_cast<std::size_t>(kMatrixElementCount)) throw ArgumentError("not a matrix element");
    mats[i] = std::move(value);
    has[i] = true;
}

void UpdateOutput::set_ng(Element e, std::vector<DistributionPtr> dists) {
    if (e == Element::Hng) {
        hng = std::move(dists);
        has_hng = true;
    } else if (e == Element::Qng) {
        qng = std::move(dists);
        has_qng = true;
    } else {
        throw ArgumentError("not a non-Gaussian element");
    }
}

Eigen::Index StateSpaceModel::q() const {
    Eigen::Index q = 0;
    for (Eigen::Index i = 0; i < P1.rows(); ++i)
        if (std::isinf(P1.mat()(i, i))) ++q;
    return q;
}

Eigen::Index StateSpaceModel::n() const {
    Eigen::Index n = 1;
    for (const DynamicMatrix* d : {&H, &Z, &T, &R, &Q, &c})
        if (!d->is_stationary()) n = std::max(n, d->n());
    return n;
}

void StateSpaceModel::set_param(const Vector& values) {
    params.set_values(values);
    apply_param(*this, values);
}

void StateSpaceModel::set_psi(const Vector& psi) {
    params.set_psi(psi);
    apply_param(*this, params.values());
}

void StateSpaceModel::refresh() { apply_param(*this, params.values()); }

StateSpaceModel apply_updates(const StateSpaceModel& model, const Vector& psi) {
    StateSpaceModel out = model;
    out.set_psi(psi);
    return out;
}

StateSpaceModel combine_additive(const std::vector<StateSpaceModel>& models, std::vector<std::string>* warnings) {
    if (models.empty()) throw ArgumentError("nothing to combine");
    if (models.size() == 1) return models.front();
    const Eigen::Index p = models.front().p();
    for (std::size_t k = 0; k < models.size(); ++k)
        if (models[k].p() != p)
            throw StructuralError("model " + std::to_string(k + 1) + " has " + std::to_string(models[k].p()) +
                                  " observation rows, expected " + std::to_string(p));

    StateSpaceModel out;
    out.H = models.front().H;
    out.Hng = models.front().Hng;
    out.Z = models.front().Z;
    out.T = models.front().T;
    out.R = models.front().R;
    out.Q = models.front().Q;
    out.c = models.front().c;
    out.a1 = models.front().a1;
    out.P1 = models.front().P1;
    out.Qng = models.front().Qng;
    out.name = models.front().name;

    std::vector<Eigen::Index> m_off{0}, r_off{0};
    for (std::size_t k = 1; k < models.size(); ++k) {
        const auto& mk = models[k];
        m_off.push_back(out.m());
        r_off.push_back(out.r());
        out.Z = horzcat(out.Z, mk.Z);
        out.T = blkdiag(out.T, mk.T);
        out.R = blkdiag(out.R, mk.R);
        out.Q = blkdiag(out.Q, mk.Q);
        out.c = vertcat(out.c, mk.c);
        out.a1 = vertcat(out.a1, mk.a1);
        out.P1 = blkdiag(out.P1, mk.P1);
        for (NonGaussianSpec s : mk.Qng) {
            for (auto& row : s.rows) row += r_off.back();
            out.Qng.push_back(std::move(s));
        }
        if (!is_null_noise(mk) && warnings)
            warnings->push_back("observation disturbance of model " + std::to_string(k + 1) + " (" + mk.name +
                                ") discarded; only the first model's H is kept");
        if (!mk.name.empty()) out.name += out.name.empty() ? mk.name : " + " + mk.name;
    }

    // Drop H outputs of later models, then parameters only they used.
    std::vector<std::vector<UpdateBinding>> kept(models.size());
    std::vector<ParamSet> subsets(models.size());
    std::vector<std::vector<Eigen::Index>> remap(models.size());
    for (std::size_t k = 0; k < models.size(); ++k) {
        const auto& mk = models[k];
        const auto w = static_cast<std::size_t>(mk.w());
        std::vector<int> used(w, 0), used_kept(w, 0);
        for (UpdateBinding b : mk.updates) {
            for (auto i : b.pmask) used[static_cast<std::size_t>(i)] = 1;
            if (k > 0) {
                b.adj.set(Element::H, false);
                b.adj.set(Element::Hd, false);
                b.adj.set(Element::Hng, false);
            }
            if (b.adj.none()) continue;
            for (auto i : b.pmask) used_kept[static_cast<std::size_t>(i)] = 1;
            kept[k].push_back(std::move(b));
        }
        BoolVector keep(w);
        for (std::size_t i = 0; i < w; ++i) keep[i] = used_kept[i] || !used[i];
        subsets[k] = mk.params.subset(keep);
        remap[k].assign(w, -1);
        Eigen::Index next = 0;
        for (std::size_t i = 0; i < w; ++i)
            if (keep[i]) remap[k][i] = next++;
    }

    std::vector<const ParamSet*> ptrs;
    for (const auto& s : subsets) ptrs.push_back(&s);
    std::vector<std::vector<Eigen::Index>> pmasks;
    out.params = ParamSet::concat(ptrs, &pmasks);

    std::set<std::string> seen;
    for (std::size_t k = 0; k < models.size(); ++k)
        for (auto idx : pmasks[k]) {
            const std::string& nm = out.params.names()[static_cast<std::size_t>(idx)];
            if (seen.count(nm)) out.params.rename(idx, nm + " (" + std::to_string(k + 1) + ")");
            seen.insert(out.params.names()[static_cast<std::size_t>(idx)]);
        }

    auto translate = [&](std::size_t k, const std::vector<Eigen::Index>& local) {
        std::vector<Eigen::Index> g;
        for (auto i : local) {
            const Eigen::Index j = remap[k][static_cast<std::size_t>(i)];
            if (j >= 0) g.push_back(pmasks[k][static_cast<std::size_t>(j)]);
        }
        return g;
    };

    for (std::size_t k = 0; k < models.size(); ++k) {
        for (auto& b : kept[k]) {
            b.pmask = translate(k, b.pmask);
            out.updates.push_back(std::move(b));
        }
        for (Component c : models[k].components) {
            if (k > 0 && c.noise) continue;
            c.state_begin += m_off[k];
            c.dist_begin += r_off[k];
            c.pmask = translate(k, c.pmask);
            out.components.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<std::string> validate(const StateSpaceModel& model) {
    std::vector<std::string> d;
    const Eigen::Index p = model.Z.rows(), m = model.T.rows(), r = model.R.cols();
    auto shape = [&](const DynamicMatrix& x, const char* nm, Eigen::Index rows, Eigen::Index cols) {
        if (x.rows() != rows || x.cols() != cols)
            d.push_back(std::string(nm) + " is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                        ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    };
    shape(model.H, "H", p, p);
    shape(model.Z, "Z", p, m);
    shape(model.T, "T", m, m);
    shape(model.R, "R", m, r);
    shape(model.Q, "Q", r, r);
    shape(model.c, "c", m, 1);
    shape(model.a1, "a1", m, 1);
    shape(model.P1, "P1", m, m);
    if (!d.empty()) return d;

    if (!model.a1.mat().allFinite()) d.push_back("a1 has non-finite entries");
    const Matrix& P1 = model.P1.mat();
    std::vector<Eigen::Index> fin;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i)
            if (i != j && !std::isfinite(P1(i, j))) {
                d.push_back("P1 has a non-finite off-diagonal entry at (" + std::to_string(i + 1) + ", " +
                            std::to_string(j + 1) + ")");
                i = m;
                j = m;
            }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::isnan(P1(i, i)) || P1(i, i) == -kInf) d.push_back("P1 diagonal entry " + std::to_string(i + 1) + " is invalid");
        else if (std::isfinite(P1(i, i))) fin.push_back(i);
    }
    if (d.empty() && !fin.empty()) {
        Matrix f(static_cast<Eigen::Index>(fin.size()), static_cast<Eigen::Index>(fin.size()));
        for (std::size_t a = 0; a < fin.size(); ++a)
            for (std::size_t b = 0; b < fin.size(); ++b)
                f(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = P1(fin[a], fin[b]);
        const double scale = 1.0 + f.cwiseAbs().maxCoeff();
        if ((f - f.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) d.push_back("P1 is not symmetric");
        else {
            Eigen::SelfAdjointEigenSolver<Matrix> es(f);
            if (es.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, f.trace())) d.push_back("P1 is not positive semidefinite");
        }
    }

    auto check_ng = [&](const std::vector<NonGaussianSpec>& specs, Eigen::Index size, const char* nm) {
        std::vector<int> claimed(static_cast<std::size_t>(size), 0);
        for (const auto& s : specs) {
            if (!s.dist) {
                d.push_back(std::string(nm) + " has an empty distribution");
                continue;
            }
            if (static_cast<Eigen::Index>(s.rows.size()) != s.dist->dim())
                d.push_back(std::string(nm) + " " + s.dist->code() + " claims " + std::to_string(s.rows.size()) +
                            " rows but has dimension " + std::to_string(s.dist->dim()));
            for (auto row : s.rows) {
                if (row < 0 || row >= size) {
                    d.push_back(std::string(nm) + " row " + std::to_string(row + 1) + " out of range");
                    continue;
                }
                if (claimed[static_cast<std::size_t>(row)]++)
                    d.push_back(std::string(nm) + " row " + std::to_string(row + 1) + " is claimed twice");
            }
        }
    };
    check_ng(model.Hng, p, "Hng");
    check_ng(model.Qng, r, "Qng");

    for (std::size_t i = 0; i < model.updates.size(); ++i) {
        for (auto j : model.updates[i].pmask)
            if (j < 0 || j >= model.w()) d.push_back("update function #" + std::to_string(i + 1) + " uses a missing parameter");
        if (!model.updates[i].fn) d.push_back("update function #" + std::to_string(i + 1) + " is empty");
    }
    for (const auto& c : model.components)
        if (c.state_begin < 0 || c.state_begin + c.state_count > m || c.dist_begin < 0 ||
            c.dist_begin + c.dist_count > r)
            d.push_back("component '" + c.name + "' spans states outside the model");
    return d;
}

void require_valid(const StateSpaceModel& model) {
    const auto d = validate(model);
    if (!d.empty()) throw StructuralError(d.front());
}

std::vector<Matrix> signal(const Matrix& alpha, const StateSpaceModel& model) {
    if (alpha.rows() != model.m())
        throw StructuralError("state has " + std::to_string(alpha.rows()) + " rows, model has m = " +
                              std::to_string(model.m()));
    std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
    for (const auto& c : model.components)
        if (!c.noise) spans.emplace_back(c.state_begin, c.state_count);
    if (spans.empty() && model.m() > 0) spans.emplace_back(0, model.m());
    const Eigen::Index n = alpha.cols();
    std::vector<Matrix> out(spans.size(), Matrix::Zero(model.p(), n));
    const Matrix z0 = model.Z.mat();
    for (Eigen::Index t = 0; t < n; ++t) {
        const Matrix zt = model.Z.is_stationary() ? z0 : model.Z.at(t);
        for (std::size_t k = 0; k < spans.size(); ++k) {
            const auto [b, w] = spans[k];
            if (w > 0) out[k].col(t) = zt.middleCols(b, w) * alpha.block(b, t, w, 1);
        }
    }
    return out;
}

Matrix signal_rows(const Matrix& alpha, const StateSpaceModel& model) {
    if (model.p() != 1) throw StructuralError("signal_rows needs a univariate model");
    const auto parts = signal(alpha, model);
    Matrix out(static_cast<Eigen::Index>(parts.size()), alpha.cols());
    for (std::size_t k = 0; k < parts.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = parts[k].row(0);
    return out;
}

} // namespace ssm
