#include "ssm/dynamic_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace ssm {

namespace {

BoolMatrix false_mask(Eigen::Index r, Eigen::Index c) { return BoolMatrix::Constant(r, c, false); }

Matrix extend_cols(const Matrix& m, Eigen::Index n) {
    if (m.cols() >= n || m.rows() == 0) {
        Matrix out = m;
        if (m.rows() == 0) out.resize(0, std::max<Eigen::Index>(n, m.cols()));
        return out;
    }
    Matrix out(m.rows(), n);
    out.leftCols(m.cols()) = m;
    for (Eigen::Index j = m.cols(); j < n; ++j) out.col(j) = m.col(m.cols() - 1);
    return out;
}

BoolMatrix bool_blkdiag(const BoolMatrix& a, const BoolMatrix& b) {
    BoolMatrix out = false_mask(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

// Dynamic values of the combined matrix must follow the column-major order of the
// combined dmmask, so rows of dvec are interleaved according to cell positions.
DynamicMatrix assemble(const Matrix& mat, const BoolMatrix& mmask, const BoolMatrix& dmmask,
                       const DynamicMatrix& a, Eigen::Index ar0, Eigen::Index ac0, const DynamicMatrix& b,
                       Eigen::Index br0, Eigen::Index bc0) {
    if (dmmask.count() == 0) return DynamicMatrix(mat, mmask);
    const Eigen::Index n = std::max(a.is_stationary() ? 1 : a.n(), b.is_stationary() ? 1 : b.n());
    const Matrix da = extend_cols(a.dvec(), n);
    const Matrix db = extend_cols(b.dvec(), n);

    // index of each dynamic cell within its source
    Eigen::MatrixXi src = Eigen::MatrixXi::Constant(mat.rows(), mat.cols(), -1);
    Eigen::MatrixXi row = Eigen::MatrixXi::Constant(mat.rows(), mat.cols(), -1);
    int k = 0;
    for (auto [i, j] : masked_cells(a.dmmask())) {
        src(ar0 + i, ac0 + j) = 0;
        row(ar0 + i, ac0 + j) = k++;
    }
    k = 0;
    for (auto [i, j] : masked_cells(b.dmmask())) {
        src(br0 + i, bc0 + j) = 1;
        row(br0 + i, bc0 + j) = k++;
    }

    const auto cells = masked_cells(dmmask);
    Matrix dvec(static_cast<Eigen::Index>(cells.size()), n);
    BoolVector dvmask(cells.size());
    for (std::size_t r = 0; r < cells.size(); ++r) {
        auto [i, j] = cells[r];
        const int s = src(i, j);
        const int q = row(i, j);
        const auto ri = static_cast<Eigen::Index>(r);
        if (s == 0) {
            dvec.row(ri) = da.row(q);
            dvmask[r] = a.dvmask()[static_cast<std::size_t>(q)];
        } else {
            dvec.row(ri) = db.row(q);
            dvmask[r] = b.dvmask()[static_cast<std::size_t>(q)];
        }
    }
    return DynamicMatrix(mat, mmask, dmmask, std::move(dvec), std::move(dvmask));
}

} // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> masked_cells(const BoolMatrix& mask) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i)
            if (mask(i, j)) out.emplace_back(i, j);
    return out;
}

DynamicMatrix::DynamicMatrix(Matrix mat)
    : mat_(std::move(mat)),
      mmask_(false_mask(mat_.rows(), mat_.cols())),
      dmmask_(false_mask(mat_.rows(), mat_.cols())),
      dvec_(0, 1) {}

DynamicMatrix::DynamicMatrix(Matrix mat, BoolMatrix mmask)
    : mat_(std::move(mat)), mmask_(std::move(mmask)), dmmask_(false_mask(mat_.rows(), mat_.cols())), dvec_(0, 1) {
    check_invariants();
}

DynamicMatrix::DynamicMatrix(Matrix mat, BoolMatrix mmask, BoolMatrix dmmask, Matrix dvec, BoolVector dvmask)
    : mat_(std::move(mat)),
      mmask_(std::move(mmask)),
      dmmask_(std::move(dmmask)),
      dvec_(std::move(dvec)),
      dvmask_(std::move(dvmask)) {
    if (mmask_.size() == 0 && mat_.size() != 0) mmask_ = false_mask(mat_.rows(), mat_.cols());
    if (dmmask_.size() == 0 && mat_.size() != 0) dmmask_ = false_mask(mat_.rows(), mat_.cols());
    if (dvmask_.empty()) dvmask_.assign(static_cast<std::size_t>(dvec_.rows()), false);
    if (dvec_.rows() == 0 && dvec_.cols() == 0) dvec_.resize(0, 1);
    check_invariants();
}

DynamicMatrix DynamicMatrix::zeros(Eigen::Index rows, Eigen::Index cols) {
    return DynamicMatrix(Matrix::Zero(rows, cols));
}

void DynamicMatrix::check_invariants() const {
    if (mmask_.rows() != mat_.rows() || mmask_.cols() != mat_.cols())
        throw StructuralError("variable mask does not match matrix shape");
    if (dmmask_.rows() != mat_.rows() || dmmask_.cols() != mat_.cols())
        throw StructuralError("dynamic mask does not match matrix shape");
    if (dmmask_.count() != dvec_.rows())
        throw StructuralError("dynamic value rows (" + std::to_string(dvec_.rows()) +
                              ") do not match dynamic cell count (" + std::to_string(dmmask_.count()) + ")");
    if (static_cast<Eigen::Index>(dvmask_.size()) != dvec_.rows())
        throw StructuralError("dynamic variable mask length does not match dynamic value rows");
    if (dvec_.rows() > 0 && dvec_.cols() == 0) throw StructuralError("dynamic sequence has no time points");
    for (Eigen::Index j = 0; j < mat_.cols(); ++j)
        for (Eigen::Index i = 0; i < mat_.rows(); ++i)
            if (mmask_(i, j) && dmmask_(i, j))
                throw StructuralError("cell is flagged both stationary-variable and dynamic");
}

bool DynamicMatrix::is_const() const {
    return mmask_.count() == 0 && std::none_of(dvmask_.begin(), dvmask_.end(), [](bool b) { return b; });
}

Eigen::Index DynamicMatrix::dynamic_variable_count() const {
    return std::count(dvmask_.begin(), dvmask_.end(), true);
}

Matrix DynamicMatrix::at(Eigen::Index t) const {
    if (is_stationary()) return mat_;
    Matrix out = mat_;
    const Eigen::Index col = std::min(std::max<Eigen::Index>(t, 0), dvec_.cols() - 1);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            if (dmmask_(i, j)) out(i, j) = dvec_(k++, col);
    return out;
}

void DynamicMatrix::set_variable(const Vector& values) {
    if (values.size() != mmask_.count())
        throw StructuralError("expected " + std::to_string(mmask_.count()) + " variable values, got " +
                              std::to_string(values.size()));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < mat_.cols(); ++j)
        for (Eigen::Index i = 0; i < mat_.rows(); ++i)
            if (mmask_(i, j)) mat_(i, j) = values(k++);
}

void DynamicMatrix::set_dynamic_variable(const Matrix& values) {
    const Eigen::Index nv = dynamic_variable_count();
    if (values.rows() != nv)
        throw StructuralError("expected " + std::to_string(nv) + " dynamic variable rows, got " +
                              std::to_string(values.rows()));
    if (nv == 0) return;
    if (values.cols() > dvec_.cols()) dvec_ = extend_cols(dvec_, values.cols());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < dvec_.rows(); ++r) {
        if (!dvmask_[static_cast<std::size_t>(r)]) continue;
        dvec_.row(r).head(values.cols()) = values.row(k);
        // clamp semantics: trailing columns repeat the last supplied value
        for (Eigen::Index c = values.cols(); c < dvec_.cols(); ++c) dvec_(r, c) = values(k, values.cols() - 1);
        ++k;
    }
}

void DynamicMatrix::set_mat(Matrix mat) {
    if (mat.rows() != mat_.rows() || mat.cols() != mat_.cols())
        throw StructuralError("replacement matrix has a different shape");
    mat_ = std::move(mat);
}

void DynamicMatrix::extend_to(Eigen::Index n) {
    if (!is_stationary()) dvec_ = extend_cols(dvec_, n);
}

bool operator==(const DynamicMatrix& a, const DynamicMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (a.mmask_ != b.mmask_ || a.dmmask_ != b.dmmask_ || a.dvmask_ != b.dvmask_) return false;
    if (a.dvec_.rows() != b.dvec_.rows() || a.dvec_.cols() != b.dvec_.cols()) return false;
    auto same = [](const Matrix& x, const Matrix& y) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double u = x.data()[i];
            const double v = y.data()[i];
            if (!(u == v || (std::isnan(u) && std::isnan(v)))) return false;
        }
        return true;
    };
    return same(a.mat_, b.mat_) && same(a.dvec_, b.dvec_);
}

DynamicMatrix horzcat(const DynamicMatrix& a, const DynamicMatrix& b) {
    if (a.rows() != b.rows() && a.cols() != 0 && b.cols() != 0)
        throw StructuralError("horizontal concatenation with mismatched row counts");
    if (a.cols() == 0 && a.rows() != b.rows()) return b;
    if (b.cols() == 0 && a.rows() != b.rows()) return a;
    const Eigen::Index r = a.rows();
    Matrix mat(r, a.cols() + b.cols());
    mat << a.mat(), b.mat();
    BoolMatrix mm(r, mat.cols());
    mm << a.mmask(), b.mmask();
    BoolMatrix dm(r, mat.cols());
    dm << a.dmmask(), b.dmmask();
    return assemble(mat, mm, dm, a, 0, 0, b, 0, a.cols());
}

DynamicMatrix vertcat(const DynamicMatrix& a, const DynamicMatrix& b) {
    if (a.cols() != b.cols() && a.rows() != 0 && b.rows() != 0)
        throw StructuralError("vertical concatenation with mismatched column counts");
    if (a.rows() == 0 && a.cols() != b.cols()) return b;
    if (b.rows() == 0 && a.cols() != b.cols()) return a;
    const Eigen::Index c = a.cols();
    Matrix mat(a.rows() + b.rows(), c);
    mat << a.mat(), b.mat();
    BoolMatrix mm(mat.rows(), c);
    mm << a.mmask(), b.mmask();
    BoolMatrix dm(mat.rows(), c);
    dm << a.dmmask(), b.dmmask();
    return assemble(mat, mm, dm, a, 0, 0, b, a.rows(), 0);
}

DynamicMatrix blkdiag(const DynamicMatrix& a, const DynamicMatrix& b) {
    Matrix mat = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    mat.topLeftCorner(a.rows(), a.cols()) = a.mat();
    mat.bottomRightCorner(b.rows(), b.cols()) = b.mat();
    return assemble(mat, bool_blkdiag(a.mmask(), b.mmask()), bool_blkdiag(a.dmmask(), b.dmmask()), a, 0, 0, b,
                    a.rows(), a.cols());
}

} // namespace ssm
