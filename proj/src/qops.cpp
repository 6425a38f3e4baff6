#include "tomocg/qops.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tomocg::qops {

namespace {

const Matrix& require_square(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw ValidationError("operator must be a square non-empty matrix");
    }
    return m;
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix m, Tolerances tol) : tol_(tol) {
    require_square(m);
    const Matrix anti = 0.5 * (m - m.adjoint().eval());
    const double drift = anti.cwiseAbs().maxCoeff();
    if (drift > tol_.input) {
        std::ostringstream msg;
        msg << "input is not Hermitian: anti-Hermitian part has max norm " << drift;
        throw ValidationError(msg.str());
    }
    mat_ = 0.5 * (m + m.adjoint().eval());
}

DensityMatrix::DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
    const double tr = op_.matrix().trace().real();
    const double tol = op_.tolerances().invariant;
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream msg;
        msg << "density matrix trace " << tr << " is not 1";
        throw ValidationError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) {
        std::ostringstream msg;
        msg << "density matrix has negative eigenvalue " << es.eigenvalues().minCoeff();
        throw ValidationError(msg.str());
    }
}

PovmElement::PovmElement(HermitianOperator op) : op_(std::move(op)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
    const double tol = op_.tolerances().invariant;
    if (es.eigenvalues().minCoeff() < -tol) {
        throw ValidationError("POVM element has a negative eigenvalue");
    }
    if (es.eigenvalues().maxCoeff() > 1.0 + tol) {
        throw ValidationError("POVM element has an eigenvalue above 1");
    }
}

EighResult eigh(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    if (es.info() != Eigen::Success) {
        throw ValidationError("eigendecomposition failed to converge");
    }
    return {es.eigenvalues(), es.eigenvectors()};
}

EighResult eigh(const Matrix& hermitian, Tolerances tol) {
    return eigh(HermitianOperator(hermitian, tol));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("trace_distance: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double purity(const DensityMatrix& rho) {
    return (rho.matrix() * rho.matrix()).trace().real();
}

double concurrence(const DensityMatrix& rho) {
    if (rho.dim() != 4) {
        throw ValidationError("concurrence is defined for two qubits (D = 4) only");
    }
    Matrix yy = Matrix::Zero(4, 4);  // sigma_y (x) sigma_y in the computational basis
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix spin_flipped = yy * rho.matrix().conjugate() * yy;
    const Matrix product = rho.matrix() * spin_flipped;
    // product is similar to a PSD matrix; eigenvalues are real non-negative up to noise
    Eigen::ComplexEigenSolver<Matrix> es(product);
    Eigen::Vector4d s;
    for (int i = 0; i < 4; ++i) {
        s(i) = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
    }
    std::sort(s.data(), s.data() + 4, std::greater<double>());
    return std::max(0.0, s(0) - s(1) - s(2) - s(3));
}

DensityMatrix admix(const DensityMatrix& rho, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("admixture gamma must lie in [0, 1]");
    }
    const auto d = static_cast<double>(rho.dim());
    Matrix mixed = (1.0 - gamma) * rho.matrix()
                 + (gamma / d) * Matrix::Identity(rho.dim(), rho.dim());
    return DensityMatrix(std::move(mixed), rho.op().tolerances());
}

HermitianOperator psd_project(const HermitianOperator& h) {
    const EighResult ed = eigh(h);
    const Eigen::VectorXd clipped = ed.eigenvalues.cwiseMax(0.0);
    Matrix projected = ed.eigenvectors * clipped.asDiagonal() * ed.eigenvectors.adjoint();
    return HermitianOperator(std::move(projected), h.tolerances());
}

void write_operator(std::ostream& os, const Matrix& m) {
    os << m.rows() << "\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) os << ' ';
            os << m(r, c).real() << ',' << m(r, c).imag();
        }
        os << "\n";
    }
}

Matrix read_operator(std::istream& is) {
    Eigen::Index dim = 0;
    if (!(is >> dim) || dim < 1) {
        throw ValidationError("operator file: bad dimension line");
    }
    Matrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            std::string tok;
            if (!(is >> tok)) {
                throw ValidationError("operator file: truncated entry list");
            }
            const auto comma = tok.find(',');
            if (comma == std::string::npos) {
                throw ValidationError("operator file: entry is not re,im: " + tok);
            }
            m(r, c) = Complex(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
        }
    }
    return m;
}

void save_operator(const std::string& path, const Matrix& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_operator(os, m);
}

Matrix load_operator(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_operator(is);
}

}  // namespace tomocg::qops
