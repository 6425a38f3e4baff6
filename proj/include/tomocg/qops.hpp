#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace tomocg::qops {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Tolerances used when validating operator invariants.
struct Tolerances {
    double invariant = 1e-10;  // trace / eigenvalue slack after construction
    double input = 1e-8;       // max-norm bound on the anti-Hermitian part of raw input
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense D x D Hermitian matrix. Input is symmetrized as (H + H^dag)/2 and
/// rejected if the anti-Hermitian part exceeds the input tolerance.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m, Tolerances tol = {});

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    const Tolerances& tolerances() const { return tol_; }

private:
    Matrix mat_;
    Tolerances tol_;
};

/// Unit-trace positive semidefinite operator.
class DensityMatrix {
public:
    explicit DensityMatrix(HermitianOperator op);
    explicit DensityMatrix(Matrix m, Tolerances tol = {})
        : DensityMatrix(HermitianOperator(std::move(m), tol)) {}

    Eigen::Index dim() const { return op_.dim(); }
    const Matrix& matrix() const { return op_.matrix(); }
    const HermitianOperator& op() const { return op_; }

private:
    HermitianOperator op_;
};

/// Measurement outcome: 0 <= Pi <= 1.
class PovmElement {
public:
    explicit PovmElement(HermitianOperator op);
    explicit PovmElement(Matrix m, Tolerances tol = {})
        : PovmElement(HermitianOperator(std::move(m), tol)) {}

    Eigen::Index dim() const { return op_.dim(); }
    const Matrix& matrix() const { return op_.matrix(); }

private:
    HermitianOperator op_;
};

struct EighResult {
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;          // orthonormal columns, same order
};

EighResult eigh(const HermitianOperator& h);
EighResult eigh(const Matrix& hermitian, Tolerances tol = {});

/// (1/2) sum |eigenvalues(a - b)|, a metric in [0, 1].
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// tr(rho^2), in [1/D, 1].
double purity(const DensityMatrix& rho);

/// Wootters concurrence for a two-qubit state (D = 4 only).
double concurrence(const DensityMatrix& rho);

/// (1 - gamma) rho + gamma/D * identity.
DensityMatrix admix(const DensityMatrix& rho, double gamma);

/// Clamps negative eigenvalues to zero in the spectral decomposition.
HermitianOperator psd_project(const HermitianOperator& h);

// Text serialization: dimension on line 1, then D rows of D whitespace-
// separated "re,im" entries, row-major, full round-trip precision.
void write_operator(std::ostream& os, const Matrix& m);
Matrix read_operator(std::istream& is);
void save_operator(const std::string& path, const Matrix& m);
Matrix load_operator(const std::string& path);

}  // namespace tomocg::qops
