#include "sisapprox/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "sisapprox/error.hpp"

namespace sisapprox {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kPhaseThreshold = 1e-12;
constexpr double kNegativeClamp = 1e-10;

double off_diagonal_norm(const ComplexMatrix& a) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (i != j) sum += std::norm(a(i, j));
        }
    }
    return std::sqrt(sum);
}

// One complex Jacobi rotation annihilating a(p,q). The rotation is
// J = D R D^H with D = diag(1, conj(e)) on (p,q), e = a(p,q)/|a(p,q)|, and R
// the classical real symmetric Jacobi rotation of the phase-stripped pair.
void rotate(ComplexMatrix& a, ComplexMatrix& v, Eigen::Index p, Eigen::Index q) {
    const Complex apq = a(p, q);
    const double r = std::abs(apq);
    if (r == 0.0) return;
    const Complex e = apq / r;
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();

    const double theta = (aqq - app) / (2.0 * r);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;
    } else {
        t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const Complex jpq = s * e;             // J(p,q)
    const Complex jqp = -s * std::conj(e); // J(q,p)

    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex akp = a(k, p);
        const Complex akq = a(k, q);
        a(k, p) = c * akp + jqp * akq;
        a(k, q) = jpq * akp + c * akq;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex apk = a(p, k);
        const Complex aqk = a(q, k);
        a(p, k) = c * apk + std::conj(jqp) * aqk;
        a(q, k) = std::conj(jpq) * apk + c * aqk;
    }
    a(p, p) = app - t * r;
    a(q, q) = aqq + t * r;
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex vkp = v(k, p);
        const Complex vkq = v(k, q);
        v(k, p) = c * vkp + jqp * vkq;
        v(k, q) = jpq * vkp + c * vkq;
    }
}

}  // namespace

double max_asymmetry(const ComplexMatrix& a) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i; j < a.cols(); ++j) {
            worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
        }
    }
    return worst;
}

HermitianMatrix::HermitianMatrix(const ComplexMatrix& entries) {
    if (entries.rows() != entries.cols()) {
        throw InputError("Hermitian matrix must be square");
    }
    if (entries.rows() < 1 || entries.rows() > kMaxOrder) {
        throw InputError("Hermitian matrix order must be in [1, 256], got " +
                         std::to_string(entries.rows()));
    }
    double max_abs = 0.0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
        for (Eigen::Index i = 0; i < entries.rows(); ++i) {
            const Complex z = entries(i, j);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                std::ostringstream msg;
                msg << "non-finite matrix entry at (" << i << ", " << j << ")";
                throw InputError(msg.str());
            }
            max_abs = std::max(max_abs, std::abs(z));
        }
    }
    const double asym = max_asymmetry(entries);
    if (asym > kSymmetryTolerance * max_abs) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "matrix is not Hermitian: max asymmetry " << asym << " (max entry " << max_abs
            << ")";
        throw InputError(msg.str());
    }
    entries_ = 0.5 * (entries + entries.adjoint());
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        entries_(i, i) = entries_(i, i).real();
    }
}

EigenSystem eig_hermitian(const HermitianMatrix& g, double tol) {
    if (!(tol > 0.0 && tol <= 1e-6)) {
        throw InputError("eigensolver tolerance must lie in (0, 1e-6]");
    }
    const Eigen::Index n = g.order();
    const double scale = g.frobenius_norm();
    ComplexMatrix a = g.entries();
    ComplexMatrix v = ComplexMatrix::Identity(n, n);

    if (scale > 0.0) {
        // Drive the off-diagonal part to roundoff; stop once a sweep no
        // longer halves it, or it is exactly zero.
        const double floor = std::numeric_limits<double>::epsilon() * scale;
        double off = off_diagonal_norm(a);
        for (int sweep = 0; sweep < kMaxSweeps && off > floor; ++sweep) {
            for (Eigen::Index p = 0; p + 1 < n; ++p) {
                for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
            }
            const double next = off_diagonal_norm(a);
            const bool stalled = next > 0.5 * off;
            off = next;
            if (stalled && off <= tol * scale) break;
        }
        if (off > tol * scale) {
            std::ostringstream msg;
            msg << "Jacobi iteration did not converge: relative off-diagonal norm "
                << off / scale;
            throw NumericalError(msg.str());
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return a(x, x).real() > a(y, y).real();
    });

    EigenSystem out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    const double clamp = kNegativeClamp * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        double lambda = a(src, src).real();
        if (lambda < 0.0 && lambda >= -clamp) lambda = 0.0;
        out.eigenvalues(i) = lambda;
        out.eigenvectors.col(i) = normalize_phase(v.col(src));
    }
    return out;
}

std::size_t rank_by_threshold(const RealVector& eigenvalues, double rel_tol) {
    if (eigenvalues.size() == 0) return 0;
    const double top = std::max(eigenvalues.maxCoeff(), 0.0);
    if (top <= 0.0) return 0;
    const double cut = rel_tol * top;
    return static_cast<std::size_t>(
        std::count_if(eigenvalues.begin(), eigenvalues.end(), [cut](double x) { return x > cut; }));
}

std::size_t rank_by_threshold(const EigenSystem& eigs, double rel_tol) {
    return rank_by_threshold(eigs.eigenvalues, rel_tol);
}

ComplexVector normalize_phase(ComplexVector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > kPhaseThreshold) {
            const Complex unit = std::conj(v(i)) / mag;
            v *= unit;
            v(i) = Complex(mag, 0.0);
            return v;
        }
    }
    return v;
}

}  // namespace sisapprox
