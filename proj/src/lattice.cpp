#include "sisapprox/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sisapprox/error.hpp"

namespace sisapprox {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Returns g = gcd(a, b) >= 0 and x, y with x*a + y*b = g.
std::int64_t extended_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
    std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
        std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
        std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
    }
    if (old_r < 0) {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    x = old_s;
    y = old_t;
    return old_r;
}

// Column-style Hermite normal form: lower triangular, positive diagonal,
// entries left of the diagonal reduced into [0, h_ii).
IntMatrix hermite_normal_form(IntMatrix h) {
    const Eigen::Index d = h.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const std::int64_t a = h(i, i);
            const std::int64_t b = h(i, j);
            if (b == 0) continue;
            std::int64_t x = 0, y = 0;
            const std::int64_t g = extended_gcd(a, b, x, y);
            const IntMatrix ci = h.col(i);
            const IntMatrix cj = h.col(j);
            h.col(i) = x * ci + y * cj;
            h.col(j) = (a / g) * cj - (b / g) * ci;
        }
        if (h(i, i) < 0) h.col(i) = -h.col(i);
        for (Eigen::Index j = 0; j < i; ++j) {
            const std::int64_t q = floor_div(h(i, j), h(i, i));
            if (q != 0) h.col(j) -= q * h.col(i);
        }
    }
    return h;
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) {
    if (den == 0) throw InputError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    return Rational{num / g, den / g};
}

std::string Rational::to_string() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

std::int64_t integer_determinant(const IntMatrix& m) {
    const Eigen::Index n = m.rows();
    if (n != m.cols()) throw InputError("determinant of a non-square matrix");
    if (n == 0) return 1;
    IntMatrix a = m;
    std::int64_t sign = 1;
    std::int64_t prev = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            Eigen::Index swap = -1;
            for (Eigen::Index r = k + 1; r < n; ++r) {
                if (a(r, k) != 0) {
                    swap = r;
                    break;
                }
            }
            if (swap < 0) return 0;
            a.row(k).swap(a.row(swap));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i) {
            for (Eigen::Index j = k + 1; j < n; ++j) {
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
            }
        }
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

DualLattice::DualLattice(const IntMatrix& basis) : basis_(basis) {
    if (basis.rows() < 1 || basis.rows() != basis.cols()) {
        throw InputError("dual lattice basis must be a non-empty square matrix");
    }
    const std::int64_t det = integer_determinant(basis);
    if (det == 0) throw InputError("dual lattice basis is singular");
    index_ = det < 0 ? -det : det;
    if (index_ > kMaxIndex) {
        throw InputError("dual lattice index " + std::to_string(index_) + " exceeds the supported maximum");
    }
    hermite_ = hermite_normal_form(basis);

    // The box prod [0, h_ii) holds exactly one representative per coset.
    const Eigen::Index d = basis.rows();
    std::int64_t count = 1;
    for (Eigen::Index i = 0; i < d; ++i) count *= hermite_(i, i);
    if (count != index_) throw NumericalError("Hermite form diagonal does not match |det|");

    section_.reserve(static_cast<std::size_t>(count));
    IntPoint point(static_cast<std::size_t>(d), 0);
    for (std::int64_t n = 0; n < count; ++n) {
        section_.push_back(point);
        for (Eigen::Index i = d - 1; i >= 0; --i) {
            auto& c = point[static_cast<std::size_t>(i)];
            if (++c < hermite_(i, i)) break;
            c = 0;
        }
    }
    std::sort(section_.begin(), section_.end());
}

PartitionLabel DualLattice::coset_of(std::span<const std::int64_t> k) const {
    const Eigen::Index d = basis_.rows();
    if (static_cast<Eigen::Index>(k.size()) != d) {
        throw InputError("coset_of: point dimension " + std::to_string(k.size()) +
                         " does not match lattice dimension " + std::to_string(d));
    }
    IntPoint r(k.begin(), k.end());
    for (Eigen::Index i = 0; i < d; ++i) {
        const std::int64_t q = floor_div(r[static_cast<std::size_t>(i)], hermite_(i, i));
        if (q == 0) continue;
        for (Eigen::Index row = i; row < d; ++row) r[static_cast<std::size_t>(row)] -= q * hermite_(row, i);
    }
    const auto it = std::lower_bound(section_.begin(), section_.end(), r);
    return PartitionLabel{static_cast<std::size_t>(it - section_.begin())};
}

std::vector<Rational> DualLattice::primal_description() const {
    // B^{-T} = adj(B)^T / det(B), and adj(B)^T is the cofactor matrix.
    const Eigen::Index d = basis_.rows();
    const std::int64_t det = integer_determinant(basis_);
    std::vector<Rational> out(static_cast<std::size_t>(d * d));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            std::int64_t cofactor = 1;
            if (d > 1) {
                IntMatrix minor(d - 1, d - 1);
                for (Eigen::Index r = 0, mr = 0; r < d; ++r) {
                    if (r == i) continue;
                    for (Eigen::Index c = 0, mc = 0; c < d; ++c) {
                        if (c == j) continue;
                        minor(mr, mc++) = basis_(r, c);
                    }
                    ++mr;
                }
                cofactor = integer_determinant(minor);
            }
            if ((i + j) % 2 == 1) cofactor = -cofactor;
            out[static_cast<std::size_t>(i * d + j)] = Rational::make(cofactor, det);
        }
    }
    return out;
}

DualLattice make_dual_lattice(const IntMatrix& basis) { return DualLattice(basis); }

DualLattice make_dual_lattice(const Eigen::MatrixXd& basis) {
    IntMatrix ints(basis.rows(), basis.cols());
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
        for (Eigen::Index j = 0; j < basis.cols(); ++j) {
            const double x = basis(i, j);
            if (!std::isfinite(x) || x != std::round(x) || std::abs(x) > 1e15) {
                throw InputError("dual lattice basis entry (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ") is not an integer");
            }
            ints(i, j) = static_cast<std::int64_t>(x);
        }
    }
    return DualLattice(ints);
}

IntMatrix parse_integer_matrix(const std::string& text) {
    std::vector<std::vector<std::int64_t>> rows;
    std::stringstream all(text);
    std::string row_text;
    while (std::getline(all, row_text, ';')) {
        std::replace(row_text.begin(), row_text.end(), ',', ' ');
        std::istringstream row_stream(row_text);
        std::vector<std::int64_t> row;
        std::string token;
        while (row_stream >> token) {
            std::size_t used = 0;
            long long value = 0;
            try {
                value = std::stoll(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != token.size()) {
                throw InputError("matrix entry '" + token + "' is not an integer");
            }
            row.push_back(value);
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("empty integer matrix");
    const std::size_t cols = rows.front().size();
    IntMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw InputError("integer matrix rows have unequal lengths");
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

std::string format_integer_matrix(const IntMatrix& m) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i > 0) out << ';';
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ' ';
            out << m(i, j);
        }
    }
    return out.str();
}

}  // namespace sisapprox
