#include "soilest/matrix_exponential.hpp"

#include "soilest/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace soilest {

using Eigen::Index;

namespace {

double norm1(const Eigen::MatrixXd& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// theta_m from Higham (2005), Table 2.3.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                          2.097847961257068e0, 5.371920351148152e0};

Eigen::MatrixXd pade_low(const Eigen::MatrixXd& a, int degree) {
    static const double b3[] = {120., 60., 12., 1.};
    static const double b5[] = {30240., 15120., 3360., 420., 30., 1.};
    static const double b7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
    static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                2162160.,     110880.,     3960.,       90.,        1.};
    const double* b = degree == 3 ? b3 : degree == 5 ? b5 : degree == 7 ? b7 : b9;

    const Index n = a.rows();
    const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd a2 = a * a;
    Eigen::MatrixXd power = ident; // a^(2k)
    Eigen::MatrixXd u_inner = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; 2 * k <= degree; ++k) {
        if (k > 0) {
            power = power * a2;
        }
        v.noalias() += b[2 * k] * power;
        if (2 * k + 1 <= degree) {
            u_inner.noalias() += b[2 * k + 1] * power;
        }
    }
    const Eigen::MatrixXd u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

Eigen::MatrixXd pade13(const Eigen::MatrixXd& a) {
    static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
                               129060195264000.,   10559470521600.,    670442572800.,    33522128640.,
                               1323241920.,        40840800.,          960960.,          16380.,
                               182.,               1.};
    const Index n = a.rows();
    const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd a2 = a * a;
    const Eigen::MatrixXd a4 = a2 * a2;
    const Eigen::MatrixXd a6 = a4 * a2;
    const Eigen::MatrixXd u_hi = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const Eigen::MatrixXd u = a * (u_hi + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const Eigen::MatrixXd v_hi = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    const Eigen::MatrixXd v = v_hi + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

} // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) {
        throw DomainError("expm: matrix must be square");
    }
    if (!a.allFinite()) {
        throw DomainError("expm: matrix has non-finite entries");
    }
    if (a.size() == 0) {
        return a;
    }
    const double norm = norm1(a);
    constexpr std::array<int, 4> degrees = {3, 5, 7, 9};
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (norm <= kTheta[i]) {
            return pade_low(a, degrees[i]);
        }
    }
    int squarings = 0;
    if (norm > kTheta[4]) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta[4])));
    }
    Eigen::MatrixXd result = pade13(a / std::ldexp(1.0, squarings));
    for (int i = 0; i < squarings; ++i) {
        result = result * result;
    }
    return result;
}

Eigen::MatrixXd expm_multiply(const Eigen::SparseMatrix<double>& a, const Eigen::MatrixXd& b, double t) {
    if (a.rows() != a.cols() || a.cols() != b.rows()) {
        throw DomainError("expm_multiply: non-conformable operands");
    }
    double norm = 0.0;
    for (Index k = 0; k < a.outerSize(); ++k) {
        double col = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
            col += std::abs(it.value());
        }
        norm = std::max(norm, col);
    }
    if (!std::isfinite(norm) || !b.allFinite() || !std::isfinite(t)) {
        throw DomainError("expm_multiply: non-finite input");
    }
    const double scaled = norm * std::abs(t);
    // Very stiff operators need ~||A t|| Taylor pieces; past the point where
    // that costs more than a dense scaling-and-squaring exponential, form
    // exp(A t) explicitly instead.
    const auto n = static_cast<double>(a.rows());
    const auto cols = static_cast<double>(b.cols());
    const double taylor_cost = std::ceil(scaled) * 12.0 * 2.0 * static_cast<double>(a.nonZeros()) * cols;
    const double dense_cost = (8.0 + std::max(0.0, std::log2(scaled))) * 2.0 * n * n * n + 2.0 * n * n * cols;
    if (taylor_cost > dense_cost) {
        return expm(Eigen::MatrixXd(a) * t) * b;
    }
    const int pieces = std::max(1, static_cast<int>(std::ceil(scaled)));
    const double h = t / pieces;

    constexpr int max_terms = 60;
    constexpr double tol = 1.1e-16;
    Eigen::MatrixXd result = b;
    Eigen::MatrixXd term(b.rows(), b.cols());
    for (int p = 0; p < pieces; ++p) {
        term = result;
        double previous_term_norm = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= max_terms; ++k) {
            term = (h / k) * (a * term);
            result += term;
            const double term_norm = term.cwiseAbs().maxCoeff();
            const double result_norm = result.cwiseAbs().maxCoeff();
            // two consecutive negligible terms: the factorial tail is below tol
            if (term_norm + previous_term_norm <= tol * result_norm) {
                break;
            }
            previous_term_norm = term_norm;
        }
    }
    return result;
}

} // namespace soilest
