#include "spikegrid/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace spikegrid {

SymEigResult sym_eig(const Tensor& a) {
    if (a.rank() != 2 || a.dim(0) != a.dim(1)) throw DomainError("sym_eig: matrix must be square, got " + a.shape_str());
    const int n = a.dim(0);
    require_finite(a, "sym_eig input");

    const double scale = std::max(1.0, static_cast<double>(max_abs(a)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(a.at({i, j}) - a.at({j, i})) > 1e-5 * scale)
                throw DomainError("sym_eig: matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");

    // Work in double; symmetrize to kill roundoff asymmetry.
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(i) * n + j] =
                0.5 * (static_cast<double>(a.at({i, j})) + static_cast<double>(a.at({j, i})));
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += m[static_cast<std::size_t>(i) * n + j] * m[static_cast<std::size_t>(i) * n + j];
        return std::sqrt(2.0 * s);
    };

    const int max_sweeps = 100;
    const double tol = 1e-13 * std::max(1.0, scale) * n;
    bool converged = n == 1;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        if (off_norm() <= tol) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m[static_cast<std::size_t>(p) * n + q];
                if (std::abs(apq) <= 1e-300) continue;
                const double app = m[static_cast<std::size_t>(p) * n + p];
                const double aqq = m[static_cast<std::size_t>(q) * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double mip = m[static_cast<std::size_t>(i) * n + p];
                    const double miq = m[static_cast<std::size_t>(i) * n + q];
                    m[static_cast<std::size_t>(i) * n + p] = c * mip - s * miq;
                    m[static_cast<std::size_t>(i) * n + q] = s * mip + c * miq;
                }
                for (int j = 0; j < n; ++j) {
                    const double mpj = m[static_cast<std::size_t>(p) * n + j];
                    const double mqj = m[static_cast<std::size_t>(q) * n + j];
                    m[static_cast<std::size_t>(p) * n + j] = c * mpj - s * mqj;
                    m[static_cast<std::size_t>(q) * n + j] = s * mpj + c * mqj;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v[static_cast<std::size_t>(i) * n + p];
                    const double viq = v[static_cast<std::size_t>(i) * n + q];
                    v[static_cast<std::size_t>(i) * n + p] = c * vip - s * viq;
                    v[static_cast<std::size_t>(i) * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    if (!converged && off_norm() > tol) throw ConvergenceError("sym_eig: Jacobi sweeps did not converge");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return m[static_cast<std::size_t>(x) * n + x] > m[static_cast<std::size_t>(y) * n + y];
    });

    SymEigResult res;
    res.eigenvalues = Tensor::zeros({n});
    res.eigenvectors = Tensor::zeros({n, n});
    for (int col = 0; col < n; ++col) {
        const int src = order[static_cast<std::size_t>(col)];
        res.eigenvalues[col] = static_cast<float>(m[static_cast<std::size_t>(src) * n + src]);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += v[static_cast<std::size_t>(i) * n + src] * v[static_cast<std::size_t>(i) * n + src];
        norm = std::sqrt(norm);
        for (int i = 0; i < n; ++i)
            res.eigenvectors.at({i, col}) = static_cast<float>(v[static_cast<std::size_t>(i) * n + src] / norm);
    }
    require_finite(res.eigenvalues, "sym_eig eigenvalues");
    require_finite(res.eigenvectors, "sym_eig eigenvectors");
    return res;
}

}  // namespace spikegrid
