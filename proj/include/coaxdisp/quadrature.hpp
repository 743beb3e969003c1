#ifndef COAXDISP_QUADRATURE_HPP
#define COAXDISP_QUADRATURE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace coaxdisp::quad {

struct rule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre on [-1, 1], Newton iteration on P_n.
inline rule make_gauss_legendre(int n)
{
    rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

// Generalized Gauss-Laguerre, weight u^a e^{-u} on (0, inf), Golub-Welsch.
inline rule make_gauss_laguerre(int n, double a)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        J(k, k) = 2.0 * k + a + 1.0;
        if (k + 1 < n) {
            double b = std::sqrt((k + 1.0) * (k + 1.0 + a));
            J(k, k + 1) = b;
            J(k + 1, k) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    rule r;
    r.x.resize(n);
    r.w.resize(n);
    const double mu0 = std::tgamma(a + 1.0);
    for (int k = 0; k < n; ++k) {
        r.x[k] = es.eigenvalues()(k);
        double v = es.eigenvectors()(0, k);
        r.w[k] = mu0 * v * v;
    }
    return r;
}

inline const rule& gauss_legendre(int n)
{
    static std::mutex m;
    static std::map<int, rule> cache;
    std::lock_guard<std::mutex> lk(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

// Integrate f over [a, b] (complex endpoints allowed) with an n-point rule.
template <class F, class T>
auto integrate_segment(F&& f, T a, T b, int n)
{
    const rule& r = gauss_legendre(n);
    const T mid = 0.5 * (a + b);
    const T half = 0.5 * (b - a);
    decltype(f(a) * half) s{};
    for (int k = 0; k < n; ++k) s += r.w[k] * f(mid + half * r.x[k]);
    return s * half;
}

} // namespace coaxdisp::quad

#endif
