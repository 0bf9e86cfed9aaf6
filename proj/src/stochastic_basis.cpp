#include "fgpc/stochastic_basis.hpp"

#include "fgpc/error.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace fgpc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void validate(const Distribution::Family& f)
{
    std::visit(overloaded{
                   [](const Uniform& u) {
                       if (!(u.lo < u.hi))
                           throw InvalidArgument("uniform: requires lo < hi");
                   },
                   [](const Normal& n) {
                       if (!(n.std > 0.0))
                           throw InvalidArgument("normal: requires std > 0");
                   },
                   [](const Beta4& b) {
                       if (!(b.lo < b.hi))
                           throw InvalidArgument("beta4: requires lo < hi");
                       if (!(b.alpha > 0.0) || !(b.beta > 0.0))
                           throw InvalidArgument("beta4: shape parameters must be > 0");
                   },
               },
               f);
}

} // namespace

Distribution::Distribution(Family family) : family_(family) { validate(family_); }

const std::vector<std::string>& Distribution::supported_families()
{
    static const std::vector<std::string> names{"uniform", "normal", "beta4"};
    return names;
}

Distribution Distribution::from_name(const std::string& family, const std::vector<double>& p)
{
    auto need = [&](std::size_t n) {
        if (p.size() != n) {
            std::ostringstream os;
            os << family << ": expected " << n << " parameters, got " << p.size();
            throw InvalidArgument(os.str());
        }
    };
    if (family == "uniform") {
        need(2);
        return Distribution(Uniform{p[0], p[1]});
    }
    if (family == "normal") {
        need(2);
        return Distribution(Normal{p[0], p[1]});
    }
    if (family == "beta4" || family == "beta") {
        need(4);
        return Distribution(Beta4{p[0], p[1], p[2], p[3]});
    }
    std::ostringstream os;
    os << "unsupported distribution family '" << family << "'; supported:";
    for (const auto& n : supported_families())
        os << ' ' << n;
    throw InvalidArgument(os.str());
}

std::string Distribution::name() const
{
    return std::visit(overloaded{[](const Uniform&) { return std::string("uniform"); },
                                 [](const Normal&) { return std::string("normal"); },
                                 [](const Beta4&) { return std::string("beta4"); }},
                      family_);
}

std::vector<double> Distribution::parameters() const
{
    return std::visit(overloaded{[](const Uniform& u) { return std::vector<double>{u.lo, u.hi}; },
                                 [](const Normal& n) { return std::vector<double>{n.mean, n.std}; },
                                 [](const Beta4& b) {
                                     return std::vector<double>{b.alpha, b.beta, b.lo, b.hi};
                                 }},
                      family_);
}

double Distribution::mean() const
{
    return std::visit(overloaded{[](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                                 [](const Normal& n) { return n.mean; },
                                 [](const Beta4& b) {
                                     return b.lo + (b.hi - b.lo) * b.alpha / (b.alpha + b.beta);
                                 }},
                      family_);
}

double Distribution::variance() const
{
    return std::visit(overloaded{[](const Uniform& u) { return (u.hi - u.lo) * (u.hi - u.lo) / 12.0; },
                                 [](const Normal& n) { return n.std * n.std; },
                                 [](const Beta4& b) {
                                     const double s = b.alpha + b.beta;
                                     const double w = b.hi - b.lo;
                                     return w * w * b.alpha * b.beta / (s * s * (s + 1.0));
                                 }},
                      family_);
}

double Distribution::pdf(double x) const
{
    return std::visit(overloaded{[x](const Uniform& u) { return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
                                 [x](const Normal& n) {
                                     return boost::math::pdf(boost::math::normal(n.mean, n.std), x);
                                 },
                                 [x](const Beta4& b) {
                                     if (x < b.lo || x > b.hi)
                                         return 0.0;
                                     const double y = (x - b.lo) / (b.hi - b.lo);
                                     return boost::math::pdf(boost::math::beta_distribution<>(b.alpha, b.beta), y)
                                            / (b.hi - b.lo);
                                 }},
                      family_);
}

double Distribution::cdf(double x) const
{
    return std::visit(overloaded{[x](const Uniform& u) {
                                     if (x <= u.lo)
                                         return 0.0;
                                     if (x >= u.hi)
                                         return 1.0;
                                     return (x - u.lo) / (u.hi - u.lo);
                                 },
                                 [x](const Normal& n) {
                                     return boost::math::cdf(boost::math::normal(n.mean, n.std), x);
                                 },
                                 [x](const Beta4& b) {
                                     if (x <= b.lo)
                                         return 0.0;
                                     if (x >= b.hi)
                                         return 1.0;
                                     const double y = (x - b.lo) / (b.hi - b.lo);
                                     return boost::math::cdf(boost::math::beta_distribution<>(b.alpha, b.beta), y);
                                 }},
                      family_);
}

bool Distribution::in_support(double x) const
{
    return std::visit(overloaded{[x](const Uniform& u) { return x >= u.lo && x <= u.hi; },
                                 [x](const Normal&) { return std::isfinite(x); },
                                 [x](const Beta4& b) { return x >= b.lo && x <= b.hi; }},
                      family_);
}

Recurrence recurrence_coefficients(const Distribution& dist, int count)
{
    if (count < 0)
        throw InvalidArgument("recurrence_coefficients: count must be >= 0");
    Recurrence rec;
    rec.alpha.resize(count);
    rec.beta.resize(count);

    // Reference-interval coefficients, then the affine map x = center + half * u
    // gives alpha_x = center + half * alpha_u and beta_x = half^2 * beta_u.
    double center = 0.0;
    double half = 1.0;
    std::visit(overloaded{
                   [&](const Uniform& u) {
                       center = 0.5 * (u.lo + u.hi);
                       half = 0.5 * (u.hi - u.lo);
                       for (int j = 0; j < count; ++j) {
                           const double jj = j;
                           rec.alpha[j] = 0.0;
                           rec.beta[j] = j == 0 ? 1.0 : jj * jj / (4.0 * jj * jj - 1.0);
                       }
                   },
                   [&](const Normal& n) {
                       center = n.mean;
                       half = n.std;
                       for (int j = 0; j < count; ++j) {
                           rec.alpha[j] = 0.0;
                           rec.beta[j] = j == 0 ? 1.0 : static_cast<double>(j);
                       }
                   },
                   [&](const Beta4& b) {
                       center = 0.5 * (b.lo + b.hi);
                       half = 0.5 * (b.hi - b.lo);
                       // Jacobi weight (1-u)^a (1+u)^b on [-1, 1]; the Beta density in
                       // y = (u+1)/2 carries (1+u)^(alpha-1) (1-u)^(beta-1).
                       const double a = b.beta - 1.0;
                       const double c = b.alpha - 1.0;
                       const double ab = a + c;
                       for (int j = 0; j < count; ++j) {
                           const double n = j;
                           if (j == 0) {
                               rec.alpha[j] = (c - a) / (ab + 2.0);
                               rec.beta[j] = 1.0;
                               continue;
                           }
                           const double s = 2.0 * n + ab;
                           rec.alpha[j] = (c * c - a * a) / (s * (s + 2.0));
                           if (j == 1)
                               rec.beta[j] = 4.0 * (1.0 + a) * (1.0 + c) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
                           else
                               rec.beta[j] = 4.0 * n * (n + a) * (n + c) * (n + ab) / (s * s * (s + 1.0) * (s - 1.0));
                       }
                   },
               },
               dist.family());

    for (int j = 0; j < count; ++j) {
        rec.alpha[j] = center + half * rec.alpha[j];
        if (j > 0)
            rec.beta[j] *= half * half;
    }
    return rec;
}

StochasticBasis::StochasticBasis(Distribution dist, int degree)
    : dist_(std::move(dist)), degree_(degree), rec_(recurrence_coefficients(dist_, degree + 1))
{
    if (degree < 0)
        throw InvalidArgument("build_basis: polynomial degree N must be >= 0");
}

Eigen::VectorXd StochasticBasis::evaluate(double theta) const
{
    Eigen::VectorXd phi(degree_ + 1);
    phi(0) = 1.0;
    if (degree_ == 0)
        return phi;
    // Orthonormal form: sqrt(beta_{n+1}) Phi_{n+1} = (x - alpha_n) Phi_n - sqrt(beta_n) Phi_{n-1}.
    phi(1) = (theta - rec_.alpha[0]) / std::sqrt(rec_.beta[1]);
    for (int n = 1; n < degree_; ++n)
        phi(n + 1) = ((theta - rec_.alpha[n]) * phi(n) - std::sqrt(rec_.beta[n]) * phi(n - 1))
                     / std::sqrt(rec_.beta[n + 1]);
    return phi;
}

QuadratureRule gauss_rule(const Distribution& dist, int nodes)
{
    if (nodes < 1)
        throw InvalidArgument("gauss_rule: N_G must be >= 1");
    const Recurrence rec = recurrence_coefficients(dist, nodes);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
    for (int j = 0; j < nodes; ++j) {
        jacobi(j, j) = rec.alpha[j];
        if (j + 1 < nodes) {
            jacobi(j, j + 1) = std::sqrt(rec.beta[j + 1]);
            jacobi(j + 1, j) = jacobi(j, j + 1);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) {
        std::ostringstream os;
        os << "gauss_rule: tridiagonal eigen-solver failed for N_G = " << nodes
           << " (Jacobi matrix norm " << jacobi.norm() << ", diagonal range [" << jacobi.diagonal().minCoeff()
           << ", " << jacobi.diagonal().maxCoeff() << "])";
        throw LinearAlgebraError(os.str());
    }
    // Eigenvector weights lose relative accuracy where they are tiny (outer
    // Hermite nodes), so each node gets one Newton polish on Phi_{N_G} and
    // the Christoffel weight 1 / sum_{m < N_G} Phi_m(x)^2.
    const Recurrence full = recurrence_coefficients(dist, nodes + 1);
    auto polish = [&](double x, double& christoffel) {
        double p_prev = 0.0, p = 1.0, d_prev = 0.0, d = 0.0;
        christoffel = 1.0;
        for (int n = 0; n < nodes; ++n) {
            const double sb = std::sqrt(full.beta[n + 1]);
            const double sb_prev = n == 0 ? 0.0 : std::sqrt(full.beta[n]);
            const double p_next = ((x - full.alpha[n]) * p - sb_prev * p_prev) / sb;
            const double d_next = (p + (x - full.alpha[n]) * d - sb_prev * d_prev) / sb;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            if (n + 1 < nodes)
                christoffel += p * p;
        }
        return d != 0.0 ? x - p / d : x;
    };

    QuadratureRule rule;
    rule.nodes.resize(nodes);
    rule.weights.resize(nodes);
    double total = 0.0;
    for (int z = 0; z < nodes; ++z) {
        double christoffel = 0.0;
        const double x0 = eig.eigenvalues()(z);
        double x = polish(x0, christoffel);
        const double gap = std::min(z > 0 ? x0 - eig.eigenvalues()(z - 1) : INFINITY,
                                    z + 1 < nodes ? eig.eigenvalues()(z + 1) - x0 : INFINITY);
        if (!(std::abs(x - x0) < 0.1 * gap))
            x = x0;
        polish(x, christoffel);
        rule.nodes[z] = x;
        rule.weights[z] = rec.beta[0] / christoffel;
        total += rule.weights[z];
    }
    for (double& w : rule.weights)
        w /= total;
    return rule;
}

QuadratureRule gauss_rule(const StochasticBasis& basis, int nodes) { return gauss_rule(basis.distribution(), nodes); }

int default_quadrature_nodes(int degree, int nonlinearity_degree)
{
    const int by_size = 2 * (degree + 1);
    const int by_product = degree + 1 + (nonlinearity_degree * degree + 1) / 2 + 1;
    return std::max(by_size, by_product);
}

std::vector<double> sample(const Distribution& dist, int n, std::uint64_t seed)
{
    if (n < 1)
        throw InvalidArgument("sample: n must be >= 1");
    boost::random::mt19937_64 engine(seed);
    std::vector<double> out(static_cast<std::size_t>(n));
    std::visit(overloaded{
                   [&](const Uniform& u) {
                       boost::random::uniform_real_distribution<double> d(u.lo, u.hi);
                       for (double& x : out)
                           x = d(engine);
                   },
                   [&](const Normal& nd) {
                       boost::random::normal_distribution<double> d(nd.mean, nd.std);
                       for (double& x : out)
                           x = d(engine);
                   },
                   [&](const Beta4& b) {
                       boost::random::beta_distribution<double> d(b.alpha, b.beta);
                       for (double& x : out)
                           x = b.lo + (b.hi - b.lo) * d(engine);
                   },
               },
               dist.family());
    return out;
}

} // namespace fgpc
