#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace fgpc {

struct Uniform {
    double lo;
    double hi;
};

struct Normal {
    double mean;
    double std;
};

/// Four-parameter Beta(alpha, beta, lo, hi): density proportional to
/// (x - lo)^(alpha-1) (hi - x)^(beta-1) on [lo, hi].
struct Beta4 {
    double alpha;
    double beta;
    double lo;
    double hi;
};

/// Scalar input density of the random parameter.
class Distribution {
public:
    using Family = std::variant<Uniform, Normal, Beta4>;

    Distribution(Family family); // NOLINT(google-explicit-constructor)

    /// Builds a distribution from a family name ("uniform", "normal", "beta4")
    /// and its positional parameters. Throws InvalidArgument listing the
    /// supported families for anything else.
    static Distribution from_name(const std::string& family, const std::vector<double>& params);
    static const std::vector<std::string>& supported_families();

    const Family& family() const { return family_; }
    std::string name() const;
    std::vector<double> parameters() const;

    double mean() const;
    double variance() const;
    double pdf(double x) const;
    double cdf(double x) const;
    bool in_support(double x) const;

private:
    Family family_;
};

/// Monic three-term recurrence p_{j+1} = (x - alpha_j) p_j - beta_j p_{j-1};
/// beta_0 is the total mass (1 for a probability density).
struct Recurrence {
    std::vector<double> alpha;
    std::vector<double> beta;
};

/// Analytic recurrence coefficients j = 0..count-1 (Legendre, probabilists'
/// Hermite, Jacobi), mapped to the distribution's support.
Recurrence recurrence_coefficients(const Distribution& dist, int count);

/// Gauss rule with probability weights (sum of weights is 1).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }
    double integrate(const auto& f) const
    {
        double s = 0.0;
        for (std::size_t z = 0; z < nodes.size(); ++z)
            s += weights[z] * f(nodes[z]);
        return s;
    }
};

/// Orthonormal polynomials Phi_0..Phi_N with respect to a distribution.
class StochasticBasis {
public:
    StochasticBasis(Distribution dist, int degree);

    const Distribution& distribution() const { return dist_; }
    int degree() const { return degree_; }
    int size() const { return degree_ + 1; }
    const Recurrence& recurrence() const { return rec_; }

    /// [Phi_0(theta), ..., Phi_N(theta)]; evaluation outside the support is
    /// allowed, check in_support() to flag it.
    Eigen::VectorXd evaluate(double theta) const;
    bool in_support(double theta) const { return dist_.in_support(theta); }

private:
    Distribution dist_;
    int degree_;
    Recurrence rec_;
};

inline StochasticBasis build_basis(const Distribution& dist, int degree) { return {dist, degree}; }

/// N_G-point Gauss rule of the basis' distribution from the symmetric
/// tridiagonal Jacobi matrix.
QuadratureRule gauss_rule(const StochasticBasis& basis, int nodes);
QuadratureRule gauss_rule(const Distribution& dist, int nodes);

/// Default quadrature size max(2(N+1), N + 1 + ceil(d_nl N / 2) + 1).
int default_quadrature_nodes(int degree, int nonlinearity_degree);

inline Eigen::VectorXd evaluate_basis(const StochasticBasis& basis, double theta)
{
    return basis.evaluate(theta);
}

/// Reproducible i.i.d. samples (Boost.Random mt19937_64, platform independent).
std::vector<double> sample(const Distribution& dist, int n, std::uint64_t seed);

} // namespace fgpc
