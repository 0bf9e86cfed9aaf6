#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fgpc {

/// Externally forced system with known excitation frequency [rad/s].
struct Forced {
    double frequency;
};

/// Autonomous oscillator; the base frequency is an unknown.
struct SelfExcited {
};

using Forcing = std::variant<Forced, SelfExcited>;

/// Evaluation context of a single time point.
struct EvalPoint {
    double time;              ///< physical time [s]
    double theta;             ///< value of the uncertain parameter
    double forcing_frequency; ///< excitation frequency; ignored by self-excited systems
};

/// Position, velocity and acceleration of all n_d states at one time point.
struct Kinematics {
    std::span<const double> x;
    std::span<const double> xd;
    std::span<const double> xdd;
};

/// First-order right-hand side on the integration state (order * n_d values;
/// second-order systems stack positions then velocities).
using RhsFunction = std::function<void(std::span<const double> state, const EvalPoint&, std::span<double> rate)>;

/// Time-domain residual of n_d entries evaluated from exact kinematics.
using ResidualFunction = std::function<void(const Kinematics&, const EvalPoint&, std::span<double> r)>;

/// A dynamical system x' = f(x, t, theta) in residual form.
///
/// First-order systems have r = x' - f(x, t, theta). Second-order systems
/// are mass-normalized, r = x'' + g(x, x', t, theta), and are integrated in
/// companion form with x'' = -r(x, x', 0).
class OdeSystem {
public:
    OdeSystem(std::string name, int states, int order, int nonlinearity_degree, Forcing forcing,
              RhsFunction rhs, ResidualFunction residual);

    const std::string& name() const { return name_; }
    int states() const { return states_; }
    int order() const { return order_; }
    /// Length of the integration state (order * n_d).
    int phase_dimension() const { return order_ * states_; }
    int nonlinearity_degree() const { return nonlinearity_degree_; }
    const Forcing& forcing() const { return forcing_; }
    bool self_excited() const { return std::holds_alternative<SelfExcited>(forcing_); }
    /// Excitation frequency of a forced system; throws for self-excited ones.
    double forcing_frequency() const;

    void rhs(std::span<const double> state, const EvalPoint& p, std::span<double> rate) const
    {
        rhs_(state, p, rate);
    }
    void residual(const Kinematics& k, const EvalPoint& p, std::span<double> r) const { residual_(k, p, r); }

    /// Copy with a different excitation frequency (continuation in Omega).
    OdeSystem with_forcing_frequency(double omega) const;

    const std::map<std::string, double>& parameters() const { return parameters_; }
    const std::string& uncertain_parameter() const { return uncertain_; }
    OdeSystem& describe(std::map<std::string, double> parameters, std::string uncertain);

private:
    std::string name_;
    int states_;
    int order_;
    int nonlinearity_degree_;
    Forcing forcing_;
    RhsFunction rhs_;
    ResidualFunction residual_;
    std::map<std::string, double> parameters_;
    std::string uncertain_;
};

using FirstOrderRhs = std::function<void(std::span<const double> x, const EvalPoint&, std::span<double> xd)>;

/// User system in first-order form; the residual x' - f is derived.
OdeSystem first_order_system(std::string name, int states, int nonlinearity_degree, Forcing forcing,
                             FirstOrderRhs f);

/// User system in mass-normalized second-order residual form; the
/// integration right-hand side is derived from the residual.
OdeSystem second_order_system(std::string name, int states, int nonlinearity_degree, Forcing forcing,
                              ResidualFunction residual);

struct DuffingParams {
    double delta = 0.08; ///< damping [1/s]
    double alpha = 1.0;  ///< linear stiffness [1/s^2]
    double beta = 1.0;   ///< cubic stiffness [1/(s^2 m^2)]
    double gamma = 0.2;  ///< forcing amplitude [m/s^2]
    double omega = 1.4;  ///< excitation frequency [rad/s]
};

enum class DuffingParameter { alpha, beta, gamma, delta };

DuffingParameter duffing_parameter_from_name(const std::string& name);

/// r = x'' + delta x' + alpha x + beta x^3 - gamma cos(Omega t), where the
/// uncertain parameter is replaced by theta.
OdeSystem duffing_system(const DuffingParams& params, DuffingParameter uncertain = DuffingParameter::alpha);

struct VanDerPolParams {
    double mu = 1.0;
};

/// r = x'' - mu (1 - x^2) x' + x with theta = mu; self-excited.
OdeSystem vanderpol_system(const VanDerPolParams& params);

/// Named-system registry used by the CLI.
using SystemFactory =
    std::function<OdeSystem(const std::map<std::string, double>& params, const std::string& uncertain)>;

void register_system(const std::string& name, SystemFactory factory);
std::vector<std::string> registered_systems();
/// Throws InvalidArgument for unknown names, parameters or uncertain parameter.
OdeSystem make_system(const std::string& name, const std::map<std::string, double>& params,
                      const std::string& uncertain);

} // namespace fgpc
