#include "fgpc/dynamics.hpp"

#include "fgpc/error.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace fgpc {

OdeSystem::OdeSystem(std::string name, int states, int order, int nonlinearity_degree, Forcing forcing,
                     RhsFunction rhs, ResidualFunction residual)
    : name_(std::move(name)), states_(states), order_(order), nonlinearity_degree_(nonlinearity_degree),
      forcing_(forcing), rhs_(std::move(rhs)), residual_(std::move(residual))
{
    if (states_ < 1)
        throw InvalidArgument("OdeSystem: state dimension must be >= 1");
    if (order_ != 1 && order_ != 2)
        throw InvalidArgument("OdeSystem: order must be 1 or 2");
    if (nonlinearity_degree_ < 1)
        throw InvalidArgument("OdeSystem: nonlinearity degree must be >= 1");
    if (const auto* f = std::get_if<Forced>(&forcing_); f && !(f->frequency > 0.0))
        throw InvalidArgument("OdeSystem: forcing frequency must be > 0");
}

double OdeSystem::forcing_frequency() const
{
    if (const auto* f = std::get_if<Forced>(&forcing_))
        return f->frequency;
    throw InvalidArgument("OdeSystem '" + name_ + "' is self-excited and has no forcing frequency");
}

OdeSystem OdeSystem::with_forcing_frequency(double omega) const
{
    if (self_excited())
        throw InvalidArgument("with_forcing_frequency: system '" + name_ + "' is self-excited");
    OdeSystem copy = *this;
    copy.forcing_ = Forced{omega};
    if (!(omega > 0.0))
        throw InvalidArgument("OdeSystem: forcing frequency must be > 0");
    if (copy.parameters_.contains("Omega"))
        copy.parameters_["Omega"] = omega;
    return copy;
}

OdeSystem& OdeSystem::describe(std::map<std::string, double> parameters, std::string uncertain)
{
    parameters_ = std::move(parameters);
    uncertain_ = std::move(uncertain);
    return *this;
}

OdeSystem first_order_system(std::string name, int states, int nonlinearity_degree, Forcing forcing, FirstOrderRhs f)
{
    auto rhs = [f](std::span<const double> state, const EvalPoint& p, std::span<double> rate) { f(state, p, rate); };
    auto residual = [f, states](const Kinematics& k, const EvalPoint& p, std::span<double> r) {
        f(k.x, p, r);
        for (int c = 0; c < states; ++c)
            r[c] = k.xd[c] - r[c];
    };
    return OdeSystem(std::move(name), states, 1, nonlinearity_degree, forcing, std::move(rhs), std::move(residual));
}

OdeSystem second_order_system(std::string name, int states, int nonlinearity_degree, Forcing forcing,
                              ResidualFunction residual)
{
    auto rhs = [residual, states](std::span<const double> state, const EvalPoint& p, std::span<double> rate) {
        thread_local std::vector<double> zero;
        zero.assign(static_cast<std::size_t>(states), 0.0);
        const Kinematics k{state.subspan(0, states), state.subspan(states, states), zero};
        for (int c = 0; c < states; ++c)
            rate[c] = state[states + c];
        residual(k, p, rate.subspan(states, states));
        for (int c = 0; c < states; ++c)
            rate[states + c] = -rate[states + c];
    };
    return OdeSystem(std::move(name), states, 2, nonlinearity_degree, forcing, std::move(rhs), std::move(residual));
}

DuffingParameter duffing_parameter_from_name(const std::string& name)
{
    if (name == "alpha")
        return DuffingParameter::alpha;
    if (name == "beta")
        return DuffingParameter::beta;
    if (name == "gamma")
        return DuffingParameter::gamma;
    if (name == "delta")
        return DuffingParameter::delta;
    throw InvalidArgument("duffing: uncertain parameter must be one of alpha, beta, gamma, delta; got '" + name + "'");
}

namespace {

const char* duffing_parameter_name(DuffingParameter p)
{
    switch (p) {
    case DuffingParameter::alpha:
        return "alpha";
    case DuffingParameter::beta:
        return "beta";
    case DuffingParameter::gamma:
        return "gamma";
    case DuffingParameter::delta:
        return "delta";
    }
    return "alpha";
}

} // namespace

OdeSystem duffing_system(const DuffingParams& params, DuffingParameter uncertain)
{
    for (double v : {params.delta, params.alpha, params.beta, params.gamma, params.omega})
        if (!std::isfinite(v))
            throw InvalidArgument("duffing: parameters must be finite");
    if (params.gamma < 0.0)
        throw InvalidArgument("duffing: gamma must be >= 0");

    const DuffingParams base = params;
    auto residual = [base, uncertain](const Kinematics& k, const EvalPoint& p, std::span<double> r) {
        double delta = base.delta;
        double alpha = base.alpha;
        double beta = base.beta;
        double gamma = base.gamma;
        switch (uncertain) {
        case DuffingParameter::alpha:
            alpha = p.theta;
            break;
        case DuffingParameter::beta:
            beta = p.theta;
            break;
        case DuffingParameter::gamma:
            gamma = p.theta;
            break;
        case DuffingParameter::delta:
            delta = p.theta;
            break;
        }
        const double x = k.x[0];
        r[0] = k.xdd[0] + delta * k.xd[0] + alpha * x + beta * x * x * x
               - gamma * std::cos(p.forcing_frequency * p.time);
    };
    OdeSystem sys = second_order_system("duffing", 1, 3, Forced{params.omega}, std::move(residual));
    sys.describe({{"delta", params.delta},
                  {"alpha", params.alpha},
                  {"beta", params.beta},
                  {"gamma", params.gamma},
                  {"Omega", params.omega}},
                 duffing_parameter_name(uncertain));
    return sys;
}

OdeSystem vanderpol_system(const VanDerPolParams& params)
{
    if (!(params.mu > 0.0))
        throw InvalidArgument("vanderpol: mu must be > 0 for a limit cycle to exist");
    auto residual = [](const Kinematics& k, const EvalPoint& p, std::span<double> r) {
        const double x = k.x[0];
        r[0] = k.xdd[0] - p.theta * (1.0 - x * x) * k.xd[0] + x;
    };
    OdeSystem sys = second_order_system("vanderpol", 1, 3, SelfExcited{}, std::move(residual));
    sys.describe({{"mu", params.mu}}, "mu");
    return sys;
}

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key, double fallback)
{
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void reject_unknown(const std::string& system, const std::map<std::string, double>& p,
                    std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : p) {
        bool ok = false;
        for (const char* k : known)
            ok = ok || key == k;
        if (!ok) {
            std::ostringstream os;
            os << system << ": unknown parameter '" << key << "'; known:";
            for (const char* k : known)
                os << ' ' << k;
            throw InvalidArgument(os.str());
        }
    }
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, SystemFactory> factories;

    Registry()
    {
        factories["duffing"] = [](const std::map<std::string, double>& p, const std::string& uncertain) {
            reject_unknown("duffing", p, {"delta", "alpha", "beta", "gamma", "Omega"});
            DuffingParams d;
            d.delta = param_or(p, "delta", d.delta);
            d.alpha = param_or(p, "alpha", d.alpha);
            d.beta = param_or(p, "beta", d.beta);
            d.gamma = param_or(p, "gamma", d.gamma);
            d.omega = param_or(p, "Omega", d.omega);
            return duffing_system(d, duffing_parameter_from_name(uncertain.empty() ? "alpha" : uncertain));
        };
        factories["vanderpol"] = [](const std::map<std::string, double>& p, const std::string& uncertain) {
            reject_unknown("vanderpol", p, {"mu"});
            if (!uncertain.empty() && uncertain != "mu")
                throw InvalidArgument("vanderpol: the only uncertain parameter is mu");
            return vanderpol_system(VanDerPolParams{param_or(p, "mu", 1.0)});
        };
    }
};

Registry& registry()
{
    static Registry r;
    return r;
}

} // namespace

void register_system(const std::string& name, SystemFactory factory)
{
    Registry& r = registry();
    std::scoped_lock lock(r.mutex);
    r.factories[name] = std::move(factory);
}

std::vector<std::string> registered_systems()
{
    Registry& r = registry();
    std::scoped_lock lock(r.mutex);
    std::vector<std::string> names;
    for (const auto& [name, f] : r.factories)
        names.push_back(name);
    return names;
}

OdeSystem make_system(const std::string& name, const std::map<std::string, double>& params,
                      const std::string& uncertain)
{
    SystemFactory factory;
    {
        Registry& r = registry();
        std::scoped_lock lock(r.mutex);
        const auto it = r.factories.find(name);
        if (it == r.factories.end()) {
            std::ostringstream os;
            os << "unknown system '" << name << "'; registered:";
            for (const auto& [n, f] : r.factories)
                os << ' ' << n;
            throw InvalidArgument(os.str());
        }
        factory = it->second;
    }
    return factory(params, uncertain);
}

} // namespace fgpc
