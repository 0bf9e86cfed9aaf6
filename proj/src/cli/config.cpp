#include "fgpc/cli/config.hpp"

#include "fgpc/dynamics.hpp"
#include "fgpc/fourier.hpp"
#include "fgpc/io.hpp"
#include "fgpc/stochastic_basis.hpp"

#include <set>
#include <sstream>

namespace fgpc::cli {

namespace {

std::string join_violations(const std::vector<Violation>& v)
{
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& x : v)
        os << "\n  " << (x.path.empty() ? "/" : x.path) << ": " << x.message;
    return os.str();
}

// Walks one JSON object, records violations instead of throwing.
class Reader {
public:
    Reader(const nlohmann::json* node, std::string path, std::vector<Violation>* out)
        : node_(node), path_(std::move(path)), out_(out)
    {
        if (node_ && !node_->is_object()) {
            fail("", "expected an object");
            node_ = nullptr;
        }
    }

    bool present() const { return node_ != nullptr; }
    bool has(const std::string& key) const { return node_ && node_->contains(key); }

    void allow(std::initializer_list<const char*> keys)
    {
        if (!node_)
            return;
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : node_->items())
            if (!ok.count(k))
                fail(k, "unknown key");
    }

    Reader child(const std::string& key, bool required = false)
    {
        if (!has(key)) {
            if (required && node_)
                fail(key, "required section missing");
            return Reader(nullptr, path_ + "/" + key, out_);
        }
        return Reader(&node_->at(key), path_ + "/" + key, out_);
    }

    template <class T>
    std::optional<T> get(const std::string& key, bool required = false)
    {
        if (!has(key)) {
            if (required && node_)
                fail(key, "required key missing");
            return std::nullopt;
        }
        const auto& v = node_->at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number())
                    throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer())
                    throw std::invalid_argument("expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.get<long long>() < 0)
                        throw std::invalid_argument("expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean())
                    throw std::invalid_argument("expected true or false");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string())
                    throw std::invalid_argument("expected a string");
            }
            return v.get<T>();
        } catch (const std::exception& e) {
            fail(key, e.what());
            return std::nullopt;
        }
    }

    template <class T>
    std::optional<std::vector<T>> get_list(const std::string& key, bool required = false)
    {
        if (!has(key)) {
            if (required && node_)
                fail(key, "required key missing");
            return std::nullopt;
        }
        const auto& v = node_->at(key);
        if (!v.is_array()) {
            fail(key, "expected a list");
            return std::nullopt;
        }
        std::vector<T> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool ok = std::is_integral_v<T> ? v[i].is_number_integer() : v[i].is_number();
            if (!ok) {
                fail(key + "/" + std::to_string(i), std::is_integral_v<T> ? "expected an integer" : "expected a number");
                return std::nullopt;
            }
            out.push_back(v[i].get<T>());
        }
        return out;
    }

    void fail(const std::string& key, const std::string& message)
    {
        out_->push_back(Violation{key.empty() ? path_ : path_ + "/" + key, message});
    }

private:
    const nlohmann::json* node_;
    std::string path_;
    std::vector<Violation>* out_;
};

template <class T>
void positive(Reader& r, const std::string& key, const std::optional<T>& v)
{
    if (v && !(*v > T(0)))
        r.fail(key, "must be positive");
}

ExperimentConfig read(const nlohmann::json& doc, std::vector<Violation>& v)
{
    ExperimentConfig cfg;
    cfg.source = doc;
    Reader root(&doc, "", &v);
    if (!root.present())
        return cfg;
    root.allow({"system", "distribution", "discretization", "solver", "deflation", "analyses", "seed", "output_dir"});

    // system
    Reader sys = root.child("system", true);
    sys.allow({"name", "parameters", "uncertain"});
    cfg.system.name = sys.get<std::string>("name", sys.present()).value_or("");
    if (sys.has("parameters")) {
        Reader params = sys.child("parameters");
        if (params.present())
            for (const auto& [k, val] : doc.at("system").at("parameters").items()) {
                if (!val.is_number())
                    params.fail(k, "expected a number");
                else
                    cfg.system.parameters[k] = val.get<double>();
            }
    }
    cfg.system.uncertain = sys.get<std::string>("uncertain").value_or("");
    std::optional<OdeSystem> system;
    if (!cfg.system.name.empty()) {
        try {
            system = make_system(cfg.system.name, cfg.system.parameters, cfg.system.uncertain);
        } catch (const Error& e) {
            sys.fail("", e.what());
        }
    }

    // distribution
    if (root.has("distribution")) {
        Reader d = root.child("distribution");
        d.allow({"family", "parameters"});
        DistributionConfig dc{d.get<std::string>("family", true).value_or(""),
                              d.get_list<double>("parameters", true).value_or(std::vector<double>{})};
        if (!dc.family.empty()) {
            try {
                (void)Distribution::from_name(dc.family, dc.parameters);
            } catch (const Error& e) {
                d.fail("", e.what());
            }
        }
        cfg.distribution = dc;
    }

    // discretization
    Reader disc = root.child("discretization", true);
    disc.allow({"H", "N", "N_t", "N_G"});
    cfg.discretization.harmonics = disc.get<int>("H", disc.present()).value_or(0);
    cfg.discretization.degree = disc.get<int>("N").value_or(0);
    cfg.discretization.time_samples = disc.get<int>("N_t");
    cfg.discretization.quadrature_nodes = disc.get<int>("N_G");
    const int H = cfg.discretization.harmonics, N = cfg.discretization.degree;
    if (H < 0)
        disc.fail("H", "must be >= 0");
    if (N < 0)
        disc.fail("N", "must be >= 0");
    if (cfg.discretization.time_samples && *cfg.discretization.time_samples <= 2 * H) {
        std::ostringstream os;
        os << "N_t = " << *cfg.discretization.time_samples << " violates the anti-aliasing rule N_t > 2H = " << 2 * H;
        disc.fail("N_t", os.str());
    }
    if (cfg.discretization.quadrature_nodes && *cfg.discretization.quadrature_nodes < N + 1)
        disc.fail("N_G", "need at least N+1 quadrature nodes");

    // solver
    Reader solver = root.child("solver");
    solver.allow({"tolerance", "max_iterations", "initial_guess", "integration_periods", "integration_rtol",
                  "initial_state", "period_hint", "anchor_state"});
    SolverConfig& sc = cfg.solver;
    sc.tolerance = solver.get<double>("tolerance").value_or(sc.tolerance);
    positive(solver, "tolerance", std::optional<double>(sc.tolerance));
    sc.max_iterations = solver.get<int>("max_iterations").value_or(sc.max_iterations);
    positive(solver, "max_iterations", std::optional<int>(sc.max_iterations));
    if (auto g = solver.get<std::string>("initial_guess")) {
        if (*g == "zero")
            sc.zero_guess = true;
        else if (*g != "time_integration")
            solver.fail("initial_guess", "expected 'time_integration' or 'zero'");
    }
    sc.integration_periods = solver.get<double>("integration_periods").value_or(sc.integration_periods);
    if (sc.integration_periods < 4.0)
        solver.fail("integration_periods", "must cover at least 4 periods");
    sc.integration_rtol = solver.get<double>("integration_rtol").value_or(sc.integration_rtol);
    positive(solver, "integration_rtol", std::optional<double>(sc.integration_rtol));
    sc.initial_state = solver.get_list<double>("initial_state").value_or(std::vector<double>{});
    if (system && !sc.initial_state.empty() && static_cast<int>(sc.initial_state.size()) != system->phase_dimension())
        solver.fail("initial_state", "needs " + std::to_string(system->phase_dimension()) + " entries");
    sc.period_hint = solver.get<double>("period_hint");
    positive(solver, "period_hint", sc.period_hint);
    sc.anchor_state = solver.get<int>("anchor_state").value_or(0);
    if (system && (sc.anchor_state < 0 || sc.anchor_state >= system->states()))
        solver.fail("anchor_state", "state index out of range");
    if (system && sc.zero_guess && system->self_excited())
        solver.fail("initial_guess", "the zero guess is an equilibrium of a self-excited system");

    // deflation
    Reader defl = root.child("deflation");
    defl.allow({"enabled", "power", "shift", "max_solutions", "distinct_radius"});
    DeflationSettings& ds = cfg.deflation;
    ds.enabled = defl.get<bool>("enabled").value_or(false);
    ds.config.power = defl.get<double>("power").value_or(ds.config.power);
    ds.config.shift = defl.get<double>("shift").value_or(ds.config.shift);
    ds.config.distinct_radius = defl.get<double>("distinct_radius").value_or(ds.config.distinct_radius);
    ds.max_solutions = defl.get<std::size_t>("max_solutions").value_or(ds.max_solutions);
    if (!(ds.config.power > 0.0))
        defl.fail("power", "DeflationConfig requires p_D > 0");
    if (!(ds.config.shift > 0.0))
        defl.fail("shift", "DeflationConfig requires alpha_D > 0");
    if (!(ds.config.distinct_radius > 0.0))
        defl.fail("distinct_radius", "must be positive");
    if (ds.max_solutions < 1)
        defl.fail("max_solutions", "must be at least 1");

    // analyses
    Reader an = root.child("analyses");
    an.allow({"branch", "moments", "summary", "marginal", "coefficient_grid", "convergence_map", "mc_oracle",
              "phase_portrait", "continuation"});
    AnalysisRequests& ar = cfg.analyses;
    ar.branch = an.get<std::size_t>("branch").value_or(0);
    if (ds.enabled && ar.branch >= ds.max_solutions)
        an.fail("branch", "exceeds deflation max_solutions");
    if (!ds.enabled && ar.branch != 0)
        an.fail("branch", "only branch 0 exists without deflation");
    const int states = system ? system->states() : 1;

    if (an.has("moments")) {
        Reader r = an.child("moments");
        r.allow({"points"});
        MomentsRequest m;
        m.points = r.get<int>("points").value_or(m.points);
        if (m.points < 2)
            r.fail("points", "need at least 2 points");
        if (system && system->self_excited())
            r.fail("", "closed-form moments are undefined for self-excited systems; request 'summary' instead");
        ar.moments = m;
    }
    if (an.has("summary")) {
        Reader r = an.child("summary");
        r.allow({"samples", "points"});
        SummaryRequest s;
        s.samples = r.get<std::size_t>("samples").value_or(s.samples);
        s.points = r.get<int>("points").value_or(s.points);
        if (s.samples < 1000)
            r.fail("samples", "coverage estimates need at least 1000 samples");
        if (s.points < 2)
            r.fail("points", "need at least 2 points");
        ar.summary = s;
    }
    if (an.has("marginal")) {
        Reader r = an.child("marginal");
        r.allow({"time", "samples", "bins", "state"});
        MarginalRequest m;
        m.time = r.get<double>("time", true).value_or(0.0);
        m.samples = r.get<std::size_t>("samples").value_or(m.samples);
        m.bins = r.get<int>("bins");
        m.state = r.get<int>("state").value_or(0);
        positive(r, "samples", std::optional<std::size_t>(m.samples));
        positive(r, "bins", m.bins);
        if (m.state < 0 || m.state >= states)
            r.fail("state", "state index out of range");
        ar.marginal = m;
    }
    if (an.has("coefficient_grid")) {
        ar.coefficient_grid = an.get<bool>("coefficient_grid").value_or(false);
    }
    if (an.has("convergence_map")) {
        Reader r = an.child("convergence_map");
        r.allow({"H", "N", "reference", "samples"});
        ConvergenceRequest c;
        c.harmonics = r.get_list<int>("H", true).value_or(std::vector<int>{});
        c.degrees = r.get_list<int>("N", true).value_or(std::vector<int>{});
        const auto ref = r.get_list<int>("reference", true).value_or(std::vector<int>{});
        if (r.has("reference") && ref.size() != 2)
            r.fail("reference", "expected [H_ref, N_ref]");
        else if (ref.size() == 2) {
            c.reference_harmonics = ref[0];
            c.reference_degree = ref[1];
        }
        c.samples = r.get<std::size_t>("samples").value_or(c.samples);
        positive(r, "samples", std::optional<std::size_t>(c.samples));
        for (int h : c.harmonics)
            if (h < 0)
                r.fail("H", "harmonic orders must be >= 0");
        for (int n : c.degrees)
            if (n < 0)
                r.fail("N", "degrees must be >= 0");
        if (c.reference_harmonics < 1 || c.reference_degree < 0)
            r.fail("reference", "needs H_ref >= 1 and N_ref >= 0");
        for (int h : c.harmonics)
            if (h > c.reference_harmonics)
                r.fail("H", "harmonic orders cannot exceed the reference");
        ar.convergence_map = c;
    }
    if (an.has("mc_oracle")) {
        Reader r = an.child("mc_oracle");
        r.allow({"samples", "points"});
        McRequest m;
        m.samples = r.get<std::size_t>("samples").value_or(m.samples);
        m.points = r.get<int>("points").value_or(m.points);
        positive(r, "samples", std::optional<std::size_t>(m.samples));
        if (m.points < 2)
            r.fail("points", "need at least 2 points");
        ar.mc_oracle = m;
    }
    if (an.has("phase_portrait")) {
        Reader r = an.child("phase_portrait");
        r.allow({"samples", "points", "x_state", "y_state"});
        PortraitRequest p;
        p.samples = r.get<std::size_t>("samples").value_or(p.samples);
        p.points = r.get<int>("points").value_or(p.points);
        p.x_state = r.get<int>("x_state").value_or(0);
        p.y_state = r.get<int>("y_state");
        positive(r, "samples", std::optional<std::size_t>(p.samples));
        if (p.points < 3)
            r.fail("points", "need at least 3 points");
        if (p.x_state < 0 || p.x_state >= states)
            r.fail("x_state", "state index out of range");
        if (p.y_state && (*p.y_state < 0 || *p.y_state >= states))
            r.fail("y_state", "state index out of range");
        ar.phase_portrait = p;
    }
    if (an.has("continuation")) {
        Reader r = an.child("continuation");
        r.allow({"omega_start", "omega_end", "theta_values", "initial_step", "min_step", "max_step", "max_points"});
        ContinuationRequest c;
        c.omega_start = r.get<double>("omega_start", true).value_or(0.0);
        c.omega_end = r.get<double>("omega_end", true).value_or(0.0);
        c.theta_values = r.get_list<double>("theta_values", true).value_or(std::vector<double>{});
        c.options.initial_step = r.get<double>("initial_step").value_or(c.options.initial_step);
        c.options.min_step = r.get<double>("min_step").value_or(c.options.min_step);
        c.options.max_step = r.get<double>("max_step").value_or(c.options.max_step);
        c.options.max_points = r.get<int>("max_points").value_or(c.options.max_points);
        if (!(c.omega_start > 0.0) || !(c.omega_end > 0.0) || c.omega_start == c.omega_end)
            r.fail("", "omega_start and omega_end must be distinct and positive");
        if (c.theta_values.empty() && r.present())
            r.fail("theta_values", "need at least one parameter value");
        if (!(c.options.min_step > 0.0) || c.options.initial_step < c.options.min_step ||
            c.options.max_step < c.options.initial_step)
            r.fail("", "require 0 < min_step <= initial_step <= max_step");
        if (system && system->self_excited())
            r.fail("", "continuation sweeps the excitation frequency; self-excited systems have none");
        if (H < 1)
            r.fail("", "continuation needs H >= 1");
        ar.continuation = c;
    }

    const bool needs_distribution = ar.need_solution() || ar.convergence_map.has_value();
    if (needs_distribution && !cfg.distribution)
        root.fail("distribution", "required by the requested analyses");
    if (system && system->self_excited() && H < 1)
        disc.fail("H", "self-excited systems need H >= 1");

    cfg.seed = root.get<std::uint64_t>("seed").value_or(0);
    cfg.output_dir = root.get<std::string>("output_dir").value_or("");
    return cfg;
}

} // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations))
{
}

nlohmann::json load_config_document(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigError({Violation{"", e.what()}});
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({Violation{"", std::string("not valid JSON: ") + e.what()}});
    }
}

std::vector<Violation> validate_config(const nlohmann::json& document)
{
    std::vector<Violation> v;
    (void)read(document, v);
    return v;
}

ExperimentConfig parse_config(const nlohmann::json& document)
{
    std::vector<Violation> v;
    ExperimentConfig cfg = read(document, v);
    if (!v.empty())
        throw ConfigError(std::move(v));
    return cfg;
}

} // namespace fgpc::cli
