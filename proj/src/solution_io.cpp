#include "fgpc/solution_io.hpp"

#include "fgpc/error.hpp"
#include "fgpc/io.hpp"

namespace fgpc {

nlohmann::json solution_to_json(const FgpcSolution& s)
{
    nlohmann::json meta;
    meta["system"] = s.system_name;
    meta["states"] = s.states();
    meta["harmonics"] = s.harmonics();
    meta["degree"] = s.degree();
    meta["time_samples"] = s.samples;
    meta["quadrature_nodes"] = s.quadrature_nodes;
    meta["distribution"] = {{"family", s.basis.distribution().name()},
                            {"parameters", s.basis.distribution().parameters()}};
    meta["self_excited"] = s.self_excited();
    if (s.anchor)
        meta["anchor"] = {{"state", s.anchor->state}, {"sine_first_harmonic", s.anchor->value}};
    else
        meta["anchor"] = nullptr;
    meta["forcing_frequency"] = s.forcing_frequency;
    meta["slot_layout"] = "a0, a1, b1, ..., aH, bH";

    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& q : s.coefficients) {
        nlohmann::json per_degree = nlohmann::json::array();
        for (Eigen::Index c = 0; c < q.rows(); ++c) {
            std::vector<double> row(q.cols());
            for (Eigen::Index k = 0; k < q.cols(); ++k)
                row[k] = q(c, k);
            per_degree.push_back(row);
        }
        coeffs.push_back(per_degree);
    }
    std::vector<double> w(s.omega_coefficients.data(), s.omega_coefficients.data() + s.omega_coefficients.size());

    return {{"metadata", meta},
            {"data", {{"coefficients", coeffs}, {"frequency_coefficients", w}}},
            {"diagnostics", {{"residual_norm", s.residual_norm}, {"iterations", s.iterations}}}};
}

FgpcSolution solution_from_json(const nlohmann::json& doc)
{
    try {
        const auto& meta = doc.at("metadata");
        const Distribution dist = Distribution::from_name(meta.at("distribution").at("family").get<std::string>(),
                                                          meta.at("distribution").at("parameters").get<std::vector<double>>());
        FgpcSolution s{meta.at("system").get<std::string>(),
                       StochasticBasis(dist, meta.at("degree").get<int>()),
                       meta.at("time_samples").get<int>(),
                       meta.at("quadrature_nodes").get<int>(),
                       std::nullopt,
                       meta.at("forcing_frequency").get<double>(),
                       {},
                       {},
                       doc.at("diagnostics").at("residual_norm").get<double>(),
                       doc.at("diagnostics").at("iterations").get<int>()};
        if (!meta.at("anchor").is_null())
            s.anchor = Anchor{meta["anchor"].at("state").get<int>(), meta["anchor"].at("sine_first_harmonic").get<double>()};

        const int nd = meta.at("states").get<int>();
        const int S = 2 * meta.at("harmonics").get<int>() + 1;
        const auto& coeffs = doc.at("data").at("coefficients");
        if (static_cast<int>(coeffs.size()) != s.basis.size())
            throw DimensionError("solution document: coefficient degrees do not match metadata");
        for (const auto& per_degree : coeffs) {
            Eigen::MatrixXd q(nd, S);
            if (static_cast<int>(per_degree.size()) != nd)
                throw DimensionError("solution document: state count does not match metadata");
            for (int c = 0; c < nd; ++c) {
                const auto row = per_degree[c].get<std::vector<double>>();
                if (static_cast<int>(row.size()) != S)
                    throw DimensionError("solution document: slot count does not match metadata");
                for (int k = 0; k < S; ++k)
                    q(c, k) = row[k];
            }
            s.coefficients.push_back(q);
        }
        const auto w = doc.at("data").at("frequency_coefficients").get<std::vector<double>>();
        s.omega_coefficients = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed solution document: ") + e.what());
    }
}

void save_solution(const FgpcSolution& solution, const std::filesystem::path& path)
{
    write_text_file(path, solution_to_json(solution).dump(2) + "\n");
}

FgpcSolution load_solution(const std::filesystem::path& path)
{
    try {
        return solution_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("cannot parse '" + path.string() + "': " + e.what());
    }
}

} // namespace fgpc
