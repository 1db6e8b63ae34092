#include "smplmmse/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "smplmmse/errors.hpp"

namespace smplmmse {

namespace {

using nlohmann::json;

json vector_json(const VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd vector_from(const json& j, Eigen::Index expected, const char* name) {
    const auto values = j.at(name).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != expected) {
        throw ConfigError(std::string("instance field '") + name + "' has wrong length");
    }
    return Eigen::Map<const VectorXd>(values.data(), expected);
}

json prior_json(const SparsityPrior& prior) {
    json active;
    if (prior.active.kind() == ActiveDistribution::Kind::Gaussian) {
        active = {{"kind", "gaussian"},
                  {"mean", prior.active.gaussian_mean()},
                  {"variance", prior.active.gaussian_variance()}};
    } else {
        active = {{"kind", "chi_square"}, {"dof", prior.active.dof()}};
    }
    return {{"lambda", prior.lambda}, {"active", active}};
}

SparsityPrior prior_from(const json& j) {
    const auto& active = j.at("active");
    const auto kind = active.at("kind").get<std::string>();
    if (kind == "gaussian") {
        return {j.at("lambda").get<double>(),
                ActiveDistribution::gaussian(active.at("mean").get<double>(), active.at("variance").get<double>())};
    }
    if (kind == "chi_square") {
        return {j.at("lambda").get<double>(), ActiveDistribution::chi_square(active.at("dof").get<int>())};
    }
    throw ConfigError("unknown active distribution kind '" + kind + "'");
}

}  // namespace

std::string instance_to_json(const ProblemInstance& inst) {
    // H is stored row-major.
    std::vector<double> h;
    h.reserve(static_cast<std::size_t>(inst.H.size()));
    for (Eigen::Index r = 0; r < inst.m(); ++r) {
        for (Eigen::Index c = 0; c < inst.n(); ++c) h.push_back(inst.H(r, c));
    }
    json j = {{"format", kInstanceFormat},
              {"version", kInstanceFormatVersion},
              {"m", inst.m()},
              {"n", inst.n()},
              {"seed", inst.seed},
              {"snr", inst.snr},
              {"sigma_w_sq", inst.sigma_w_sq},
              {"prior", prior_json(inst.prior)},
              {"H", h},
              {"s", vector_json(inst.s)},
              {"b", vector_json(inst.b)},
              {"x", vector_json(inst.x)},
              {"y", vector_json(inst.y)},
              {"support", inst.support}};
    return j.dump();
}

ProblemInstance instance_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("instance file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kInstanceFormat) {
            throw ConfigError("not an instance file");
        }
        if (j.at("version").get<int>() != kInstanceFormatVersion) {
            throw ConfigError("unsupported instance format version");
        }
        const auto m = j.at("m").get<Eigen::Index>();
        const auto n = j.at("n").get<Eigen::Index>();
        if (m < 1 || n < 1) throw ConfigError("instance dimensions must be >= 1");
        const auto h = j.at("H").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(h.size()) != m * n) throw ConfigError("instance field 'H' has wrong size");

        ProblemInstance inst{.H = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                                 h.data(), m, n),
                             .s = vector_from(j, n, "s"),
                             .b = vector_from(j, n, "b"),
                             .x = vector_from(j, n, "x"),
                             .y = vector_from(j, m, "y"),
                             .sigma_w_sq = j.at("sigma_w_sq").get<double>(),
                             .snr = j.at("snr").get<double>(),
                             .support = j.at("support").get<std::vector<Eigen::Index>>(),
                             .seed = j.at("seed").get<std::uint64_t>(),
                             .prior = prior_from(j.at("prior"))};
        // an all-zero signal (lambda = 0) carries no energy, so its noise variance is 0 at any snr
        if (!(inst.sigma_w_sq > 0.0) && !(inst.sigma_w_sq == 0.0 && inst.prior.lambda == 0.0)) {
            throw ConfigError("instance sigma_w_sq must be > 0");
        }
        return inst;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed instance file: ") + e.what());
    }
}

void save_instance(const std::filesystem::path& path, const ProblemInstance& inst) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    out << instance_to_json(inst) << '\n';
}

ProblemInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("instance not found: '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return instance_from_json(buf.str());
}

}  // namespace smplmmse
