#include "cutvem/errors.hpp"
#include "cutvem/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string exact(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"CutVEM: virtual elements with stability-ratio agglomeration", "cutvem"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::string method;
    std::string agg;
    long long seed = -1;
    int n = 0;
    double sigma_eps = 0.0;
    double beta = 0.0;
    int iters = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"agglomerate", "agglomerate a mesh and report stability ratios"},
        {"ensemble", "condition numbers over perturbed interface embeddings"},
        {"refinement", "ensemble condition numbers across refinement levels"},
        {"convergence", "error norms and rates for a manufactured problem"},
        {"quality", "sigma and eta sweeps over a moving vertex"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--seed", seed, "base seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--n", n, "ensemble size")->check(CLI::PositiveNumber);
        sub->add_option("--sigma-eps", sigma_eps, "agglomeration threshold");
        sub->add_option("--beta", beta, "required improvement factor");
        sub->add_option("--iters", iters, "agglomeration sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--method", method, "fem or vem")->check(CLI::IsMember({"fem", "vem"}));
        sub->add_option("--agg", agg, "on or off")->check(CLI::IsMember({"on", "off"}));
    }

    CLI11_PARSE(app, argc, argv);

    cutvem::ExperimentConfig config;
    try {
        if (!config_path.empty())
            config = cutvem::load_config(config_path);
        if (seed >= 0)
            config.set("seed", std::to_string(seed));
        if (!out.empty())
            config.set("out", out);
        if (n > 0)
            config.set("n", std::to_string(n));
        if (sigma_eps != 0.0)
            config.set("sigma_eps", exact(sigma_eps));
        if (beta != 0.0)
            config.set("beta", exact(beta));
        if (iters > 0)
            config.set("iters", std::to_string(iters));
        if (!method.empty())
            config.set("method", method);
        if (!agg.empty())
            config.set("agg", agg);
    } catch (const cutvem::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    config.command = app.get_subcommands().front()->get_name();
    return cutvem::run_command(config, std::cout);
}
