#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "normnet/constructions.hpp"
#include "normnet/learn.hpp"
#include "normnet/net_algebra.hpp"
#include "normnet/probes.hpp"
#include "normnet/sweep.hpp"
#include "normnet/toml_lite.hpp"

namespace {

using normnet::format_double;
using nlohmann::json;

int inspect_net(const std::string& path) {
    normnet::ReluNet net = normnet::load_net(path);
    normnet::KappaReport report = normnet::kappa(net);
    std::cout << "input_dim: " << net.input_dim() << "\n"
              << "output_dim: " << net.output_dim() << "\n"
              << "width: " << net.width() << "\n"
              << "depth: " << net.depth() << "\n";
    for (std::size_t l = 0; l < report.hidden_norms.size(); ++l)
        std::cout << "layer " << l << " norm: " << format_double(report.hidden_norms[l]) << "\n";
    std::cout << "output norm: " << format_double(report.output_norm) << "\n"
              << "kappa: " << format_double(report.kappa) << "\n";
    return 0;
}

int run_construct(const std::string& what, int k, int N, int d, double alpha,
                  const std::string& target_name, const std::string& out_path, bool certify,
                  long weight_cap, std::uint64_t seed) {
    normnet::ApproxCertificate cert;
    std::function<double(const normnet::Vector&)> target;
    normnet::GridSpec grid = normnet::GridSpec::certification(1, seed);
    if (what == "square") {
        cert = normnet::build_square(k);
        target = [](const normnet::Vector& x) { return x(0) * x(0); };
    } else if (what == "product") {
        cert = normnet::build_product(k);
        target = [](const normnet::Vector& x) { return x(0) * x(1); };
        grid = normnet::GridSpec::tensor(2, 200, -1.0, 1.0);
    } else if (what == "monomial") {
        cert = normnet::build_monomial(d, k);
        target = [d](const normnet::Vector& x) {
            double out = 1.0;
            for (int i = 0; i < d; ++i) out *= x(i);
            return out;
        };
        grid = normnet::GridSpec::latin_hypercube(d, 100000, seed, -1.0, 1.0);
    } else {
        normnet::HolderSpec spec = normnet::make_target(target_name, d);
        if (alpha > 0.0) spec.alpha = alpha;
        cert = normnet::build_taylor_net(spec, N, k, weight_cap);
        target = spec.f;
        grid = normnet::GridSpec::certification(d, seed);
    }
    if (!out_path.empty()) normnet::save_net(cert.net, out_path);
    json out = {{"construction", what},
                {"k", cert.k},
                {"N", cert.N},
                {"width_stated", cert.width},
                {"width_actual", cert.net.width()},
                {"depth", cert.net.depth()},
                {"kappa_stated", cert.kappa_stated},
                {"kappa_measured", normnet::kappa(cert.net).kappa},
                {"error_bound", cert.error_bound}};
    if (certify) {
        double sup = normnet::measure_sup_error(cert, target, grid);
        out["sup_error"] = sup;
        out["within_bound"] = sup <= cert.error_bound;
        if (grid.has_mesh_radius()) {
            // grid max plus Lipschitz slack brackets the true sup norm
            double lip = normnet::kappa(cert.net).kappa + 1.0;
            out["sup_error_bracket"] = sup + lip * grid.mesh_radius();
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_probe(const std::string& what, long n, int d, double K, int L, long trials,
              std::uint64_t seed, const std::string& csv_path, int m, double alpha, long mc,
              double B) {
    json cfg = {{"kind", "probe-sweep"}, {"seed", seed}};
    json p = {{"probe", what}};
    if (what == "rademacher") {
        p["n"] = n;
        p["d"] = d;
        p["K"] = K;
        p["L"] = L;
        p["trials"] = trials;
        p["B"] = B;
    } else if (what == "packing") {
        p["m"] = m;
    } else if (what == "wasserstein") {
        p["n"] = n;
        p["d"] = d;
        p["mc"] = mc;
    } else {
        p["n"] = n;
        p["d"] = d;
        p["K"] = K;
        p["L"] = L;
        p["alpha"] = alpha;
    }
    cfg["probe"] = p;

    auto scratch = std::filesystem::temp_directory_path() /
                   ("normnet_probe_" + std::to_string(::getpid()));
    auto experiment = normnet::ExperimentConfig::from_json(cfg, scratch.string());
    auto diags = normnet::validate(experiment);
    if (!diags.empty()) {
        for (const auto& diag : diags)
            std::cerr << "config error: " << diag.field << ": " << diag.message << "\n";
        return 2;
    }
    normnet::RunManifest manifest = normnet::run(experiment);
    {
        std::ifstream csv(scratch / "results.csv");
        std::cout << csv.rdbuf();
    }
    if (!csv_path.empty())
        std::filesystem::copy_file(scratch / "results.csv", csv_path,
                                   std::filesystem::copy_options::overwrite_existing);
    std::filesystem::remove_all(scratch);
    return manifest.points_failed > 0 ? 3 : 0;
}

int run_sweep(const std::string& config_path, const std::string& out_dir) {
    json cfg = normnet::load_config_file(config_path);
    auto experiment = normnet::ExperimentConfig::from_json(cfg, out_dir);
    auto diags = normnet::validate(experiment);
    if (!diags.empty()) {
        for (const auto& diag : diags)
            std::cerr << "config error: " << diag.field << ": " << diag.message << "\n";
        return 2;
    }
    normnet::RunManifest manifest = normnet::run(experiment);
    std::cout << "points: " << manifest.points_total << ", failed: " << manifest.points_failed
              << ", wall clock: " << manifest.wall_clock_ms << " ms\n";
    if (manifest.points_failed > 0) {
        for (std::size_t i = 0; i < manifest.point_status.size(); ++i)
            if (manifest.point_status[i] != "ok")
                std::cerr << "point " << i << ": " << manifest.point_status[i] << "\n";
        return 3;
    }
    return 0;
}

int run_train(const std::string& mode, const std::string& config_path, const std::string& out_dir) {
    json cfg = normnet::load_config_file(config_path);
    if (!cfg.contains("kind")) cfg["kind"] = (mode == "gan") ? "gan-run" : "regress-sweep";
    if (mode == "regress" && cfg.contains("regress") && !cfg["regress"].contains("save_nets"))
        cfg["regress"]["save_nets"] = true;
    auto experiment = normnet::ExperimentConfig::from_json(cfg, out_dir);
    auto diags = normnet::validate(experiment);
    if (!diags.empty()) {
        for (const auto& diag : diags)
            std::cerr << "config error: " << diag.field << ": " << diag.message << "\n";
        return 2;
    }
    normnet::RunManifest manifest = normnet::run(experiment);
    std::cout << "wrote " << out_dir << " (points failed: " << manifest.points_failed << ")\n";
    return manifest.points_failed > 0 ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"norm-constrained ReLU network toolkit"};
    app.require_subcommand(1);

    // net inspect
    auto* net_cmd = app.add_subcommand("net", "network file utilities");
    auto* inspect = net_cmd->add_subcommand("inspect", "print dims, per-layer norms, kappa");
    std::string net_path;
    inspect->add_option("file", net_path, "net JSON file")->required();

    // construct
    auto* construct = app.add_subcommand("construct", "emit approximator networks");
    std::string construction, target_name = "prod", out_path;
    int c_k = 8, c_N = 2, c_d = 2;
    double c_alpha = 0.0;
    bool certify = false;
    long weight_cap = 2000000;
    std::uint64_t c_seed = 2024;
    construct->add_option("construction", construction, "square|product|monomial|taylor")
        ->required()
        ->check(CLI::IsMember({"square", "product", "monomial", "taylor"}));
    construct->add_option("--k", c_k, "width parameter k");
    construct->add_option("--N", c_N, "grid parameter N (taylor)");
    construct->add_option("--d", c_d, "input dimension");
    construct->add_option("--alpha", c_alpha, "smoothness (taylor; 0 keeps the target default)");
    construct->add_option("--target", target_name, "taylor target: prod|sinsum|quadmean|const:c");
    construct->add_option("--out", out_path, "write the net JSON here");
    construct->add_option("--weight-cap", weight_cap, "assembled dense weight cap");
    construct->add_option("--seed", c_seed, "certification grid seed");
    construct->add_flag("--certify", certify, "run the grid check and print the certificate");

    // probe
    auto* probe = app.add_subcommand("probe", "complexity and lower-bound probes");
    std::string probe_what, csv_path;
    long p_n = 100, p_trials = 10000, p_mc = 20000;
    int p_d = 2, p_L = 2, p_m = 12;
    double p_K = 1.0, p_alpha = 1.0, p_B = 1.0;
    std::uint64_t p_seed = 1;
    probe->add_option("probe", probe_what, "rademacher|packing|wasserstein|bounds")
        ->required()
        ->check(CLI::IsMember({"rademacher", "packing", "wasserstein", "bounds"}));
    probe->add_option("--n", p_n, "sample count");
    probe->add_option("--d", p_d, "dimension");
    probe->add_option("--K", p_K, "norm budget");
    probe->add_option("--L", p_L, "depth");
    probe->add_option("--trials", p_trials, "MC trials");
    probe->add_option("--seed", p_seed, "root seed");
    probe->add_option("--csv", csv_path, "also write the CSV here");
    probe->add_option("--m", p_m, "packing length m");
    probe->add_option("--alpha", p_alpha, "smoothness (bounds)");
    probe->add_option("--mc", p_mc, "MC samples (wasserstein)");
    probe->add_option("--B", p_B, "domain bound B");

    // train
    auto* train = app.add_subcommand("train", "regression / GAN training");
    std::string train_mode, train_config, train_out = "train_out";
    train->add_option("mode", train_mode, "regress|gan")
        ->required()
        ->check(CLI::IsMember({"regress", "gan"}));
    train->add_option("--config", train_config, "TOML or JSON config")->required();
    train->add_option("--out", train_out, "output directory");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "config-driven experiment sweeps");
    auto* sweep_run = sweep_cmd->add_subcommand("run", "execute a sweep config");
    std::string sweep_config, sweep_out = "sweep_out";
    sweep_run->add_option("--config", sweep_config, "TOML or JSON config")->required();
    sweep_run->add_option("--out", sweep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inspect) return inspect_net(net_path);
        if (*construct)
            return run_construct(construction, c_k, c_N, c_d, c_alpha, target_name, out_path,
                                 certify, weight_cap, c_seed);
        if (*probe)
            return run_probe(probe_what, p_n, p_d, p_K, p_L, p_trials, p_seed, csv_path, p_m,
                             p_alpha, p_mc, p_B);
        if (*train) return run_train(train_mode, train_config, train_out);
        if (*sweep_run) return run_sweep(sweep_config, sweep_out);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
    std::cerr << "no subcommand executed\n";
    return 1;
}
