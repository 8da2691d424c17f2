#include "normnet/sweep.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "normnet/constructions.hpp"
#include "normnet/learn.hpp"
#include "normnet/net_algebra.hpp"
#include "normnet/probes.hpp"
#include "normnet/rng.hpp"

namespace normnet {

namespace {

using nlohmann::json;

struct PointResult {
    std::string status = "ok";
    std::vector<std::string> rows;
    std::vector<std::pair<std::string, std::string>> artifacts;  // filename -> contents
};

std::string fmt_cell(const json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

std::string join_row(const std::vector<json>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += fmt_cell(cells[i]);
    }
    return out;
}

// Cross product over the listed fields (absent fields are skipped, scalars act
// as singleton lists); enumeration order follows the field order given.
std::vector<json> expand_grid(const json& params, const std::vector<std::string>& fields) {
    std::vector<json> points{params};
    for (const std::string& field : fields) {
        if (!params.contains(field)) continue;
        const json& v = params.at(field);
        std::vector<json> values = v.is_array() ? std::vector<json>(v.begin(), v.end())
                                                : std::vector<json>{v};
        std::vector<json> next;
        next.reserve(points.size() * values.size());
        for (const json& p : points)
            for (const json& val : values) {
                json q = p;
                q[field] = val;
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

long list_size(const json& params, const std::string& field) {
    if (!params.contains(field)) return 0;
    const json& v = params.at(field);
    return v.is_array() ? static_cast<long>(v.size()) : 1;
}

std::string zero_pad(long v, int width = 3) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

// ---------------------------------------------------------------- construct

json construct_point_row(const json& pt, std::uint64_t seed, long index, PointResult& result) {
    const std::string what = pt.at("construction").get<std::string>();
    const long cap = pt.value("weight_cap", 2000000L);
    json row = json::array();
    ApproxCertificate cert;
    double sup = 0.0;
    if (what == "square") {
        int k = pt.at("k").get<int>();
        cert = build_square(k);
        sup = measure_sup_error(cert, [](const Vector& x) { return x(0) * x(0); },
                                GridSpec::certification(1, seed));
        row = {k, kappa(cert.net).kappa, sup, cert.error_bound};
    } else if (what == "product") {
        int k = pt.at("k").get<int>();
        cert = build_product(k);
        sup = measure_sup_error(cert, [](const Vector& x) { return x(0) * x(1); },
                                GridSpec::tensor(2, 200, -1.0, 1.0));
        row = {k, kappa(cert.net).kappa, sup, cert.error_bound};
    } else if (what == "monomial") {
        int k = pt.at("k").get<int>();
        int d = pt.at("d").get<int>();
        cert = build_monomial(d, k);
        sup = measure_sup_error(
            cert,
            [d](const Vector& x) {
                double out = 1.0;
                for (int i = 0; i < d; ++i) out *= x(i);
                return out;
            },
            GridSpec::latin_hypercube(d, 100000, seed, -1.0, 1.0));
        row = {d, k, cert.net.width(), cert.net.depth(), kappa(cert.net).kappa,
               cert.kappa_stated, sup, cert.error_bound};
    } else {  // taylor
        int k = pt.at("k").get<int>();
        int N = pt.at("N").get<int>();
        int d = pt.at("d").get<int>();
        HolderSpec target = make_target(pt.at("target").get<std::string>(), d);
        if (pt.contains("alpha")) target.alpha = pt.at("alpha").get<double>();
        cert = build_taylor_net(target, N, k, cap);
        sup = measure_sup_error(cert, target.f, GridSpec::certification(d, seed));
        row = {d, target.alpha, N, k, cert.net.width(), cert.width, cert.net.depth(),
               kappa(cert.net).kappa, cert.kappa_stated, sup, cert.error_bound};
    }
    if (pt.value("save_nets", false)) {
        result.artifacts.emplace_back("net_" + zero_pad(index) + ".json", to_json(cert.net).dump(2) + "\n");
    }
    json cert_json = {{"construction", what},
                      {"width_stated", cert.width},
                      {"depth", cert.depth},
                      {"kappa_stated", cert.kappa_stated},
                      {"kappa_measured", kappa(cert.net).kappa},
                      {"sup_error", sup},
                      {"error_bound", cert.error_bound},
                      {"N", cert.N},
                      {"k", cert.k}};
    result.artifacts.emplace_back("cert_" + zero_pad(index) + ".json", cert_json.dump(2) + "\n");
    return row;
}

const char* construct_header(const std::string& what) {
    if (what == "square" || what == "product") return "k,kappa,sup_error,bound";
    if (what == "monomial")
        return "d,k,width,depth,kappa,kappa_stated,sup_error,bound";
    return "d,alpha,N,k,width,width_stated,depth,kappa,kappa_stated,sup_error,bound";
}

// -------------------------------------------------------------------- probe

json probe_point_row(const json& pt, std::uint64_t seed, long index) {
    const std::string what = pt.at("probe").get<std::string>();
    RngStream rng(seed, 1000 + static_cast<std::uint64_t>(index));
    if (what == "rademacher") {
        long n = pt.at("n").get<long>();
        int d = pt.at("d").get<int>();
        double K = pt.at("K").get<double>();
        int L = pt.at("L").get<int>();
        long trials = pt.value("trials", 10000L);
        double B = pt.value("B", 1.0);
        Matrix points(d, n);
        for (long i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) points(j, i) = rng.uniform();
        RademacherEstimate est =
            rademacher_linear_lb(points, K, trials, seed + static_cast<std::uint64_t>(index), L, B);
        bool in_bracket = est.mc_mean >= est.lower_bound - 3.0 * est.mc_stderr &&
                          est.mc_mean <= est.upper_bound + 3.0 * est.mc_stderr;
        return {n, d, K, L, trials, est.mc_mean, est.mc_stderr, est.lower_bound, est.upper_bound,
                in_bracket};
    }
    if (what == "packing") {
        int m = pt.at("m").get<int>();
        SignPack pack = greedy_sign_packing(m);
        double bound = std::pow(2.0, m / 4.0);
        return {m, static_cast<long>(pack.vectors.size()), bound, pack.min_hamming,
                verify_sign_pack(pack)};
    }
    if (what == "wasserstein") {
        long n = pt.at("n").get<long>();
        int d = pt.at("d").get<int>();
        long mc = pt.value("mc", 20000L);
        Matrix points(d, n);
        for (long i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) points(j, i) = rng.uniform();
        W1Probe probe = w1_nn_probe(points, mc, seed + static_cast<std::uint64_t>(index));
        bool ok = probe.estimate >= probe.lower_bound - 3.0 * probe.stderr_;
        return {n, d, mc, probe.estimate, probe.stderr_, probe.lower_bound, ok};
    }
    // bounds
    long n = pt.value("n", 100L);
    int d = pt.at("d").get<int>();
    double alpha = pt.at("alpha").get<double>();
    double K = pt.at("K").get<double>();
    int L = pt.at("L").get<int>();
    double B = pt.value("B", 1.0);
    auto [rad_lb, rad_ub] = rademacher_bound_formulas(n, d, K, L, B);
    ApproxLowerBounds lb = approx_lower_bound_formulas(d, alpha, K, L);
    json explicit_cell = lb.lipschitz_explicit ? json(*lb.lipschitz_explicit) : json();
    return {d, alpha, K, L, n, rad_lb, rad_ub, lb.general, explicit_cell};
}

const char* probe_header(const std::string& what) {
    if (what == "rademacher")
        return "n,d,K,L,trials,mc_mean,mc_stderr,lower_bound,upper_bound,in_bracket";
    if (what == "packing") return "m,count,cardinality_bound,min_hamming,verified";
    if (what == "wasserstein") return "n,d,mc,estimate,stderr,lower_bound,ok";
    return "d,alpha,K,L,n,rademacher_lb,rademacher_ub,approx_lb_general,approx_lb_explicit";
}

// ------------------------------------------------------------------ regress

double regression_K_for(const json& params, long n, int d, double alpha) {
    if (params.contains("K")) return params.at("K").get<double>();
    double expo = (d + 1.0) / (2.0 * d + 4.0 * alpha + 2.0);
    return params.at("K_scale").get<double>() * std::pow(static_cast<double>(n), expo);
}

HolderSpec regress_target(const json& params, std::uint64_t sweep_seed) {
    int d = params.at("d").get<int>();
    if (params.value("planted", false)) {
        RngStream rng(sweep_seed, 777);
        ReluNet planted = kappa_project(
            random_net(d, 1, params.value("planted_width", 8), params.value("planted_depth", 1),
                       rng, 1.5),
            params.value("planted_kappa", 1.0));
        HolderSpec spec;
        spec.d = d;
        spec.alpha = params.value("alpha", 1.0);
        spec.f = [planted](const Vector& x) { return planted.eval(x)(0); };
        return spec;
    }
    HolderSpec spec = make_target(params.at("target").get<std::string>(), d);
    if (params.contains("alpha")) spec.alpha = params.at("alpha").get<double>();
    return spec;
}

PointResult regress_point(const json& pt, std::uint64_t sweep_seed) {
    PointResult result;
    long n = pt.at("n").get<long>();
    std::uint64_t run_seed = pt.at("seeds").get<std::uint64_t>();

    RegressionConfig cfg;
    cfg.target = regress_target(pt, sweep_seed);
    cfg.n = n;
    cfg.noise_std = pt.value("noise_std", 0.0);
    cfg.width = pt.value("width", 16);
    cfg.depth = pt.value("depth", 1);
    cfg.steps = pt.value("steps", 2000L);
    cfg.lr = pt.value("lr", 0.1);
    cfg.batch = pt.value("batch", 32);
    cfg.epochs = pt.value("epochs", 10);
    cfg.holdout_n = pt.value("holdout_n", 10000L);
    cfg.seed = run_seed;
    double K_used = 0.0;
    double lambda_used = 0.0;
    if (pt.contains("lambda")) {
        lambda_used = pt.at("lambda").get<double>();
        cfg.lambda = lambda_used;
    } else {
        K_used = regression_K_for(pt, n, cfg.target.d, cfg.target.alpha);
        cfg.K = K_used;
    }

    TrainReport report = train_regression(cfg);
    for (const EpochStats& e : report.epochs) {
        result.rows.push_back(join_row({n, run_seed, K_used, lambda_used, e.epoch, e.train_loss,
                                        e.kappa, e.holdout_mse, e.opt_gap}));
    }
    if (pt.value("save_nets", false)) {
        result.artifacts.emplace_back(
            "net_n" + std::to_string(n) + "_seed" + std::to_string(run_seed) + ".json",
            to_json(report.net).dump(2) + "\n");
    }
    return result;
}

// ---------------------------------------------------------------------- gan

ReluNet make_planted_generator(int source_dim, int d, RngStream& rng) {
    // affine map z -> Az + c realized with a ReLU pair, image inside [0,1]^d
    Matrix A(d, source_dim);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < source_dim; ++j) A(i, j) = rng.uniform(-0.2, 0.2);
    Vector c = Vector::Constant(d, 0.5);
    Matrix H(2 * d, source_dim);
    H.topRows(d) = A;
    H.bottomRows(d) = -A;
    Vector hb(2 * d);
    hb.head(d) = c;
    hb.tail(d) = -c;
    Matrix O = Matrix::Zero(d, 2 * d);
    for (int i = 0; i < d; ++i) {
        O(i, i) = 1.0;
        O(i, d + i) = -1.0;
    }
    return ReluNet({{H, hb}, {O, Vector()}});
}

PointResult gan_point(const json& pt, std::uint64_t seed) {
    PointResult result;
    GanConfig cfg;
    cfg.data_dim = pt.value("d", 2);
    cfg.source_dim = pt.value("source_dim", 2);
    cfg.n = pt.value("n", 512L);
    cfg.gen_width = pt.value("gen_width", 16);
    cfg.gen_depth = pt.value("gen_depth", 1);
    cfg.disc_width = pt.value("disc_width", 16);
    cfg.disc_depth = pt.value("disc_depth", 1);
    cfg.outer_steps = pt.value("outer_steps", 60);
    cfg.inner_steps = pt.value("inner_steps", 20);
    cfg.lr_gen = pt.value("lr_gen", 0.05);
    cfg.lr_disc = pt.value("lr_disc", 0.5);
    cfg.nu_batch = pt.value("nu_batch", 256L);
    cfg.seed = pt.value("run_seed", seed);
    cfg.witness_count = pt.value("witness_count", 16);
    cfg.eval_samples = pt.value("eval_samples", 2000L);
    if (pt.value("lambda_from_K", false)) {
        double K = pt.at("K").get<double>();
        cfg.disc_lambda = 1.0 / (4.0 * K * K);
    } else if (pt.contains("lambda")) {
        cfg.disc_lambda = pt.at("lambda").get<double>();
    } else {
        cfg.disc_K = pt.at("K").get<double>();
    }
    RngStream gen_rng(seed, 888);
    cfg.planted_generator = make_planted_generator(cfg.source_dim, cfg.data_dim, gen_rng);

    GanReport report = train_gan(cfg);
    for (const GanStepStats& s : report.steps)
        result.rows.push_back(
            join_row({s.step, s.ipm_inner, s.disc_kappa, s.lip_probe, s.ipm_surrogate}));

    json summary = {{"initial_surrogate", report.initial_surrogate},
                    {"final_surrogate", report.final_surrogate},
                    {"ratio", report.final_surrogate / std::max(report.initial_surrogate, 1e-300)}};
    result.artifacts.emplace_back("summary.json", summary.dump(2) + "\n");
    result.artifacts.emplace_back("generator.json", to_json(report.generator).dump(2) + "\n");
    result.artifacts.emplace_back("discriminator.json", to_json(report.discriminator).dump(2) + "\n");
    result.artifacts.emplace_back("planted_generator.json",
                                  to_json(*cfg.planted_generator).dump(2) + "\n");
    return result;
}

// ------------------------------------------------------------------ routing

std::vector<std::string> grid_fields_for(const ExperimentConfig& cfg) {
    if (cfg.kind == "construct-sweep") return {"k", "N"};
    if (cfg.kind == "probe-sweep") return {"n", "d", "K", "L", "alpha", "m"};
    if (cfg.kind == "regress-sweep") return {"n", "seeds"};
    return {};
}

std::string csv_header_for(const ExperimentConfig& cfg) {
    if (cfg.kind == "construct-sweep")
        return construct_header(cfg.params.at("construction").get<std::string>());
    if (cfg.kind == "probe-sweep") return probe_header(cfg.params.at("probe").get<std::string>());
    if (cfg.kind == "regress-sweep")
        return "n,seed,K,lambda,epoch,train_loss,kappa,holdout_mse,opt_gap";
    return "step,ipm_inner,disc_kappa,lip_probe,ipm_surrogate";
}

PointResult run_point(const ExperimentConfig& cfg, const json& pt, long index) {
    PointResult result;
    try {
        if (cfg.kind == "construct-sweep") {
            result.rows.push_back(join_row(construct_point_row(pt, cfg.seed, index, result)
                                               .get<std::vector<json>>()));
        } else if (cfg.kind == "probe-sweep") {
            result.rows.push_back(join_row(probe_point_row(pt, cfg.seed, index).get<std::vector<json>>()));
        } else if (cfg.kind == "regress-sweep") {
            result = regress_point(pt, cfg.seed);
        } else {
            result = gan_point(pt, cfg.seed);
        }
    } catch (const std::exception& err) {
        result = PointResult{};
        result.status = err.what();
    }
    return result;
}

int env_thread_cap() {
    const char* raw = std::getenv("NORMNET_THREADS");
    if (!raw) return 1;
    int v = std::atoi(raw);
    return v < 1 ? 1 : v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a_hash(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void atomic_write(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp);
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.kind = j.value("kind", "");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.out_dir = out_dir;
    if (cfg.kind == "construct-sweep" && j.contains("construct")) cfg.params = j.at("construct");
    if (cfg.kind == "probe-sweep" && j.contains("probe")) cfg.params = j.at("probe");
    if (cfg.kind == "regress-sweep" && j.contains("regress")) cfg.params = j.at("regress");
    if (cfg.kind == "gan-run" && j.contains("gan")) cfg.params = j.at("gan");
    if (cfg.params.is_null()) cfg.params = json::object();
    return cfg;
}

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
    std::vector<Diagnostic> diags;
    auto add = [&](const std::string& field, const std::string& msg) {
        diags.push_back({field, msg});
    };

    static const std::vector<std::string> kinds = {"construct-sweep", "probe-sweep",
                                                   "regress-sweep", "gan-run"};
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) {
        add("kind", "must be one of construct-sweep, probe-sweep, regress-sweep, gan-run");
        return diags;
    }
    if (!cfg.raw.contains("seed")) add("seed", "seed is required");

    const json& p = cfg.params;
    if (cfg.kind == "construct-sweep") {
        std::string what = p.value("construction", "");
        if (what != "square" && what != "product" && what != "monomial" && what != "taylor")
            add("construct.construction", "must be square, product, monomial, or taylor");
        if (list_size(p, "k") == 0) add("construct.k", "grid of k values must be non-empty");
        if (what == "monomial" && p.value("d", 0) < 2) add("construct.d", "monomial requires d >= 2");
        if (what == "taylor") {
            if (list_size(p, "N") == 0) add("construct.N", "grid of N values must be non-empty");
            if (p.value("d", 0) < 1) add("construct.d", "taylor requires d >= 1");
            if (!p.contains("target"))
                add("construct.target", "taylor requires a named target");
            else {
                try {
                    HolderSpec spec = make_target(p.at("target").get<std::string>(), p.value("d", 1));
                    if (p.contains("alpha")) spec.alpha = p.at("alpha").get<double>();
                    if (auto msg = holder_spot_check(spec)) add("construct.target", *msg);
                } catch (const std::exception& err) {
                    add("construct.target", err.what());
                }
            }
        }
    } else if (cfg.kind == "probe-sweep") {
        std::string what = p.value("probe", "");
        if (what != "rademacher" && what != "packing" && what != "wasserstein" && what != "bounds")
            add("probe.probe", "must be rademacher, packing, wasserstein, or bounds");
        auto need = [&](const char* field) {
            if (list_size(p, field) == 0)
                add(std::string("probe.") + field, "grid must be non-empty");
        };
        if (what == "rademacher") {
            need("n");
            need("d");
            need("K");
            need("L");
        } else if (what == "packing") {
            need("m");
            for (const json& m : expand_grid(p, {"m"}))
                if (m.at("m").get<int>() < 8 || m.at("m").get<int>() > 24)
                    add("probe.m", "m must lie in [8, 24]");
        } else if (what == "wasserstein") {
            need("n");
            need("d");
        } else if (what == "bounds") {
            need("d");
            need("alpha");
            need("K");
            need("L");
            for (const json& pt : expand_grid(p, {"d", "alpha"})) {
                double a = pt.value("alpha", 1.0);
                int d = pt.value("d", 1);
                if (!(d > 2.0 * a))
                    add("probe.alpha", "lower-bound regime requires d > 2*alpha (d=" +
                                           std::to_string(d) + ", alpha=" + format_double(a) + ")");
            }
        }
    } else if (cfg.kind == "regress-sweep") {
        if (list_size(p, "n") == 0) add("regress.n", "grid of n values must be non-empty");
        if (list_size(p, "seeds") == 0) add("regress.seeds", "seed list must be non-empty");
        int budget_modes = (p.contains("K") ? 1 : 0) + (p.contains("K_scale") ? 1 : 0) +
                           (p.contains("lambda") ? 1 : 0);
        if (budget_modes != 1)
            add("regress.K", "exactly one of K, K_scale, lambda must be set");
        if (!p.value("planted", false) && !p.contains("target"))
            add("regress.target", "a named target or planted = true is required");
        if (p.value("d", 1) < 1) add("regress.d", "d must be >= 1");
    } else if (cfg.kind == "gan-run") {
        bool from_k = p.value("lambda_from_K", false);
        bool has_k = p.contains("K");
        bool has_lambda = p.contains("lambda");
        if (from_k) {
            if (!has_k) add("gan.K", "lambda_from_K requires K");
            if (has_lambda) add("gan.lambda", "lambda_from_K conflicts with explicit lambda");
        } else if (has_k == has_lambda) {
            add("gan.K", "exactly one of K, lambda must be set");
        }
        if (p.value("d", 2) < 1 || p.value("source_dim", 2) < 1)
            add("gan.d", "dimensions must be >= 1");
    }
    return diags;
}

RunManifest run(const ExperimentConfig& cfg) {
    auto diags = validate(cfg);
    if (!diags.empty())
        throw std::invalid_argument("invalid config: " + diags.front().field + ": " +
                                    diags.front().message);
    if (cfg.out_dir.empty()) throw std::invalid_argument("invalid config: output directory not set");

    const auto started = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<json> points = expand_grid(cfg.params, grid_fields_for(cfg));
    std::vector<PointResult> results(points.size());

    const int threads =
        static_cast<int>(std::min<long>(env_thread_cap(), static_cast<long>(points.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i)
            results[i] = run_point(cfg, points[i], static_cast<long>(i));
    } else {
        std::atomic<std::size_t> cursor{0};
        auto worker = [&]() {
            while (true) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= points.size()) break;
                results[i] = run_point(cfg, points[i], static_cast<long>(i));
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::string csv = csv_header_for(cfg) + "\n";
    for (const PointResult& r : results)
        for (const std::string& row : r.rows) csv += row + "\n";
    atomic_write((std::filesystem::path(cfg.out_dir) / "results.csv").string(), csv);
    for (const PointResult& r : results)
        for (const auto& [name, contents] : r.artifacts)
            atomic_write((std::filesystem::path(cfg.out_dir) / name).string(), contents);

    RunManifest manifest;
    std::ostringstream hash;
    hash << std::hex << fnv1a_hash(cfg.raw.dump());
    manifest.config_hash = hash.str();
    manifest.seed = cfg.seed;
    manifest.version = kVersion;
    manifest.points_total = static_cast<long>(points.size());
    for (const PointResult& r : results) {
        manifest.point_status.push_back(r.status);
        if (r.status != "ok") ++manifest.points_failed;
    }
    manifest.wall_clock_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                   std::chrono::steady_clock::now() - started)
                                                   .count());

    json mj = {{"config_hash", manifest.config_hash},
               {"seed", manifest.seed},
               {"version", manifest.version},
               {"wall_clock_ms", manifest.wall_clock_ms},
               {"points_total", manifest.points_total},
               {"points_failed", manifest.points_failed},
               {"point_status", manifest.point_status}};
    atomic_write((std::filesystem::path(cfg.out_dir) / "manifest.json").string(), mj.dump(2) + "\n");
    return manifest;
}

}  // namespace normnet
