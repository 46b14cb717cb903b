// Command-line driver for the experiment pipelines. Links only the C API.
// Every subcommand writes into the --out directory; identical flags and seed
// give byte-identical files.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nngp/nngp.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitLibrary = 3;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(nngp_status s, const char* what) {
    if (s != NNGP_OK)
        throw LibraryError(std::string(what) + ": " + nngp_status_string(s) + ": " + nngp_last_error());
}

// RAII wrapper for C handles.
template <class T, void (*Destroy)(T*)>
class Handle {
public:
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Destroy(p_); }
    T** out() { return &p_; }
    T* get() const { return p_; }

private:
    T* p_ = nullptr;
};

using Network = Handle<nngp_network, nngp_network_destroy>;
using Dataset = Handle<nngp_dataset, nngp_dataset_destroy>;
using Grid = Handle<nngp_grid, nngp_grid_destroy>;
using ChainH = Handle<nngp_chain, nngp_chain_destroy>;
using Curve = Handle<nngp_curve, nngp_curve_destroy>;
using SampledNet = Handle<nngp_sampled_net, nngp_sampled_net_destroy>;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Non-finite values are not representable in JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LibraryError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out.flush()) throw LibraryError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::filesystem::path prepare_out(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw LibraryError("cannot create output directory " + dir + ": " + ec.message());
    return dir;
}

// ---- shared option groups ---------------------------------------------------

struct NetOptions {
    int depth = 2;
    double slope = 0.0;
    double mu = 0.0;
    double sigma2 = 2.0;

    void add(CLI::App* app, int default_depth) {
        depth = default_depth;
        app->add_option("--depth", depth, "number of weight layers L")->check(CLI::Range(1, 4096))->capture_default_str();
        app->add_option("--slope", slope, "LReLU slope a")->check(CLI::Range(-1.0, 1.0))->capture_default_str();
        app->add_option("--mu", mu, "weight mean hyperparameter")->capture_default_str();
        app->add_option("--sigma2", sigma2, "weight variance hyperparameter")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }
};

struct DatasetOptions {
    std::string spec = "sine";
    std::optional<double> noise_var;

    void add(CLI::App* app) {
        app->add_option("--dataset", spec, "sine | xor | snelson:PATH")->capture_default_str();
        app->add_option("--noise-var", noise_var, "observation noise variance (default 0.1)")
            ->check(CLI::NonNegativeNumber);
    }
};

struct GridOptions {
    std::string spec;
    nngp_grid_spec value{};

    void add(CLI::App* app) {
        app->add_option("--grid", spec, "mu_lo:mu_hi:sig2_lo:sig2_hi[:res] (default -2.5:1:0.1:8:200)");
    }

    void resolve() {
        nngp_grid_spec_default(&value);
        if (spec.empty()) return;
        std::vector<double> parts;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) {
            try {
                std::size_t used = 0;
                parts.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw UsageError("--grid: cannot parse '" + item + "'");
            }
        }
        if (parts.size() != 4 && parts.size() != 5)
            throw UsageError("--grid expects mu_lo:mu_hi:sig2_lo:sig2_hi[:res]");
        value.mu_lo = parts[0];
        value.mu_hi = parts[1];
        value.sig2_lo = parts[2];
        value.sig2_hi = parts[3];
        if (parts.size() == 5) {
            if (parts[4] < 1 || parts[4] != std::floor(parts[4])) throw UsageError("--grid: resolution must be a positive integer");
            value.resolution = static_cast<int>(parts[4]);
        }
        if (!(value.mu_lo < value.mu_hi) && value.resolution > 1) throw UsageError("--grid: need mu_lo < mu_hi");
        if (!(value.sig2_lo < value.sig2_hi) && value.resolution > 1) throw UsageError("--grid: need sig2_lo < sig2_hi");
        if (!(value.sig2_lo > 0)) throw UsageError("--grid: sig2_lo must be positive");
    }
};

struct MHOptions {
    nngp_mh_config value{};
    std::string init = "grid";

    void add(CLI::App* app) {
        nngp_mh_config_default(&value);
        app->add_option("--init", init, "chain start: grid (log-posterior grid MAP) | flags (--mu, --sigma2)")
            ->check(CLI::IsMember({"grid", "flags"}))
            ->capture_default_str();
        app->add_option("--burn-in", value.burn_in, "MH burn-in iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
        app->add_option("--thin", value.thin, "MH thinning interval")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--n-samples", value.n_samples, "retained MH samples")->check(CLI::PositiveNumber)->capture_default_str();
    }
};

// ---- data helpers -----------------------------------------------------------

struct Arrays {
    std::size_t n_train = 0, n_test = 0, dim = 0;
    double noise_var = 0.1;
    std::vector<double> X_train, y_train, X_test, y_test;
};

void load_dataset(const DatasetOptions& opt, std::uint64_t seed, Dataset& ds) {
    if (opt.spec == "sine") {
        check(nngp_dataset_sine(seed, ds.out()), "dataset");
    } else if (opt.spec == "xor") {
        check(nngp_dataset_smooth_xor(seed, ds.out()), "dataset");
    } else if (opt.spec.rfind("snelson:", 0) == 0 && opt.spec.size() > 8) {
        check(nngp_dataset_snelson(opt.spec.substr(8).c_str(), ds.out()), "dataset");
    } else {
        throw UsageError("--dataset must be sine, xor or snelson:PATH");
    }
}

Arrays arrays_of(const Dataset& ds, const DatasetOptions& opt) {
    Arrays a;
    check(nngp_dataset_dims(ds.get(), &a.n_train, &a.n_test, &a.dim, &a.noise_var), "dataset");
    if (opt.noise_var) a.noise_var = *opt.noise_var;
    a.X_train.resize(a.n_train * a.dim);
    a.y_train.resize(a.n_train);
    a.X_test.resize(a.n_test * a.dim);
    a.y_test.resize(a.n_test);
    check(nngp_dataset_train(ds.get(), a.X_train.data(), a.y_train.data()), "dataset");
    check(nngp_dataset_test(ds.get(), a.X_test.data(), a.y_test.data()), "dataset");
    return a;
}

void make_network(const NetOptions& opt, int input_dim, bool final_linear, Network& net) {
    check(nngp_network_create(opt.slope, input_dim, opt.depth, opt.mu, std::sqrt(opt.sigma2), final_linear ? 1 : 0,
                              net.out()),
          "network");
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

json grid_point_json(const nngp_grid_point& p) {
    return {{"mu", num(p.mu)}, {"sigma2", num(p.sigma2)}, {"value", num(p.value)},
            {"mu_index", p.mu_index}, {"sigma2_index", p.sig2_index}};
}

json grid_spec_json(const nngp_grid_spec& g) {
    return {{"mu_lo", g.mu_lo}, {"mu_hi", g.mu_hi}, {"sigma2_lo", g.sig2_lo}, {"sigma2_hi", g.sig2_hi},
            {"resolution", g.resolution}};
}

json mh_json(const nngp_mh_config& c) {
    return {{"burn_in", c.burn_in}, {"thin", c.thin}, {"n_samples", c.n_samples},
            {"proposal_var_mu", c.prop_var_mu}, {"proposal_var_sigma2", c.prop_var_sig2},
            {"proposal_corr", c.prop_corr}};
}

struct GridSummary {
    nngp_grid_point best{};
    nngp_grid_point constrained{};
    int failed = 0;
    int jittered = 0;
    double max_jitter = 0.0;
};

GridSummary summarise(const Grid& g) {
    GridSummary s;
    check(nngp_grid_argmax(g.get(), 0, &s.best), "grid");
    check(nngp_grid_argmax(g.get(), 1, &s.constrained), "grid");
    check(nngp_grid_diagnostics(g.get(), &s.failed, &s.jittered, &s.max_jitter), "grid");
    return s;
}

struct ChainRun {
    nngp_mh_config config{};
    nngp_hyper_prior prior{};
    double init_mu = 0.0;
    double init_sigma2 = 0.0;
};

// Starts at the log-posterior grid MAP unless --init flags is given.
ChainRun run_chain(const Network& nw, const Arrays& a, const NetOptions& net, const MHOptions& mh,
                   const nngp_grid_spec& spec, std::uint64_t seed, ChainH& chain) {
    ChainRun r;
    r.config = mh.value;
    r.config.seed = seed;
    nngp_hyper_prior_default(&r.prior);
    r.init_mu = net.mu;
    r.init_sigma2 = net.sigma2;
    if (mh.init == "grid") {
        Grid g;
        check(nngp_grid_eval(nw.get(), a.noise_var, a.X_train.data(), a.n_train, a.y_train.data(), &spec,
                             NNGP_GRID_LOG_POSTERIOR, &r.prior, g.out()),
              "grid");
        const GridSummary s = summarise(g);
        if (!std::isfinite(s.best.value)) throw LibraryError("grid: no cell could be evaluated");
        r.init_mu = s.best.mu;
        r.init_sigma2 = s.best.sigma2;
    }
    check(nngp_mh_sample(nw.get(), a.noise_var, a.X_train.data(), a.n_train, a.y_train.data(), &r.prior,
                         &r.config, r.init_mu, r.init_sigma2, chain.out()),
          "mh");
    return r;
}

// ---- subcommands ------------------------------------------------------------

struct KernelCurveCmd {
    NetOptions net;
    int n_theta = 33;
    int empirical_width = 0;
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("kernel-curve", "normalised kernel against the input angle");
        net.add(app, 1);
        app->add_option("--n-theta", n_theta, "number of angles on [0, pi]")->capture_default_str();
        app->add_option("--empirical-width", empirical_width,
                        "also sample one network with this hidden width (0 = theory only)")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    double normalised(const Network& nw, const double* x, const double* y) const {
        double kxy = 0, kxx = 0, kyy = 0;
        check(nngp_deep_kernel(nw.get(), x, y, &kxy), "kernel");
        check(nngp_deep_kernel(nw.get(), x, x, &kxx), "kernel");
        check(nngp_deep_kernel(nw.get(), y, y, &kyy), "kernel");
        return kxy / std::sqrt(kxx * kyy);
    }

    void run() {
        if (n_theta < 1) throw UsageError("--n-theta must be at least 1");
        const auto dir = prepare_out(out);
        Network nw;
        make_network(net, 2, false, nw);

        std::vector<double> X(2 * static_cast<std::size_t>(n_theta) + 2);
        X[0] = 1.0;
        X[1] = 0.0;
        std::vector<double> thetas(static_cast<std::size_t>(n_theta));
        for (int i = 0; i < n_theta; ++i) {
            const double t = n_theta == 1 ? 0.0 : std::numbers::pi * i / (n_theta - 1);
            thetas[static_cast<std::size_t>(i)] = t;
            X[2 * static_cast<std::size_t>(i) + 2] = std::cos(t);
            X[2 * static_cast<std::size_t>(i) + 3] = std::sin(t);
        }

        std::vector<double> features;
        std::size_t width = 0;
        if (empirical_width > 0) {
            nngp_scheme scheme;
            nngp_scheme_default(NNGP_SCHEME_IID, &scheme);
            scheme.mu = net.mu;
            scheme.sigma = std::sqrt(net.sigma2);
            const std::vector<int> widths(static_cast<std::size_t>(net.depth), empirical_width);
            SampledNet sn;
            check(nngp_sample_weights(2, widths.data(), widths.size(), &scheme, net.slope, seed, sn.out()),
                  "sample_weights");
            width = static_cast<std::size_t>(empirical_width);
            features.resize((static_cast<std::size_t>(n_theta) + 1) * width);
            check(nngp_sampled_net_features(sn.get(), X.data(), static_cast<std::size_t>(n_theta) + 1,
                                            features.data()),
                  "features");
        }
        auto emp = [&](std::size_t a, std::size_t b) {
            double s = 0.0;
            for (std::size_t j = 0; j < width; ++j) s += features[a * width + j] * features[b * width + j];
            return s / static_cast<double>(width);
        };

        std::ostringstream csv;
        csv << "theta0,normalised_kernel" << (width ? ",empirical" : "") << "\n";
        for (int i = 0; i < n_theta; ++i) {
            const auto k = static_cast<std::size_t>(i);
            csv << fmt(thetas[k]) << ',' << fmt(normalised(nw, &X[0], &X[2 * k + 2]));
            if (width) csv << ',' << fmt(emp(0, k + 1) / std::sqrt(emp(0, 0) * emp(k + 1, k + 1)));
            csv << '\n';
        }
        write_text(dir / "kernel_curve.csv", csv.str());
    }
};

struct FitCmd {
    DatasetOptions data;
    NetOptions net;
    GridOptions grid;
    MHOptions mh;
    std::string estimator = "mle";
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("fit", "fit hyperparameters and report predictive MSE");
        data.add(app);
        net.add(app, 2);
        grid.add(app);
        mh.add(app);
        app->add_option("--estimator", estimator, "mle | map | map-mu0 | mle-mu0 | marginal | fixed")
            ->check(CLI::IsMember({"mle", "map", "map-mu0", "mle-mu0", "marginal", "fixed"}))
            ->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() {
        grid.resolve();
        const auto dir = prepare_out(out);
        Dataset ds;
        load_dataset(data, seed, ds);
        const Arrays a = arrays_of(ds, data);
        Network nw;
        make_network(net, static_cast<int>(a.dim), true, nw);

        json report;
        report["dataset"] = data.spec;
        report["estimator"] = estimator;
        report["depth"] = net.depth;
        report["slope"] = net.slope;
        report["noise_var"] = a.noise_var;
        report["seed"] = seed;

        ChainH chain;
        double mu = net.mu;
        double sigma2 = net.sigma2;
        if (estimator == "mle" || estimator == "mle-mu0" || estimator == "map-mu0") {
            const bool posterior = estimator == "map-mu0";
            Grid g;
            check(nngp_grid_eval(nw.get(), a.noise_var, a.X_train.data(), a.n_train, a.y_train.data(), &grid.value,
                                 posterior ? NNGP_GRID_LOG_POSTERIOR : NNGP_GRID_LOG_ML, nullptr, g.out()),
                  "grid");
            const GridSummary s = summarise(g);
            const nngp_grid_point& p = estimator == "mle" ? s.best : s.constrained;
            if (!std::isfinite(p.value)) throw LibraryError("grid: no cell could be evaluated");
            mu = p.mu;
            sigma2 = p.sigma2;
            report["grid"] = grid_spec_json(grid.value);
            report["objective"] = num(p.value);
            report["failed_cells"] = s.failed;
            report["jittered_cells"] = s.jittered;
            report["warnings"] = s.failed;
        } else if (estimator == "map" || estimator == "marginal") {
            const ChainRun run = run_chain(nw, a, net, mh, grid.value, seed, chain);
            check(nngp_chain_map(chain.get(), &mu, &sigma2), "mh");
            double rate = 0.0;
            check(nngp_chain_acceptance(chain.get(), &rate), "mh");
            report["mh"] = mh_json(run.config);
            report["init"] = {{"mu", run.init_mu}, {"sigma2", run.init_sigma2}};
            report["acceptance_rate"] = rate;
            report["chain_size"] = nngp_chain_size(chain.get());
        }
        report["mu"] = mu;
        report["sigma2"] = sigma2;

        auto predict = [&](const std::vector<double>& Xs, std::size_t m, std::vector<double>& mean,
                           std::vector<double>& var) {
            mean.assign(m, 0.0);
            var.assign(m, 0.0);
            if (estimator == "marginal") {
                check(nngp_marginal_predictive(nw.get(), a.noise_var, chain.get(), Xs.data(), m, a.X_train.data(),
                                               a.n_train, a.y_train.data(), mean.data(), var.data()),
                      "predict");
            } else {
                Network fitted;
                NetOptions o = net;
                o.mu = mu;
                o.sigma2 = sigma2;
                make_network(o, static_cast<int>(a.dim), true, fitted);
                check(nngp_posterior_predictive(fitted.get(), a.noise_var, Xs.data(), m, a.X_train.data(),
                                                a.n_train, a.y_train.data(), mean.data(), var.data(), nullptr),
                      "predict");
            }
        };
        std::vector<double> train_mean, train_var, test_mean, test_var;
        predict(a.X_train, a.n_train, train_mean, train_var);
        predict(a.X_test, a.n_test, test_mean, test_var);
        report["train_mse"] = mse(train_mean, a.y_train);
        report["test_mse"] = mse(test_mean, a.y_test);

        std::ostringstream csv;
        csv << "split";
        for (std::size_t c = 0; c < a.dim; ++c) csv << ",x" << c + 1;
        csv << ",y,mean,variance\n";
        auto rows = [&](const char* split, const std::vector<double>& X, const std::vector<double>& y,
                        const std::vector<double>& m, const std::vector<double>& v) {
            for (std::size_t i = 0; i < y.size(); ++i) {
                csv << split;
                for (std::size_t c = 0; c < a.dim; ++c) csv << ',' << fmt(X[i * a.dim + c]);
                csv << ',' << fmt(y[i]) << ',' << fmt(m[i]) << ',' << fmt(v[i]) << '\n';
            }
        };
        rows("train", a.X_train, a.y_train, train_mean, train_var);
        rows("test", a.X_test, a.y_test, test_mean, test_var);
        write_text(dir / "predictive.csv", csv.str());
        write_json(dir / "report.json", report);
    }
};

struct GridCmd {
    DatasetOptions data;
    NetOptions net;
    GridOptions grid;
    std::string target = "logml";
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("grid", "log marginal likelihood or log posterior over (mu, sigma2)");
        data.add(app);
        net.add(app, 2);
        grid.add(app);
        app->add_option("--target", target, "logml | logpost")
            ->check(CLI::IsMember({"logml", "logpost"}))
            ->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() {
        grid.resolve();
        const auto dir = prepare_out(out);
        Dataset ds;
        load_dataset(data, seed, ds);
        const Arrays a = arrays_of(ds, data);
        Network nw;
        make_network(net, static_cast<int>(a.dim), true, nw);
        Grid g;
        check(nngp_grid_eval(nw.get(), a.noise_var, a.X_train.data(), a.n_train, a.y_train.data(), &grid.value,
                             target == "logml" ? NNGP_GRID_LOG_ML : NNGP_GRID_LOG_POSTERIOR, nullptr, g.out()),
              "grid");
        check(nngp_grid_write_csv(g.get(), (dir / "grid.csv").string().c_str()), "grid");
        const GridSummary s = summarise(g);
        json meta;
        meta["dataset"] = data.spec;
        meta["target"] = target;
        meta["depth"] = net.depth;
        meta["slope"] = net.slope;
        meta["noise_var"] = a.noise_var;
        meta["seed"] = seed;
        meta["grid"] = grid_spec_json(grid.value);
        meta["argmax"] = grid_point_json(s.best);
        meta["argmax_mu0"] = grid_point_json(s.constrained);
        meta["failed_cells"] = s.failed;
        meta["jittered_cells"] = s.jittered;
        meta["max_jitter"] = s.max_jitter;
        meta["warnings"] = s.failed;
        write_json(dir / "grid.json", meta);
        if (s.failed) std::cerr << "warning: " << s.failed << " grid cells could not be evaluated\n";
    }
};

struct MHCmd {
    DatasetOptions data;
    NetOptions net;
    GridOptions grid;
    MHOptions mh;
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("mh", "Metropolis-Hastings samples of the hyper-posterior");
        data.add(app);
        net.add(app, 2);
        grid.add(app);
        mh.add(app);
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() {
        grid.resolve();
        const auto dir = prepare_out(out);
        Dataset ds;
        load_dataset(data, seed, ds);
        const Arrays a = arrays_of(ds, data);
        Network nw;
        make_network(net, static_cast<int>(a.dim), true, nw);
        ChainH chain;
        const ChainRun run = run_chain(nw, a, net, mh, grid.value, seed, chain);
        const nngp_mh_config& cfg = run.config;
        const nngp_hyper_prior& prior = run.prior;
        check(nngp_chain_write_csv(chain.get(), (dir / "chain.csv").string().c_str()), "mh");
        double rate = 0.0, mu = 0.0, s2 = 0.0;
        check(nngp_chain_acceptance(chain.get(), &rate), "mh");
        check(nngp_chain_map(chain.get(), &mu, &s2), "mh");
        json meta;
        meta["dataset"] = data.spec;
        meta["depth"] = net.depth;
        meta["slope"] = net.slope;
        meta["noise_var"] = a.noise_var;
        meta["seed"] = seed;
        meta["init"] = {{"mu", run.init_mu}, {"sigma2", run.init_sigma2}, {"source", mh.init}};
        meta["prior"] = {{"mu_mean", prior.mu_mean}, {"mu_var", prior.mu_var}, {"ig_shape", prior.ig_shape},
                         {"ig_scale", prior.ig_scale}};
        meta["mh"] = mh_json(cfg);
        meta["acceptance_rate"] = rate;
        meta["map"] = {{"mu", mu}, {"sigma2", s2}};
        write_json(dir / "chain.json", meta);
    }
};

struct MMDCmd {
    std::string scheme = "f1";
    std::string f4_sigma = "analytic";
    std::string widths = "16,64,256,1024";
    int depth = 4;
    double slope = 0.0;
    double mu = 0.0;
    double sigma2 = 2.0;
    int n_samples = 2000;
    int n_probe = 4;
    int input_dim = 10;
    int permutations = 200;
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("mmd", "MMD^2 between finite networks and the limiting GP");
        app->add_option("--scheme", scheme, "iid | f1 | f2 | f3 | f4")
            ->check(CLI::IsMember({"iid", "f1", "f2", "f3", "f4"}))
            ->capture_default_str();
        app->add_option("--f4-sigma", f4_sigma, "analytic | table")
            ->check(CLI::IsMember({"analytic", "table"}))
            ->capture_default_str();
        app->add_option("--widths", widths, "comma-separated nondecreasing hidden widths")->capture_default_str();
        app->add_option("--depth", depth, "number of weight layers L")->check(CLI::Range(2, 4096))->capture_default_str();
        app->add_option("--slope", slope, "LReLU slope a")->check(CLI::Range(-1.0, 1.0))->capture_default_str();
        app->add_option("--mu", mu, "iid weight mean")->capture_default_str();
        app->add_option("--sigma2", sigma2, "iid weight variance")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--n-samples", n_samples, "draws per side")->check(CLI::Range(2, 100000000))->capture_default_str();
        app->add_option("--n-probe", n_probe, "probe points")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--input-dim", input_dim, "input dimension")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--permutations", permutations, "permutations for the null band")
            ->check(CLI::Range(2, 1000000))
            ->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() {
        std::vector<int> w;
        std::stringstream ss(widths);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                const int v = std::stoi(item, &used);
                if (used != item.size() || v < 1) throw std::invalid_argument(item);
                w.push_back(v);
            } catch (const std::exception&) {
                throw UsageError("--widths: cannot parse '" + item + "'");
            }
        }
        if (w.empty()) throw UsageError("--widths must list at least one width");
        for (std::size_t i = 1; i < w.size(); ++i)
            if (w[i] < w[i - 1]) throw UsageError("--widths must be nondecreasing");

        const auto dir = prepare_out(out);
        nngp_convergence_config cfg;
        nngp_convergence_config_default(&cfg);
        const nngp_scheme_kind kind = scheme == "iid" ? NNGP_SCHEME_IID
                                      : scheme == "f1" ? NNGP_SCHEME_F1
                                      : scheme == "f2" ? NNGP_SCHEME_F2
                                      : scheme == "f3" ? NNGP_SCHEME_F3
                                                       : NNGP_SCHEME_F4;
        nngp_scheme_default(kind, &cfg.scheme);
        cfg.scheme.mu = mu;
        cfg.scheme.sigma = std::sqrt(sigma2);
        cfg.scheme.f4_table_sigma = f4_sigma == "table" ? 1 : 0;
        cfg.depth = depth;
        cfg.slope = slope;
        cfg.n_samples = n_samples;
        cfg.n_probe = n_probe;
        cfg.input_dim = input_dim;
        cfg.n_permutations = permutations;
        cfg.seed = seed;
        Curve curve;
        check(nngp_convergence_experiment(&cfg, w.data(), w.size(), curve.out()), "mmd");
        check(nngp_curve_write_csv(curve.get(), (dir / "curve.csv").string().c_str()), "mmd");
        json meta;
        meta["scheme"] = scheme;
        if (scheme == "f4") meta["f4_sigma"] = f4_sigma;
        meta["depth"] = depth;
        meta["slope"] = slope;
        meta["widths"] = w;
        meta["n_samples"] = n_samples;
        meta["n_probe"] = n_probe;
        meta["input_dim"] = input_dim;
        meta["permutations"] = permutations;
        meta["seed"] = seed;
        write_json(dir / "curve.json", meta);
    }
};

struct PriorDrawsCmd {
    NetOptions net;
    int dim = 10;
    int n_draws = 5;
    int n_points = 200;
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("prior-draws", "prior function draws along a great circle");
        net.add(app, 2);
        app->add_option("--dim", dim, "input dimension")->check(CLI::Range(2, 100000))->capture_default_str();
        app->add_option("--n-draws", n_draws, "number of functions")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--n-points", n_points, "points on the circle")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() {
        const auto dir = prepare_out(out);
        const auto m = static_cast<std::size_t>(n_points);
        const auto d = static_cast<std::size_t>(dim);
        std::vector<double> X(m * d);
        check(nngp_circle_traversal(dim, n_points, seed, X.data()), "circle");
        Network nw;
        make_network(net, dim, true, nw);
        std::vector<double> draws(static_cast<std::size_t>(n_draws) * m);
        check(nngp_sample_prior(nw.get(), X.data(), m, n_draws, seed, draws.data()), "prior");
        std::ostringstream csv;
        csv << 't';
        for (int k = 0; k < n_draws; ++k) csv << ",draw_" << k + 1;
        csv << '\n';
        for (std::size_t i = 0; i < m; ++i) {
            csv << fmt(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m));
            for (std::size_t k = 0; k < static_cast<std::size_t>(n_draws); ++k) csv << ',' << fmt(draws[k * m + i]);
            csv << '\n';
        }
        write_text(dir / "prior_draws.csv", csv.str());
    }
};

struct DatasetCmd {
    DatasetOptions data;
    std::uint64_t seed = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("dataset", "export a benchmark dataset as CSV");
        data.add(app);
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() {
        const auto dir = prepare_out(out);
        Dataset ds;
        load_dataset(data, seed, ds);
        check(nngp_dataset_write_csv(ds.get(), (dir / "dataset.csv").string().c_str()), "dataset");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limiting-kernel GP experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", nngp_version());

    KernelCurveCmd kernel_curve;
    FitCmd fit;
    GridCmd grid;
    MHCmd mh;
    MMDCmd mmd;
    PriorDrawsCmd prior_draws;
    DatasetCmd dataset;
    kernel_curve.add(app);
    fit.add(app);
    grid.add(app);
    mh.add(app);
    mmd.add(app);
    prior_draws.add(app);
    dataset.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const LibraryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLibrary;
    }
    return 0;
}
