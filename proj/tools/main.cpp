#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

using namespace kmx::tools;

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> assignments;
    std::string out;
    std::uint64_t seed = 20240611;
    int threads = 0;
    bool no_timestamp = false;
    std::string model = "heston";
    std::string method = "km";
    int order = -1;
    double S = 0, K = 0, tau = 0;

    Config settings() const {
        Config c = config_file.empty() ? Config{} : Config::from_file(config_file);
        for (const auto& a : assignments) c.set(a);
        return c;
    }
};

void add_output_options(CLI::App* app, Common& c) {
    app->add_option("--out,-o", c.out, "write CSV here instead of stdout");
    app->add_option("--seed", c.seed, "random seed")->capture_default_str();
    app->add_option("--threads", c.threads, "worker threads for simulation (0: all cores)");
    app->add_flag("--no-header-timestamp", c.no_timestamp, "omit the generation time from the CSV header");
    app->add_option("--config", c.config_file, "key=value settings file")->check(CLI::ExistingFile);
    app->add_option("--set", c.assignments, "key=value override (repeatable)");
}

void add_quote_options(CLI::App* app, Common& c, bool with_method) {
    add_output_options(app, c);
    app->add_option("--model", c.model, "heston | cev | sz | commodity | bs")
        ->check(CLI::IsMember({"heston", "cev", "sz", "commodity", "bs"}))
        ->capture_default_str();
    if (with_method)
        app->add_option("--method", c.method, "km | ft | mc | closed")
            ->check(CLI::IsMember({"km", "ft", "mc", "closed"}))
            ->capture_default_str();
    app->add_option("--order", c.order, "expansion order (default: model reference order)")->check(CLI::Range(0, 6));
    app->add_option("-S,--spot", c.S, "spot price");
    app->add_option("-K,--strike", c.K, "strike");
    app->add_option("--tau", c.tau, "time to maturity in years");
}

QuoteRequest request(const Common& c, CLI::App* app) {
    QuoteRequest q;
    q.model = c.model;
    q.method = c.method;
    q.order = c.order;
    q.seed = c.seed;
    q.threads = c.threads;
    q.settings = c.settings();
    if (app->count("--spot")) q.settings.set("S", format_number(c.S));
    if (app->count("--strike")) q.settings.set("K", format_number(c.K));
    if (app->count("--tau")) q.settings.set("tau", format_number(c.tau));
    return q;
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit(const Common& c, const std::string& command, std::vector<std::pair<std::string, std::string>> meta,
          const Table& t) {
    std::vector<std::pair<std::string, std::string>> head{{"command", command}, {"version", KMX_VERSION}};
    if (!c.no_timestamp) head.push_back({"generated", utc_now()});
    head.insert(head.end(), meta.begin(), meta.end());
    if (c.out.empty()) {
        write_csv(std::cout, head, t);
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    write_csv(f, head, t);
}

int run_experiment(const Common& c, const std::string& id) {
    const Experiment& e = find_experiment(id);
    RunOptions o;
    o.seed = c.seed;
    o.threads = c.threads;
    o.settings = c.settings();
    auto res = e.run(o);
    auto extra = o.settings.unused();
    if (!extra.empty()) throw std::invalid_argument("setting not used by " + id + ": " + extra.front());

    std::vector<std::pair<std::string, std::string>> meta{{"experiment", e.id}, {"seed", std::to_string(c.seed)}};
    meta.insert(meta.end(), res.params.begin(), res.params.end());
    emit(c, "run", meta, res.table);

    int failed = 0;
    for (const auto& ch : res.checks) {
        const char* tag = ch.passed ? "PASS" : (ch.gating ? "FAIL" : "INFO");
        if (!ch.passed && ch.gating) ++failed;
        std::cerr << tag << "  " << ch.name << "  (" << ch.detail << ")\n";
    }
    std::cerr << e.id << ": " << res.checks.size() << " checks, " << failed << " failed\n";
    return res.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Series-expansion option pricing: quotes, expansions, diagnostics and reproduction runs"};
    app.require_subcommand(1);
    Common c;

    auto* price = app.add_subcommand("price", "price one contract");
    add_quote_options(price, c, true);
    auto* greeks = app.add_subcommand("greeks", "delta, gamma and vega of one contract");
    add_quote_options(greeks, c, true);
    auto* mc = app.add_subcommand("mc", "Monte Carlo estimate with confidence interval");
    add_quote_options(mc, c, false);
    auto* diagnose = app.add_subcommand("diagnose", "model and result diagnostics report");
    add_quote_options(diagnose, c, false);
    bool dump = false;
    auto* expand = app.add_subcommand("expand", "corrective term sizes, optionally serialised");
    add_quote_options(expand, c, false);
    expand->add_flag("--dump", dump, "print each corrective term");

    std::string id;
    bool list = false;
    auto* run = app.add_subcommand("run", "run a registered experiment; exit status reflects its checks");
    add_output_options(run, c);
    run->add_option("experiment", id, "experiment id");
    run->add_flag("--list", list, "list experiment ids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*price) {
            auto out = price_command(request(c, price));
            emit(c, "price", out.meta, out.table);
        } else if (*greeks) {
            auto out = greeks_command(request(c, greeks));
            emit(c, "greeks", out.meta, out.table);
        } else if (*mc) {
            auto out = mc_command(request(c, mc));
            emit(c, "mc", out.meta, out.table);
        } else if (*diagnose) {
            auto out = diagnose_command(request(c, diagnose));
            emit(c, "diagnose", out.meta, out.table);
        } else if (*expand) {
            auto out = expand_command(request(c, expand), dump);
            emit(c, "expand", out.meta, out.table);
        } else if (*run) {
            if (list) {
                for (const auto& e : registry()) std::cout << e.id << "  " << e.description << '\n';
                return 0;
            }
            if (id.empty()) throw std::invalid_argument("run needs an experiment id (see run --list)");
            return run_experiment(c, id);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
