// platekeeper: store administration, API server, workloads, and reports.
//
// Exit codes: 0 ok, 2 corrupt journal, 3 policy error, 4 usage/validation error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "platekeeper/http_server.hpp"
#include "platekeeper/platekeeper.hpp"
#include "platekeeper/scenario.hpp"

namespace pk = platekeeper;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCorrupt = 2;
constexpr int kExitPolicy = 3;
constexpr int kExitUsage = 4;

struct ExitError {
    int code;
    std::string message;
};

std::string read_text(const std::string& path, int exit_code, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ExitError{exit_code, std::string("cannot read ") + what + " file '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string describe(const pk::Error& e) { return std::string(e.code_name()) + ": " + e.what(); }

pk::policy::NodePtr load_policy(const std::string& path) {
    auto text = read_text(path, kExitPolicy, "policy");
    try {
        return pk::policy::build_policy(std::string_view(text));
    } catch (const pk::Error& e) {
        throw ExitError{kExitPolicy, std::string("policy error: ") + describe(e)};
    }
}

pk::CalendarDate parse_date(const std::string& text, const char* flag) {
    try {
        return pk::CalendarDate::parse(text);
    } catch (const pk::Error& e) {
        throw ExitError{kExitUsage, std::string(flag) + ": " + e.what()};
    }
}

std::unique_ptr<pk::Store> open_store(const std::string& dir, pk::StoreOptions options = {}) {
    if (dir.empty()) throw ExitError{kExitUsage, "--store (or PLATEKEEPER_STORE) is required"};
    return std::make_unique<pk::Store>(dir, std::move(options));
}

void print_top_cost(const std::vector<pk::TopCostRow>& rows) {
    std::printf("%-5s %-32s %15s %12s\n", "rank", "plate_id", "cumulative_cost", "maintenances");
    int rank = 0;
    for (const auto& r : rows) {
        std::printf("%-5d %-32s %15lld %12llu\n", ++rank, r.plate_id.str().c_str(),
                    static_cast<long long>(r.cumulative_cost.amount()),
                    static_cast<unsigned long long>(r.maintenance_count));
    }
}

void print_period(const pk::PeriodComparison& p) {
    std::printf("period_a_total  %lld\n", static_cast<long long>(p.period_a_total.amount()));
    std::printf("period_b_total  %lld\n", static_cast<long long>(p.period_b_total.amount()));
    if (p.zero_baseline()) {
        std::printf("reduction_pct   undefined (zero baseline)\n");
    } else {
        std::printf("reduction_pct   %.1f\n", p.reduction_pct());
    }
}

int run_serve(const std::string& store_dir, const std::string& listen, const std::string& policy_file) {
    auto policy = load_policy(policy_file);
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw ExitError{kExitUsage, "--listen must be HOST:PORT"};
    auto host = listen.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw ExitError{kExitUsage, "--listen must be HOST:PORT"};
    }

    // Signals are consumed by a dedicated thread so shutdown runs outside a handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto store = open_store(store_dir);
    pk::MaintenanceService service(*store, policy);
    pk::api::Api api(service);
    pk::api::HttpServer server(api);

    // port 0 picks a free port; the chosen address is reported on stderr
    port = server.bind(host, port);
    if (port <= 0) throw ExitError{kExitUsage, "cannot listen on " + listen};
    std::fprintf(stderr, "platekeeper: listening on %s:%d\n", host.c_str(), port);

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.listen_after_bind();
    pthread_kill(waiter.native_handle(), SIGTERM);  // release the waiter if listen ended on its own
    waiter.join();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"platekeeper - cathode plate maintenance management"};
    app.require_subcommand(1);

    std::string store_dir;
    auto add_store = [&](CLI::App* cmd) {
        cmd->add_option("--store", store_dir, "store directory")->envname("PLATEKEEPER_STORE");
    };

    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    add_store(serve);
    std::string listen = "127.0.0.1:8080";
    std::string policy_file;
    serve->add_option("--listen", listen, "HOST:PORT");
    serve->add_option("--policy", policy_file, "policy config JSON")->required();

    auto* seed = app.add_subcommand("seed", "populate an empty store");
    add_store(seed);
    pk::workload::SeedSpec seed_spec;
    std::string seed_date = "2024-01-01";
    seed->add_option("--plates", seed_spec.plate_count, "number of plates")->check(CLI::PositiveNumber);
    seed->add_option("--companies", seed_spec.companies, "number of maintenance companies");
    seed->add_option("--rng-seed", seed_spec.rng_seed, "64-bit RNG seed");
    seed->add_option("--date", seed_date, "registration date YYYY-MM-DD");

    auto* sim = app.add_subcommand("simulate-day", "submit a day of capture events");
    add_store(sim);
    pk::workload::SimulationSpec sim_spec;
    std::string sim_date = "2024-01-02";
    std::string sim_plate;
    std::string sim_policy;
    auto* count_opt = sim->add_option("--count", sim_spec.count, "number of submissions");
    auto* sample_flag = sim->add_flag("--sample", sim_spec.sample, "draw the count from 200-250");
    count_opt->excludes(sample_flag);
    sim->add_option("--date", sim_date, "maintenance date YYYY-MM-DD");
    sim->add_option("--rng-seed", sim_spec.rng_seed, "64-bit RNG seed");
    sim->add_option("--plate", sim_plate, "send every submission to this plate");
    sim->add_option("--policy", sim_policy, "policy config JSON (default: same date + critical point 1000000)");

    auto* report = app.add_subcommand("report", "print a cost report");
    report->require_subcommand(1);
    bool as_json = false;
    auto* top = report->add_subcommand("top-cost", "plates with the highest maintenance cost");
    std::int64_t limit = 10;
    top->add_option("--limit", limit, "maximum rows")->check(CLI::NonNegativeNumber);
    auto* period = report->add_subcommand("period", "compare maintenance cost between two periods");
    std::string a_start, a_end, b_start, b_end;
    period->add_option("--a-start", a_start)->required();
    period->add_option("--a-end", a_end)->required();
    period->add_option("--b-start", b_start)->required();
    period->add_option("--b-end", b_end)->required();
    auto* repl = report->add_subcommand("replacement", "plates at or past the critical point");
    std::int64_t critical_point = 0;
    repl->add_option("--critical-point", critical_point)->required()->check(CLI::NonNegativeNumber);
    for (auto* cmd : {top, period, repl}) {
        add_store(cmd);
        cmd->add_flag("--json", as_json, "emit the API JSON body");
    }

    auto* check = app.add_subcommand("policy-check", "evaluate a policy against scenarios");
    std::string check_policy, scenarios_file;
    check->add_option("--policy", check_policy)->required();
    check->add_option("--scenarios", scenarios_file)->required();

    auto* compact = app.add_subcommand("compact", "rewrite the journal with one event per live record");
    add_store(compact);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (serve->parsed()) return run_serve(store_dir, listen, policy_file);

        if (seed->parsed()) {
            if (store_dir.empty()) throw ExitError{kExitUsage, "--store (or PLATEKEEPER_STORE) is required"};
            seed_spec.date = parse_date(seed_date, "--date");
            std::cout << pk::workload::seed_store(store_dir, seed_spec).to_text();
            return kExitOk;
        }

        if (sim->parsed()) {
            sim_spec.date = parse_date(sim_date, "--date");
            if (!sim_plate.empty()) sim_spec.plate = sim_plate;
            if (store_dir.empty() || !pk::workload::store_has_data(store_dir)) {
                throw ExitError{kExitUsage, "store missing or empty: '" + store_dir + "'"};
            }
            auto policy = sim_policy.empty()
                              ? pk::policy::default_policy(pk::Money{pk::workload::kFallbackCriticalPoint})
                              : load_policy(sim_policy);
            pk::StoreOptions options;
            options.clock = pk::workload::shift_clock(sim_spec.date);
            auto store = open_store(store_dir, options);
            pk::MaintenanceService service(*store, policy, options.clock);
            pk::api::Api api(service, options.clock);
            std::cout << pk::workload::simulate_day(api, service, sim_spec).to_text();
            return kExitOk;
        }

        if (report->parsed()) {
            if (store_dir.empty() || !std::filesystem::exists(store_dir)) {
                throw ExitError{kExitUsage, "store missing: '" + store_dir + "'"};
            }
            auto store = open_store(store_dir);
            pk::MaintenanceService service(*store, pk::policy::default_policy(pk::Money{0}));
            if (top->parsed()) {
                auto rows = service.report_top_cost(static_cast<std::size_t>(limit));
                if (as_json) {
                    std::cout << pk::report_json::top_cost(rows).dump() << "\n";
                } else {
                    print_top_cost(rows);
                }
            } else if (period->parsed()) {
                pk::PeriodComparison result;
                try {
                    result = service.report_period_comparison(parse_date(a_start, "--a-start"),
                                                              parse_date(a_end, "--a-end"),
                                                              parse_date(b_start, "--b-start"),
                                                              parse_date(b_end, "--b-end"));
                } catch (const pk::Error& e) {
                    throw ExitError{kExitUsage, describe(e)};
                }
                if (as_json) {
                    std::cout << pk::report_json::period_comparison(result).dump() << "\n";
                } else {
                    print_period(result);
                }
            } else {
                auto ids = service.recommend_replacement(pk::Money{critical_point});
                if (as_json) {
                    std::cout << pk::report_json::replacement(ids).dump() << "\n";
                } else {
                    for (const auto& id : ids) std::cout << id.str() << "\n";
                }
            }
            return kExitOk;
        }

        if (check->parsed()) {
            auto policy = load_policy(check_policy);
            std::vector<pk::policy::Scenario> scenarios;
            try {
                scenarios = pk::policy::parse_scenarios(std::string_view(read_text(scenarios_file, kExitUsage, "scenarios")));
            } catch (const pk::Error& e) {
                throw ExitError{kExitUsage, std::string("scenario error: ") + describe(e)};
            }
            for (const auto& r : pk::policy::run_scenarios(*policy, scenarios)) {
                std::printf("%-40s %s\n", r.name.c_str(), pk::policy::verdict_label(r.verdict).c_str());
            }
            return kExitOk;
        }

        if (compact->parsed()) {
            if (store_dir.empty()) throw ExitError{kExitUsage, "--store (or PLATEKEEPER_STORE) is required"};
            std::cout << "events: " << pk::compact_store(store_dir) << "\n";
            return kExitOk;
        }
    } catch (const ExitError& e) {
        std::cerr << "platekeeper: " << e.message << "\n";
        return e.code;
    } catch (const pk::CorruptJournalError& e) {
        std::cerr << "platekeeper: " << e.what() << "\n";
        return kExitCorrupt;
    } catch (const pk::Error& e) {
        std::cerr << "platekeeper: " << describe(e) << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
