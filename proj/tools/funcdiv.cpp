#include <funcdiv/scenario.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"identity and inequality checks for log-concave divergences"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    double quad_tol = 0.0;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "run the checks described by a scenario config");
    run->add_option("config", config, "scenario config file (json)")->required();
    run->add_option("--quad-tol", quad_tol, "override the quadrature relative tolerance");
    run->add_option("--out", out, "write the ndjson report to this file instead of stdout");
    run->add_option("--jobs", jobs, "number of worker threads")->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list-checks", "list every known check id");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& info : funcdiv::check_registry())
            std::printf("%s — %s\n", info.id.c_str(), info.description.c_str());
        return 0;
    }

    funcdiv::ScenarioOverrides ov;
    if (run->count("--quad-tol") > 0) ov.quad_tol = quad_tol;
    if (run->count("--out") > 0) ov.out = out;

    funcdiv::Scenario sc;
    try {
        sc = funcdiv::load_scenario(config, ov);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    std::ofstream file;
    std::ostream* report = &std::cout;
    if (!sc.out.empty()) {
        file.open(sc.out);
        if (!file) {
            std::cerr << "config error: cannot write report to \"" << sc.out << "\"\n";
            return 1;
        }
        report = &file;
    }

    const std::size_t total = sc.tasks.size();
    const auto t0 = std::chrono::steady_clock::now();
    auto progress = [total](std::size_t i, const funcdiv::CheckReport& r) {
        std::fprintf(stderr, "[%3zu/%zu] %s %s — %s\n", i + 1, total,
                     r.pass ? "pass" : "FAIL", r.check_id.c_str(), r.subject.c_str());
    };
    const auto reports = funcdiv::run_scenario(sc, jobs, progress);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const auto& r : reports) *report << funcdiv::report_record(r).dump() << "\n";
    const auto summary = funcdiv::report_summary(reports, elapsed, sc.seed);
    *report << summary.dump() << "\n";
    report->flush();

    std::size_t failed = summary.at("failed").get<std::size_t>();
    std::fprintf(stderr, "%zu checks, %zu failed, %.1fs\n", total, failed, elapsed);
    return failed == 0 ? 0 : 2;
}
