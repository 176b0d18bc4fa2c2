#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "logconn/job.hpp"

namespace fs = std::filesystem;
using namespace logconn;

namespace {

int run_sweep(const std::string& task, const fs::path& dir, const JobOptions& opts)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<JobOutcome> outcomes(files.size());
    std::atomic<size_t> next{0};
    unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(files.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t k; (k = next++) < files.size();)
                outcomes[k] = run_job_file(task, files[k].string(), opts);
        });
    for (auto& t : pool)
        t.join();

    int code = 0;
    ordered_json jobs = ordered_json::array();
    for (size_t k = 0; k < files.size(); ++k) {
        code = std::max(code, outcomes[k].exit_code);
        jobs.push_back({{"file", files[k].filename().string()}, {"exit", outcomes[k].exit_code}, {"report", outcomes[k].report}});
        if (outcomes[k].exit_code == 2)
            std::cerr << files[k].string() << ": " << outcomes[k].report["error"]["message"].get<std::string>() << '\n';
    }
    std::cout << ordered_json{{"task", task}, {"jobs", jobs}}.dump(2) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact computations with logarithmic connections on the projective line and its cyclic covers"};
    std::string task, job_path, sweep_dir;
    unsigned field_order = 0;
    bool no_timestamp = false;
    app.add_option("task", task, "Task name")->required()->check(CLI::IsMember(task_names()));
    app.add_option("--job", job_path, "Job file (JSON)");
    app.add_option("--field-order", field_order, "Override the field order N of Q(zeta_N)")->check(CLI::PositiveNumber);
    app.add_flag("--no-timestamp", no_timestamp, "Omit the timestamp from reports");
    app.add_option("--sweep", sweep_dir, "Run every *.json job in a directory")->check(CLI::ExistingDirectory);
    try {
        app.parse(argc, argv);
        if (job_path.empty() == sweep_dir.empty())
            throw CLI::ValidationError("exactly one of --job and --sweep is required");
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    JobOptions opts;
    if (field_order)
        opts.field_order = field_order;
    opts.timestamp = !no_timestamp;

    if (!sweep_dir.empty())
        return run_sweep(task, sweep_dir, opts);

    JobOutcome out = run_job_file(task, job_path, opts);
    std::cout << out.report.dump(2) << '\n';
    if (out.exit_code == 2)
        std::cerr << "logconn: " << out.report["error"]["message"].get<std::string>() << '\n';
    return out.exit_code;
}
