// Scratch driver for tuning benchmark defaults. Not part of the shipped CLI.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "emca/benchmark.hpp"

using namespace emca;

int main(int argc, char** argv) {
    int task = 1;
    std::vector<int> rules;
    bool esn = false;
    double esn_rho = 0.9;
    double esn_leak = 0.0;
    int seeds = 5;
    int threads = 0;
    int steps = 2;
    int copies = 4;
    int copy_width = 225;
    std::string proj = "one_to_one";
    int k = 1;
    bool show_curve = false;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&]() { return std::string(argv[++i]); };
        if (a == "--task") task = std::stoi(next());
        else if (a == "--rule") rules.push_back(std::stoi(next()));
        else if (a == "--esn") esn = true;
        else if (a == "--esn-rho") esn_rho = std::stod(next());
        else if (a == "--esn-leak") esn_leak = std::stod(next());
        else if (a == "--seeds") seeds = std::stoi(next());
        else if (a == "--threads") threads = std::stoi(next());
        else if (a == "--steps") steps = std::stoi(next());
        else if (a == "--copies") copies = std::stoi(next());
        else if (a == "--copy-width") copy_width = std::stoi(next());
        else if (a == "--proj") proj = next();
        else if (a == "--k") k = std::stoi(next());
        else if (a == "--curve") show_curve = true;
        else { std::fprintf(stderr, "unknown arg %s\n", a.c_str()); return 1; }
    }

    BenchmarkConfig cfg;
    TaskId id = task_from_index(task);
    std::vector<ModelConfig> models;
    if (esn) models.push_back(esn_model(1800, esn_rho, esn_leak));
    ProjectionKind pk = proj == "one_to_many"  ? ProjectionKind::one_to_many
                      : proj == "one_to_pattern" ? ProjectionKind::one_to_pattern
                                                 : ProjectionKind::one_to_one;
    for (int r : rules) models.push_back(reca_model(r, steps, copies, copy_width, pk, k));

    std::vector<uint64_t> seed_list;
    for (int s = 1; s <= seeds; ++s) seed_list.push_back(static_cast<uint64_t>(s));

    for (const auto& m : models) {
        auto runs = run_seeds(id, m, cfg, seed_list, threads);
        Aggregate agg = aggregate(runs);
        double secs = 0.0;
        for (const auto& r : runs) secs += r.wall_seconds;
        std::printf("%-40s task %2d  final %.4f +- %.4f  wade %.4f +- %.4f  (%.1fs total)\n",
                    m.label.c_str(), task, agg.mean_final, agg.std_final, agg.mean_wade,
                    agg.std_wade, secs);
        std::printf("  per-seed final:");
        for (const auto& r : runs) std::printf(" %.4f", r.final_accuracy);
        std::printf("\n");
        if (show_curve) {
            std::printf("  curve (seed %llu):",
                        static_cast<unsigned long long>(runs[0].seed));
            for (size_t i = 0; i < runs[0].curve.accuracy.size(); ++i)
                std::printf(" %ld:%.3f", runs[0].curve.steps[i], runs[0].curve.accuracy[i]);
            std::printf("\n");
        }
    }
    return 0;
}
