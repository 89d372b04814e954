#include "emca/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <stdexcept>

#include "emca/coarsegrain.hpp"
#include "emca/parallel.hpp"
#include "emca/rng.hpp"
#include "emca/sampler.hpp"

namespace emca {

using nlohmann::json;

// ---- rule-space search ----

SearchConfig eca_search_config() {
    SearchConfig cfg;
    cfg.mode = SearchConfig::Mode::eca;
    cfg.count = 256;
    cfg.width = 512;
    cfg.steps = 512;
    return cfg;
}

std::vector<SearchHit> run_search(const SearchConfig& cfg, int threads) {
    if (cfg.count < 1) throw std::invalid_argument("search needs at least one rule");
    if (cfg.tau < 1) throw std::invalid_argument("tau must be positive");
    if (cfg.steps <= cfg.tau)
        throw std::invalid_argument("simulation must be longer than the metric delay tau");
    CaSpec grid_spec;
    grid_spec.dims = cfg.dims;
    grid_spec.num_states = cfg.num_states;
    grid_spec.radius = cfg.radius;
    grid_spec.rows = cfg.dims == 2 ? cfg.height : 1;
    grid_spec.cols = cfg.width;
    validate(grid_spec);

    bool eca = cfg.mode == SearchConfig::Mode::eca;
    std::vector<RuleTable> rules;
    if (eca) {
        if (cfg.dims != 1 || cfg.num_states != 2 || cfg.radius != 1)
            throw std::invalid_argument("ECA mode is 1D binary radius 1");
        rules.reserve(256);
        for (int n = 0; n < 256; ++n) rules.push_back(eca_rule(static_cast<uint8_t>(n)));
    } else {
        uint64_t sampler_seed = Rng::stream(cfg.seed, 1).next_u64();
        rules = cfg.mode == SearchConfig::Mode::uniform
                    ? sample_uniform(grid_spec, static_cast<size_t>(cfg.count), sampler_seed)
                    : sample_dirichlet(grid_spec, cfg.alpha, static_cast<size_t>(cfg.count),
                                       sampler_seed);
    }

    const int t_frame = cfg.steps - cfg.tau;
    std::vector<SearchHit> hits(rules.size());
    parallel_for(
        rules.size(),
        [&](size_t i) {
            const RuleTable& rule = rules[i];
            // tags 10+2i / 11+2i keep the per-rule streams disjoint from each
            // other and from the sampler stream (tag 1)
            Grid init = eca ? center_seed_grid(grid_spec)
                            : random_grid(grid_spec, Rng::stream(cfg.seed, 10 + 2 * i).next_u64());
            SpaceTime st = simulate(rule, init, cfg.steps);
            ComplexityScore s;
            s.rule_id = eca ? rule_number(rule) : static_cast<uint64_t>(i);
            s.lambda = langton_lambda(rule);
            s.compressed_len = compressed_length(st.frames.back());
            s.joint_mu = joint_score(st.frames[static_cast<size_t>(t_frame)], st.frames.back());
            s.tau = cfg.tau;
            s.t_frame = t_frame;
            if (cfg.with_nn) {
                MuTauConfig nn = cfg.nn;
                nn.seed = Rng::stream(cfg.seed, 11 + 2 * i).next_u64();
                s.nn_mu = nn_mu_tau(st, t_frame, cfg.tau, cfg.metric_radius, nn).value;
            }
            hits[i].rule = rule;
            hits[i].score = s;
        },
        threads <= 0 ? 0 : static_cast<unsigned>(threads));

    std::stable_sort(hits.begin(), hits.end(), [&](const SearchHit& a, const SearchHit& b) {
        if (cfg.with_nn) {
            if (a.score.nn_mu != b.score.nn_mu) return a.score.nn_mu > b.score.nn_mu;
        } else {
            if (a.score.compressed_len != b.score.compressed_len)
                return a.score.compressed_len > b.score.compressed_len;
        }
        return a.score.rule_id < b.score.rule_id;
    });
    return hits;
}

// ---- rendering ----

std::string method_name(RenderRequest::Method m) {
    switch (m) {
        case RenderRequest::Method::raw: return "raw";
        case RenderRequest::Method::hist: return "hist";
        case RenderRequest::Method::dither: return "dither";
        case RenderRequest::Method::kmeans: return "kmeans";
        case RenderRequest::Method::autoenc: return "ae";
        case RenderRequest::Method::filter: return "filter";
        case RenderRequest::Method::pyramid: return "pyramid";
    }
    return "?";
}

RenderRequest::Method method_from(const std::string& name) {
    if (name == "raw") return RenderRequest::Method::raw;
    if (name == "hist") return RenderRequest::Method::hist;
    if (name == "dither") return RenderRequest::Method::dither;
    if (name == "kmeans") return RenderRequest::Method::kmeans;
    if (name == "ae" || name == "autoencoder") return RenderRequest::Method::autoenc;
    if (name == "filter") return RenderRequest::Method::filter;
    if (name == "pyramid") return RenderRequest::Method::pyramid;
    throw std::invalid_argument("unknown render method '" + name + "'");
}

namespace {

std::vector<std::filesystem::path> write_images(const Grid& g, const RenderRequest& req,
                                                const std::string& name) {
    std::vector<std::filesystem::path> written;
    if (!req.png && !req.pgm) throw std::invalid_argument("no output format selected");
    if (req.png) {
        std::filesystem::path p = req.out_dir / (name + ".png");
        write_png(p, g);
        written.push_back(p);
    }
    if (req.pgm) {
        std::filesystem::path p = req.out_dir / (name + ".pgm");
        write_pgm(p, g);
        written.push_back(p);
    }
    return written;
}

void append(std::vector<std::filesystem::path>& all, std::vector<std::filesystem::path> more) {
    for (auto& p : more) all.push_back(std::move(p));
}

std::string hist_tag(const RenderRequest& req, bool dither) {
    return std::string(dither ? "dither" : "hist") + "_b" + std::to_string(req.b) + "_k" +
           std::to_string(req.k_out);
}

std::filesystem::path write_hist_sidecar(const Grid& g, const RenderRequest& req, bool dither,
                                         const std::string& name) {
    BlockHistogram h = block_histogram(g, req.b);
    SupercellMap map = partition_histogram(h, req.k_out);
    json j;
    j["method"] = dither ? "dither" : "hist";
    j["b"] = req.b;
    j["k_out"] = req.k_out;
    j["distinct_blocks"] = h.counts.size();
    j["total_blocks"] = h.total;
    j["thresholds"] = map.thresholds;
    std::filesystem::path p = req.out_dir / (name + ".json");
    write_text_file(p, j.dump(2) + "\n");
    return p;
}

}  // namespace

std::vector<std::filesystem::path> render_grid(const Grid& g, const RenderRequest& req) {
    std::filesystem::create_directories(req.out_dir);
    std::vector<std::filesystem::path> written = write_images(g, req, req.stem + "_raw");
    switch (req.method) {
        case RenderRequest::Method::raw:
            break;
        case RenderRequest::Method::hist:
        case RenderRequest::Method::dither: {
            bool dither = req.method == RenderRequest::Method::dither;
            std::string name = req.stem + "_" + hist_tag(req, dither);
            Grid coarse = coarse_grain_histogram(g, req.b, req.k_out, dither);
            append(written, write_images(coarse, req, name));
            written.push_back(write_hist_sidecar(g, req, dither, name));
            break;
        }
        case RenderRequest::Method::kmeans: {
            std::string name = req.stem + "_kmeans_b" + std::to_string(req.b) + "_k" +
                               std::to_string(req.k_out) + "_s" + std::to_string(req.seed);
            Grid coarse = coarse_grain_kmeans(g, req.b, req.k_out, req.seed);
            append(written, write_images(coarse, req, name));
            break;
        }
        case RenderRequest::Method::autoenc: {
            std::string name =
                req.stem + "_ae_b" + std::to_string(req.b) + "_l" + std::to_string(req.latent);
            AutoencoderConfig cfg;
            cfg.seed = req.seed;
            AutoencoderGrain grain = coarse_grain_autoencoder(g, req.b, req.latent, cfg);
            append(written, write_images(grain.grid, req, name));
            break;
        }
        case RenderRequest::Method::pyramid: {
            if (req.depth < 1) throw std::invalid_argument("pyramid depth must be positive");
            Grid level = g;
            for (int d = 1; d <= req.depth; ++d) {
                level = coarse_grain_histogram(level, req.b, req.k_out, false);
                std::string name = req.stem + "_pyramid_b" + std::to_string(req.b) + "_k" +
                                   std::to_string(req.k_out) + "_l" + std::to_string(d);
                append(written, write_images(level, req, name));
            }
            break;
        }
        case RenderRequest::Method::filter:
            throw std::invalid_argument("filtering renders a space-time diagram, not a grid");
    }
    return written;
}

std::vector<std::filesystem::path> render_filter(const SpaceTime& st, const RenderRequest& req) {
    std::filesystem::create_directories(req.out_dir);
    std::vector<std::filesystem::path> written =
        write_images(diagram_grid(st), req, req.stem + "_raw");
    SpaceTime filtered = filter_eca(st, req.filter_boundaries);
    std::string name = req.stem + (req.filter_boundaries ? "_filter_boundaries" : "_filter");
    append(written, write_images(diagram_grid(filtered), req, name));
    return written;
}

// ---- benchmark plans ----

namespace {

void check_keys(const ManifestTable& t, std::initializer_list<const char*> allowed,
                const char* what) {
    for (const auto& [key, value] : t.values) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok)
            throw ParseError("manifest: line " + std::to_string(value.line) + ": unknown " +
                             what + " key '" + key + "'");
    }
}

ProjectionKind projection_from(const std::string& name) {
    std::string n = name;
    std::replace(n.begin(), n.end(), '-', '_');
    if (n == "one_to_one") return ProjectionKind::one_to_one;
    if (n == "one_to_many") return ProjectionKind::one_to_many;
    if (n == "one_to_pattern") return ProjectionKind::one_to_pattern;
    throw std::invalid_argument("unknown projection '" + name + "'");
}

}  // namespace

BenchmarkPlan plan_from_manifest(const Manifest& m) {
    check_keys(m.root,
               {"format", "output_dir", "master_seed", "seeds", "eval_every", "train_sequences",
                "test_sequences", "tasks", "threads"},
               "plan");
    std::string format = m.root.get_string("format", "emca-benchmark-v1");
    if (format != "emca-benchmark-v1")
        throw ParseError("manifest: unsupported plan format tag '" + format + "'");
    for (const auto& [name, tables] : m.table_arrays)
        if (name != "model")
            throw ParseError("manifest: unknown table array [[" + name + "]]");
    if (!m.tables.empty())
        throw ParseError("manifest: unknown table [" + m.tables.begin()->first + "]");

    BenchmarkPlan plan;
    plan.output_dir = m.root.get_string("output_dir", "");
    plan.seed_base = static_cast<uint64_t>(m.root.get_int("master_seed", 0));
    plan.seeds = static_cast<int>(m.root.get_int("seeds", 20));
    plan.eval_every = static_cast<int>(m.root.get_int("eval_every", 20));
    plan.train_sequences = static_cast<int>(m.root.get_int("train_sequences", 960));
    plan.test_sequences = static_cast<int>(m.root.get_int("test_sequences", 240));
    plan.threads = static_cast<int>(m.root.get_int("threads", 0));
    if (plan.seeds < 1) throw ParseError("manifest: seeds must be at least 1");
    if (plan.eval_every < 1) throw ParseError("manifest: eval_every must be at least 1");
    if (plan.train_sequences < 1 || plan.test_sequences < 1)
        throw ParseError("manifest: train_sequences and test_sequences must be positive");

    plan.tasks.clear();
    if (m.root.has("tasks")) {
        for (const ManifestValue& v : m.root.at("tasks").as_array()) {
            int id = static_cast<int>(v.as_int());
            task_from_index(id);  // validates the range
            plan.tasks.push_back(id);
        }
    } else {
        plan.tasks.push_back(1);
    }
    if (plan.tasks.empty()) throw ParseError("manifest: tasks must name at least one task");

    auto it = m.table_arrays.find("model");
    if (it == m.table_arrays.end() || it->second.empty())
        throw ParseError("manifest: at least one [[model]] table is required");
    for (const ManifestTable& t : it->second) {
        PlanModel pm;
        pm.kind = t.get_string("kind", "reca");
        if (pm.kind == "reca") {
            check_keys(t, {"kind", "rule", "steps_per_token", "copies", "copy_width",
                           "projection", "k"},
                       "reca model");
            pm.rule = static_cast<int>(t.get_int("rule", 110));
            if (pm.rule < 0 || pm.rule > 255)
                throw ParseError("manifest: line " + std::to_string(t.line) +
                                 ": rule must be an elementary rule number 0..255");
            pm.tuned = !t.has("steps_per_token") && !t.has("copies") && !t.has("copy_width") &&
                       !t.has("projection") && !t.has("k");
            pm.steps_per_token = static_cast<int>(t.get_int("steps_per_token", 2));
            pm.copies = static_cast<int>(t.get_int("copies", 4));
            pm.copy_width = static_cast<int>(t.get_int("copy_width", 225));
            pm.projection = t.get_string("projection", "one_to_one");
            pm.k = static_cast<int>(t.get_int("k", 1));
            projection_from(pm.projection);  // validates the name
        } else if (pm.kind == "esn") {
            check_keys(t, {"kind", "size", "spectral_radius", "leak"}, "esn model");
            pm.esn_size = static_cast<int>(t.get_int("size", 1800));
            pm.esn_rho = t.get_double("spectral_radius", 1.6);
            pm.esn_leak = t.get_double("leak", 0.0);
            if (pm.esn_size < 1)
                throw ParseError("manifest: line " + std::to_string(t.line) +
                                 ": reservoir size must be positive");
        } else if (pm.kind == "external") {
            check_keys(t, {"kind", "curve"}, "external model");
            pm.curve_path = t.at("curve").as_string();
        } else {
            throw ParseError("manifest: line " + std::to_string(t.line) + ": unknown model kind '" +
                             pm.kind + "'");
        }
        plan.models.push_back(std::move(pm));
    }
    return plan;
}

BenchmarkPlan load_plan(const std::filesystem::path& path) {
    return plan_from_manifest(load_manifest(path));
}

ModelConfig model_config(const PlanModel& pm, TaskId task) {
    if (pm.kind == "reca") {
        uint8_t rule = static_cast<uint8_t>(pm.rule);
        if (pm.tuned) return tuned_reca(task, rule);
        return reca_model(rule, pm.steps_per_token, pm.copies, pm.copy_width,
                          projection_from(pm.projection), pm.k);
    }
    if (pm.kind == "esn") return esn_model(pm.esn_size, pm.esn_rho, pm.esn_leak);
    throw std::invalid_argument("model kind '" + pm.kind + "' does not run a reservoir");
}

namespace {

ExperimentRecord record_from_run(const RunResult& run, const BenchmarkPlan& plan) {
    ExperimentRecord rec;
    rec.task_id = static_cast<int>(run.task);
    rec.model = run.model;
    rec.seed = run.seed;
    rec.eval_every = plan.eval_every;
    rec.checkpoints = default_checkpoints();
    rec.curve = run.curve;
    rec.wade_score = run.wade_score;
    rec.final_accuracy = run.final_accuracy;
    rec.wall_seconds = run.wall_seconds;
    return rec;
}

}  // namespace

PlanOutcome run_plan(const BenchmarkPlan& plan) {
    if (plan.models.empty()) throw std::invalid_argument("plan has no models");
    if (plan.seeds < 1) throw std::invalid_argument("plan needs at least one seed");

    BenchmarkConfig cfg;
    cfg.train_sequences = plan.train_sequences;
    cfg.test_sequences = plan.test_sequences;
    cfg.eval_every = plan.eval_every;

    struct Job {
        TaskId task;
        size_t model_index;
        uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int task_id : plan.tasks) {
        TaskId task = task_from_index(task_id);
        for (size_t mi = 0; mi < plan.models.size(); ++mi) {
            if (plan.models[mi].kind == "external") continue;
            model_config(plan.models[mi], task);  // reject bad configs before any run
            for (int s = 1; s <= plan.seeds; ++s)
                jobs.push_back(Job{task, mi, plan.seed_base + static_cast<uint64_t>(s)});
        }
    }

    PlanOutcome outcome;
    outcome.records.resize(jobs.size());
    parallel_for(
        jobs.size(),
        [&](size_t i) {
            const Job& job = jobs[i];
            const PlanModel& pm = plan.models[job.model_index];
            ModelConfig model = model_config(pm, job.task);
            try {
                RunResult run = run_benchmark(job.task, model, cfg, job.seed);
                outcome.records[i] = record_from_run(run, plan);
            } catch (const std::exception& e) {
                ExperimentRecord rec;
                rec.task_id = static_cast<int>(job.task);
                rec.model = model.label;
                rec.seed = job.seed;
                rec.eval_every = plan.eval_every;
                rec.checkpoints = default_checkpoints();
                rec.status = "failed";
                rec.error = e.what();
                outcome.records[i] = std::move(rec);
            }
        },
        plan.threads <= 0 ? 0 : static_cast<unsigned>(plan.threads));

    for (const PlanModel& pm : plan.models) {
        if (pm.kind != "external") continue;
        try {
            outcome.records.push_back(
                score_external_curve(pm.curve_path, default_checkpoints()));
        } catch (const std::exception& e) {
            ExperimentRecord rec;
            rec.model = "external:" + std::filesystem::path(pm.curve_path).filename().string();
            rec.checkpoints = default_checkpoints();
            rec.status = "failed";
            rec.error = e.what();
            outcome.records.push_back(std::move(rec));
        }
    }

    // aggregate ok-runs per (task, model), keeping the plan's order
    for (int task_id : plan.tasks) {
        for (size_t mi = 0; mi < plan.models.size(); ++mi) {
            if (plan.models[mi].kind == "external") continue;
            std::string label = model_config(plan.models[mi], task_from_index(task_id)).label;
            AggregateRow row;
            row.task_id = task_id;
            row.model = label;
            std::vector<const ExperimentRecord*> ok;
            for (const ExperimentRecord& rec : outcome.records) {
                if (rec.task_id != task_id || rec.model != label) continue;
                ++row.runs;
                if (rec.status == "ok") ok.push_back(&rec);
                else ++row.failed;
            }
            if (!ok.empty()) {
                for (const ExperimentRecord* r : ok) {
                    row.agg.mean_wade += r->wade_score;
                    row.agg.mean_final += r->final_accuracy;
                }
                row.agg.mean_wade /= static_cast<double>(ok.size());
                row.agg.mean_final /= static_cast<double>(ok.size());
                if (ok.size() > 1) {
                    double sw = 0.0, sf = 0.0;
                    for (const ExperimentRecord* r : ok) {
                        sw += (r->wade_score - row.agg.mean_wade) *
                              (r->wade_score - row.agg.mean_wade);
                        sf += (r->final_accuracy - row.agg.mean_final) *
                              (r->final_accuracy - row.agg.mean_final);
                    }
                    row.agg.std_wade = std::sqrt(sw / static_cast<double>(ok.size() - 1));
                    row.agg.std_final = std::sqrt(sf / static_cast<double>(ok.size() - 1));
                }
            }
            outcome.aggregates.push_back(std::move(row));
        }
    }

    for (const ExperimentRecord& rec : outcome.records)
        if (rec.status != "ok") outcome.all_ok = false;
    return outcome;
}

namespace {

std::string fmt_double_csv(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::vector<std::filesystem::path> write_outcome(const std::filesystem::path& dir,
                                                 const PlanOutcome& outcome) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    written.push_back(dir / "records.json");
    save_records(written.back(), outcome.records);
    written.push_back(dir / "summary.csv");
    write_summary_csv(written.back(), outcome.records);

    std::string agg = "task_id,model,runs,failed,mean_wade,std_wade,mean_final,std_final\n";
    for (const AggregateRow& row : outcome.aggregates)
        agg += std::to_string(row.task_id) + "," + row.model + "," + std::to_string(row.runs) +
               "," + std::to_string(row.failed) + "," + fmt_double_csv(row.agg.mean_wade) + "," +
               fmt_double_csv(row.agg.std_wade) + "," + fmt_double_csv(row.agg.mean_final) + "," +
               fmt_double_csv(row.agg.std_final) + "\n";
    written.push_back(dir / "aggregates.csv");
    write_text_file(written.back(), agg);
    return written;
}

bool same_results(const std::vector<ExperimentRecord>& a, const std::vector<ExperimentRecord>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const ExperimentRecord& x = a[i];
        const ExperimentRecord& y = b[i];
        if (x.format != y.format || x.task_id != y.task_id || x.model != y.model ||
            x.seed != y.seed || x.eval_every != y.eval_every || x.checkpoints != y.checkpoints ||
            x.curve.steps != y.curve.steps || x.curve.accuracy != y.curve.accuracy ||
            x.wade_score != y.wade_score || x.final_accuracy != y.final_accuracy ||
            x.status != y.status || x.error != y.error)
            return false;
    }
    return true;
}

ExperimentRecord score_external_curve(const std::filesystem::path& csv_path,
                                      const std::vector<double>& checkpoints, int task_id) {
    AccuracyCurve curve = read_curve_csv(csv_path);
    ExperimentRecord rec;
    rec.task_id = task_id;
    rec.model = "external:" + csv_path.filename().string();
    rec.eval_every = 0;  // cadence is whatever the external curve used
    rec.checkpoints = checkpoints;
    rec.curve = std::move(curve);
    rec.wade_score = wade(rec.curve.accuracy, checkpoints);
    rec.final_accuracy = rec.curve.accuracy.back();
    return rec;
}

std::filesystem::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("EMCA_OUT_DIR"); env && *env) return env;
    return ".";
}

}  // namespace emca
