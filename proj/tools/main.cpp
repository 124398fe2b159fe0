#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mechsynth/http_clients.hpp"
#include "mechsynth/mock_clients.hpp"
#include "mechsynth/pipeline.hpp"
#include "mechsynth/trace.hpp"
#include "mechsynth/trace_compat.hpp"

namespace fs = std::filesystem;
using namespace mechsynth;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

std::string csv_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string csv_cell(const std::optional<double>& v) { return v ? csv_cell(*v) : ""; }

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

struct QueryJob {
    std::string id;
    std::string text;
};

std::vector<QueryJob> load_query_fixture(const std::string& path) {
    const auto j = load_json_file(path);
    std::vector<QueryJob> out;
    for (const auto& q : j)
        out.push_back({q.at("id").get<std::string>(), q.at("text").get<std::string>()});
    return out;
}

// Recomputes the behavioral report from the stored paths and chains so the
// table never echoes stale numbers.
BehavioralReport recompute_report(const TraceRecord& t) {
    std::vector<std::set<std::string>> concept_sets;
    for (const auto& p : t.paths)
        concept_sets.emplace_back(p.nodes.begin(), p.nodes.end());
    return build_report(t.query_id, t.paths, t.chains, concept_sets,
                        t.report.bridge_attempted);
}

std::string run_summary(const TraceRecord& t) {
    std::ostringstream s;
    s << "query id: " << t.query_id << "\n";
    s << "query: " << t.query_text << "\n";
    s << "strategy: " << (t.strategy_tag.empty() ? "unknown" : t.strategy_tag) << "\n";
    if (t.completed())
        s << "status: completed\n";
    else
        s << "status: aborted at stage '" << t.failure_stage << "'\n";
    const BehavioralReport& r = t.report;
    s << "abstention: " << (r.abstention ? "yes" : "no") << "\n";
    s << "paths: " << r.n_paths << " (symbolic depth " << fmt(r.d_sym) << ")\n";
    s << "grounded chains: " << t.chains.size() << " (grounded depth " << fmt(r.d_ground)
      << ")\n";
    s << "drop rate: " << fmt(r.drop_rate) << "\n";
    s << "failure rate: " << fmt(r.failure_rate) << "\n";
    s << "diversity (mean pairwise jaccard): " << fmt(r.diversity_jaccard) << "\n";
    s << "bridge attempted: " << (r.bridge_attempted ? "yes" : "no") << "\n";
    s << "events: " << t.events.size() << "\n";
    for (const auto& e : t.events) s << "  - " << e.kind << ": " << e.detail << "\n";
    if (!t.hypotheses.empty()) {
        s << "hypotheses:\n";
        for (std::size_t i = 0; i < t.hypotheses.size(); ++i) {
            const auto& h = t.hypotheses[i];
            s << "  " << (i + 1) << ". " << h.statement;
            if (i < t.chains.size())
                s << " (grounded " << t.chains[i].grounded_length << "/"
                  << t.chains[i].nodes.size() << ")";
            s << "\n";
        }
    }
    return s.str();
}

// Options for the run subcommand, plus the CLI11 handles needed to tell
// explicitly set flags from defaults when a config file is in play.
struct RunOptions {
    std::vector<std::string> query_texts;
    std::vector<std::string> query_ids;
    std::string queries_file = "data/queries.json";
    std::string config_file;
    std::string single_id;
    std::string strategy = "full";
    std::size_t k = 5;
    double overlap_threshold = 0.30;
    std::size_t max_papers = 10;
    std::string lens_label;
    double lens_bias = 0.4;
    std::string mode = "mock";
    std::uint64_t seed = 0;
    double temperature = 0.0;
    bool deterministic = true;
    std::string out_dir = "out";
    std::string fixture_dir;
    std::string from_trace;
    std::size_t parallel = 1;
    std::size_t max_hypotheses = 3;
    std::size_t max_turns = 4;
    bool controversy = false;

    CLI::Option* strategy_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* overlap_opt = nullptr;
    CLI::Option* max_papers_opt = nullptr;
    CLI::Option* lens_opt = nullptr;
    CLI::Option* lens_bias_opt = nullptr;
    CLI::Option* mode_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* temperature_opt = nullptr;
    CLI::Option* deterministic_opt = nullptr;
    CLI::Option* max_hypotheses_opt = nullptr;
    CLI::Option* max_turns_opt = nullptr;
    CLI::Option* controversy_opt = nullptr;
};

RunConfig build_run_config(const RunOptions& opt) {
    RunConfig config;
    if (!opt.config_file.empty()) config = RunConfig::from_json(load_json_file(opt.config_file));
    if (opt.strategy_opt->count()) config.strategy.kind = strategy_from_string(opt.strategy);
    if (opt.k_opt->count()) config.strategy.k = opt.k;
    if (opt.overlap_opt->count()) config.strategy.overlap_threshold = opt.overlap_threshold;
    if (opt.seed_opt->count()) config.strategy.seed = opt.seed;
    if (opt.max_papers_opt->count()) config.max_papers = opt.max_papers;
    if (opt.temperature_opt->count()) config.temperature = opt.temperature;
    if (opt.deterministic_opt->count()) config.deterministic = opt.deterministic;
    if (opt.max_hypotheses_opt->count()) config.max_hypotheses = opt.max_hypotheses;
    if (opt.max_turns_opt->count()) config.max_turns = opt.max_turns;
    if (opt.controversy_opt->count()) config.controversy_augment = opt.controversy;
    if (opt.lens_opt->count()) {
        LensSpec lens;
        lens.lens_label = opt.lens_label;
        if (opt.lens_bias_opt->count()) lens.bias_weight = opt.lens_bias;
        config.lens = lens;
    }
    if (opt.mode_opt->count()) config.mode = opt.mode;
    return config;
}

// Owns the network-backed clients for one live run. All credentials come
// from the environment and are checked before any client exists.
struct LiveSuite {
    std::unique_ptr<HttpChatClient> chat;
    std::unique_ptr<ScholarlySearchClient> scholarly;
    std::unique_ptr<WebSearchClient> web;
    std::unique_ptr<FallbackSearchClient> chained;
    SearchClient* retrieval = nullptr;

    ClientSuite view() const {
        ClientSuite s;
        s.refinement = chat.get();
        s.extraction = chat.get();
        s.densification = chat.get();
        s.exploration = chat.get();
        s.synthesis = chat.get();
        s.retrieval = retrieval;
        return s;
    }
};

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

LiveSuite make_live_suite() {
    const std::string api_key = env_or_empty("MECHSYNTH_API_KEY");
    const std::string chat_url = env_or_empty("MECHSYNTH_CHAT_URL");
    const std::string scholarly_url = env_or_empty("MECHSYNTH_SCHOLARLY_URL");
    const std::string web_url = env_or_empty("MECHSYNTH_WEB_URL");
    std::vector<std::string> missing;
    if (api_key.empty()) missing.push_back("MECHSYNTH_API_KEY");
    if (chat_url.empty()) missing.push_back("MECHSYNTH_CHAT_URL");
    if (scholarly_url.empty() && web_url.empty())
        missing.push_back("MECHSYNTH_SCHOLARLY_URL or MECHSYNTH_WEB_URL");
    if (!missing.empty()) {
        std::string msg = "live mode needs credentials; missing:";
        for (const auto& m : missing) msg += " " + m;
        throw std::runtime_error(msg);
    }

    LiveSuite suite;
    suite.chat = std::make_unique<HttpChatClient>(chat_url, api_key);
    if (!scholarly_url.empty())
        suite.scholarly = std::make_unique<ScholarlySearchClient>(scholarly_url);
    if (!web_url.empty()) suite.web = std::make_unique<WebSearchClient>(web_url);
    if (suite.scholarly && suite.web) {
        suite.chained = std::make_unique<FallbackSearchClient>(*suite.scholarly, *suite.web);
        suite.retrieval = suite.chained.get();
    } else if (suite.scholarly) {
        suite.retrieval = suite.scholarly.get();
    } else {
        suite.retrieval = suite.web.get();
    }
    return suite;
}

// Executes one query end to end and writes trace.json, report.json, and
// summary.txt under out_dir/<query_id>. Returns the process exit code.
int run_one(const QueryJob& job, const RunConfig& base_config, const RunOptions& opt,
            std::string& console) {
    RunConfig config = base_config;
    config.query_id = job.id;

    TraceRecord trace;
    try {
        if (config.mode == "mock") {
            if (opt.fixture_dir.empty())
                throw std::runtime_error("mock mode needs --fixture DIR");
            MockSuite mocks = make_mock_suite(opt.fixture_dir);
            trace = run_query(job.text, config, mocks.view());
        } else if (config.mode == "live") {
            LiveSuite live = make_live_suite();
            trace = run_query(job.text, config, live.view());
        } else if (config.mode == "recorded") {
            const TraceRecord source = read_trace(opt.from_trace);
            config = RunConfig::from_json(source.config);
            RecordedTextClient text(source.exchanges);
            RecordedSearchClient search(source.search_calls);
            ClientSuite suite;
            suite.refinement = &text;
            suite.extraction = &text;
            suite.densification = &text;
            suite.exploration = &text;
            suite.synthesis = &text;
            suite.retrieval = &search;
            trace = run_query(job.text, config, suite);
        } else {
            throw std::runtime_error("unknown mode '" + config.mode + "'");
        }
    } catch (const std::exception& e) {
        console = std::string("run ") + job.id + " failed: " + e.what() + "\n";
        return 2;
    }

    const fs::path dir = fs::path(opt.out_dir) / job.id;
    try {
        fs::create_directories(dir);
        write_trace(trace, (dir / "trace.json").string());
        write_text_file(dir / "report.json", trace.report.to_json().dump(2) + "\n");
        write_text_file(dir / "summary.txt", run_summary(trace));
    } catch (const std::exception& e) {
        console = std::string("run ") + job.id + " failed writing outputs: " + e.what() + "\n";
        return 1;
    }

    console = run_summary(trace) + "outputs: " + dir.string() + "\n";
    return trace.completed() ? 0 : 1;
}

int cmd_run(const RunOptions& opt) {
    std::vector<QueryJob> jobs;
    try {
        std::size_t n = 0;
        for (const auto& text : opt.query_texts) {
            ++n;
            std::string id = opt.single_id;
            if (id.empty() || opt.query_texts.size() > 1) id = "q" + std::to_string(n);
            jobs.push_back({id, text});
        }
        if (!opt.query_ids.empty()) {
            const auto fixture = load_query_fixture(opt.queries_file);
            for (const auto& wanted : opt.query_ids) {
                bool found = false;
                for (const auto& q : fixture) {
                    if (q.id == wanted) {
                        jobs.push_back(q);
                        found = true;
                        break;
                    }
                }
                if (!found)
                    throw std::runtime_error("query id '" + wanted + "' not in " +
                                             opt.queries_file);
            }
        }
        if (opt.mode == "recorded" && opt.from_trace.empty())
            throw std::runtime_error("recorded mode needs --from-trace FILE");
        if (opt.mode == "recorded" && jobs.empty()) {
            const TraceRecord source = read_trace(opt.from_trace);
            jobs.push_back({source.query_id, source.query_text});
        }
        if (jobs.empty()) throw std::runtime_error("no query given");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run: %s\n", e.what());
        return 2;
    }

    RunConfig base_config;
    try {
        base_config = build_run_config(opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run: %s\n", e.what());
        return 2;
    }

    std::vector<int> codes(jobs.size(), 0);
    std::vector<std::string> consoles(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            codes[i] = run_one(jobs[i], base_config, opt, consoles[i]);
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(opt.parallel, 1), jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int rc = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (i) std::fprintf(stdout, "\n");
        std::fprintf(codes[i] ? stderr : stdout, "%s", consoles[i].c_str());
        if (codes[i]) rc = codes[i];
    }
    return rc;
}

struct EvalRow {
    std::string file;
    std::string query_id;
    std::string strategy;
    BehavioralReport report;
    std::vector<std::string> unmapped;
};

int cmd_eval(const std::vector<std::string>& files, const std::string& csv_path) {
    std::vector<EvalRow> rows;
    for (const auto& file : files) {
        EvalRow row;
        row.file = file;
        try {
            const TraceRecord t = read_trace(file);
            row.query_id = t.query_id;
            row.strategy = t.strategy_tag.empty() ? "unknown" : t.strategy_tag;
            row.report = recompute_report(t);
        } catch (const std::exception& native_err) {
            try {
                const CompatResult compat = read_external_trace(file);
                row.query_id = compat.record.query_id;
                row.strategy = compat.record.strategy_tag.empty() ? "unknown"
                                                                  : compat.record.strategy_tag;
                row.report = recompute_report(compat.record);
                row.unmapped = compat.unmapped_fields;
                for (const auto& w : compat.warnings)
                    std::fprintf(stderr, "eval: %s: %s\n", file.c_str(), w.c_str());
            } catch (const std::exception& compat_err) {
                std::fprintf(stderr, "eval: skipping %s: %s (as external: %s)\n", file.c_str(),
                             native_err.what(), compat_err.what());
                continue;
            }
        }
        rows.push_back(std::move(row));
    }

    std::fprintf(stdout, "%-10s %-16s %5s %7s %8s %7s %8s %9s %7s\n", "query", "strategy",
                 "paths", "d_sym", "d_ground", "drop", "failure", "diversity", "abstain");
    for (const auto& r : rows) {
        const BehavioralReport& b = r.report;
        std::fprintf(stdout, "%-10s %-16s %5zu %7s %8s %7s %8s %9s %7s\n", r.query_id.c_str(),
                     r.strategy.c_str(), b.n_paths, fmt(b.d_sym).c_str(),
                     fmt(b.d_ground).c_str(), fmt(b.drop_rate).c_str(),
                     fmt(b.failure_rate).c_str(), fmt(b.diversity_jaccard).c_str(),
                     b.abstention ? "yes" : "no");
    }
    for (const auto& r : rows) {
        if (r.unmapped.empty()) continue;
        std::fprintf(stdout, "%s: unmapped fields:", r.file.c_str());
        for (const auto& f : r.unmapped) std::fprintf(stdout, " %s", f.c_str());
        std::fprintf(stdout, "\n");
    }

    if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "query_id,strategy,n_paths,d_sym,d_ground,drop_rate,failure_rate,"
               "diversity_jaccard,abstention\n";
        for (const auto& r : rows) {
            const BehavioralReport& b = r.report;
            csv << r.query_id << "," << r.strategy << "," << b.n_paths << ","
                << csv_cell(b.d_sym) << "," << csv_cell(b.d_ground) << ","
                << csv_cell(b.drop_rate) << "," << csv_cell(b.failure_rate) << ","
                << csv_cell(b.diversity_jaccard) << "," << (b.abstention ? 1 : 0) << "\n";
        }
        try {
            write_text_file(csv_path, csv.str());
        } catch (const std::exception& e) {
            std::fprintf(stderr, "eval: %s\n", e.what());
            return 1;
        }
    }
    if (rows.empty()) {
        std::fprintf(stderr, "eval: no readable traces\n");
        return 1;
    }
    return 0;
}

std::vector<std::string> collect_trace_files(const std::vector<std::string>& inputs) {
    std::vector<std::string> files;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            // Run output directories hold trace.json next to report.json and
            // summary.txt; when traces are present only they are taken.
            std::vector<std::string> traces;
            std::vector<std::string> any_json;
            for (const auto& entry : fs::recursive_directory_iterator(input)) {
                if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
                if (entry.path().filename() == "trace.json")
                    traces.push_back(entry.path().string());
                any_json.push_back(entry.path().string());
            }
            auto& found = traces.empty() ? any_json : traces;
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(input);
        }
    }
    return files;
}

int cmd_compare(const std::vector<std::string>& inputs, const std::string& csv_path) {
    std::vector<TraceRecord> traces;
    for (const auto& file : collect_trace_files(inputs)) {
        try {
            traces.push_back(read_trace(file));
        } catch (const std::exception& e) {
            std::fprintf(stderr, "compare: skipping %s: %s\n", file.c_str(), e.what());
        }
    }
    if (traces.empty()) {
        std::fprintf(stderr, "compare: no readable traces\n");
        return 1;
    }

    const Comparison comparison = compare_runs(traces);
    for (const auto& w : comparison.warnings)
        std::fprintf(stderr, "compare: %s\n", w.c_str());

    std::fprintf(stdout, "%-16s %5s %7s %8s %11s %12s %8s %9s\n", "strategy", "runs", "d_sym",
                 "d_ground", "drop(runs)", "drop(pooled)", "failure", "diversity");
    for (const auto& row : comparison.rows) {
        const std::string drop_runs =
            row.drop_defined_runs ? fmt(row.drop_mean_of_ratios) : std::string("n/a");
        const std::string diversity =
            row.diversity_defined_runs ? fmt(row.mean_diversity) : std::string("n/a");
        const std::string failure =
            row.chains_total ? fmt(row.failure_rate) : std::string("n/a");
        std::fprintf(stdout, "%-16s %5zu %7s %8s %11s %12s %8s %9s\n", row.strategy.c_str(),
                     row.runs, fmt(row.mean_sym_depth).c_str(),
                     fmt(row.mean_ground_depth).c_str(), drop_runs.c_str(),
                     fmt(row.drop_ratio_of_means).c_str(), failure.c_str(), diversity.c_str());
    }

    if (!csv_path.empty()) {
        try {
            write_text_file(csv_path, comparison_to_csv(comparison));
        } catch (const std::exception& e) {
            std::fprintf(stderr, "compare: %s\n", e.what());
            return 1;
        }
    }
    return comparison.rows.empty() ? 1 : 0;
}

int cmd_replay(const std::string& file, bool compat) {
    if (compat) {
        CompatResult result;
        try {
            result = read_external_trace(file);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "replay: %s\n", e.what());
            return 1;
        }
        const BehavioralReport& r = result.record.report;
        std::fprintf(stdout, "external trace %s (query %s, strategy %s)\n", file.c_str(),
                     result.record.query_id.c_str(), result.record.strategy_tag.c_str());
        std::fprintf(stdout, "recomputed: d_sym %s, d_ground %s, drop %s, failure %s\n",
                     fmt(r.d_sym).c_str(), fmt(r.d_ground).c_str(), fmt(r.drop_rate).c_str(),
                     fmt(r.failure_rate).c_str());
        std::fprintf(stdout, "stored:     d_sym %s, d_ground %s, drop %s, failure %s\n",
                     fmt(result.stored.avg_sym_depth).c_str(),
                     fmt(result.stored.avg_ground_depth).c_str(),
                     fmt(result.stored.drop_rate).c_str(),
                     fmt(result.stored.failure_rate).c_str());
        for (const auto& w : result.warnings)
            std::fprintf(stderr, "replay: %s\n", w.c_str());
        std::fprintf(stdout, "unmapped fields:%s\n", result.unmapped_fields.empty() ? " none" : "");
        for (const auto& f : result.unmapped_fields) std::fprintf(stdout, "  %s\n", f.c_str());
        return 0;
    }

    ReplayResult result;
    try {
        const TraceRecord record = read_trace(file);
        result = replay_trace(record);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "replay: %s\n", e.what());
        return 1;
    }
    if (!result.recomputed.completed())
        std::fprintf(stdout, "replay aborted at stage '%s' (as recorded or diverged)\n",
                     result.recomputed.failure_stage.c_str());
    if (result.divergences.empty()) {
        std::fprintf(stdout, "replay of %s: no divergences\n", file.c_str());
        return 0;
    }
    std::fprintf(stdout, "replay of %s: %zu divergences\n", file.c_str(),
                 result.divergences.size());
    for (const auto& d : result.divergences) std::fprintf(stdout, "  %s\n", d.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-constrained mechanistic hypothesis synthesis"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "execute queries through the pipeline");
    run->add_option("query", run_opt.query_texts, "query text (repeatable)");
    run->add_option("--query-id", run_opt.query_ids,
                    "run a named query from the query fixture (repeatable)");
    run->add_option("--queries", run_opt.queries_file, "query fixture file")
        ->capture_default_str();
    run->add_option("--id", run_opt.single_id, "query id for a single positional query");
    run->add_option("--config", run_opt.config_file,
                    "run configuration JSON; explicit flags override it");
    run_opt.strategy_opt =
        run->add_option("--strategy", run_opt.strategy, "reasoning strategy")
            ->check(CLI::IsMember({"full", "shortest", "walk", "rag", "full_diversity",
                                   "shortest_path", "random_walk", "rag_baseline"}))
            ->capture_default_str();
    run_opt.k_opt = run->add_option("--k", run_opt.k, "candidate paths per endpoint pair")
                        ->capture_default_str();
    run_opt.overlap_opt = run->add_option("--overlap-threshold", run_opt.overlap_threshold,
                                          "diversity filter acceptance bound")
                              ->capture_default_str();
    run_opt.max_papers_opt =
        run->add_option("--max-papers", run_opt.max_papers, "retrieval cap")
            ->capture_default_str();
    run_opt.lens_opt = run->add_option("--lens", run_opt.lens_label,
                                       "inject a lens concept biasing path routing");
    run_opt.lens_bias_opt =
        run->add_option("--lens-bias", run_opt.lens_bias, "lens-incident edge weight")
            ->capture_default_str();
    run_opt.mode_opt = run->add_option("--mode", run_opt.mode, "client mode")
                           ->check(CLI::IsMember({"mock", "live", "recorded"}))
                           ->capture_default_str();
    run_opt.seed_opt =
        run->add_option("--seed", run_opt.seed, "random walk seed")->capture_default_str();
    run_opt.temperature_opt =
        run->add_option("--temperature", run_opt.temperature, "decoding temperature")
            ->capture_default_str();
    run_opt.deterministic_opt =
        run->add_flag("--deterministic,!--no-deterministic", run_opt.deterministic,
                      "zero timestamps so identical runs produce identical bytes");
    run->add_option("--out", run_opt.out_dir, "output directory")->capture_default_str();
    run->add_option("--fixture", run_opt.fixture_dir, "mock corpus directory");
    run->add_option("--from-trace", run_opt.from_trace,
                    "recorded mode: answer clients from this trace");
    run->add_option("--parallel", run_opt.parallel, "worker threads for multiple queries")
        ->capture_default_str();
    run_opt.max_hypotheses_opt =
        run->add_option("--max-hypotheses", run_opt.max_hypotheses, "synthesis cap")
            ->capture_default_str();
    run_opt.max_turns_opt =
        run->add_option("--max-turns", run_opt.max_turns, "exploration turn cap")
            ->capture_default_str();
    run_opt.controversy_opt = run->add_flag("--controversy-augment", run_opt.controversy,
                                            "add a controversy-focused retrieval pass");

    std::vector<std::string> eval_files;
    std::string eval_csv;
    CLI::App* eval = app.add_subcommand("eval", "recompute metrics from trace files");
    eval->add_option("traces", eval_files, "trace files (native or external layout)")
        ->required();
    eval->add_option("--csv", eval_csv, "also write the table as CSV to this path");

    std::vector<std::string> compare_inputs;
    std::string compare_csv;
    std::string compare_group = "strategy";
    CLI::App* compare = app.add_subcommand("compare", "summarize traces per strategy");
    compare->add_option("traces", compare_inputs, "trace files or directories")->required();
    compare->add_option("--csv", compare_csv, "also write the table as CSV to this path");
    compare->add_option("--group", compare_group, "grouping key")
        ->check(CLI::IsMember({"strategy"}))
        ->capture_default_str();

    std::string replay_file;
    bool replay_compat = false;
    CLI::App* replay = app.add_subcommand("replay", "re-execute a trace and diff the results");
    replay->add_option("trace", replay_file, "trace file")->required();
    replay->add_flag("--compat", replay_compat,
                     "treat the input as an external-layout trace: recompute its report "
                     "and list unmapped fields");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_opt);
        if (*eval) return cmd_eval(eval_files, eval_csv);
        if (*compare) return cmd_compare(compare_inputs, compare_csv);
        if (*replay) return cmd_replay(replay_file, replay_compat);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mechsynth: %s\n", e.what());
        return 1;
    }
    return 0;
}
