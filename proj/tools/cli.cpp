#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "nextkey/corpus.hpp"
#include "nextkey/engine.hpp"
#include "nextkey/service.hpp"
#include "nextkey/simulator.hpp"
#include "nextkey/snapshot.hpp"

namespace nextkey::cli {

namespace {

namespace fs = std::filesystem;

struct ConfigFlags {
    std::size_t partitions = 1;
    std::size_t conf = 5;
    std::size_t diff = 2;
    std::size_t n_initial = 3;
    std::size_t n_min = 1;
    std::size_t prune_budget = 0;
    std::size_t alphabet_cap = 0;
    std::string separators;
    std::int64_t utc_offset = 0;
};

// "\t", "\n", "\r", "\s" (space) and "\\" are accepted so separators can be
// given on a shell line.
std::u32string unescape_separators(const std::string& raw) {
    std::string s;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '\\' || i + 1 == raw.size()) {
            s.push_back(raw[i]);
            continue;
        }
        switch (raw[++i]) {
        case 't': s.push_back('\t'); break;
        case 'n': s.push_back('\n'); break;
        case 'r': s.push_back('\r'); break;
        case 's': s.push_back(' '); break;
        case '\\': s.push_back('\\'); break;
        default:
            throw std::invalid_argument(std::string("unknown escape \\") + raw[i] +
                                        " in --separators");
        }
    }
    return decode_utf8(s);
}

void add_engine_flags(CLI::App& app, ConfigFlags& f, bool partitions_flag = true) {
    if (partitions_flag) {
        app.add_option("--partitions", f.partitions, "Equal day partitions, one trie each")
            ->check(CLI::Range(std::size_t{1}, std::size_t{86400}));
    }
    app.add_option("--conf", f.conf, "Consecutive hits before the prediction bound shrinks")
        ->check(CLI::PositiveNumber);
    app.add_option("--diff", f.diff, "Consecutive feedbacks before the prediction bound grows")
        ->check(CLI::PositiveNumber);
    app.add_option("--n-initial", f.n_initial, "Initial prediction bound")
        ->check(CLI::PositiveNumber);
    app.add_option("--n-min", f.n_min, "Smallest prediction bound")->check(CLI::PositiveNumber);
    app.add_option("--separators", f.separators,
                   "Word separator characters (default: Unicode whitespace)");
    app.add_option("--utc-offset", f.utc_offset, "Seconds added to UTC to get local time");
    app.add_option("--alphabet-cap", f.alphabet_cap, "Informational bound on the key set");
}

EngineConfig make_config(const ConfigFlags& f, std::size_t partitions, std::size_t budget) {
    EngineConfig c;
    c.partitions = partitions;
    c.conf = f.conf;
    c.diff = f.diff;
    c.n_initial = f.n_initial;
    c.n_min = f.n_min;
    c.utc_offset = f.utc_offset;
    if (!f.separators.empty()) {
        c.separators = SeparatorSet(unescape_separators(f.separators));
    }
    if (budget > 0) {
        c.word_budget = budget;
    }
    if (f.alphabet_cap > 0) {
        c.alphabet_cap = f.alphabet_cap;
    }
    c.validate();
    return c;
}

bool any_given(const CLI::App& app, std::initializer_list<const char*> names) {
    for (const char* n : names) {
        if (app.count(n) > 0) {
            return true;
        }
    }
    return false;
}

constexpr std::initializer_list<const char*> kConfigOptions = {
    "--partitions", "--conf",       "--diff",        "--n-initial", "--n-min",
    "--separators", "--utc-offset", "--prune-budget", "--alphabet-cap"};

// Loads `state` when it exists, otherwise builds a fresh engine from flags.
Engine open_engine(const CLI::App& app, const std::string& state, const ConfigFlags& flags,
                   std::ostream& err) {
    if (!state.empty() && fs::exists(state)) {
        if (any_given(app, kConfigOptions)) {
            err << "note: " << state << " exists; its stored configuration is used\n";
        }
        return load_snapshot(state);
    }
    return Engine(make_config(flags, flags.partitions, flags.prune_budget));
}

void preload_wordlist(Engine& engine, const std::string& path) {
    for (const std::string& w : load_wordlist(path)) {
        engine.preload(decode_utf8(w), 0);
    }
}

std::vector<std::size_t> parse_list(const std::string& raw, const char* flag, bool allow_zero) {
    std::vector<std::size_t> values;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        std::size_t v = 0;
        try {
            v = std::stoul(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || item.empty() || item.front() == '-' || (v == 0 && !allow_zero)) {
            throw CLI::ValidationError(flag, "expected a comma-separated list of counts");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw CLI::ValidationError(flag, "expected at least one value");
    }
    return values;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        return fallback;
    }
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    return file;
}

void print_stats(const Engine& engine, std::ostream& out) {
    const EngineConfig& c = engine.config();
    out << "partitions: " << c.partitions << '\n'
        << "conf: " << c.conf << '\n'
        << "diff: " << c.diff << '\n'
        << "n_initial: " << c.n_initial << '\n'
        << "n_min: " << c.n_min << '\n'
        << "word_budget: " << (c.word_budget ? std::to_string(*c.word_budget) : "off") << '\n'
        << "separators: "
        << (c.separators.is_default() ? std::string("whitespace")
                                      : '"' + encode_utf8(c.separators.chars()) + '"')
        << '\n'
        << "utc_offset: " << c.utc_offset << '\n'
        << "alphabet: " << engine.alphabet().size() << '\n';
    out << "partition\twords\tnodes\n";
    for (std::size_t i = 0; i < engine.tries().size(); ++i) {
        out << i << '\t' << engine.trie(i).word_count() << '\t' << engine.trie(i).node_count()
            << '\n';
    }
    out << "total\t" << engine.word_count() << '\t' << engine.node_count() << '\n';
}

void export_words(const Engine& engine, std::ostream& out) {
    struct Row {
        std::string word;
        WordEnd end;
        std::size_t partition;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < engine.tries().size(); ++i) {
        const WeightedTrie& t = engine.trie(i);
        for (const auto& [cursor, end] : t.words_by_recency()) {
            rows.push_back({encode_utf8(t.spell(cursor)), end, i});
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.end.last_used != b.end.last_used) {
            return a.end.last_used > b.end.last_used;
        }
        return a.end.seq > b.end.seq;
    });
    out << "word\tcount\tlast_used\tpartition\n";
    for (const Row& r : rows) {
        out << r.word << '\t' << r.end.count << '\t' << r.end.last_used << '\t' << r.partition
            << '\n';
    }
}

int serve(Engine engine, const std::string& host, int port, const std::string& state,
          const std::string& ui_dir, std::ostream& out, std::ostream& err) {
    Service service(std::move(engine));
    httplib::Server server;
    service.mount(server);
    if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir)) {
        err << "error: cannot serve " << ui_dir << '\n';
        return 1;
    }

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);
    std::atomic<bool> signaled{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        signaled = true;
        server.stop();
    });

    int status = 0;
    if (!server.bind_to_port(host, port)) {
        err << "error: cannot listen on " << host << ':' << port << '\n';
        status = 1;
    } else {
        out << "listening on http://" << host << ':' << port << std::endl;
        server.listen_after_bind();
    }
    // Wake the waiter if the server stopped on its own.
    if (!signaled) {
        pthread_kill(waiter.native_handle(), SIGTERM);
    }
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);

    if (status == 0 && !state.empty()) {
        service.flush();
        save_snapshot(state, service.engine());
        out << "saved " << state << '\n';
    }
    return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive next-character prediction engine"};
    app.require_subcommand(1);

    ConfigFlags flags;
    std::string corpus_path;
    std::string state;
    std::string out_path;
    std::string wordlist;

    auto* accelerate = app.add_subcommand("accelerate", "Train a snapshot on a message corpus");
    accelerate->add_option("--corpus", corpus_path, "JSON Lines corpus")->required();
    accelerate->add_option("--state", state, "Snapshot to extend (created if missing)")
        ->required();
    accelerate->add_option("--out", out_path, "Write the snapshot here instead of --state");
    accelerate->add_option("--wordlist", wordlist, "Dictionary preloaded before training");
    accelerate->add_option("--prune-budget", flags.prune_budget,
                           "Words kept per partition (0 disables pruning)");
    add_engine_flags(*accelerate, flags);

    std::string partitions_list = "1";
    std::string budgets_list = "0";
    SimulationPlan plan;
    bool no_feedback = false;
    bool dictionary_both = false;
    auto* simulate = app.add_subcommand("simulate", "Replay a corpus and report precision");
    simulate->add_option("--corpus", corpus_path, "JSON Lines corpus")->required();
    simulate->add_option("--partitions", partitions_list, "Comma-separated partition counts");
    simulate->add_option("--prune-budget", budgets_list,
                         "Comma-separated word budgets (0 disables pruning)");
    simulate->add_option("--train-max", plan.train_max, "Largest training set");
    simulate->add_option("--train-step", plan.train_step, "Training set increment")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--test-size", plan.test_size, "Messages replayed per row")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--wordlist", wordlist, "Dictionary preloaded into every variant");
    simulate->add_flag("--dictionary-both", dictionary_both,
                       "Run each variant with and without the dictionary");
    simulate->add_flag("--no-feedback", no_feedback, "Do not send feedback on missed predictions");
    simulate->add_option("--jobs", plan.jobs, "Rows evaluated in parallel")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out", out_path, "CSV report (default: standard output)");
    add_engine_flags(*simulate, flags, false);

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string ui_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP prediction service");
    serve_cmd->add_option("--state", state, "Snapshot loaded at start and saved on exit");
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--wordlist", wordlist, "Dictionary preloaded into a fresh engine");
    serve_cmd->add_option("--ui-dir", ui_dir, "Static files served at /");
    serve_cmd->add_option("--prune-budget", flags.prune_budget,
                          "Words kept per partition (0 disables pruning)");
    add_engine_flags(*serve_cmd, flags);

    auto* stats = app.add_subcommand("stats", "Print configuration and word/node counts");
    stats->add_option("--state", state, "Snapshot (default: a fresh engine)");
    stats->add_option("--prune-budget", flags.prune_budget, "Words kept per partition");
    add_engine_flags(*stats, flags);

    auto* export_cmd = app.add_subcommand("export", "List learned words, most recent first");
    export_cmd->add_option("--state", state, "Snapshot")->required();
    export_cmd->add_option("--out", out_path, "Output file (default: standard output)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();  // program name
    }
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*accelerate) {
            Engine engine = open_engine(*accelerate, state, flags, err);
            if (!wordlist.empty()) {
                preload_wordlist(engine, wordlist);
            }
            const Corpus corpus = load_corpus(corpus_path);
            engine.accelerate(corpus.messages);
            const std::string target = out_path.empty() ? state : out_path;
            save_snapshot(target, engine);
            out << "trained on " << corpus.stats.kept << " of " << corpus.stats.total
                << " messages (" << corpus.stats.dropped_retweets << " retweets dropped, "
                << corpus.stats.stripped_links << " links stripped); " << engine.word_count()
                << " words, " << engine.node_count() << " nodes -> " << target << '\n';
        } else if (*simulate) {
            const std::vector<std::size_t> partitions =
                parse_list(partitions_list, "--partitions", false);
            const std::vector<std::size_t> budgets =
                parse_list(budgets_list, "--prune-budget", true);
            std::vector<std::string> words;
            if (!wordlist.empty()) {
                words = load_wordlist(wordlist);
            }
            for (std::size_t t : partitions) {
                for (std::size_t b : budgets) {
                    Variant v;
                    v.name = "T=" + std::to_string(t);
                    if (b > 0) {
                        v.name += "+prune=" + std::to_string(b);
                    }
                    v.config = make_config(flags, t, b);
                    v.feedback_on_miss = !no_feedback;
                    if (!words.empty() && dictionary_both) {
                        plan.variants.push_back(v);
                    }
                    if (!words.empty()) {
                        v.name += "+dict";
                        v.preload = words;
                    }
                    plan.variants.push_back(std::move(v));
                }
            }
            const Corpus corpus = load_corpus(corpus_path);
            const SimulationReport report = run_simulation(corpus.messages, plan);
            for (const std::string& w : report.warnings) {
                err << "warning: " << w << '\n';
            }
            std::ofstream file;
            write_report_csv(open_output(out_path, file, out), report);
        } else if (*serve_cmd) {
            const bool fresh = state.empty() || !fs::exists(state);
            Engine engine = open_engine(*serve_cmd, state, flags, err);
            if (fresh && !wordlist.empty()) {
                preload_wordlist(engine, wordlist);
            }
            return serve(std::move(engine), host, port, state, ui_dir, out, err);
        } else if (*stats) {
            if (!state.empty() && !fs::exists(state)) {
                throw std::runtime_error("no snapshot at " + state);
            }
            print_stats(open_engine(*stats, state, flags, err), out);
        } else if (*export_cmd) {
            std::ofstream file;
            export_words(load_snapshot(state), open_output(out_path, file, out));
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int main(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace nextkey::cli
