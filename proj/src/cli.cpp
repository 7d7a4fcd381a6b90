#include "psst/cli.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "psst/config.hpp"
#include "psst/corpus.hpp"
#include "psst/digest.hpp"
#include "psst/distill.hpp"
#include "psst/errors.hpp"
#include "psst/report.hpp"
#include "psst/scorer.hpp"
#include "psst/semantics.hpp"
#include "psst/stats.hpp"
#include "psst/style_metrics.hpp"
#include "psst/transfer.hpp"

namespace psst {

using json = nlohmann::json;

namespace {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;

    // corpus filter
    std::string in_path, out_path, band, origin = "news", role = "source";
    // transfer run
    std::string kind = "concise";
    // score style
    std::string backend_override;
    // qa eval
    std::string questions_path, results_path;
    // stats correlate
    std::string sets_path, scores_path, alpha_csv, alpha_metric = "interval";
    // distill gen
    std::string dimension = "interactivity", out_dir;
    double split_ratio = 0.9;
    // report render
    std::string style_path, semantic_path;
};

RunConfig assemble_config(const CliOptions& opt) {
    RunConfig config;
    if (!opt.config_path.empty()) config = load_config(opt.config_path);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--set expects key=value, got '" + kv + "'");
        apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
}

Gateway make_gateway(const RunConfig& config, const EndpointConfig& endpoint) {
    return Gateway(endpoint, config.cache_mode, config.cache_file);
}

std::string input_path(const CliOptions& opt, const RunConfig& config) {
    if (!opt.in_path.empty()) return opt.in_path;
    if (!config.corpus_path.empty()) return config.corpus_path.string();
    throw ValidationError("no input corpus: pass --in or set corpus in the config");
}

int cmd_corpus_filter(const CliOptions& opt, RunConfig& config, std::ostream& out) {
    const auto docs = ingest(input_path(opt, config), origin_from_string(opt.origin),
                             role_from_string(opt.role));
    const Band band = opt.band.empty() ? config.band : band_from_string(opt.band);
    const auto kept = filter_corpus(docs, band);
    write_corpus(kept, opt.out_path);
    out << "ingested " << docs.size() << " documents, kept " << kept.size() << " in band "
        << to_string(band) << "\n";
    return 0;
}

int cmd_transfer_run(const CliOptions& opt, RunConfig& config, std::ostream& out,
                     std::ostream& err) {
    const auto docs = ingest(input_path(opt, config), Origin::news, Role::source);
    const PromptKind kind = prompt_kind_from_string(opt.kind);

    std::vector<PromptSpec> suite;
    if (kind == PromptKind::paraphrase) {
        suite.push_back(default_paraphrase_prompt());
    } else {
        suite = load_prompt_suite(config.prompts_dir, kind);
    }

    Gateway gateway = make_gateway(config, config.transfer);
    const SuiteResult result = run_suite(docs, suite, gateway);
    write_corpus(result.documents, opt.out_path);
    out << "transferred " << result.documents.size() << "/" << docs.size() * suite.size()
        << " documents (" << to_string(kind) << ")\n";
    if (!result.failures.empty()) {
        for (const auto& f : result.failures)
            err << "failed: " << f.source_id << " (" << to_string(f.kind) << "#"
                << f.prompt_index << "): " << f.error << "\n";
        return 2;
    }
    return 0;
}

int cmd_score_style(const CliOptions& opt, RunConfig& config, std::ostream& out) {
    const auto docs = ingest(input_path(opt, config), Origin::news, Role::source);
    const std::string backend_kind =
        opt.backend_override.empty() ? config.scorer_backend : opt.backend_override;

    std::unique_ptr<Gateway> gateway;
    std::unique_ptr<ScorerBackend> backend;
    if (backend_kind == "lexical") {
        backend = std::make_unique<LexicalBackend>();
    } else if (backend_kind == "remote") {
        gateway = std::make_unique<Gateway>(config.scorer, config.cache_mode,
                                            config.cache_file);
        backend = std::make_unique<RemoteScorerBackend>(*gateway, config.validation_retries);
    } else {
        throw ValidationError("unknown scorer backend: " + backend_kind);
    }

    const auto descriptor = backend->descriptor();
    std::vector<StyleReportRow> rows;
    rows.reserve(docs.size());
    for (const auto& doc : docs) {
        StyleReportRow row;
        row.label = render_label(doc);
        row.backend = descriptor.name;
        row.backend_version = descriptor.version;
        row.report = style_report(doc, *backend, config.dimensions, config.k, config.n_set);
        rows.push_back(std::move(row));
    }
    write_style_reports(rows, opt.out_path);
    out << "scored " << rows.size() << " documents with backend " << descriptor.name << "\n";
    return 0;
}

int cmd_qa_generate(const CliOptions& opt, RunConfig& config, std::ostream& out) {
    const auto docs = ingest(input_path(opt, config), Origin::news, Role::source);
    Gateway gateway = make_gateway(config, config.qa_generator);
    std::vector<QAItem> items;
    for (const auto& doc : docs) {
        if (doc.role != Role::source) continue;
        for (QACategory category :
             {QACategory::key_information, QACategory::logical_structure}) {
            auto generated =
                generate_questionnaire(doc, category, gateway, config.validation_retries);
            items.insert(items.end(), generated.begin(), generated.end());
        }
    }
    write_questionnaire(items, opt.out_path);
    out << "generated " << items.size() << " questions\n";
    return 0;
}

int cmd_qa_eval(const CliOptions& opt, RunConfig& config, std::ostream& out) {
    const auto docs = ingest(input_path(opt, config), Origin::news, Role::source);
    const auto items = load_questionnaire(opt.questions_path);
    std::map<std::string, std::vector<QAItem>> by_source;
    for (const auto& item : items) by_source[item.source_document_id].push_back(item);

    Gateway gateway = make_gateway(config, config.qa_model);
    std::vector<SemanticReportRow> rows;
    std::vector<QAResult> all_results;
    for (const auto& doc : docs) {
        if (doc.role == Role::target_style) continue;  // no source, not evaluable
        const std::string source_id = doc.parent_id ? *doc.parent_id : doc.id;
        auto it = by_source.find(source_id);
        if (it == by_source.end())
            throw ValidationError("no questionnaire for source '" + source_id +
                                  "' needed by document '" + doc.id + "'");
        SemanticReportRow row;
        row.label = render_label(doc);
        row.qa_prompt_version = qa_prompt_version();

        std::vector<QAResult> results;
        results.reserve(it->second.size());
        for (const auto& item : it->second)
            results.push_back(answer_question(doc, item, gateway));
        row.report = aggregate_results(doc.id, it->second, results);
        all_results.insert(all_results.end(), results.begin(), results.end());
        rows.push_back(std::move(row));
    }
    if (!opt.results_path.empty()) write_qa_results(all_results, opt.results_path);
    write_semantic_reports(rows, opt.out_path);
    out << "evaluated " << rows.size() << " documents, " << all_results.size()
        << " answers\n";
    return 0;
}

int cmd_stats_correlate(const CliOptions& opt, std::ostream& out) {
    const auto sets = load_ranking_sets(opt.sets_path);

    std::map<std::string, double> system_scores;
    {
        std::ifstream in(opt.scores_path);
        if (!in) throw IoError("cannot open scores file: " + opt.scores_path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                json rec = json::parse(line);
                system_scores[rec.at("candidate_id").get<std::string>()] =
                    rec.at("score").get<double>();
            } catch (const json::exception& e) {
                throw ValidationError(opt.scores_path + ":" + std::to_string(line_no) +
                                      ": malformed score record: " + e.what());
            }
        }
    }

    const CorrelationSummary summary = correlate_sets(sets, system_scores);
    json result{{"mean_rho_percent", summary.mean_rho_percent},
                {"pooled_rho_percent", summary.pooled_rho_percent},
                {"sets_used", summary.sets_used},
                {"sets_skipped", summary.sets_skipped}};
    if (!opt.alpha_csv.empty()) {
        const auto matrix = load_reliability_csv(
            opt.alpha_csv, agreement_metric_from_string(opt.alpha_metric));
        result["krippendorff_alpha"] = krippendorff_alpha(matrix);
        result["alpha_metric"] = opt.alpha_metric;
    }
    const std::string text = result.dump(2) + "\n";
    if (!opt.out_path.empty()) {
        std::ofstream file(opt.out_path, std::ios::binary);
        if (!file) throw IoError("cannot write " + opt.out_path);
        file << text;
    }
    out << text;
    return 0;
}

int cmd_distill_gen(const CliOptions& opt, RunConfig& config, std::ostream& out) {
    const auto seeds = ingest(input_path(opt, config), Origin::news, Role::source);
    const StyleDimension dimension = dimension_from_string(opt.dimension);
    Gateway gateway = make_gateway(config, config.transfer);

    DistillOptions options;
    options.validation_retries = config.validation_retries;
    options.length_ratio_min = config.distill_ratio_min;
    options.length_ratio_max = config.distill_ratio_max;

    std::filesystem::create_directories(opt.out_dir);
    const auto train_path = std::filesystem::path(opt.out_dir) / "train.jsonl";
    const auto val_path = std::filesystem::path(opt.out_dir) / "val.jsonl";
    const DistillStats stats = build_training_set(seeds, dimension, gateway, opt.split_ratio,
                                                  config.seed, train_path, val_path, options);

    json stats_json{{"dimension", stats.dimension},
                    {"seeds", stats.seeds},
                    {"quintuples_ok", stats.quintuples_ok},
                    {"rejected", stats.rejected},
                    {"train_samples", stats.train_samples},
                    {"val_samples", stats.val_samples},
                    {"rng_seed", stats.rng_seed},
                    {"rejection_labels", stats.rejection_labels},
                    {"split_ratio", opt.split_ratio},
                    {"config_hash", config_hash(config)}};
    std::ofstream stats_out(std::filesystem::path(opt.out_dir) / "stats.json",
                            std::ios::binary);
    if (!stats_out) throw IoError("cannot write distill stats");
    stats_out << stats_json.dump(2) << "\n";

    out << "distill " << stats.dimension << ": " << stats.train_samples << " train / "
        << stats.val_samples << " val samples (" << stats.rejected << " rejected)\n";
    return 0;
}

int cmd_report_render(const CliOptions& opt, RunConfig& config, std::ostream& out) {
    std::vector<StyleReportRow> style_rows;
    if (!opt.style_path.empty()) style_rows = load_style_reports(opt.style_path);
    std::vector<SemanticReportRow> semantic_rows;
    if (!opt.semantic_path.empty()) semantic_rows = load_semantic_reports(opt.semantic_path);
    const ReportBundle bundle = render_report(style_rows, semantic_rows, config_hash(config));
    write_bundle(bundle, opt.out_dir);
    out << "report bundle written to " << opt.out_dir << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Passage-level public-speaking style transfer evaluation harness"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--set may follow the subcommand
    CliOptions opt;

    app.add_option("--config", opt.config_path, "Config file (key = value lines)");
    app.add_option("--set", opt.overrides, "Override one config key (key=value)");

    auto* corpus = app.add_subcommand("corpus", "Corpus operations")->require_subcommand(1);
    auto* corpus_filter = corpus->add_subcommand("filter", "Ingest and band-filter a corpus");
    corpus_filter->add_option("--in", opt.in_path, "Input corpus JSONL (or config corpus)");
    corpus_filter->add_option("--out", opt.out_path, "Output corpus JSONL")->required();
    corpus_filter->add_option("--band", opt.band, "Length band (B400|B800|B1200|none)");
    corpus_filter->add_option("--origin", opt.origin, "Default origin for records");
    corpus_filter->add_option("--role", opt.role, "Default role for records");

    auto* transfer = app.add_subcommand("transfer", "Transfer drivers")->require_subcommand(1);
    auto* transfer_run = transfer->add_subcommand("run", "Apply a prompt suite to sources");
    transfer_run->add_option("--in", opt.in_path, "Source corpus JSONL (or config corpus)");
    transfer_run->add_option("--out", opt.out_path, "Output corpus JSONL")->required();
    transfer_run->add_option("--kind", opt.kind, "concise|enhanced|paraphrase");

    auto* score = app.add_subcommand("score", "Style scoring")->require_subcommand(1);
    auto* score_style = score->add_subcommand("style", "Score a corpus on all dimensions");
    score_style->add_option("--in", opt.in_path, "Corpus JSONL (or config corpus)");
    score_style->add_option("--out", opt.out_path, "Style report JSONL")->required();
    score_style->add_option("--backend", opt.backend_override, "lexical|remote");

    auto* qa = app.add_subcommand("qa", "Semantic preservation")->require_subcommand(1);
    auto* qa_generate = qa->add_subcommand("generate", "Generate questionnaires from sources");
    qa_generate->add_option("--in", opt.in_path, "Source corpus JSONL (or config corpus)");
    qa_generate->add_option("--out", opt.out_path, "Questionnaire JSONL")->required();
    auto* qa_eval = qa->add_subcommand("eval", "Answer questionnaires against documents");
    qa_eval->add_option("--in", opt.in_path, "Corpus JSONL (or config corpus)");
    qa_eval->add_option("--questions", opt.questions_path, "Questionnaire JSONL")->required();
    qa_eval->add_option("--results", opt.results_path, "Per-question result JSONL");
    qa_eval->add_option("--out", opt.out_path, "Semantic report JSONL")->required();

    auto* stats = app.add_subcommand("stats", "Agreement statistics")->require_subcommand(1);
    auto* stats_correlate = stats->add_subcommand("correlate", "Correlate system scores "
                                                               "with human rankings");
    stats_correlate->add_option("--sets", opt.sets_path, "Ranking sets JSONL")->required();
    stats_correlate->add_option("--scores", opt.scores_path, "Candidate score JSONL")
        ->required();
    stats_correlate->add_option("--out", opt.out_path, "Output JSON");
    stats_correlate->add_option("--alpha-csv", opt.alpha_csv,
                                "Raters x items CSV for Krippendorff's alpha");
    stats_correlate->add_option("--alpha-metric", opt.alpha_metric,
                                "nominal|ordinal|interval");

    auto* distill = app.add_subcommand("distill", "Distillation data")->require_subcommand(1);
    auto* distill_gen = distill->add_subcommand("gen", "Generate list-wise training data");
    distill_gen->add_option("--seeds", opt.in_path, "Seed sentence corpus JSONL (or config corpus)");
    distill_gen->add_option("--dimension", opt.dimension, "Style dimension")->required();
    distill_gen->add_option("--split", opt.split_ratio, "Train fraction (default 0.9)");
    distill_gen->add_option("--out-dir", opt.out_dir, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Report rendering")->require_subcommand(1);
    auto* report_render = report->add_subcommand("render", "Render the artifact bundle");
    report_render->add_option("--style", opt.style_path, "Style report JSONL");
    report_render->add_option("--semantic", opt.semantic_path, "Semantic report JSONL");
    report_render->add_option("--out-dir", opt.out_dir, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        RunConfig config = assemble_config(opt);
        if (corpus_filter->parsed()) return cmd_corpus_filter(opt, config, out);
        if (transfer_run->parsed()) return cmd_transfer_run(opt, config, out, err);
        if (score_style->parsed()) return cmd_score_style(opt, config, out);
        if (qa_generate->parsed()) return cmd_qa_generate(opt, config, out);
        if (qa_eval->parsed()) return cmd_qa_eval(opt, config, out);
        if (stats_correlate->parsed()) return cmd_stats_correlate(opt, out);
        if (distill_gen->parsed()) return cmd_distill_gen(opt, config, out);
        if (report_render->parsed()) return cmd_report_render(opt, config, out);
        err << "no subcommand\n";
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ReplyParseError& e) {
        err << "error: " << e.what() << "\nraw reply: " << e.raw_reply() << "\n";
        return 1;
    } catch (const DistillRejection& e) {
        err << "error: " << e.what() << "\nraw reply: " << e.raw_reply() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const GatewayError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace psst
