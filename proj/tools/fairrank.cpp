// fairrank: evaluate fair ranking metrics over TREC-style runs, compare metric
// agreement across systems, and generate synthetic fixtures.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairrank/cli.hpp"

int main(int argc, char** argv) {
    namespace fr = fairrank;
    CLI::App app{"Fair ranking metric evaluation"};
    app.require_subcommand(1);

    fr::cli::EvaluateOptions eval;
    std::string sequence, config;
    auto* evaluate = app.add_subcommand("evaluate", "Compute every configured metric for each run");
    evaluate->add_option("--run", eval.runs, "Run file (repeatable); one system per file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--qrels", eval.qrels, "Relevance judgments")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--alignment", eval.alignment, "Group alignment CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--sequence", sequence, "Ranking sequence CSV (seq_no,qid)")->check(CLI::ExistingFile);
    evaluate->add_option("--scores", eval.scores, "Score CSV per run, in --run order")->check(CLI::ExistingFile);
    evaluate->add_option("--config", config, "JSON evaluation config")->check(CLI::ExistingFile);
    evaluate->add_option("--out", eval.out, "Output directory")->required();

    fr::cli::CompareOptions cmp;
    std::string cmp_out;
    auto* compare = app.add_subcommand("compare", "Kendall tau-c agreement between metrics across systems");
    compare->add_option("--results", cmp.results, "Directory of <system>.metrics.csv files")->required();
    compare->add_option("--out", cmp_out, "Output directory (default: --results)");
    compare->add_flag("--signed", cmp.signed_values, "Correlate signed values instead of magnitudes");

    fr::SynthParams sp;
    std::string synth_out;
    bool no_edge = false;
    auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic corpus");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--docs", sp.n_docs, "Catalog size")->capture_default_str();
    synth->add_option("--requests", sp.n_requests, "Number of regular requests")->capture_default_str();
    synth->add_option("--groups", sp.n_groups, "Number of groups (>= 2)")->capture_default_str();
    synth->add_option("--systems", sp.n_systems, "Number of systems")->capture_default_str();
    synth->add_option("--pool", sp.pool, "Candidates per request")->capture_default_str();
    synth->add_option("--depth", sp.depth, "Ranking depth")->capture_default_str();
    synth->add_option("--draws", sp.draws, "Rankings per request")->capture_default_str();
    synth->add_option("--seed", sp.seed, "Random seed")->capture_default_str();
    synth->add_option("--protected-share", sp.protected_share, "Catalog share of the protected group")->capture_default_str();
    synth->add_option("--exposure-skew", sp.exposure_skew, "Largest score shift between groups")->capture_default_str();
    synth->add_option("--relevance-skew", sp.relevance_skew, "Relevance shift against the protected group")->capture_default_str();
    synth->add_option("--judged", sp.judged_fraction, "Fraction of candidates judged")->capture_default_str();
    synth->add_option("--soft", sp.soft_fraction, "Fraction of labeled docs with mixed membership")->capture_default_str();
    synth->add_option("--unlabeled", sp.unlabeled_fraction, "Fraction of unlabeled docs")->capture_default_str();
    synth->add_flag("--no-edge-cases", no_edge, "Omit the degenerate edge-case requests");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : fr::cli::kInputError;
    }

    if (*evaluate) {
        if (!sequence.empty()) eval.sequence = sequence;
        if (!config.empty()) eval.config = config;
        return fr::cli::cmd_evaluate(eval, std::cerr);
    }
    if (*compare) {
        if (!cmp_out.empty()) cmp.out = cmp_out;
        return fr::cli::cmd_compare(cmp, std::cerr);
    }
    sp.edge_cases = !no_edge;
    return fr::cli::cmd_synth(sp, synth_out, std::cerr);
}
