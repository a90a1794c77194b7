// Copyright 2026 The NNN Retrieval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nnn/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "nnn/diagnostics.hpp"
#include "nnn/embed_io.hpp"
#include "nnn/error.hpp"
#include "nnn/evaluation.hpp"
#include "nnn/normalization.hpp"
#include "nnn/report_json.hpp"
#include "nnn/vector_index.hpp"

namespace nnn::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void apply_thread_env() {
    if (const char* env = std::getenv("NNN_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 0) {
            throw UsageError("NNN_THREADS must be a non-negative integer, got \"" + std::string(env) + "\"");
        }
        if (n > 0) omp_set_num_threads(static_cast<int>(n));
    }
}

// ---- Shared flag groups ---------------------------------------------------

struct IndexFlags {
    bool exact = false;
    std::size_t nprobe = kDefaultNprobe;
    std::size_t ncentroids = 0;
    std::size_t kmeans_iters = kDefaultKmeansIters;
    CLI::Option* exact_opt = nullptr;
    CLI::Option* nprobe_opt = nullptr;

    void add(CLI::App* app) {
        exact_opt = app->add_flag("--exact", exact, "Exhaustive search (default)");
        nprobe_opt = app->add_option("--nprobe", nprobe, "Use an inverted-file index probing N lists")
                         ->check(CLI::PositiveNumber);
        exact_opt->excludes(nprobe_opt);
        app->add_option("--ncentroids", ncentroids, "Inverted lists (default ceil(sqrt(rows)))");
        app->add_option("--kmeans-iters", kmeans_iters, "k-means iterations")->capture_default_str();
    }

    bool use_ivf() const { return nprobe_opt != nullptr && nprobe_opt->count() > 0; }

    IndexParams params(std::uint64_t seed) const {
        IndexParams p;
        p.exact = !use_ivf();
        p.ncentroids = ncentroids;
        p.kmeans_iters = kmeans_iters;
        p.seed = seed;
        p.nprobe = nprobe;
        return p;
    }

    Json config(std::uint64_t seed) const {
        Json j;
        j["exact"] = !use_ivf();
        if (use_ivf()) {
            j["nprobe"] = nprobe;
            j["ncentroids"] = ncentroids;
            j["kmeans_iters"] = kmeans_iters;
            j["seed"] = seed;
        }
        return j;
    }
};

struct MethodFlags {
    std::string method = "none";
    double alpha = 0.0;
    std::size_t k = 1;
    double beta1 = 0.0;
    double beta2 = 0.0;
    std::size_t threshold = 1;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* beta1_opt = nullptr;
    CLI::Option* beta2_opt = nullptr;
    CLI::Option* threshold_opt = nullptr;

    void add(CLI::App* app) {
        app->add_option("--method", method, "none|nnn|dn|qbnorm|dualis|dualdis")
            ->check(CLI::IsMember({"none", "nnn", "dn", "qbnorm", "dualis", "dualdis"}))
            ->capture_default_str();
        alpha_opt = app->add_option("--alpha", alpha, "nnn bias scale")->check(CLI::NonNegativeNumber);
        k_opt = app->add_option("--k", k, "nnn neighbour count")->check(CLI::PositiveNumber);
        beta1_opt = app->add_option("--beta1", beta1, "dualis/dualdis candidate-bank temperature")
                        ->check(CLI::NonNegativeNumber);
        beta2_opt = app->add_option("--beta2", beta2, "qbnorm/dualis/dualdis query-bank temperature")
                        ->check(CLI::NonNegativeNumber);
        threshold_opt = app->add_option("--activation-threshold", threshold,
                                        "dualdis: top-1 count that puts a candidate in the activation set")
                            ->check(CLI::PositiveNumber);
    }

    /// Builds the spec, rejecting flags the method does not take. With a
    /// cached bias, nnn takes alpha and k from the bias.
    NormalizationSpec spec(const BiasVector* cached = nullptr) const {
        const Method m = parse_method(method);
        auto given = [](const CLI::Option* o) { return o != nullptr && o->count() > 0; };
        auto forbid = [&](const CLI::Option* o, const char* flag) {
            if (given(o)) {
                throw UsageError(std::string(flag) + " does not apply to --method " + method);
            }
        };
        auto demand = [&](const CLI::Option* o, const char* flag) {
            if (!given(o)) throw UsageError("--method " + method + " requires " + flag);
        };
        NormalizationSpec s;
        switch (m) {
            case Method::kNone:
            case Method::kDn:
                forbid(alpha_opt, "--alpha");
                forbid(k_opt, "--k");
                forbid(beta1_opt, "--beta1");
                forbid(beta2_opt, "--beta2");
                forbid(threshold_opt, "--activation-threshold");
                s = m == Method::kNone ? NormalizationSpec::none() : NormalizationSpec::dn();
                break;
            case Method::kNnn:
                forbid(beta1_opt, "--beta1");
                forbid(beta2_opt, "--beta2");
                forbid(threshold_opt, "--activation-threshold");
                if (cached != nullptr) {
                    if (given(alpha_opt) && alpha != cached->alpha) {
                        throw UsageError("--alpha disagrees with the cached bias");
                    }
                    if (given(k_opt) && k < cached->k) {
                        throw UsageError("--k disagrees with the cached bias");
                    }
                    s = NormalizationSpec::nnn(cached->alpha, given(k_opt) ? k : cached->k);
                } else {
                    demand(alpha_opt, "--alpha");
                    demand(k_opt, "--k");
                    s = NormalizationSpec::nnn(alpha, k);
                }
                break;
            case Method::kQbnorm:
                forbid(alpha_opt, "--alpha");
                forbid(k_opt, "--k");
                forbid(beta1_opt, "--beta1");
                forbid(threshold_opt, "--activation-threshold");
                demand(beta2_opt, "--beta2");
                s = NormalizationSpec::qbnorm(beta2);
                break;
            case Method::kDualis:
            case Method::kDualdis:
                forbid(alpha_opt, "--alpha");
                forbid(k_opt, "--k");
                demand(beta1_opt, "--beta1");
                demand(beta2_opt, "--beta2");
                if (m == Method::kDualis) {
                    forbid(threshold_opt, "--activation-threshold");
                    s = NormalizationSpec::dualis(beta1, beta2);
                } else {
                    s = NormalizationSpec::dualdis(beta1, beta2, threshold);
                }
                break;
        }
        return s;
    }
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            if constexpr (std::is_same_v<T, double>) {
                out.push_back(std::stod(item, &used));
            } else {
                if (!item.empty() && item[0] == '-') throw std::invalid_argument("negative");
                out.push_back(static_cast<T>(std::stoull(item, &used)));
            }
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": bad list item \"" + item + "\"");
        }
        pos = comma + 1;
    }
    return out;
}

// ---- Subcommands ----------------------------------------------------------

struct ConvertCmd {
    std::string input;
    std::string output;
    bool normalize = true;

    void add(CLI::App* app) {
        app->add_option("--input", input, "TSV embedding dump")->required();
        app->add_option("--output", output, "EMB1 file to write")->required();
        app->add_option("--normalize", normalize, "Scale rows to unit L2 norm")->capture_default_str();
    }

    void run(std::ostream& out) const {
        const auto m = import_tsv(input, normalize);
        save_matrix(m, output);
        Json j;
        j["rows"] = m.rows();
        j["dim"] = m.dim();
        j["normalized"] = m.normalized();
        j["fingerprint"] = hex64(fingerprint(m));
        out << j.dump() << "\n";
    }
};

// Seeded reference subset, e.g. 20% of the training captions. The same seed
// gives nested subsets across fractions.
struct SubsetCmd {
    std::string input;
    std::string output;
    double fraction = 0.2;
    std::uint64_t seed = kDefaultSeed;

    void add(CLI::App* app) {
        app->add_option("--input", input, "EMB1 query pool")->required();
        app->add_option("--fraction", fraction, "Share of rows kept")->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--output", output, "EMB1 file to write")->required();
    }

    void run(std::ostream& out) const {
        if (!(fraction > 0.0 && fraction <= 1.0)) throw UsageError("--fraction must be in (0, 1]");
        const auto pool = load_matrix(input);
        const auto m = pool.select_rows(ablation_subset(pool.rows(), fraction, seed));
        save_matrix(m, output);
        Json j;
        j["rows"] = m.rows();
        j["pool_rows"] = pool.rows();
        j["fingerprint"] = hex64(fingerprint(m));
        out << j.dump() << "\n";
    }
};

struct BiasCmd {
    std::string candidates;
    std::string reference;
    std::string output;
    double alpha = 0.0;
    std::size_t k = 1;
    std::uint64_t seed = kDefaultSeed;
    IndexFlags index;

    void add(CLI::App* app) {
        app->add_option("--candidates", candidates, "EMB1 candidates")->required();
        app->add_option("--reference", reference, "EMB1 reference queries")->required();
        app->add_option("--alpha", alpha, "Bias scale")->required()->check(CLI::NonNegativeNumber);
        app->add_option("--k", k, "Nearest reference queries per candidate")
            ->required()
            ->check(CLI::PositiveNumber);
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--output", output, "BIA1 file to write")->required();
        index.add(app);
    }

    void run(std::ostream& out, std::ostream& err) const {
        const auto cands = load_matrix(candidates);
        const auto refs = load_matrix(reference);
        NNN_CHECK(refs.rows() >= 1, ErrorCode::kEmptyReferenceSet, "reference file has no rows");
        const auto params = index.params(seed);
        const auto ref_index = params.build(refs);
        const auto bias = compute_bias(cands, refs, alpha, k, ref_index, params.nprobe);
        save_bias(bias, output);
        Json j;
        j["config"] = {{"alpha", alpha}, {"k", k}, {"index", index.config(seed)}};
        j["k_used"] = bias.k;
        j["n"] = bias.size();
        j["ref_fingerprint"] = hex64(bias.ref_fingerprint);
        Json warnings = Json::array();
        if (bias.k < k) {
            warnings.push_back("k clamped from " + std::to_string(k) + " to " + std::to_string(bias.k));
            err << "warning: " << warnings.back().get<std::string>() << "\n";
        }
        j["warnings"] = std::move(warnings);
        out << j.dump() << "\n";
    }
};

struct RetrieveCmd {
    std::string queries;
    std::string candidates;
    std::string reference;
    std::string reference_candidates;
    std::string bias_path;
    std::string output;
    std::size_t depth = 10;
    std::uint64_t seed = kDefaultSeed;
    bool augmented = false;
    MethodFlags method;
    IndexFlags index;

    void add(CLI::App* app) {
        app->add_option("--queries", queries, "EMB1 queries")->required();
        app->add_option("--candidates", candidates, "EMB1 candidates")->required();
        app->add_option("--reference", reference, "EMB1 reference queries");
        app->add_option("--reference-candidates", reference_candidates, "EMB1 reference candidates");
        app->add_option("--bias", bias_path, "Cached BIA1 bias for --method nnn");
        app->add_option("--depth", depth, "Hits kept per query")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--seed", seed)->capture_default_str();
        app->add_flag("--augmented", augmented, "nnn: search augmented embeddings through the index");
        app->add_option("--output", output, "JSON-lines ranking to write")->required();
        method.add(app);
        index.add(app);
    }

    void run(std::ostream& out, std::ostream& err) const {
        const auto q = load_matrix(queries);
        const auto c = load_matrix(candidates);
        std::optional<EmbeddingMatrix> rq;
        std::optional<EmbeddingMatrix> rc;
        std::optional<BiasVector> cached;
        if (!reference.empty()) rq = load_matrix(reference);
        if (!reference_candidates.empty()) rc = load_matrix(reference_candidates);
        if (!bias_path.empty()) {
            if (method.method != "nnn") throw UsageError("--bias only applies to --method nnn");
            cached = load_bias(bias_path);
        }
        if (augmented && method.method != "nnn") {
            throw UsageError("--augmented only applies to --method nnn");
        }
        const auto spec = method.spec(cached ? &*cached : nullptr);

        ApplyInputs in;
        in.queries = &q;
        in.candidates = &c;
        in.ref_queries = rq ? &*rq : nullptr;
        in.ref_candidates = rc ? &*rc : nullptr;
        in.bias = cached ? &*cached : nullptr;
        in.depth = depth;
        in.retrieval_index = index.params(seed);
        in.bias_index = index.params(seed);
        in.augmented = augmented;
        const auto result = apply(spec, in);
        write_file_atomic(output, to_jsonl(result.table));
        for (const auto& w : result.warnings) err << "warning: " << w << "\n";
        Json j;
        j["config"] = {{"method", to_json(spec)}, {"depth", depth}, {"augmented", augmented},
                       {"index", index.config(seed)}};
        j["n_queries"] = result.table.size();
        j["warnings"] = result.warnings;
        out << j.dump() << "\n";
    }
};

struct EvalCmd {
    std::string ranking;
    std::string truth;
    std::string baseline;
    std::string output;
    std::string k_list = "1,5,10";
    std::size_t bootstrap = 1000;
    double level = 0.95;
    std::uint64_t seed = kDefaultSeed;
    MethodFlags method;

    void add(CLI::App* app) {
        app->add_option("--ranking", ranking, "JSON-lines ranking")->required();
        app->add_option("--truth", truth, "TSV query_idx<TAB>cand_idx")->required();
        app->add_option("--k-list", k_list, "Comma-separated recall cutoffs")->capture_default_str();
        app->add_option("--bootstrap", bootstrap, "Bootstrap resamples (0 disables intervals)")
            ->capture_default_str();
        app->add_option("--level", level, "Interval coverage")->capture_default_str()->check(CLI::Range(0.0, 1.0));
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--baseline", baseline, "Raw ranking; adds its report and R@K deltas");
        app->add_option("--output", output, "RecallReport JSON to write")->required();
        method.add(app);
    }

    void run() const {
        const auto ks = parse_list<std::size_t>(k_list, "--k-list");
        for (std::size_t k : ks) {
            if (k == 0) throw UsageError("--k-list: cutoffs must be >= 1");
        }
        const auto spec = method.spec();
        const auto table = parse_jsonl(read_text_file(ranking));
        const auto gt = load_truth(truth);
        std::optional<BootstrapParams> bp;
        if (bootstrap > 0) bp = BootstrapParams{bootstrap, level, seed};
        const auto report = recall_report(table, gt, ks, bp, spec);
        Json j = to_json(report);
        if (!baseline.empty()) {
            const auto base = recall_report(parse_jsonl(read_text_file(baseline)), gt, ks, bp,
                                            NormalizationSpec::none());
            Json delta = Json::object();
            for (const auto& [k, r] : report.r_at) delta[std::to_string(k)] = r - base.r_at.at(k);
            j["baseline"] = to_json(base);
            j["delta"] = std::move(delta);
        }
        j["config"] = {{"k_list", ks}, {"bootstrap", bootstrap}, {"level", level}, {"seed", seed}};
        write_json(output, j);
    }
};

struct SweepCmd {
    std::string queries;
    std::string candidates;
    std::string reference;
    std::string truth;
    std::string reference_truth;
    std::string alphas;
    std::string ks;
    std::string output;
    std::uint64_t seed = kDefaultSeed;

    void add(CLI::App* app) {
        app->add_option("--queries", queries, "EMB1 validation queries (or test-set size source with --reference-truth)")
            ->required();
        app->add_option("--candidates", candidates, "EMB1 candidates")->required();
        app->add_option("--reference", reference, "EMB1 reference query pool")->required();
        app->add_option("--truth", truth, "TSV ground truth of --queries");
        app->add_option("--reference-truth", reference_truth,
                        "TSV ground truth of the reference pool; draws the validation split from it");
        app->add_option("--alphas", alphas, "Comma-separated alpha grid (default 0.25..1.5 step 0.125)");
        app->add_option("--ks", ks, "Comma-separated k grid (default 1,2,4,...,512)");
        app->add_option("--seed", seed, "Split seed")->capture_default_str();
        app->add_option("--output", output, "SweepResult JSON to write")->required();
    }

    void run() const {
        if (truth.empty() == reference_truth.empty()) {
            throw UsageError("sweep needs exactly one of --truth or --reference-truth");
        }
        const auto q = load_matrix(queries);
        const auto c = load_matrix(candidates);
        const auto r = load_matrix(reference);
        std::optional<GroundTruth> gt;
        std::optional<GroundTruth> rgt;
        if (!truth.empty()) gt = load_truth(truth);
        if (!reference_truth.empty()) rgt = load_truth(reference_truth);
        SweepInputs in;
        in.queries = &q;
        in.candidates = &c;
        in.ref_queries = &r;
        in.truth = gt ? &*gt : nullptr;
        in.reference_truth = rgt ? &*rgt : nullptr;
        in.split_seed = seed;
        if (!alphas.empty()) in.grid_alpha = parse_list<double>(alphas, "--alphas");
        if (!ks.empty()) in.grid_k = parse_list<std::size_t>(ks, "--ks");
        const auto result = sweep_nnn(in);
        Json j = to_json(result);
        j["config"] = {{"alphas", in.grid_alpha}, {"ks", in.grid_k}, {"seed", seed},
                       {"validation", rgt ? "reference_holdout" : "queries"}};
        write_json(output, j);
    }
};

struct AblateCmd {
    std::string queries;
    std::string candidates;
    std::string reference;
    std::string reference_candidates;
    std::string truth;
    std::string fractions = "0.1,0.2,0.5,1.0";
    std::string k_list = "1,5,10";
    std::string output;
    std::uint64_t seed = kDefaultSeed;
    MethodFlags method;

    void add(CLI::App* app) {
        app->add_option("--queries", queries, "EMB1 queries")->required();
        app->add_option("--candidates", candidates, "EMB1 candidates")->required();
        app->add_option("--reference", reference, "EMB1 reference query pool")->required();
        app->add_option("--reference-candidates", reference_candidates, "EMB1 reference candidates");
        app->add_option("--truth", truth, "TSV ground truth")->required();
        app->add_option("--fractions", fractions, "Comma-separated reference fractions")->capture_default_str();
        app->add_option("--k-list", k_list, "Comma-separated recall cutoffs")->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--output", output, "Ablation JSON to write")->required();
        method.add(app);
    }

    void run() const {
        const auto spec = method.spec();
        const auto q = load_matrix(queries);
        const auto c = load_matrix(candidates);
        const auto r = load_matrix(reference);
        std::optional<EmbeddingMatrix> rc;
        if (!reference_candidates.empty()) rc = load_matrix(reference_candidates);
        const auto gt = load_truth(truth);
        AblationInputs in;
        in.queries = &q;
        in.candidates = &c;
        in.ref_queries = &r;
        in.ref_candidates = rc ? &*rc : nullptr;
        in.truth = &gt;
        in.fractions = parse_list<double>(fractions, "--fractions");
        in.ks = parse_list<std::size_t>(k_list, "--k-list");
        in.seed = seed;
        Json j;
        j["points"] = to_json(ablate_reference(in, spec));
        j["config"] = {{"method", to_json(spec)}, {"fractions", in.fractions}, {"k_list", in.ks},
                       {"seed", seed}};
        write_json(output, j);
    }
};

struct DiagnoseCmd {
    std::string ranking;
    std::string compare;
    std::string candidates;
    std::string output;
    std::size_t n_candidates = 0;

    void add(CLI::App* app) {
        app->add_option("--ranking", ranking, "JSON-lines ranking")->required();
        auto* n = app->add_option("--n-candidates", n_candidates, "Number of candidates");
        auto* c = app->add_option("--candidates", candidates, "EMB1 candidates (instead of --n-candidates)");
        n->excludes(c);
        app->add_option("--compare", compare, "Second ranking; adds after-minus-before deltas");
        app->add_option("--output", output, "HubReport JSON to write")->required();
    }

    void run() {
        if (!candidates.empty()) n_candidates = load_matrix(candidates).rows();
        if (n_candidates == 0) throw UsageError("one of --n-candidates or --candidates is required");
        const auto before = hub_report(matched_counts(parse_jsonl(read_text_file(ranking)), n_candidates));
        Json j = to_json(before);
        if (!compare.empty()) {
            const auto after =
                hub_report(matched_counts(parse_jsonl(read_text_file(compare)), n_candidates));
            j["compare"] = to_json(after);
            j["deltas"] = to_json(compare_reports(before, after));
        }
        j["config"] = {{"n_candidates", n_candidates}};
        write_json(output, j);
    }
};

struct BiasAttrCmd {
    std::string ranking;
    std::string labels;
    std::string query_groups;
    std::string output;
    std::size_t n = 10;

    void add(CLI::App* app) {
        app->add_option("--ranking", ranking, "JSON-lines ranking")->required();
        app->add_option("--labels", labels, "TSV cand_idx<TAB>A|B<TAB>group")->required();
        app->add_option("--query-groups", query_groups, "TSV query_idx<TAB>group");
        app->add_option("--n", n, "Top-n cutoff")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--output", output, "Attribute bias JSON to write")->required();
    }

    void run() const {
        const auto table = parse_jsonl(read_text_file(ranking));
        const auto lab = load_labels(labels);
        std::optional<QueryGroups> groups;
        if (!query_groups.empty()) groups = load_query_groups(query_groups);
        Json j = to_json(attribute_bias(table, lab, n, groups ? &*groups : nullptr));
        if (groups) j["precision"] = attribute_precision(table, lab, *groups, n);
        j["config"] = {{"n", n}};
        write_json(output, j);
    }
};

struct BenchCmd {
    std::string candidates;
    std::string reference;
    std::string queries;
    std::string truth;
    std::string output;
    double alpha = 0.75;
    std::size_t k = 16;
    std::uint64_t seed = kDefaultSeed;
    std::size_t nprobe = kDefaultNprobe;
    std::size_t ncentroids = 0;
    std::size_t kmeans_iters = kDefaultKmeansIters;

    void add(CLI::App* app) {
        app->add_option("--candidates", candidates, "EMB1 candidates")->required();
        app->add_option("--reference", reference, "EMB1 reference queries")->required();
        app->add_option("--queries", queries, "EMB1 test queries (adds R@1 comparison)");
        app->add_option("--truth", truth, "TSV ground truth of --queries");
        app->add_option("--alpha", alpha)->capture_default_str();
        app->add_option("--k", k)->capture_default_str();
        app->add_option("--nprobe", nprobe)->capture_default_str();
        app->add_option("--ncentroids", ncentroids, "Inverted lists (default ceil(sqrt(rows)))");
        app->add_option("--kmeans-iters", kmeans_iters)->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--output", output, "Timing report JSON to write")->required();
    }

    void run() const {
        if (queries.empty() != truth.empty()) throw UsageError("--queries and --truth go together");
        const auto c = load_matrix(candidates);
        const auto r = load_matrix(reference);
        using Clock = std::chrono::steady_clock;
        auto seconds = [](Clock::time_point a, Clock::time_point b) {
            return std::chrono::duration<double>(b - a).count();
        };

        const auto t0 = Clock::now();
        const auto exhaustive = compute_bias_exact(c, r, alpha, k);
        const auto t1 = Clock::now();
        IndexParams ivf;
        ivf.exact = false;
        ivf.ncentroids = ncentroids;
        ivf.kmeans_iters = kmeans_iters;
        ivf.seed = seed;
        ivf.nprobe = nprobe;
        const auto index = ivf.build(r);
        const auto t2 = Clock::now();
        const auto approx = compute_bias(c, r, alpha, k, index, nprobe);
        const auto t3 = Clock::now();

        double max_delta = 0.0;
        for (std::size_t i = 0; i < exhaustive.size(); ++i) {
            max_delta = std::max(max_delta, std::abs(static_cast<double>(exhaustive.values[i]) -
                                                     static_cast<double>(approx.values[i])));
        }
        Json timing;
        timing["exhaustive_seconds"] = seconds(t0, t1);
        timing["index_build_seconds"] = seconds(t1, t2);
        timing["index_search_seconds"] = seconds(t2, t3);
        timing["index_seconds"] = seconds(t1, t3);
        timing["speedup"] = seconds(t0, t1) / std::max(seconds(t1, t3), 1e-12);
        Json j;
        j["timing"] = std::move(timing);
        j["max_abs_delta"] = max_delta;
        if (!queries.empty()) {
            const auto q = load_matrix(queries);
            const auto gt = load_truth(truth);
            auto r1 = [&](const BiasVector& b) {
                ApplyInputs in;
                in.queries = &q;
                in.candidates = &c;
                in.bias = &b;
                in.depth = 1;
                return recall_at_k(apply(NormalizationSpec::nnn(alpha, k), in).table, gt, 1);
            };
            const double r_exh = r1(exhaustive);
            const double r_idx = r1(approx);
            j["recall_at_1"] = {{"exhaustive", r_exh}, {"index", r_idx}, {"delta", r_idx - r_exh}};
        }
        j["config"] = {{"alpha", alpha}, {"k", k}, {"nprobe", nprobe},
                       {"ncentroids", index.ncentroids()}, {"kmeans_iters", kmeans_iters},
                       {"seed", seed}, {"candidates", c.rows()}, {"reference", r.rows()},
                       {"dim", c.dim()}, {"threads", omp_get_max_threads()}};
        write_json(output, j);
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nearest neighbor normalization for embedding retrieval", "nnn"};
    app.require_subcommand(1);

    ConvertCmd convert;
    SubsetCmd subset;
    BiasCmd bias;
    RetrieveCmd retrieve;
    EvalCmd eval;
    SweepCmd sweep;
    AblateCmd ablate;
    DiagnoseCmd diagnose;
    BiasAttrCmd bias_attr;
    BenchCmd bench;

    auto* convert_app = app.add_subcommand("convert", "TSV embeddings to EMB1");
    convert.add(convert_app);
    auto* subset_app = app.add_subcommand("subset", "Seeded fraction of an EMB1 query pool");
    subset.add(subset_app);
    auto* bias_app = app.add_subcommand("bias", "Compute and cache per-candidate bias (BIA1)");
    bias.add(bias_app);
    auto* retrieve_app = app.add_subcommand("retrieve", "Rank candidates for every query");
    retrieve.add(retrieve_app);
    auto* eval_app = app.add_subcommand("eval", "Recall@K with bootstrap intervals");
    eval.add(eval_app);
    auto* sweep_app = app.add_subcommand("sweep", "Grid search of nnn alpha and k by R@1");
    sweep.add(sweep_app);
    auto* ablate_app = app.add_subcommand("ablate", "Recall with nested reference subsets");
    ablate.add(ablate_app);
    auto* diagnose_app = app.add_subcommand("diagnose", "Hubness statistics of a ranking");
    diagnose.add(diagnose_app);
    auto* bias_attr_app = app.add_subcommand("bias-attr", "Attribute bias and group precision");
    bias_attr.add(bias_attr_app);
    auto* bench_app = app.add_subcommand("bench", "Time exhaustive vs index-based bias computation");
    bench.add(bench_app);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        apply_thread_env();
        if (convert_app->parsed()) convert.run(out);
        else if (subset_app->parsed()) subset.run(out);
        else if (bias_app->parsed()) bias.run(out, err);
        else if (retrieve_app->parsed()) retrieve.run(out, err);
        else if (eval_app->parsed()) eval.run();
        else if (sweep_app->parsed()) sweep.run();
        else if (ablate_app->parsed()) ablate.run();
        else if (diagnose_app->parsed()) diagnose.run();
        else if (bias_attr_app->parsed()) bias_attr.run();
        else if (bench_app->parsed()) bench.run();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}

}  // namespace nnn::cli
