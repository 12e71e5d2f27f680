// station-pulse command line. Talks to the library exclusively through the
// C API in station_pulse.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "station_pulse.h"

namespace {

void print_warnings() {
    const char* w = sp_last_warnings();
    if (w && *w) std::fprintf(stderr, "warning: %s\n", w);
}

[[noreturn]] void die(sp_status status) {
    std::fprintf(stderr, "error: %s\n", sp_last_error());
    std::exit(status == SP_OK ? 1 : static_cast<int>(status));
}

void check(sp_status status) {
    print_warnings();
    if (status != SP_OK) die(status);
}

sp_normalization parse_normalization(const std::string& s) {
    if (s == "min_max") return SP_NORM_MIN_MAX;
    if (s == "storage_fraction") return SP_NORM_STORAGE_FRACTION;
    if (s == "z_score") return SP_NORM_Z_SCORE;
    std::fprintf(stderr, "error: unknown normalization '%s'\n", s.c_str());
    std::exit(SP_ERROR_PARAMETER);
}

sp_metric parse_metric(const std::string& s) {
    if (s == "cid") return SP_METRIC_CID;
    if (s == "euclidean") return SP_METRIC_EUCLIDEAN;
    std::fprintf(stderr, "error: unknown metric '%s'\n", s.c_str());
    std::exit(SP_ERROR_PARAMETER);
}

sp_cluster_algo parse_algo(const std::string& s) {
    if (s == "kmeans") return SP_ALGO_KMEANS;
    if (s == "kmedoids") return SP_ALGO_KMEDOIDS;
    std::fprintf(stderr, "error: unknown algorithm '%s'\n", s.c_str());
    std::exit(SP_ERROR_PARAMETER);
}

struct SchemeSpec {
    sp_weight_scheme scheme = SP_WEIGHTS_INVERSE_DISTANCE;
    int knn_k = 0;
};

SchemeSpec parse_scheme(const std::string& s) {
    SchemeSpec spec;
    if (s == "inverse_distance") return spec;
    if (s.rfind("knn:", 0) == 0) {
        spec.scheme = SP_WEIGHTS_KNN;
        spec.knn_k = std::atoi(s.c_str() + 4);
        return spec;
    }
    std::fprintf(stderr, "error: unknown scheme '%s' (inverse_distance or knn:<k>)\n", s.c_str());
    std::exit(SP_ERROR_PARAMETER);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string current;
    for (char c : s) {
        if (c == sep) {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

using DatasetPtr = std::unique_ptr<sp_dataset, decltype(&sp_dataset_free)>;

DatasetPtr read_dataset(const std::string& path) {
    sp_dataset* ds = nullptr;
    check(sp_dataset_read_json(path.c_str(), &ds));
    return DatasetPtr(ds, &sp_dataset_free);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hourly station capacity analytics: ingest, impute/normalize, "
                 "complexity-invariant clustering, Moran's I validation, reporting"};
    app.set_version_flag("--version", sp_version());
    app.require_subcommand(1);

    // ---- ingest ----
    std::string in_readings, in_meta, in_exclude, in_out, in_grid_start;
    std::uint64_t in_hours = 0;
    CLI::App* ingest = app.add_subcommand("ingest", "Load readings + metadata CSVs");
    ingest->add_option("--readings", in_readings, "readings CSV")->required();
    ingest->add_option("--meta", in_meta, "station metadata CSV")->required();
    ingest->add_option("--exclude", in_exclude, "comma-separated station ids to drop");
    ingest->add_option("--grid-start", in_grid_start, "grid start (UTC, default: infer)");
    ingest->add_option("--hours", in_hours, "grid length in hours (with --grid-start)");
    ingest->add_option("--out", in_out, "output dataset.json")->required();

    // ---- preprocess ----
    std::string pp_in, pp_out, pp_norm = "min_max";
    CLI::App* preprocess = app.add_subcommand("preprocess", "Impute gaps and normalize");
    preprocess->add_option("--in", pp_in, "input dataset.json")->required();
    preprocess->add_option("--normalize", pp_norm, "min_max|storage_fraction|z_score");
    preprocess->add_option("--out", pp_out, "output dataset.json")->required();

    // ---- distance ----
    std::string d_in, d_out, d_metric = "cid";
    CLI::App* distance = app.add_subcommand("distance", "Pairwise distance matrix");
    distance->add_option("--in", d_in, "input dataset.json")->required();
    distance->add_option("--metric", d_metric, "cid|euclidean");
    distance->add_option("--out", d_out, "output matrix.csv")->required();

    // ---- cluster ----
    std::string c_in, c_out, c_metric = "cid", c_k = "auto", c_range, c_algo = "kmeans";
    std::uint64_t c_seed = 42;
    int c_max_iter = 300;
    CLI::App* cluster = app.add_subcommand("cluster", "Cluster stations by behavior");
    cluster->add_option("--in", c_in, "input dataset.json")->required();
    cluster->add_option("--metric", c_metric, "cid|euclidean");
    cluster->add_option("--k", c_k, "cluster count, or 'auto' for silhouette selection");
    cluster->add_option("--k-range", c_range, "k_min:k_max for --k auto (default 2:min(10,n-1))");
    cluster->add_option("--algo", c_algo, "kmeans|kmedoids");
    cluster->add_option("--seed", c_seed, "RNG seed");
    cluster->add_option("--max-iter", c_max_iter, "iteration cap");
    cluster->add_option("--out", c_out, "output clusters.json")->required();

    // ---- spatial ----
    std::string s_in, s_out, s_scheme = "inverse_distance", s_snapshots = "every:220";
    int s_perms = 999;
    std::uint64_t s_seed = 42;
    bool s_no_row = false;
    CLI::App* spatial = app.add_subcommand("spatial", "Moran's I spatial independence check");
    spatial->add_option("--in", s_in, "input dataset.json")->required();
    spatial->add_option("--scheme", s_scheme, "inverse_distance|knn:<k>");
    spatial->add_option("--snapshots", s_snapshots,
                        "grid indices i,j,k | every:<stride> | mean");
    spatial->add_option("--perms", s_perms, "permutation count");
    spatial->add_option("--seed", s_seed, "RNG seed");
    spatial->add_flag("--no-row-standardize", s_no_row, "keep raw weights");
    spatial->add_option("--out", s_out, "output moran.json")->required();

    // ---- synth ----
    std::string sy_kinds = "reliable:8,overstressed:8,connector:8,cryo:8", sy_out, sy_labels,
                sy_grid_start;
    std::uint64_t sy_hours = 2208, sy_seed = 7;
    double sy_noise = 0.05;
    CLI::App* synth = app.add_subcommand("synth", "Generate labeled archetype benchmark data");
    synth->add_option("--kinds", sy_kinds, "kind:count list");
    synth->add_option("--hours", sy_hours, "grid length in hours");
    synth->add_option("--noise", sy_noise, "Gaussian noise sigma");
    synth->add_option("--seed", sy_seed, "RNG seed");
    synth->add_option("--grid-start", sy_grid_start, "grid start (UTC)");
    synth->add_option("--out", sy_out, "output dataset.json")->required();
    synth->add_option("--labels", sy_labels, "ground-truth labels CSV");

    // ---- report ----
    std::string r_dataset, r_clusters, r_moran, r_annotations, r_json, r_plot;
    CLI::App* report = app.add_subcommand("report", "Assemble report.json + plotdata.csv");
    report->add_option("--dataset", r_dataset, "dataset.json")->required();
    report->add_option("--clusters", r_clusters, "clusters.json")->required();
    report->add_option("--moran", r_moran, "moran.json");
    report->add_option("--annotations", r_annotations, "station_id,label CSV");
    report->add_option("--out-json", r_json, "output report.json")->required();
    report->add_option("--out-plot", r_plot, "output plotdata.csv")->required();

    // ---- run ----
    std::string run_readings, run_meta, run_exclude, run_annotations, run_out_dir,
        run_norm = "min_max", run_metric = "cid", run_algo = "kmeans", run_k = "auto",
        run_range, run_scheme = "inverse_distance";
    int run_perms = 999, run_snapshots = 10, run_max_iter = 300;
    std::uint64_t run_seed = 42;
    CLI::App* run = app.add_subcommand("run", "Full pipeline with defaults");
    run->add_option("--readings", run_readings, "readings CSV")->required();
    run->add_option("--meta", run_meta, "station metadata CSV")->required();
    run->add_option("--exclude", run_exclude, "comma-separated station ids to drop");
    run->add_option("--normalize", run_norm, "min_max|storage_fraction|z_score");
    run->add_option("--metric", run_metric, "cid|euclidean");
    run->add_option("--algo", run_algo, "kmeans|kmedoids");
    run->add_option("--k", run_k, "cluster count or 'auto'");
    run->add_option("--k-range", run_range, "k_min:k_max for --k auto");
    run->add_option("--scheme", run_scheme, "inverse_distance|knn:<k>");
    run->add_option("--snapshot-count", run_snapshots, "evenly spaced Moran snapshots");
    run->add_option("--perms", run_perms, "permutation count");
    run->add_option("--seed", run_seed, "RNG seed");
    run->add_option("--annotations", run_annotations, "station_id,label CSV");
    run->add_option("--out-dir", run_out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (*ingest) {
        sp_dataset* ds = nullptr;
        check(sp_dataset_load_csv(in_readings.c_str(), in_meta.c_str(),
                                  in_grid_start.empty() ? nullptr : in_grid_start.c_str(),
                                  in_hours, &ds));
        DatasetPtr guard(ds, &sp_dataset_free);
        if (!in_exclude.empty()) {
            const std::vector<std::string> ids = split(in_exclude, ',');
            std::vector<const char*> ptrs;
            for (const std::string& id : ids) ptrs.push_back(id.c_str());
            sp_dataset* filtered = nullptr;
            check(sp_dataset_exclude(ds, ptrs.data(), ptrs.size(), &filtered));
            guard.reset(filtered);
        }
        check(sp_dataset_write_json(guard.get(), in_out.c_str()));
        std::printf("wrote %s (%zu stations x %zu hours)\n", in_out.c_str(),
                    sp_dataset_station_count(guard.get()), sp_dataset_step_count(guard.get()));
    } else if (*preprocess) {
        DatasetPtr ds = read_dataset(pp_in);
        sp_dataset* out = nullptr;
        check(sp_dataset_preprocess(ds.get(), parse_normalization(pp_norm), &out));
        DatasetPtr guard(out, &sp_dataset_free);
        check(sp_dataset_write_json(out, pp_out.c_str()));
        std::printf("wrote %s (normalization: %s)\n", pp_out.c_str(), pp_norm.c_str());
    } else if (*distance) {
        DatasetPtr ds = read_dataset(d_in);
        sp_distance_matrix* m = nullptr;
        check(sp_distance_compute(ds.get(), parse_metric(d_metric), &m));
        std::unique_ptr<sp_distance_matrix, decltype(&sp_distance_free)> guard(
            m, &sp_distance_free);
        check(sp_distance_write_csv(m, d_out.c_str()));
        std::printf("wrote %s (%zu x %zu, metric: %s)\n", d_out.c_str(), sp_distance_size(m),
                    sp_distance_size(m), d_metric.c_str());
    } else if (*cluster) {
        DatasetPtr ds = read_dataset(c_in);
        sp_cluster_result* result = nullptr;
        if (c_k == "auto") {
            int k_min = 0, k_max = 0;
            if (!c_range.empty()) {
                const std::vector<std::string> range = split(c_range, ':');
                if (range.size() != 2) {
                    std::fprintf(stderr, "error: --k-range expects k_min:k_max\n");
                    return SP_ERROR_PARAMETER;
                }
                k_min = std::atoi(range[0].c_str());
                k_max = std::atoi(range[1].c_str());
            }
            check(sp_cluster_select_k(ds.get(), parse_algo(c_algo), parse_metric(c_metric),
                                      k_min, k_max, c_seed, c_max_iter, &result));
        } else {
            check(sp_cluster_fit(ds.get(), parse_algo(c_algo), parse_metric(c_metric),
                                 std::atoi(c_k.c_str()), c_seed, c_max_iter, &result));
        }
        std::unique_ptr<sp_cluster_result, decltype(&sp_cluster_free)> guard(result,
                                                                             &sp_cluster_free);
        check(sp_cluster_write_json(result, c_out.c_str()));
        double sil = 0.0;
        sp_cluster_mean_silhouette(result, &sil);
        std::printf("wrote %s (k=%d, mean silhouette %.4f)\n", c_out.c_str(),
                    sp_cluster_k(result), sil);
    } else if (*spatial) {
        DatasetPtr ds = read_dataset(s_in);
        const SchemeSpec scheme = parse_scheme(s_scheme);
        std::vector<std::uint64_t> snapshots;
        int mean_summary = 0;
        if (s_snapshots == "mean") {
            mean_summary = 1;
        } else if (s_snapshots.rfind("every:", 0) == 0) {
            const long stride = std::atol(s_snapshots.c_str() + 6);
            if (stride < 1) {
                std::fprintf(stderr, "error: bad stride in '%s'\n", s_snapshots.c_str());
                return SP_ERROR_PARAMETER;
            }
            for (std::uint64_t i = 0; i < sp_dataset_step_count(ds.get());
                 i += static_cast<std::uint64_t>(stride))
                snapshots.push_back(i);
        } else {
            for (const std::string& tok : split(s_snapshots, ','))
                snapshots.push_back(static_cast<std::uint64_t>(std::atoll(tok.c_str())));
        }
        sp_moran_result_set* result = nullptr;
        check(sp_spatial_scan(ds.get(), scheme.scheme, scheme.knn_k, s_no_row ? 0 : 1,
                              snapshots.data(), snapshots.size(), mean_summary, s_perms, s_seed,
                              &result));
        std::unique_ptr<sp_moran_result_set, decltype(&sp_spatial_free)> guard(
            result, &sp_spatial_free);
        check(sp_spatial_write_json(result, s_out.c_str()));
        std::printf("wrote %s (%zu Moran results)\n", s_out.c_str(),
                    sp_spatial_result_count(result));
    } else if (*synth) {
        sp_dataset* ds = nullptr;
        check(sp_synth_generate(sy_kinds.c_str(), sy_hours, sy_noise, sy_seed,
                                sy_grid_start.empty() ? nullptr : sy_grid_start.c_str(),
                                sy_labels.empty() ? nullptr : sy_labels.c_str(), &ds));
        DatasetPtr guard(ds, &sp_dataset_free);
        check(sp_dataset_write_json(ds, sy_out.c_str()));
        std::printf("wrote %s (%zu stations x %zu hours)\n", sy_out.c_str(),
                    sp_dataset_station_count(ds), sp_dataset_step_count(ds));
    } else if (*report) {
        check(sp_report_emit(r_dataset.c_str(), r_clusters.c_str(),
                             r_moran.empty() ? nullptr : r_moran.c_str(),
                             r_annotations.empty() ? nullptr : r_annotations.c_str(),
                             r_json.c_str(), r_plot.c_str()));
        std::printf("wrote %s and %s\n", r_json.c_str(), r_plot.c_str());
    } else if (*run) {
        sp_run_options options;
        sp_run_options_init(&options);
        options.readings_path = run_readings.c_str();
        options.meta_path = run_meta.c_str();
        options.exclude_ids = run_exclude.empty() ? nullptr : run_exclude.c_str();
        options.annotations_csv = run_annotations.empty() ? nullptr : run_annotations.c_str();
        options.normalization = parse_normalization(run_norm);
        options.metric = parse_metric(run_metric);
        options.algo = parse_algo(run_algo);
        if (run_k != "auto") {
            options.k = std::atoi(run_k.c_str());
        } else if (!run_range.empty()) {
            const std::vector<std::string> range = split(run_range, ':');
            if (range.size() != 2) {
                std::fprintf(stderr, "error: --k-range expects k_min:k_max\n");
                return SP_ERROR_PARAMETER;
            }
            options.k_min = std::atoi(range[0].c_str());
            options.k_max = std::atoi(range[1].c_str());
        }
        const SchemeSpec scheme = parse_scheme(run_scheme);
        options.scheme = scheme.scheme;
        options.knn_k = scheme.knn_k > 0 ? scheme.knn_k : options.knn_k;
        options.n_snapshots = run_snapshots;
        options.n_permutations = run_perms;
        options.max_iter = run_max_iter;
        options.seed = run_seed;
        check(sp_run_pipeline(&options, run_out_dir.c_str()));
        std::printf("pipeline outputs written to %s\n", run_out_dir.c_str());
    }
    return 0;
}
