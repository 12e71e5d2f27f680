#include "station_pulse.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "station_pulse/cluster.hpp"
#include "station_pulse/csv.hpp"
#include "station_pulse/dataset.hpp"
#include "station_pulse/distance.hpp"
#include "station_pulse/error.hpp"
#include "station_pulse/ingest.hpp"
#include "station_pulse/json_io.hpp"
#include "station_pulse/preprocess.hpp"
#include "station_pulse/report.hpp"
#include "station_pulse/spatial.hpp"
#include "station_pulse/synth.hpp"

using namespace stationpulse;

struct sp_dataset {
    Dataset ds;
};
struct sp_distance_matrix {
    DistanceMatrix m;
};
struct sp_cluster_result {
    ClusterRun run;
};
struct sp_moran_result_set {
    SpatialRun run;
    TimeGrid grid;
    std::vector<sp_moran_stat> flat;  // scan results, then the summary if any
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_warnings;

sp_status status_from(ErrorCode code) {
    switch (code) {
        case ErrorCode::io: return SP_ERROR_IO;
        case ErrorCode::parse: return SP_ERROR_PARSE;
        case ErrorCode::validation: return SP_ERROR_VALIDATION;
        case ErrorCode::referential: return SP_ERROR_REFERENTIAL;
        case ErrorCode::empty_input: return SP_ERROR_EMPTY_INPUT;
        case ErrorCode::parameter: return SP_ERROR_PARAMETER;
        case ErrorCode::degenerate: return SP_ERROR_DEGENERATE;
        case ErrorCode::shape: return SP_ERROR_SHAPE;
        case ErrorCode::length: return SP_ERROR_LENGTH;
        case ErrorCode::all_missing: return SP_ERROR_ALL_MISSING;
        case ErrorCode::consistency: return SP_ERROR_CONSISTENCY;
        case ErrorCode::internal: return SP_ERROR_INTERNAL;
    }
    return SP_ERROR_INTERNAL;
}

void set_warnings(const std::vector<std::string>& warnings) {
    g_last_warnings.clear();
    for (const std::string& w : warnings) {
        if (!g_last_warnings.empty()) g_last_warnings += '\n';
        g_last_warnings += w;
    }
}

template <class Fn>
sp_status guarded(Fn&& fn) {
    g_last_error.clear();
    g_last_warnings.clear();
    try {
        fn();
        return SP_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_from(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SP_ERROR_INTERNAL;
    }
}

sp_status require_arg(bool ok, const char* message) {
    if (ok) return SP_OK;
    g_last_error = message;
    return SP_ERROR_PARAMETER;
}

NormalizationMethod to_method(sp_normalization m) {
    switch (m) {
        case SP_NORM_STORAGE_FRACTION: return NormalizationMethod::storage_fraction;
        case SP_NORM_Z_SCORE: return NormalizationMethod::z_score;
        case SP_NORM_MIN_MAX:
        default: return NormalizationMethod::min_max;
    }
}

Metric to_metric(sp_metric m) {
    return m == SP_METRIC_EUCLIDEAN ? Metric::euclidean : Metric::cid;
}

std::vector<std::string> split_commas(const char* s) {
    std::vector<std::string> out;
    if (!s) return out;
    std::string current;
    for (const char* p = s;; ++p) {
        if (*p == ',' || *p == '\0') {
            if (!current.empty()) out.push_back(current);
            current.clear();
            if (*p == '\0') break;
        } else {
            current.push_back(*p);
        }
    }
    return out;
}

/// Builds the silhouette-bearing ClusterRun for a fixed-k fit. k = 1 has no
/// silhouette; it is reported as all-zero with a warning.
ClusterRun make_run(const Dataset& ds, const DistanceMatrix& dm, ClusterModel&& model,
                    std::vector<std::string>* warnings) {
    ClusterRun run;
    run.station_ids = dm.ids;
    if (model.k >= 2) {
        run.silhouette = silhouette(dm, model.assignments);
    } else {
        run.silhouette.per_station.assign(model.assignments.size(), 0.0);
        run.silhouette.mean = 0.0;
        run.silhouette.k = 1;
        if (warnings) warnings->push_back("silhouette is undefined for k=1; reported as 0");
    }
    run.score_table = {{model.k, run.silhouette.mean}};
    run.model = std::move(model);
    return run;
}

std::vector<std::size_t> even_snapshots(std::size_t n_steps, int count) {
    std::vector<std::size_t> out;
    if (count < 1) return out;
    if (count == 1) {
        out.push_back(0);
        return out;
    }
    for (int t = 0; t < count; ++t) {
        const double pos = static_cast<double>(t) * static_cast<double>(n_steps - 1) /
                           static_cast<double>(count - 1);
        const std::size_t idx = static_cast<std::size_t>(pos + 0.5);
        if (out.empty() || out.back() != idx) out.push_back(idx);
    }
    return out;
}

ClusterRun fit_cluster_run(const Dataset& ds, ClusterAlgo algo, Metric metric, int k,
                           int k_min, int k_max, std::uint64_t seed, int max_iter,
                           std::vector<std::string>* warnings) {
    if (k > 0) {
        const DistanceMatrix dm = pairwise_matrix(ds, metric);
        ClusterModel model = algo == ClusterAlgo::kmeans
                                 ? kmeans_fit(ds, k, seed, metric, max_iter)
                                 : kmedoids_fit(ds, metric, k, seed, max_iter);
        return make_run(ds, dm, std::move(model), warnings);
    }
    const std::size_t n = ds.stations.size();
    if (k_max <= 0) k_max = static_cast<int>(std::min<std::size_t>(10, n - 1));
    if (k_min < 2) k_min = 2;
    KSelection sel = select_k(ds, k_min, k_max, seed, metric, algo, max_iter);
    const DistanceMatrix dm = pairwise_matrix(ds, metric);
    ClusterRun run;
    run.station_ids = dm.ids;
    run.silhouette = silhouette(dm, sel.best.assignments);
    run.score_table = std::move(sel.scores);
    run.model = std::move(sel.best);
    return run;
}

}  // namespace

const char* sp_version(void) { return kToolVersion; }
const char* sp_last_error(void) { return g_last_error.c_str(); }
const char* sp_last_warnings(void) { return g_last_warnings.c_str(); }

sp_status sp_dataset_load_csv(const char* readings_path, const char* meta_path,
                              const char* grid_start_utc, uint64_t n_steps, sp_dataset** out) {
    if (sp_status s = require_arg(readings_path && meta_path && out, "null argument"); s != SP_OK)
        return s;
    return guarded([&] {
        std::optional<TimeGrid> grid;
        if (grid_start_utc)
            grid = make_grid(parse_time_utc(grid_start_utc), static_cast<std::size_t>(n_steps));
        std::vector<std::string> warnings;
        Dataset ds = load_readings(readings_path, meta_path, grid, &warnings);
        set_warnings(warnings);
        *out = new sp_dataset{std::move(ds)};
    });
}

sp_status sp_dataset_read_json(const char* path, sp_dataset** out) {
    if (sp_status s = require_arg(path && out, "null argument"); s != SP_OK) return s;
    return guarded([&] { *out = new sp_dataset{dataset_from_json(read_json_file(path))}; });
}

sp_status sp_dataset_write_json(const sp_dataset* ds, const char* path) {
    if (sp_status s = require_arg(ds && path, "null argument"); s != SP_OK) return s;
    return guarded([&] { write_json_file(dataset_to_json(ds->ds), path); });
}

sp_status sp_dataset_write_csv(const sp_dataset* ds, const char* readings_path,
                               const char* meta_path) {
    if (sp_status s = require_arg(ds && readings_path && meta_path, "null argument"); s != SP_OK)
        return s;
    return guarded([&] { write_dataset_csv(ds->ds, readings_path, meta_path); });
}

sp_status sp_dataset_exclude(const sp_dataset* ds, const char* const* ids, size_t n_ids,
                             sp_dataset** out) {
    if (sp_status s = require_arg(ds && out && (n_ids == 0 || ids), "null argument"); s != SP_OK)
        return s;
    return guarded([&] {
        std::vector<std::string> list(ids, ids + n_ids);
        std::vector<std::string> unknown;
        Dataset result = exclude_stations(ds->ds, list, &unknown);
        std::vector<std::string> warnings;
        for (const std::string& id : unknown)
            warnings.push_back("unknown station id '" + id + "' ignored");
        set_warnings(warnings);
        *out = new sp_dataset{std::move(result)};
    });
}

sp_status sp_dataset_preprocess(const sp_dataset* ds, sp_normalization method,
                                sp_dataset** out) {
    if (sp_status s = require_arg(ds && out, "null argument"); s != SP_OK) return s;
    return guarded([&] {
        std::vector<std::string> warnings;
        Dataset result = preprocess_all(ds->ds, to_method(method), &warnings);
        set_warnings(warnings);
        *out = new sp_dataset{std::move(result)};
    });
}

size_t sp_dataset_station_count(const sp_dataset* ds) {
    return ds ? ds->ds.stations.size() : 0;
}

size_t sp_dataset_step_count(const sp_dataset* ds) { return ds ? ds->ds.grid.n_steps : 0; }

const char* sp_dataset_station_id(const sp_dataset* ds, size_t index) {
    if (!ds || index >= ds->ds.stations.size()) return nullptr;
    return ds->ds.stations[index].meta.station_id.c_str();
}

sp_status sp_dataset_values(const sp_dataset* ds, size_t index, const double** values,
                            size_t* n_values) {
    if (sp_status s = require_arg(ds && values && n_values, "null argument"); s != SP_OK)
        return s;
    if (index >= ds->ds.stations.size()) {
        g_last_error = "station index out of range";
        return SP_ERROR_PARAMETER;
    }
    *values = ds->ds.stations[index].values.data();
    *n_values = ds->ds.stations[index].values.size();
    return SP_OK;
}

void sp_dataset_free(sp_dataset* ds) { delete ds; }

sp_status sp_distance_compute(const sp_dataset* ds, sp_metric metric,
                              sp_distance_matrix** out) {
    if (sp_status s = require_arg(ds && out, "null argument"); s != SP_OK) return s;
    return guarded(
        [&] { *out = new sp_distance_matrix{pairwise_matrix(ds->ds, to_metric(metric))}; });
}

sp_status sp_distance_get(const sp_distance_matrix* m, size_t i, size_t j, double* out) {
    if (sp_status s = require_arg(m && out, "null argument"); s != SP_OK) return s;
    if (i >= m->m.n || j >= m->m.n) {
        g_last_error = "matrix index out of range";
        return SP_ERROR_PARAMETER;
    }
    *out = m->m.at(i, j);
    return SP_OK;
}

size_t sp_distance_size(const sp_distance_matrix* m) { return m ? m->m.n : 0; }

sp_status sp_distance_write_csv(const sp_distance_matrix* m, const char* path) {
    if (sp_status s = require_arg(m && path, "null argument"); s != SP_OK) return s;
    return guarded([&] { write_matrix_csv(m->m, path); });
}

void sp_distance_free(sp_distance_matrix* m) { delete m; }

sp_status sp_cluster_fit(const sp_dataset* ds, sp_cluster_algo algo, sp_metric metric, int k,
                         uint64_t seed, int max_iter, sp_cluster_result** out) {
    if (sp_status s = require_arg(ds && out, "null argument"); s != SP_OK) return s;
    return guarded([&] {
        std::vector<std::string> warnings;
        ClusterRun run = fit_cluster_run(
            ds->ds, algo == SP_ALGO_KMEDOIDS ? ClusterAlgo::kmedoids : ClusterAlgo::kmeans,
            to_metric(metric), k, 0, 0, seed, max_iter, &warnings);
        set_warnings(warnings);
        *out = new sp_cluster_result{std::move(run)};
    });
}

sp_status sp_cluster_fit_matrix(const sp_distance_matrix* m, int k, uint64_t seed, int max_iter,
                                sp_cluster_result** out) {
    if (sp_status s = require_arg(m && out, "null argument"); s != SP_OK) return s;
    return guarded([&] {
        ClusterModel model = kmedoids_fit(m->m, k, seed, max_iter);
        std::vector<std::string> warnings;
        ClusterRun run;
        run.station_ids = m->m.ids;
        if (model.k >= 2) {
            run.silhouette = silhouette(m->m, model.assignments);
        } else {
            run.silhouette.per_station.assign(model.assignments.size(), 0.0);
            run.silhouette.k = 1;
            warnings.push_back("silhouette is undefined for k=1; reported as 0");
        }
        run.score_table = {{model.k, run.silhouette.mean}};
        run.model = std::move(model);
        set_warnings(warnings);
        *out = new sp_cluster_result{std::move(run)};
    });
}

sp_status sp_cluster_select_k(const sp_dataset* ds, sp_cluster_algo algo, sp_metric metric,
                              int k_min, int k_max, uint64_t seed, int max_iter,
                              sp_cluster_result** out) {
    if (sp_status s = require_arg(ds && out, "null argument"); s != SP_OK) return s;
    return guarded([&] {
        ClusterRun run = fit_cluster_run(
            ds->ds, algo == SP_ALGO_KMEDOIDS ? ClusterAlgo::kmedoids : ClusterAlgo::kmeans,
            to_metric(metric), 0, k_min, k_max, seed, max_iter, nullptr);
        *out = new sp_cluster_result{std::move(run)};
    });
}

int sp_cluster_k(const sp_cluster_result* r) { return r ? r->run.model.k : 0; }

sp_status sp_cluster_assignments(const sp_cluster_result* r, const int32_t** out, size_t* n) {
    if (sp_status s = require_arg(r && out && n, "null argument"); s != SP_OK) return s;
    static_assert(sizeof(int) == sizeof(int32_t));
    *out = reinterpret_cast<const int32_t*>(r->run.model.assignments.data());
    *n = r->run.model.assignments.size();
    return SP_OK;
}

sp_status sp_cluster_mean_silhouette(const sp_cluster_result* r, double* out) {
    if (sp_status s = require_arg(r && out, "null argument"); s != SP_OK) return s;
    *out = r->run.silhouette.mean;
    return SP_OK;
}

sp_status sp_cluster_inertia(const sp_cluster_result* r, double* out) {
    if (sp_status s = require_arg(r && out, "null argument"); s != SP_OK) return s;
    *out = r->run.model.inertia;
    return SP_OK;
}

sp_status sp_cluster_write_json(const sp_cluster_result* r, const char* path) {
    if (sp_status s = require_arg(r && path, "null argument"); s != SP_OK) return s;
    return guarded([&] { write_json_file(cluster_run_to_json(r->run), path); });
}

void sp_cluster_free(sp_cluster_result* r) { delete r; }

namespace {

sp_moran_stat to_stat(const MoranResult& r) {
    sp_moran_stat s;
    s.snapshot = r.timestamp == MoranResult::npos ? UINT64_MAX
                                                  : static_cast<uint64_t>(r.timestamp);
    s.is_mean_summary = r.timestamp == MoranResult::npos ? 1 : 0;
    s.i_observed = r.i_observed;
    s.e_i = r.e_i;
    s.p_value = r.p_value;
    s.n_permutations = r.n_permutations;
    s.perm_mean = r.perm_mean;
    s.perm_sd = r.perm_sd;
    return s;
}

}  // namespace

sp_status sp_spatial_scan(const sp_dataset* ds, sp_weight_scheme scheme, int knn_k,
                          int row_standardize, const uint64_t* snapshots, size_t n_snapshots,
                          int include_mean_summary, int n_permutations, uint64_t seed,
                          sp_moran_result_set** out) {
    if (sp_status s = require_arg(ds && out && (n_snapshots == 0 || snapshots),
                                  "null argument");
        s != SP_OK)
        return s;
    if (sp_status s = require_arg(n_snapshots > 0 || include_mean_summary,
                                  "no snapshots requested");
        s != SP_OK)
        return s;
    return guarded([&] {
        std::vector<StationMeta> metas;
        metas.reserve(ds->ds.stations.size());
        for (const StationSeries& st : ds->ds.stations) metas.push_back(st.meta);
        const SpatialWeights w = build_weights(
            metas,
            scheme == SP_WEIGHTS_KNN ? WeightScheme::knn : WeightScheme::inverse_distance,
            knn_k, row_standardize != 0);

        SpatialRun run;
        run.scheme = w.scheme;
        run.knn_k = w.knn_k;
        run.row_standardized = w.row_standardized;
        run.n_permutations = n_permutations;
        run.seed = seed;
        if (n_snapshots > 0) {
            std::vector<std::size_t> indices(snapshots, snapshots + n_snapshots);
            run.scan = moran_scan(ds->ds, w, indices, n_permutations, seed);
        }
        if (include_mean_summary)
            run.scan.summary = moran_summary(ds->ds, w, n_permutations, seed);

        std::vector<std::string> warnings;
        for (std::size_t idx : run.scan.skipped)
            warnings.push_back("snapshot " + std::to_string(idx) +
                               " skipped: constant across stations");
        set_warnings(warnings);

        auto* set = new sp_moran_result_set;
        set->run = std::move(run);
        set->grid = ds->ds.grid;
        for (const MoranResult& r : set->run.scan.results) set->flat.push_back(to_stat(r));
        if (set->run.scan.summary) set->flat.push_back(to_stat(*set->run.scan.summary));
        *out = set;
    });
}

size_t sp_spatial_result_count(const sp_moran_result_set* r) { return r ? r->flat.size() : 0; }

sp_status sp_spatial_result(const sp_moran_result_set* r, size_t index, sp_moran_stat* out) {
    if (sp_status s = require_arg(r && out, "null argument"); s != SP_OK) return s;
    if (index >= r->flat.size()) {
        g_last_error = "result index out of range";
        return SP_ERROR_PARAMETER;
    }
    *out = r->flat[index];
    return SP_OK;
}

sp_status sp_spatial_write_json(const sp_moran_result_set* r, const char* path) {
    if (sp_status s = require_arg(r && path, "null argument"); s != SP_OK) return s;
    return guarded([&] { write_json_file(spatial_run_to_json(r->run, &r->grid), path); });
}

void sp_spatial_free(sp_moran_result_set* r) { delete r; }

sp_status sp_synth_generate(const char* kinds, uint64_t hours, double noise_sigma,
                            uint64_t seed, const char* grid_start_utc,
                            const char* labels_csv_path, sp_dataset** out) {
    if (sp_status s = require_arg(kinds && out, "null argument"); s != SP_OK) return s;
    return guarded([&] {
        const std::int64_t start =
            grid_start_utc ? parse_time_utc(grid_start_utc) : parse_time_utc("2018-10-01T00:00:00Z");
        const TimeGrid grid = make_grid(start, static_cast<std::size_t>(hours));

        std::vector<ArchetypeSpec> specs;
        for (const std::string& part : split_commas(kinds)) {
            const std::size_t colon = part.find(':');
            if (colon == std::string::npos)
                fail(ErrorCode::parameter,
                     "bad kinds entry '" + part + "' (expected kind:count)");
            ArchetypeSpec spec;
            spec.kind = archetype_from_name(part.substr(0, colon));
            const std::string count = part.substr(colon + 1);
            char* end = nullptr;
            const long n = std::strtol(count.c_str(), &end, 10);
            if (!end || *end != '\0' || n < 1)
                fail(ErrorCode::parameter, "bad series count '" + count + "'");
            spec.n_series = static_cast<std::size_t>(n);
            spec.noise_sigma = noise_sigma;
            spec.seed = seed;
            spec.grid = grid;
            specs.push_back(spec);
        }
        SynthResult result = benchmark_set(specs);

        if (labels_csv_path) {
            std::ofstream labels(labels_csv_path);
            if (!labels) fail(ErrorCode::io, std::string("cannot write '") + labels_csv_path + "'");
            labels << "station_id,label\n";
            for (std::size_t i = 0; i < result.dataset.stations.size(); ++i)
                labels << csv_escape(result.dataset.stations[i].meta.station_id) << ','
                       << result.label_names[static_cast<std::size_t>(result.labels[i])] << '\n';
            if (!labels.flush())
                fail(ErrorCode::io, std::string("write failed for '") + labels_csv_path + "'");
        }
        *out = new sp_dataset{std::move(result.dataset)};
    });
}

sp_status sp_report_emit(const char* dataset_json_path, const char* clusters_json_path,
                         const char* moran_json_path, const char* annotations_csv_path,
                         const char* out_report_json, const char* out_plot_csv) {
    if (sp_status s = require_arg(dataset_json_path && clusters_json_path && out_report_json &&
                                      out_plot_csv,
                                  "null argument");
        s != SP_OK)
        return s;
    return guarded([&] {
        const Dataset ds = dataset_from_json(read_json_file(dataset_json_path));
        const ClusterRun clusters = cluster_run_from_json(read_json_file(clusters_json_path));
        std::optional<SpatialRun> moran;
        if (moran_json_path)
            moran = spatial_run_from_json(read_json_file(moran_json_path));
        std::optional<std::map<int, std::string>> annotations;
        if (annotations_csv_path)
            annotations =
                annotate_clusters(clusters.model, clusters.station_ids, annotations_csv_path);
        emit_report(ds, clusters, moran, annotations, out_report_json, out_plot_csv);
    });
}

void sp_run_options_init(sp_run_options* options) {
    if (!options) return;
    std::memset(options, 0, sizeof(*options));
    options->normalization = SP_NORM_MIN_MAX;
    options->metric = SP_METRIC_CID;
    options->algo = SP_ALGO_KMEANS;
    options->k = 0;
    options->k_min = 2;
    options->k_max = 0;  // min(10, n-1)
    options->max_iter = 300;
    options->scheme = SP_WEIGHTS_INVERSE_DISTANCE;
    options->knn_k = 4;
    options->row_standardize = 1;
    options->n_snapshots = 10;
    options->n_permutations = 999;
    options->seed = 42;
}

sp_status sp_run_pipeline(const sp_run_options* options, const char* out_dir) {
    if (sp_status s = require_arg(options && out_dir, "null argument"); s != SP_OK) return s;
    if (sp_status s = require_arg(options->readings_path && options->meta_path,
                                  "readings_path and meta_path are required");
        s != SP_OK)
        return s;
    return guarded([&] {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        const std::string dir = std::string(out_dir) + "/";
        std::vector<std::string> warnings;

        Dataset raw = load_readings(options->readings_path, options->meta_path, std::nullopt,
                                    &warnings);
        const std::vector<std::string> exclusions = split_commas(options->exclude_ids);
        if (!exclusions.empty()) {
            std::vector<std::string> unknown;
            raw = exclude_stations(raw, exclusions, &unknown);
            for (const std::string& id : unknown)
                warnings.push_back("unknown station id '" + id + "' ignored");
        }

        Dataset ds = preprocess_all(raw, to_method(options->normalization), &warnings);
        write_json_file(dataset_to_json(ds), dir + "dataset.json");

        ClusterRun clusters = fit_cluster_run(
            ds,
            options->algo == SP_ALGO_KMEDOIDS ? ClusterAlgo::kmedoids : ClusterAlgo::kmeans,
            to_metric(options->metric), options->k, options->k_min, options->k_max,
            options->seed, options->max_iter, &warnings);
        write_json_file(cluster_run_to_json(clusters), dir + "clusters.json");

        std::vector<StationMeta> metas;
        metas.reserve(ds.stations.size());
        for (const StationSeries& st : ds.stations) metas.push_back(st.meta);
        const SpatialWeights w = build_weights(
            metas,
            options->scheme == SP_WEIGHTS_KNN ? WeightScheme::knn
                                              : WeightScheme::inverse_distance,
            options->knn_k, options->row_standardize != 0);
        SpatialRun moran;
        moran.scheme = w.scheme;
        moran.knn_k = w.knn_k;
        moran.row_standardized = w.row_standardized;
        moran.n_permutations = options->n_permutations;
        moran.seed = options->seed;
        moran.scan = moran_scan(ds, w, even_snapshots(ds.grid.n_steps, options->n_snapshots),
                                options->n_permutations, options->seed);
        moran.scan.summary = moran_summary(ds, w, options->n_permutations, options->seed);
        for (std::size_t idx : moran.scan.skipped)
            warnings.push_back("snapshot " + std::to_string(idx) +
                               " skipped: constant across stations");
        write_json_file(spatial_run_to_json(moran, &ds.grid), dir + "moran.json");

        std::optional<std::map<int, std::string>> annotations;
        if (options->annotations_csv)
            annotations = annotate_clusters(clusters.model, clusters.station_ids,
                                            options->annotations_csv);

        emit_report(ds, clusters, moran, annotations, dir + "report.json", dir + "plotdata.csv");
        set_warnings(warnings);
    });
}
