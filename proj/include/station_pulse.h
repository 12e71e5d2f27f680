/*
 * station-pulse C API.
 *
 * All state lives behind opaque handles; every fallible call returns an
 * sp_status and leaves a human-readable message in sp_last_error() (thread
 * local). Non-fatal notes (unknown exclusion ids, skipped snapshots,
 * normalization fallbacks) accumulate in sp_last_warnings(), reset by each
 * API call. Handles are freed with their matching *_free function.
 */
#ifndef STATION_PULSE_H
#define STATION_PULSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum sp_status {
    SP_OK = 0,
    SP_ERROR_IO = 1,
    SP_ERROR_PARSE = 2,
    SP_ERROR_VALIDATION = 3,
    SP_ERROR_REFERENTIAL = 4,
    SP_ERROR_EMPTY_INPUT = 5,
    SP_ERROR_PARAMETER = 6,
    SP_ERROR_DEGENERATE = 7,
    SP_ERROR_SHAPE = 8,
    SP_ERROR_LENGTH = 9,
    SP_ERROR_ALL_MISSING = 10,
    SP_ERROR_CONSISTENCY = 11,
    SP_ERROR_INTERNAL = 12
} sp_status;

typedef enum sp_normalization {
    SP_NORM_MIN_MAX = 0,
    SP_NORM_STORAGE_FRACTION = 1,
    SP_NORM_Z_SCORE = 2
} sp_normalization;

typedef enum sp_metric { SP_METRIC_CID = 0, SP_METRIC_EUCLIDEAN = 1 } sp_metric;

typedef enum sp_cluster_algo { SP_ALGO_KMEANS = 0, SP_ALGO_KMEDOIDS = 1 } sp_cluster_algo;

typedef enum sp_weight_scheme {
    SP_WEIGHTS_INVERSE_DISTANCE = 0,
    SP_WEIGHTS_KNN = 1
} sp_weight_scheme;

typedef struct sp_dataset sp_dataset;
typedef struct sp_distance_matrix sp_distance_matrix;
typedef struct sp_cluster_result sp_cluster_result;
typedef struct sp_moran_result_set sp_moran_result_set;

const char* sp_version(void);
/* Message from the most recent failing call on this thread ("" if none). */
const char* sp_last_error(void);
/* Newline-separated warnings from the most recent call ("" if none). */
const char* sp_last_warnings(void);

/* ---- dataset: ingest, serialization, preprocessing ---- */

/* Loads readings + metadata CSVs. Pass grid_start_utc = NULL (and n_steps =
 * 0) to infer the minimal grid from the data. */
sp_status sp_dataset_load_csv(const char* readings_path, const char* meta_path,
                              const char* grid_start_utc, uint64_t n_steps, sp_dataset** out);
sp_status sp_dataset_read_json(const char* path, sp_dataset** out);
sp_status sp_dataset_write_json(const sp_dataset* ds, const char* path);
sp_status sp_dataset_write_csv(const sp_dataset* ds, const char* readings_path,
                               const char* meta_path);
/* Drops the listed station ids; unknown ids become warnings. */
sp_status sp_dataset_exclude(const sp_dataset* ds, const char* const* ids, size_t n_ids,
                             sp_dataset** out);
/* Linear gap imputation followed by per-station normalization. */
sp_status sp_dataset_preprocess(const sp_dataset* ds, sp_normalization method,
                                sp_dataset** out);
size_t sp_dataset_station_count(const sp_dataset* ds);
size_t sp_dataset_step_count(const sp_dataset* ds);
/* Pointer into the dataset; valid until the handle is freed. NULL if out of
 * range. */
const char* sp_dataset_station_id(const sp_dataset* ds, size_t index);
sp_status sp_dataset_values(const sp_dataset* ds, size_t index, const double** values,
                            size_t* n_values);
void sp_dataset_free(sp_dataset* ds);

/* ---- pairwise distances ---- */

sp_status sp_distance_compute(const sp_dataset* ds, sp_metric metric,
                              sp_distance_matrix** out);
sp_status sp_distance_get(const sp_distance_matrix* m, size_t i, size_t j, double* out);
size_t sp_distance_size(const sp_distance_matrix* m);
sp_status sp_distance_write_csv(const sp_distance_matrix* m, const char* path);
void sp_distance_free(sp_distance_matrix* m);

/* ---- clustering ---- */

/* Fits with a fixed k. kmedoids computes the pairwise matrix internally. */
sp_status sp_cluster_fit(const sp_dataset* ds, sp_cluster_algo algo, sp_metric metric, int k,
                         uint64_t seed, int max_iter, sp_cluster_result** out);
sp_status sp_cluster_fit_matrix(const sp_distance_matrix* m, int k, uint64_t seed, int max_iter,
                                sp_cluster_result** out);
/* Fits every k in [k_min, k_max] with the same seed and keeps the k with the
 * best mean silhouette (ties to the smallest k). */
sp_status sp_cluster_select_k(const sp_dataset* ds, sp_cluster_algo algo, sp_metric metric,
                              int k_min, int k_max, uint64_t seed, int max_iter,
                              sp_cluster_result** out);
int sp_cluster_k(const sp_cluster_result* r);
sp_status sp_cluster_assignments(const sp_cluster_result* r, const int32_t** out, size_t* n);
sp_status sp_cluster_mean_silhouette(const sp_cluster_result* r, double* out);
sp_status sp_cluster_inertia(const sp_cluster_result* r, double* out);
sp_status sp_cluster_write_json(const sp_cluster_result* r, const char* path);
void sp_cluster_free(sp_cluster_result* r);

/* ---- spatial autocorrelation ---- */

typedef struct sp_moran_stat {
    uint64_t snapshot;        /* grid index; UINT64_MAX for the mean summary */
    int is_mean_summary;
    double i_observed;
    double e_i;               /* -1/(N-1) */
    double p_value;
    int n_permutations;
    double perm_mean;
    double perm_sd;
} sp_moran_stat;

/* Permutation-tested Moran's I at each snapshot index; constant snapshots
 * are skipped with a warning. include_mean_summary additionally tests each
 * station's mean value over the grid. */
sp_status sp_spatial_scan(const sp_dataset* ds, sp_weight_scheme scheme, int knn_k,
                          int row_standardize, const uint64_t* snapshots, size_t n_snapshots,
                          int include_mean_summary, int n_permutations, uint64_t seed,
                          sp_moran_result_set** out);
size_t sp_spatial_result_count(const sp_moran_result_set* r);
sp_status sp_spatial_result(const sp_moran_result_set* r, size_t index, sp_moran_stat* out);
sp_status sp_spatial_write_json(const sp_moran_result_set* r, const char* path);
void sp_spatial_free(sp_moran_result_set* r);

/* ---- synthetic benchmark data ---- */

/* kinds: comma-separated "kind:count" pairs, e.g.
 * "reliable:8,overstressed:8,connector:8,cryo:8". Kinds: reliable,
 * overstressed, connector, cryo (alias cryo_small_tank), downtime.
 * grid_start_utc NULL defaults to 2018-10-01T00:00:00Z. labels_csv_path may
 * be NULL; otherwise ground-truth labels are written as station_id,label. */
sp_status sp_synth_generate(const char* kinds, uint64_t hours, double noise_sigma,
                            uint64_t seed, const char* grid_start_utc,
                            const char* labels_csv_path, sp_dataset** out);

/* ---- report assembly ---- */

/* moran_json_path and annotations_csv_path may be NULL. */
sp_status sp_report_emit(const char* dataset_json_path, const char* clusters_json_path,
                         const char* moran_json_path, const char* annotations_csv_path,
                         const char* out_report_json, const char* out_plot_csv);

/* ---- end-to-end pipeline ---- */

typedef struct sp_run_options {
    const char* readings_path;
    const char* meta_path;
    const char* exclude_ids;     /* comma separated, may be NULL */
    const char* annotations_csv; /* may be NULL */
    sp_normalization normalization;
    sp_metric metric;
    sp_cluster_algo algo;
    int k;                       /* 0 selects k by silhouette over [k_min, k_max] */
    int k_min;
    int k_max;                   /* 0 defaults to min(10, n-1) */
    int max_iter;
    sp_weight_scheme scheme;
    int knn_k;
    int row_standardize;
    int n_snapshots;             /* evenly spaced over the grid */
    int n_permutations;
    uint64_t seed;
} sp_run_options;

void sp_run_options_init(sp_run_options* options);
/* Writes dataset.json, clusters.json, moran.json, report.json and
 * plotdata.csv into out_dir. */
sp_status sp_run_pipeline(const sp_run_options* options, const char* out_dir);

#if defined(__cplusplus)
}
#endif

#endif /* STATION_PULSE_H */
