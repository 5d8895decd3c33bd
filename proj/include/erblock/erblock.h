/* C interface to the erblock blocking toolkit.
 *
 * Every fallible call returns an erb_status. On failure the message is
 * available from erb_last_error() on the same thread until the next call.
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function.
 */
#ifndef ERBLOCK_ERBLOCK_H
#define ERBLOCK_ERBLOCK_H

#include <stddef.h>
#include <stdint.h>

#if defined(ERB_BUILDING)
#define ERB_API __attribute__((visibility("default")))
#else
#define ERB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum erb_status {
  ERB_OK = 0,
  ERB_ERR_IO = 1,
  ERB_ERR_SCHEMA = 2,
  ERB_ERR_PARSE = 3,
  ERB_ERR_DUPLICATE_ID = 4,
  ERB_ERR_CONSISTENCY = 5,
  ERB_ERR_REFERENTIAL = 6,
  ERB_ERR_PARAMETER = 7,
  ERB_ERR_DOMAIN = 8,
  ERB_ERR_VOCABULARY = 9,
  ERB_ERR_SIZE_GUARD = 10,
  ERB_ERR_CONFIG = 11,
  ERB_ERR_USAGE = 12,
  ERB_ERR_INTERNAL = 13
} erb_status;

ERB_API const char* erb_version(void);
/* Upper-case code such as "PARSE"; "UNKNOWN" for values outside the enum. */
ERB_API const char* erb_status_name(erb_status status);
/* Message of the last failed call on this thread; "" if none. */
ERB_API const char* erb_last_error(void);

/* ---- corpus and truth ---- */

typedef struct erb_corpus erb_corpus;
typedef struct erb_truth erb_truth;

ERB_API erb_status erb_corpus_load(const char* path, erb_corpus** out);
ERB_API erb_status erb_corpus_save(const erb_corpus* corpus, const char* path);
ERB_API size_t erb_corpus_size(const erb_corpus* corpus);
ERB_API erb_status erb_corpus_record_id(const erb_corpus* corpus, size_t index, uint64_t* out);
ERB_API void erb_corpus_free(erb_corpus* corpus);

/* corpus may be NULL; otherwise every id must belong to it. */
ERB_API erb_status erb_truth_load(const char* path, const erb_corpus* corpus, erb_truth** out);
ERB_API size_t erb_truth_match_count(const erb_truth* truth);
ERB_API size_t erb_truth_nonmatch_count(const erb_truth* truth);
ERB_API void erb_truth_free(erb_truth* truth);

/* Writes `token_id<TAB>token<TAB>df` lines. fields: comma list or NULL. */
ERB_API erb_status erb_vocabulary_write(const erb_corpus* corpus, size_t shingle,
                                        const char* fields, const char* path);

/* ---- synthetic data ---- */

typedef struct erb_gen_params {
  uint64_t n_entities;
  double duplication[4]; /* P(1..4 records per entity) */
  const char* name_pool_path; /* NULL: bundled pool */
  size_t name_parts;
  const char* date_min;
  const char* date_max;
  uint32_t nonmatch_ratio;
  double char_sub_rate;
  double char_swap_rate;
  double char_del_rate;
  int32_t date_perturb_days;
  double governorate_error_rate;
  double field_drop_rate;
  uint64_t seed;
} erb_gen_params;

typedef struct erb_gen_summary {
  uint64_t records;
  uint64_t matches;
  uint64_t nonmatches;
} erb_gen_summary;

ERB_API void erb_gen_params_init(erb_gen_params* params);
/* Writes the corpus, truth and `entity_id,record_id` files. summary may be NULL. */
ERB_API erb_status erb_generate(const erb_gen_params* params, const char* corpus_path,
                                const char* truth_path, const char* entities_path,
                                erb_gen_summary* summary);

/* ---- blocking ---- */

typedef enum erb_method {
  ERB_METHOD_CLASSICAL = 0,
  ERB_METHOD_DOPH = 1,
  ERB_METHOD_WEIGHTED_DOPH = 2,
  ERB_METHOD_KLSH = 3,
  ERB_METHOD_RULES = 4,
  ERB_METHOD_RULES_AEDA = 5
} erb_method;

/* Accepts classical, doph, weighted-doph, klsh, rules, rules+aeda. */
ERB_API erb_status erb_method_parse(const char* name, erb_method* out);
ERB_API const char* erb_method_name(erb_method method);

typedef struct erb_aeda_params {
  double omega;
  double lambda;
  double sigma;
  double psi;
  /* All three NULL for the bundled tables, otherwise all three set. */
  const char* phonetic_path;
  const char* letterform_path;
  const char* keyboard_path;
} erb_aeda_params;

typedef struct erb_block_params {
  erb_method method;
  uint32_t K;
  uint32_t L;
  size_t shingle;
  uint64_t seed;
  const char* fields;   /* comma list; NULL for name,date_of_death,governorate,sex */
  int idf_weighting;    /* weighted-doph: IDF instead of raw counts */
  size_t projections;   /* klsh p */
  size_t clusters;      /* klsh c */
  size_t kmeans_iterations;
  const char* scheme;   /* rules, e.g. "year+governorate | month+year+governorate" */
  double percentile;    /* rules+aeda */
  erb_aeda_params aeda;
  unsigned workers;     /* 0: hardware concurrency */
} erb_block_params;

ERB_API void erb_aeda_params_init(erb_aeda_params* params);
ERB_API void erb_block_params_init(erb_block_params* params);

typedef struct erb_blocking erb_blocking;

/* The corpus must outlive the returned blocking. */
ERB_API erb_status erb_block(const erb_corpus* corpus, const erb_block_params* params,
                             erb_blocking** out);
ERB_API uint64_t erb_blocking_candidate_count(const erb_blocking* blocking);
ERB_API erb_status erb_blocking_contains(const erb_blocking* blocking, uint64_t id_a,
                                         uint64_t id_b, int* out);
/* `id_a,id_b` lines, canonical and sorted. */
ERB_API erb_status erb_blocking_write_pairs(const erb_blocking* blocking, const char* path);
/* Hashing: `table<TAB>key_hex<TAB>record_id`; klsh: `record_id<TAB>cluster_id`;
 * rules: `rule<TAB>block<TAB>record_id`. */
ERB_API erb_status erb_blocking_write_blocks(const erb_blocking* blocking, const char* path);
/* Character lookups that fell back to similarity 0 (rules+aeda). */
ERB_API uint64_t erb_blocking_unmapped_chars(const erb_blocking* blocking);
ERB_API void erb_blocking_free(erb_blocking* blocking);

/* ---- evaluation ---- */

typedef struct erb_metrics {
  uint64_t tp;
  uint64_t fp;
  uint64_t fn;
  uint64_t tn;
  int has_recall;
  double recall;
  double precision;
  int has_rr;
  double rr;
  uint64_t candidate_count;
  uint64_t total_pairs;
} erb_metrics;

ERB_API erb_status erb_blocking_evaluate(const erb_blocking* blocking, const erb_truth* truth,
                                         erb_metrics* out);
/* Candidate pair file against truth; every id must belong to the corpus. */
ERB_API erb_status erb_evaluate_pairs(const erb_corpus* corpus, const char* pairs_path,
                                      const erb_truth* truth, erb_metrics* out);

/* ---- sweeps ---- */

typedef struct erb_sweep_params {
  erb_method method; /* rules+aeda is not sweepable */
  const uint32_t* K; /* klsh: projection counts */
  size_t K_count;
  const uint32_t* L; /* klsh: cluster counts */
  size_t L_count;
  const size_t* shingles;
  size_t shingle_count;
  const uint64_t* seeds;
  size_t seed_count;
  const char* const* schemes;
  size_t scheme_count;
  const char* fields;
  int idf_weighting;
  size_t kmeans_iterations;
  /* Keep complete rows already in csv_path and skip their cells; a trailing
   * partial row is dropped. */
  int resume;
  unsigned workers;
} erb_sweep_params;

typedef struct erb_sweep_row {
  const char* method;
  size_t shingle;
  uint32_t K;
  uint32_t L;
  uint64_t seed;
  int ok;
  erb_metrics metrics; /* valid when ok */
  const char* error;   /* "" when ok */
  double millis;
} erb_sweep_row;

typedef void (*erb_sweep_callback)(const erb_sweep_row* row, void* user);

ERB_API void erb_sweep_params_init(erb_sweep_params* params);
/* Reference axes with L divided by `divisor`. Arrays need room for 16 values. */
ERB_API erb_status erb_reference_axes(uint32_t divisor, uint32_t* K, size_t* K_count, uint32_t* L,
                                      size_t* L_count, size_t* shingles, size_t* shingle_count);
/* Writes the results CSV (flushed per row) and calls callback per row; either
 * may be NULL. Failed cells do not fail the sweep. */
ERB_API erb_status erb_sweep(const erb_corpus* corpus, const erb_truth* truth,
                             const erb_sweep_params* params, const char* csv_path,
                             erb_sweep_callback callback, void* user);

/* ---- name cost histogram ---- */

typedef struct erb_histogram_summary {
  uint64_t pairs;         /* costs binned */
  uint64_t excluded_zero; /* perfect matches left out */
  int has_mean;
  double mean;
  uint64_t unmapped_chars;
} erb_histogram_summary;

/* Name costs over the pairs of pairs_path, or when it is NULL over the
 * within-block pairs of every rule of `scheme`. Writes
 * `bin_low,bin_high,count` to csv_path. */
ERB_API erb_status erb_cost_histogram(const erb_corpus* corpus, const char* pairs_path,
                                      const char* scheme, const erb_aeda_params* aeda,
                                      unsigned workers, const char* csv_path,
                                      erb_histogram_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* ERBLOCK_ERBLOCK_H */
