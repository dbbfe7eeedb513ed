/* Copyright 2026 The scrl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libscrl. Every function returns an scrl_status; on failure
 * scrl_last_error() describes it (per thread). Strings returned through
 * char** out-parameters are owned by the caller and released with
 * scrl_string_free(). */

#ifndef SCRL_SCRL_H_
#define SCRL_SCRL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SCRL_API __declspec(dllexport)
#else
#define SCRL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum scrl_status {
  SCRL_OK = 0,
  SCRL_ERR_VALIDATION = 1,
  SCRL_ERR_IO = 2,
  SCRL_ERR_NETWORK = 3,
  SCRL_ERR_CONSTRUCTION = 4, /* infeasible construction or cap exceeded */
  SCRL_ERR_CONTRACT = 5,     /* bad arguments */
  SCRL_ERR_INTERNAL = 6
} scrl_status;

SCRL_API const char* scrl_version(void);
SCRL_API const char* scrl_status_name(scrl_status status);
/* Message of the last failure on this thread; "" when none. */
SCRL_API const char* scrl_last_error(void);
SCRL_API void scrl_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

typedef struct scrl_config scrl_config;

SCRL_API scrl_status scrl_config_new(scrl_config** out);
SCRL_API void scrl_config_free(scrl_config* cfg);
SCRL_API scrl_status scrl_config_load_file(scrl_config* cfg, const char* path);
/* Reads SCRL_<KEY> for every key. */
SCRL_API scrl_status scrl_config_apply_env(scrl_config* cfg);
SCRL_API scrl_status scrl_config_set(scrl_config* cfg, const char* key, const char* value);
/* The returned pointer stays valid until the key is set again. */
SCRL_API scrl_status scrl_config_get(const scrl_config* cfg, const char* key, const char** value);
/* Checks everything at once; the error lists every violation. */
SCRL_API scrl_status scrl_config_resolve(scrl_config* cfg);
SCRL_API scrl_status scrl_config_dump(const scrl_config* cfg, char** out);

SCRL_API size_t scrl_config_key_count(void);
SCRL_API scrl_status scrl_config_key_info(size_t index, const char** name,
                                          const char** default_value, const char** help,
                                          const char** choices);

/* ---- commands (resolved config; "-" paths mean stdin/stdout) ---------- */

SCRL_API scrl_status scrl_cmd_bank_generate(const scrl_config* cfg, const char* problems_path,
                                            const char* out_path, char** summary);
SCRL_API scrl_status scrl_cmd_bank_validate(const scrl_config* cfg, const char* bank_path,
                                            int strict, char** summary);
SCRL_API scrl_status scrl_cmd_train_toy(const scrl_config* cfg, int dead_zone,
                                        const char* trace_path, char** summary);
SCRL_API scrl_status scrl_cmd_egim(const scrl_config* cfg, int sweep, const char* out_path,
                                   char** summary);
SCRL_API scrl_status scrl_cmd_credit(const scrl_config* cfg, const char* in_path,
                                     const char* out_path, char** summary);
/* ks may be NULL (num_ks = 0) for the default grid. */
SCRL_API scrl_status scrl_cmd_passk(const scrl_config* cfg, const char* in_path,
                                    const char* out_path, const size_t* ks, size_t num_ks,
                                    char** summary);

/* ---- building blocks --------------------------------------------------- */

/* Zeroes every reward after the first failure; progress = solved prefix. */
SCRL_API scrl_status scrl_progress_correct(const int* raw, size_t k, int well_formed,
                                           int* corrected, size_t* progress);
SCRL_API scrl_status scrl_normalize_group(const double* values, size_t n, double* out);
/* rewards and out are row-major g x k. */
SCRL_API scrl_status scrl_subproblem_normalize(const int* rewards, size_t g, size_t k,
                                               double* out);
SCRL_API scrl_status scrl_pass_at_k(size_t n, size_t c, size_t k, double* out);
SCRL_API scrl_status scrl_clipped_token_term(double rho, double advantage, double eps_low,
                                             double eps_high, double* out);
/* Parses a tagged response and scores each block against its truth. */
SCRL_API scrl_status scrl_score_response(const char* text, size_t k,
                                         const char* const* ground_truths,
                                         const char* comparator, int* rewards,
                                         int* well_formed);
SCRL_API scrl_status scrl_render_curriculum_prompt(const char* statement,
                                                   const char* const* subproblems, size_t k,
                                                   char** out);
SCRL_API scrl_status scrl_render_original_prompt(const char* statement, char** out);
/* On a schema failure returns SCRL_ERR_VALIDATION and sets *kind (0-11)
 * and *path (caller frees); both untouched on success. */
SCRL_API scrl_status scrl_validate_subproblem_json(const char* text, const char* final_answer,
                                                   size_t k, int* kind, char** path);
SCRL_API const char* scrl_schema_error_name(int kind);

/* ---- toy dead-zone instances ------------------------------------------- */

typedef struct scrl_toy scrl_toy;

SCRL_API scrl_status scrl_toy_dead_zone(double delta, double p_star, size_t k, size_t modulus,
                                        size_t group_size, uint64_t seed, scrl_toy** out);
SCRL_API void scrl_toy_free(scrl_toy* toy);
SCRL_API scrl_status scrl_toy_solve_probability(const scrl_toy* toy, double* out);
/* p_1..p_K under the curriculum prompt; out holds k values. */
SCRL_API scrl_status scrl_toy_curriculum_probabilities(const scrl_toy* toy, double* out,
                                                       size_t k);
/* Exact expected step gradient norm; algo is "grpo" or "scrl". */
SCRL_API scrl_status scrl_toy_expected_gradient_norm(const scrl_toy* toy, const char* algo,
                                                     size_t group_size, double temperature,
                                                     double* out);

#ifdef __cplusplus
}
#endif

#endif /* SCRL_SCRL_H_ */
