#ifndef DISTRISK_H
#define DISTRISK_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum DistriskStatus {
  DISTRISK_STATUS_OK = 0,
  DISTRISK_STATUS_NULL_POINTER = 1,
  DISTRISK_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON or an object violating its invariants.
  DISTRISK_STATUS_PARSE = 3,
  // An argument outside the domain of the operation.
  DISTRISK_STATUS_DOMAIN = 4,
  DISTRISK_STATUS_NOT_CONCENTRATED = 5,
  DISTRISK_STATUS_SEARCH_EXHAUSTED = 6,
  // A Rust panic was caught at the boundary.
  DISTRISK_STATUS_INTERNAL = 7,
} DistriskStatus;

// Distortion function `h`.
typedef struct DistriskDistortion DistriskDistortion;

// Piecewise-linear random variable.
typedef struct DistriskRv DistriskRv;

// Closed index set `K ⊆ [0,1]`.
typedef struct DistriskSet DistriskSet;

// Risk spectrum `g`.
typedef struct DistriskSpectrum DistriskSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *distrisk_last_error(void);

// Library version as a static string.
const char *distrisk_version(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void distrisk_string_free(char *s);

// Parse a random variable from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum DistriskStatus distrisk_rv_from_json(const char *json, struct DistriskRv **out);

// Serialize a random variable to JSON; free the result with `distrisk_string_free`.
//
// # Safety
// `obj` must be a live handle and `out` a writable pointer.
enum DistriskStatus distrisk_rv_to_json(const struct DistriskRv *obj, char **out);

// # Safety
// `obj` must be null or a live handle; it is invalid afterwards.
void distrisk_rv_free(struct DistriskRv *obj);

// Parse a distortion from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum DistriskStatus distrisk_distortion_from_json(const char *json,
                                                  struct DistriskDistortion **out);

// Serialize a distortion to JSON; free the result with `distrisk_string_free`.
//
// # Safety
// `obj` must be a live handle and `out` a writable pointer.
enum DistriskStatus distrisk_distortion_to_json(const struct DistriskDistortion *obj, char **out);

// # Safety
// `obj` must be null or a live handle; it is invalid afterwards.
void distrisk_distortion_free(struct DistriskDistortion *obj);

// Parse an index set from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum DistriskStatus distrisk_set_from_json(const char *json, struct DistriskSet **out);

// Serialize an index set to JSON; free the result with `distrisk_string_free`.
//
// # Safety
// `obj` must be a live handle and `out` a writable pointer.
enum DistriskStatus distrisk_set_to_json(const struct DistriskSet *obj, char **out);

// # Safety
// `obj` must be null or a live handle; it is invalid afterwards.
void distrisk_set_free(struct DistriskSet *obj);

// Parse a spectrum from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum DistriskStatus distrisk_spectrum_from_json(const char *json, struct DistriskSpectrum **out);

// Serialize a spectrum to JSON; free the result with `distrisk_string_free`.
//
// # Safety
// `obj` must be a live handle and `out` a writable pointer.
enum DistriskStatus distrisk_spectrum_to_json(const struct DistriskSpectrum *obj, char **out);

// # Safety
// `obj` must be null or a live handle; it is invalid afterwards.
void distrisk_spectrum_free(struct DistriskSpectrum *obj);

// Left (`right == false`) or right quantile at level `p`.
//
// # Safety
// `x` must be a live handle and `out` a writable pointer.
enum DistriskStatus distrisk_quantile(const struct DistriskRv *x,
                                      double p,
                                      bool right,
                                      double *out);

// Expected Shortfall at level `p`.
//
// # Safety
// `x` must be a live handle and `out` a writable pointer.
enum DistriskStatus distrisk_es(const struct DistriskRv *x, double p, double *out);

// The Choquet integral `I_h(X)`.
//
// # Safety
// `h` and `x` must be live handles and `out` a writable pointer.
enum DistriskStatus distrisk_choquet(const struct DistriskDistortion *h,
                                     const struct DistriskRv *x,
                                     double *out);

// The spectral risk measure `ρ_g(X)`.
//
// # Safety
// `g` and `x` must be live handles and `out` a writable pointer.
enum DistriskStatus distrisk_spectral_rho(const struct DistriskSpectrum *g,
                                          const struct DistriskRv *x,
                                          double *out);

// Whether `I_h` is additive on every `K`-concentrated vector.
//
// # Safety
// `h` and `k` must be live handles and `out` a writable pointer.
enum DistriskStatus distrisk_is_k_additive(const struct DistriskDistortion *h,
                                           const struct DistriskSet *k,
                                           bool *out);

// Whether the `n` variables in `rvs` are `K`-concentrated.
//
// # Safety
// `rvs` must point to `n` live handles, `k` must be a live handle and
// `out` a writable pointer.
enum DistriskStatus distrisk_is_k_concentrated(const struct DistriskRv *const *rvs,
                                               size_t n,
                                               const struct DistriskSet *k,
                                               bool *out);

// Full concentration verdict (certificates and refutation) as JSON.
//
// # Safety
// As for [`distrisk_is_k_concentrated`]; free the result with
// `distrisk_string_free`.
enum DistriskStatus distrisk_concentration_json(const struct DistriskRv *const *rvs,
                                                size_t n,
                                                const struct DistriskSet *k,
                                                char **out);

// Search for a `K`-concentrated pair on which `I_h` is not additive.
// `*found` is false, and the pair outputs are left untouched, when `I_h`
// is `K`-additive.
//
// # Safety
// `h` and `k` must be live handles; `found`, `x_out` and `y_out` writable
// pointers. Returned handles are owned by the caller.
enum DistriskStatus distrisk_counterexample(const struct DistriskDistortion *h,
                                            const struct DistriskSet *k,
                                            uint64_t seed,
                                            bool *found,
                                            struct DistriskRv **x_out,
                                            struct DistriskRv **y_out);

// ES-mixture decomposition of a step spectrum as JSON (`null` when the
// spectrum has sloped pieces).
//
// # Safety
// `g` must be a live handle and `out` a writable pointer; free the result
// with `distrisk_string_free`.
enum DistriskStatus distrisk_es_mixture_json(const struct DistriskSpectrum *g, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTRISK_H */
