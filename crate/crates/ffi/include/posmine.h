#ifndef POSMINE_H
#define POSMINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  POSMINE_STATUS_OK = 0,
  POSMINE_STATUS_NULL_POINTER = 1,
  POSMINE_STATUS_INVALID_ARGUMENT = 2,
  POSMINE_STATUS_PARSE_ERROR = 3,
  POSMINE_STATUS_SIMULATION_ERROR = 4,
  POSMINE_STATUS_BUFFER_TOO_SMALL = 5,
  POSMINE_STATUS_PANIC = 6,
} PosmineStatus;

/**
 * A game of some Miner-1 strategy against FRONTIER.
 */
typedef struct PosmineGame PosmineGame;

/**
 * A block-tree state.
 */
typedef struct PosmineState PosmineState;

/**
 * One played round.
 */
typedef struct {
  uint64_t round;
  /**
   * 1 or 2.
   */
  uint8_t creator;
  uint64_t tip;
  uint64_t height;
  uint64_t chain1;
  uint64_t chain2;
  bool capitulated;
  bool renewal;
  double revenue;
} PosmineRound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version, static storage.
 */
const char *posmine_version(void);

/**
 * Message for the last failed call on this thread, empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *posmine_last_error(void);

/**
 * Closed-form revenue of `strategy` ("frontier", "sm" or "nsm").
 *
 * # Safety
 * `strategy` must be a nul-terminated string and `out` writable.
 */
PosmineStatus posmine_revenue_closed(const char *strategy, double alpha, double *out);

/**
 * Where the NSM closed form crosses α, by bisection on [lo, hi].
 *
 * # Safety
 * `out` must be writable.
 */
PosmineStatus posmine_nsm_crossover(double lo, double hi, double *out);

/**
 * Renewal-cycle Monte Carlo revenue for any strategy spec.
 *
 * # Safety
 * `strategy` must be a nul-terminated string; `estimate` and `stderr`
 * writable.
 */
PosmineStatus posmine_revenue_renewal(const char *strategy,
                                      double alpha,
                                      uint64_t cycles,
                                      uint64_t seed,
                                      double *estimate,
                                      double *stderr);

/**
 * Parses a statefile.
 *
 * # Safety
 * `source` must be a nul-terminated string and `out` writable.
 */
PosmineStatus posmine_state_parse(const char *source, PosmineState **out);

/**
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void posmine_state_free(PosmineState *state);

/**
 * Writes the checkpoint ids into `ids[0..cap]` and their count into
 * `len`. If `cap` is too small nothing is written to `ids`, `len` still
 * receives the required count and the call returns
 * `POSMINE_STATUS_BUFFER_TOO_SMALL`.
 *
 * # Safety
 * `state` must be a live handle, `ids` valid for `cap` writes (or null
 * when `cap` is 0), `len` writable.
 */
PosmineStatus posmine_state_checkpoints(const PosmineState *state,
                                        uint64_t *ids,
                                        size_t cap,
                                        size_t *len);

/**
 * Starts a game from B_0 for a strategy spec such as "nsm" or
 * "lcm(random:0.5:1)".
 *
 * # Safety
 * `strategy` must be a nul-terminated string and `out` writable.
 */
PosmineStatus posmine_game_new(const char *strategy,
                               double alpha,
                               uint64_t seed,
                               PosmineGame **out);

/**
 * # Safety
 * `game` must be null or a handle from this library not yet freed.
 */
void posmine_game_free(PosmineGame *game);

/**
 * Plays one round. `out` may be null.
 *
 * # Safety
 * `game` must be a live handle; `out` null or writable.
 */
PosmineStatus posmine_game_step(PosmineGame *game, PosmineRound *out);

/**
 * Plays `rounds` rounds and writes Miner 1's revenue after the last one.
 *
 * # Safety
 * `game` must be a live handle; `revenue` null or writable.
 */
PosmineStatus posmine_game_run(PosmineGame *game, uint64_t rounds, double *revenue);

/**
 * Snapshot of the game's current state as a new handle.
 *
 * # Safety
 * `game` must be a live handle and `out` writable.
 */
PosmineStatus posmine_game_state(const PosmineGame *game, PosmineState **out);

/**
 * Number of blocks Miner `miner` (1 or 2) has on the longest path,
 * finalized ones included.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
PosmineStatus posmine_state_chain_count(const PosmineState *state, uint8_t miner, uint64_t *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* POSMINE_H */
