#ifndef BELLFORGE_H
#define BELLFORGE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_NULL_POINTER = 1,
  BF_STATUS_INVALID_ARGUMENT = 2,
  BF_STATUS_SHAPE_MISMATCH = 3,
  BF_STATUS_CAP_EXCEEDED = 4,
  BF_STATUS_PARSE = 5,
  BF_STATUS_IO = 6,
  BF_STATUS_PANIC = 7,
} BfStatus;

// A non-local game.
typedef struct BfGame BfGame;

// A finite-dimensional quantum strategy.
typedef struct BfStrategy BfStrategy;

// Overlap quantities of the embezzling family at index `d`.
typedef struct BfGram {
  uint64_t d;
  double n_d;
  double x_d;
  double gap;
  double deviation;
} BfGram;

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *bf_last_error(void);

// Library version as a static NUL-terminated string.
const char *bf_version(void);

// Tilted CHSH game with state ratio `alpha` in (0, 1]; `flipped` selects the
// label-swapped variant.
//
// # Safety
// `out` must be valid for writing one pointer.
enum BfStatus bf_game_tchsh(double alpha, bool flipped, struct BfGame **out);

// The shipped 3-CHSH game.
//
// # Safety
// `out` must be valid for writing one pointer.
enum BfStatus bf_game_three_chsh(struct BfGame **out);

// The composed embezzlement game.
//
// # Safety
// `out` must be valid for writing one pointer.
enum BfStatus bf_game_emb(struct BfGame **out);

// Game from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writing one pointer.
enum BfStatus bf_game_from_json(const char *json, struct BfGame **out);

// Question and answer counts `(nx, ny, na, nb)` written to `shape[0..4]`.
//
// # Safety
// `game` must be a live handle; `shape` must point to four writable `size_t`.
enum BfStatus bf_game_shape(const struct BfGame *game, size_t *shape);

// # Safety
// `game` must be NULL or a handle not yet freed.
void bf_game_free(struct BfGame *game);

// Ideal strategy for the tilted CHSH game.
//
// # Safety
// `out` must be valid for writing one pointer.
enum BfStatus bf_strategy_tchsh(double alpha, bool flipped, struct BfStrategy **out);

// # Safety
// `out` must be valid for writing one pointer.
enum BfStatus bf_strategy_three_chsh(struct BfStrategy **out);

// Dense ideal strategy for the embezzlement game with embezzler index `d`.
//
// # Safety
// `out` must be valid for writing one pointer.
enum BfStatus bf_strategy_emb(size_t d, struct BfStrategy **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writing one pointer.
enum BfStatus bf_strategy_from_json(const char *json, struct BfStrategy **out);

// # Safety
// `strategy` must be NULL or a handle not yet freed.
void bf_strategy_free(struct BfStrategy *strategy);

// # Safety
// `game` and `strategy` must be live handles; `out` must be writable.
enum BfStatus bf_strategy_value(const struct BfGame *game,
                                const struct BfStrategy *strategy,
                                double *out);

// Best deterministic value by exhaustive enumeration.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
enum BfStatus bf_classical_value(const struct BfGame *game, double *out);

// Structured value of the ideal embezzlement strategy at any `d >= 1`.
//
// # Safety
// `out` must be writable.
enum BfStatus bf_emb_value(size_t d, double *out);

// # Safety
// `out` must be writable.
enum BfStatus bf_gram_summary(size_t d, struct BfGram *out);

// Referee acceptance probability of the embezzler-based exchange strategy,
// entangled branch on qutrit levels {1, 2}.
//
// # Safety
// `out` must be writable.
enum BfStatus bf_exchange_success(size_t d, double *out);

// # Safety
// `out` must be writable.
enum BfStatus bf_ltw_bound(size_t local_dim, double *out);

#endif  /* BELLFORGE_H */
