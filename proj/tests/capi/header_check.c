/* Copyright 2026 The vfkit Authors
 * License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0) */

/* Compiled as C so the public header stays usable from C. */
#include "vfkit/vfkit.h"

int vfkit_header_check_c(void) {
  vfkit_train_options opts;
  vfkit_train_options_init(&opts);
  return opts.batch_size > 0 && vfkit_status_name(VFKIT_OK) != 0;
}
