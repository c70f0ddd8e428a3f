#include <math.h>
#include <stdio.h>
#include <string.h>

#include "pdrs.h"

#define CHECK(call)                                                            \
  do {                                                                         \
    PdrsStatus st_ = (call);                                                   \
    if (st_ != PDRS_STATUS_OK) {                                               \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_, pdrs_last_error());   \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  PdrsConfig *cfg = NULL;
  PdrsContext *ctx = NULL;
  PdrsFrame *frame = NULL;
  PdrsResult *res = NULL;
  size_t active[8], support[8], n_active = 0, n_support = 0;

  CHECK(pdrs_config_new_small(16, 32, 12, 8, &cfg));
  CHECK(pdrs_config_set_snr_db(cfg, INFINITY));
  CHECK(pdrs_context_new(cfg, &ctx));
  CHECK(pdrs_frame_generate(ctx, 0, &frame));
  CHECK(pdrs_frame_active(frame, active, 8, &n_active));
  CHECK(pdrs_detect(frame, PDRS_DETECTOR_PDRS, 8, &res));
  CHECK(pdrs_result_support(res, support, 8, &n_support));

  int found = 0;
  for (size_t i = 0; i < n_support; i++)
    for (size_t j = 0; j < n_active; j++)
      found += support[i] == active[j];

  if (pdrs_config_set_pdrs_len(cfg, 0) == PDRS_STATUS_OK ||
      strlen(pdrs_last_error()) == 0) {
    fprintf(stderr, "zero PDRS length accepted\n");
    return 1;
  }

  pdrs_result_free(res);
  pdrs_frame_free(frame);
  pdrs_context_free(ctx);
  pdrs_config_free(cfg);
  printf("version %s found %d of %zu\n", pdrs_version(), found, n_active);
  return found == 8 ? 0 : 1;
}
