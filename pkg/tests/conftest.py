import os

# Single-threaded BLAS before numpy loads anywhere, matching the library's
# own determinism pinning (tests compare bytes across processes).
for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

from hypothesis import settings

settings.register_profile("deterministic", derandomize=True, max_examples=40, deadline=None)
settings.load_profile("deterministic")
