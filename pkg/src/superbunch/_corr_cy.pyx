# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Two-pointer coincidence counting over sorted integer timestamps.

Same binning contract as superbunch._corr_np.pair_histogram; this version
walks the second channel with a moving window so the cost is O(N * k) for
k candidates per event, with no per-pair allocations.
"""

import numpy as np


def pair_histogram(const long long[::1] d1, const long long[::1] d2,
                   long long dtau_ns, Py_ssize_t half_bins,
                   Py_ssize_t start=0, stop=None):
    cdef Py_ssize_t i_stop = d1.shape[0] if stop is None else <Py_ssize_t> stop
    cdef Py_ssize_t n2 = d2.shape[0]
    counts_arr = np.zeros(2 * half_bins, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef long long window = dtau_ns * half_bins
    cdef Py_ssize_t i, j, lo = 0, hi = 0
    cdef long long t, tau, q

    with nogil:
        for i in range(start, i_stop):
            t = d1[i]
            while lo < n2 and d2[lo] < t - window:
                lo += 1
            if hi < lo:
                hi = lo
            while hi < n2 and d2[hi] <= t + window:
                hi += 1
            for j in range(lo, hi):
                tau = t - d2[j]
                if tau == 0:
                    continue
                if tau > 0:
                    q = (tau - 1) / dtau_ns
                    if q < half_bins:
                        counts[half_bins + q] += 1
                else:
                    q = (-tau - 1) / dtau_ns
                    if q < half_bins:
                        counts[half_bins - 1 - q] += 1
    return counts_arr
