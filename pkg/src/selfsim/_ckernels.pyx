# cython: language_level=3
"""Compiled twins of ``selfsim._pykernels``."""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef int64_t *_table(rows, Py_ssize_t n, Py_ssize_t m) except NULL:
    cdef int64_t *buf = <int64_t *> malloc((n * m if n * m else 1) * sizeof(int64_t))
    cdef Py_ssize_t s, x
    if buf == NULL:
        raise MemoryError()
    for s in range(n):
        row = rows[s]
        for x in range(m):
            buf[s * m + x] = row[x]
    return buf


cdef Py_ssize_t _rank(int64_t *keys, int64_t *labels, Py_ssize_t n):
    # dense labels by first occurrence of each key
    cdef dict seen = {}
    cdef Py_ssize_t s
    cdef object hit
    for s in range(n):
        hit = seen.get(keys[s])
        if hit is None:
            hit = len(seen)
            seen[keys[s]] = hit
        labels[s] = hit
    return len(seen)


def refine_partition(out, to):
    cdef Py_ssize_t n = len(out)
    if n == 0:
        return []
    cdef Py_ssize_t m = len(out[0])
    cdef Py_ssize_t s, x, count, new_count
    cdef int64_t *o = _table(out, n, m)
    cdef int64_t *t = NULL
    cdef int64_t *labels = NULL
    cdef int64_t *cur = NULL
    cdef int64_t *keys = NULL
    try:
        t = _table(to, n, m)
        labels = <int64_t *> malloc(n * sizeof(int64_t))
        cur = <int64_t *> malloc(n * sizeof(int64_t))
        keys = <int64_t *> malloc(n * sizeof(int64_t))
        if labels == NULL or cur == NULL or keys == NULL:
            raise MemoryError()
        # initial classes: equal output rows
        for s in range(n):
            cur[s] = 0
        count = 1
        for x in range(m):
            for s in range(n):
                keys[s] = cur[s] * m + o[s * m + x]
            count = _rank(keys, cur, n)
        for s in range(n):
            labels[s] = cur[s]
        while True:
            for s in range(n):
                cur[s] = labels[s]
            for x in range(m):
                for s in range(n):
                    keys[s] = cur[s] * n + labels[t[s * m + x]]
                new_count = _rank(keys, cur, n)
            if new_count == count:
                return [int(labels[s]) for s in range(n)]
            count = new_count
            for s in range(n):
                labels[s] = cur[s]
    finally:
        free(o)
        free(t)
        free(labels)
        free(cur)
        free(keys)


def brute_force_fixed(out, to, Py_ssize_t start, Py_ssize_t k, accept):
    cdef int64_t[:, ::1] o = np.ascontiguousarray(out, dtype=np.int64)
    cdef int64_t[:, ::1] t = np.ascontiguousarray(to, dtype=np.int64)
    cdef int64_t[::1] acc = np.ascontiguousarray(accept, dtype=np.int64)
    cdef int64_t size = o.shape[1]
    cdef int64_t fixed = 0, accepted = 0
    cdef int64_t state, x
    cdef Py_ssize_t i
    cdef bint ok, done = False
    if k == 0:
        return 1, int(acc[start] != 0)
    cdef int64_t *digits = <int64_t *> malloc(k * sizeof(int64_t))
    if digits == NULL:
        raise MemoryError()
    try:
        for i in range(k):
            digits[i] = 0
        while not done:
            state = start
            ok = True
            for i in range(k):
                x = digits[i]
                if o[state, x] != x:
                    ok = False
                    break
                state = t[state, x]
            if ok:
                fixed += 1
                if acc[state]:
                    accepted += 1
            # next word in lexicographic order
            i = k - 1
            while True:
                digits[i] += 1
                if digits[i] < size:
                    break
                digits[i] = 0
                if i == 0:
                    done = True
                    break
                i -= 1
    finally:
        free(digits)
    return int(fixed), int(accepted)


def act_on_word(out, to, Py_ssize_t start, word):
    cdef int64_t[:, ::1] o = np.ascontiguousarray(out, dtype=np.int64)
    cdef int64_t[:, ::1] t = np.ascontiguousarray(to, dtype=np.int64)
    cdef int64_t state = start
    image = []
    for x in word:
        image.append(int(o[state, x]))
        state = t[state, x]
    return image, int(state)
