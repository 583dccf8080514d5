"""Hot inner loops for word-tree and periodic-orbit scans.

The kernels are compiled with numba's @njit when available; setting the
environment variable ``COCYCLE_GAP_NO_NUMBA=1`` (or a failed numba import)
selects a pure-Python/numpy fallback running the same code.  The arithmetic
is written with explicit loops in a fixed order, so both backends and any
thread count produce identical doubles.

Singular-value gaps are computed through top singular values of three
exterior-power products:

    (mu_i - mu_{i+1})(g) = 2*log s1(wedge^i g) - log s1(wedge^{i-1} g) - log s1(wedge^{i+1} g)

Only largest singular values enter, and those are computed to full relative
precision regardless of how ill-conditioned the accumulated product is; a
direct SVD of the product would lose the small singular values to roundoff
once the spread exceeds 1/eps.
"""

from __future__ import annotations

import math
import os

import numpy as np

DISABLE_ENV = "COCYCLE_GAP_NO_NUMBA"


def _numba_enabled() -> bool:
    if os.environ.get(DISABLE_ENV, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()

if NUMBA_ENABLED:
    from numba import njit

    _jit = njit(cache=True, nogil=True)
else:
    def _jit(func):
        return func


@_jit
def _matmul_into(a, b, out):
    m = a.shape[0]
    for r in range(m):
        for c in range(m):
            acc = 0.0
            for k in range(m):
                acc += a[r, k] * b[k, c]
            out[r, c] = acc


@_jit
def _frobenius(a):
    m = a.shape[0]
    acc = 0.0
    for r in range(m):
        for c in range(m):
            acc += a[r, c] * a[r, c]
    return math.sqrt(acc)


@_jit
def _top_sigma(a):
    """Largest singular value; closed forms for m <= 3, else full SVD.

    The closed forms act on the Gram matrix a^T a, whose top eigenvalue is
    well conditioned (absolute error ~ eps * norm, hence full relative
    precision for the largest one).
    """
    m = a.shape[0]
    if m == 1:
        return abs(a[0, 0])
    if m == 2:
        s00 = a[0, 0] * a[0, 0] + a[1, 0] * a[1, 0]
        s11 = a[0, 1] * a[0, 1] + a[1, 1] * a[1, 1]
        s01 = a[0, 0] * a[0, 1] + a[1, 0] * a[1, 1]
        t = s00 + s11
        disc = (s00 - s11) * (s00 - s11) + 4.0 * s01 * s01
        if disc < 0.0:
            disc = 0.0
        top = 0.5 * (t + math.sqrt(disc))
        if top < 0.0:
            top = 0.0
        return math.sqrt(top)
    if m == 3:
        s00 = a[0, 0] * a[0, 0] + a[1, 0] * a[1, 0] + a[2, 0] * a[2, 0]
        s11 = a[0, 1] * a[0, 1] + a[1, 1] * a[1, 1] + a[2, 1] * a[2, 1]
        s22 = a[0, 2] * a[0, 2] + a[1, 2] * a[1, 2] + a[2, 2] * a[2, 2]
        s01 = a[0, 0] * a[0, 1] + a[1, 0] * a[1, 1] + a[2, 0] * a[2, 1]
        s02 = a[0, 0] * a[0, 2] + a[1, 0] * a[1, 2] + a[2, 0] * a[2, 2]
        s12 = a[0, 1] * a[0, 2] + a[1, 1] * a[1, 2] + a[2, 1] * a[2, 2]
        off = s01 * s01 + s02 * s02 + s12 * s12
        if off == 0.0:
            top = s00
            if s11 > top:
                top = s11
            if s22 > top:
                top = s22
            if top < 0.0:
                top = 0.0
            return math.sqrt(top)
        q = (s00 + s11 + s22) / 3.0
        d0 = s00 - q
        d1 = s11 - q
        d2 = s22 - q
        p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off
        p = math.sqrt(p2 / 6.0)
        # det((S - q I) / p) / 2
        b00 = d0 / p
        b11 = d1 / p
        b22 = d2 / p
        b01 = s01 / p
        b02 = s02 / p
        b12 = s12 / p
        detb = (
            b00 * (b11 * b22 - b12 * b12)
            - b01 * (b01 * b22 - b12 * b02)
            + b02 * (b01 * b12 - b11 * b02)
        )
        r = detb / 2.0
        if r < -1.0:
            r = -1.0
        elif r > 1.0:
            r = 1.0
        phi = math.acos(r) / 3.0
        top = q + 2.0 * p * math.cos(phi)
        if top < 0.0:
            top = 0.0
        return math.sqrt(top)
    s = np.linalg.svd(np.ascontiguousarray(a))[1]
    return s[0]


@_jit
def _advance(gens, s, state_in, state_out):
    """state_out = normalize(gens[s] @ state_in); returns log of the norm."""
    _matmul_into(gens[s], state_in, state_out)
    norm = _frobenius(state_out)
    m = state_out.shape[0]
    for r in range(m):
        for c in range(m):
            state_out[r, c] /= norm
    return math.log(norm)


@_jit
def _gap_value(lo, mid, hi, lo_scale, mid_scale, hi_scale):
    s_lo = lo_scale + math.log(_top_sigma(lo))
    s_mid = mid_scale + math.log(_top_sigma(mid))
    s_hi = hi_scale + math.log(_top_sigma(hi))
    return 2.0 * s_mid - s_lo - s_hi


@_jit
def _scan_subtree(adjacency, lo_gens, mid_gens, hi_gens,
                  lo0, mid0, hi0, lo_scale0, mid_scale0, hi_scale0,
                  prev0, depth_limit, best_gap, witness):
    """Depth-first scan of all admissible extensions (up to depth_limit) of
    a prefix whose accumulated three-level state is given.

    For each local depth t (0-based), best_gap[t] and witness[t, :t+1] hold
    the minimum gap over extensions of length t+1 and its first (hence
    lexicographically least) attaining word.  Returns the number of words
    evaluated.
    """
    n_symbols = adjacency.shape[0]
    m0 = lo0.shape[0]
    m1 = mid0.shape[0]
    m2 = hi0.shape[0]
    lo_stack = np.empty((depth_limit + 1, m0, m0))
    mid_stack = np.empty((depth_limit + 1, m1, m1))
    hi_stack = np.empty((depth_limit + 1, m2, m2))
    scales = np.empty((depth_limit + 1, 3))
    word = np.empty(depth_limit, np.int32)

    lo_stack[0] = lo0
    mid_stack[0] = mid0
    hi_stack[0] = hi0
    scales[0, 0] = lo_scale0
    scales[0, 1] = mid_scale0
    scales[0, 2] = hi_scale0

    visited = 0
    pos = 0
    word[0] = -1
    while pos >= 0:
        s = word[pos] + 1
        if pos == 0:
            prev = prev0
        else:
            prev = word[pos - 1]
        while s < n_symbols and prev >= 0 and adjacency[prev, s] == 0:
            s += 1
        if s >= n_symbols:
            pos -= 1
            continue
        word[pos] = s
        scales[pos + 1, 0] = scales[pos, 0] + _advance(lo_gens, s, lo_stack[pos], lo_stack[pos + 1])
        scales[pos + 1, 1] = scales[pos, 1] + _advance(mid_gens, s, mid_stack[pos], mid_stack[pos + 1])
        scales[pos + 1, 2] = scales[pos, 2] + _advance(hi_gens, s, hi_stack[pos], hi_stack[pos + 1])
        gap = _gap_value(lo_stack[pos + 1], mid_stack[pos + 1], hi_stack[pos + 1],
                         scales[pos + 1, 0], scales[pos + 1, 1], scales[pos + 1, 2])
        visited += 1
        if gap < best_gap[pos]:
            best_gap[pos] = gap
            for t in range(pos + 1):
                witness[pos, t] = word[t]
        if pos + 1 < depth_limit:
            pos += 1
            word[pos] = -1
    return visited


@_jit
def _orbit_products(gens, symbols, offsets, out_products, out_scales):
    """Renormalized left-product over each orbit word.

    out_products[o] = phi(w_{p-1}) ... phi(w_0) normalized to unit Frobenius
    norm, with the accumulated log norm in out_scales[o].
    """
    d = gens.shape[1]
    tmp = np.empty((d, d))
    for o in range(offsets.shape[0] - 1):
        start = offsets[o]
        stop = offsets[o + 1]
        prod = out_products[o]
        for r in range(d):
            for c in range(d):
                prod[r, c] = 1.0 if r == c else 0.0
        scale = 0.0
        for t in range(start, stop):
            scale += _advance(gens, symbols[t], prod, tmp)
            for r in range(d):
                for c in range(d):
                    prod[r, c] = tmp[r, c]
        out_scales[o] = scale


def scan_words_min_gap(adjacency, lo_gens, mid_gens, hi_gens, n_max, threads=1,
                       min_subtrees=4):
    """Per-length minima of the index gap over all admissible words of
    length 1..n_max, with lexicographically least witnesses.

    When ``threads > 1`` the word tree is split at a shallow prefix depth and
    subtrees are scanned concurrently (the compiled kernel releases the GIL);
    each word's floating-point history is identical for any split, and ties
    are merged by lexicographic witness order, so the result does not depend
    on the thread count.
    """
    adjacency = np.ascontiguousarray(adjacency, dtype=np.int8)
    n_symbols = adjacency.shape[0]
    lo_gens = np.ascontiguousarray(lo_gens, dtype=np.float64)
    mid_gens = np.ascontiguousarray(mid_gens, dtype=np.float64)
    hi_gens = np.ascontiguousarray(hi_gens, dtype=np.float64)

    best = np.full(n_max, np.inf)
    witnesses: list[tuple[int, ...] | None] = [None] * n_max

    def root_state():
        return (
            np.eye(lo_gens.shape[1]), np.eye(mid_gens.shape[1]), np.eye(hi_gens.shape[1]),
            0.0, 0.0, 0.0,
        )

    def run(state, prev, base_word, depth_limit):
        lo0, mid0, hi0, ls, ms, hs = state
        sub_best = np.full(depth_limit, np.inf)
        sub_wit = np.full((depth_limit, depth_limit), -1, dtype=np.int32)
        _scan_subtree(adjacency, lo_gens, mid_gens, hi_gens,
                      lo0, mid0, hi0, ls, ms, hs,
                      prev, depth_limit, sub_best, sub_wit)
        return base_word, sub_best, sub_wit

    def merge(base_word, sub_best, sub_wit):
        k = len(base_word)
        for t in range(sub_best.shape[0]):
            n = k + t  # 0-based global length index for length n+1
            gap = sub_best[t]
            if not np.isfinite(gap):
                continue
            candidate = base_word + tuple(int(x) for x in sub_wit[t, :t + 1])
            if gap < best[n] or (gap == best[n] and (witnesses[n] is None or candidate < witnesses[n])):
                best[n] = gap
                witnesses[n] = candidate

    threads = max(1, int(threads))
    if threads == 1 or n_max <= 2:
        merge(*run(root_state(), -1, (), n_max))
        return best, witnesses

    # choose a split depth with enough subtrees to keep the pool busy
    split = 0
    count = 1
    while split < n_max - 1 and count < min_subtrees * threads:
        split += 1
        count = _count_words_at(adjacency, split)

    if split == 0:
        merge(*run(root_state(), -1, (), n_max))
        return best, witnesses

    # shallow part of the tree: walk prefixes in lexicographic order,
    # recording minima for lengths <= split and collecting subtree jobs
    jobs = []

    def walk(state, prev, word):
        depth = len(word)
        if depth == split:
            jobs.append((state, prev, word))
            return
        lo, mid, hi, ls, ms, hs = state
        for s in range(n_symbols):
            if prev >= 0 and adjacency[prev, s] == 0:
                continue
            lo2 = np.empty_like(lo)
            mid2 = np.empty_like(mid)
            hi2 = np.empty_like(hi)
            ls2 = ls + _advance(lo_gens, s, lo, lo2)
            ms2 = ms + _advance(mid_gens, s, mid, mid2)
            hs2 = hs + _advance(hi_gens, s, hi, hi2)
            gap = _gap_value(lo2, mid2, hi2, ls2, ms2, hs2)
            candidate = word + (s,)
            n = depth
            if gap < best[n] or (gap == best[n] and (witnesses[n] is None or candidate < witnesses[n])):
                best[n] = gap
                witnesses[n] = candidate
            walk((lo2, mid2, hi2, ls2, ms2, hs2), s, candidate)

    walk(root_state(), -1, ())

    from concurrent.futures import ThreadPoolExecutor

    depth_limit = n_max - split
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run, state, prev, word, depth_limit) for state, prev, word in jobs]
        results = [f.result() for f in futures]
    for base_word, sub_best, sub_wit in results:
        merge(base_word, sub_best, sub_wit)
    return best, witnesses


def _count_words_at(adjacency, n):
    rows = np.ones(adjacency.shape[0], dtype=object)
    mat = adjacency.astype(object)
    for _ in range(n - 1):
        rows = mat.T @ rows
    return int(rows.sum())


def orbit_products(generators, orbits):
    """Renormalized one-period products for a list of orbit words.

    Returns (products, log_scales) where products[o] has unit Frobenius norm
    and exp(log_scales[o]) * products[o] is the actual product.
    """
    generators = np.ascontiguousarray(generators, dtype=np.float64)
    d = generators.shape[1]
    count = len(orbits)
    symbols = np.fromiter((s for w in orbits for s in w), dtype=np.int64,
                          count=sum(len(w) for w in orbits))
    offsets = np.zeros(count + 1, dtype=np.int64)
    for idx, w in enumerate(orbits):
        offsets[idx + 1] = offsets[idx] + len(w)
    products = np.empty((count, d, d))
    scales = np.empty(count)
    if count:
        _orbit_products(generators, symbols, offsets, products, scales)
    return products, scales


def warm_up():
    """Trigger compilation on tiny inputs (avoids first-use latency inside
    timed sections and concurrent compilation from worker threads)."""
    adjacency = np.ones((1, 1), dtype=np.int8)
    gens = np.ones((1, 1, 1))
    best = np.full(1, np.inf)
    wit = np.full((1, 1), -1, dtype=np.int32)
    _scan_subtree(adjacency, gens, gens, gens,
                  np.eye(1), np.eye(1), np.eye(1), 0.0, 0.0, 0.0,
                  -1, 1, best, wit)
    prods = np.empty((1, 1, 1))
    scales = np.empty(1)
    _orbit_products(gens, np.zeros(1, dtype=np.int64), np.array([0, 1], dtype=np.int64),
                    prods, scales)
