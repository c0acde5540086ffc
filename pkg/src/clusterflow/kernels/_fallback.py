"""Pure numpy versions of the hot loops.

Every function here has a twin in ``_core.pyx`` with the same signature and
the same floating-point operation order, so the two backends agree bit for bit.
"""
import numpy as np


def tentative_gaps(gaps, right):
    """Gap lengths after every point moves halfway, before merged points fold.

    ``right[i]`` is the direction of point ``i`` (left end of gap ``i``). A gap
    whose endpoints face each other, ``(R, L)``, closes and is flagged in the
    returned ``merged`` mask.
    """
    gaps = np.ascontiguousarray(gaps, dtype=np.float64)
    right = np.asarray(right, dtype=bool)
    nxt = np.roll(right, -1)
    prev_g = np.roll(gaps, 1)
    next_g = np.roll(gaps, -1)

    out = np.zeros_like(gaps)
    rr = right & nxt
    ll = ~right & ~nxt
    lr = ~right & nxt
    merged = right & ~nxt

    out[rr] = 0.5 * gaps[rr] + 0.5 * next_g[rr]
    out[ll] = 0.5 * prev_g[ll] + 0.5 * gaps[ll]
    out[lr] = (0.5 * prev_g[lr] + gaps[lr]) + 0.5 * next_g[lr]
    return out, merged


def fold(tentative, merged, multiplicity):
    """Drop closed gaps and merge the co-located point pairs.

    Returns the surviving gaps (unscaled), the summed multiplicities, and
    ``survivor[i]``: the new index of the cluster that old point ``i`` joined.
    """
    merged = np.asarray(merged, dtype=bool)
    multiplicity = np.asarray(multiplicity, dtype=np.int64)
    keep = ~merged
    new_gaps = np.ascontiguousarray(tentative[keep])
    absorbed = np.where(np.roll(merged, 1), np.roll(multiplicity, 1), 0)
    new_mult = multiplicity[keep] + absorbed[keep]
    rank = np.cumsum(keep, dtype=np.int64) - 1
    survivor = np.where(merged, np.roll(rank, -1), rank)
    return new_gaps, new_mult, survivor


def reverse_expand(weights, offset, rho_mask, rho_start, cluster):
    """One tuple-expansion step of the integer weight process.

    ``rho_mask[j]`` flags index ``rho_start + j`` as an un-merge site. The mask
    must cover ``[min(offset, 0), max(last, 0)]`` where ``last`` is the final
    stored index. Returns ``(new_weights, new_offset)``.
    """
    w = np.asarray(weights, dtype=np.int64)
    mask = np.asarray(rho_mask, dtype=bool)
    n = w.shape[0]
    a = int(offset)
    b = a + n - 1

    # prefix[j] = number of un-merge sites in [rho_start, rho_start + j)
    prefix = np.zeros(mask.shape[0] + 1, dtype=np.int64)
    np.cumsum(mask, out=prefix[1:])
    base = prefix[-rho_start]

    idx = np.arange(a, b + 2, dtype=np.int64)
    pos = idx + prefix[idx - rho_start] - base
    in_rho = mask[a - rho_start:b - rho_start + 1]

    if cluster:
        left = np.where(in_rho, 0, w)
        right = np.where(in_rho, 2 * w, w)
    else:
        left = w
        right = w
    middle = 2 * w

    junction = np.zeros(n + 1, dtype=np.int64)
    junction[:n] += left
    junction[1:] += right

    new_offset = int(pos[0])
    out = np.zeros(int(pos[-1]) - new_offset + 1, dtype=np.int64)
    out[pos - new_offset] = junction
    out[pos[:n][in_rho] - new_offset + 1] = middle[in_rho]
    return out, new_offset


def sum_squares_exact(weights):
    """Exact sum of squares of nonnegative int64 weights, as a Python int."""
    w = np.asarray(weights, dtype=np.int64)
    if w.size == 0:
        return 0
    if int(w.max()) < (1 << 31):
        hi = w >> 16
        lo = w & 0xFFFF
        return (
            (int(np.dot(hi, hi)) << 32)
            + (int(np.dot(hi, lo)) << 17)
            + int(np.dot(lo, lo))
        )
    return sum(int(x) * int(x) for x in w.tolist())
