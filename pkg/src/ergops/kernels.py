"""Hot loops over tables, subset masks and row-mask Boolean matrices.

Every kernel has two implementations: a loop form compiled with numba and a
vectorised numpy form.  The module-level names (``subset_images`` and friends)
point at the numba form unless numba is missing or the environment variable
``ERGOPS_DISABLE_NUMBA`` is set to a true value, in which case they point at
the numpy form.  Both forms are always importable from ``NUMBA_KERNELS`` and
``NUMPY_KERNELS`` so they can be benchmarked against each other.

Conventions: a subset of ``{0..q-1}`` is an int bitmask, and a q x q Boolean
matrix is an int64 array of q row masks (bit ``b`` of row ``a`` is entry
``[a][b]``).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("ERGOPS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = numba is not None and not _DISABLED


# ---------------------------------------------------------------------------
# loop forms (compiled by numba when available)

def _images_loop(table):
    q = table.shape[0]
    n = 1 << q
    out = np.zeros((q, n), dtype=np.int64)
    for b in range(q):
        for s in range(1, n):
            low = s & -s
            i = 0
            while (low >> i) != 1:
                i += 1
            out[b, s] = out[b, s ^ low] | (np.int64(1) << table[i, b])
    return out


def _compose_loop(mats, gens):
    n, q = mats.shape
    g = gens.shape[0]
    out = np.zeros((n * g, q), dtype=np.int64)
    for k in range(n):
        for j in range(g):
            row = k * g + j
            for a in range(q):
                m = mats[k, a]
                acc = np.int64(0)
                b = 0
                while m:
                    if m & 1:
                        acc |= gens[j, b]
                    m >>= 1
                    b += 1
                out[row, a] = acc
    return out


def _family_products_loop(members, images):
    k = members.shape[0]
    q = images.shape[0]
    out = np.zeros(k * k, dtype=np.int64)
    for i in range(k):
        a = members[i]
        for j in range(k):
            acc = np.int64(0)
            for b in range(q):
                if (members[j] >> b) & 1:
                    acc |= images[b, a]
            out[i * k + j] = acc
    return out


def _plain(fn):
    return fn


_helper_jit = numba.njit(cache=True) if numba is not None else _plain


@_helper_jit
def _find(parent, layer, x):
    root = x
    while parent[layer, root] != root:
        root = parent[layer, root]
    while parent[layer, x] != root:
        nxt = parent[layer, x]
        parent[layer, x] = root
        x = nxt
    return root


def _cyclic_closure_loop(table, layers, seeds, limit):
    """Least cyclic system of equivalences containing ``seeds`` in layer 0.

    Layer ``i`` must satisfy ``x~y, b~c  =>  x*b ~ y*c`` in layer ``i+1``
    (indices mod ``layers``).  Returns the layer-0 class label of every
    element, or an empty array as soon as any class exceeds ``limit``.
    """
    q = table.shape[0]
    parent = np.empty((layers, q), dtype=np.int64)
    size = np.ones((layers, q), dtype=np.int64)
    for i in range(layers):
        for x in range(q):
            parent[i, x] = x
    for s in range(seeds.shape[0]):
        x = seeds[s, 0]
        y = seeds[s, 1]
        rx = _find(parent, 0, x)
        ry = _find(parent, 0, y)
        if rx != ry:
            if rx > ry:
                rx, ry = ry, rx
            parent[0, ry] = rx
            size[0, rx] += size[0, ry]
            if size[0, rx] > limit:
                return np.empty(0, dtype=np.int64)
    changed = True
    while changed:
        changed = False
        for i in range(layers):
            nxt = (i + 1) % layers
            for x in range(q):
                rx = _find(parent, i, x)
                for b in range(q):
                    rb = _find(parent, i, b)
                    u = _find(parent, nxt, table[x, b])
                    v = _find(parent, nxt, table[rx, rb])
                    if u != v:
                        if u > v:
                            u, v = v, u
                        parent[nxt, v] = u
                        size[nxt, u] += size[nxt, v]
                        if size[nxt, u] > limit:
                            return np.empty(0, dtype=np.int64)
                        changed = True
    out = np.empty(q, dtype=np.int64)
    for x in range(q):
        out[x] = _find(parent, 0, x)
    return out


# ---------------------------------------------------------------------------
# vectorised numpy forms

def _images_numpy(table):
    table = np.asarray(table, dtype=np.int64)
    q = table.shape[0]
    subsets = np.arange(1 << q, dtype=np.int64)
    out = np.zeros((q, 1 << q), dtype=np.int64)
    for i in range(q):
        has = ((subsets >> i) & 1).astype(bool)
        out[:, has] |= (np.int64(1) << table[i, :])[:, None]
    return out


def _compose_numpy(mats, gens):
    mats = np.asarray(mats, dtype=np.int64)
    gens = np.asarray(gens, dtype=np.int64)
    n, q = mats.shape
    g = gens.shape[0]
    out = np.zeros((n, g, q), dtype=np.int64)
    for b in range(q):
        bit = ((mats >> b) & 1).astype(bool)  # (n, q)
        out |= np.where(bit[:, None, :], gens[None, :, b, None], 0)
    return out.reshape(n * g, q)


def _family_products_numpy(members, images):
    members = np.asarray(members, dtype=np.int64)
    q = images.shape[0]
    k = members.shape[0]
    out = np.zeros((k, k), dtype=np.int64)
    per_col = images[:, members]  # (q, k): image of member i under column b
    for b in range(q):
        right_has = ((members >> b) & 1).astype(bool)
        out |= np.where(right_has[None, :], per_col[b][:, None], 0)
    return out.reshape(k * k)


def _cyclic_closure_numpy(table, layers, seeds, limit):
    table = np.asarray(table, dtype=np.int64)
    q = table.shape[0]
    labels = np.tile(np.arange(q, dtype=np.int64), (layers, 1))

    def merge(lab, left, right):
        # lab maps every element to its class root (the least member)
        lab = lab.copy()
        while True:
            a = lab[left]
            b = lab[right]
            if np.array_equal(a, b):
                return lab
            np.minimum.at(lab, np.maximum(a, b), np.minimum(a, b))
            while True:
                nxt = lab[lab]
                if np.array_equal(nxt, lab):
                    break
                lab = nxt

    def too_big(lab):
        return np.bincount(lab, minlength=q).max() > limit

    seeds = np.asarray(seeds, dtype=np.int64).reshape(-1, 2)
    if seeds.size:
        labels[0] = merge(labels[0], seeds[:, 0], seeds[:, 1])
        if too_big(labels[0]):
            return np.empty(0, dtype=np.int64)
    xs, bs = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    xs = xs.ravel()
    bs = bs.ravel()
    changed = True
    while changed:
        changed = False
        for i in range(layers):
            nxt = (i + 1) % layers
            lab = labels[i]
            left = table[xs, bs]
            right = table[lab[xs], lab[bs]]
            merged = merge(labels[nxt], left, right)
            if not np.array_equal(merged, labels[nxt]):
                labels[nxt] = merged
                changed = True
                if too_big(merged):
                    return np.empty(0, dtype=np.int64)
    return labels[0]


NUMPY_KERNELS = {
    "subset_images": _images_numpy,
    "compose": _compose_numpy,
    "family_products": _family_products_numpy,
    "cyclic_closure": _cyclic_closure_numpy,
}

if numba is not None:
    NUMBA_KERNELS = {
        "subset_images": numba.njit(cache=True)(_images_loop),
        "compose": numba.njit(cache=True)(_compose_loop),
        "family_products": numba.njit(cache=True)(_family_products_loop),
        "cyclic_closure": numba.njit(cache=True)(_cyclic_closure_loop),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def subset_images(table: np.ndarray) -> np.ndarray:
    """``out[b, A]`` is the mask of ``{a*b : a in A}`` for every subset mask ``A``."""
    return _ACTIVE["subset_images"](np.ascontiguousarray(table, dtype=np.int64))


def compose(mats: np.ndarray, gens: np.ndarray) -> np.ndarray:
    """All products ``mats[k] . gens[j]``, row ``k*len(gens)+j`` of the result."""
    mats = np.ascontiguousarray(mats, dtype=np.int64)
    gens = np.ascontiguousarray(gens, dtype=np.int64)
    if mats.shape[0] == 0 or gens.shape[0] == 0:
        return np.zeros((0, mats.shape[1]), dtype=np.int64)
    return _ACTIVE["compose"](mats, gens)


def family_products(members: np.ndarray, images: np.ndarray) -> np.ndarray:
    """Flattened ``k x k`` array of set products ``members[i] * members[j]``."""
    members = np.ascontiguousarray(members, dtype=np.int64)
    if members.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return _ACTIVE["family_products"](members, images)


def cyclic_closure(table: np.ndarray, layers: int, seeds: np.ndarray, limit: int) -> np.ndarray | None:
    """Layer-0 labels of the least compatible cyclic system, or None past ``limit``."""
    seeds = np.ascontiguousarray(np.asarray(seeds, dtype=np.int64).reshape(-1, 2))
    out = _ACTIVE["cyclic_closure"](np.ascontiguousarray(table, dtype=np.int64), int(layers), seeds, int(limit))
    return None if out.shape[0] == 0 else out
