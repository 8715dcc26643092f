"""Disk-backed memoization of the expensive physics tables.

Entries are .npz files keyed by the config hash plus a short tag; a sha256
checksum over the packed arrays detects corruption, which silently falls
back to recomputation.  Cache hits are bit-identical to recomputation
because only final arrays are stored.
"""

import hashlib
import io
import os
import tempfile
import zipfile

import numpy as np


def _checksum(arrays):
    h = hashlib.sha256()
    for name in sorted(arrays):
        h.update(name.encode())
        h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()


class PhysicsCache:
    """get/put of named numpy array bundles under a cache directory."""

    def __init__(self, cache_dir, enabled=True):
        self.cache_dir = cache_dir
        self.enabled = enabled and cache_dir is not None
        if self.enabled:
            os.makedirs(cache_dir, exist_ok=True)

    def _path(self, key):
        return os.path.join(self.cache_dir, f"{key}.npz")

    def get(self, key):
        if not self.enabled:
            return None
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with np.load(path, allow_pickle=False) as npz:
                arrays = {k: npz[k] for k in npz.files if k != "__checksum"}
                stored = str(npz["__checksum"])
        except (OSError, ValueError, KeyError, zipfile.BadZipFile):
            return None
        if _checksum(arrays) != stored:
            return None  # corrupted entry: recompute
        return arrays

    def put(self, key, arrays):
        if not self.enabled:
            return
        payload = dict(arrays)
        payload["__checksum"] = np.array(_checksum(arrays))
        buf = io.BytesIO()
        np.savez(buf, **payload)
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(buf.getvalue())
            os.replace(tmp, self._path(key))
        except OSError:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def cache_physics(cache, config_hash, span_count, compute):
    """Memoize per-channel (eta, p_ase, gsnr) tables for one span count.

    ``compute`` returns the dict of arrays on a miss.  Returns the tables
    either way; with caching disabled it simply computes.
    """
    key = f"physics-{config_hash}-s{span_count}"
    hit = cache.get(key) if cache is not None else None
    if hit is not None:
        return hit
    tables = compute()
    if cache is not None:
        cache.put(key, tables)
    return tables
