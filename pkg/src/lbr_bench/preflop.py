"""Preflop hand-vs-hand equity table.

Equities (win + half of ties over the five board cards) are computed once
per suit-isomorphism class of matchups and persisted in a small binary file:

    header  magic(6s) version(H) method(B) seed(Q) boards(Q) count(I)
    records h1(H) h2(H) equity(d) stderr_bound(d)   -- one per class
    trailer sha256 of everything above

``h1``/``h2`` name the class representative; the reversed matchup has
equity ``1 - equity``.
"""
from __future__ import annotations

import hashlib
import itertools
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .cards import HAND_CARDS, NUM_HANDS

log = logging.getLogger(__name__)

MAGIC = b"LBRPF\x00"
VERSION = 1
METHOD_MC, METHOD_EXACT = 0, 1
_HEADER = struct.Struct("<6sHBQQI")
_RECORD = np.dtype([("h1", "<u2"), ("h2", "<u2"), ("equity", "<f8"), ("stderr", "<f8")])
DEFAULT_MC_BOARDS = 130_000
DEFAULT_PATH = Path(os.environ.get(
    "LBR_PREFLOP_TABLE", Path.home() / ".cache" / "lbr_bench" / "preflop.bin"))


class TableError(IOError):
    """Missing, corrupt or incompatible equity table; rebuild it."""


def _hand_lookup() -> np.ndarray:
    idx = np.full((52, 52), -1, dtype=np.int64)
    idx[HAND_CARDS[:, 0], HAND_CARDS[:, 1]] = np.arange(NUM_HANDS)
    idx[HAND_CARDS[:, 1], HAND_CARDS[:, 0]] = np.arange(NUM_HANDS)
    return idx


def _suit_images() -> np.ndarray:
    """(24, 1326) index of each hand under every suit permutation."""
    idx = _hand_lookup()
    out = []
    for perm in itertools.permutations(range(4)):
        p = np.array(perm)
        a = (HAND_CARDS[:, 0] & ~3) | p[HAND_CARDS[:, 0] & 3]
        b = (HAND_CARDS[:, 1] & ~3) | p[HAND_CARDS[:, 1] & 3]
        out.append(idx[a, b])
    return np.array(out)


def overlap_matrix() -> np.ndarray:
    c = HAND_CARDS
    hit = np.zeros((NUM_HANDS, 52), dtype=bool)
    hit[np.arange(NUM_HANDS), c[:, 0]] = True
    hit[np.arange(NUM_HANDS), c[:, 1]] = True
    return hit[:, c[:, 0]] | hit[:, c[:, 1]]


@dataclass
class _Classes:
    ordered: np.ndarray    # (1326, 1326) canonical key of (h1, h2) under suit maps
    unordered: np.ndarray  # canonical key with the swap symmetry folded in
    overlap: np.ndarray
    canonical_hands: np.ndarray


def _classes() -> _Classes:
    images = _suit_images()
    h1 = np.arange(NUM_HANDS)[:, None]
    h2 = np.arange(NUM_HANDS)[None, :]
    ordered = np.full((NUM_HANDS, NUM_HANDS), np.iinfo(np.int64).max)
    swapped = ordered.copy()
    for img in images:
        a, b = img[h1], img[h2]
        np.minimum(ordered, a * NUM_HANDS + b, out=ordered)
        np.minimum(swapped, b * NUM_HANDS + a, out=swapped)
    return _Classes(ordered, np.minimum(ordered, swapped), overlap_matrix(),
                    np.unique(images.min(axis=0)))


class PreflopTable:
    """Dense view of the equity of every ordered pair of disjoint hands."""

    def __init__(self, records: np.ndarray, method: int, seed: int, boards: int,
                 classes: Optional[_Classes] = None):
        self.records = records
        self.method = method
        self.seed = seed
        self.boards = boards
        cls = classes or _classes()
        keys = records["h1"].astype(np.int64) * NUM_HANDS + records["h2"]
        order = np.argsort(keys)
        keys = keys[order]
        pos = np.searchsorted(keys, cls.unordered)
        pos = np.clip(pos, 0, len(keys) - 1)
        found = keys[pos] == cls.unordered
        if not found[~cls.overlap].all():
            raise TableError("equity table does not cover every matchup class")
        eq = records["equity"][order][pos]
        forward = cls.ordered == cls.unordered
        self._equity = np.where(cls.overlap, 0.0, np.where(forward, eq, 1.0 - eq))
        self._stderr = np.where(cls.overlap, np.nan, records["stderr"][order][pos])
        self._overlap = cls.overlap

    def row(self, hand: int) -> np.ndarray:
        """Equities of ``hand`` against every hand (0 for overlapping hands)."""
        return self._equity[hand]

    def equity(self, h1: int, h2: int) -> Optional[float]:
        if self._overlap[h1, h2]:
            return None
        return float(self._equity[h1, h2])

    def stderr(self, h1: int, h2: int) -> Optional[float]:
        if self._overlap[h1, h2]:
            return None
        return float(self._stderr[h1, h2])

    @property
    def method_name(self) -> str:
        return "exact" if self.method == METHOD_EXACT else "mc"

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = _HEADER.pack(MAGIC, VERSION, self.method, self.seed, self.boards,
                            len(self.records)) + self.records.tobytes()
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(body + hashlib.sha256(body).digest())
        tmp.replace(path)


def load_table(path) -> PreflopTable:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise TableError(f"cannot read equity table {path}: {e}") from e
    if len(data) < _HEADER.size + 32:
        raise TableError(f"equity table {path} is truncated")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise TableError(f"equity table {path} failed its checksum; rebuild required")
    magic, version, method, seed, boards, count = _HEADER.unpack_from(body)
    if magic != MAGIC or version != VERSION:
        raise TableError(f"{path} is not a version-{VERSION} equity table")
    records = np.frombuffer(body, dtype=_RECORD, offset=_HEADER.size)
    if len(records) != count:
        raise TableError(f"equity table {path} holds {len(records)} of {count} records")
    return PreflopTable(records.copy(), method, seed, boards)


_CACHE: dict[str, PreflopTable] = {}


def cached_table(path=DEFAULT_PATH) -> PreflopTable:
    key = str(Path(path).resolve())
    if key not in _CACHE:
        _CACHE[key] = load_table(path)
    return _CACHE[key]


def build_preflop_table(exact: bool = False, mc_boards: int = DEFAULT_MC_BOARDS,
                        seed: int = 0, progress=None) -> PreflopTable:
    """Compute the equity of every matchup class.

    For each of the 169 canonical first hands, boards are either enumerated
    (all C(50, 5)) or sampled ``mc_boards`` times, and every opponent hand is
    scored on the boards it does not touch. Isomorphic members of a class are
    averaged, and each class is combined with its reversed matchup so the
    table is exactly antisymmetric.
    """
    cls = _classes()
    hc1 = HAND_CARDS[:, 0].copy()
    hc2 = HAND_CARDS[:, 1].copy()
    n_ord = NUM_HANDS * NUM_HANDS
    est_sum = np.zeros(n_ord)
    est_cnt = np.zeros(n_ord, dtype=np.int64)
    min_boards = np.full(n_ord, np.iinfo(np.int64).max)
    row_seeds = np.random.SeedSequence(seed).generate_state(len(cls.canonical_hands))
    for i, h1 in enumerate(cls.canonical_hands):
        if exact:
            wins, counts = _kernels.equity_row_exact(h1, hc1, hc2)
        else:
            wins, counts = _kernels.equity_row_mc(h1, mc_boards, int(row_seeds[i]), hc1, hc2)
        ok = ~cls.overlap[h1]
        if (counts[ok] == 0).any():
            raise ValueError("too few boards: some matchup saw no board")
        keys = cls.ordered[h1, ok]
        np.add.at(est_sum, keys, wins[ok] / counts[ok])
        np.add.at(est_cnt, keys, 1)
        np.minimum.at(min_boards, keys, counts[ok])
        if progress:
            progress(i + 1, len(cls.canonical_hands))
    reps = np.unique(cls.unordered[~cls.overlap])
    # reversed orientation of each representative, as an ordered-class key
    r1, r2 = np.divmod(reps, NUM_HANDS)
    rev = cls.ordered[r2, r1]
    if (est_cnt[reps] == 0).any() or (est_cnt[rev] == 0).any():
        raise AssertionError("matchup class without an estimate")
    fwd_est = est_sum[reps] / est_cnt[reps]
    rev_est = est_sum[rev] / est_cnt[rev]
    equity = (fwd_est + 1.0 - rev_est) / 2.0
    n = np.minimum(min_boards[reps], min_boards[rev])
    stderr = np.zeros(len(reps)) if exact else 0.5 / np.sqrt(n)
    mirror = rev == reps
    equity[mirror] = 0.5
    stderr[mirror] = 0.0
    records = np.empty(len(reps), dtype=_RECORD)
    records["h1"], records["h2"] = r1, r2
    records["equity"] = equity
    records["stderr"] = stderr
    method = METHOD_EXACT if exact else METHOD_MC
    log.info("built %s preflop table: %d classes, min boards per matchup %d",
             "exact" if exact else "mc", len(reps), int(n.min()))
    return PreflopTable(records, method, seed, 0 if exact else mc_boards, cls)


def ensure_table(path=DEFAULT_PATH, **build_kwargs) -> PreflopTable:
    """Load the table at ``path``, building and saving it first if absent."""
    path = Path(path)
    if not path.exists():
        log.warning("building preflop equity table at %s (one-time cost)", path)
        build_preflop_table(**build_kwargs).save(path)
    return cached_table(path)

