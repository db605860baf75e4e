"""Compiled hand-ranking and rollout kernels.

Scores are plain integers: ``category << 20 | tiebreak`` where the tiebreak
packs up to five rank indices (0 = deuce .. 12 = ace) into 4-bit nibbles,
most significant first. Integer order is poker hand order.

A card id is ``rank_index * 4 + suit``.
"""
import numpy as np
from numba import njit

CATEGORY_SHIFT = 20


def _build_tables():
    n = 1 << 13
    high = np.zeros(n, dtype=np.int64)
    popcount = np.zeros(n, dtype=np.int64)
    straight = np.full(n, -1, dtype=np.int64)
    top2 = np.zeros(n, dtype=np.int64)
    top3 = np.zeros(n, dtype=np.int64)
    top5 = np.zeros(n, dtype=np.int64)
    for m in range(n):
        ranks = [r for r in range(12, -1, -1) if m >> r & 1]
        popcount[m] = len(ranks)
        if ranks:
            high[m] = ranks[0]
        for k, table in ((2, top2), (3, top3), (5, top5)):
            packed = 0
            for r in ranks[:k]:
                packed = packed << 4 | r
            # left-align short masks so the packing width is always 4k bits
            packed <<= 4 * (k - min(k, len(ranks)))
            table[m] = packed
        for hi in range(12, 3, -1):
            run = 0x1F << (hi - 4)
            if m & run == run:
                straight[m] = hi
                break
        else:
            wheel = (1 << 12) | 0xF
            if m & wheel == wheel:
                straight[m] = 3
    return high, popcount, straight, top2, top3, top5


HIGH, POPCOUNT, STRAIGHT, TOP2, TOP3, TOP5 = _build_tables()

# (1326, 2) card ids of every private hand, c1 < c2, in hand-index order.
HAND_CARDS = np.array(
    [(a, b) for a in range(52) for b in range(a + 1, 52)], dtype=np.int64
)


@njit(cache=True, inline='always')
def nonflush_score(b1, b2, b3, b4):
    # bN = ranks held at least N times
    if b4:
        q = HIGH[b4]
        k = HIGH[b1 & ~(1 << q)]
        return (7 << 20) | (q << 16) | (k << 12)
    t = -1
    if b3:
        t = HIGH[b3]
        rest = b2 & ~(1 << t)
        if rest:
            return (6 << 20) | (t << 16) | (HIGH[rest] << 12)
    st = STRAIGHT[b1]
    if st >= 0:
        return (4 << 20) | (st << 16)
    if t >= 0:
        return (3 << 20) | (t << 16) | (TOP2[b1 & ~(1 << t)] << 8)
    if b2:
        p1 = HIGH[b2]
        rest = b2 & ~(1 << p1)
        if rest:
            p2 = HIGH[rest]
            k = HIGH[b1 & ~((1 << p1) | (1 << p2))]
            return (2 << 20) | (p1 << 16) | (p2 << 12) | (k << 8)
        return (1 << 20) | (p1 << 16) | (TOP3[b1 & ~(1 << p1)] << 4)
    return TOP5[b1]


@njit(cache=True, inline='always')
def flush_score(mask):
    st = STRAIGHT[mask]
    if st >= 0:
        return (8 << 20) | (st << 16)
    return (5 << 20) | TOP5[mask]


@njit(cache=True, inline='always')
def add_rank(b1, b2, b3, b4, r):
    bit = 1 << r
    if b3 & bit:
        b4 |= bit
    elif b2 & bit:
        b3 |= bit
    elif b1 & bit:
        b2 |= bit
    else:
        b1 |= bit
    return b1, b2, b3, b4


@njit(cache=True)
def score_cards(cards):
    """Score of the best 5-card hand within ``cards`` (5 to 7 card ids)."""
    b1 = 0
    b2 = 0
    b3 = 0
    b4 = 0
    s0 = 0
    s1 = 0
    s2 = 0
    s3 = 0
    for c in cards:
        r = c >> 2
        s = c & 3
        b1, b2, b3, b4 = add_rank(b1, b2, b3, b4, r)
        if s == 0:
            s0 |= 1 << r
        elif s == 1:
            s1 |= 1 << r
        elif s == 2:
            s2 |= 1 << r
        else:
            s3 |= 1 << r
    # a 7-card flush cannot coexist with quads or a full house
    for m in (s0, s1, s2, s3):
        if POPCOUNT[m] >= 5:
            return flush_score(m)
    return nonflush_score(b1, b2, b3, b4)


@njit(cache=True)
def score_many(cards7):
    n = cards7.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = score_cards(cards7[i])
    return out


@njit(cache=True)
def board_scores(board, hc1, hc2, out):
    """Score every private hand (hc1[i], hc2[i]) on a full 5-card board.

    Hands overlapping the board get a score of -1. Non-flush hands are
    scored through a per-board table over the 13x13 rank pairs.
    """
    b1 = 0
    b2 = 0
    b3 = 0
    b4 = 0
    suit_masks = np.zeros(4, dtype=np.int64)
    board_bits = 0
    for c in board:
        r = c >> 2
        b1, b2, b3, b4 = add_rank(b1, b2, b3, b4, r)
        suit_masks[c & 3] |= 1 << r
        board_bits |= 1 << c
    fsuit = -1
    need = 0
    for s in range(4):
        cnt = POPCOUNT[suit_masks[s]]
        if cnt >= 3:
            fsuit = s
            need = 5 - cnt
    pair_table = np.empty((13, 13), dtype=np.int64)
    for r1 in range(13):
        x1, x2, x3, x4 = add_rank(b1, b2, b3, b4, r1)
        for r2 in range(r1, 13):
            y1, y2, y3, y4 = add_rank(x1, x2, x3, x4, r2)
            v = nonflush_score(y1, y2, y3, y4)
            pair_table[r1, r2] = v
            pair_table[r2, r1] = v
    for i in range(hc1.shape[0]):
        c1 = hc1[i]
        c2 = hc2[i]
        if (board_bits >> c1) & 1 or (board_bits >> c2) & 1:
            out[i] = -1
            continue
        if fsuit >= 0:
            k = 0
            m = suit_masks[fsuit]
            if c1 & 3 == fsuit:
                k += 1
                m |= 1 << (c1 >> 2)
            if c2 & 3 == fsuit:
                k += 1
                m |= 1 << (c2 >> 2)
            if k >= need:
                out[i] = flush_score(m)
                continue
        out[i] = pair_table[c1 >> 2, c2 >> 2]


@njit(cache=True)
def _accumulate(board, m1, m2, hc1, hc2, probs, scores):
    # scores[-1] slot holds the rollout hand itself
    n = hc1.shape[0]
    board_scores(board, hc1, hc2, scores)
    mine = scores[n - 1]
    acc = 0.0
    weight = 0.0
    for i in range(n - 1):
        s = scores[i]
        if s < 0:
            continue
        weight += probs[i]
        if mine > s:
            acc += probs[i]
        elif mine == s:
            acc += 0.5 * probs[i]
    return acc, weight


@njit(cache=True)
def rollout(m1, m2, board, hc1, hc2, probs):
    """Win + half-tie probability of (m1, m2) against weighted opponent hands.

    ``board`` holds 3, 4 or 5 cards; every completion of the board is
    enumerated jointly with the opponent hands, with card removal. The
    opponent hands must be disjoint from the rollout hand and the board.
    """
    n = hc1.shape[0]
    c1 = np.empty(n + 1, dtype=np.int64)
    c2 = np.empty(n + 1, dtype=np.int64)
    c1[:n] = hc1
    c2[:n] = hc2
    c1[n] = m1
    c2[n] = m2
    scores = np.empty(n + 1, dtype=np.int64)
    full = np.empty(5, dtype=np.int64)
    k = board.shape[0]
    full[:k] = board
    dead = (1 << m1) | (1 << m2)
    for c in board:
        dead |= 1 << c
    rest = np.empty(52, dtype=np.int64)
    nrest = 0
    for c in range(52):
        if not (dead >> c) & 1:
            rest[nrest] = c
            nrest += 1
    # every opponent hand meets the same number of board completions, so
    # wins over compatible weight is the average over completions
    if k == 5:
        acc, weight = _accumulate(full, m1, m2, c1, c2, probs, scores)
        return acc / weight
    total = 0.0
    weight = 0.0
    if k == 4:
        for a in range(nrest):
            full[4] = rest[a]
            acc, w = _accumulate(full, m1, m2, c1, c2, probs, scores)
            total += acc
            weight += w
        return total / weight
    for a in range(nrest):
        full[3] = rest[a]
        for b in range(a + 1, nrest):
            full[4] = rest[b]
            acc, w = _accumulate(full, m1, m2, c1, c2, probs, scores)
            total += acc
            weight += w
    return total / weight


@njit(cache=True)
def _row_add(h1, board, hc1, hc2, scores, wins, counts):
    board_scores(board, hc1, hc2, scores)
    mine = scores[h1]
    a = hc1[h1]
    b = hc2[h1]
    for j in range(hc1.shape[0]):
        s = scores[j]
        if s < 0 or hc1[j] == a or hc1[j] == b or hc2[j] == a or hc2[j] == b:
            continue
        counts[j] += 1
        if mine > s:
            wins[j] += 1.0
        elif mine == s:
            wins[j] += 0.5


@njit(cache=True)
def equity_row_mc(h1, n_boards, seed, hc1, hc2):
    """Sampled win + half-tie totals of hand ``h1`` against every hand.

    Boards are drawn uniformly from the 50 cards left after ``h1``; an
    opponent hand only counts the boards it does not touch.
    """
    np.random.seed(seed)
    n = hc1.shape[0]
    wins = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    scores = np.empty(n, dtype=np.int64)
    deck = np.empty(50, dtype=np.int64)
    j = 0
    for c in range(52):
        if c != hc1[h1] and c != hc2[h1]:
            deck[j] = c
            j += 1
    board = np.empty(5, dtype=np.int64)
    for _ in range(n_boards):
        for i in range(5):
            r = i + np.random.randint(0, 50 - i)
            tmp = deck[i]
            deck[i] = deck[r]
            deck[r] = tmp
            board[i] = deck[i]
        _row_add(h1, board, hc1, hc2, scores, wins, counts)
    return wins, counts


@njit(cache=True)
def equity_row_exact(h1, hc1, hc2):
    n = hc1.shape[0]
    wins = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    scores = np.empty(n, dtype=np.int64)
    deck = np.empty(50, dtype=np.int64)
    j = 0
    for c in range(52):
        if c != hc1[h1] and c != hc2[h1]:
            deck[j] = c
            j += 1
    board = np.empty(5, dtype=np.int64)
    for a in range(46):
        board[0] = deck[a]
        for b in range(a + 1, 47):
            board[1] = deck[b]
            for c in range(b + 1, 48):
                board[2] = deck[c]
                for d in range(c + 1, 49):
                    board[3] = deck[d]
                    for e in range(d + 1, 50):
                        board[4] = deck[e]
                        _row_add(h1, board, hc1, hc2, scores, wins, counts)
    return wins, counts


@njit(cache=True)
def category_counts_all7():
    """Category histogram over all C(52, 7) hands."""
    counts = np.zeros(9, dtype=np.int64)
    cards = np.empty(7, dtype=np.int64)
    for a in range(46):
        cards[0] = a
        for b in range(a + 1, 47):
            cards[1] = b
            for c in range(b + 1, 48):
                cards[2] = c
                for d in range(c + 1, 49):
                    cards[3] = d
                    for e in range(d + 1, 50):
                        cards[4] = e
                        for f in range(e + 1, 51):
                            cards[5] = f
                            for g in range(f + 1, 52):
                                cards[6] = g
                                s = score_cards(cards)
                                counts[s >> 20] += 1
    return counts


TABLES = ()
