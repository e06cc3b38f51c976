"""Canonical labeling of leg-anchored trivalent diagrams with signs.

A diagram presentation consists of an ordered word of graded legs, a set of
trivalent vertices with cyclically ordered ports, an optional floating iota
vertex, and a perfect matching (the edges) on all half-edges.  Three kinds
of relabeling connect presentations of the same generator:

* permuting legs, when the signature's mobility regime allows the swap,
  at the graded Koszul cost (-1)^(xy) per adjacent transposition;
* renumbering the internal vertices (free);
* rotating a vertex's cyclic port order (free) or reflecting it
  (antisymmetry, cost -1).

``canonical_form`` searches this orbit for the presentation with the
lexicographically smallest encoding stream and returns it together with the
accumulated sign; if presentations of opposite sign tie for the minimum the
generator is its own negative and the search reports zero.

The target leg word is fixed up front (the lexicographically least word
reachable under the mobility constraints).  Legs whose positions are then
forced (members of classes that are rigid among themselves) are encoded
first, vertices second, and freely permutable legs last, so that by the
time a mobile leg is placed its attachment almost always points at an
already-numbered vertex.  Tokens carry an iterated-refinement color so
that structurally distinct candidates separate immediately; only genuine
symmetries keep the search branching, which is what the zero detection
needs.
"""

from .legs import grade

INF = 1 << 30

# Port maps: slot -> original port offset.  The first three are rotations
# (orientation preserving), the last three reflections (sign -1).
_PORT_MAPS = (
    ((0, 1, 2), 1),
    ((1, 2, 0), 1),
    ((2, 0, 1), 1),
    ((0, 2, 1), -1),
    ((2, 1, 0), -1),
    ((1, 0, 2), -1),
)


def rigid_pair(regime, a, b):
    """Whether legs with codes a, b may never transpose in this regime."""
    if regime == "free":
        return False
    if regime == "none":
        return True
    if regime == "difkind":  # hatted F space: same-kind pairs are rigid
        return (a & 3) == (b & 3)
    if regime == "wedge":  # F legs rigid among themselves, grade-1 legs move
        return (a & 3) == 3 and (b & 3) == 3
    if regime == "line":  # two-line spaces: only nc-nc pairs are rigid
        return (a >> 2) == 1 and (b >> 2) == 1
    raise ValueError("unknown mobility regime %r" % regime)


def _min_kind_word(legs, regime):
    """Lexicographically least reachable leg word, by greedy selection.

    Legs of equal code are interchangeable for word purposes, so always
    taking an available leg of minimal code is optimal.
    """
    import heapq

    n = len(legs)
    preds = [
        [j for j in range(i) if rigid_pair(regime, legs[i], legs[j])]
        for i in range(n)
    ]
    succs = [[] for _ in range(n)]
    for i, ps in enumerate(preds):
        for j in ps:
            succs[j].append(i)
    indeg = [len(p) for p in preds]
    avail = [(legs[i], i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(avail)
    word = []
    order = []
    while avail:
        code, i = heapq.heappop(avail)
        word.append(code)
        order.append(i)
        for k in succs[i]:
            indeg[k] -= 1
            if indeg[k] == 0:
                heapq.heappush(avail, (legs[k], k))
    return tuple(word), order


def _refine_colors(legs, nv, partner, iota, pinned):
    """Canonically numbered iterated-refinement colors per half-edge.

    Node colors start from leg codes (plus positions when every leg is
    pinned), an iota marker, and a vertex marker, then refine by sorted
    neighbor-color multisets.  Renumbering after each round makes the
    values presentation independent.
    """
    n = len(legs)
    base = n + (1 if iota else 0)
    nodes = base + nv

    def node_of(h):
        return h if h < base else base + (h - base) // 3

    keys = []
    for i in range(n):
        keys.append((0, legs[i], i if pinned else -1))
    if iota:
        keys.append((1, 0, 0))
    for _ in range(nv):
        keys.append((2, 0, 0))
    order = {k: c for c, k in enumerate(sorted(set(keys)))}
    colors = [order[k] for k in keys]
    for _ in range(nodes):
        new_keys = []
        for node in range(nodes):
            if node < base:
                nb = (colors[node_of(partner[node])],)
            else:
                s = base + 3 * (node - base)
                nb = tuple(
                    sorted(
                        (
                            colors[node_of(partner[s])],
                            colors[node_of(partner[s + 1])],
                            colors[node_of(partner[s + 2])],
                        )
                    )
                )
            new_keys.append((colors[node], nb))
        order = {k: c for c, k in enumerate(sorted(set(new_keys)))}
        new_colors = [order[k] for k in new_keys]
        if new_colors == colors:
            break
        colors = new_colors
    return [colors[node_of(h)] for h in range(base + 3 * nv)]


class _Search:
    def __init__(self, legs, nv, partner, iota, regime):
        self.legs = legs
        self.n = len(legs)
        self.nv = nv
        self.partner = partner
        self.iota = iota
        self.base = self.n + (1 if iota else 0)
        self.regime = regime
        self.word, greedy_order = _min_kind_word(legs, regime)
        self.hcolor = _refine_colors(
            legs, nv, partner, iota, regime == "none"
        )
        # positions of codes whose class is rigid within itself are forced:
        # class members keep their original relative order
        self.pinned_positions = []
        self.mobile_positions = []
        by_code = {}
        for p, code in enumerate(self.word):
            if rigid_pair(regime, code, code):
                self.pinned_positions.append(p)
            else:
                self.mobile_positions.append(p)
            by_code.setdefault(code, []).append(p)
        self.forced = {}  # position -> original leg, for pinned classes
        self.is_pinned_leg = [False] * self.n
        queues = {}
        for i in greedy_order:
            code = legs[i]
            if rigid_pair(regime, code, code):
                pos = by_code[code][queues.get(code, 0)]
                queues[code] = queues.get(code, 0) + 1
                self.forced[pos] = i
                self.is_pinned_leg[i] = True
        # mobile candidates by code
        self.mobile_by_code = {}
        for i, code in enumerate(legs):
            if not rigid_pair(regime, code, code):
                self.mobile_by_code.setdefault(code, []).append(i)
        # state
        self.pos_of = [-1] * self.n
        for pos, i in self.forced.items():
            self.pos_of[i] = pos
        self.vnum = [-1] * nv
        self.vslot = [None] * nv
        self.cur = []
        self.best = None
        self.best_signs = set()
        self.mobile_placed = [False] * self.n

    # -- id mapping ---------------------------------------------------------
    def _new_id(self, h, stage):
        """Assigned id of original half-edge h, or INF if not determined.

        Pinned legs have constant positions and always resolve; vertices
        resolve from stage 1 once numbered; mobile legs resolve in stage 2
        once placed.
        """
        n = self.n
        if h < n:
            if self.is_pinned_leg[h]:
                return self.pos_of[h]
            if stage == 2 and self.mobile_placed[h]:
                return self.pos_of[h]
            return INF
        if self.iota and h == n:
            return n
        if stage == 0:
            return INF
        k, j = divmod(h - self.base, 3)
        if self.vnum[k] < 0:
            return INF
        return self.base + 3 * self.vnum[k] + self.vslot[k][j]

    # -- stream handling ------------------------------------------------------
    def _push(self, tokens):
        cur, best = self.cur, self.best
        i = len(cur)
        cur.extend(tokens)
        if best is None:
            return True
        if cur[:i] != best[:i]:
            return True
        if cur[i:] > best[i : len(cur)]:
            del cur[i:]
            return False
        return True

    def _pop(self, k):
        del self.cur[len(self.cur) - k :]

    def _leaf(self):
        sign = self._koszul_sign()
        cur, best = self.cur, self.best
        if best is None or cur < best:
            self.best = list(cur)
            self.best_signs = {sign}
        elif cur == best:
            self.best_signs.add(sign)

    def _koszul_sign(self):
        legs = self.legs
        pos = self.pos_of
        odd = [i for i in range(self.n) if grade(legs[i]) & 1]
        sign = 1
        for a in range(len(odd)):
            for b in range(a + 1, len(odd)):
                i, j = odd[a], odd[b]
                if (pos[i] < pos[j]) != (i < j):
                    sign = -sign
        flips = self._flips
        return -sign if flips & 1 else sign

    # -- stage 0: pinned legs ---------------------------------------------------
    def run(self):
        self._flips = 0
        tokens = []
        new_id = self._new_id
        hcolor = self.hcolor
        partner = self.partner
        for p in self.pinned_positions:
            i = self.forced[p]
            h = partner[i]
            tokens.append(new_id(h, 0))
            tokens.append(hcolor[h])
        self.cur.extend(tokens)
        self._place_vertices(0)
        return self.word, self.best, self.best_signs

    # -- stage 1: vertices --------------------------------------------------------
    def _place_vertices(self, t):
        if t == self.nv:
            self._place_mobile(0)
            return
        base = self.base
        partner = self.partner
        hcolor = self.hcolor
        new_id = self._new_id
        moves = []
        for k in range(self.nv):
            if self.vnum[k] >= 0:
                continue
            s = base + 3 * k
            ps = (partner[s], partner[s + 1], partner[s + 2])
            ids = (new_id(ps[0], 1), new_id(ps[1], 1), new_id(ps[2], 1))
            cols = (hcolor[ps[0]], hcolor[ps[1]], hcolor[ps[2]])
            for pm, psign in _PORT_MAPS:
                a, b, c = pm
                toks = (ids[a], cols[a], ids[b], cols[b], ids[c], cols[c])
                moves.append((toks, k, pm, psign))
        moves.sort(key=lambda m: m[0])
        for toks, k, pm, psign in moves:
            if not self._push(toks):
                continue
            self.vnum[k] = t
            inv = [0, 0, 0]
            for slot, orig in enumerate(pm):
                inv[orig] = slot
            self.vslot[k] = tuple(inv)
            if psign < 0:
                self._flips += 1
            self._place_vertices(t + 1)
            if psign < 0:
                self._flips -= 1
            self.vnum[k] = -1
            self._pop(6)

    # -- stage 2: mobile legs --------------------------------------------------------
    def _place_mobile(self, idx):
        if idx == len(self.mobile_positions):
            self._leaf()
            return
        p = self.mobile_positions[idx]
        code = self.word[p]
        partner = self.partner
        hcolor = self.hcolor
        new_id = self._new_id
        cands = []
        for i in self.mobile_by_code[code]:
            if self.mobile_placed[i]:
                continue
            h = partner[i]
            cands.append(((new_id(h, 2), hcolor[h]), i))
        cands.sort()
        for tok, i in cands:
            if not self._push(tok):
                continue
            self.pos_of[i] = p
            self.mobile_placed[i] = True
            self._place_mobile(idx + 1)
            self.mobile_placed[i] = False
            self.pos_of[i] = -1
            self._pop(2)


def canonical_form(legs, nv, edges, iota, regime):
    """Minimal presentation of a diagram orbit.

    Returns ``(word, edges, sign)`` with word the canonical leg code tuple
    and edges the canonical sorted edge tuple, or ``None`` when the
    generator is zero (a presentation ties with its own negative).
    Degenerate inputs (an edge joining two ports of one vertex) are zero.
    """
    n = len(legs)
    base = n + (1 if iota else 0)
    nh = base + 3 * nv
    partner = [-1] * nh
    for a, b in edges:
        partner[a] = b
        partner[b] = a
    for k in range(nv):
        s = base + 3 * k
        if partner[s] in (s + 1, s + 2) or partner[s + 1] == s + 2:
            return None
    search = _Search(legs, nv, partner, iota, regime)
    word, best, signs = search.run()
    if 1 in signs and -1 in signs:
        return None
    sign = next(iter(signs))
    edges_out = _rebuild_edges(search, best)
    return word, edges_out, sign


def _rebuild_edges(search, stream):
    """Decode the canonical edge set from the winning token stream.

    Id tokens sit at even offsets within each stage block; INF tokens are
    resolved by the partner's own later token.
    """
    n, nv, iota = search.n, search.nv, search.iota
    base = n + (1 if iota else 0)
    edges = set()
    idx = 0
    for p in search.pinned_positions:
        tok = stream[idx]
        idx += 2
        if tok != INF:
            edges.add((min(tok, p), max(tok, p)))
    for t in range(nv):
        for j in range(3):
            tok = stream[idx]
            idx += 2
            h = base + 3 * t + j
            if tok != INF:
                edges.add((min(tok, h), max(tok, h)))
    for p in search.mobile_positions:
        tok = stream[idx]
        idx += 2
        if tok != INF:
            edges.add((min(tok, p), max(tok, p)))
    return tuple(sorted(edges))


_CACHE = {}
_CACHE_LIMIT = 1_500_000


def canonical_cached(legs, nv, edges, iota, regime):
    key = (regime, legs, edges, iota)
    hit = _CACHE.get(key)
    if hit is None:
        hit = canonical_form(legs, nv, edges, iota, regime)
        if len(_CACHE) >= _CACHE_LIMIT:
            _CACHE.clear()
        _CACHE[key] = hit
    return hit


def clear_cache():
    _CACHE.clear()
