"""Pure-Python hot kernels.  ``_kernel.pyx`` mirrors these function for function."""

from __future__ import annotations

from collections import deque

INF = 1 << 30


def _adjacency(edges, m):
    adj = {}
    for e in edges:
        u, v = divmod(e, m)
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for lst in adj.values():
        lst.sort()
    return adj


def _nearest(adj, color, ca, same):
    """Hop distance from every node to the nearest node whose colour is
    ``== ca`` (``same``) or ``!= ca`` (not ``same``)."""
    dist = {}
    queue = deque()
    for v in adj:
        if (color[v] == ca) == same:
            dist[v] = 0
            queue.append(v)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in adj[u]:
            if w not in dist:
                dist[w] = du
                queue.append(w)
    return dist


def g_out_edges(edges, m, a, b, color, cap, paths=None):
    """Edge keys forwarded by ``a`` to neighbour ``b``.

    ``edges`` are the keys ``u * m + v`` (u < v) of the graph a assembled for
    b, which must contain ``a * m + b`` or ``b * m + a``.  Walks every simple
    path b-a-c1..ck-d whose interior shares a's colour and whose end d does
    not, pruned by the "closer opposite-colour node" test.  Edges touching
    ``b`` are not reported.  Returns ``(edge_keys, capped)`` where ``capped``
    counts expansions cut by ``cap``.  If ``paths`` is a list, every accepted
    path (as a tuple starting with b) is appended to it.
    """
    adj = _adjacency(edges, m)
    if a not in adj:
        return set(), 0
    ca = color[a]
    dist = _nearest(adj, color, ca, False)
    out = set()
    capped = 0
    path = [a]
    on_path = {a, b}

    # Explicit stack: (node, depth j of node, kmax, iterator position).
    stack = [(a, 0, INF, 0)]
    while stack:
        u, j, kmax, pos = stack.pop()
        nbrs = adj[u]
        while pos < len(nbrs):
            c = nbrs[pos]
            pos += 1
            if c in on_path:
                continue
            if color[c] != ca:
                if j <= kmax:
                    for x, y in zip(path, path[1:]):
                        out.add(x * m + y if x < y else y * m + x)
                    out.add(u * m + c if u < c else c * m + u)
                    if paths is not None:
                        paths.append((b, *path, c))
                continue
            j2 = j + 1
            dc = dist.get(c, INF)
            if dc >= INF:
                continue
            km = kmax
            if dc < j2 + 1 and dc + j2 - 1 < km:
                km = dc + j2 - 1
            if dc > km - j2 + 1:
                continue
            if j2 > cap:
                capped += 1
                continue
            stack.append((u, j, kmax, pos))
            stack.append((c, j2, km, 0))
            path.append(c)
            on_path.add(c)
            break
        else:
            if u != a:
                path.pop()
                on_path.discard(u)
    return out, capped


def connect_inside(a, nodes, first_bit, width):
    """Targets the recursive XOR split connects ``a`` to.

    ``nodes`` are ints sharing a's colour.  Splits start at bit ``first_bit``
    (0 = most significant); a one-sided split moves on to the next bit.
    Argmin ties break on the smaller (white, black) pair.
    """
    targets = []
    cur = sorted(nodes)
    bit = first_bit
    while bit < width and len(cur) > 1:
        shift = width - 1 - bit
        bit += 1
        white = [x for x in cur if not (x >> shift) & 1]
        black = [x for x in cur if (x >> shift) & 1]
        if not white or not black:
            continue
        best = None
        for x in white:
            for y in black:
                key = (x ^ y, x, y)
                if best is None or key < best:
                    best = key
        _, w, bb = best
        if (a >> shift) & 1:
            if bb == a:
                targets.append(w)
            cur = black
        else:
            if w == a:
                targets.append(bb)
            cur = white
    return targets


def node_outgoing(a, nbrs, inbox, m, color, cap):
    """Messages node ``a`` sends to each neighbour, given its inbox.

    ``inbox`` maps sender -> {edge key: path}.  Each forwarded edge carries
    the shortest (then lexicographically smallest) path that avoids the
    recipient, extended by ``a``; a's own links carry ``(other, a)``.  Edges
    with no such path are left out.  Returns ``({b: message}, capped)``.
    """
    direct = {}
    for x in nbrs:
        direct[a * m + x if a < x else x * m + a] = x
    counts = dict.fromkeys(direct, 1)
    cands = {}
    for x, msg in inbox.items():
        for k, p in msg.items():
            counts[k] = counts.get(k, 0) + 1
            cands.setdefault(k, []).append((len(p), p))
    for lst in cands.values():
        lst.sort()
    out = {}
    capped = 0
    for b in nbrs:
        from_b = inbox.get(b, {})
        keys = [k for k, c in counts.items() if c > 1 or k not in from_b]
        chosen, cut = g_out_edges(keys, m, a, b, color, cap)
        capped += cut
        msg = {}
        for k in chosen:
            x = direct.get(k)
            if x is not None:
                msg[k] = (x, a)
                continue
            for _, p in cands[k]:
                if b not in p:
                    msg[k] = p + (a,)
                    break
        out[b] = msg
    return out, capped
