# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same signatures and results as ``_kernel_py``."""

from libcpp.vector cimport vector

cdef int INF = 1 << 30


cdef class _Graph:
    """Compact CSR graph over the nodes touched by a set of edge keys."""
    cdef public list nodes          # compact index -> local index
    cdef dict where                 # local index -> compact index
    cdef vector[int] off, tgt, eid  # CSR rows, neighbour, edge index
    cdef vector[int] eu, ev         # edge endpoints (compact)
    cdef public list keys           # edge index -> key
    cdef int n, ne

    def __init__(self, keys, long long m):
        cdef long long k
        cdef int u, v, i, e
        cdef vector[int] deg
        self.where = {}
        self.nodes = []
        self.keys = list(keys)
        self.ne = len(self.keys)
        self.eu.resize(self.ne)
        self.ev.resize(self.ne)
        for e in range(self.ne):
            k = self.keys[e]
            u = self._node(<int>(k // m))
            v = self._node(<int>(k % m))
            self.eu[e] = u
            self.ev[e] = v
        self.n = len(self.nodes)
        deg.assign(self.n + 1, 0)
        for e in range(self.ne):
            deg[self.eu[e] + 1] += 1
            deg[self.ev[e] + 1] += 1
        for i in range(self.n):
            deg[i + 1] += deg[i]
        self.off = deg
        self.tgt.resize(2 * self.ne)
        self.eid.resize(2 * self.ne)
        for e in range(self.ne):
            u = self.eu[e]
            v = self.ev[e]
            self.tgt[deg[u]] = v
            self.eid[deg[u]] = e
            deg[u] += 1
            self.tgt[deg[v]] = u
            self.eid[deg[v]] = e
            deg[v] += 1

    cdef int _node(self, int x):
        got = self.where.get(x)
        if got is not None:
            return got
        i = len(self.nodes)
        self.where[x] = i
        self.nodes.append(x)
        return i

    cdef int find(self, int x):
        got = self.where.get(x)
        return -1 if got is None else got


cdef int _g_out(_Graph g, const unsigned char[:] color, int a, int b,
                const unsigned char* excl, int cap, unsigned char* inc, list paths,
                object b_id=None) except -1:
    """Mark in ``inc`` the edges forwarded by compact node a to compact node b."""
    cdef int n = g.n
    cdef vector[int] dist, queue, path, fj, fk, fpos, fnode
    cdef vector[unsigned char] col, onpath
    cdef int i, h, t, u, w, c, j, j2, kmax, km, pos, dc, top, e, ca, capped = 0
    col.resize(n)
    for i in range(n):
        col[i] = color[g.nodes[i]]
    ca = col[a]
    dist.assign(n, INF)
    queue.resize(n)
    t = 0
    for i in range(n):
        if col[i] != ca:
            dist[i] = 0
            queue[t] = i
            t += 1
    h = 0
    while h < t:
        u = queue[h]
        h += 1
        for i in range(g.off[u], g.off[u + 1]):
            if excl[g.eid[i]]:
                continue
            w = g.tgt[i]
            if dist[w] == INF:
                dist[w] = dist[u] + 1
                queue[t] = w
                t += 1

    onpath.assign(n, 0)
    onpath[a] = 1
    if b >= 0:
        onpath[b] = 1
    path.reserve(n + 1)
    path.push_back(a)
    fnode.resize(n + 1)
    fj.resize(n + 1)
    fk.resize(n + 1)
    fpos.resize(n + 1)
    top = 0
    fnode[0] = a
    fj[0] = 0
    fk[0] = INF
    fpos[0] = g.off[a]
    while top >= 0:
        u = fnode[top]
        j = fj[top]
        kmax = fk[top]
        pos = fpos[top]
        descended = False
        while pos < g.off[u + 1]:
            e = g.eid[pos]
            c = g.tgt[pos]
            pos += 1
            if excl[e] or onpath[c]:
                continue
            if col[c] != ca:
                if j <= kmax:
                    for i in range(1, <int>path.size()):
                        inc[_edge_between(g, path[i - 1], path[i], excl)] = 1
                    inc[e] = 1
                    if paths is not None:
                        paths.append((b_id,) + tuple(g.nodes[path[i]] for i in range(<int>path.size())) + (g.nodes[c],))
                continue
            j2 = j + 1
            dc = dist[c]
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
            fpos[top] = pos
            top += 1
            fnode[top] = c
            fj[top] = j2
            fk[top] = km
            fpos[top] = g.off[c]
            path.push_back(c)
            onpath[c] = 1
            descended = True
            break
        if not descended:
            if u != a:
                path.pop_back()
                onpath[u] = 0
            top -= 1
    return capped


cdef inline int _edge_between(_Graph g, int u, int v, const unsigned char* excl):
    cdef int i
    for i in range(g.off[u], g.off[u + 1]):
        if g.tgt[i] == v and not excl[g.eid[i]]:
            return g.eid[i]
    return -1


def g_out_edges(keys, long long m, int a, int b, const unsigned char[:] color, int cap,
                paths=None):
    cdef _Graph g = _Graph(keys, m)
    cdef int ca_ = g.find(a), cb = g.find(b)
    cdef vector[unsigned char] excl, inc
    cdef int e, capped
    if ca_ < 0:
        return set(), 0
    excl.assign(g.ne, 0)
    inc.assign(g.ne, 0)
    capped = _g_out(g, color, ca_, cb, excl.data(), cap, inc.data(), paths, b)
    return {g.keys[e] for e in range(g.ne) if inc[e]}, capped


def node_outgoing(int a, nbrs, dict inbox, long long m, const unsigned char[:] color, int cap):
    cdef dict direct = {}, index = {}, cands = {}
    cdef list keys = []
    cdef vector[int] count, solo
    cdef vector[unsigned char] excl, inc
    cdef long long k
    cdef int x, e, b, ca_, cb, capped = 0
    cdef _Graph g
    for x in nbrs:
        k = a * m + x if a < x else x * m + a
        direct[k] = x
        index[k] = len(keys)
        keys.append(k)
        count.push_back(1)
        solo.push_back(-1)
    for x, msg in inbox.items():
        for k, p in (<dict>msg).items():
            got = index.get(k)
            if got is None:
                e = len(keys)
                index[k] = e
                keys.append(k)
                count.push_back(1)
                solo.push_back(x)
                cands[k] = [(len(p), p)]
            else:
                e = got
                count[e] += 1
                lst = cands.get(k)
                if lst is not None:
                    (<list>lst).append((len(p), p))
    for lst in cands.values():
        if len(<list>lst) > 1:
            (<list>lst).sort()
    g = _Graph(keys, m)
    ca_ = g.find(a)
    out = {}
    excl.resize(g.ne)
    inc.resize(g.ne)
    for b in nbrs:
        cb = g.find(b)
        for e in range(g.ne):
            excl[e] = count[e] == 1 and solo[e] == b
            inc[e] = 0
        capped += _g_out(g, color, ca_, cb, excl.data(), cap, inc.data(), None)
        msg = {}
        for e in range(g.ne):
            if not inc[e]:
                continue
            k = keys[e]
            got = direct.get(k)
            if got is not None:
                msg[k] = (got, a)
                continue
            for _, p in <list>cands[k]:
                if b not in <tuple>p:
                    msg[k] = <tuple>p + (a,)
                    break
        out[b] = msg
    return out, capped


def connect_inside(long long a, nodes, int first_bit, int width):
    cdef list cur = sorted(nodes), white, black, targets = []
    cdef int bit = first_bit, shift
    cdef unsigned long long x, y, bx = 0, best_x = 0, best_w = 0, best_b = 0, ua = <unsigned long long>a
    cdef bint have
    while bit < width and len(cur) > 1:
        shift = width - 1 - bit
        bit += 1
        white = [v for v in cur if not (v >> shift) & 1]
        black = [v for v in cur if (v >> shift) & 1]
        if not white or not black:
            continue
        have = False
        for vx in white:
            x = vx
            for vy in black:
                y = vy
                bx = x ^ y
                if (not have or bx < best_x or (bx == best_x and (x < best_w or (x == best_w and y < best_b)))):
                    have = True
                    best_x = bx
                    best_w = x
                    best_b = y
        if (ua >> shift) & 1:
            if best_b == ua:
                targets.append(int(best_w))
            cur = black
        else:
            if best_w == ua:
                targets.append(int(best_b))
            cur = white
    return targets
