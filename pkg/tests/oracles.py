"""Independent reference computations the fast paths are checked against.

None of these import the code under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_window_features(rows):
    """26 aggregates of a run of ``(t, ax, ay, az, gx, gy, gz, lat, lon, speed)`` rows, in pure Python."""
    cols = list(zip(*rows))
    motion = [cols[i] for i in range(1, 7)]
    speed = cols[9]
    n = len(rows)

    def mean(xs):
        return math.fsum(xs) / n

    def pstd(xs):
        m = mean(xs)
        return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / n)

    out = [mean(c) for c in motion] + [mean(speed)]
    out += [pstd(c) for c in motion] + [pstd(speed)]
    out += [max(c) for c in motion]
    out += [min(c) for c in motion]
    return out


def brute_confusion_curve(scores, labels):
    """Precision/recall at every distinct score, by recounting the confusion matrix each time."""
    pos = sum(labels)
    out = []
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, labels) if s >= t and y == 1)
        fp = sum(1 for s, y in zip(scores, labels) if s >= t and y == 0)
        out.append((t, tp / (tp + fp), tp / pos))
    return out


def rbf_gram(X, gamma):
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d = X[i] - X[j]
            K[i, j] = math.exp(-gamma * float(d @ d))
    return K


def brute_dual(K, y, C):
    """Exact maximizer of the SVM dual by enumerating active sets.

    Every index is either at 0, at C, or free; for each of the 3^n patterns
    the free block is solved from its stationarity + equality system and
    kept if it lands inside the box.  The objective is concave, so the best
    feasible candidate is the global maximum.  Returns ``(alpha, objective)``.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    Q = np.outer(y, y) * K
    best, best_alpha = -np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        alpha = np.array([0.0 if p == 0 else C if p == 1 else np.nan for p in pattern])
        free = [i for i, p in enumerate(pattern) if p == 2]
        fixed = [i for i, p in enumerate(pattern) if p != 2]
        if not free:
            if abs(y @ alpha) > 1e-9 * max(C, 1.0):
                continue
        else:
            f = np.array(free)
            b = np.array(fixed, dtype=int)
            m = len(f)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(f, f)]
            A[:m, m] = y[f]
            A[m, :m] = y[f]
            rhs = np.zeros(m + 1)
            rhs[:m] = 1.0 - (Q[np.ix_(f, b)] @ alpha[b] if len(b) else 0.0)
            rhs[m] = -(y[b] @ alpha[b]) if len(b) else 0.0
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            af = sol[:m]
            if (af < -1e-10).any() or (af > C + 1e-10).any():
                continue
            alpha[f] = np.clip(af, 0.0, C)
        obj = alpha.sum() - 0.5 * alpha @ Q @ alpha
        if obj > best:
            best, best_alpha = obj, alpha
    return best_alpha, float(best)


def dual_bias(alpha, y, K, C, eps=1e-9):
    """Bias from a dual solution: mean over free SVs, else the middle of the feasible range."""
    y = np.asarray(y, dtype=float)
    f = K @ (alpha * y)
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return float(np.mean(y[free] - f[free]))
    lo, hi = -np.inf, np.inf
    for i in range(len(y)):
        # alpha=0 needs y(f+b) >= 1, alpha=C needs y(f+b) <= 1
        at_zero = alpha[i] <= eps
        if (y[i] > 0) == at_zero:
            lo = max(lo, y[i] - f[i])
        else:
            hi = min(hi, y[i] - f[i])
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    return float(lo if np.isfinite(lo) else hi)


def power_eigs(A, iters_square=60, polish=200, seed=0):
    """All eigenpairs of a symmetric PSD matrix by power iteration with deflation.

    Each leading vector comes from iterating on a normalized repeated square
    of the (deflated) matrix, which is power iteration on A^(2^k), followed
    by plain power steps on A itself.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    vals, vecs = [], []
    B = A.copy()
    for _ in range(n):
        P = B / max(np.linalg.norm(B), 1e-300)
        for _ in range(iters_square):
            P = P @ P
            norm = np.linalg.norm(P)
            if norm == 0:
                break
            P /= norm
        v = P @ rng.standard_normal(n)
        if np.linalg.norm(v) == 0:
            v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        for _ in range(polish):
            w = B @ v
            nw = np.linalg.norm(w)
            if nw == 0:
                break
            v = w / nw
        lam = float(v @ A @ v)
        vals.append(lam)
        vecs.append(v)
        B = B - lam * np.outer(v, v)
    order = np.argsort(vals)[::-1]
    return np.array(vals)[order], np.array(vecs)[order]


def central_difference(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def geojson_problems(doc):
    """Structural RFC 7946 check of a FeatureCollection; returns a list of problems (empty when valid)."""
    problems = []

    def position(p, where):
        if not (isinstance(p, list) and len(p) in (2, 3) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)):
            problems.append(f"{where}: bad position {p!r}")
            return
        lon, lat = p[0], p[1]
        if not (-180 <= lon <= 180 and -90 <= lat <= 90):
            problems.append(f"{where}: position out of range {p!r}")

    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        return ["top level is not a FeatureCollection"]
    feats = doc.get("features")
    if not isinstance(feats, list):
        return ["features is not an array"]
    for i, f in enumerate(feats):
        where = f"features[{i}]"
        if not isinstance(f, dict) or f.get("type") != "Feature":
            problems.append(f"{where}: not a Feature")
            continue
        if "properties" not in f or not (f["properties"] is None or isinstance(f["properties"], dict)):
            problems.append(f"{where}: properties must be an object or null")
        g = f.get("geometry")
        if g is None:
            continue
        kind, coords = g.get("type"), g.get("coordinates")
        if kind == "Point":
            position(coords, where)
        elif kind == "LineString":
            if not isinstance(coords, list) or len(coords) < 2:
                problems.append(f"{where}: LineString needs two or more positions")
            else:
                for p in coords:
                    position(p, where)
        else:
            problems.append(f"{where}: unexpected geometry {kind!r}")
    return problems
