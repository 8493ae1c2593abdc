"""Hot loops of the tomographic fit.

Two interchangeable implementations of each kernel live here: explicit
loops compiled with numba, and vectorised numpy.  ``batch_loss`` and
``de_generations`` dispatch on :data:`qstdark._accel.USE_NUMBA`.

Parameter rows are laid out as ``[w1..w16, N]`` (ideal model) or
``[w1..w16, N, a, b]`` (dark-count model).
"""
import numpy as np

from . import _accel

MLE, CHI2, LS = 0, 1, 2
E_FLOOR = 1e-9
NORM_EPS = 1e-12

# (row, col, real index) of complex entries of W, matching states._W_OFFDIAG
_OFF = np.array([[1, 0, 4], [2, 1, 6], [3, 2, 8], [2, 0, 10], [3, 1, 12], [3, 0, 14]])


@_accel.njit
def _loss_one(x, counts, kets, kind, dark, floor, W):
    # W is caller-provided scratch; only its lower triangle is read
    for d in range(4):
        W[d, d] = x[d]
    for t in range(6):
        W[_OFF[t, 0], _OFF[t, 1]] = x[_OFF[t, 2]] + 1j * x[_OFF[t, 2] + 1]
    tr = 0.0
    for r in range(4):
        for c in range(r + 1):
            tr += W[r, c].real ** 2 + W[r, c].imag ** 2
    if tr <= NORM_EPS:
        return np.inf
    n = x[16]
    if dark:
        scale = n * (1.0 - x[17]) / tr
        offset = x[17] * n / 4.0 + x[18]
    else:
        scale = n / tr
        offset = 0.0
    total = 0.0
    for k in range(kets.shape[0]):
        s = 0.0
        for r in range(4):
            acc = 0j
            for c in range(r + 1):
                acc += W[r, c] * kets[k, c]
            s += acc.real ** 2 + acc.imag ** 2
        e = scale * s + offset
        if kind == LS:
            diff = counts[k] - e
            total += diff * diff
        else:
            if e < floor:
                e = floor
            diff = counts[k] - e
            total += diff * diff / e
            if kind == MLE:
                total += np.log(e)
    return total


@_accel.njit
def batch_loss_numba(pop, counts, kets, kind, dark, floor=E_FLOOR):
    out = np.empty(pop.shape[0])
    W = np.zeros((4, 4), dtype=np.complex128)
    for p in range(pop.shape[0]):
        out[p] = _loss_one(pop[p], counts, kets, kind, dark, floor, W)
    return out


def batch_loss_numpy(pop, counts, kets, kind, dark, floor=E_FLOOR):
    pop = np.atleast_2d(np.asarray(pop, dtype=float))
    P = pop.shape[0]
    W = np.zeros((P, 4, 4), dtype=np.complex128)
    d = np.arange(4)
    W[:, d, d] = pop[:, :4]
    W[:, _OFF[:, 0], _OFF[:, 1]] = pop[:, _OFF[:, 2]] + 1j * pop[:, _OFF[:, 2] + 1]
    tr = np.sum(np.abs(W) ** 2, axis=(1, 2))
    wpsi = np.einsum("prc,kc->pkr", W, kets)
    s = np.sum(wpsi.real ** 2 + wpsi.imag ** 2, axis=2)
    n = pop[:, 16]
    with np.errstate(divide="ignore", invalid="ignore"):
        if dark:
            a, b = pop[:, 17], pop[:, 18]
            e = (n * (1.0 - a) / tr)[:, None] * s + (a * n / 4.0 + b)[:, None]
        else:
            e = (n / tr)[:, None] * s
        if kind == LS:
            diff = counts[None, :] - e
            out = np.sum(diff * diff, axis=1)
        else:
            e = np.maximum(e, floor)
            diff = counts[None, :] - e
            out = np.sum(diff * diff / e, axis=1)
            if kind == MLE:
                out = out + np.sum(np.log(e), axis=1)
    return np.where(tr <= NORM_EPS, np.inf, out)


@_accel.njit
def pick_indices_numba(u):
    """Three distinct donor indices per member, all different from the member."""
    NP = u.shape[0]
    r = np.empty((NP, 3), dtype=np.int64)
    srt = np.empty(3, dtype=np.int64)
    for i in range(NP):
        srt[0] = i
        for m in range(3):
            v = int(u[i, m] * (NP - 1 - m))
            # skip over already-taken indices in ascending order
            for t in range(m + 1):
                if v >= srt[t]:
                    v += 1
            r[i, m] = v
            if m < 2:
                # insert v into the sorted prefix srt[:m + 1]
                t = m + 1
                while t > 0 and srt[t - 1] > v:
                    srt[t] = srt[t - 1]
                    t -= 1
                srt[t] = v
    return r


def pick_indices_numpy(u):
    NP = u.shape[0]
    taken = np.arange(NP)[:, None]
    cols = []
    for m in range(3):
        v = (u[:, m] * (NP - 1 - m)).astype(np.int64)
        srt = np.sort(taken, axis=1)
        for t in range(m + 1):
            v = v + (v >= srt[:, t])
        cols.append(v)
        taken = np.concatenate([taken, v[:, None]], axis=1)
    return np.stack(cols, axis=1)


@_accel.njit
def de_generations_numba(pop, fit, lo, hi, F, CR, u_idx, u_cross, jrand,
                         counts, kets, kind, dark, floor, history, offset):
    """Run ``u_idx.shape[0]`` rand/1/bin generations in place on ``pop``/``fit``."""
    NP, D = pop.shape
    trial = np.empty(D)
    W = np.zeros((4, 4), dtype=np.complex128)
    for g in range(u_idx.shape[0]):
        r = pick_indices_numba(u_idx[g])
        new_pop = pop.copy()
        for i in range(NP):
            for j in range(D):
                if u_cross[g, i, j] < CR or j == jrand[g, i]:
                    v = pop[r[i, 0], j] + F * (pop[r[i, 1], j] - pop[r[i, 2], j])
                    if v < lo[j]:
                        v = lo[j]
                    elif v > hi[j]:
                        v = hi[j]
                    trial[j] = v
                else:
                    trial[j] = pop[i, j]
            f = _loss_one(trial, counts, kets, kind, dark, floor, W)
            if f <= fit[i]:
                new_pop[i, :] = trial
                fit[i] = f
        pop[:, :] = new_pop
        history[offset + g] = fit.min()


def de_step_numpy(pop, fit, lo, hi, F, CR, u_idx, u_cross, jrand, evaluate):
    """One rand/1/bin generation; same arithmetic as the numba kernel."""
    NP, D = pop.shape
    r = pick_indices_numpy(u_idx)
    mutant = pop[r[:, 0]] + F * (pop[r[:, 1]] - pop[r[:, 2]])
    cross = u_cross < CR
    cross[np.arange(NP), jrand] = True
    trial = np.clip(np.where(cross, mutant, pop), lo, hi)
    f = np.asarray(evaluate(trial), dtype=float)
    better = f <= fit
    pop[better] = trial[better]
    fit[better] = f[better]


pick_indices = pick_indices_numba if _accel.USE_NUMBA else pick_indices_numpy
batch_loss = batch_loss_numba if _accel.USE_NUMBA else batch_loss_numpy
