"""Definitional brute-force versions of the quantities under test.

Nothing here touches the envelope, root-finding or deque code paths: every
quantity is read off a dense uniform sample grid (plus breakpoints).
"""
import numpy as np

from delaycert.core import DenseTrajectory

GRID = 10_000


def sample_grid(traj, n=GRID, t_lo=None, t_hi=None, extra=()):
    t_lo = traj.t_start if t_lo is None else t_lo
    t_hi = traj.t_end if t_hi is None else t_hi
    t = np.linspace(t_lo, t_hi, n)
    inner = traj.t[(traj.t > t_lo) & (traj.t < t_hi)]
    t = np.union1d(np.union1d(t, inner), np.asarray(extra, dtype=float))
    return t, traj(t)


def cell(traj, n=GRID):
    return (traj.t_end - traj.t_start) / (n - 1)


def bf_T(t, y, i, a):
    """First grid time with y_i < a (inf when never)."""
    idx = np.flatnonzero(y[:, i] < a)
    return t[idx[0]] if idx.size else np.inf


def bf_running_min(t, y, i, u):
    return float(np.min(y[t <= u, i]))


def bf_h(t, y, i, u):
    return bf_T(t, y, i, bf_running_min(t, y, i, u))


def bf_zeta(t, y, tp):
    return np.min(y[t <= tp], axis=0)


def bf_V(t, y, x):
    return float(np.exp(-min(bf_T(t, y, i, x[i]) for i in range(y.shape[1]))))


def synthetic_trajectories(rough=False):
    """Twenty test trajectories: the fixture grid, closed forms and seeded random shapes.

    Random Hermite shapes are damped oscillations with random frequency and
    phase, interpolated from their exact node slopes. With ``rough=True``
    they are random node values with independent random slopes instead,
    which gives kinks of large curvature.
    """
    out = [DenseTrajectory.piecewise_linear(np.arange(5.0), [1.0, 0.6, 0.8, 0.3, 0.1])]
    t = np.linspace(0.0, 8.0, 801)
    out.append(DenseTrajectory.from_nodes(t, np.exp(-t), -np.exp(-t)))
    for w in (2.0, 5.0, 9.0):
        y = np.exp(-0.4 * t) * (1.0 + 0.5 * np.sin(w * t))
        dy = -0.4 * y + np.exp(-0.4 * t) * 0.5 * w * np.cos(w * t)
        out.append(DenseTrajectory.from_nodes(t, y, dy))
    y2 = np.column_stack([np.exp(-t), 1.0 / (1.0 + t)])
    dy2 = np.column_stack([-np.exp(-t), -1.0 / (1.0 + t) ** 2])
    out.append(DenseTrajectory.from_nodes(t, y2, dy2))
    rng = np.random.default_rng(20)
    while len(out) < 20:
        k = int(rng.integers(5, 40))
        tt = np.sort(np.concatenate([[0.0], rng.uniform(0.0, 6.0, k - 1)]))
        tt = np.unique(tt)
        n = int(rng.integers(1, 3))
        # drifting downward with bumps, always positive
        yy = np.exp(-0.5 * tt)[:, None] * (1.0 + 0.6 * rng.random((tt.size, n)))
        if len(out) % 2:
            out.append(DenseTrajectory.piecewise_linear(tt, yy))
        else:
            noise = rng.normal(0.0, 0.5, yy.shape)
            if rough:
                out.append(DenseTrajectory.from_nodes(tt, yy, noise))
                continue
            # random-phase damped oscillation with exact node slopes
            w, ph = rng.uniform(1.0, 6.0, n), rng.uniform(0.0, 2 * np.pi, n)
            env = np.exp(-0.5 * tt)[:, None]
            yy = env * (1.0 + 0.3 * np.sin(w * tt[:, None] + ph))
            dy = -0.5 * yy + env * 0.3 * w * np.cos(w * tt[:, None] + ph)
            out.append(DenseTrajectory.from_nodes(tt, yy, dy))
    return out


def brute_bounding(field_f, field_g, phi, r, t_end, h):
    """Bounding system by RK4 on a fine grid, window sup read off stored samples.

    Scalar only. `phi` is the history function on [-r, 0]. At every stage
    time the sup is the max of the stored samples inside the window, the
    linearly interpolated value at the window edge and the stage state.
    """
    K = int(round(r / h))
    ts = list(np.linspace(-r, 0.0, K + 1))
    xs = list(phi(np.asarray(ts)))
    N = int(round(t_end / h))

    def sup(tau, v):
        T = np.asarray(ts)
        X = np.asarray(xs)
        lo = tau - r
        inside = X[T >= lo]
        edge = np.interp(lo, T, X)
        return max(inside.max() if inside.size else -np.inf, edge, v)

    x = xs[-1]
    t = 0.0
    for _ in range(N):
        def F(tau, v):
            return field_f(v) + field_g(v, sup(tau, v))
        k1 = F(t, x)
        k2 = F(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = F(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = F(t + h, x + h * k3)
        x = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        t += h
        ts.append(t)
        xs.append(x)
    return x
