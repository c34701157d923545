"""Piecewise-linear cadlag paths with an exact jump-plus-drift representation.

A path is stored as breakpoints ``times[k]`` with right-continuous values
``values[k]`` and a drift slope ``slopes[k]`` on ``[times[k], times[k+1])``
(the last slope extends to the horizon). Jumps are the discontinuities
between the left limit of one segment and the value opening the next, so
evaluation at breakpoints is exact and excursion endpoints are roots of
linear equations rather than bracketed approximations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _tol(scale: float) -> float:
    return 1e-9 * max(1.0, abs(scale))


@dataclass
class CadlagPath:
    times: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    horizon: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.slopes = np.asarray(self.slopes, dtype=float)
        if self.times.size == 0 or self.times[0] != 0.0:
            raise ValueError("path must start at time 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.times[-1] > self.horizon:
            raise ValueError("breakpoint beyond horizon")
        if not (self.times.shape == self.values.shape == self.slopes.shape):
            raise ValueError("times/values/slopes must have equal length")

    # -- construction ---------------------------------------------------

    @classmethod
    def from_jumps(cls, horizon, jump_times, jump_sizes, drift=0.0, start=0.0):
        """Path ``start + drift*t + sum of jumps up to t``.

        Jump times must lie in (0, horizon]; zero-size jumps are dropped.
        Coinciding jump times are merged by summing their sizes.
        """
        jt = np.asarray(jump_times, dtype=float)
        js = np.asarray(jump_sizes, dtype=float)
        keep = js != 0.0
        jt, js = jt[keep], js[keep]
        if jt.size and (jt.min() <= 0.0 or jt.max() > horizon):
            raise ValueError("jump times must lie in (0, horizon]")
        order = np.argsort(jt, kind="stable")
        jt, js = jt[order], js[order]
        ut, inv = np.unique(jt, return_inverse=True)
        us = np.zeros_like(ut)
        np.add.at(us, inv, js)
        times = np.concatenate(([0.0], ut))
        cum = np.concatenate(([0.0], np.cumsum(us)))
        values = start + drift * times + cum
        slopes = np.full(times.shape, float(drift))
        return cls(times, values, slopes, float(horizon))

    @classmethod
    def step_function(cls, values, horizon=None, dt=1.0):
        """Right-continuous step path through ``values`` at spacing ``dt``."""
        values = np.asarray(values, dtype=float)
        times = np.arange(values.size) * float(dt)
        if horizon is None:
            horizon = times[-1] if values.size else 0.0
        return cls(times, values, np.zeros_like(values), float(horizon))

    @classmethod
    def piecewise_linear(cls, times, values, horizon=None):
        """Continuous path interpolating (times, values) linearly."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if horizon is None:
            horizon = times[-1]
        dt = np.diff(times)
        slopes = np.concatenate((np.diff(values) / dt, [0.0]))
        return cls(times, values, slopes, float(horizon))

    # -- evaluation -----------------------------------------------------

    def segment_index(self, t):
        idx = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(idx, 0, len(self.times) - 1)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        k = self.segment_index(t)
        out = self.values[k] + self.slopes[k] * (t - self.times[k])
        return out if out.ndim else float(out)

    def slope_at(self, t):
        return self.slopes[self.segment_index(t)]

    def left_limits(self):
        """Left limit of the path at each breakpoint (= value at t=0 for k=0)."""
        seg_end = self.values[:-1] + self.slopes[:-1] * np.diff(self.times)
        return np.concatenate(([self.values[0]], seg_end))

    def jumps(self):
        """(times, sizes) of the nonzero jumps."""
        sizes = self.values - self.left_limits()
        keep = sizes != 0.0
        return self.times[keep], sizes[keep]

    def has_negative_jumps(self, tol=None):
        _, sizes = self.jumps()
        if sizes.size == 0:
            return False
        if tol is None:
            tol = _tol(np.max(np.abs(self.values)))
        return bool(np.any(sizes < -tol))

    def is_nondecreasing(self, tol=None):
        if tol is None:
            tol = _tol(np.max(np.abs(self.values)))
        _, sizes = self.jumps()
        return bool(np.all(self.slopes >= -tol)) and not np.any(sizes < -tol)

    def final_value(self):
        return self.eval(self.horizon)

    # -- derived paths ---------------------------------------------------

    def running_minimum(self) -> "CadlagPath":
        """Continuous non-increasing path ``t -> inf_{s<=t} f(s)``."""
        out_t, out_v, out_s = [], [], []
        m = self.values[0]
        K = len(self.times)
        for k in range(K):
            a = self.times[k]
            b = self.times[k + 1] if k + 1 < K else self.horizon
            v, s = self.values[k], self.slopes[k]
            m = min(m, v)
            if v <= m and s < 0.0:
                # path rides the minimum down through the whole segment
                out_t.append(a), out_v.append(m), out_s.append(s)
                m = v + s * (b - a)
            elif s < 0.0:
                end = v + s * (b - a)
                if end < m:
                    tstar = a + (m - v) / s
                    out_t.append(a), out_v.append(m), out_s.append(0.0)
                    if tstar > a:
                        out_t.append(tstar), out_v.append(m), out_s.append(s)
                    else:
                        out_s[-1] = s
                    m = end
                else:
                    out_t.append(a), out_v.append(m), out_s.append(0.0)
            else:
                out_t.append(a), out_v.append(m), out_s.append(0.0)
        # collapse duplicate breakpoints introduced by tstar == a edge cases
        t = np.asarray(out_t)
        keep = np.concatenate(([True], np.diff(t) > 0))
        return CadlagPath(t[keep], np.asarray(out_v)[keep], np.asarray(out_s)[keep], self.horizon)

    def reflected(self) -> "CadlagPath":
        """Pathwise ``f - running minimum``; non-negative everywhere."""
        m = self.running_minimum()
        ts = np.union1d(self.times, m.times)
        vals = np.atleast_1d(self.eval(ts)) - np.atleast_1d(m.eval(ts))
        slopes = self.slope_at(ts) - m.slope_at(ts)
        return CadlagPath(ts, vals, slopes, self.horizon)

    # -- export -----------------------------------------------------------

    def sample_grid(self, step):
        """(t, f(t)) on a regular grid of spacing ``step`` (plus the horizon)."""
        if step <= 0:
            raise ValueError("grid step must be positive")
        t = np.arange(0.0, self.horizon + step * 0.5, step)
        if t.size == 0 or t[-1] < self.horizon:
            t = np.append(t, self.horizon)
        return t, np.atleast_1d(self.eval(t))
