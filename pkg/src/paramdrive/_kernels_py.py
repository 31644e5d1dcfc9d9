"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same signatures, same arithmetic order; used when the extension is not built
or when ``PARAMDRIVE_PURE_PYTHON=1`` is set.
"""

import numpy as np


def rk4_scalar(w2, h, y0, dy0):
    w2 = np.ascontiguousarray(w2, dtype=np.float64).tolist()
    n = (len(w2) - 1) // 2
    y = complex(y0)
    v = complex(dy0)
    hh = 0.5 * h
    h6 = h / 6.0
    ys = [y]
    dys = [v]
    for k in range(n):
        wa = w2[2 * k]
        wm = w2[2 * k + 1]
        wb = w2[2 * k + 2]
        k1y = v
        k1v = -wa * y
        k2y = v + hh * k1v
        k2v = -wm * (y + hh * k1y)
        k3y = v + hh * k2v
        k3v = -wm * (y + hh * k2y)
        k4y = v + h * k3v
        k4v = -wb * (y + h * k3y)
        y = y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v = v + h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        ys.append(y)
        dys.append(v)
    return np.array(ys, dtype=np.complex128), np.array(dys, dtype=np.complex128)


def rk4_matrix(w2, h, y0, dy0):
    w2 = np.ascontiguousarray(w2, dtype=np.float64)
    n = (w2.shape[0] - 1) // 2
    y = np.array(y0, dtype=np.complex128)
    v = np.array(dy0, dtype=np.complex128)
    out_y = np.empty((n + 1,) + y.shape, dtype=np.complex128)
    out_dy = np.empty_like(out_y)
    out_y[0] = y
    out_dy[0] = v
    hh = 0.5 * h
    h6 = h / 6.0
    for k in range(n):
        ma, mm, mb = w2[2 * k], w2[2 * k + 1], w2[2 * k + 2]
        k1v = -ma @ y
        k2y = v + hh * k1v
        k2v = -mm @ (y + hh * v)
        k3y = v + hh * k2v
        k3v = -mm @ (y + hh * k2y)
        k4y = v + h * k3v
        k4v = -mb @ (y + h * k3y)
        y = y + h6 * (v + 2.0 * k2y + 2.0 * k3y + k4y)
        v = v + h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        out_y[k + 1] = y
        out_dy[k + 1] = v
    return out_y, out_dy
