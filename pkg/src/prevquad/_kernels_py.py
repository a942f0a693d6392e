"""NumPy implementations of the hot kernels.

These are the reference semantics for the compiled extension in
``_kernels.pyx``; both backends expose the same four functions and must agree
to floating-point roundoff. Selection happens in ``_backend``.

Conventions shared by both backends:

* a boundary is linear in its packed parameters: with chi = (r, 1) of length
  d = m + 1, the packed feature row z(r) has one entry per (i, j), i <= j,
  in row-major order over the upper triangle, equal to chi_i * chi_j on the
  diagonal and 2 * chi_i * chi_j off it, so that value(r) = z(r) . params;
* the sigmoid is 0.5 * (1 + tanh(x)) with a saturation guard: for
  |x| > TANH_CUTOFF the value is exactly 0 or 1 and the derivative exactly 0,
  which keeps the sigma^2 -> 0 limit free of sech^2 underflow noise.
"""

from __future__ import annotations

import numpy as np

TANH_CUTOFF = 30.0


def design_matrix(R: np.ndarray) -> np.ndarray:
    """Packed quadratic feature rows z(r) for each measurement row of ``R``.

    Parameters
    ----------
    R : (n, m) float64 array

    Returns
    -------
    (n, P) float64 array with P = (m + 1)(m + 2) / 2.
    """
    R = np.ascontiguousarray(R, dtype=float)
    n, m = R.shape
    d = m + 1
    chi = np.empty((n, d), dtype=float)
    chi[:, :m] = R
    chi[:, m] = 1.0
    cols = []
    for i in range(d):
        cols.append(chi[:, i] * chi[:, i])
        for j in range(i + 1, d):
            cols.append(2.0 * chi[:, i] * chi[:, j])
    return np.column_stack(cols)


def eval_batch(Z: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Boundary values Z @ phi for precomputed feature rows."""
    return Z @ phi


def _sigmoid_pair(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """H(x) = 0.5*(1 + tanh x) and H'(x), with the saturation guard applied."""
    xc = np.clip(x, -TANH_CUTOFF, TANH_CUTOFF)
    h = 0.5 * (1.0 + np.tanh(xc))
    hp = 0.5 / np.cosh(xc) ** 2
    hi = x > TANH_CUTOFF
    lo = x < -TANH_CUTOFF
    h[hi] = 1.0
    h[lo] = 0.0
    hp[hi | lo] = 0.0
    return h, hp


def risk_terms(
    Zp: np.ndarray,
    Zn: np.ndarray,
    phi: np.ndarray,
    q: float,
    sigma2: float,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Smoothed risk, its gradient, and the mean-square boundary value terms.

    Returns
    -------
    risk : float
        (q / n_p) * sum(1 - H(b_p / sigma2)) + ((1-q) / n_n) * sum(H(b_n / sigma2)).
    risk_grad : (P,) array
        Exact gradient of ``risk`` w.r.t. the packed parameters.
    msq : float
        sum(b_p^2) / n_p + sum(b_n^2) / n_n.
    msq_grad : (P,) array
        Exact gradient of ``msq``.
    """
    n_p = Zp.shape[0]
    n_n = Zn.shape[0]
    bp = Zp @ phi
    bn = Zn @ phi
    hp_val, hp_der = _sigmoid_pair(bp / sigma2)
    hn_val, hn_der = _sigmoid_pair(bn / sigma2)
    risk = (q / n_p) * float(np.sum(1.0 - hp_val)) + ((1.0 - q) / n_n) * float(
        np.sum(hn_val)
    )
    risk_grad = -(q / (n_p * sigma2)) * (Zp.T @ hp_der) + (
        (1.0 - q) / (n_n * sigma2)
    ) * (Zn.T @ hn_der)
    msq = float(np.sum(bp * bp)) / n_p + float(np.sum(bn * bn)) / n_n
    msq_grad = (2.0 / n_p) * (Zp.T @ bp) + (2.0 / n_n) * (Zn.T @ bn)
    return risk, risk_grad, msq, msq_grad


def hinge_penalty(
    Zs: np.ndarray, Phi: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Squared-hinge monotonicity penalty over shadow-point feature rows.

    For boundary values B[i, j] = z(rho_i) . Phi[j], sums
    max(0, B[i, j] - B[i, j+1])^2 over all shadow points i and consecutive
    level pairs j.

    Returns
    -------
    penalty : float
    grad : (theta, P) array, gradient w.r.t. each level's parameters
    max_violation : float, largest positive B[i, j] - B[i, j+1] (0 if none)
    """
    B = Zs @ Phi.T
    grad = np.zeros_like(Phi)
    if B.shape[1] < 2 or B.shape[0] == 0:
        return 0.0, grad, 0.0
    D = B[:, :-1] - B[:, 1:]
    V = np.maximum(D, 0.0)
    penalty = float(np.sum(V * V))
    GB = np.zeros_like(B)
    GB[:, :-1] += 2.0 * V
    GB[:, 1:] -= 2.0 * V
    grad[:] = GB.T @ Zs
    return penalty, grad, float(V.max())
