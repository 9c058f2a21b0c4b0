# coherent_qec/Analysis/ThresholdFit.py

import logging
import math
import warnings
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.optimize import OptimizeWarning, curve_fit
from sklearn.utils import resample

from coherent_qec.Errors import FitDiverged, InvalidArgument

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 0.3
DEFAULT_BOOTSTRAP = 200
COHERENCE_ALPHA = 11.0 / 6.0

_P_GRID = 61
_NU_GRID = np.linspace(0.1, 2.0, 39)

SweepRows = Union[pd.DataFrame, Iterable[Tuple[float, int, float, float]]]


class ThresholdFit(BaseModel):
    """
    Parameters of p_L = a + b (p - p_th) n^{nu_inv}, with nu_inv = 1/d.

    `p_th_err` is the larger of the curvature and bootstrap estimates.
    """
    a: float
    b: float
    d: float
    nu_inv: float
    p_th: float
    a_err: float
    b_err: float
    d_err: float
    p_th_err: float
    p_th_err_curvature: float
    p_th_err_bootstrap: float
    residual: float
    window: float
    rows_used: int
    bootstrap_used: int


def scaling_ansatz(X: Tuple[np.ndarray, np.ndarray], a: float, b: float, p_th: float, nu_inv: float) -> np.ndarray:
    p, n = X
    return a + b * (p - p_th) * np.power(n, nu_inv)


def _as_frame(data: SweepRows) -> pd.DataFrame:
    frame = data.copy() if isinstance(data, pd.DataFrame) else pd.DataFrame(list(data), columns=["p", "n", "p_L", "stderr"])
    missing = {"p", "n", "p_L", "stderr"} - set(frame.columns)
    if missing:
        raise InvalidArgument(f"Sweep data lacks columns {sorted(missing)}.")
    frame = frame[["p", "n", "p_L", "stderr"]].astype(float)
    # Row order must not influence the fit.
    return frame.sort_values(["n", "p", "p_L", "stderr"]).reset_index(drop=True)


def _floored_sigma(stderr: np.ndarray) -> np.ndarray:
    positive = stderr[stderr > 0]
    floor = positive.min() if positive.size else 1.0
    return np.where(stderr > 0, stderr, floor)


def _grid_search(p: np.ndarray, n: np.ndarray, y: np.ndarray, sigma: np.ndarray):
    """
    Best (a, b, p_th, nu_inv) over a p_th x nu_inv grid, with (a, b) from the
    closed-form weighted linear fit at each grid point.
    """
    w = 1.0 / sigma ** 2
    p_grid = np.linspace(p.min(), p.max(), _P_GRID)
    P, V = np.meshgrid(p_grid, _NU_GRID, indexing="ij")
    P, V = P.reshape(-1, 1), V.reshape(-1, 1)
    x = (p[None, :] - P) * np.power(n[None, :], V)
    S, Sy = w.sum(), (w * y).sum()
    Sx, Sxx, Sxy = (w * x).sum(axis=1), (w * x * x).sum(axis=1), (w * x * y).sum(axis=1)
    det = S * Sxx - Sx ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        b = (S * Sxy - Sx * Sy) / det
        a = (Sy - b * Sx) / S
        chi2 = (w * (y[None, :] - a[:, None] - b[:, None] * x) ** 2).sum(axis=1)
    chi2 = np.where(np.isfinite(chi2) & (b > 0), chi2, np.inf)
    k = int(np.argmin(chi2))
    if not np.isfinite(chi2[k]):
        raise FitDiverged("No grid point gives curves that fan out with n.", {"grid_points": int(chi2.size)})
    return float(a[k]), float(b[k]), float(P[k, 0]), float(V[k, 0])


def _refine(p: np.ndarray, n: np.ndarray, y: np.ndarray, sigma: np.ndarray):
    start = _grid_search(p, n, y, sigma)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            params, cov = curve_fit(scaling_ansatz, (p, n), y, p0=start, sigma=sigma, absolute_sigma=True,
                                    maxfev=20000)
    except (RuntimeError, ValueError) as e:
        raise FitDiverged(f"Least-squares refinement failed: {e}", {"start": start}) from e
    a, b, p_th, nu_inv = (float(v) for v in params)
    diagnostics = {"a": a, "b": b, "p_th": p_th, "nu_inv": nu_inv, "p_range": (float(p.min()), float(p.max()))}
    if not all(math.isfinite(v) for v in (a, b, p_th, nu_inv)):
        raise FitDiverged("Fit produced non-finite parameters.", diagnostics)
    if b <= 0 or nu_inv <= 0:
        raise FitDiverged("Fitted curves do not cross: b or nu_inv is not positive.", diagnostics)
    if not p.min() <= p_th <= p.max():
        raise FitDiverged(f"Fitted crossing p_th={p_th:.4g} lies outside the data range.", diagnostics)
    return params, cov


def _window_rows(frame: pd.DataFrame, window: float) -> pd.DataFrame:
    p, n, y = frame["p"].to_numpy(), frame["n"].to_numpy(), frame["p_L"].to_numpy()
    sigma = _floored_sigma(frame["stderr"].to_numpy())
    first = _grid_search(p, n, y, sigma)[2]
    kept = frame[np.abs(frame["p"] - first) <= window * first]
    if kept["p"].nunique() < 3 or kept["n"].nunique() < 3:
        log.warning(f"Fit window {window} around p={first:.4g} keeps too few points; using all rows.")
        return frame
    return kept


def fit_threshold(data: SweepRows, window: float = DEFAULT_WINDOW, bootstrap: int = DEFAULT_BOOTSTRAP,
                  random_state: Optional[int] = 0) -> ThresholdFit:
    """
    Weighted least-squares fit of the finite-size scaling ansatz around the crossing.

    Raises FitDiverged when the data show no crossing.
    """
    frame = _as_frame(data)
    if frame["p"].nunique() < 3 or frame["n"].nunique() < 3:
        raise InvalidArgument("fit_threshold needs at least three distinct p and three distinct n values.")
    rows = _window_rows(frame, window)
    p, n, y = rows["p"].to_numpy(), rows["n"].to_numpy(), rows["p_L"].to_numpy()
    sigma = _floored_sigma(rows["stderr"].to_numpy())
    params, cov = _refine(p, n, y, sigma)
    a, b, p_th, nu_inv = (float(v) for v in params)
    errors = np.sqrt(np.clip(np.diag(cov), 0.0, None)) if np.all(np.isfinite(cov)) else np.full(4, np.nan)

    residuals = (y - scaling_ansatz((p, n), *params)) / sigma
    dof = max(len(y) - 4, 1)
    residual = float(np.sum(residuals ** 2) / dof)

    boot = []
    for i in range(bootstrap):
        seed = None if random_state is None else random_state + i
        pb, nb, yb, sb = resample(p, n, y, sigma, random_state=seed)
        if np.unique(pb).size < 3 or np.unique(nb).size < 3:
            continue
        try:
            boot.append(float(_refine(pb, nb, yb, sb)[0][2]))
        except FitDiverged:
            continue
    boot_err = float(np.std(boot, ddof=1)) if len(boot) > 1 else math.nan
    curvature_err = float(errors[2])
    finite = [e for e in (curvature_err, boot_err) if math.isfinite(e)]
    p_th_err = max(finite) if finite else math.nan

    d_err = float(errors[3] / nu_inv ** 2) if math.isfinite(errors[3]) else math.nan
    log.info(f"Threshold fit: p_th={p_th:.5f} +- {p_th_err:.2g} (curvature {curvature_err:.2g}, "
             f"bootstrap {boot_err:.2g} from {len(boot)} resamples), d={1.0 / nu_inv:.3f}, chi2/dof={residual:.3g}")
    return ThresholdFit(a=a, b=b, d=1.0 / nu_inv, nu_inv=nu_inv, p_th=p_th, a_err=float(errors[0]),
                        b_err=float(errors[1]), d_err=d_err, p_th_err=p_th_err, p_th_err_curvature=curvature_err,
                        p_th_err_bootstrap=boot_err, residual=residual, window=window, rows_used=len(y),
                        bootstrap_used=len(boot))


def decay_rate(p_L_d: float, p_L_d2: float) -> float:
    """lambda(d, p) = p_L(d+2, p) / p_L(d, p)."""
    if p_L_d <= 0.0 or p_L_d2 <= 0.0:
        raise InvalidArgument(f"decay_rate needs positive logical error rates, got {p_L_d} and {p_L_d2}.")
    return p_L_d2 / p_L_d


def decay_prediction(p: float, p_th: float) -> float:
    """Sub-threshold expectation lambda ~ p / p_th."""
    if p_th <= 0.0:
        raise InvalidArgument(f"p_th must be positive, got {p_th}.")
    return p / p_th


def ansatz_threshold(p_th0: float, c: float, alpha: float = COHERENCE_ALPHA) -> float:
    """p_th(c) ~ p_th(0) / (1 + alpha c^2)."""
    if not 0.0 <= c <= 1.0:
        raise InvalidArgument(f"Coherence c must lie in [0, 1], got {c}.")
    if p_th0 < 0.0 or alpha < 0.0:
        raise InvalidArgument("p_th0 and alpha must be nonnegative.")
    return p_th0 / (1.0 + alpha * c * c)


def ansatz_deviation(measured: Sequence[Tuple[float, float]], p_th0: float, alpha: float = COHERENCE_ALPHA) -> pd.DataFrame:
    """Relative deviation of measured (c, p_th) pairs from the coherence ansatz."""
    rows = [(c, p_th, ansatz_threshold(p_th0, c, alpha)) for c, p_th in measured]
    frame = pd.DataFrame(rows, columns=["c", "p_th", "ansatz"])
    frame["relative_deviation"] = (frame["p_th"] - frame["ansatz"]) / frame["ansatz"]
    return frame
