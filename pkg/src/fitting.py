# Least-squares decay and proportionality fits used by profiles, scans and suites

import logging
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from utils.config import Config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayFit:
    """
    log(value) = intercept + slope * x over the points above the floor

    flag is "ok", "floor" (too few points above the floor) or "no-decay"
    (slope not clearly negative).
    """

    slope: float
    intercept: float
    r2: float
    n_points: int
    flag: str
    residuals: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def length(self) -> float:
        """Decay length -1/slope; inf unless the fit decays"""
        if self.flag != "ok" or not self.slope < 0:
            return float(np.inf)
        return float(-1.0 / self.slope)

    @property
    def rate(self) -> float:
        return float(-self.slope) if np.isfinite(self.slope) else float("nan")

    @property
    def prefactor(self) -> float:
        return float(np.exp(self.intercept)) if np.isfinite(self.intercept) else float("nan")


def _regress(x: np.ndarray, y: np.ndarray, fit_intercept: bool = True):
    model = LinearRegression(fit_intercept=fit_intercept)
    model.fit(x.reshape(-1, 1), y)
    predicted = model.predict(x.reshape(-1, 1))
    r2 = float(r2_score(y, predicted)) if len(y) > 1 and np.ptp(y) > 0 else 1.0
    return model, predicted, r2


def fit_log_decay(x: Sequence[float], values: Sequence[float],
                  floor: float = Config.FIT_FLOOR,
                  min_points: int = Config.FIT_MIN_POINTS) -> DecayFit:
    """
    Fit an exponential decay to the values above the noise floor

    Args:
        x: Abscissae (separations, times, tower depths)
        values: Nonnegative measured values
        floor: Points at or below this are excluded
        min_points: Minimum usable points

    Returns:
        DecayFit: Slope of the natural log, intercept, R^2 and flag
    """
    x = np.asarray(x, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    mask = values > floor
    if mask.sum() < min_points:
        logger.warning("decay fit flagged floor: %d of %d points above %.1e", mask.sum(), len(values), floor)
        return DecayFit(float("nan"), float("nan"), float("nan"), int(mask.sum()), "floor")

    xs, ys = x[mask], np.log(values[mask])
    model, predicted, r2 = _regress(xs, ys)
    slope = float(model.coef_[0])
    flag = "ok"
    if slope > -Config.NO_DECAY_SLOPE:
        flag = "no-decay"
        logger.warning("decay fit flagged no-decay: slope %.3e", slope)
    logger.debug("decay fit slope=%.4f intercept=%.4f r2=%.4f", slope, model.intercept_, r2)
    return DecayFit(slope, float(model.intercept_), r2, int(mask.sum()), flag,
                    tuple(float(v) for v in ys - predicted))


@dataclass(frozen=True)
class ProportionalFit:
    """y = K x through the origin"""

    constant: float
    r2: float
    max_ratio: float


def fit_proportional(x: Sequence[float], y: Sequence[float]) -> ProportionalFit:
    """
    Least-squares constant K in y = K x, with R^2 and the largest pointwise ratio

    Args:
        x: Predictor values (e.g. sqrt of CMI)
        y: Responses (e.g. marginal defects)

    Returns:
        ProportionalFit: Fitted constant, R^2, max y/x over x > 0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    model, _, r2 = _regress(x, y, fit_intercept=False)
    positive = x > Config.FIT_FLOOR
    ratio = float((y[positive] / x[positive]).max()) if positive.any() else 0.0
    return ProportionalFit(float(model.coef_[0]), r2, ratio)


def fit_line(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """Ordinary least squares (slope, intercept, R^2)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    model, _, r2 = _regress(x, y)
    return float(model.coef_[0]), float(model.intercept_), r2
