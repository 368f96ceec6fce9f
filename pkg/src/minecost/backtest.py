"""Orchestration of the full empirical study on a paired price series.

Given difficulty-epoch observations, a reward schedule, and an efficiency
table, this module builds the (market, model) pair, computes the
premium/discount ratio series and its moments, fits level and log-log
regressions of market on model, selects a VAR lag order, runs both Granger
directions, flags heuristic bubble episodes, and assembles everything into
a serializable report with full provenance.
"""

from __future__ import annotations

import datetime as dt
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .dataset import (
    EfficiencyTable,
    ObservationRecord,
    PairedSeries,
    RewardSchedule,
    build_backtest_series,
)
from .econometrics import (
    GrangerResult,
    LagSelection,
    RegressionResult,
    VarModel,
    granger_wald,
    log_transform,
    ols_fit,
    select_lag_order,
    var_fit,
)
from .errors import DegenerateThresholdWarning, DomainError
from .pricing import DEFAULT_ELECTRICITY_USD_PER_KWH

MARKET, MODEL = "market", "model"

CAVEATS = (
    "VAR and Granger statistics are computed on log price levels without "
    "unit-root screening or differencing; both series trend strongly, so "
    "treat the significance flags as descriptive.",
    "Bubble episodes come from a heuristic threshold rule (ratio above its "
    "full-sample mean plus k sigma for a minimum run length), not from a "
    "formal date-stamping procedure.",
)


@dataclass
class RatioStats:
    """Market/model price ratio per date, with sample moments.

    A ratio of 1 means the market trades exactly at the production-cost
    price; above 1 is a market premium, below 1 a discount. The standard
    deviation uses the n-1 divisor (0 for a single observation).
    """

    dates: tuple[dt.date, ...]
    ratios: np.ndarray
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class BubbleEpisode:
    """A sustained run of ratios above the episode threshold."""

    start_date: dt.date
    end_date: dt.date
    peak_ratio: float
    peak_date: dt.date


@dataclass
class BacktestConfig:
    """Knobs for a backtest run; defaults mirror the reference analysis."""

    electricity_price: float = DEFAULT_ELECTRICITY_USD_PER_KWH
    lags: int | None = 2  # None selects by BIC + whiteness
    max_p: int = 8
    entry_k: float = 2.0
    min_len: int = 2
    include_timestamp: bool = True


def ratio_series(pair: PairedSeries) -> RatioStats:
    """Elementwise market/model ratio with sample mean, sd, min, max."""
    model = pair.model_prices
    if np.any(model <= 0.0):
        raise DomainError("model prices must be positive to form ratios")
    ratios = pair.market_prices / model
    n = ratios.size
    std = float(np.std(ratios, ddof=1)) if n >= 2 else 0.0
    return RatioStats(
        dates=pair.dates,
        ratios=ratios,
        mean=float(ratios.mean()),
        std=std,
        min=float(ratios.min()),
        max=float(ratios.max()),
    )


def detect_episodes(
    stats: RatioStats, entry_k: float = 2.0, min_len: int = 2
) -> list[BubbleEpisode]:
    """Flag maximal runs of ratios above ``mean + entry_k * std``.

    A run qualifies as an episode when it spans at least ``min_len``
    consecutive observations; it ends at the last observation above the
    threshold. With zero ratio dispersion no threshold can be formed, so the
    result is empty and a DegenerateThresholdWarning is issued.
    """
    if min_len < 1:
        raise DomainError(f"min_len must be >= 1, got {min_len!r}")
    if stats.std == 0.0:
        warnings.warn(
            "ratio series has zero dispersion; episode threshold is degenerate",
            DegenerateThresholdWarning,
            stacklevel=2,
        )
        return []
    threshold = stats.mean + entry_k * stats.std
    above = stats.ratios > threshold
    episodes = []
    start = None
    for i, flag in enumerate(np.append(above, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            length = i - start
            if length >= min_len:
                run = stats.ratios[start:i]
                peak_offset = int(np.argmax(run))
                episodes.append(
                    BubbleEpisode(
                        start_date=stats.dates[start],
                        end_date=stats.dates[i - 1],
                        peak_ratio=float(run[peak_offset]),
                        peak_date=stats.dates[start + peak_offset],
                    )
                )
            start = None
    return episodes


def regression_to_dict(fit: RegressionResult) -> dict:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "stderr_slope": fit.stderr_slope,
        "stderr_intercept": fit.stderr_intercept,
        "n": fit.n,
        "degenerate": fit.degenerate,
    }


def ratio_to_dict(stats: RatioStats) -> dict:
    return {
        "mean": stats.mean,
        "std": stats.std,
        "min": stats.min,
        "max": stats.max,
        "series": [
            {"date": d.isoformat(), "ratio": float(r)}
            for d, r in zip(stats.dates, stats.ratios)
        ],
    }


def episodes_to_dict(episodes: list[BubbleEpisode]) -> list[dict]:
    return [
        {
            "start_date": e.start_date.isoformat(),
            "end_date": e.end_date.isoformat(),
            "peak_ratio": e.peak_ratio,
            "peak_date": e.peak_date.isoformat(),
        }
        for e in episodes
    ]


@dataclass
class BacktestReport:
    """Everything one run produces, ready for table or JSON emission."""

    pair: PairedSeries
    ratio_stats: RatioStats
    level_fit: RegressionResult
    log_fit: RegressionResult
    lag_selection: LagSelection
    var_model: VarModel
    granger_results: tuple[GrangerResult, GrangerResult]
    episodes: list[BubbleEpisode]
    caveats: tuple[str, ...]
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Plain-type payload; deterministic given identical inputs."""
        return {
            "ratio": ratio_to_dict(self.ratio_stats),
            "prices": [
                {"date": d.isoformat(), "market": float(a), "model": float(b)}
                for d, a, b in zip(
                    self.pair.dates, self.pair.market_prices, self.pair.model_prices
                )
            ],
            "level_regression": regression_to_dict(self.level_fit),
            "log_regression": regression_to_dict(self.log_fit),
            "lag_selection": {
                "chosen_p": self.lag_selection.chosen_p,
                "whiteness_alpha": self.lag_selection.whiteness_alpha,
                "all_failed_whiteness": self.lag_selection.all_failed_whiteness,
                "table": [
                    {
                        "p": row.p,
                        "aic": row.aic,
                        "bic": row.bic,
                        "portmanteau_stat": row.portmanteau_stat,
                        "portmanteau_df": row.portmanteau_df,
                        "portmanteau_pvalue": row.portmanteau_pvalue,
                        "passes_whiteness": row.passes_whiteness,
                    }
                    for row in self.lag_selection.rows
                ],
            },
            "var": {
                "lag_order": self.var_model.lag_order,
                "names": list(self.var_model.names),
                "nobs": self.var_model.nobs,
                "intercepts": [float(v) for v in self.var_model.intercepts],
                "coef_matrices": [
                    [[float(v) for v in row] for row in mat]
                    for mat in self.var_model.coef_matrices
                ],
                "resid_cov": [
                    [float(v) for v in row] for row in self.var_model.resid_cov
                ],
            },
            "granger": [
                {
                    "null": g.null_hypothesis(),
                    "cause": g.cause,
                    "effect": g.effect,
                    "chi2": g.chi2_stat,
                    "df": g.df,
                    "p_value": g.p_value,
                    "significant_at_5pct": g.p_value < 0.05,
                }
                for g in self.granger_results
            ],
            "episodes": episodes_to_dict(self.episodes),
            "caveats": list(self.caveats),
            "provenance": dict(self.provenance),
        }


def run_backtest(
    records: Sequence[ObservationRecord],
    schedule: RewardSchedule,
    table: EfficiencyTable | None,
    config: BacktestConfig | None = None,
    input_files: dict | None = None,
) -> BacktestReport:
    """Run the whole study on one dataset.

    Builds the paired series, computes ratio statistics, fits the level and
    log-log regressions of market price on model price, selects a lag order
    up to ``config.max_p`` (used when ``config.lags`` is None), fits the VAR
    on the log series, tests both Granger directions, and detects episodes.

    ``input_files`` is recorded verbatim in the provenance block.
    """
    config = config or BacktestConfig()
    pair = build_backtest_series(
        records, schedule, table, electricity_price=config.electricity_price
    )
    stats = ratio_series(pair)

    level_fit = ols_fit(pair.model_prices, pair.market_prices)
    log_market = log_transform(pair.market_prices)
    log_model = log_transform(pair.model_prices)
    log_fit = ols_fit(log_model, log_market)

    logs = np.column_stack([log_market, log_model])
    selection = select_lag_order(logs, config.max_p, names=(MARKET, MODEL))
    lag_order = config.lags if config.lags is not None else selection.chosen_p
    model = var_fit(logs, lag_order, names=(MARKET, MODEL))
    granger = (
        granger_wald(model, cause=MARKET, effect=MODEL),
        granger_wald(model, cause=MODEL, effect=MARKET),
    )
    episodes = detect_episodes(stats, entry_k=config.entry_k, min_len=config.min_len)

    provenance = {
        "package_version": __version__,
        "parameters": {
            "electricity_price": config.electricity_price,
            "lags": "auto" if config.lags is None else config.lags,
            "max_p": config.max_p,
            "entry_k": config.entry_k,
            "min_len": config.min_len,
        },
        "n_observations": len(records),
        "input_files": dict(input_files or {}),
    }
    if config.include_timestamp:
        provenance["generated_at"] = dt.datetime.now(dt.timezone.utc).isoformat()

    return BacktestReport(
        pair=pair,
        ratio_stats=stats,
        level_fit=level_fit,
        log_fit=log_fit,
        lag_selection=selection,
        var_model=model,
        granger_results=granger,
        episodes=episodes,
        caveats=CAVEATS,
        provenance=provenance,
    )
